//! Largest-singular-value estimation for matrix-free operators on spinor fields.
//!
//! Both methods work on the Hermitian product `S*S`: plain power iteration with
//! Rayleigh-quotient convergence, and a restarted Lanczos iteration (full
//! reorthogonalization inside each cycle) that stays accurate when the top of
//! the spectrum is clustered, as it is for multipliers on large lattices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::grid::SpinorField;
use crate::linalg::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum NormMethod {
    Power,
    #[default]
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    #[serde(default)]
    pub method: NormMethod,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 500,
            seed: 0,
            method: NormMethod::Lanczos,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    /// Number of `S*S` applications.
    pub iterations: usize,
    pub converged: bool,
    /// Largest `|Im ⟨v, S*S v⟩| / |⟨v, S*S v⟩|` seen; zero up to rounding for a true adjoint pair.
    pub rayleigh_imag: f64,
}

const LANCZOS_CYCLE: usize = 100;

/// Estimates `‖S‖` given `S` and its adjoint `S*`, starting from `start`.
pub fn largest_singular_value<F, G>(apply: F, adjoint: G, start: SpinorField, opts: &PowerOptions) -> NormEstimate
where
    F: Fn(&SpinorField) -> SpinorField,
    G: Fn(&SpinorField) -> SpinorField,
{
    let normal = |v: &SpinorField| adjoint(&apply(v));
    match opts.method {
        NormMethod::Power => power(normal, start, opts),
        NormMethod::Lanczos => lanczos(normal, start, opts),
    }
}

/// Top eigenvalue of a Hermitian positive semidefinite operator.
pub fn largest_eigenvalue<F>(op: F, start: SpinorField, opts: &PowerOptions) -> NormEstimate
where
    F: Fn(&SpinorField) -> SpinorField,
{
    let mut est = match opts.method {
        NormMethod::Power => power(&op, start, opts),
        NormMethod::Lanczos => lanczos(&op, start, opts),
    };
    est.value = est.value * est.value;
    est
}

fn power<F>(normal: F, start: SpinorField, opts: &PowerOptions) -> NormEstimate
where
    F: Fn(&SpinorField) -> SpinorField,
{
    let mut v = start.normalized();
    let mut prev = f64::NAN;
    let mut imag: f64 = 0.0;
    for it in 1..=opts.max_iter {
        let u = normal(&v);
        let rq = v.inner(&u);
        if rq.norm() > 0.0 {
            imag = imag.max(rq.im.abs() / rq.norm());
        }
        let sigma = rq.re.max(0.0).sqrt();
        let un = u.norm();
        if un == 0.0 {
            return NormEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
                rayleigh_imag: imag,
            };
        }
        if (sigma - prev).abs() <= opts.tol * sigma {
            return NormEstimate {
                value: sigma,
                iterations: it,
                converged: true,
                rayleigh_imag: imag,
            };
        }
        prev = sigma;
        v = u.scaled(C64::new(1.0 / un, 0.0));
    }
    NormEstimate {
        value: prev,
        iterations: opts.max_iter,
        converged: false,
        rayleigh_imag: imag,
    }
}

fn top_tridiagonal(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = nalgebra::SymmetricEigen::new(t);
    let (idx, &theta) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    (theta, eig.eigenvectors.column(idx).iter().copied().collect())
}

fn lanczos<F>(normal: F, start: SpinorField, opts: &PowerOptions) -> NormEstimate
where
    F: Fn(&SpinorField) -> SpinorField,
{
    let mut v = start.normalized();
    let mut total = 0;
    let mut imag: f64 = 0.0;
    let mut theta;
    loop {
        let mut basis: Vec<SpinorField> = vec![v.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let mut converged = false;
        let mut y: Vec<f64> = vec![1.0];
        loop {
            let k = basis.len() - 1;
            let mut w = normal(&basis[k]);
            total += 1;
            let rq = basis[k].inner(&w);
            if rq.norm() > 0.0 {
                imag = imag.max(rq.im.abs() / rq.norm());
            }
            let alpha = rq.re;
            alphas.push(alpha);
            // two passes of classical Gram-Schmidt against the whole cycle basis
            for _ in 0..2 {
                for b in &basis {
                    let c = b.inner(&w);
                    w.axpy(-c, b);
                }
            }
            let beta = w.norm();
            let (th, yy) = top_tridiagonal(&alphas, &betas);
            theta = th;
            y = yy;
            let residual = beta * y.last().unwrap().abs();
            if theta <= 0.0 && beta == 0.0 {
                return NormEstimate {
                    value: 0.0,
                    iterations: total,
                    converged: true,
                    rayleigh_imag: imag,
                };
            }
            if residual <= opts.tol * theta.abs() || beta <= 1e-14 * theta.abs() {
                converged = true;
                break;
            }
            if total >= opts.max_iter || basis.len() >= LANCZOS_CYCLE {
                break;
            }
            betas.push(beta);
            basis.push(w.scaled(C64::new(1.0 / beta, 0.0)));
        }
        // restart from the top Ritz vector
        let mut ritz = basis[0].scaled(C64::new(y[0], 0.0));
        for (b, &c) in basis.iter().zip(&y).skip(1) {
            ritz.axpy(C64::new(c, 0.0), b);
        }
        v = ritz.normalized();
        if converged || total >= opts.max_iter {
            return NormEstimate {
                value: theta.max(0.0).sqrt(),
                iterations: total,
                converged,
                rayleigh_imag: imag,
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{random_field, Grid, GridSpec};

    fn diag_op(diag: Vec<f64>) -> impl Fn(&SpinorField) -> SpinorField {
        move |f: &SpinorField| {
            let mut out = f.clone();
            for (v, d) in out.values_mut().iter_mut().zip(&diag) {
                *v *= *d;
            }
            out
        }
    }

    #[test]
    fn both_methods_find_isolated_top_singular_value() {
        let g = Grid::new(GridSpec::new(1, 64, 10.0).unwrap()).unwrap();
        let diag: Vec<f64> = (0..64).map(|i| 1.0 + (i as f64) * 0.01).collect();
        let mut d2 = diag.clone();
        d2[10] = 3.0;
        for method in [NormMethod::Power, NormMethod::Lanczos] {
            let opts = PowerOptions {
                method,
                tol: 1e-10,
                ..Default::default()
            };
            let est = largest_singular_value(diag_op(d2.clone()), diag_op(d2.clone()), random_field(&g, 1, 1), &opts);
            assert!(est.converged, "{method:?}");
            assert!((est.value - 3.0).abs() < 1e-6, "{method:?}: {}", est.value);
        }
    }

    #[test]
    fn lanczos_handles_clustered_top() {
        let g = Grid::new(GridSpec::new(1, 256, 10.0).unwrap()).unwrap();
        let diag: Vec<f64> = (0..256).map(|i| 1.0 + 1e-4 * i as f64).collect();
        let opts = PowerOptions {
            tol: 1e-9,
            max_iter: 2000,
            ..Default::default()
        };
        let est = largest_singular_value(diag_op(diag.clone()), diag_op(diag.clone()), random_field(&g, 1, 3), &opts);
        let exact = diag.iter().cloned().fold(0.0, f64::max);
        assert!((est.value - exact).abs() / exact < 1e-7, "{} vs {exact}", est.value);
    }

    #[test]
    fn zero_operator_gives_zero() {
        let g = Grid::new(GridSpec::new(1, 16, 10.0).unwrap()).unwrap();
        for method in [NormMethod::Power, NormMethod::Lanczos] {
            let opts = PowerOptions { method, ..Default::default() };
            let z = |f: &SpinorField| f.scaled(C64::new(0.0, 0.0));
            let est = largest_singular_value(z, z, random_field(&g, 1, 1), &opts);
            assert_eq!(est.value, 0.0);
        }
    }
}
