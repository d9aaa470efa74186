//! Kato's inequality `K ∫|x|^{-1}|f|² ≤ ∫|p||f̂|²` on the lattice, and the
//! Kato-smoothness integral of the weighted free resolvent.

use std::f64::consts::{PI, SQRT_2};

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{resolvent_g, ResolventQuery, Sign};
use crate::clifford::CliffordRep;
use crate::error::{invalid, Result};
use crate::grid::{gaussian_state, Grid, Space, SpinorField};
use crate::linalg::{norm_sq, C64};
use crate::operators::{apply_weight, CutoffFunction};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `J_m = ∫_{[-1,1]^m} (1 + |u|²)^{-1/2} du`.
pub fn unit_cube_integral(m: usize) -> f64 {
    match m {
        0 => 1.0,
        1 => 2.0 * (1.0 + SQRT_2).ln(),
        2 => 4.0 * ((2.0 + 3f64.sqrt()).ln() - PI / 6.0),
        _ => {
            let order = if m <= 4 { 24 } else { 10 };
            let (x, w) = gauss_legendre(order);
            let mut idx = vec![0usize; m];
            let mut total = 0.0;
            loop {
                let (mut r2, mut wt) = (1.0, 1.0);
                for &i in &idx {
                    r2 += x[i] * x[i];
                    wt *= w[i];
                }
                total += wt / r2.sqrt();
                let mut d = 0;
                while d < m {
                    idx[d] += 1;
                    if idx[d] < order {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == m {
                    break;
                }
            }
            total
        }
    }
}

/// Mean of `|x|^{-1}` over the cube `[-dx/2, dx/2]^n`: the cube splits into
/// `2n` pyramids over its faces, each contributing `a^{n-1} J_{n-1}/(n-1)`.
pub fn cell_average_inverse_radius(n: usize, dx: f64) -> Result<f64> {
    if n < 2 {
        return invalid("|x|^-1 is not locally integrable in one dimension");
    }
    let a = 0.5 * dx;
    let integral = 2.0 * n as f64 * a.powi(n as i32 - 1) / (n - 1) as f64 * unit_cube_integral(n - 1);
    Ok(integral / dx.powi(n as i32))
}

/// `∫|p||f̂|² / ∫|x|^{-1}|f|²`, with the origin cell using its average.
pub fn kato_ratio(f: &SpinorField) -> Result<f64> {
    let g = f.grid().clone();
    let spec = g.spec();
    if f.norm_sq() == 0.0 {
        return invalid("Kato ratio of the zero field");
    }
    let origin = cell_average_inverse_radius(spec.n, spec.dx())?;
    let pos = f.to_space(Space::Position);
    let mom = f.to_space(Space::Momentum);
    let mut num = 0.0;
    let mut den = 0.0;
    for s in 0..g.sites() {
        num += g.abs_momentum(s) * norm_sq(mom.site(s));
        let w = if s == g.zero_site() { origin } else { 1.0 / g.abs_position(s) };
        den += w * norm_sq(pos.site(s));
    }
    Ok(num * spec.cell_volume(Space::Momentum) / (den * spec.cell_volume(Space::Position)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KatoEstimate {
    pub family: String,
    pub ratios: Vec<f64>,
    pub running_min: Vec<f64>,
    /// Smallest ratio: a numerical upper proxy for the best constant.
    pub min: f64,
}

pub fn kato_scan(family: &[SpinorField], description: &str) -> Result<KatoEstimate> {
    if family.is_empty() {
        return invalid("empty trial family");
    }
    let ratios = family.iter().map(kato_ratio).collect::<Result<Vec<_>>>()?;
    let running_min: Vec<f64> = ratios
        .iter()
        .scan(f64::INFINITY, |m, &r| {
            *m = m.min(r);
            Some(*m)
        })
        .collect();
    Ok(KatoEstimate {
        family: description.to_string(),
        min: *running_min.last().expect("nonempty"),
        ratios,
        running_min,
    })
}

/// Gaussians with random widths, offsets, spinors and plane-wave modulations,
/// all resolved by the lattice and well inside the box.
pub fn kato_trial_family(grid: &Grid, ncomp: usize, count: usize, seed: u64) -> Vec<SpinorField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = grid.spec();
    let (dx, len) = (spec.dx(), spec.length);
    (0..count)
        .map(|_| {
            let width = rng.random_range(2.5 * dx..len / 10.0);
            let center: Vec<f64> = (0..spec.n).map(|_| rng.random_range(-width..width)).collect();
            let spinor: Vec<C64> = (0..ncomp)
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let k: Vec<f64> = (0..spec.n).map(|_| rng.random_range(-1.0..1.0) / width).collect();
            let mut f = gaussian_state(grid, &center, width, &spinor);
            for s in 0..grid.sites() {
                let x = grid.position(s);
                let phase = C64::from_polar(1.0, k.iter().zip(x).map(|(a, b)| a * b).sum());
                f.site_mut(s).iter_mut().for_each(|v| *v *= phase);
            }
            f.normalized()
        })
        .collect()
}

/// Ratios of a modulated Gaussian and its dilation `f(x/s)`; the continuum ratio is dilation invariant.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KatoScaling {
    pub width: f64,
    pub factor: f64,
    pub base: f64,
    pub dilated: f64,
    pub relative_change: f64,
}

pub fn kato_scaling_check(grid: &Grid, ncomp: usize, width: f64, factor: f64, seed: u64) -> Result<KatoScaling> {
    if !(width > 0.0 && factor > 0.0) {
        return invalid("width and dilation factor must be positive");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.dim();
    let spinor: Vec<C64> = (0..ncomp)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let center: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5) * width).collect();
    let k: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0) / width).collect();
    let build = |s: f64| {
        let c: Vec<f64> = center.iter().map(|x| x * s).collect();
        let mut f = gaussian_state(grid, &c, width * s, &spinor);
        for site in 0..grid.sites() {
            let x = grid.position(site);
            let phase = C64::from_polar(1.0, k.iter().zip(x).map(|(a, b)| a * b / s).sum());
            f.site_mut(site).iter_mut().for_each(|v| *v *= phase);
        }
        f
    };
    let base = kato_ratio(&build(1.0))?;
    let dilated = kato_ratio(&build(factor))?;
    Ok(KatoScaling {
        width,
        factor,
        base,
        dilated,
        relative_change: (dilated - base).abs() / base,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KatoSmoothResult {
    pub lambda_range: (f64, f64),
    pub step: f64,
    /// `(μ, value)` pairs.
    pub values: Vec<(f64, f64)>,
    pub max: f64,
    pub covers_spectrum: bool,
}

/// Trapezoid rule for `(4π²)^{-1} ∫ dλ ‖⟨Q⟩^{-1} G₀^+ f‖² + ‖⟨Q⟩^{-1} G₀^- f‖²`
/// at imaginary parts `μ ∈ mus`.
pub fn kato_smooth_integral(
    rep: &CliffordRep,
    f: &SpinorField,
    mus: &[f64],
    lambda_range: (f64, f64),
    step: f64,
) -> Result<KatoSmoothResult> {
    let (lo, hi) = lambda_range;
    if !(hi > lo) || !(step > 0.0) {
        return invalid("need lambda_lo < lambda_hi and a positive step");
    }
    if mus.is_empty() {
        return invalid("empty list of imaginary parts");
    }
    if (f.norm() - 1.0).abs() > 1e-9 {
        return invalid("Kato smoothness integral expects a unit vector");
    }
    let edge = f.grid().spec().max_momentum() + 1.0;
    let covers = lo <= -edge && hi >= edge;
    if !covers {
        warn!("lambda range [{lo}, {hi}] does not cover the lattice spectrum plus margin ({edge:.3})");
    }
    let count = ((hi - lo) / step).round() as usize;
    let h = (hi - lo) / count as f64;
    let mom = f.to_space(Space::Momentum);
    let cutoff = CutoffFunction;
    let mut values = Vec::with_capacity(mus.len());
    for &mu in mus {
        let samples: Vec<f64> = (0..=count)
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let lambda = lo + h * i as f64;
                let mut acc = 0.0;
                for sign in [Sign::Plus, Sign::Minus] {
                    let q = ResolventQuery::new(lambda, mu, 0.0, sign)?;
                    let g = resolvent_g(rep, &cutoff, &q, &mom)?.into_position();
                    acc += apply_weight(&g, -1.0)?.norm_sq();
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let mut total = 0.0;
        for (i, v) in samples.iter().enumerate() {
            let w = if i == 0 || i == count { 0.5 } else { 1.0 };
            total += w * v;
        }
        values.push((mu, total * h / (4.0 * PI * PI)));
    }
    let max = values.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(KatoSmoothResult {
        lambda_range,
        step: h,
        values,
        max,
        covers_spectrum: covers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::linalg::{ONE, ZERO};

    #[test]
    fn ratio_is_dilation_invariant() {
        let g = Grid::new(GridSpec::new(2, 64, 32.0).unwrap()).unwrap();
        let r = kato_scaling_check(&g, 2, 1.5, 2.0, 4).unwrap();
        assert!(r.relative_change < 0.02, "{r:?}");
    }

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn cube_integrals() {
        // Gauss–Legendre agrees with the closed forms for m = 1, 2.
        let (x, w) = gauss_legendre(40);
        let j1: f64 = x.iter().zip(&w).map(|(u, w)| w / (1.0 + u * u).sqrt()).sum();
        assert!((j1 - unit_cube_integral(1)).abs() < 1e-13);
        let mut j2 = 0.0;
        for (a, wa) in x.iter().zip(&w) {
            for (b, wb) in x.iter().zip(&w) {
                j2 += wa * wb / (1.0 + a * a + b * b).sqrt();
            }
        }
        assert!((j2 - unit_cube_integral(2)).abs() < 1e-13);
        assert!((unit_cube_integral(2) - 3.173_436_485_306_07).abs() < 1e-12);
        let j3 = unit_cube_integral(3);
        assert!(j3 > 0.0 && j3 < 8.0);
    }

    #[test]
    fn two_dimensional_cell_average() {
        let dx = 0.5;
        let want = 8.0 * (dx / 2.0) * (1.0 + SQRT_2).ln() / (dx * dx);
        assert!((cell_average_inverse_radius(2, dx).unwrap() - want).abs() < 1e-14);
        assert!(cell_average_inverse_radius(1, dx).is_err());
        // Scales like 1/dx.
        let r = cell_average_inverse_radius(3, 0.25).unwrap() / cell_average_inverse_radius(3, 0.5).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ratio_positive_and_zero_rejected() {
        let g = Grid::new(GridSpec::new(3, 32, 16.0).unwrap()).unwrap();
        let f = gaussian_state(&g, &[0.0; 3], 1.5, &[ONE, ZERO, ZERO, ZERO]);
        let r = kato_ratio(&f).unwrap();
        assert!(r > 0.1 && r < 10.0, "{r}");
        assert!(kato_ratio(&SpinorField::zeros(&g, 4, Space::Position)).is_err());
        let fam = kato_trial_family(&g, 4, 5, 1);
        let est = kato_scan(&fam, "gaussians").unwrap();
        assert!(est.ratios.iter().all(|&r| r > 0.0));
        assert_eq!(est.min, est.running_min[4]);
    }
}
