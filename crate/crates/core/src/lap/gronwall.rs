//! Nonlinear Gronwall bound: if `f(λ) ≤ ω + ∫_λ^b (φ f^θ + ψ f)` then
//! `f(λ) ≤ e^{∫_λ^b ψ} [ω^{1−θ} + (1−θ) ∫_λ^b φ(s) e^{(θ−1)∫_s^b ψ} ds]^{1/(1−θ)}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Sampled data on an increasing grid `x₀ = a < … < x_last = b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GronwallInput {
    pub omega: f64,
    pub theta: f64,
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GronwallOutcome {
    pub bound: Vec<f64>,
    /// Largest `f − (ω + ∫(φf^θ + ψf))`, positive when the hypothesis fails.
    pub hypothesis_excess: f64,
    /// Largest `f − bound`, positive when the conclusion fails.
    pub conclusion_excess: f64,
    pub tolerance: f64,
    pub hypothesis_holds: bool,
    pub conclusion_holds: bool,
}

/// `∫_{x_i}^{b} g` for every `i`, by the trapezoid rule.
fn tail_integrals(x: &[f64], g: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    for i in (0..n - 1).rev() {
        out[i] = out[i + 1] + 0.5 * (x[i + 1] - x[i]) * (g[i] + g[i + 1]);
    }
    out
}

/// Evaluates the closed-form bound and checks hypothesis and conclusion
/// pointwise, each up to `tol · max(1, ω, max f)`.
pub fn gronwall_bound(input: &GronwallInput, tol: f64) -> Result<GronwallOutcome> {
    let GronwallInput {
        omega,
        theta,
        x,
        phi,
        psi,
        f,
    } = input;
    if !(0.0..1.0).contains(theta) {
        return invalid(format!("theta must lie in [0, 1), got {theta}"));
    }
    if !(*omega >= 0.0) {
        return invalid("omega must be nonnegative");
    }
    let n = x.len();
    if n < 2 || phi.len() != n || psi.len() != n || f.len() != n {
        return invalid("phi, psi, f must be sampled on the same grid of at least two points");
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("sample grid must be strictly increasing");
    }
    if phi.iter().chain(psi).chain(f).any(|v| !(*v >= 0.0)) {
        return invalid("samples must be nonnegative");
    }
    let big_psi = tail_integrals(x, psi);
    let weighted: Vec<f64> = phi
        .iter()
        .zip(&big_psi)
        .map(|(p, s)| p * ((theta - 1.0) * s).exp())
        .collect();
    let big_phi = tail_integrals(x, &weighted);
    let e = 1.0 - theta;
    let bound: Vec<f64> = big_psi
        .iter()
        .zip(&big_phi)
        .map(|(s, i)| s.exp() * (omega.powf(e) + e * i).powf(1.0 / e))
        .collect();

    let integrand: Vec<f64> = (0..n).map(|i| phi[i] * f[i].powf(*theta) + psi[i] * f[i]).collect();
    let rhs = tail_integrals(x, &integrand);
    let scale = f.iter().copied().fold(omega.max(1.0), f64::max);
    let hyp = (0..n).map(|i| f[i] - omega - rhs[i]).fold(f64::NEG_INFINITY, f64::max);
    let concl = (0..n).map(|i| f[i] - bound[i]).fold(f64::NEG_INFINITY, f64::max);
    Ok(GronwallOutcome {
        bound,
        hypothesis_excess: hyp,
        conclusion_excess: concl,
        tolerance: tol * scale,
        hypothesis_holds: hyp <= tol * scale,
        conclusion_holds: concl <= tol * scale,
    })
}

impl GronwallInput {
    /// A random instance satisfying the hypothesis: `g' = −(φ g^θ + ψ g)`,
    /// `g(b) = ω`, integrated backwards by RK4, then `f = s·g` with `s ∈ (½, 1]`.
    pub fn synthetic(seed: u64, points: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = rng.random_range(-2.0..0.0);
        let b = a + rng.random_range(0.5..3.0);
        let omega = rng.random_range(0.0..2.0);
        let theta = rng.random_range(0.0..0.95);
        let (c1, k1, d1) = (rng.random_range(0.0..2.0), rng.random_range(0.5..4.0), rng.random_range(0.0..6.3));
        let (c2, k2, d2) = (rng.random_range(0.0..1.0), rng.random_range(0.5..4.0), rng.random_range(0.0..6.3));
        let scale = rng.random_range(0.5..1.0);
        let phi = move |t: f64| c1 * (1.0 + (k1 * t + d1).sin());
        let psi = move |t: f64| c2 * (1.0 + (k2 * t + d2).cos());
        let rate = |t: f64, g: f64| -(phi(t) * g.max(0.0).powf(theta) + psi(t) * g);

        let x: Vec<f64> = (0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect();
        let mut g = vec![0.0; points];
        g[points - 1] = omega;
        let sub = 8;
        for i in (0..points - 1).rev() {
            let h = -(x[i + 1] - x[i]) / sub as f64;
            let (mut t, mut y) = (x[i + 1], g[i + 1]);
            for _ in 0..sub {
                let k1 = rate(t, y);
                let k2 = rate(t + 0.5 * h, y + 0.5 * h * k1);
                let k3 = rate(t + 0.5 * h, y + 0.5 * h * k2);
                let k4 = rate(t + h, y + h * k3);
                y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                t += h;
            }
            g[i] = y;
        }
        Self {
            omega,
            theta,
            phi: x.iter().map(|&t| phi(t)).collect(),
            psi: x.iter().map(|&t| psi(t)).collect(),
            f: g.iter().map(|v| scale * v).collect(),
            x,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn trivial_and_linear_cases() {
        let x = uniform(0.0, 2.0, 101);
        let zero = vec![0.0; 101];
        let inp = GronwallInput {
            omega: 1.5,
            theta: 0.4,
            x: x.clone(),
            phi: zero.clone(),
            psi: zero.clone(),
            f: vec![1.5; 101],
        };
        let out = gronwall_bound(&inp, 1e-10).unwrap();
        assert!(out.bound.iter().all(|b| (b - 1.5).abs() < 1e-12));
        assert!(out.hypothesis_holds && out.conclusion_holds);

        let inp = GronwallInput {
            theta: 0.0,
            phi: vec![0.7; 101],
            f: vec![0.0; 101],
            ..inp
        };
        let out = gronwall_bound(&inp, 1e-10).unwrap();
        for (b, t) in out.bound.iter().zip(&x) {
            assert!((b - (1.5 + 0.7 * (2.0 - t))).abs() < 1e-12);
        }
    }

    #[test]
    fn synthetic_instances() {
        for seed in 0..10 {
            let inp = GronwallInput::synthetic(seed, 801);
            let out = gronwall_bound(&inp, 1e-6).unwrap();
            assert!(out.hypothesis_holds && out.conclusion_holds, "{seed}: {out:?}");
        }
    }

    #[test]
    fn violated_conclusion_is_reported() {
        let x = uniform(0.0, 1.0, 11);
        let inp = GronwallInput {
            omega: 1.0,
            theta: 0.5,
            x,
            phi: vec![0.0; 11],
            psi: vec![0.0; 11],
            f: vec![2.0; 11],
        };
        let out = gronwall_bound(&inp, 1e-8).unwrap();
        assert!(!out.hypothesis_holds && !out.conclusion_holds);
        assert!(gronwall_bound(&GronwallInput { theta: 1.0, ..inp.clone() }, 1e-8).is_err());
        assert!(gronwall_bound(&GronwallInput { theta: -0.1, ..inp }, 1e-8).is_err());
    }
}
