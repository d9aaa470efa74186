//! The radial cutoff `h` and the multiplier `B = η(−i∇)`, `η(p) = h(|p|)`.

use serde::{Deserialize, Serialize};

/// `h(r) = r` on `[0, ½)`, `k(r)` on `[½, 1)`, `1` on `[1, ∞)`, with
/// `k(r) = (1 − ζ(t)) r + ζ(t)`, `t = 2r − 1`, and `ζ` the C^∞ step
/// `e^{−1/t} / (e^{−1/t} + e^{−1/(1−t)})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct CutoffFunction;

const INNER: f64 = 0.5;
const OUTER: f64 = 1.0;

/// `ζ(t)` and `ζ'(t)`, written as a logistic in `u = 1/(1−t) − 1/t` to stay finite near the ends.
fn zeta(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0);
    }
    let u = 1.0 / (1.0 - t) - 1.0 / t;
    let z = if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    };
    let du = 1.0 / ((1.0 - t) * (1.0 - t)) + 1.0 / (t * t);
    let dz = z * (1.0 - z) * du;
    // z(1−z) underflows faster than du overflows near the ends
    (z, if dz.is_finite() { dz } else { 0.0 })
}

impl CutoffFunction {
    pub fn new() -> Self {
        Self
    }

    pub fn h(&self, r: f64) -> f64 {
        if r < INNER {
            r
        } else if r < OUTER {
            let t = (r - INNER) / (OUTER - INNER);
            let (z, _) = zeta(t);
            (1.0 - z) * r + z
        } else {
            1.0
        }
    }

    /// `h'(r)`; on the transition `(1 − ζ) + 2ζ'(t)(1 − r)`.
    pub fn dh(&self, r: f64) -> f64 {
        if r < INNER {
            1.0
        } else if r < OUTER {
            let t = (r - INNER) / (OUTER - INNER);
            let (z, dz) = zeta(t);
            (1.0 - z) + dz * (1.0 - r) / (OUTER - INNER)
        } else {
            0.0
        }
    }

    /// `η(p) = h(|p|)`.
    pub fn eta(&self, p: &[f64]) -> f64 {
        self.h(p.iter().map(|x| x * x).sum::<f64>().sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_branches() {
        let h = CutoffFunction::new();
        assert_eq!(h.h(0.0), 0.0);
        assert_eq!(h.h(0.3), 0.3);
        assert_eq!(h.h(1.0), 1.0);
        assert_eq!(h.h(7.5), 1.0);
        assert_eq!(h.dh(1.5), 0.0);
        assert_eq!(h.dh(0.2), 1.0);
    }

    #[test]
    fn bounded_monotone_on_dense_sample() {
        let h = CutoffFunction::new();
        let mut prev = -1.0;
        for i in 0..=20_000 {
            let r = 2.0 * i as f64 / 20_000.0;
            let v = h.h(r);
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev - 1e-15, "decrease at r = {r}");
            assert!(h.dh(r) >= 0.0);
            prev = v;
        }
    }

    #[test]
    fn continuous_with_matching_slope_at_junctions() {
        let h = CutoffFunction::new();
        for d in [1e-3, 1e-4, 1e-5] {
            assert!((h.h(0.5 + d) - h.h(0.5 - d)).abs() < 3.0 * d);
            assert!((h.h(1.0 - d) - 1.0).abs() < 1e-10);
            assert!((h.dh(0.5 + d) - 1.0).abs() < 1e-10);
            assert!(h.dh(1.0 - d).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = CutoffFunction::new();
        let e = 1e-6;
        for i in 1..50 {
            let r = 0.5 + 0.5 * i as f64 / 50.0;
            let fd = (h.h(r + e) - h.h(r - e)) / (2.0 * e);
            assert!((fd - h.dh(r)).abs() < 1e-5, "r = {r}: {fd} vs {}", h.dh(r));
        }
    }
}
