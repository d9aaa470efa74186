//! Strang split-step propagation for `H = H₀ + V`.

use crate::clifford::CliffordRep;
use crate::error::{invalid, Result};
use crate::grid::{Space, SpinorField};
use crate::linalg::{CMatrix, C64};
use crate::operators::{check_ncomp, map_modes};

use super::potential::Potential;

/// Exact free flow `e^{−i t H₀}` with symbol `cos(|p|t) − i sin(|p|t)(α·p)/|p|`.
pub fn free_evolve(rep: &CliffordRep, f: &SpinorField, t: f64) -> Result<SpinorField> {
    check_ncomp(rep, f)?;
    let n = rep.size();
    let mut dirac = vec![C64::new(0.0, 0.0); n];
    Ok(map_modes(f, |_, p, v, out| {
        let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (s, c) = (r * t).sin_cos();
        rep.apply_dirac(p, 0.0, v, &mut dirac);
        // sin(rt)/r → t at r = 0, where α·p v vanishes anyway
        let k = if r > 0.0 { s / r } else { t };
        for i in 0..n {
            out[i] = v[i] * c - C64::new(0.0, k) * dirac[i];
        }
    }))
}

/// Result of a time evolution.
#[derive(Debug, Clone)]
pub struct Evolution {
    pub field: SpinorField,
    pub steps: usize,
    /// Signed step actually used, `t / steps`.
    pub step: f64,
    /// Largest `|‖f(t_k)‖ − ‖f‖|` over the steps.
    pub norm_drift: f64,
}

/// Precomputed split-step propagator for one potential and nominal step.
pub struct Propagator<'a> {
    rep: &'a CliffordRep,
    pot: &'a Potential,
    dt: f64,
}

impl<'a> Propagator<'a> {
    pub fn new(rep: &'a CliffordRep, pot: &'a Potential, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return invalid(format!("time step must be positive, got {dt}"));
        }
        if rep.size() != pot.size() {
            return invalid("potential and Clifford representation disagree on spinor size");
        }
        Ok(Self { rep, pot, dt })
    }

    /// `e^{−i t H} f` for signed `t`, with `⌈|t|/dt⌉` equal steps.
    pub fn evolve(&self, f: &SpinorField, t: f64) -> Result<Evolution> {
        self.pot.check_field(f)?;
        let space = f.space();
        let steps = (t.abs() / self.dt).ceil() as usize;
        if steps == 0 {
            return Ok(Evolution {
                field: f.clone(),
                steps: 0,
                step: 0.0,
                norm_drift: 0.0,
            });
        }
        let h = t / steps as f64;
        let half = self.pot.exponentials(0.5 * h);
        let full = self.pot.exponentials(h);
        let norm0 = f.norm();
        let mut drift: f64 = 0.0;
        let mut u = self.apply_sites(&half, f.to_space(Space::Position));
        for k in 0..steps {
            u = free_evolve(self.rep, &u, h)?.into_position();
            let last = k + 1 == steps;
            u = self.apply_sites(if last { &half } else { &full }, u);
            drift = drift.max((u.norm() - norm0).abs());
        }
        Ok(Evolution {
            field: u.into_space(space),
            steps,
            step: h,
            norm_drift: drift,
        })
    }

    fn apply_sites(&self, mats: &[CMatrix], mut f: SpinorField) -> SpinorField {
        if self.pot.is_zero() {
            return f;
        }
        let n = f.ncomp();
        let mut tmp = vec![C64::new(0.0, 0.0); n];
        for (s, m) in mats.iter().enumerate() {
            if self.pot.is_scalar() {
                let phase = m.get(0, 0);
                f.site_mut(s).iter_mut().for_each(|v| *v *= phase);
            } else {
                m.matvec_into(f.site(s), &mut tmp);
                f.site_mut(s).copy_from_slice(&tmp);
            }
        }
        f
    }
}

/// One-shot `e^{−i t H} f`.
pub fn evolve(rep: &CliffordRep, pot: &Potential, f: &SpinorField, t: f64, dt: f64) -> Result<SpinorField> {
    Ok(Propagator::new(rep, pot, dt)?.evolve(f, t)?.field)
}
