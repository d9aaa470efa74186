//! The conjugate operator `A` with `i[A, H₀] = B` on states away from `p = 0`.

use log::warn;

use super::{apply_coordinate, check_ncomp, map_modes, CutoffFunction};
use crate::clifford::{dirac_symbol, CliffordRep};
use crate::error::Result;
use crate::grid::{Space, SpinorField};
use crate::linalg::{CMatrix, ZERO};

/// Threshold on the `p = 0` coefficient above which inputs are reported as outside D₀.
pub const ZERO_MODE_TOL: f64 = 1e-12;

/// `Fⱼ(p) = ½ (α·p) |p|^{-2} η(p) pⱼ`, zero at `p = 0`. `j` is zero-based.
pub fn symbol_fj(rep: &CliffordRep, cutoff: &CutoffFunction, j: usize, p: &[f64]) -> CMatrix {
    let r2: f64 = p.iter().map(|x| x * x).sum();
    if r2 == 0.0 {
        return CMatrix::zeros(rep.size());
    }
    let s = 0.5 * cutoff.eta(p) * p[j] / r2;
    dirac_symbol(rep, p, 0.0).expect("zero mass").scale_re(s)
}

/// `A = −½ [H₀ Λ Σⱼ Pⱼ Qⱼ + Σⱼ Qⱼ Pⱼ Λ H₀]` with `Λ = η(p)/|p|²` (zero at `p = 0`),
/// `Pⱼ = −i∂ⱼ` and `Qⱼ` the coordinate multiplication. The overall sign is the
/// one for which `i[A, H₀] = B`; in the momentum representation `A` is the
/// first-order operator with coefficients `Fⱼ(p)` acting through `−i∂_p`.
#[derive(Debug, Clone)]
pub struct ConjugateOperator {
    rep: CliffordRep,
    cutoff: CutoffFunction,
}

impl ConjugateOperator {
    pub fn new(rep: &CliffordRep, cutoff: CutoffFunction) -> Self {
        Self {
            rep: rep.clone(),
            cutoff,
        }
    }

    /// `(α·p) η(p) |p|^{-2}` applied mode-wise.
    fn apply_core(&self, f: &SpinorField) -> SpinorField {
        map_modes(f, |_, p, v, out| {
            let r2: f64 = p.iter().map(|x| x * x).sum();
            if r2 == 0.0 {
                out.fill(ZERO);
                return;
            }
            self.rep.apply_dirac(p, 0.0, v, out);
            let s = self.cutoff.eta(p) / r2;
            out.iter_mut().for_each(|o| *o *= s);
        })
    }

    fn momentum(f: &SpinorField, j: usize) -> SpinorField {
        map_modes(f, |_, p, v, out| {
            out.iter_mut().zip(v).for_each(|(o, x)| *o = x * p[j]);
        })
    }

    pub fn apply(&self, f: &SpinorField) -> Result<SpinorField> {
        check_ncomp(&self.rep, f)?;
        let z = f.zero_mode_magnitude();
        if z > ZERO_MODE_TOL {
            warn!("conjugate operator applied to a state with p=0 coefficient {z:.3e}");
        }
        let space = f.space();
        let pos = f.to_space(Space::Position);
        let n = self.rep.dim();

        // First half: core · Σ Pⱼ Qⱼ f.
        let mut pq = SpinorField::zeros(pos.grid(), pos.ncomp(), Space::Momentum);
        for j in 0..n {
            let qf = apply_coordinate(&pos, j)?.into_momentum();
            pq.axpy(crate::linalg::ONE, &Self::momentum(&qf, j));
        }
        let first = self.apply_core(&pq);

        // Second half: Σ Qⱼ Pⱼ core f.
        let core = self.apply_core(&pos.to_space(Space::Momentum));
        let mut second = SpinorField::zeros(pos.grid(), pos.ncomp(), Space::Position);
        for j in 0..n {
            let pf = Self::momentum(&core, j).into_position();
            second.axpy(crate::linalg::ONE, &apply_coordinate(&pf, j)?);
        }

        let mut out = first.into_position();
        out.axpy(crate::linalg::ONE, &second);
        out.scale_mut(crate::linalg::C64::new(-0.5, 0.0));
        Ok(out.into_space(space))
    }
}

/// Applies the conjugate operator; warns when the input has a `p = 0` component.
pub fn apply_a(rep: &CliffordRep, cutoff: &CutoffFunction, f: &SpinorField) -> Result<SpinorField> {
    ConjugateOperator::new(rep, *cutoff).apply(f)
}
