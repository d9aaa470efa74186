//! Operators realized as momentum-space multipliers and position-space
//! multiplications, composed through the grid transform.

mod conjugate;
mod cutoff;
mod expr;
mod first_order;
mod symbols;

pub use conjugate::{apply_a, symbol_fj, ConjugateOperator};
pub use cutoff::CutoffFunction;
pub use expr::{parse_op, OpContext, OpExpr, OpFactor};
pub use first_order::{apply_l, build_first_order, periodic_coefficients, FirstOrderOperator, MatrixField};
pub use symbols::{MultiplierSymbol, SymbolValue, ZeroMode};

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::grid::{Space, SpinorField};
use crate::linalg::{C64, ZERO};

/// Multiplies every momentum coefficient vector by `sym(p)`; the result is
/// returned in the input's representation.
pub fn apply_multiplier(sym: &MultiplierSymbol, f: &SpinorField) -> Result<SpinorField> {
    let space = f.space();
    let mut m = f.to_space(Space::Momentum);
    let g = m.grid().clone();
    let ncomp = m.ncomp();
    let mut out = vec![ZERO; ncomp];
    for s in 0..g.sites() {
        let value = sym.eval(g.momentum(s));
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "symbol {} undefined at p = {:?}",
                sym.name(),
                g.momentum(s)
            )));
        }
        value.apply(m.site(s), &mut out);
        m.site_mut(s).copy_from_slice(&out);
    }
    Ok(m.into_space(space))
}

/// Applies a per-mode closure `(site, p, v_in, v_out)` in momentum space.
pub(crate) fn map_modes<F>(f: &SpinorField, mut rule: F) -> SpinorField
where
    F: FnMut(usize, &[f64], &[C64], &mut [C64]),
{
    let space = f.space();
    let mut m = f.to_space(Space::Momentum);
    let g = m.grid().clone();
    let mut out = vec![ZERO; m.ncomp()];
    for s in 0..g.sites() {
        rule(s, g.momentum(s), m.site(s), &mut out);
        m.site_mut(s).copy_from_slice(&out);
    }
    m.into_space(space)
}

/// `H₀(m) f` with symbol `α·p + m β`.
pub fn apply_h0(rep: &CliffordRep, f: &SpinorField, mass: f64) -> Result<SpinorField> {
    if mass < 0.0 {
        return Err(Error::InvalidArgument("mass must be nonnegative".into()));
    }
    check_ncomp(rep, f)?;
    Ok(map_modes(f, |_, p, v, out| rep.apply_dirac(p, mass, v, out)))
}

pub(crate) fn check_ncomp(rep: &CliffordRep, f: &SpinorField) -> Result<()> {
    if rep.size() != f.ncomp() {
        return Err(Error::DimensionMismatch {
            expected: rep.size(),
            got: f.ncomp(),
        });
    }
    if rep.dim() != f.grid().dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            got: f.grid().dim(),
        });
    }
    Ok(())
}

/// Pointwise multiplication by `⟨x⟩^s`.
pub fn apply_weight(f: &SpinorField, s: f64) -> Result<SpinorField> {
    f.require_space(Space::Position)?;
    let mut out = f.clone();
    if s == 0.0 {
        return Ok(out);
    }
    let g = f.grid().clone();
    for site in 0..g.sites() {
        let w = g.japanese(site).powf(s);
        out.site_mut(site).iter_mut().for_each(|v| *v *= w);
    }
    Ok(out)
}

/// Like [`apply_weight`] but accepts either representation.
pub(crate) fn weight_any(f: &SpinorField, s: f64) -> SpinorField {
    let space = f.space();
    apply_weight(&f.to_space(Space::Position), s)
        .expect("position space")
        .into_space(space)
}

/// Pointwise multiplication by the coordinate `x_j` (zero-based axis) in position space.
pub fn apply_coordinate(f: &SpinorField, j: usize) -> Result<SpinorField> {
    f.require_space(Space::Position)?;
    let mut out = f.clone();
    let g = f.grid().clone();
    for site in 0..g.sites() {
        let x = g.position(site)[j];
        out.site_mut(site).iter_mut().for_each(|v| *v *= x);
    }
    Ok(out)
}
