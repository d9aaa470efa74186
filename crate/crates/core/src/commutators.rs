//! Residual checks for the commutator identities `i[A, H₀] = B`,
//! `i[B, A] = K B`, the lower bound `‖Tψ‖ ≥ μ‖ψ‖`, and the weighted
//! invariance estimates of the free resolvent.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::error::{invalid, Error, Result};
use crate::grid::{random_field, weighted_norm, Grid, GridSpec, SpinorField};
use crate::lap::{apply_t, f_eps, kato_scan, kato_trial_family, resolvent_g, ResolventQuery};
use crate::linalg::C64;
use crate::operators::{apply_a, apply_h0, apply_multiplier, CutoffFunction, MultiplierSymbol};

/// Largest `p = 0` coefficient accepted as a D₀ state.
pub const CORE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementPoint {
    pub points: usize,
    pub length: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub identity: String,
    pub grid: GridSpec,
    pub state: String,
    pub absolute: f64,
    pub relative: f64,
    /// Identity-specific side quantities.
    #[serde(default)]
    pub details: BTreeMap<String, f64>,
    /// Residuals on successively larger grids, ordered by `M`.
    #[serde(default)]
    pub refinement: Vec<RefinementPoint>,
}

impl ResidualReport {
    fn new(identity: &str, grid: &Grid, state: &str, absolute: f64, scale: f64) -> Self {
        Self {
            identity: identity.into(),
            grid: grid.spec(),
            state: state.into(),
            absolute,
            relative: if scale > 0.0 { absolute / scale } else { absolute },
            details: BTreeMap::new(),
            refinement: Vec::new(),
        }
    }

    fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.into(), value);
        self
    }

    /// Each refinement residual is at most 10% above its predecessor, or below `floor`.
    pub fn refinement_non_increasing(&self, floor: f64) -> bool {
        non_increasing_within(&self.refinement, 0.1, floor)
    }
}

pub fn non_increasing_within(series: &[RefinementPoint], slack: f64, floor: f64) -> bool {
    series
        .windows(2)
        .all(|w| w[1].relative <= (1.0 + slack) * w[0].relative || w[1].relative < floor)
}

fn require_core(psi: &SpinorField) -> Result<()> {
    let z = psi.zero_mode_magnitude();
    if z > CORE_TOL {
        return Err(Error::OutsideCore(z));
    }
    Ok(())
}

fn times_i(f: SpinorField) -> SpinorField {
    f.scaled(C64::new(0.0, 1.0))
}

/// `‖i(AH₀ − H₀A)ψ − Bψ‖ / ‖ψ‖`.
pub fn check_ah0(rep: &CliffordRep, cutoff: &CutoffFunction, psi: &SpinorField, state: &str) -> Result<ResidualReport> {
    require_core(psi)?;
    let ah = apply_a(rep, cutoff, &apply_h0(rep, psi, 0.0)?)?;
    let ha = apply_h0(rep, &apply_a(rep, cutoff, psi)?, 0.0)?;
    let lhs = times_i(ah.sub(&ha));
    let rhs = apply_multiplier(&MultiplierSymbol::cutoff(*cutoff), psi)?;
    let r = lhs.sub(&rhs).norm();
    Ok(ResidualReport::new("AH0", psi.grid(), state, r, psi.norm()))
}

/// `‖i(BA − AB)ψ − KBψ‖ / ‖ψ‖`; `details.kb_commutator` is `‖(KB − BK)ψ‖`.
pub fn check_ba(rep: &CliffordRep, cutoff: &CutoffFunction, psi: &SpinorField, state: &str) -> Result<ResidualReport> {
    require_core(psi)?;
    let b = MultiplierSymbol::cutoff(*cutoff);
    let k = MultiplierSymbol::commutator_k(rep, *cutoff);
    let ba = apply_multiplier(&b, &apply_a(rep, cutoff, psi)?)?;
    let ab = apply_a(rep, cutoff, &apply_multiplier(&b, psi)?)?;
    let lhs = times_i(ba.sub(&ab));
    let bpsi = apply_multiplier(&b, psi)?;
    let kb = apply_multiplier(&k, &bpsi)?;
    let bk = apply_multiplier(&b, &apply_multiplier(&k, psi)?)?;
    let r = lhs.sub(&kb).norm();
    Ok(ResidualReport::new("BA", psi.grid(), state, r, psi.norm())
        .detail("kb_commutator", kb.sub(&bk).norm())
        .detail("rhs_norm", kb.norm()))
}

/// Weak form `(ψ₁, Bψ₂) = (iH₀ψ₁, Aψ₂) − (iAψ₁, H₀ψ₂)`; residual relative to `‖ψ₁‖‖ψ₂‖`.
pub fn check_bilinear(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    psi1: &SpinorField,
    psi2: &SpinorField,
) -> Result<ResidualReport> {
    require_core(psi1)?;
    require_core(psi2)?;
    let lhs = psi1.inner(&apply_multiplier(&MultiplierSymbol::cutoff(*cutoff), psi2)?);
    let t1 = times_i(apply_h0(rep, psi1, 0.0)?).inner(&apply_a(rep, cutoff, psi2)?);
    let t2 = times_i(apply_a(rep, cutoff, psi1)?).inner(&apply_h0(rep, psi2, 0.0)?);
    let r = (lhs - (t1 - t2)).norm();
    Ok(ResidualReport::new("AH0-bilinear", psi1.grid(), "pair", r, psi1.norm() * psi2.norm()))
}

/// Over `trials` random fields: `min ‖Tψ‖/‖ψ‖ − μ` (`details.min_margin`, must be
/// ≥ −1e-12) and the adjoint defect `|⟨Tφ,ψ⟩ − ⟨φ,T^∓ψ⟩|` (the residual).
pub fn check_t_bounds(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    grid: &Grid,
    q: &ResolventQuery,
    trials: usize,
    seed: u64,
) -> Result<ResidualReport> {
    if trials == 0 {
        return invalid("need at least one trial");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut margin = f64::INFINITY;
    let mut adjoint: f64 = 0.0;
    for _ in 0..trials {
        let phi = random_field(grid, rep.size(), rng.random());
        let psi = random_field(grid, rep.size(), rng.random());
        let t_phi = apply_t(rep, cutoff, q, &phi)?;
        margin = margin.min(t_phi.norm() / phi.norm() - q.mu);
        let lhs = t_phi.inner(&psi);
        let rhs = phi.inner(&apply_t(rep, cutoff, &q.adjoint(), &psi)?);
        adjoint = adjoint.max((lhs - rhs).norm() / (phi.norm() * psi.norm()));
    }
    Ok(ResidualReport::new("Tbound", grid, &format!("{trials} random fields"), adjoint, 1.0)
        .detail("min_margin", margin)
        .detail("trials", trials as f64))
}

/// `C₁ = (2 + 1/K)^{1/2}` from the Kato-ratio minimum `K` of a trial family:
/// `h(r)^{-1} ≤ 2 + r^{-1}` turns the Kato bound into `‖B^{-1/2}φ‖ ≤ C₁‖⟨x⟩^{1/2}φ‖`.
pub fn kato_constant(grid: &Grid, ncomp: usize, members: usize, seed: u64) -> Result<f64> {
    let family = kato_trial_family(grid, ncomp, members, seed);
    let k = kato_scan(&family, "gaussian family")?.min;
    Ok((2.0 + 1.0 / k).sqrt())
}

/// Records `‖⟨x⟩Gψ‖/‖⟨x⟩ψ‖` and checks `ε‖B^{1/2}Gψ‖² ≤ |F(ψ)|` and
/// `‖B^{1/2}Gψ‖ ≤ C₁ ε^{-1} ‖⟨x⟩^{1/2}ψ‖`. The residual is the larger excess
/// of the two inequalities (0 when both hold).
pub fn check_invariance(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    q: &ResolventQuery,
    psi: &SpinorField,
    c1: f64,
    state: &str,
) -> Result<ResidualReport> {
    if q.eps <= 0.0 {
        return invalid("the weighted bound needs eps > 0");
    }
    if psi.norm() == 0.0 {
        return invalid("zero test state");
    }
    let pos = psi.to_space(crate::grid::Space::Position);
    let g = resolvent_g(rep, cutoff, q, &pos)?;
    let ratio = weighted_norm(&g, 1.0)? / weighted_norm(&pos, 1.0)?;
    let bg = apply_multiplier(&MultiplierSymbol::cutoff_sqrt(*cutoff), &g)?.norm();
    let f = f_eps(rep, cutoff, q, &pos)?.norm();
    let lower = q.eps * bg * bg;
    let bound = c1 / q.eps * weighted_norm(&pos, 0.5)?;
    let excess = (lower - f).max(bg - bound).max(0.0);
    let mut r = ResidualReport::new("invariance", psi.grid(), state, excess, 1.0)
        .detail("weighted_ratio", ratio)
        .detail("eps_bg_sq", lower)
        .detail("abs_f", f)
        .detail("bg", bg)
        .detail("bound", bound)
        .detail("c1", c1);
    r.relative = excess / bound.max(f);
    Ok(r)
}

/// Runs `check` on states built for each grid in `specs` (sorted by `M`) and
/// records the series on the report of the first grid.
pub fn refinement_series<B, C>(specs: &[GridSpec], mut build: B, mut check: C) -> Result<ResidualReport>
where
    B: FnMut(&Grid) -> Result<SpinorField>,
    C: FnMut(&SpinorField) -> Result<ResidualReport>,
{
    if specs.is_empty() {
        return invalid("no grids given");
    }
    let mut specs = specs.to_vec();
    specs.sort_by_key(|s| s.points);
    let mut first: Option<ResidualReport> = None;
    let mut series = Vec::new();
    for spec in specs {
        let grid = Grid::new(spec)?;
        let psi = build(&grid)?;
        let rep = check(&psi)?;
        series.push(RefinementPoint {
            points: spec.points,
            length: spec.length,
            relative: rep.relative,
        });
        first.get_or_insert(rep);
    }
    let mut out = first.expect("nonempty");
    out.refinement = series;
    Ok(out)
}
