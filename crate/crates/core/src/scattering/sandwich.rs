use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::error::{Error, Result};
use crate::grid::{Space, SpinorField};
use crate::lap::{resolvent_g, ResolventQuery};
use crate::operators::{apply_weight, CutoffFunction};
use crate::power::PowerOptions;

use super::krylov::{gmres, GmresOptions};
use super::potential::Potential;
use super::smallness::{apply_coupling, coupling_norm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichOptions {
    pub depth: usize,
    #[serde(default)]
    pub gmres: GmresOptions,
    #[serde(default)]
    pub power: PowerOptions,
}

impl Default for SandwichOptions {
    fn default() -> Self {
        Self {
            depth: 30,
            gmres: GmresOptions::default(),
            power: PowerOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandwichReport {
    pub query: ResolventQuery,
    pub depth: usize,
    /// `‖⟨Q⟩ V G₀ ⟨Q⟩^{-1}‖` at this point.
    pub coupling_norm: f64,
    /// `‖L − R‖ / ‖L‖` with the Neumann series cut at `depth`.
    pub residual: f64,
    /// Residual after each truncation depth `0..=depth`.
    pub residual_by_depth: Vec<f64>,
    /// `s^{depth+1} / (1 − s)` for the measured coupling norm `s`.
    pub tail_bound: f64,
    pub gmres_iterations: usize,
    pub gmres_residual: f64,
}

/// Compares `⟨Q⟩^{-1}(H − z)^{-1}⟨Q⟩^{-1} g` computed by a Krylov solve against
/// `⟨Q⟩^{-1} G₀ ⟨Q⟩^{-1} [I + K]^{-1} g` with `K = ⟨Q⟩ V G₀ ⟨Q⟩^{-1}` summed as a Neumann series.
pub fn sandwich_identity_check(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    pot: &Potential,
    query: &ResolventQuery,
    g: &SpinorField,
    opts: &SandwichOptions,
) -> Result<SandwichReport> {
    query.validate()?;
    pot.check_field(g)?;
    let g = g.to_space(Space::Position);
    let s = if pot.is_zero() {
        0.0
    } else {
        coupling_norm(rep, cutoff, pot, query, &opts.power)?.value
    };
    if s >= 1.0 {
        return Err(Error::SmallnessViolated(s));
    }
    let free = |f: &SpinorField| -> Result<SpinorField> { Ok(resolvent_g(rep, cutoff, query, f)?.into_position()) };

    // (H − z) G₀ w = (I + V G₀) w, so u = G₀ w solves (H − z) u = ⟨Q⟩^{-1} g.
    let rhs = apply_weight(&g, -1.0)?;
    let solve = gmres(
        |w| {
            let mut out = pot.apply(&free(w).expect("validated query")).expect("checked field");
            out.axpy(crate::linalg::ONE, w);
            out
        },
        &rhs,
        &opts.gmres,
    );
    if !solve.converged {
        return Err(Error::NotConverged {
            iterations: solve.iterations,
            residual: solve.relative_residual,
        });
    }
    let lhs = apply_weight(&free(&solve.solution)?, -1.0)?;
    let lnorm = lhs.norm();

    let outer = |f: &SpinorField| -> Result<SpinorField> { apply_weight(&free(&apply_weight(f, -1.0)?)?, -1.0) };
    let g_norm = g.norm();
    let mut term = g.clone();
    let mut partial = g.clone();
    let mut residual_by_depth = Vec::with_capacity(opts.depth + 1);
    for k in 0..=opts.depth {
        if k > 0 {
            term = apply_coupling(rep, cutoff, pot, query, &term)?.scaled(-crate::linalg::ONE);
            let tn = term.norm();
            if !tn.is_finite() || tn > 1e6 * g_norm {
                return Err(Error::NeumannDivergence { depth: k, norm: tn });
            }
            partial.axpy(crate::linalg::ONE, &term);
        }
        let right = outer(&partial)?;
        let diff = lhs.sub(&right).norm();
        residual_by_depth.push(if lnorm > 0.0 { diff / lnorm } else { diff });
    }
    Ok(SandwichReport {
        query: *query,
        depth: opts.depth,
        coupling_norm: s,
        residual: *residual_by_depth.last().expect("depth + 1 entries"),
        residual_by_depth,
        tail_bound: s.powi(opts.depth as i32 + 1) / (1.0 - s),
        gmres_iterations: solve.iterations,
        gmres_residual: solve.relative_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_clifford;
    use crate::grid::{gaussian_state, Grid, GridSpec};
    use crate::lap::Sign;
    use crate::linalg::C64;
    use crate::scattering::PotentialSpec;

    fn setup() -> (Grid, CliffordRep, SpinorField) {
        let g = Grid::new(GridSpec::new(2, 32, 16.0).unwrap()).unwrap();
        let f = gaussian_state(&g, &[0.3, 0.0], 1.5, &[C64::new(1.0, 0.0), C64::new(0.0, 0.5)]);
        (g, build_clifford(2).unwrap(), f)
    }

    #[test]
    fn free_case_is_exact() {
        let (g, rep, f) = setup();
        let pot = PotentialSpec::Zero.build(&rep, &g).unwrap();
        let q = ResolventQuery::new(0.8, 0.5, 0.0, Sign::Plus).unwrap();
        let r = sandwich_identity_check(&rep, &CutoffFunction, &pot, &q, &f, &SandwichOptions::default()).unwrap();
        assert!(r.residual < 1e-10, "{}", r.residual);
    }

    #[test]
    fn small_potential_converges_geometrically() {
        let (g, rep, f) = setup();
        let pot = PotentialSpec::Em { q: 0.1, a: vec![0.03, 0.02] }.build(&rep, &g).unwrap();
        let q = ResolventQuery::new(1.1, 0.5, 0.0, Sign::Minus).unwrap();
        let r = sandwich_identity_check(&rep, &CutoffFunction, &pot, &q, &f, &SandwichOptions::default()).unwrap();
        assert!(r.coupling_norm < 1.0);
        assert!(r.residual < 1e-6, "{}", r.residual);
        // early terms shrink at least as fast as the measured coupling norm
        let d = &r.residual_by_depth;
        for k in 0..4 {
            assert!(d[k + 1] <= d[k] * r.coupling_norm * 1.05, "{k}: {} {}", d[k], d[k + 1]);
        }
    }

    #[test]
    fn large_potential_is_rejected() {
        let (g, rep, f) = setup();
        let pot = PotentialSpec::coulomb2(20.0).build(&rep, &g).unwrap();
        let q = ResolventQuery::new(0.5, 0.5, 0.0, Sign::Plus).unwrap();
        let err = sandwich_identity_check(&rep, &CutoffFunction, &pot, &q, &f, &SandwichOptions::default());
        assert!(matches!(err, Err(Error::SmallnessViolated(_))));
    }
}
