//! Perturbed operator `H = H₀ + V`, the smallness condition on
//! `⟨Q⟩ V G₀ ⟨Q⟩^{-1}`, the perturbed resolvent sandwich, and
//! time-domain wave operators.

mod krylov;
mod potential;
mod propagate;
mod sandwich;
mod smallness;
mod wave;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::error::Result;
use crate::grid::{packet_state, random_field, Grid, GridSpec, PacketSpec, Space, SpinorField};
use crate::lap::ResolventQuery;
use crate::operators::{apply_h0, CutoffFunction};

pub use krylov::{gmres, GmresOptions, GmresOutcome};
pub use potential::{DecayCertificate, Potential, PotentialSpec};
pub use propagate::{evolve, free_evolve, Evolution, Propagator};
pub use sandwich::{sandwich_identity_check, SandwichOptions, SandwichReport};
pub use smallness::{
    apply_coupling, apply_coupling_adjoint, coupling_norm, smallness_check, SmallnessOptions, SmallnessReport,
    SmallnessSample,
};
pub use wave::{wave_operator, ProbeReport, WaveOptions, WaveOutcome};

/// `H f = H₀(m) f + V f`, returned in position space.
pub fn apply_h(rep: &CliffordRep, pot: &Potential, f: &SpinorField, mass: f64) -> Result<SpinorField> {
    pot.check_field(f)?;
    let mut out = apply_h0(rep, f, mass)?.into_position();
    out.axpy(crate::linalg::ONE, &pot.apply(f)?);
    Ok(out)
}

/// Everything needed to reproduce one scattering experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatteringOptions {
    pub smallness: SmallnessOptions,
    pub sandwich: SandwichOptions,
    /// Points `z = λ ± iμ` for the sandwich identity.
    pub sandwich_queries: Vec<ResolventQuery>,
    pub wave: WaveOptions,
    pub probes: Vec<PacketSpec>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub certificate: DecayCertificate,
    pub smallness: SmallnessReport,
    pub sandwich: Vec<SandwichReport>,
    pub probes: Vec<ProbeReport>,
    /// Maxima over probes.
    pub isometry_defect: f64,
    pub intertwining_defect: f64,
    pub unitarity_drift: f64,
    pub tails_decreasing: bool,
    pub all_probes_valid: bool,
    /// The smallness verdict covers only the sampled `(λ, μ)` points.
    pub note: String,
}

/// Runs smallness, sandwich and wave-operator diagnostics for one potential.
pub fn run_scattering(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    grid: &Grid,
    spec: &PotentialSpec,
    opts: &ScatteringOptions,
) -> Result<ScatteringReport> {
    let pot = spec.build(rep, grid)?;
    let certificate = pot.certificate().expect("built-ins are certified");
    let smallness = smallness_check(rep, cutoff, &pot, &opts.smallness)?;
    let g = random_field(grid, rep.size(), opts.seed);
    let sandwich: Vec<SandwichReport> = opts
        .sandwich_queries
        .par_iter()
        .map(|q| sandwich_identity_check(rep, cutoff, &pot, q, &g, &opts.sandwich))
        .collect::<Result<_>>()?;
    let probes: Vec<ProbeReport> = opts
        .probes
        .par_iter()
        .enumerate()
        .map(|(k, p)| -> Result<ProbeReport> {
            let psi = packet_state(grid, rep, p, opts.seed + k as u64)?;
            debug_assert_eq!(psi.space(), Space::Position);
            let label = format!("packet p0={:?} sigma={}", p.momentum, p.sigma);
            Ok(wave_operator(rep, &pot, &psi, &label, &opts.wave)?.report)
        })
        .collect::<Result<_>>()?;
    let max = |f: fn(&ProbeReport) -> f64| probes.iter().map(f).fold(0.0, f64::max);
    Ok(ScatteringReport {
        grid: grid.spec(),
        potential: spec.clone(),
        certificate,
        isometry_defect: max(|p| p.isometry_defect),
        intertwining_defect: max(|p| p.intertwining_defect),
        unitarity_drift: max(|p| p.unitarity_drift),
        tails_decreasing: probes.iter().all(|p| p.tails_decreasing),
        all_probes_valid: probes.iter().all(|p| p.valid),
        note: format!(
            "smallness certified on {} sampled points only",
            smallness.samples.len()
        ),
        smallness,
        sandwich,
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_clifford;
    use crate::grid::gaussian_state;
    use crate::linalg::C64;

    fn setup() -> (Grid, CliffordRep) {
        (Grid::new(GridSpec::new(2, 32, 16.0).unwrap()).unwrap(), build_clifford(2).unwrap())
    }

    #[test]
    fn zero_potential_reduces_to_free_operator() {
        let (g, rep) = setup();
        let pot = PotentialSpec::Zero.build(&rep, &g).unwrap();
        let f = random_field(&g, 2, 7);
        let h = apply_h(&rep, &pot, &f, 0.0).unwrap();
        let h0 = apply_h0(&rep, &f, 0.0).unwrap();
        assert!(h.sub(&h0).norm() < 1e-14);
    }

    #[test]
    fn perturbed_operator_is_symmetric() {
        let (g, rep) = setup();
        let pot = PotentialSpec::Em { q: 0.4, a: vec![0.2, -0.1] }.build(&rep, &g).unwrap();
        let a = random_field(&g, 2, 1);
        let b = random_field(&g, 2, 2);
        let lhs = a.inner(&apply_h(&rep, &pot, &b, 0.0).unwrap());
        let rhs = apply_h(&rep, &pot, &a, 0.0).unwrap().inner(&b);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn scalar_energy_is_a_quadrature() {
        let (g, rep) = setup();
        let pot = PotentialSpec::Em { q: 1.0, a: vec![0.0, 0.0] }.build(&rep, &g).unwrap();
        let f = gaussian_state(&g, &[0.5, 0.0], 1.3, &[C64::new(1.0, 0.0), C64::new(0.2, 0.1)]);
        let diff = f.inner(&apply_h(&rep, &pot, &f, 0.0).unwrap()) - f.inner(&apply_h0(&rep, &f, 0.0).unwrap());
        let w = g.spec().cell_volume(Space::Position);
        let quad: f64 = (0..g.sites())
            .map(|s| crate::linalg::norm_sq(f.site(s)) / g.japanese(s).powi(2))
            .sum::<f64>()
            * w;
        assert!((diff.re - quad).abs() < 1e-12 && diff.im.abs() < 1e-12);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let (g, rep) = setup();
        let other = Grid::new(GridSpec::new(2, 16, 16.0).unwrap()).unwrap();
        let pot = PotentialSpec::Zero.build(&rep, &g).unwrap();
        assert!(apply_h(&rep, &pot, &random_field(&other, 2, 0), 0.0).is_err());
    }
}
