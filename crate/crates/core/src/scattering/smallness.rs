use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::error::{invalid, Error, Result};
use crate::grid::{random_field, SpinorField};
use crate::lap::{mu_min, resolvent_g, ResolventQuery, Sign};
use crate::operators::{apply_weight, CutoffFunction};
use crate::power::{largest_singular_value, NormEstimate, PowerOptions};

use super::potential::Potential;

/// `K f = ⟨Q⟩ V G₀^±(λ, μ) ⟨Q⟩^{-1} f`, position space in and out.
pub fn apply_coupling(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    pot: &Potential,
    q: &ResolventQuery,
    f: &SpinorField,
) -> Result<SpinorField> {
    let w = apply_weight(f, -1.0)?;
    let g = resolvent_g(rep, cutoff, q, &w)?.into_position();
    apply_weight(&pot.apply(&g)?, 1.0)
}

/// `K* f = ⟨Q⟩^{-1} G₀^∓ V ⟨Q⟩ f`.
pub fn apply_coupling_adjoint(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    pot: &Potential,
    q: &ResolventQuery,
    f: &SpinorField,
) -> Result<SpinorField> {
    let v = pot.apply(&apply_weight(f, 1.0)?)?;
    let g = resolvent_g(rep, cutoff, &q.adjoint(), &v)?.into_position();
    apply_weight(&g, -1.0)
}

/// `‖⟨Q⟩ V G₀^±(λ, μ) ⟨Q⟩^{-1}‖` at one point.
pub fn coupling_norm(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    pot: &Potential,
    q: &ResolventQuery,
    opts: &PowerOptions,
) -> Result<NormEstimate> {
    q.validate()?;
    let start = random_field(pot.grid(), pot.size(), opts.seed);
    Ok(largest_singular_value(
        |f| apply_coupling(rep, cutoff, pot, q, f).expect("position-space field"),
        |f| apply_coupling_adjoint(rep, cutoff, pot, q, f).expect("position-space field"),
        start,
        opts,
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallnessOptions {
    pub lambdas: Vec<f64>,
    pub mus: Vec<f64>,
    #[serde(default = "both_signs")]
    pub signs: Vec<Sign>,
    #[serde(default)]
    pub power: PowerOptions,
    #[serde(default = "yes")]
    pub parallel: bool,
}

fn both_signs() -> Vec<Sign> {
    vec![Sign::Plus, Sign::Minus]
}

fn yes() -> bool {
    true
}

impl SmallnessOptions {
    pub fn new(lambdas: Vec<f64>, mus: Vec<f64>) -> Self {
        Self {
            lambdas,
            mus,
            signs: both_signs(),
            power: PowerOptions::default(),
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallnessSample {
    pub lambda: f64,
    pub mu: f64,
    pub sign: Sign,
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Sup of the coupling norm over a finite sample; the verdict certifies sampled points only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallnessReport {
    pub samples: Vec<SmallnessSample>,
    pub sup: f64,
    pub argmax: Option<SmallnessSample>,
    pub verdict: bool,
    pub decay_constant: f64,
    pub all_converged: bool,
}

pub fn smallness_check(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    pot: &Potential,
    opts: &SmallnessOptions,
) -> Result<SmallnessReport> {
    let cert = pot.certificate().ok_or(Error::MissingCertificate)?;
    if opts.lambdas.is_empty() || opts.mus.is_empty() || opts.signs.is_empty() {
        return invalid("smallness sample set is empty");
    }
    let floor = mu_min(&pot.grid().spec());
    if let Some(mu) = opts.mus.iter().find(|&&m| !(m >= floor)) {
        return invalid(format!("mu = {mu} lies below the grid floor {floor:.4}"));
    }
    let mut points = Vec::new();
    for &mu in &opts.mus {
        for &lambda in &opts.lambdas {
            for &sign in &opts.signs {
                points.push(ResolventQuery::new(lambda, mu, 0.0, sign)?);
            }
        }
    }
    let eval = |q: &ResolventQuery| -> Result<SmallnessSample> {
        let est = coupling_norm(rep, cutoff, pot, q, &opts.power)?;
        Ok(SmallnessSample {
            lambda: q.lambda,
            mu: q.mu,
            sign: q.sign,
            norm: est.value,
            iterations: est.iterations,
            converged: est.converged,
        })
    };
    let samples: Vec<SmallnessSample> = if opts.parallel {
        points.par_iter().map(eval).collect::<Result<_>>()?
    } else {
        points.iter().map(eval).collect::<Result<_>>()?
    };
    let argmax = samples.iter().copied().max_by(|a, b| a.norm.total_cmp(&b.norm));
    let sup = argmax.map_or(0.0, |s| s.norm);
    Ok(SmallnessReport {
        all_converged: samples.iter().all(|s| s.converged),
        samples,
        sup,
        argmax,
        verdict: sup < 1.0,
        decay_constant: cert.constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_clifford;
    use crate::grid::{Grid, GridSpec};
    use crate::linalg::CMatrix;
    use crate::scattering::PotentialSpec;

    fn setup() -> (Grid, CliffordRep) {
        (Grid::new(GridSpec::new(2, 32, 16.0).unwrap()).unwrap(), build_clifford(2).unwrap())
    }

    fn opts() -> SmallnessOptions {
        SmallnessOptions::new(vec![-1.0, 0.5, 2.0], vec![0.5])
    }

    #[test]
    fn zero_potential_gives_zero() {
        let (g, rep) = setup();
        let pot = PotentialSpec::Zero.build(&rep, &g).unwrap();
        let r = smallness_check(&rep, &CutoffFunction, &pot, &opts()).unwrap();
        assert_eq!(r.sup, 0.0);
        assert!(r.verdict);
    }

    #[test]
    fn sup_is_linear_in_coupling() {
        let (g, rep) = setup();
        let spec = PotentialSpec::Matrix { c: 0.1, seed: 3 };
        let a = smallness_check(&rep, &CutoffFunction, &spec.build(&rep, &g).unwrap(), &opts()).unwrap();
        let b = smallness_check(&rep, &CutoffFunction, &spec.scaled(3.0).build(&rep, &g).unwrap(), &opts()).unwrap();
        assert!((b.sup / a.sup - 3.0).abs() < 1e-9, "{}", b.sup / a.sup);
    }

    #[test]
    fn adjoint_pairing() {
        let (g, rep) = setup();
        let pot = PotentialSpec::Em { q: 0.2, a: vec![0.1, -0.05] }.build(&rep, &g).unwrap();
        let q = ResolventQuery::new(0.7, 0.4, 0.0, Sign::Minus).unwrap();
        let f = random_field(&g, 2, 1);
        let h = random_field(&g, 2, 2);
        let lhs = h.inner(&apply_coupling(&rep, &CutoffFunction, &pot, &q, &f).unwrap());
        let rhs = apply_coupling_adjoint(&rep, &CutoffFunction, &pot, &q, &h).unwrap().inner(&f);
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn uncertified_potential_rejected() {
        let (g, rep) = setup();
        let pot = Potential::from_sites(&g, 2, vec![CMatrix::identity(2); g.sites()]).unwrap();
        let err = smallness_check(&rep, &CutoffFunction, &pot, &opts());
        assert!(matches!(err, Err(Error::MissingCertificate)));
    }

    #[test]
    fn mu_below_floor_rejected() {
        let (g, rep) = setup();
        let pot = PotentialSpec::coulomb2(0.1).build(&rep, &g).unwrap();
        let o = SmallnessOptions::new(vec![0.0], vec![1e-3]);
        assert!(smallness_check(&rep, &CutoffFunction, &pot, &o).is_err());
    }
}
