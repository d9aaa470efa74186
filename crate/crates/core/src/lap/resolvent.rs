use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::error::{invalid, Result};
use crate::grid::SpinorField;
use crate::linalg::C64;
use crate::operators::{apply_multiplier, CutoffFunction, MultiplierSymbol};

/// Side of the real axis on which the spectral parameter sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Parameters of `T = H₀(m) − (λ ± iμ) ∓ iεB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventQuery {
    pub lambda: f64,
    pub mu: f64,
    pub eps: f64,
    pub sign: Sign,
    #[serde(default)]
    pub mass: f64,
}

impl ResolventQuery {
    pub fn new(lambda: f64, mu: f64, eps: f64, sign: Sign) -> Result<Self> {
        let q = Self {
            lambda,
            mu,
            eps,
            sign,
            mass: 0.0,
        };
        q.validate()?;
        Ok(q)
    }

    pub fn with_mass(mut self, mass: f64) -> Result<Self> {
        self.mass = mass;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps(mut self, eps: f64) -> Result<Self> {
        self.eps = eps;
        self.validate()?;
        Ok(self)
    }

    /// The query for the adjoint resolvent.
    pub fn adjoint(self) -> Self {
        Self {
            sign: self.sign.flip(),
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0) || !self.mu.is_finite() {
            return invalid(format!("mu must be positive, got {}", self.mu));
        }
        if !(0.0..1.0).contains(&self.eps) {
            return invalid(format!("eps must lie in [0, 1), got {}", self.eps));
        }
        if !(self.mass >= 0.0) {
            return invalid(format!("mass must be nonnegative, got {}", self.mass));
        }
        if !self.lambda.is_finite() {
            return invalid("lambda must be finite");
        }
        Ok(())
    }

    /// `w(p) = λ ± i(μ + ε η(p))`.
    pub fn shift(&self, cutoff: &CutoffFunction, p: &[f64]) -> C64 {
        C64::new(self.lambda, self.sign.value() * (self.mu + self.eps * cutoff.eta(p)))
    }
}

fn symbols(rep: &CliffordRep, cutoff: CutoffFunction, q: ResolventQuery, inverse: bool) -> MultiplierSymbol {
    let rep = rep.clone();
    let name = if inverse { "G" } else { "T" };
    MultiplierSymbol::new(name, crate::operators::ZeroMode::Regular, move |p| {
        let w = q.shift(&cutoff, p);
        let mut d = crate::clifford::dirac_symbol(&rep, p, q.mass).expect("validated mass");
        let n = d.dim();
        if inverse {
            let r2: f64 = p.iter().map(|x| x * x).sum::<f64>() + q.mass * q.mass;
            let denom = C64::new(r2, 0.0) - w * w;
            for i in 0..n {
                d.set(i, i, d.get(i, i) + w);
            }
            d = d.scale(denom.inv());
        } else {
            for i in 0..n {
                d.set(i, i, d.get(i, i) - w);
            }
        }
        crate::operators::SymbolValue::Matrix(d)
    })
}

/// `G = T^{-1}` applied mode by mode via `(α·p + mβ + w)/(|p|² + m² − w²)`.
pub fn resolvent_g(rep: &CliffordRep, cutoff: &CutoffFunction, q: &ResolventQuery, f: &SpinorField) -> Result<SpinorField> {
    q.validate()?;
    apply_multiplier(&symbols(rep, *cutoff, *q, true), f)
}

/// `T f`.
pub fn apply_t(rep: &CliffordRep, cutoff: &CutoffFunction, q: &ResolventQuery, f: &SpinorField) -> Result<SpinorField> {
    q.validate()?;
    apply_multiplier(&symbols(rep, *cutoff, *q, false), f)
}

/// `F(ψ) = ⟨ψ, G ψ⟩`.
pub fn f_eps(rep: &CliffordRep, cutoff: &CutoffFunction, q: &ResolventQuery, psi: &SpinorField) -> Result<C64> {
    Ok(psi.inner(&resolvent_g(rep, cutoff, q, psi)?))
}

/// Central difference of `ε ↦ F` against the exact derivative `±i⟨ψ, G B G ψ⟩`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivativeCheck {
    pub eps: f64,
    pub step: f64,
    pub finite_difference: C64,
    pub exact: C64,
    pub relative_error: f64,
}

pub fn f_eps_derivative(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    q: &ResolventQuery,
    psi: &SpinorField,
    step: f64,
) -> Result<DerivativeCheck> {
    if !(step > 0.0) || q.eps - step < 0.0 || q.eps + step >= 1.0 {
        return invalid(format!("step {step} leaves [0, 1) around eps = {}", q.eps));
    }
    let up = f_eps(rep, cutoff, &q.with_eps(q.eps + step)?, psi)?;
    let down = f_eps(rep, cutoff, &q.with_eps(q.eps - step)?, psi)?;
    let fd = (up - down) / (2.0 * step);
    let g = resolvent_g(rep, cutoff, q, psi)?;
    let bg = apply_multiplier(&MultiplierSymbol::cutoff(*cutoff), &g)?;
    let gbg = resolvent_g(rep, cutoff, q, &bg)?;
    let exact = C64::new(0.0, q.sign.value()) * psi.inner(&gbg);
    Ok(DerivativeCheck {
        eps: q.eps,
        step,
        finite_difference: fd,
        exact,
        relative_error: (fd - exact).norm() / exact.norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_clifford;
    use crate::grid::{annulus_state, random_field, Grid, GridSpec, Space};

    fn setup() -> (Grid, CliffordRep) {
        (
            Grid::new(GridSpec::new(2, 32, 16.0).unwrap()).unwrap(),
            build_clifford(2).unwrap(),
        )
    }

    #[test]
    fn rejects_bad_queries() {
        assert!(ResolventQuery::new(0.0, 0.0, 0.0, Sign::Plus).is_err());
        assert!(ResolventQuery::new(0.0, -1.0, 0.0, Sign::Plus).is_err());
        assert!(ResolventQuery::new(0.0, 1.0, 1.0, Sign::Plus).is_err());
        assert!(ResolventQuery::new(0.0, 1.0, 0.0, Sign::Plus).unwrap().with_mass(-1.0).is_err());
    }

    #[test]
    fn scalar_resolvent_on_eigenvector() {
        let (g, rep) = setup();
        let k = [21usize, 12];
        let p = g.momentum(g.site_of(&k)).to_vec();
        let qn = (p[0] * p[0] + p[1] * p[1]).sqrt();
        let f = SpinorField::plane_wave(&g, &k, &rep.dirac_eigenvector(&p, 1.0));
        for sign in [Sign::Plus, Sign::Minus] {
            let q = ResolventQuery::new(0.4, 0.3, 0.0, sign).unwrap();
            let gf = resolvent_g(&rep, &CutoffFunction, &q, &f).unwrap();
            let z = C64::new(qn - 0.4, -sign.value() * 0.3).inv();
            assert!(gf.sub(&f.scaled(z)).norm() < 1e-12);
        }
    }

    #[test]
    fn inverse_bound_adjoint() {
        let (g, rep) = setup();
        let c = CutoffFunction;
        let f = random_field(&g, 2, 5);
        let h = random_field(&g, 2, 6);
        let q = ResolventQuery::new(1.3, 0.2, 0.4, Sign::Plus).unwrap().with_mass(0.5).unwrap();
        let gf = resolvent_g(&rep, &c, &q, &f).unwrap();
        assert!(apply_t(&rep, &c, &q, &gf).unwrap().sub(&f).norm() < 1e-12 * f.norm());
        assert!(gf.norm() <= f.norm() / q.mu);
        let lhs = gf.inner(&h);
        let rhs = f.inner(&resolvent_g(&rep, &c, &q.adjoint(), &h).unwrap());
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm());
    }

    #[test]
    fn f_eps_sign_and_derivative() {
        let (g, rep) = setup();
        let c = CutoffFunction;
        let psi = annulus_state(&g, &rep, 0.3, 2.5, 8).unwrap();
        assert_eq!(f_eps(&rep, &c, &ResolventQuery::new(0.0, 1.0, 0.0, Sign::Plus).unwrap(), &SpinorField::zeros(&g, 2, Space::Position)).unwrap(), C64::new(0.0, 0.0));
        for sign in [Sign::Plus, Sign::Minus] {
            let q = ResolventQuery::new(0.8, 0.5, 0.0, sign).unwrap();
            let v = f_eps(&rep, &c, &q, &psi).unwrap();
            let gpsi = resolvent_g(&rep, &c, &q, &psi).unwrap();
            assert!((sign.value() * v.im - q.mu * gpsi.norm_sq()).abs() < 1e-12);
            let d = f_eps_derivative(&rep, &c, &q.with_eps(0.3).unwrap(), &psi, 1e-4).unwrap();
            assert!(d.relative_error < 1e-6, "{d:?}");
        }
    }
}
