//! Matrix potentials on the position lattice with a certified `⟨x⟩^{-2}` decay bound.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::error::{invalid, Error, Result};
use crate::grid::{Grid, Space, SpinorField};
use crate::linalg::{CMatrix, C64, ZERO};

/// JSON description of a potential. `c` is the decay constant of the envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialSpec {
    /// `V = 0`.
    Zero,
    /// Scalar `q(x) = c⟨x⟩^{-2}`.
    Coulomb2 { c: f64 },
    /// Minimal coupling `V = qI − α·A` with `q = c_q⟨x⟩^{-2}` and
    /// `A_j = a_j⟨x⟩^{-2}`; the certificate is `|c_q| + Σ|a_j|`.
    Em {
        #[serde(alias = "c")]
        q: f64,
        a: Vec<f64>,
    },
    /// `c⟨x⟩^{-2} M` with `M` a seeded random Hermitian matrix of unit norm.
    Matrix { c: f64, seed: u64 },
    /// Scalar `c (1 − |x|²/R²)²` on `|x| < R`, zero outside.
    Compact { c: f64, radius: f64 },
}

impl PotentialSpec {
    /// Built-in scalar potential `c⟨x⟩^{-2}`.
    pub fn coulomb2(c: f64) -> Self {
        PotentialSpec::Coulomb2 { c }
    }

    /// Envelope constant `C` used as the decay certificate.
    pub fn decay_constant(&self) -> f64 {
        match self {
            PotentialSpec::Zero => 0.0,
            PotentialSpec::Coulomb2 { c } | PotentialSpec::Matrix { c, .. } => c.abs(),
            PotentialSpec::Em { q, a } => q.abs() + a.iter().map(|x| x.abs()).sum::<f64>(),
            // (1 − s²)²(1 + R²s²) ≤ 1 + R² on s = |x|/R ∈ [0, 1]
            PotentialSpec::Compact { c, radius } => c.abs() * (1.0 + radius * radius),
        }
    }

    /// Returns the same family with every coupling multiplied by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        match self.clone() {
            PotentialSpec::Zero => PotentialSpec::Zero,
            PotentialSpec::Coulomb2 { c } => PotentialSpec::Coulomb2 { c: c * t },
            PotentialSpec::Em { q, a } => PotentialSpec::Em {
                q: q * t,
                a: a.into_iter().map(|x| x * t).collect(),
            },
            PotentialSpec::Matrix { c, seed } => PotentialSpec::Matrix { c: c * t, seed },
            PotentialSpec::Compact { c, radius } => PotentialSpec::Compact { c: c * t, radius },
        }
    }

    fn validate(&self, rep: &CliffordRep) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                invalid(format!("potential parameter {what} must be finite"))
            }
        };
        match self {
            PotentialSpec::Zero => Ok(()),
            PotentialSpec::Coulomb2 { c } | PotentialSpec::Matrix { c, .. } => finite(*c, "c"),
            PotentialSpec::Em { q, a } => {
                finite(*q, "q")?;
                if a.len() != rep.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: rep.dim(),
                        got: a.len(),
                    });
                }
                a.iter().try_for_each(|x| finite(*x, "a"))
            }
            PotentialSpec::Compact { c, radius } => {
                finite(*c, "c")?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return invalid("compact potential needs a positive radius");
                }
                Ok(())
            }
        }
    }

    /// Samples the potential on `grid` and checks the decay certificate.
    pub fn build(&self, rep: &CliffordRep, grid: &Grid) -> Result<Potential> {
        self.validate(rep)?;
        let n = rep.size();
        let envelope = |s: usize| {
            let j = grid.japanese(s);
            1.0 / (j * j)
        };
        let sites: Vec<CMatrix> = match self {
            PotentialSpec::Zero => vec![CMatrix::zeros(n); grid.sites()],
            PotentialSpec::Coulomb2 { c } => (0..grid.sites())
                .map(|s| CMatrix::scalar(n, C64::new(c * envelope(s), 0.0)))
                .collect(),
            PotentialSpec::Em { q, a } => {
                let mut coupling = CMatrix::zeros(n);
                for (j, aj) in a.iter().enumerate() {
                    coupling = &coupling + &rep.alphas()[j].scale_re(*aj);
                }
                let base = &CMatrix::scalar(n, C64::new(*q, 0.0)) - &coupling;
                (0..grid.sites()).map(|s| base.scale_re(envelope(s))).collect()
            }
            PotentialSpec::Matrix { c, seed } => {
                let m = random_hermitian(n, *seed);
                (0..grid.sites()).map(|s| m.scale_re(c * envelope(s))).collect()
            }
            PotentialSpec::Compact { c, radius } => (0..grid.sites())
                .map(|s| {
                    let r = grid.abs_position(s) / radius;
                    let v = if r < 1.0 { c * (1.0 - r * r).powi(2) } else { 0.0 };
                    CMatrix::scalar(n, C64::new(v, 0.0))
                })
                .collect(),
        };
        let mut pot = Potential::from_sites(grid, n, sites)?;
        pot.certify(self.decay_constant())?;
        Ok(pot)
    }
}

fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = CMatrix::zeros(n);
    for r in 0..n {
        for c in r..n {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = if r == c { 0.0 } else { StandardNormal.sample(&mut rng) };
            m.set(r, c, C64::new(re, im));
            m.set(c, r, C64::new(re, -im));
        }
    }
    let norm = m.operator_norm();
    if norm > 0.0 {
        m.scale_re(1.0 / norm)
    } else {
        CMatrix::identity(n)
    }
}

/// Certified bound `‖V(x)‖ ≤ constant·⟨x⟩^{-2}` at every lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub constant: f64,
    /// Largest `‖V(x)‖⟨x⟩²` on the lattice.
    pub measured: f64,
}

/// Per-site Hermitian matrices `V(x)` on a grid.
#[derive(Debug, Clone)]
pub struct Potential {
    grid: Grid,
    size: usize,
    sites: Vec<CMatrix>,
    scalar: bool,
    certificate: Option<DecayCertificate>,
}

const HERMITIAN_TOL: f64 = 1e-12;

impl Potential {
    /// Wraps site matrices after checking shape and self-adjointness. No certificate is attached.
    pub fn from_sites(grid: &Grid, size: usize, sites: Vec<CMatrix>) -> Result<Self> {
        if sites.len() != grid.sites() {
            return Err(Error::DimensionMismatch {
                expected: grid.sites(),
                got: sites.len(),
            });
        }
        let mut scalar = true;
        for m in &sites {
            if m.dim() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    got: m.dim(),
                });
            }
            if m.as_slice().iter().any(|z| !z.is_finite()) {
                return invalid("potential has non-finite entries");
            }
            let scale = m.max_abs().max(1.0);
            if m.max_abs_diff(&m.adjoint()) > HERMITIAN_TOL * scale {
                return invalid("potential is not self-adjoint at some site");
            }
            let d = m.get(0, 0);
            scalar &= (0..size).all(|r| (0..size).all(|c| m.get(r, c) == if r == c { d } else { ZERO }));
        }
        Ok(Self {
            grid: grid.clone(),
            size,
            sites,
            scalar,
            certificate: None,
        })
    }

    /// Attaches the certificate `‖V(x)‖⟨x⟩² ≤ constant`, verified site by site.
    pub fn certify(&mut self, constant: f64) -> Result<DecayCertificate> {
        let measured = self.decay_profile();
        if measured > constant * (1.0 + 1e-12) + 1e-300 {
            return invalid(format!(
                "decay bound fails: max ‖V(x)‖⟨x⟩² = {measured:.6e} exceeds {constant:.6e}"
            ));
        }
        let cert = DecayCertificate { constant, measured };
        self.certificate = Some(cert);
        Ok(cert)
    }

    /// Largest `‖V(x)‖⟨x⟩²` over the lattice.
    pub fn decay_profile(&self) -> f64 {
        (0..self.grid.sites())
            .map(|s| {
                let j = self.grid.japanese(s);
                self.site_norm(s) * j * j
            })
            .fold(0.0, f64::max)
    }

    fn site_norm(&self, s: usize) -> f64 {
        if self.scalar {
            self.sites[s].get(0, 0).norm()
        } else {
            self.sites[s].operator_norm()
        }
    }

    pub fn certificate(&self) -> Option<DecayCertificate> {
        self.certificate
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn site(&self, s: usize) -> &CMatrix {
        &self.sites[s]
    }

    /// True when every `V(x)` is a real multiple of the identity.
    pub fn is_scalar(&self) -> bool {
        self.scalar
    }

    pub fn is_zero(&self) -> bool {
        self.sites.iter().all(|m| m.max_abs() == 0.0)
    }

    pub(crate) fn check_field(&self, f: &SpinorField) -> Result<()> {
        if self.grid != *f.grid() {
            return Err(Error::GridMismatch);
        }
        if f.ncomp() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                got: f.ncomp(),
            });
        }
        Ok(())
    }

    /// Applies `V` pointwise; the result is in position space.
    pub fn apply(&self, f: &SpinorField) -> Result<SpinorField> {
        self.check_field(f)?;
        let x = f.to_space(Space::Position);
        let mut out = SpinorField::zeros(&self.grid, self.size, Space::Position);
        for s in 0..self.grid.sites() {
            if self.scalar {
                let d = self.sites[s].get(0, 0);
                for (o, v) in out.site_mut(s).iter_mut().zip(x.site(s)) {
                    *o = d * v;
                }
            } else {
                self.sites[s].matvec_into(x.site(s), out.site_mut(s));
            }
        }
        Ok(out)
    }

    /// Per-site `exp(−i t V(x))`.
    pub(crate) fn exponentials(&self, t: f64) -> Vec<CMatrix> {
        self.sites
            .iter()
            .map(|m| {
                if self.scalar {
                    let phase = C64::from_polar(1.0, -m.get(0, 0).re * t);
                    CMatrix::scalar(self.size, phase)
                } else {
                    m.hermitian_unitary_exp(t)
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::build_clifford;
    use crate::grid::{random_field, GridSpec};

    fn setup() -> (Grid, CliffordRep) {
        (Grid::new(GridSpec::new(2, 16, 8.0).unwrap()).unwrap(), build_clifford(2).unwrap())
    }

    #[test]
    fn json_schema_round_trip() {
        let spec: PotentialSpec = serde_json::from_str(r#"{"kind":"coulomb2","c":0.05}"#).unwrap();
        assert_eq!(spec, PotentialSpec::coulomb2(0.05));
        let em: PotentialSpec = serde_json::from_str(r#"{"kind":"em","q":0.1,"a":[0.02,-0.01]}"#).unwrap();
        let back: PotentialSpec = serde_json::from_str(&serde_json::to_string(&em).unwrap()).unwrap();
        assert_eq!(em, back);
    }

    #[test]
    fn certificates_hold_for_built_ins() {
        let (g, rep) = setup();
        for spec in [
            PotentialSpec::coulomb2(0.3),
            PotentialSpec::Em { q: 0.1, a: vec![0.05, -0.02] },
            PotentialSpec::Matrix { c: 0.2, seed: 4 },
            PotentialSpec::Compact { c: 0.2, radius: 2.0 },
        ] {
            let pot = spec.build(&rep, &g).unwrap();
            let cert = pot.certificate().unwrap();
            assert!(cert.measured <= cert.constant * (1.0 + 1e-12));
        }
    }

    #[test]
    fn em_with_vector_part_is_matrix_valued() {
        let (g, rep) = setup();
        let pot = PotentialSpec::Em { q: 0.1, a: vec![0.05, 0.0] }.build(&rep, &g).unwrap();
        assert!(!pot.is_scalar());
        // q ± |a| are the eigenvalues at the origin
        let ev = pot.site(g.zero_site()).hermitian_eigenvalues();
        assert!((ev[0] - 0.05).abs() < 1e-14 && (ev[1] - 0.15).abs() < 1e-14);
    }

    #[test]
    fn wrong_vector_length_rejected() {
        let (g, rep) = setup();
        let err = PotentialSpec::Em { q: 0.1, a: vec![0.1] }.build(&rep, &g);
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn non_hermitian_sites_rejected() {
        let (g, _) = setup();
        let mut m = CMatrix::zeros(2);
        m.set(0, 1, C64::new(1.0, 0.0));
        assert!(Potential::from_sites(&g, 2, vec![m; g.sites()]).is_err());
    }

    #[test]
    fn site_exponentials_are_unitary() {
        let (g, rep) = setup();
        let pot = PotentialSpec::Matrix { c: 0.7, seed: 1 }.build(&rep, &g).unwrap();
        let f = random_field(&g, 2, 3);
        let e = pot.exponentials(0.3);
        let mut out = f.clone();
        for s in 0..g.sites() {
            e[s].matvec_into(f.site(s), out.site_mut(s));
        }
        assert!((out.norm() - f.norm()).abs() < 1e-13);
    }
}
