//! Representations of the Clifford relations `αⱼαₖ + αₖαⱼ = 2δⱼₖ I`.
//!
//! Generators are produced by tensor doubling: starting from the single
//! 1×1 generator `[1]`, a family `g₁..g_{2m+1}` of size `2^m` becomes
//! `gᵢ ⊗ σ_x, I ⊗ σ_y, I ⊗ σ_z` of size `2^{m+1}`. All entries lie in
//! `{0, ±1, ±i}`, so every relation can be checked exactly.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{CMatrix, C64, I, ONE, ZERO};

/// `n` anticommuting self-adjoint matrices `α₁..αₙ` followed by `β`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordRep {
    n: usize,
    size: usize,
    mats: Vec<CMatrix>,
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[&[ZERO, -I], &[I, ZERO]])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_rows(&[&[ONE, ZERO], &[ZERO, -ONE]])
}

/// Representation size `2^⌊(n+1)/2⌋` for spatial dimension `n`.
pub fn spinor_size(n: usize) -> usize {
    1 << ((n + 1) / 2)
}

/// Builds `α₁..αₙ, β` for spatial dimension `n ≥ 1`.
pub fn build_clifford(n: usize) -> Result<CliffordRep> {
    if n < 1 {
        return invalid("Clifford dimension must be at least 1");
    }
    let needed = n + 1;
    let mut gens = vec![CMatrix::identity(1)];
    while gens.len() < needed {
        let d = gens[0].dim();
        let id = CMatrix::identity(d);
        let mut next: Vec<CMatrix> = gens.iter().map(|g| g.kron(&pauli_x())).collect();
        next.push(id.kron(&pauli_y()));
        next.push(id.kron(&pauli_z()));
        gens = next;
    }
    gens.truncate(needed);
    let size = gens[0].dim();
    debug_assert_eq!(size, spinor_size(n));
    Ok(CliffordRep { n, size, mats: gens })
}

impl CliffordRep {
    /// Wraps caller-supplied matrices without checking the relations; use
    /// [`verify_clifford`] to inspect them.
    pub fn from_matrices(n: usize, mats: Vec<CMatrix>) -> Result<Self> {
        if n < 1 || mats.len() != n + 1 {
            return invalid(format!("expected {} matrices for n = {n}", n + 1));
        }
        let size = mats[0].dim();
        if let Some(bad) = mats.iter().find(|m| m.dim() != size) {
            return Err(Error::DimensionMismatch {
                expected: size,
                got: bad.dim(),
            });
        }
        Ok(Self { n, size, mats })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Spinor size `N`.
    pub fn size(&self) -> usize {
        self.size
    }

    /// `αⱼ` for `j` in `1..=n`.
    pub fn alpha(&self, j: usize) -> &CMatrix {
        assert!(j >= 1 && j <= self.n, "alpha index out of range");
        &self.mats[j - 1]
    }

    pub fn alphas(&self) -> &[CMatrix] {
        &self.mats[..self.n]
    }

    pub fn beta(&self) -> &CMatrix {
        &self.mats[self.n]
    }

    /// All `n + 1` generators, `β` last.
    pub fn matrices(&self) -> &[CMatrix] {
        &self.mats
    }

    /// `out = (α·p + m β) v` without allocating.
    #[inline]
    pub fn apply_dirac(&self, p: &[f64], mass: f64, v: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = ZERO);
        for (a, &pj) in self.alphas().iter().zip(p) {
            if pj != 0.0 {
                a.matvec_acc(C64::new(pj, 0.0), v, out);
            }
        }
        if mass != 0.0 {
            self.beta().matvec_acc(C64::new(mass, 0.0), v, out);
        }
    }

    /// Unit-norm eigenvector of `α·p` for eigenvalue `sign·|p|`.
    pub fn dirac_eigenvector(&self, p: &[f64], sign: f64) -> Vec<C64> {
        let sym = dirac_symbol(self, p, 0.0).expect("massless symbol");
        let pn = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        // projector (1 + sign·α·p/|p|)/2 applied to basis vectors; pick the largest image
        let mut best = vec![ZERO; self.size];
        let mut best_norm = -1.0;
        for k in 0..self.size {
            let mut e = vec![ZERO; self.size];
            e[k] = ONE;
            let mut img = sym.matvec(&e);
            for (i, v) in img.iter_mut().enumerate() {
                let scaled = if pn > 0.0 { *v * (sign / pn) } else { ZERO };
                *v = (e[i] + scaled) * 0.5;
            }
            let nrm = crate::linalg::norm_sq(&img);
            if nrm > best_norm + 1e-12 {
                best_norm = nrm;
                best = img;
            }
        }
        let s = best_norm.sqrt();
        best.iter().map(|v| v / s).collect()
    }
}

/// Maximum deviations of a candidate representation from the Clifford relations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CliffordReport {
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
    /// `(j, k, max |αⱼαₖ + αₖαⱼ − 2δⱼₖ I|)` with `j ≤ k`, 1-based, `n + 1` meaning `β`.
    pub anticommutators: Vec<(usize, usize, f64)>,
    /// `max |M − M*|` per generator.
    pub self_adjointness: Vec<f64>,
    pub max_deviation: f64,
    pub passed: bool,
}

pub fn verify_clifford(rep: &CliffordRep) -> CliffordReport {
    let mats = rep.matrices();
    let id = CMatrix::identity(rep.size());
    let mut anticommutators = Vec::new();
    for j in 0..mats.len() {
        for k in j..mats.len() {
            let ac = &(&mats[j] * &mats[k]) + &(&mats[k] * &mats[j]);
            let target = if j == k { id.scale_re(2.0) } else { CMatrix::zeros(rep.size()) };
            anticommutators.push((j + 1, k + 1, ac.max_abs_diff(&target)));
        }
    }
    let self_adjointness: Vec<f64> = mats.iter().map(|m| m.max_abs_diff(&m.adjoint())).collect();
    let max_deviation = anticommutators
        .iter()
        .map(|t| t.2)
        .chain(self_adjointness.iter().copied())
        .fold(0.0, f64::max);
    CliffordReport {
        n: rep.dim(),
        size: rep.size(),
        anticommutators,
        self_adjointness,
        max_deviation,
        passed: max_deviation == 0.0,
    }
}

/// `α·p + m β`.
pub fn dirac_symbol(rep: &CliffordRep, p: &[f64], mass: f64) -> Result<CMatrix> {
    if mass < 0.0 {
        return invalid("mass must be nonnegative");
    }
    if p.len() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            got: p.len(),
        });
    }
    let mut out = CMatrix::zeros(rep.size());
    for (a, &pj) in rep.alphas().iter().zip(p) {
        out = &out + &a.scale_re(pj);
    }
    if mass != 0.0 {
        out = &out + &rep.beta().scale_re(mass);
    }
    Ok(out)
}

/// JSON form: `{ "n": .., "N": .., "matrices": [[[[re, im], ..], ..], ..] }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CliffordJson {
    pub n: usize,
    #[serde(rename = "N")]
    pub size: usize,
    pub matrices: Vec<Vec<Vec<[f64; 2]>>>,
}

impl From<&CliffordRep> for CliffordJson {
    fn from(rep: &CliffordRep) -> Self {
        let d = rep.size();
        let matrices = rep
            .matrices()
            .iter()
            .map(|m| {
                (0..d)
                    .map(|r| (0..d).map(|c| [m.get(r, c).re, m.get(r, c).im]).collect())
                    .collect()
            })
            .collect();
        Self {
            n: rep.dim(),
            size: d,
            matrices,
        }
    }
}

impl TryFrom<CliffordJson> for CliffordRep {
    type Error = Error;
    fn try_from(j: CliffordJson) -> Result<Self> {
        let mats = j
            .matrices
            .iter()
            .map(|rows| {
                if rows.len() != j.size || rows.iter().any(|r| r.len() != j.size) {
                    return Err(Error::DimensionMismatch {
                        expected: j.size,
                        got: rows.len(),
                    });
                }
                let data = rows.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
                Ok(CMatrix::from_vec(j.size, data))
            })
            .collect::<Result<Vec<_>>>()?;
        CliffordRep::from_matrices(j.n, mats)
    }
}
