//! First-order operators `L = −i Σ Fⱼ ∂ⱼ − i Σ ∂ⱼ Fⱼ*` with matrix-valued
//! coefficients, and their commutators with the regularizer `R_m`.

use super::{map_modes, MultiplierSymbol};
use crate::clifford::CliffordRep;
use crate::error::{invalid, Error, Result};
use crate::grid::{random_field, Grid, Space, SpinorField};
use crate::linalg::{CMatrix, C64, ONE};
use crate::power::{largest_singular_value, NormEstimate, PowerOptions};

/// An `N×N`-matrix-valued function on the position lattice, stored site-major.
#[derive(Debug, Clone)]
pub struct MatrixField {
    grid: Grid,
    size: usize,
    data: Vec<C64>,
}

impl MatrixField {
    pub fn from_fn<F>(grid: &Grid, size: usize, mut f: F) -> Self
    where
        F: FnMut(&[f64]) -> CMatrix,
    {
        let mut data = Vec::with_capacity(grid.sites() * size * size);
        for s in 0..grid.sites() {
            let m = f(grid.position(s));
            assert_eq!(m.dim(), size, "coefficient matrix size");
            data.extend_from_slice(m.as_slice());
        }
        Self {
            grid: grid.clone(),
            size,
            data,
        }
    }

    pub fn constant(grid: &Grid, m: &CMatrix) -> Self {
        Self::from_fn(grid, m.dim(), |_| m.clone())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn at(&self, s: usize) -> CMatrix {
        let k = self.size * self.size;
        CMatrix::from_vec(self.size, self.data[s * k..(s + 1) * k].to_vec())
    }

    /// Largest entry magnitude over all sites.
    pub fn max_entry(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> Self {
        let mut out = self.clone();
        let k = self.size * self.size;
        for s in 0..self.grid.sites() {
            let a = self.at(s).adjoint();
            out.data[s * k..(s + 1) * k].copy_from_slice(a.as_slice());
        }
        out
    }

    /// Entrywise spectral `−i∂ₖ`, the lattice form of `[Pₖ, F]`.
    pub fn commutator_with_momentum(&self, k: usize) -> Self {
        let entries = SpinorField::from_values(
            &self.grid,
            self.size * self.size,
            Space::Position,
            self.data.clone(),
        )
        .expect("matching length");
        let d = map_modes(&entries, |_, p, v, out| {
            out.iter_mut().zip(v).for_each(|(o, x)| *o = x * p[k]);
        });
        Self {
            grid: self.grid.clone(),
            size: self.size,
            data: d.into_values(),
        }
    }

    /// Pointwise `F(x) f(x)` on a position-space field.
    fn multiply(&self, f: &SpinorField) -> SpinorField {
        let mut out = SpinorField::zeros(f.grid(), f.ncomp(), Space::Position);
        let k = self.size * self.size;
        for s in 0..self.grid.sites() {
            let m = CMatrix::from_vec(self.size, self.data[s * k..(s + 1) * k].to_vec());
            m.matvec_into(f.site(s), out.site_mut(s));
        }
        out
    }
}

/// The assembled operator together with its commutator coefficients `dₖ(Fⱼ)`.
#[derive(Debug, Clone)]
pub struct FirstOrderOperator {
    grid: Grid,
    size: usize,
    coeffs: Vec<MatrixField>,
    adjoints: Vec<MatrixField>,
    /// `derivs[j][k] = −i∂ₖFⱼ`.
    derivs: Vec<Vec<MatrixField>>,
}

/// Validates the coefficient family and precomputes adjoints and derivatives.
pub fn build_first_order(coeffs: Vec<MatrixField>) -> Result<FirstOrderOperator> {
    let first = coeffs
        .first()
        .ok_or_else(|| Error::InvalidArgument("no coefficient fields".into()))?;
    let grid = first.grid().clone();
    let size = first.size();
    if coeffs.len() != grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: grid.dim(),
            got: coeffs.len(),
        });
    }
    for c in &coeffs {
        if c.grid() != &grid {
            return Err(Error::GridMismatch);
        }
        if c.size() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                got: c.size(),
            });
        }
        if !c.max_entry().is_finite() {
            return invalid("coefficient field is not bounded");
        }
    }
    let derivs: Vec<Vec<MatrixField>> = coeffs
        .iter()
        .map(|c| (0..grid.dim()).map(|k| c.commutator_with_momentum(k)).collect())
        .collect();
    if derivs.iter().flatten().any(|d| !d.max_entry().is_finite()) {
        return invalid("coefficient derivative is not bounded");
    }
    let adjoints = coeffs.iter().map(MatrixField::adjoint).collect();
    Ok(FirstOrderOperator {
        grid,
        size,
        coeffs,
        adjoints,
        derivs,
    })
}

/// Smooth periodic coefficients `Fⱼ` built from the Clifford matrices. The
/// Fourier content is a few low lattice modes, so spectral derivatives are exact.
pub fn periodic_coefficients(grid: &Grid, rep: &CliffordRep) -> Vec<MatrixField> {
    let n = grid.dim();
    let kappa = 2.0 * std::f64::consts::PI / grid.length();
    (0..n)
        .map(|j| {
            MatrixField::from_fn(grid, rep.size(), |x| {
                let a = (kappa * x[j]).cos();
                let b = (kappa * x[(j + 1) % n] + 0.3 * j as f64).sin();
                let mut m = rep.alpha(j + 1).scale_re(1.0 + 0.5 * a);
                m = &m + &rep.beta().scale_re(0.4 * b);
                // A non-Hermitian part exercises the Fⱼ* term of L.
                &m + &CMatrix::identity(rep.size()).scale(C64::new(0.0, 0.3 * a * b))
            })
        })
        .collect()
}

impl FirstOrderOperator {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn coefficients(&self) -> &[MatrixField] {
        &self.coeffs
    }

    /// `−i∂ₖFⱼ`, zero-based indices.
    pub fn commutator_coefficient(&self, j: usize, k: usize) -> &MatrixField {
        &self.derivs[j][k]
    }

    /// Largest entry of any `dₖ(Fⱼ)`.
    pub fn derivative_bound(&self) -> f64 {
        self.derivs.iter().flatten().map(MatrixField::max_entry).fold(0.0, f64::max)
    }

    fn check(&self, f: &SpinorField) -> Result<()> {
        if f.grid() != &self.grid {
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

    /// `L f`, returned in the input's representation.
    pub fn apply(&self, f: &SpinorField) -> Result<SpinorField> {
        self.check(f)?;
        let space = f.space();
        let pos = f.to_space(Space::Position);
        let mom = f.to_space(Space::Momentum);
        let mut acc = SpinorField::zeros(&self.grid, self.size, Space::Position);
        for j in 0..self.grid.dim() {
            let dj = derivative(&mom, j).into_position();
            acc.axpy(ONE, &self.coeffs[j].multiply(&dj));
            let gf = self.adjoints[j].multiply(&pos);
            acc.axpy(ONE, &derivative(&gf, j).into_position());
        }
        acc.scale_mut(C64::new(0.0, -1.0));
        Ok(acc.into_space(space))
    }

    /// `X_m f = (L R_m − R_m L) f`.
    pub fn commutator_xm(&self, m: f64, f: &SpinorField) -> Result<SpinorField> {
        if m < 1.0 {
            return invalid(format!("regularization index must be at least 1, got {m}"));
        }
        let r = MultiplierSymbol::regularizer(m);
        let lr = self.apply(&super::apply_multiplier(&r, f)?)?;
        let rl = super::apply_multiplier(&r, &self.apply(f)?)?;
        Ok(lr.sub(&rl))
    }

    /// Largest singular value of `X_m`, using `X_m* = −X_m`.
    pub fn xm_norm(&self, m: f64, opts: &PowerOptions) -> Result<NormEstimate> {
        self.commutator_xm(m, &SpinorField::zeros(&self.grid, self.size, Space::Position))?;
        let start = random_field(&self.grid, self.size, opts.seed);
        let apply = |f: &SpinorField| self.commutator_xm(m, f).expect("validated");
        let adjoint = |f: &SpinorField| {
            let mut x = self.commutator_xm(m, f).expect("validated");
            x.scale_mut(C64::new(-1.0, 0.0));
            x
        };
        Ok(largest_singular_value(apply, adjoint, start, opts))
    }

    /// `|⟨Lφ, ψ⟩ − ⟨φ, Lψ⟩|`.
    pub fn symmetry_defect(&self, phi: &SpinorField, psi: &SpinorField) -> Result<f64> {
        Ok((self.apply(phi)?.inner(psi) - phi.inner(&self.apply(psi)?)).norm())
    }

    /// `|⟨φ, X_m ψ⟩ + conj⟨ψ, X_m φ⟩|`.
    pub fn antisymmetry_defect(&self, m: f64, phi: &SpinorField, psi: &SpinorField) -> Result<f64> {
        let a = phi.inner(&self.commutator_xm(m, psi)?);
        let b = psi.inner(&self.commutator_xm(m, phi)?);
        Ok((a + b.conj()).norm())
    }
}

/// Spectral `∂ⱼ` in momentum space (output in momentum space).
fn derivative(f: &SpinorField, j: usize) -> SpinorField {
    map_modes(f, |_, p, v, out| {
        let s = C64::new(0.0, p[j]);
        out.iter_mut().zip(v).for_each(|(o, x)| *o = s * x);
    })
    .into_space(Space::Momentum)
}

/// Convenience wrapper: `L f` for an assembled operator.
pub fn apply_l(op: &FirstOrderOperator, f: &SpinorField) -> Result<SpinorField> {
    op.apply(f)
}
