//! Small dense complex matrices for per-mode and per-site spinor algebra.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn scalar(dim: usize, s: C64) -> Self {
        Self::identity(dim).scale(s)
    }

    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "matrix must be square");
            data.extend_from_slice(r);
        }
        Self { dim, data }
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> Self {
        let (a, b) = (self.dim, other.dim);
        let d = a * b;
        let mut out = Self::zeros(d);
        for i in 0..a {
            for j in 0..a {
                let s = self.data[i * a + j];
                if s == ZERO {
                    continue;
                }
                for k in 0..b {
                    for l in 0..b {
                        out.data[(i * b + k) * d + (j * b + l)] = s * other.data[k * b + l];
                    }
                }
            }
        }
        out
    }

    /// `out = self · v`.
    #[inline]
    pub fn matvec_into(&self, v: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for r in 0..d {
            let row = &self.data[r * d..(r + 1) * d];
            out[r] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// `out += s · self · v`.
    #[inline]
    pub fn matvec_acc(&self, s: C64, v: &[C64], out: &mut [C64]) {
        let d = self.dim;
        for r in 0..d {
            let row = &self.data[r * d..(r + 1) * d];
            let acc: C64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            out[r] += s * acc;
        }
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim];
        self.matvec_into(v, &mut out);
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<C64>) -> Self {
        let d = m.nrows();
        let mut out = Self::zeros(d);
        for r in 0..d {
            for c in 0..d {
                out.data[r * d + c] = m[(r, c)];
            }
        }
        out
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(self.to_nalgebra());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// `exp(-i t self)` for Hermitian `self`, via eigendecomposition.
    pub fn hermitian_unitary_exp(&self, t: f64) -> CMatrix {
        let eig = nalgebra::SymmetricEigen::new(self.to_nalgebra());
        let u = &eig.eigenvectors;
        let d = self.dim;
        let mut out = DMatrix::<C64>::zeros(d, d);
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            let phase = C64::from_polar(1.0, -lam * t);
            let col = u.column(k);
            out += (col * col.adjoint()) * phase;
        }
        Self::from_nalgebra(&out)
    }

    /// Operator 2-norm (largest singular value).
    pub fn operator_norm(&self) -> f64 {
        let m = self.to_nalgebra();
        let g = m.adjoint() * &m;
        let eig = nalgebra::SymmetricEigen::new(g);
        eig.eigenvalues.iter().copied().fold(0.0, f64::max).max(0.0).sqrt()
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = CMatrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs.data[k * d + j];
                }
            }
        }
        out
    }
}

/// Hermitian inner product `Σ conj(a)·b` over raw slices.
#[inline]
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[inline]
pub fn norm_sq(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = CMatrix::identity(2);
        assert_eq!(i2.kron(&i2), CMatrix::identity(4));
    }

    #[test]
    fn unitary_exp_of_diagonal() {
        let mut m = CMatrix::zeros(2);
        m.set(0, 0, C64::new(1.0, 0.0));
        m.set(1, 1, C64::new(-2.0, 0.0));
        let u = m.hermitian_unitary_exp(0.3);
        assert!((u.get(0, 0) - C64::from_polar(1.0, -0.3)).norm() < 1e-14);
        assert!((u.get(1, 1) - C64::from_polar(1.0, 0.6)).norm() < 1e-14);
        assert!(u.get(0, 1).norm() < 1e-14);
    }
}
