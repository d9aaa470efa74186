//! Fourier multipliers: symbols evaluated on the momentum lattice.

use std::fmt;
use std::sync::Arc;

use crate::clifford::CliffordRep;
use crate::linalg::{CMatrix, C64};
use crate::operators::CutoffFunction;

/// Value of a symbol at one momentum.
#[derive(Debug, Clone, PartialEq)]
pub enum SymbolValue {
    Scalar(C64),
    Matrix(CMatrix),
}

impl SymbolValue {
    pub fn is_finite(&self) -> bool {
        match self {
            SymbolValue::Scalar(s) => s.is_finite(),
            SymbolValue::Matrix(m) => m.as_slice().iter().all(|v| v.is_finite()),
        }
    }

    /// `out = value · v`.
    pub fn apply(&self, v: &[C64], out: &mut [C64]) {
        match self {
            SymbolValue::Scalar(s) => out.iter_mut().zip(v).for_each(|(o, x)| *o = s * x),
            SymbolValue::Matrix(m) => m.matvec_into(v, out),
        }
    }

    pub fn to_matrix(&self, dim: usize) -> CMatrix {
        match self {
            SymbolValue::Scalar(s) => CMatrix::scalar(dim, *s),
            SymbolValue::Matrix(m) => m.clone(),
        }
    }
}

/// How the symbol is treated at `p = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroMode {
    /// The rule is evaluated at `p = 0` like anywhere else.
    Regular,
    /// The value at `p = 0` is defined to be 0 (singular symbols such as `|p|^{-2}`).
    Zero,
}

type Rule = dyn Fn(&[f64]) -> SymbolValue + Send + Sync;

/// A map `p ↦ N×N` matrix (or scalar multiple of the identity).
#[derive(Clone)]
pub struct MultiplierSymbol {
    name: String,
    rule: Arc<Rule>,
    zero_mode: ZeroMode,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("name", &self.name)
            .field("zero_mode", &self.zero_mode)
            .finish()
    }
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl MultiplierSymbol {
    pub fn new<F>(name: impl Into<String>, zero_mode: ZeroMode, rule: F) -> Self
    where
        F: Fn(&[f64]) -> SymbolValue + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            rule: Arc::new(rule),
            zero_mode,
        }
    }

    pub fn scalar<F>(name: impl Into<String>, zero_mode: ZeroMode, rule: F) -> Self
    where
        F: Fn(&[f64]) -> C64 + Send + Sync + 'static,
    {
        Self::new(name, zero_mode, move |p| SymbolValue::Scalar(rule(p)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn zero_mode(&self) -> ZeroMode {
        self.zero_mode
    }

    pub fn eval(&self, p: &[f64]) -> SymbolValue {
        if self.zero_mode == ZeroMode::Zero && p.iter().all(|&x| x == 0.0) {
            return SymbolValue::Scalar(C64::new(0.0, 0.0));
        }
        (self.rule)(p)
    }

    pub fn identity() -> Self {
        Self::scalar("I", ZeroMode::Regular, |_| C64::new(1.0, 0.0))
    }

    /// `α·p + m β`.
    pub fn dirac(rep: &CliffordRep, mass: f64) -> Self {
        let rep = rep.clone();
        Self::new("H0", ZeroMode::Regular, move |p| {
            SymbolValue::Matrix(crate::clifford::dirac_symbol(&rep, p, mass).expect("valid mass"))
        })
    }

    /// `B̂ = h(|p|)`.
    pub fn cutoff(cutoff: CutoffFunction) -> Self {
        Self::scalar("B", ZeroMode::Regular, move |p| C64::new(cutoff.eta(p), 0.0))
    }

    /// `h(|p|)^{1/2}`.
    pub fn cutoff_sqrt(cutoff: CutoffFunction) -> Self {
        Self::scalar("Bsqrt", ZeroMode::Regular, move |p| C64::new(cutoff.eta(p).sqrt(), 0.0))
    }

    /// `R̂_m = (1 + |p|²/m)^{-1}`.
    pub fn regularizer(m: f64) -> Self {
        Self::scalar("Rm", ZeroMode::Regular, move |p| {
            C64::new(1.0 / (1.0 + p.iter().map(|x| x * x).sum::<f64>() / m), 0.0)
        })
    }

    /// `K̂ = −(α·p) |p|^{-1} h'(|p|)`, zero at `p = 0`.
    pub fn commutator_k(rep: &CliffordRep, cutoff: CutoffFunction) -> Self {
        let rep = rep.clone();
        Self::new("K", ZeroMode::Zero, move |p| {
            let r = norm(p);
            let s = -cutoff.dh(r) / r;
            SymbolValue::Matrix(crate::clifford::dirac_symbol(&rep, p, 0.0).unwrap().scale_re(s))
        })
    }

    /// `|p|^{-2}`, zero at `p = 0`.
    pub fn inverse_laplacian() -> Self {
        Self::scalar("invLap", ZeroMode::Zero, |p| {
            C64::new(1.0 / p.iter().map(|x| x * x).sum::<f64>(), 0.0)
        })
    }

    /// `p_j` (the symbol of `−i∂_j`), `j` zero-based.
    pub fn momentum_component(j: usize) -> Self {
        Self::scalar(format!("P{}", j + 1), ZeroMode::Regular, move |p| C64::new(p[j], 0.0))
    }

    /// `i p_j` (the symbol of `∂_j`), `j` zero-based.
    pub fn derivative(j: usize) -> Self {
        Self::scalar(format!("D{}", j + 1), ZeroMode::Regular, move |p| C64::new(0.0, p[j]))
    }

    /// Composition `self · other` (pointwise product of symbols).
    pub fn then_left(&self, left: &MultiplierSymbol, dim: usize) -> Self {
        let (a, b) = (left.clone(), self.clone());
        let zero_mode = if a.zero_mode == ZeroMode::Zero || b.zero_mode == ZeroMode::Zero {
            ZeroMode::Zero
        } else {
            ZeroMode::Regular
        };
        Self::new(format!("{}*{}", a.name, b.name), zero_mode, move |p| {
            match (a.eval(p), b.eval(p)) {
                (SymbolValue::Scalar(x), SymbolValue::Scalar(y)) => SymbolValue::Scalar(x * y),
                (x, y) => SymbolValue::Matrix(&x.to_matrix(dim) * &y.to_matrix(dim)),
            }
        })
    }
}
