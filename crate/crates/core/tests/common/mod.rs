//! Dense reference matrices assembled from first principles on small lattices.
//!
//! Nothing here goes through the library's transforms or symbols: the Fourier
//! matrix is built from `exp(-i p·x)` over the lattice coordinates, the cutoff
//! is re-derived from its definition, and resolvents are plain matrix inverses.

#![allow(dead_code)]

use diraclap::clifford::CliffordRep;
use diraclap::grid::{Grid, Space, SpinorField};
use diraclap::linalg::C64;
use diraclap::operators::{parse_op, OpContext};
use nalgebra::DMatrix;

pub type Dense = DMatrix<C64>;

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// Radial cutoff: identity below ½, one above 1, smooth blend between.
pub fn cutoff_h(r: f64) -> f64 {
    if r < 0.5 {
        r
    } else if r < 1.0 {
        let z = smooth_step(2.0 * r - 1.0);
        (1.0 - z) * r + z
    } else {
        1.0
    }
}

pub struct DenseOracle {
    pub grid: Grid,
    pub rep: CliffordRep,
    fourier: Dense,
    inverse: Dense,
}

impl DenseOracle {
    pub fn new(grid: &Grid, rep: &CliffordRep) -> Self {
        let s = grid.sites();
        let fourier = Dense::from_fn(s, s, |k, x| {
            let phase: f64 = grid.momentum(k).iter().zip(grid.position(x)).map(|(p, y)| p * y).sum();
            C64::from_polar(1.0, -phase)
        });
        let inverse = fourier.adjoint() / C64::new(s as f64, 0.0);
        Self {
            grid: grid.clone(),
            rep: rep.clone(),
            fourier,
            inverse,
        }
    }

    fn size(&self) -> usize {
        self.grid.sites() * self.rep.size()
    }

    fn dirac(&self, p: &[f64]) -> Dense {
        let n = self.rep.size();
        let mut d = Dense::zeros(n, n);
        for (a, pj) in self.rep.alphas().iter().zip(p) {
            d += Dense::from_fn(n, n, |r, c| a.get(r, c)) * C64::new(*pj, 0.0);
        }
        d
    }

    /// `F⁻¹ diag(σ(p)) F` with spinor blocks.
    pub fn multiplier<F: Fn(&[f64]) -> Dense>(&self, symbol: F) -> Dense {
        let s = self.grid.sites();
        let n = self.rep.size();
        let blocks: Vec<Dense> = (0..s).map(|k| symbol(self.grid.momentum(k))).collect();
        let mut out = Dense::zeros(s * n, s * n);
        for x in 0..s {
            for y in 0..s {
                for (k, b) in blocks.iter().enumerate() {
                    let w = self.inverse[(x, k)] * self.fourier[(k, y)];
                    for r in 0..n {
                        for c in 0..n {
                            out[(x * n + r, y * n + c)] += w * b[(r, c)];
                        }
                    }
                }
            }
        }
        out
    }

    pub fn position_multiplier<F: Fn(&[f64]) -> f64>(&self, f: F) -> Dense {
        let n = self.rep.size();
        Dense::from_diagonal(&nalgebra::DVector::from_fn(self.size(), |i, _| {
            C64::new(f(self.grid.position(i / n)), 0.0)
        }))
    }

    pub fn h0(&self) -> Dense {
        self.multiplier(|p| self.dirac(p))
    }

    pub fn cutoff(&self) -> Dense {
        let n = self.rep.size();
        self.multiplier(|p| Dense::identity(n, n) * C64::new(cutoff_h(norm(p)), 0.0))
    }

    /// The conjugate operator, symmetrized from `(α·p) h(|p|) |p|^{-2}`, momentum and position.
    pub fn conjugate(&self) -> Dense {
        let n = self.rep.size();
        let core = self.multiplier(|p| {
            let r = norm(p);
            if r == 0.0 {
                Dense::zeros(n, n)
            } else {
                self.dirac(p) * C64::new(cutoff_h(r) / (r * r), 0.0)
            }
        });
        let mut sum_pq = Dense::zeros(self.size(), self.size());
        let mut sum_qp = Dense::zeros(self.size(), self.size());
        for j in 0..self.grid.dim() {
            let pj = self.multiplier(|p| Dense::identity(n, n) * C64::new(p[j], 0.0));
            let qj = self.position_multiplier(|x| x[j]);
            sum_pq += &pj * &qj;
            sum_qp += &qj * &pj;
        }
        (&core * sum_pq + sum_qp * &core) * C64::new(-0.5, 0.0)
    }

    /// `(α·p − λ ∓ i(μ + ε h(|p|)))^{-1}` by blockwise matrix inversion.
    pub fn resolvent(&self, lambda: f64, mu: f64, eps: f64, sign: f64) -> Dense {
        let n = self.rep.size();
        self.multiplier(|p| {
            let w = C64::new(lambda, sign * (mu + eps * cutoff_h(norm(p))));
            (self.dirac(p) - Dense::identity(n, n) * w)
                .try_inverse()
                .expect("off-axis resolvent is invertible")
        })
    }

    pub fn inverse_weight(&self) -> Dense {
        self.position_multiplier(|x| 1.0 / (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt())
    }

    /// Column-by-column realization of a library operator expression.
    pub fn library(&self, expr: &str, vars: &[(&str, f64)]) -> Dense {
        let op = parse_op(expr).expect("valid expression");
        let ctx = vars
            .iter()
            .fold(OpContext::new(&self.rep), |c, (k, v)| c.with_var(k, *v));
        let d = self.size();
        let mut out = Dense::zeros(d, d);
        for col in 0..d {
            let mut e = vec![C64::new(0.0, 0.0); d];
            e[col] = C64::new(1.0, 0.0);
            let f = SpinorField::from_values(&self.grid, self.rep.size(), Space::Position, e).unwrap();
            let g = op.apply(&ctx, &f).unwrap().into_space(Space::Position);
            for (row, v) in g.values().iter().enumerate() {
                out[(row, col)] = *v;
            }
        }
        out
    }
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_entry_diff(a: &Dense, b: &Dense) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise gap between the library and the oracle over every operator.
pub fn oracle_deviations(oracle: &DenseOracle, lambda: f64, mu: f64) -> Vec<(String, f64)> {
    let vars = [("l", lambda), ("mu", mu)];
    let w = oracle.inverse_weight();
    let gp = oracle.resolvent(lambda, mu, 0.0, 1.0);
    let gm = oracle.resolvent(lambda, mu, 0.0, -1.0);
    let sandwich = &w * &gp * &w;
    vec![
        ("H0".into(), max_entry_diff(&oracle.library("H0", &vars), &oracle.h0())),
        ("B".into(), max_entry_diff(&oracle.library("B", &vars), &oracle.cutoff())),
        ("A".into(), max_entry_diff(&oracle.library("A", &vars), &oracle.conjugate())),
        ("G+".into(), max_entry_diff(&oracle.library("G(l,mu)", &vars), &gp)),
        ("G-".into(), max_entry_diff(&oracle.library("Gm(l,mu)", &vars), &gm)),
        (
            "W G W".into(),
            max_entry_diff(&oracle.library("W(-1)*G(l,mu)*W(-1)", &vars), &sandwich),
        ),
    ]
}
