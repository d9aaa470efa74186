//! Restarted GMRES over spinor fields.

use serde::{Deserialize, Serialize};

use crate::grid::SpinorField;
use crate::linalg::{C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmresOptions {
    /// Relative residual target `‖b − Ax‖ / ‖b‖`.
    pub tol: f64,
    pub restart: usize,
    pub max_iter: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            restart: 60,
            max_iter: 600,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: SpinorField,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves `A x = b` from `x = 0`. The residual is recomputed explicitly at each restart.
pub fn gmres<F>(apply: F, b: &SpinorField, opts: &GmresOptions) -> GmresOutcome
where
    F: Fn(&SpinorField) -> SpinorField,
{
    let bnorm = b.norm();
    let mut x = b.scaled(ZERO);
    if bnorm == 0.0 {
        return GmresOutcome {
            solution: x,
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        };
    }
    let m = opts.restart.max(1);
    let mut iterations = 0;
    let mut r = b.clone();
    loop {
        let beta = r.norm();
        let rel = beta / bnorm;
        if rel <= opts.tol || iterations >= opts.max_iter {
            return GmresOutcome {
                solution: x,
                iterations,
                relative_residual: rel,
                converged: rel <= opts.tol,
            };
        }
        let mut basis = vec![r.scaled(C64::new(1.0 / beta, 0.0))];
        // Hessenberg columns after Givens rotation, and the rotated right side
        let mut h: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut rotations: Vec<(C64, C64)> = Vec::with_capacity(m);
        let mut g = vec![C64::new(beta, 0.0)];
        for k in 0..m {
            iterations += 1;
            let mut w = apply(&basis[k]);
            let mut col = Vec::with_capacity(k + 2);
            for v in &basis {
                let hij = v.inner(&w);
                w.axpy(-hij, v);
                col.push(hij);
            }
            let hnext = w.norm();
            col.push(C64::new(hnext, 0.0));
            for (i, &(c, s)) in rotations.iter().enumerate() {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = c.conj() * a + s.conj() * bb;
                col[i + 1] = -s * a + c * bb;
            }
            let (a, bb) = (col[k], col[k + 1]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if denom == 0.0 {
                (C64::new(1.0, 0.0), ZERO)
            } else {
                (a / denom, bb / denom)
            };
            col[k] = C64::new(denom, 0.0);
            col[k + 1] = ZERO;
            rotations.push((c, s));
            let gk = g[k];
            g[k] = c.conj() * gk;
            g.push(-s * gk);
            h.push(col);
            let estimate = g[k + 1].norm() / bnorm;
            if estimate <= opts.tol || hnext == 0.0 || iterations >= opts.max_iter || k + 1 == m {
                break;
            }
            basis.push(w.scaled(C64::new(1.0 / hnext, 0.0)));
        }
        let dim = h.len();
        let mut y = vec![ZERO; dim];
        for i in (0..dim).rev() {
            let mut acc = g[i];
            for j in i + 1..dim {
                acc -= h[j][i] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (yi, v) in y.iter().zip(&basis) {
            x.axpy(*yi, v);
        }
        r = b.sub(&apply(&x));
    }
}
