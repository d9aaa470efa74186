//! Weighted resolvent norms `‖⟨Q⟩^s G₀(λ, μ) ⟨Q⟩^s‖` and scans over `(λ, μ)`.

use std::fmt::Write as _;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{resolvent_g, ResolventQuery, Sign};
use crate::clifford::CliffordRep;
use crate::error::{invalid, Result};
use crate::grid::{random_field, Grid, GridSpec, Space, SpinorField};
use crate::operators::{apply_weight, CutoffFunction};
use crate::power::{largest_singular_value, NormEstimate, NormMethod, PowerOptions};

/// Smallest `μ` a scan accepts without forcing: one momentum-lattice spacing.
pub fn mu_min(grid: &GridSpec) -> f64 {
    grid.dp()
}

/// 33 equispaced energies covering the lattice spectrum with a margin of 2.
pub fn default_lambdas(grid: &GridSpec) -> Vec<f64> {
    let edge = grid.max_momentum() + 2.0;
    (0..33).map(|i| -edge + 2.0 * edge * i as f64 / 32.0).collect()
}

/// `max ‖G₀(λ, μ)‖` over lattice modes: `1/√(d² + μ²)` with `d` the distance
/// from `λ` to the set `{±√(|p|² + m²)}`.
pub fn mode_wise_maximum(grid: &Grid, lambda: f64, mu: f64, mass: f64) -> f64 {
    let d = grid
        .abs_momenta()
        .iter()
        .map(|&r| {
            let e = (r * r + mass * mass).sqrt();
            (e - lambda).abs().min((e + lambda).abs())
        })
        .fold(f64::INFINITY, f64::min);
    1.0 / (d * d + mu * mu).sqrt()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScanOptions {
    #[serde(flatten)]
    pub power: PowerOptions,
    /// Exponent `s` of the weight `⟨x⟩^s` on both sides.
    pub weight_exponent: f64,
    pub sign: Sign,
    /// Accept `μ < μ_min`.
    pub force: bool,
    /// Evaluate rows on the rayon pool.
    pub parallel: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            power: PowerOptions::default(),
            weight_exponent: -1.0,
            sign: Sign::Plus,
            force: false,
            parallel: true,
        }
    }
}

/// Norm of `⟨Q⟩^s G₀^±(λ, μ) ⟨Q⟩^s` estimated on `S*S`.
pub fn weighted_resolvent_norm(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    grid: &Grid,
    lambda: f64,
    mu: f64,
    weight: f64,
    sign: Sign,
    opts: &PowerOptions,
) -> Result<NormEstimate> {
    let q = ResolventQuery::new(lambda, mu, 0.0, sign)?;
    let qa = q.adjoint();
    let sandwich = |q: ResolventQuery| {
        move |f: &SpinorField| -> SpinorField {
            let w = apply_weight(f, weight).expect("position space");
            let g = resolvent_g(rep, cutoff, &q, &w).expect("validated query");
            apply_weight(&g, weight).expect("position space")
        }
    };
    let start = random_field(grid, rep.size(), opts.seed);
    debug_assert_eq!(start.space(), Space::Position);
    Ok(largest_singular_value(sandwich(q), sandwich(qa), start, opts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LapScanRow {
    pub lambda: f64,
    pub mu: f64,
    pub weighted_norm: f64,
    pub unweighted_norm: f64,
    /// Closed-form value of the unweighted norm.
    pub mode_maximum: f64,
    pub iters: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LapScanMeta {
    pub grid: GridSpec,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub method: NormMethod,
    pub sign: Sign,
    pub weight_exponent: f64,
    pub mu_min: f64,
}

/// Per-`μ` extremes of the table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MuSummary {
    pub mu: f64,
    pub sup_weighted: f64,
    pub min_weighted: f64,
    /// `sup/min` of the weighted norm over `λ`.
    pub lambda_ratio: f64,
    /// Largest unweighted norm over `λ` inside the lattice spectrum.
    pub sup_unweighted_in_spectrum: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LapScanSummary {
    pub sup_weighted: f64,
    pub per_mu: Vec<MuSummary>,
    /// Least-squares slope of `ln sup_weighted` against `ln(1/μ)`.
    pub weighted_exponent: Option<f64>,
    /// Same for the in-spectrum unweighted supremum.
    pub unweighted_exponent: Option<f64>,
    /// Largest relative gap between the estimated unweighted norm and the mode maximum.
    pub max_mode_deviation: f64,
    pub all_converged: bool,
    pub weighted_below_unweighted: bool,
    /// The weighted norm grows more slowly in `1/μ` than the unweighted one.
    pub weighted_growth_slower: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LapScanResult {
    pub meta: LapScanMeta,
    pub rows: Vec<LapScanRow>,
    pub summary: LapScanSummary,
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Full table over `lambdas × mus`, row order `μ` outer, `λ` inner.
pub fn lap_scan(
    rep: &CliffordRep,
    cutoff: &CutoffFunction,
    grid: &Grid,
    lambdas: &[f64],
    mus: &[f64],
    opts: &ScanOptions,
) -> Result<LapScanResult> {
    if lambdas.is_empty() || mus.is_empty() {
        return invalid("scan needs at least one lambda and one mu");
    }
    let floor = mu_min(&grid.spec());
    for &mu in mus {
        if !(mu > 0.0) {
            return invalid(format!("mu must be positive, got {mu}"));
        }
        if mu < floor {
            if opts.force {
                warn!("mu = {mu} is below the lattice spacing {floor:.4}; forced");
            } else {
                return invalid(format!("mu = {mu} is below mu_min = {floor:.6}"));
            }
        }
    }
    let cells: Vec<(f64, f64)> = mus.iter().flat_map(|&mu| lambdas.iter().map(move |&l| (l, mu))).collect();
    let row = |&(lambda, mu): &(f64, f64)| -> Result<LapScanRow> {
        let w = weighted_resolvent_norm(rep, cutoff, grid, lambda, mu, opts.weight_exponent, opts.sign, &opts.power)?;
        let u = weighted_resolvent_norm(rep, cutoff, grid, lambda, mu, 0.0, opts.sign, &opts.power)?;
        debug!("lambda={lambda} mu={mu} weighted={} unweighted={}", w.value, u.value);
        Ok(LapScanRow {
            lambda,
            mu,
            weighted_norm: w.value,
            unweighted_norm: u.value,
            mode_maximum: mode_wise_maximum(grid, lambda, mu, 0.0),
            iters: w.iterations,
            converged: w.converged && u.converged,
        })
    };
    let rows: Vec<LapScanRow> = if opts.parallel {
        cells.par_iter().map(row).collect::<Result<_>>()?
    } else {
        cells.iter().map(row).collect::<Result<_>>()?
    };
    let summary = summarize(&rows, mus, grid.spec().max_momentum());
    Ok(LapScanResult {
        meta: LapScanMeta {
            grid: grid.spec(),
            seed: opts.power.seed,
            tol: opts.power.tol,
            max_iter: opts.power.max_iter,
            method: opts.power.method,
            sign: opts.sign,
            weight_exponent: opts.weight_exponent,
            mu_min: floor,
        },
        rows,
        summary,
    })
}

fn summarize(rows: &[LapScanRow], mus: &[f64], spectrum_edge: f64) -> LapScanSummary {
    let per_mu: Vec<MuSummary> = mus
        .iter()
        .map(|&mu| {
            let sel: Vec<&LapScanRow> = rows.iter().filter(|r| r.mu == mu).collect();
            let sup = sel.iter().map(|r| r.weighted_norm).fold(0.0, f64::max);
            let min = sel.iter().map(|r| r.weighted_norm).fold(f64::INFINITY, f64::min);
            let sup_u = sel
                .iter()
                .filter(|r| r.lambda.abs() <= spectrum_edge)
                .map(|r| r.unweighted_norm)
                .fold(0.0, f64::max);
            MuSummary {
                mu,
                sup_weighted: sup,
                min_weighted: min,
                lambda_ratio: sup / min,
                sup_unweighted_in_spectrum: sup_u,
            }
        })
        .collect();
    let fit = |f: &dyn Fn(&MuSummary) -> f64| {
        let pts: Vec<(f64, f64)> = per_mu
            .iter()
            .filter(|s| f(s) > 0.0)
            .map(|s| ((1.0 / s.mu).ln(), f(s).ln()))
            .collect();
        slope(&pts)
    };
    let weighted_exponent = fit(&|s| s.sup_weighted);
    let unweighted_exponent = fit(&|s| s.sup_unweighted_in_spectrum);
    LapScanSummary {
        sup_weighted: rows.iter().map(|r| r.weighted_norm).fold(0.0, f64::max),
        weighted_growth_slower: weighted_exponent.zip(unweighted_exponent).map(|(w, u)| w < u),
        per_mu,
        weighted_exponent,
        unweighted_exponent,
        max_mode_deviation: rows
            .iter()
            .map(|r| (r.unweighted_norm - r.mode_maximum).abs() / r.mode_maximum)
            .fold(0.0, f64::max),
        all_converged: rows.iter().all(|r| r.converged),
        weighted_below_unweighted: rows.iter().all(|r| r.weighted_norm <= r.unweighted_norm * (1.0 + 1e-9)),
    }
}

impl LapScanResult {
    /// CSV with header `lambda,mu,weighted_norm,unweighted_norm,iters,converged`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda,mu,weighted_norm,unweighted_norm,iters,converged\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:.12e},{:.12e},{},{}",
                r.lambda, r.mu, r.weighted_norm, r.unweighted_norm, r.iters, r.converged
            );
        }
        s
    }
}
