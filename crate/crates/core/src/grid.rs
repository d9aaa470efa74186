//! Periodic lattices, the unitary discrete Fourier transform, and spinor fields.
//!
//! Position sites are `x = (L/M)(j − M/2)` per axis and momentum sites are
//! `p = (2π/L)(k − M/2)`, both stored centered with axis 0 slowest. The
//! transform approximates the continuum `(2π)^{-n/2} ∫ f(x) e^{-ipx} dx`, and
//! norms carry the cell volumes `(L/M)^n` and `(2π/L)^n`, so the transform is
//! unitary and grid norms approximate `L²(ℝⁿ)` norms.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::clifford::CliffordRep;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, C64, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Position,
    Momentum,
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Position => f.write_str("position"),
            Space::Momentum => f.write_str("momentum"),
        }
    }
}

/// Lattice parameters: dimension `n`, `M` points per axis, side length `L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "M")]
    pub points: usize,
    #[serde(rename = "L")]
    pub length: f64,
}

impl GridSpec {
    pub fn new(n: usize, points: usize, length: f64) -> Result<Self> {
        let spec = Self { n, points, length };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return invalid("grid dimension must be at least 1");
        }
        if self.points < 2 || self.points % 2 != 0 {
            return invalid(format!("points per axis must be even and >= 2, got {}", self.points));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return invalid("box length must be positive");
        }
        Ok(())
    }

    /// Desk-scale default for dimension `n` (n = 2: M = 64, L = 32; n = 3: M = 32, L = 16).
    pub fn default_for(n: usize) -> Self {
        match n {
            1 => Self { n, points: 256, length: 64.0 },
            2 => Self { n, points: 64, length: 32.0 },
            _ => Self { n, points: 32, length: 16.0 },
        }
    }

    pub fn sites(&self) -> usize {
        self.points.pow(self.n as u32)
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Radius of the largest ball inside the momentum lattice, `πM/L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / self.length
    }

    /// Largest `|p|` over the lattice (the corner mode `−M/2` on every axis).
    pub fn max_momentum(&self) -> f64 {
        self.nyquist() * (self.n as f64).sqrt()
    }

    pub fn cell_volume(&self, space: Space) -> f64 {
        match space {
            Space::Position => self.dx().powi(self.n as i32),
            Space::Momentum => self.dp().powi(self.n as i32),
        }
    }
}

struct GridInner {
    spec: GridSpec,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    positions: Vec<f64>,
    momenta: Vec<f64>,
    abs_p: Vec<f64>,
    japanese_x: Vec<f64>,
    // (−1)^{Σ j_a} and (−1)^{Σ (k_a − M/2)} folded with the transform normalizations
    x_phase: Vec<f64>,
    p_phase: Vec<f64>,
    zero_site: usize,
}

/// Shared handle to a lattice with cached FFT plans and coordinates.
#[derive(Clone)]
pub struct Grid(Arc<GridInner>);

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Grid").field(&self.0.spec).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.spec == other.0.spec
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let (n, m) = (spec.n, spec.points);
        let sites = spec.sites();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let (dx, dp) = (spec.dx(), spec.dp());
        let half = (m / 2) as i64;
        let mut positions = Vec::with_capacity(sites * n);
        let mut momenta = Vec::with_capacity(sites * n);
        let mut abs_p = Vec::with_capacity(sites);
        let mut japanese_x = Vec::with_capacity(sites);
        let mut x_phase = Vec::with_capacity(sites);
        let mut p_phase = Vec::with_capacity(sites);
        let norm = (2.0 * PI).powf(-(n as f64) / 2.0);
        let fwd_scale = norm * spec.cell_volume(Space::Position);
        let inv_scale = norm * spec.cell_volume(Space::Momentum);
        let mut idx = vec![0usize; n];
        let mut zero_site = 0;
        for s in 0..sites {
            let mut r = s;
            for a in (0..n).rev() {
                idx[a] = r % m;
                r /= m;
            }
            let mut xs = 0.0;
            let mut ps = 0.0;
            let mut parity = 0i64;
            for &i in idx.iter() {
                let off = i as i64 - half;
                let x = off as f64 * dx;
                let p = off as f64 * dp;
                positions.push(x);
                momenta.push(p);
                xs += x * x;
                ps += p * p;
                parity += off;
            }
            if idx.iter().all(|&i| i as i64 == half) {
                zero_site = s;
            }
            abs_p.push(ps.sqrt());
            japanese_x.push((1.0 + xs).sqrt());
            let j_parity: usize = idx.iter().sum();
            let xsgn = if j_parity % 2 == 0 { 1.0 } else { -1.0 };
            let psgn = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            x_phase.push(xsgn);
            p_phase.push(psgn);
        }
        // forward: f̂ = fwd_scale · p_phase · FFT[x_phase · f]; inverse mirrors it
        let x_phase_fwd = x_phase.clone();
        let p_phase_fwd: Vec<f64> = p_phase.iter().map(|s| s * fwd_scale).collect();
        let x_phase_inv: Vec<f64> = x_phase.iter().map(|s| s * inv_scale).collect();
        let inner = GridInner {
            spec,
            fwd,
            inv,
            positions,
            momenta,
            abs_p,
            japanese_x,
            x_phase: interleave(x_phase_fwd, x_phase_inv),
            p_phase: interleave(p_phase_fwd, p_phase),
            zero_site,
        };
        Ok(Grid(Arc::new(inner)))
    }

    pub fn spec(&self) -> GridSpec {
        self.0.spec
    }

    pub fn dim(&self) -> usize {
        self.0.spec.n
    }

    pub fn points(&self) -> usize {
        self.0.spec.points
    }

    pub fn length(&self) -> f64 {
        self.0.spec.length
    }

    pub fn sites(&self) -> usize {
        self.0.abs_p.len()
    }

    /// Position coordinates of site `s`.
    #[inline]
    pub fn position(&self, s: usize) -> &[f64] {
        let n = self.dim();
        &self.0.positions[s * n..(s + 1) * n]
    }

    /// Momentum coordinates of site `s`.
    #[inline]
    pub fn momentum(&self, s: usize) -> &[f64] {
        let n = self.dim();
        &self.0.momenta[s * n..(s + 1) * n]
    }

    #[inline]
    pub fn abs_momentum(&self, s: usize) -> f64 {
        self.0.abs_p[s]
    }

    pub fn abs_momenta(&self) -> &[f64] {
        &self.0.abs_p
    }

    /// `⟨x⟩ = (1 + |x|²)^{1/2}` at site `s`.
    #[inline]
    pub fn japanese(&self, s: usize) -> f64 {
        self.0.japanese_x[s]
    }

    pub fn abs_position(&self, s: usize) -> f64 {
        (self.0.japanese_x[s].powi(2) - 1.0).max(0.0).sqrt()
    }

    /// Site index holding `x = 0` (and `p = 0`).
    pub fn zero_site(&self) -> usize {
        self.0.zero_site
    }

    /// Multi-index of a site, axis 0 first.
    pub fn multi_index(&self, s: usize) -> Vec<usize> {
        let (n, m) = (self.dim(), self.points());
        let mut idx = vec![0; n];
        let mut r = s;
        for a in (0..n).rev() {
            idx[a] = r % m;
            r /= m;
        }
        idx
    }

    pub fn site_of(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.points() + i)
    }

    /// Sites lying within `cells` lattice cells of the box boundary.
    pub fn is_near_boundary(&self, s: usize, cells: usize) -> bool {
        let m = self.points();
        self.multi_index(s).iter().any(|&i| i < cells || i + cells >= m)
    }

    fn run_fft(&self, values: &mut [C64], ncomp: usize, forward: bool) {
        let (n, m) = (self.dim(), self.points());
        let plan = if forward { &self.0.fwd } else { &self.0.inv };
        let total = values.len();
        let mut buf = vec![ZERO; total];
        for axis in 0..n {
            let inner = m.pow((n - 1 - axis) as u32) * ncomp;
            let outer = total / (inner * m);
            // gather lines along `axis` contiguously
            let mut line = 0;
            for o in 0..outer {
                let base = o * m * inner;
                for i in 0..inner {
                    let dst = &mut buf[line * m..(line + 1) * m];
                    for (t, d) in dst.iter_mut().enumerate() {
                        *d = values[base + t * inner + i];
                    }
                    line += 1;
                }
            }
            plan.process(&mut buf);
            let mut line = 0;
            for o in 0..outer {
                let base = o * m * inner;
                for i in 0..inner {
                    let src = &buf[line * m..(line + 1) * m];
                    for (t, v) in src.iter().enumerate() {
                        values[base + t * inner + i] = *v;
                    }
                    line += 1;
                }
            }
        }
    }

    /// In-place position → momentum transform of interleaved spinor values.
    pub fn forward_in_place(&self, values: &mut [C64], ncomp: usize) {
        for (s, chunk) in values.chunks_mut(ncomp).enumerate() {
            let f = self.0.x_phase[2 * s];
            chunk.iter_mut().for_each(|v| *v *= f);
        }
        self.run_fft(values, ncomp, true);
        for (s, chunk) in values.chunks_mut(ncomp).enumerate() {
            let f = self.0.p_phase[2 * s];
            chunk.iter_mut().for_each(|v| *v *= f);
        }
    }

    /// In-place momentum → position transform of interleaved spinor values.
    pub fn inverse_in_place(&self, values: &mut [C64], ncomp: usize) {
        for (s, chunk) in values.chunks_mut(ncomp).enumerate() {
            let f = self.0.p_phase[2 * s + 1];
            chunk.iter_mut().for_each(|v| *v *= f);
        }
        self.run_fft(values, ncomp, false);
        for (s, chunk) in values.chunks_mut(ncomp).enumerate() {
            let f = self.0.x_phase[2 * s + 1];
            chunk.iter_mut().for_each(|v| *v *= f);
        }
    }
}

fn interleave(a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    a.into_iter().zip(b).flat_map(|(x, y)| [x, y]).collect()
}

/// `N`-component complex field on a lattice, tagged with its representation.
#[derive(Debug, Clone)]
pub struct SpinorField {
    grid: Grid,
    ncomp: usize,
    space: Space,
    values: Vec<C64>,
}

impl SpinorField {
    pub fn zeros(grid: &Grid, ncomp: usize, space: Space) -> Self {
        Self {
            grid: grid.clone(),
            ncomp,
            space,
            values: vec![ZERO; grid.sites() * ncomp],
        }
    }

    pub fn from_values(grid: &Grid, ncomp: usize, space: Space, values: Vec<C64>) -> Result<Self> {
        let expected = grid.sites() * ncomp;
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            ncomp,
            space,
            values,
        })
    }

    /// Builds a field sitewise from the coordinates of the chosen space.
    pub fn from_fn<F>(grid: &Grid, ncomp: usize, space: Space, mut f: F) -> Self
    where
        F: FnMut(&[f64]) -> Vec<C64>,
    {
        let mut values = Vec::with_capacity(grid.sites() * ncomp);
        for s in 0..grid.sites() {
            let coords = match space {
                Space::Position => grid.position(s),
                Space::Momentum => grid.momentum(s),
            };
            let v = f(coords);
            assert_eq!(v.len(), ncomp, "component count mismatch");
            values.extend(v);
        }
        Self {
            grid: grid.clone(),
            ncomp,
            space,
            values,
        }
    }

    /// Plane wave `e^{iq·x} v` at the lattice momentum with multi-index `k`,
    /// returned in position space with unit norm.
    pub fn plane_wave(grid: &Grid, k: &[usize], v: &[C64]) -> Self {
        let ncomp = v.len();
        let mut f = Self::zeros(grid, ncomp, Space::Momentum);
        let s = grid.site_of(k);
        f.site_mut(s).copy_from_slice(v);
        let nrm = f.norm();
        f.scale_mut(C64::new(1.0 / nrm, 0.0));
        f.into_position()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.ncomp
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    #[inline]
    pub fn site(&self, s: usize) -> &[C64] {
        &self.values[s * self.ncomp..(s + 1) * self.ncomp]
    }

    #[inline]
    pub fn site_mut(&mut self, s: usize) -> &mut [C64] {
        let n = self.ncomp;
        &mut self.values[s * n..(s + 1) * n]
    }

    pub fn require_space(&self, space: Space) -> Result<()> {
        if self.space != space {
            return Err(Error::WrongSpace {
                expected: space,
                got: self.space,
            });
        }
        Ok(())
    }

    pub fn require_compatible(&self, other: &SpinorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.ncomp != other.ncomp {
            return Err(Error::DimensionMismatch {
                expected: self.ncomp,
                got: other.ncomp,
            });
        }
        Ok(())
    }

    /// Toggles between position and momentum representation.
    pub fn transform(&self) -> SpinorField {
        self.clone().into_transformed()
    }

    pub fn into_transformed(mut self) -> SpinorField {
        match self.space {
            Space::Position => {
                self.grid.forward_in_place(&mut self.values, self.ncomp);
                self.space = Space::Momentum;
            }
            Space::Momentum => {
                self.grid.inverse_in_place(&mut self.values, self.ncomp);
                self.space = Space::Position;
            }
        }
        self
    }

    pub fn into_space(self, space: Space) -> SpinorField {
        if self.space == space {
            self
        } else {
            self.into_transformed()
        }
    }

    pub fn into_momentum(self) -> SpinorField {
        self.into_space(Space::Momentum)
    }

    pub fn into_position(self) -> SpinorField {
        self.into_space(Space::Position)
    }

    pub fn to_space(&self, space: Space) -> SpinorField {
        self.clone().into_space(space)
    }

    /// `L²` inner product `⟨self, other⟩`, antilinear in `self`; both
    /// operands are brought to `self`'s representation.
    pub fn inner(&self, other: &SpinorField) -> C64 {
        assert!(self.grid == other.grid && self.ncomp == other.ncomp);
        let w = self.grid.spec().cell_volume(self.space);
        if other.space == self.space {
            linalg::dot(&self.values, &other.values) * w
        } else {
            let o = other.to_space(self.space);
            linalg::dot(&self.values, &o.values) * w
        }
    }

    pub fn norm_sq(&self) -> f64 {
        linalg::norm_sq(&self.values) * self.grid.spec().cell_volume(self.space)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(mut self) -> SpinorField {
        let n = self.norm();
        if n > 0.0 {
            self.scale_mut(C64::new(1.0 / n, 0.0));
        }
        self
    }

    pub fn scale_mut(&mut self, s: C64) {
        self.values.iter_mut().for_each(|v| *v *= s);
    }

    pub fn scaled(&self, s: C64) -> SpinorField {
        let mut out = self.clone();
        out.scale_mut(s);
        out
    }

    /// `self += s · other` (other converted to `self`'s space if needed).
    pub fn axpy(&mut self, s: C64, other: &SpinorField) {
        assert!(self.grid == other.grid && self.ncomp == other.ncomp);
        if other.space == self.space {
            for (a, b) in self.values.iter_mut().zip(&other.values) {
                *a += s * b;
            }
        } else {
            let o = other.to_space(self.space);
            for (a, b) in self.values.iter_mut().zip(&o.values) {
                *a += s * b;
            }
        }
    }

    pub fn sub(&self, other: &SpinorField) -> SpinorField {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), other);
        out
    }

    pub fn add(&self, other: &SpinorField) -> SpinorField {
        let mut out = self.clone();
        out.axpy(C64::new(1.0, 0.0), other);
        out
    }

    /// Modulus of the `p = 0` coefficient vector.
    pub fn zero_mode_magnitude(&self) -> f64 {
        let m = self.to_space(Space::Momentum);
        let s = m.grid.zero_site();
        linalg::norm_sq(m.site(s)).sqrt()
    }

    /// Squared norm carried by sites within `cells` cells of the box boundary.
    pub fn boundary_mass(&self, cells: usize) -> f64 {
        let f = self.to_space(Space::Position);
        let w = f.grid.spec().cell_volume(Space::Position);
        (0..f.grid.sites())
            .filter(|&s| f.grid.is_near_boundary(s, cells))
            .map(|s| linalg::norm_sq(f.site(s)))
            .sum::<f64>()
            * w
    }
}

/// `‖⟨x⟩^s f‖₂` on the position lattice.
pub fn weighted_norm(field: &SpinorField, s: f64) -> Result<f64> {
    field.require_space(Space::Position)?;
    let g = field.grid();
    let w = g.spec().cell_volume(Space::Position);
    let total: f64 = (0..g.sites())
        .map(|site| g.japanese(site).powf(2.0 * s) * linalg::norm_sq(field.site(site)))
        .sum();
    Ok((total * w).sqrt())
}

fn radial_bump(r: f64, pmin: f64, pmax: f64) -> f64 {
    let s = (2.0 * r - pmin - pmax) / (pmax - pmin);
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

fn check_annulus(grid: &Grid, pmin: f64, pmax: f64) -> Result<()> {
    if !(pmin > 0.0 && pmin < pmax) {
        return invalid(format!("annulus needs 0 < pmin < pmax, got [{pmin}, {pmax}]"));
    }
    if pmax >= grid.spec().nyquist() {
        return invalid(format!(
            "pmax = {pmax} must stay below the grid Nyquist radius {:.4}",
            grid.spec().nyquist()
        ));
    }
    Ok(())
}

fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im)
}

/// Smooth state with momentum support inside `pmin ≤ |p| ≤ pmax`: a radial
/// bump times a random angular polynomial of degree ≤ 2 per component,
/// normalized, returned in position space.
pub fn annulus_state(grid: &Grid, rep: &CliffordRep, pmin: f64, pmax: f64, seed: u64) -> Result<SpinorField> {
    check_annulus(grid, pmin, pmax)?;
    shell_state(grid, rep, pmin, pmax, seed, |r| radial_bump(r, pmin, pmax))
}

fn shell_state<R>(grid: &Grid, rep: &CliffordRep, pmin: f64, pmax: f64, seed: u64, radial: R) -> Result<SpinorField>
where
    R: Fn(f64) -> f64,
{
    let n = grid.dim();
    let ncomp = rep.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // per component: constant, n linear, n(n+1)/2 quadratic coefficients
    let nquad = n * (n + 1) / 2;
    let coeffs: Vec<Vec<C64>> = (0..ncomp)
        .map(|_| (0..1 + n + nquad).map(|_| random_complex(&mut rng)).collect())
        .collect();
    let f = SpinorField::from_fn(grid, ncomp, Space::Momentum, |p| {
        let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r < pmin || r > pmax {
            return vec![ZERO; ncomp];
        }
        let b = radial(r);
        if b == 0.0 {
            return vec![ZERO; ncomp];
        }
        let u: Vec<f64> = p.iter().map(|x| x / r).collect();
        coeffs
            .iter()
            .map(|c| {
                let mut acc = c[0];
                for j in 0..n {
                    acc += c[1 + j] * u[j];
                }
                let mut q = 1 + n;
                for j in 0..n {
                    for k in j..n {
                        acc += c[q] * (u[j] * u[k]);
                        q += 1;
                    }
                }
                acc * b
            })
            .collect()
    });
    if f.norm() == 0.0 {
        return invalid(format!("no lattice momenta inside the annulus [{pmin}, {pmax}]"));
    }
    Ok(f.normalized().into_position())
}

/// Zeroes all momentum coefficients outside `pmin ≤ |p| ≤ pmax`.
pub fn restrict_to_annulus(field: SpinorField, pmin: f64, pmax: f64) -> SpinorField {
    let space = field.space();
    let mut m = field.into_momentum();
    let g = m.grid().clone();
    for s in 0..g.sites() {
        let r = g.abs_momentum(s);
        if r < pmin || r > pmax || r == 0.0 {
            m.site_mut(s).iter_mut().for_each(|v| *v = ZERO);
        }
    }
    m.into_space(space)
}

/// Gaussian-tapered shell: radial profile `exp(−(|p| − r₀)²/(2σ²))` with
/// `r₀ = (pmin + pmax)/2` and `σ = (pmax − pmin)/16`, times a random angular
/// polynomial of degree ≤ 2 per component. The profile is below `e^{−32}` at
/// the annulus edges, so the state is smooth in both representations and
/// decays in position space like `exp(−σ²|x|²/2)`.
pub fn tapered_annulus_state(grid: &Grid, rep: &CliffordRep, pmin: f64, pmax: f64, seed: u64) -> Result<SpinorField> {
    check_annulus(grid, pmin, pmax)?;
    let r0 = 0.5 * (pmin + pmax);
    let sigma = (pmax - pmin) / 16.0;
    shell_state(grid, rep, pmin, pmax, seed, |r| {
        let d = (r - r0) / sigma;
        (-0.5 * d * d).exp()
    })
}

/// Gaussian wave packet: momentum profile `exp(−|p − p₀|²/(2σ²))` times a
/// random spinor, shifted to position `x₀`, restricted to the annulus
/// `[pmin, pmax]`, normalized, in position space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacketSpec {
    pub momentum: Vec<f64>,
    pub sigma: f64,
    #[serde(default)]
    pub position: Option<Vec<f64>>,
    pub pmin: f64,
    pub pmax: f64,
}

pub fn packet_state(grid: &Grid, rep: &CliffordRep, spec: &PacketSpec, seed: u64) -> Result<SpinorField> {
    let n = grid.dim();
    if spec.momentum.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: spec.momentum.len(),
        });
    }
    if !(spec.sigma > 0.0) {
        return invalid("packet width must be positive");
    }
    check_annulus(grid, spec.pmin, spec.pmax)?;
    let x0 = spec.position.clone().unwrap_or_else(|| vec![0.0; n]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spinor: Vec<C64> = (0..rep.size()).map(|_| random_complex(&mut rng)).collect();
    let f = SpinorField::from_fn(grid, rep.size(), Space::Momentum, |p| {
        let r = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r < spec.pmin || r > spec.pmax {
            return vec![ZERO; spinor.len()];
        }
        let d2: f64 = p.iter().zip(&spec.momentum).map(|(a, b)| (a - b) * (a - b)).sum();
        let phase: f64 = -p.iter().zip(&x0).map(|(a, b)| a * b).sum::<f64>();
        let amp = C64::from_polar((-d2 / (2.0 * spec.sigma * spec.sigma)).exp(), phase);
        spinor.iter().map(|v| v * amp).collect()
    });
    if f.norm() == 0.0 {
        return invalid("packet has no support inside the annulus");
    }
    Ok(f.normalized().into_position())
}

/// Normalized position-space Gaussian `exp(−|x − c|²/(2w²)) v`.
pub fn gaussian_state(grid: &Grid, center: &[f64], width: f64, spinor: &[C64]) -> SpinorField {
    SpinorField::from_fn(grid, spinor.len(), Space::Position, |x| {
        let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
        let g = (-d2 / (2.0 * width * width)).exp();
        spinor.iter().map(|v| v * g).collect()
    })
    .normalized()
}

/// Random position-space field with independent normal entries (seeded).
pub fn random_field(grid: &Grid, ncomp: usize, seed: u64) -> SpinorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.sites() * ncomp).map(|_| random_complex(&mut rng)).collect();
    SpinorField::from_values(grid, ncomp, Space::Position, values)
        .expect("sized")
        .normalized()
}
