//! Riesz kernels, cubes, uniform backgrounds and point configurations.

use crate::error::{param, Error, Result};
use crate::quad;
use crate::special::{beta_fn, gamma_fn, rising, sphere_area};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The interaction c(x) = |x|^{-s} on R^d with 0 < s < d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszKernel {
    pub s: f64,
    pub d: usize,
}

impl RieszKernel {
    pub fn new(s: f64, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(param("d", "dimension must be positive"));
        }
        if !(s > 0.0 && s < d as f64) {
            return Err(param("s", format!("need 0 < s < d, got s = {s}, d = {d}")));
        }
        Ok(Self { s, d })
    }

    /// True when s = d − 2 up to rounding.
    pub fn is_coulomb(&self) -> bool {
        (self.s - (self.d as f64 - 2.0)).abs() < 1e-12
    }

    pub fn radial(&self, r: f64) -> f64 {
        r.powf(-self.s)
    }

    /// |x − y|^{-s}; coincident points are an error.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim(self.d, x.len())?;
        check_dim(self.d, y.len())?;
        let r2 = dist2(x, y);
        if r2 == 0.0 {
            return Err(Error::SingularPair { i: 0, j: 1 });
        }
        Ok(r2.powf(-0.5 * self.s))
    }

    pub fn truncate(&self, eta: f64) -> Result<TruncatedKernel> {
        if !(eta > 0.0) {
            return Err(param("eta", format!("truncation radius must be positive, got {eta}")));
        }
        Ok(TruncatedKernel { base: *self, eta })
    }
}

pub fn kernel_eval(k: &RieszKernel, x: &[f64], y: &[f64]) -> Result<f64> {
    k.eval(x, y)
}

pub fn kernel_truncate(k: &RieszKernel, eta: f64) -> Result<TruncatedKernel> {
    k.truncate(eta)
}

/// c_η = min(c, c(η)) and f_η = c − c_η.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedKernel {
    pub base: RieszKernel,
    pub eta: f64,
}

impl TruncatedKernel {
    pub fn capped(&self, r: f64) -> f64 {
        if r <= self.eta {
            self.eta.powf(-self.base.s)
        } else {
            r.powf(-self.base.s)
        }
    }

    pub fn remainder(&self, r: f64) -> f64 {
        if r >= self.eta {
            0.0
        } else {
            r.powf(-self.base.s) - self.eta.powf(-self.base.s)
        }
    }
}

/// Lens volume |B_{r/2} ∩ (B_{r/2} + x)| for |x| = ρ ≤ r.
pub fn lens_volume(d: usize, r: f64, rho: f64) -> f64 {
    if rho >= r {
        return 0.0;
    }
    let c = (PI / 4.0).powf((d as f64 - 1.0) / 2.0) / gamma_fn((d as f64 + 1.0) / 2.0);
    c * r.powi(d as i32) * sin_power_integral(d, (rho / r).clamp(-1.0, 1.0).acos())
}

/// ∫_0^a sin^n φ dφ by the Wallis recursion.
fn sin_power_integral(n: usize, a: f64) -> f64 {
    let (s, c) = a.sin_cos();
    let mut even = a;
    let mut odd = 1.0 - c;
    if n == 0 {
        return even;
    }
    if n == 1 {
        return odd;
    }
    let mut k = 2;
    let mut out = 0.0;
    while k <= n {
        let kf = k as f64;
        if k % 2 == 0 {
            even = -s.powi(k as i32 - 1) * c / kf + (kf - 1.0) / kf * even;
            out = even;
        } else {
            odd = -s.powi(k as i32 - 1) * c / kf + (kf - 1.0) / kf * odd;
            out = odd;
        }
        k += 1;
    }
    out
}

/// Coefficient A in the radial weight f(r) = A r^{-s-d-1} of the
/// ball-convolution representation c(x) = ∫ h_r(|x|) f(r) dr.
pub fn hs_weight_coefficient(k: &RieszKernel) -> f64 {
    let (s, d) = (k.s, k.d);
    if d == 1 {
        return s * (s + 1.0);
    }
    let df = d as f64;
    let kappa = 2f64.powi(d as i32) * (df - 1.0) * gamma_fn(df / 2.0 + 1.0)
        / (PI.powf(df / 2.0) * gamma_fn(df + 1.0));
    // ∫_0^∞ sinh^{d-2}τ cosh^{-s-d}τ dτ
    let decay = s + 2.0;
    let tmax = (40.0 * std::f64::consts::LN_10 + (df - 2.0) * 2f64.ln()) / decay + 1.0;
    let tau = quad::integrate_composite(32, 0.0, tmax, (tmax / 1.5).ceil() as usize, |t| {
        t.sinh().powi(d as i32 - 2) * t.cosh().powf(-s - df)
    });
    kappa * rising(s, d + 1) * tau
}

/// Closed form of the τ-integral, used to cross-check the quadrature.
pub fn hs_weight_coefficient_closed(k: &RieszKernel) -> f64 {
    let (s, d) = (k.s, k.d);
    if d == 1 {
        return s * (s + 1.0);
    }
    let df = d as f64;
    let kappa = 2f64.powi(d as i32) * (df - 1.0) * gamma_fn(df / 2.0 + 1.0)
        / (PI.powf(df / 2.0) * gamma_fn(df + 1.0));
    kappa * rising(s, d + 1) * 0.5 * beta_fn((df - 1.0) / 2.0, (s + 2.0) / 2.0)
}

/// Regularized kernel c_α(x − y) = ∫_{α}^∞ h_r(|x − y|) f(r) dr.
pub fn hs_regularize(k: &RieszKernel, alpha: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_dim(k.d, x.len())?;
    check_dim(k.d, y.len())?;
    if !(alpha >= 0.0) {
        return Err(param("alpha", format!("must be nonnegative, got {alpha}")));
    }
    let rho = dist2(x, y).sqrt();
    hs_regularize_radial(k, alpha, rho)
}

pub fn hs_regularize_radial(k: &RieszKernel, alpha: f64, rho: f64) -> Result<f64> {
    let (s, d) = (k.s, k.d);
    let a = hs_weight_coefficient(k);
    let m = alpha.max(rho);
    if m == 0.0 {
        return Err(Error::SingularPair { i: 0, j: 1 });
    }
    // r = m u^{-1/s}: ∫_m^∞ h_r(ρ) A r^{-s-d-1} dr = A m^{-s}/s ∫_0^1 h_1(ρ u^{1/s}/m) du
    let kappa = rho / m;
    let nodes = quad::graded_nodes(20, 0.5, 1e-16);
    let g = |u: f64| lens_volume(d, 1.0, kappa * u.powf(1.0 / s));
    let integral: f64 = nodes.iter().map(|&(u, w)| w * (g(u) + g(1.0 - u))).sum();
    let val = a * m.powf(-s) / s * integral;
    if !val.is_finite() {
        return Err(Error::Accuracy { target: 1e-8, achieved: f64::INFINITY });
    }
    Ok(val)
}

/// The constant c_{d,s} in the extension representation (d − 2 ≤ s < d).
pub fn c_sd(s: f64, d: usize) -> Result<f64> {
    let df = d as f64;
    if d == 2 && s == 0.0 {
        return Ok(2.0 * PI);
    }
    if (s - (df - 2.0)).abs() < 1e-14 && s > 0.0 {
        return Ok((df - 2.0) * 2.0 * PI.powf(df / 2.0) / gamma_fn(df / 2.0));
    }
    if s > df - 2.0 && s < df && s > 0.0 {
        return Ok(2.0 * s * 2.0 * PI.powf(df / 2.0) * gamma_fn((s + 2.0 - df) / 2.0)
            / gamma_fn((s + 2.0) / 2.0));
    }
    Err(Error::Unsupported(format!("c_(d,s) needs d-2 <= s < d, got s = {s}, d = {d}")))
}

/// Half-open cube `center + [−side/2, side/2)^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeDomain {
    pub center: Vec<f64>,
    pub side: f64,
}

impl CubeDomain {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(param("center", "dimension must be positive"));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(param("side", format!("must be positive, got {side}")));
        }
        Ok(Self { center, side })
    }

    /// Cube `[0, side)^d`.
    pub fn anchored(d: usize, side: f64) -> Result<Self> {
        Self::new(vec![side / 2.0; d], side)
    }

    /// Cube `[−side/2, side/2)^d`.
    pub fn centered(d: usize, side: f64) -> Result<Self> {
        Self::new(vec![0.0; d], side)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim() as i32)
    }

    pub fn lower(&self) -> Vec<f64> {
        self.center.iter().map(|c| c - self.side / 2.0).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.center.iter().map(|c| c + self.side / 2.0).collect()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter().zip(&self.center).all(|(x, c)| {
            let t = x - c;
            t >= -self.side / 2.0 && t < self.side / 2.0
        })
    }

    pub fn contains_closed(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(&self.center)
            .all(|(x, c)| (x - c).abs() <= self.side / 2.0)
    }

    pub fn translate(&self, a: &[f64]) -> Self {
        Self { center: self.center.iter().zip(a).map(|(c, t)| c + t).collect(), side: self.side }
    }
}

/// Background charge `intensity · 1_K dx`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformMeasure {
    pub domain: CubeDomain,
    pub intensity: f64,
}

impl UniformMeasure {
    pub fn new(domain: CubeDomain, intensity: f64) -> Result<Self> {
        if !(intensity >= 0.0) {
            return Err(param("intensity", format!("must be nonnegative, got {intensity}")));
        }
        Ok(Self { domain, intensity })
    }

    pub fn unit(domain: CubeDomain) -> Self {
        Self { domain, intensity: 1.0 }
    }

    pub fn mass(&self) -> f64 {
        self.intensity * self.domain.volume()
    }
}

/// A finite multiset of points in R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl PointConfiguration {
    pub fn new(dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(param("dim", "dimension must be positive"));
        }
        for p in &points {
            check_dim(dim, p.len())?;
            if p.iter().any(|x| !x.is_finite()) {
                return Err(param("points", "coordinates must be finite"));
            }
        }
        Ok(Self { dim, points })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, points: Vec::new() }
    }

    pub fn from_flat(dim: usize, flat: &[f64]) -> Self {
        Self { dim, points: flat.chunks(dim).map(|c| c.to_vec()).collect() }
    }

    pub fn flat(&self) -> Vec<f64> {
        self.points.iter().flatten().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn translate(&self, a: &[f64]) -> Self {
        Self {
            dim: self.dim,
            points: self
                .points
                .iter()
                .map(|p| p.iter().zip(a).map(|(x, t)| x + t).collect())
                .collect(),
        }
    }

    pub fn barycenter_sum(&self) -> Vec<f64> {
        let mut b = vec![0.0; self.dim];
        for p in &self.points {
            for (bk, x) in b.iter_mut().zip(p) {
                *bk += x;
            }
        }
        b
    }

    /// First coincident pair, if any.
    pub fn coincidence(&self) -> Option<(usize, usize)> {
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.points[i] == self.points[j] {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Smallest pairwise distance (∞ for fewer than two points).
    pub fn min_separation(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                m = m.min(dist2(&self.points[i], &self.points[j]));
            }
        }
        m.sqrt()
    }
}

/// An (R₁Z)^d-periodic configuration given by its points in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicConfiguration {
    pub cell: CubeDomain,
    pub base_points: PointConfiguration,
    pub zero_barycenter: bool,
}

impl PeriodicConfiguration {
    pub fn new(cell: CubeDomain, base_points: PointConfiguration, zero_barycenter: bool) -> Result<Self> {
        check_dim(cell.dim(), base_points.dim)?;
        for (i, p) in base_points.points.iter().enumerate() {
            if !cell.contains(p) {
                return Err(Error::Domain { index: i });
            }
        }
        let pc = Self { cell, base_points, zero_barycenter };
        if zero_barycenter {
            let b = pc.relative_barycenter_sum();
            let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 * pc.cell.side * (1.0 + pc.base_points.len() as f64) {
                return Err(param("zero_barycenter", format!("barycenter sum {norm:e} is not zero")));
            }
        }
        Ok(pc)
    }

    /// Σ (p − cell center).
    pub fn relative_barycenter_sum(&self) -> Vec<f64> {
        let mut b = self.base_points.barycenter_sum();
        let n = self.base_points.len() as f64;
        for (bk, c) in b.iter_mut().zip(&self.cell.center) {
            *bk -= n * c;
        }
        b
    }

    /// Whether #points = R₁^d (unit density).
    pub fn is_unit_density(&self) -> bool {
        (self.base_points.len() as f64 - self.cell.volume()).abs() < 1e-9
    }

    /// Points of the periodic configuration inside `window`.
    pub fn restrict(&self, window: &CubeDomain) -> PointConfiguration {
        let d = self.cell.dim();
        let r1 = self.cell.side;
        let lo = window.lower();
        let hi = window.upper();
        let base_lo = self.cell.lower();
        let kmin: Vec<i64> = (0..d).map(|i| ((lo[i] - base_lo[i]) / r1).floor() as i64 - 1).collect();
        let kmax: Vec<i64> = (0..d).map(|i| ((hi[i] - base_lo[i]) / r1).ceil() as i64 + 1).collect();
        let mut out = Vec::new();
        let mut idx = kmin.clone();
        loop {
            for p in &self.base_points.points {
                let q: Vec<f64> = (0..d).map(|i| p[i] + idx[i] as f64 * r1).collect();
                if window.contains(&q) {
                    out.push(q);
                }
            }
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] <= kmax[k] {
                    break;
                }
                idx[k] = kmin[k];
                k += 1;
                if k == d {
                    return PointConfiguration { dim: d, points: out };
                }
            }
        }
    }
}

pub(crate) fn dist2(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

/// |S^{d-1}| for a kernel's dimension.
pub fn sphere(k: &RieszKernel) -> f64 {
    sphere_area(k.d)
}
