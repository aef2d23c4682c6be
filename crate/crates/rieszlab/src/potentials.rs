//! Potentials and pairings of signed charge systems made of point charges
//! and uniformly charged cubes.

use crate::boxint;
use crate::error::{param, Error, Result};
use crate::kernel::{check_dim, dist2, CubeDomain, PointConfiguration, RieszKernel, UniformMeasure};
use crate::quad;
use crate::special::{gamma_fn, ln_sinc, expi_remainder, sphere_area};
use serde::{Deserialize, Serialize};

/// A uniformly charged cube with (signed) density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub domain: CubeDomain,
    pub density: f64,
}

/// Weighted point charges plus signed uniform cubes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedChargeSystem {
    pub dim: usize,
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub backgrounds: Vec<Background>,
}

impl SignedChargeSystem {
    pub fn empty(dim: usize) -> Self {
        Self { dim, atoms: Vec::new(), weights: Vec::new(), backgrounds: Vec::new() }
    }

    pub fn from_points(config: &PointConfiguration) -> Self {
        Self {
            dim: config.dim,
            atoms: config.points.clone(),
            weights: vec![1.0; config.len()],
            backgrounds: Vec::new(),
        }
    }

    pub fn from_uniform(mu: &UniformMeasure) -> Self {
        Self {
            dim: mu.domain.dim(),
            atoms: Vec::new(),
            weights: Vec::new(),
            backgrounds: vec![Background { domain: mu.domain.clone(), density: mu.intensity }],
        }
    }

    /// Points minus the background: ν − sign·μ as a single system.
    pub fn neutral_cell(config: &PointConfiguration, background: &UniformMeasure) -> Self {
        let mut s = Self::from_points(config);
        s.backgrounds.push(Background { domain: background.domain.clone(), density: -background.intensity });
        s
    }

    pub fn with_atom(mut self, x: Vec<f64>, w: f64) -> Self {
        self.atoms.push(x);
        self.weights.push(w);
        self
    }

    pub fn with_background(mut self, domain: CubeDomain, density: f64) -> Self {
        self.backgrounds.push(Background { domain, density });
        self
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut s = self.clone();
        s.weights.iter_mut().for_each(|w| *w *= a);
        s.backgrounds.iter_mut().for_each(|b| b.density *= a);
        s
    }

    /// Disjoint union of charges (sum of measures).
    pub fn plus(&self, other: &Self) -> Self {
        let mut s = self.clone();
        s.atoms.extend(other.atoms.iter().cloned());
        s.weights.extend(other.weights.iter().copied());
        s.backgrounds.extend(other.backgrounds.iter().cloned());
        s
    }

    pub fn translate(&self, a: &[f64]) -> Self {
        let mut s = self.clone();
        for p in s.atoms.iter_mut() {
            p.iter_mut().zip(a).for_each(|(x, t)| *x += t);
        }
        for b in s.backgrounds.iter_mut() {
            b.domain = b.domain.translate(a);
        }
        s
    }

    pub fn total_charge(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.backgrounds.iter().map(|b| b.density * b.domain.volume()).sum::<f64>()
    }

    /// Σ q y over all charges.
    pub fn dipole(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim];
        for (p, w) in self.atoms.iter().zip(&self.weights) {
            m.iter_mut().zip(p).for_each(|(a, x)| *a += w * x);
        }
        for b in &self.backgrounds {
            let q = b.density * b.domain.volume();
            m.iter_mut().zip(&b.domain.center).for_each(|(a, c)| *a += q * c);
        }
        m
    }

    /// Σ |q| |y|² over all charges.
    pub fn abs_second_moment(&self) -> f64 {
        let mut m = 0.0;
        for (p, w) in self.atoms.iter().zip(&self.weights) {
            m += w.abs() * p.iter().map(|x| x * x).sum::<f64>();
        }
        for b in &self.backgrounds {
            let c2: f64 = b.domain.center.iter().map(|x| x * x).sum();
            m += b.density.abs() * b.domain.volume() * (c2 + self.dim as f64 * b.domain.side * b.domain.side / 12.0);
        }
        m
    }

    /// Largest distance from the origin to any charge.
    pub fn extent(&self) -> f64 {
        let mut r: f64 = 0.0;
        for p in &self.atoms {
            r = r.max(p.iter().map(|x| x * x).sum::<f64>().sqrt());
        }
        for b in &self.backgrounds {
            let far: f64 = b.domain.center.iter().map(|c| (c.abs() + b.domain.side / 2.0).powi(2)).sum();
            r = r.max(far.sqrt());
        }
        r
    }

    fn validate(&self, k: &RieszKernel) -> Result<()> {
        check_dim(k.d, self.dim)?;
        if self.atoms.len() != self.weights.len() {
            return Err(param("weights", "one weight per atom required"));
        }
        for p in &self.atoms {
            check_dim(k.d, p.len())?;
        }
        for b in &self.backgrounds {
            check_dim(k.d, b.domain.dim())?;
        }
        Ok(())
    }
}

/// A background measure usable as μ in UEG-type energies.
pub trait Density {
    fn charges(&self) -> SignedChargeSystem;

    fn mass(&self) -> f64 {
        self.charges().total_charge()
    }

    /// ⟨μ, μ⟩_s.
    fn self_pairing(&self, k: &RieszKernel) -> Result<f64> {
        let c = self.charges();
        pairing(k, &c, &c, false)
    }

    /// h^μ(x).
    fn potential(&self, k: &RieszKernel, x: &[f64]) -> Result<f64> {
        potential_h(k, &self.charges(), x)
    }
}

impl Density for UniformMeasure {
    fn charges(&self) -> SignedChargeSystem {
        SignedChargeSystem::from_uniform(self)
    }

    fn mass(&self) -> f64 {
        UniformMeasure::mass(self)
    }

    fn self_pairing(&self, k: &RieszKernel) -> Result<f64> {
        Ok(self.intensity * self.intensity * cube_cube_integral(k, &self.domain, &self.domain)?)
    }

    fn potential(&self, k: &RieszKernel, x: &[f64]) -> Result<f64> {
        Ok(self.intensity * point_cube_integral(k, &self.domain, x)?)
    }
}

impl Density for SignedChargeSystem {
    fn charges(&self) -> SignedChargeSystem {
        self.clone()
    }
}

/// ∫_K |p − y|^{-s} dy.
pub fn point_cube_integral(k: &RieszKernel, cube: &CubeDomain, p: &[f64]) -> Result<f64> {
    check_dim(k.d, cube.dim())?;
    check_dim(k.d, p.len())?;
    let v = boxint::point_box(k.s, &cube.lower(), &cube.upper(), p);
    finite(v)
}

/// ∇_p ∫_K |p − y|^{-s} dy.
pub fn point_cube_gradient(k: &RieszKernel, cube: &CubeDomain, p: &[f64]) -> Result<Vec<f64>> {
    check_dim(k.d, cube.dim())?;
    check_dim(k.d, p.len())?;
    let g = boxint::point_box_gradient(k.s, &cube.lower(), &cube.upper(), p);
    if g.iter().all(|x| x.is_finite()) {
        Ok(g)
    } else {
        Err(Error::Accuracy { target: 1e-7, achieved: f64::INFINITY })
    }
}

/// ∫_{K1} ∫_{K2} |x − y|^{-s} dy dx.
pub fn cube_cube_integral(k: &RieszKernel, k1: &CubeDomain, k2: &CubeDomain) -> Result<f64> {
    check_dim(k.d, k1.dim())?;
    check_dim(k.d, k2.dim())?;
    if k1.side == k2.side && k1.center == k2.center {
        return finite(self_energy_unit(k) * k1.side.powf(2.0 * k.d as f64 - k.s));
    }
    finite(boxint::box_box(k.s, &k1.lower(), &k1.upper(), &k2.lower(), &k2.upper()))
}

/// ∫∫ over the unit cube squared.
pub fn self_energy_unit(k: &RieszKernel) -> f64 {
    if k.d == 1 {
        return 2.0 / ((1.0 - k.s) * (2.0 - k.s));
    }
    let z = vec![0.0; k.d];
    let o = vec![1.0; k.d];
    boxint::box_box(k.s, &z, &o, &z, &o)
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Accuracy { target: 1e-7, achieved: f64::INFINITY })
    }
}

/// ⟨μ, ν⟩_s, or ⟨μ, ν⟩*_s (coincident atom pairs dropped) when `off_diagonal`.
pub fn pairing(k: &RieszKernel, mu: &SignedChargeSystem, nu: &SignedChargeSystem, off_diagonal: bool) -> Result<f64> {
    mu.validate(k)?;
    nu.validate(k)?;
    let mut total = 0.0;
    for (i, (p, wp)) in mu.atoms.iter().zip(&mu.weights).enumerate() {
        for (j, (q, wq)) in nu.atoms.iter().zip(&nu.weights).enumerate() {
            let r2 = dist2(p, q);
            if r2 == 0.0 {
                if off_diagonal {
                    continue;
                }
                return Err(Error::SingularPair { i, j });
            }
            total += wp * wq * r2.powf(-0.5 * k.s);
        }
    }
    for (p, w) in mu.atoms.iter().zip(&mu.weights) {
        for b in &nu.backgrounds {
            total += w * b.density * point_cube_integral(k, &b.domain, p)?;
        }
    }
    for (p, w) in nu.atoms.iter().zip(&nu.weights) {
        for b in &mu.backgrounds {
            total += w * b.density * point_cube_integral(k, &b.domain, p)?;
        }
    }
    for a in &mu.backgrounds {
        for b in &nu.backgrounds {
            total += a.density * b.density * cube_cube_integral(k, &a.domain, &b.domain)?;
        }
    }
    Ok(total)
}

/// h^μ(x) = ∫ |x − y|^{-s} dμ(y).
pub fn potential_h(k: &RieszKernel, system: &SignedChargeSystem, x: &[f64]) -> Result<f64> {
    system.validate(k)?;
    check_dim(k.d, x.len())?;
    let mut v = 0.0;
    for (i, (p, w)) in system.atoms.iter().zip(&system.weights).enumerate() {
        let r2 = dist2(p, x);
        if r2 == 0.0 {
            return Err(Error::SingularPair { i, j: i });
        }
        v += w * r2.powf(-0.5 * k.s);
    }
    for b in &system.backgrounds {
        v += b.density * point_cube_integral(k, &b.domain, x)?;
    }
    Ok(v)
}

/// Multipole data of a compactly supported charge system centred at 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipoleCell {
    pub support_radius: f64,
    pub monopole: f64,
    pub dipole: Vec<f64>,
    pub abs_second_moment: f64,
    pub remainder_constant: f64,
}

impl MultipoleCell {
    /// Support radius 4·extent (2√d R₁ for a centred cube of side R₁).
    pub fn from_system(k: &RieszKernel, system: &SignedChargeSystem) -> Result<Self> {
        system.validate(k)?;
        Ok(Self {
            support_radius: 4.0 * system.extent(),
            monopole: system.total_charge(),
            dipole: system.dipole(),
            abs_second_moment: system.abs_second_moment(),
            remainder_constant: k.s * (k.s + 2.0) + 1.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub value: f64,
    pub bound: f64,
}

/// Monopole + dipole far-field value with a remainder bound.
pub fn multipole_tail(cell: &MultipoleCell, k: &RieszKernel, x: &[f64]) -> Result<TailEstimate> {
    check_dim(k.d, x.len())?;
    check_dim(k.d, cell.dipole.len())?;
    let r2: f64 = x.iter().map(|a| a * a).sum();
    let r = r2.sqrt();
    if r <= cell.support_radius {
        return Err(Error::Domain { index: 0 });
    }
    let xd: f64 = x.iter().zip(&cell.dipole).map(|(a, b)| a * b).sum();
    let value = cell.monopole * r.powf(-k.s) - k.s * xd * r.powf(-k.s - 2.0);
    let bound = cell.remainder_constant * cell.abs_second_moment * r.powf(-k.s - 2.0);
    Ok(TailEstimate { value, bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetIntegral {
    pub value: f64,
    pub near_field: f64,
    pub far_field: f64,
    pub tail_bound: f64,
    pub radius: f64,
    /// Set when s ≤ d − 2 (integral only conditionally convergent).
    pub conditional: bool,
}

/// ∫_{B_ρ} |x − a|^{-s} dx as a function of t = |a| < ρ.
fn ball_potential(k: &RieszKernel, rho: f64, t: f64) -> f64 {
    let (s, d) = (k.s, k.d);
    if d == 1 {
        return ((rho + t).powf(1.0 - s) + (rho - t).powf(1.0 - s)) / (1.0 - s);
    }
    let sd2 = if d == 2 { 2.0 } else { sphere_area(d - 1) };
    let e = d as f64 - s;
    let v = quad::integrate_composite(32, 0.0, std::f64::consts::PI, 2, |th| {
        let (sn, cs) = th.sin_cos();
        let l = -t * cs + (rho * rho - t * t * sn * sn).sqrt();
        l.powf(e) * sn.powi(d as i32 - 2)
    });
    sd2 * v / e
}

/// Coefficients of the spherical mean M(r, t) = r^{-s} Σ c_k (t/r)^{2k}.
fn sphere_mean_coefficients(k: &RieszKernel, n: usize) -> Vec<f64> {
    let a = 0.5 * k.s;
    let b = 0.5 * (k.s - k.d as f64 + 2.0);
    let c = 0.5 * k.d as f64;
    let mut out = Vec::with_capacity(n);
    let mut coef = 1.0;
    for j in 0..n {
        out.push(coef);
        let jf = j as f64;
        coef *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0));
    }
    out
}

/// Spherical mean of |r ω − y|^{-s} over ω ∈ S^{d-1}, |y| = t < r.
pub fn sphere_mean(k: &RieszKernel, r: f64, t: f64) -> f64 {
    let q = (t / r) * (t / r);
    let coeffs = sphere_mean_coefficients(k, 400);
    let mut sum = 0.0;
    let mut p = 1.0;
    for c in coeffs {
        let term = c * p;
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        p *= q;
    }
    r.powf(-k.s) * sum
}

/// Signed moments m_{2j} = ∫ |y|^{2j} dq(y), j = 0..n.
fn even_moments(system: &SignedChargeSystem, n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n + 1];
    for (p, w) in system.atoms.iter().zip(&system.weights) {
        let r2: f64 = p.iter().map(|x| x * x).sum();
        let mut v = *w;
        for mj in m.iter_mut() {
            *mj += v;
            v *= r2;
        }
    }
    let order = (n + 2).min(64);
    for b in &system.backgrounds {
        let lo = b.domain.lower();
        let hi = b.domain.upper();
        let axes: Vec<_> = lo.iter().zip(&hi).map(|(&a, &c)| quad::composite_nodes(order, a, c, 1)).collect();
        quad::tensor(&axes, |y, wt| {
            let r2: f64 = y.iter().map(|x| x * x).sum();
            let mut v = b.density * wt;
            for mj in m.iter_mut() {
                *mj += v;
                v *= r2;
            }
        });
    }
    m
}

/// ∫_{R^d} h^{cell}(x) dx for a neutral, dipole-free cell centred at 0.
pub fn net_potential_integral(k: &RieszKernel, cell: &SignedChargeSystem) -> Result<NetIntegral> {
    cell.validate(k)?;
    let (s, d) = (k.s, k.d as f64);
    let extent = cell.extent();
    let scale = cell.abs_second_moment().max(1e-300).sqrt();
    let q0 = cell.total_charge();
    let mass: f64 = cell.weights.iter().map(|w| w.abs()).sum::<f64>()
        + cell.backgrounds.iter().map(|b| (b.density * b.domain.volume()).abs()).sum::<f64>();
    if q0.abs() > 1e-10 * mass.max(1.0) {
        return Err(param("cell", format!("system is not neutral (total charge {q0:e})")));
    }
    let dip = cell.dipole();
    let dn = dip.iter().map(|x| x * x).sum::<f64>().sqrt();
    if dn > 1e-10 * scale.max(1.0) * mass.max(1.0) {
        return Err(param("cell", format!("dipole moment {dn:e} is not zero")));
    }
    let conditional = s <= d - 2.0 + 1e-12;
    let rho = 4.0 * extent.max(1e-300);

    let mut near = 0.0;
    for (p, w) in cell.atoms.iter().zip(&cell.weights) {
        let t = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        near += w * ball_potential(k, rho, t);
    }
    for b in &cell.backgrounds {
        let lo = b.domain.lower();
        let hi = b.domain.upper();
        near += b.density
            * quad::box_integral(24, 1, &lo, &hi, |y| ball_potential(k, rho, y.iter().map(|x| x * x).sum::<f64>().sqrt()));
    }

    let nmax = 60;
    let coeffs = sphere_mean_coefficients(k, nmax + 1);
    let moments = even_moments(cell, nmax);
    let area = sphere_area(k.d);
    let mut far = 0.0;
    let mut last = 0.0;
    if !k.is_coulomb() {
        for j in 1..=nmax {
            let jf = j as f64;
            let term = area * coeffs[j] * moments[j] * rho.powf(d - s - 2.0 * jf) / (s + 2.0 * jf - d);
            far += term;
            last = term.abs();
            if last < 1e-18 * (far.abs() + near.abs()).max(1e-300) {
                break;
            }
        }
    }
    Ok(NetIntegral {
        value: near + far,
        near_field: near,
        far_field: far,
        tail_bound: 2.0 * last,
        radius: rho,
        conditional,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierLimit {
    pub limit: f64,
    pub error: f64,
    /// (|ξ|, value) along the sequence.
    pub series: Vec<(f64, f64)>,
    pub divergent: bool,
}

/// The Fourier-side constant F(|x|^{-s})(ξ) = c |ξ|^{s-d}.
pub fn fourier_constant(k: &RieszKernel) -> f64 {
    let (s, d) = (k.s, k.d as f64);
    2f64.powf(d - s) * std::f64::consts::PI.powf(d / 2.0) * gamma_fn((d - s) / 2.0) / gamma_fn(s / 2.0)
}

/// Default ξ-sequence 2^{-j}, j = 4..=20.
pub fn default_xi_sequence() -> Vec<f64> {
    (4..=20).map(|j| 2f64.powi(-j)).collect()
}

/// Re of ĥ(ξ) = c|ξ|^{s−d} q̂(ξ) along `xi` in `direction`, extrapolated to ξ → 0.
pub fn fourier_zero_limit(
    k: &RieszKernel,
    cell: &SignedChargeSystem,
    xi_sequence: &[f64],
    direction: &[f64],
) -> Result<FourierLimit> {
    cell.validate(k)?;
    check_dim(k.d, direction.len())?;
    if xi_sequence.len() < 3 {
        return Err(param("xi_sequence", "need at least three values"));
    }
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(param("direction", "must be nonzero"));
    }
    let e: Vec<f64> = direction.iter().map(|x| x / norm).collect();
    let (s, d) = (k.s, k.d as f64);
    let c = fourier_constant(k);
    let q0 = cell.total_charge();
    let dip = cell.dipole();
    let mass: f64 = cell.weights.iter().map(|w| w.abs()).sum::<f64>()
        + cell.backgrounds.iter().map(|b| (b.density * b.domain.volume()).abs()).sum::<f64>();
    let scale = cell.abs_second_moment().max(1e-300).sqrt();
    let dip_e: f64 = dip.iter().zip(&e).map(|(a, b)| a * b).sum();
    let divergent = q0.abs() > 1e-10 * mass.max(1.0) || dip_e.abs() > 1e-10 * scale.max(1.0) * mass.max(1.0);

    let mut series = Vec::with_capacity(xi_sequence.len());
    for &x in xi_sequence {
        let xi: Vec<f64> = e.iter().map(|a| a * x).collect();
        // q̂(ξ) = Σ w e^{-iξ·y} + Σ ρ_b ∫_b e^{-iξ·y} dy, minus known low-order terms
        let mut re = q0;
        let mut im = -dip_e * x;
        for (p, w) in cell.atoms.iter().zip(&cell.weights) {
            let z: f64 = p.iter().zip(&xi).map(|(a, b)| a * b).sum();
            let (r, i) = expi_remainder(z);
            re += w * r;
            im += w * i;
        }
        for b in &cell.backgrounds {
            let vol = b.domain.volume();
            let ls: f64 = xi.iter().map(|&t| ln_sinc(0.5 * t * b.domain.side)).sum();
            let zc: f64 = b.domain.center.iter().zip(&xi).map(|(a, t)| a * t).sum();
            // e^{-iξ·c} Π sinc = (1 + E(zc) − i zc)(1 + (Πsinc − 1))
            let sm1 = ls.exp_m1();
            let (er, ei) = expi_remainder(zc);
            let (ar, ai) = (1.0 + er, ei - zc);
            re += b.density * vol * (er + ar * sm1);
            im += b.density * vol * (ei + ai * sm1);
        }
        let _ = im;
        series.push((x, c * x.powf(s - d) * re));
    }
    let q1 = 2.0 - (d - s);
    let exps = if q1.abs() < 1e-12 { [2.0, 4.0] } else { [q1, q1 + 2.0] };
    let n = series.len();
    let rich = |i: usize| -> f64 {
        // two Richardson sweeps on consecutive points (x_i, x_{i+1}, x_{i+2})
        let (x0, f0) = series[i];
        let (x1, f1) = series[i + 1];
        let (x2, f2) = series[i + 2];
        let r1 = (x0 / x1).powf(exps[0]);
        let g0 = (r1 * f1 - f0) / (r1 - 1.0);
        let r1b = (x1 / x2).powf(exps[0]);
        let g1 = (r1b * f2 - f1) / (r1b - 1.0);
        let r2 = (x0 / x1).powf(exps[1]);
        (r2 * g1 - g0) / (r2 - 1.0)
    };
    let a = rich(n - 3);
    let b = if n >= 4 { rich(n - 4) } else { a };
    let limit = if divergent { f64::NAN } else { a };
    Ok(FourierLimit { limit, error: (a - b).abs(), series, divergent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_mean_matches_quadrature_d3() {
        let k = RieszKernel::new(1.5, 3).unwrap();
        let (r, t): (f64, f64) = (2.0, 0.7);
        // mean over the sphere: (1/2)∫_0^π |rω − y|^{-s} sinθ dθ
        let q = 0.5 * quad::integrate_composite(40, 0.0, std::f64::consts::PI, 4, |th| {
            (r * r + t * t - 2.0 * r * t * th.cos()).powf(-0.5 * k.s) * th.sin()
        });
        assert!((sphere_mean(&k, r, t) / q - 1.0).abs() < 1e-13);
    }

    #[test]
    fn sphere_mean_d1_is_two_point_average() {
        let k = RieszKernel::new(0.5, 1).unwrap();
        let (r, t): (f64, f64) = (2.0, 0.7);
        let exact = 0.5 * ((r - t).powf(-0.5) + (r + t).powf(-0.5));
        assert!((sphere_mean(&k, r, t) / exact - 1.0).abs() < 1e-13);
    }

    #[test]
    fn ball_potential_at_center() {
        let k = RieszKernel::new(1.0, 3).unwrap();
        let v = ball_potential(&k, 2.0, 0.0);
        let exact = 4.0 * std::f64::consts::PI * 4.0 / 2.0;
        assert!((v / exact - 1.0).abs() < 1e-13);
    }
}
