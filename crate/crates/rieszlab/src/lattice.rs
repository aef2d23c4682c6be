//! Unit-density lattices, per-point lattice energies, the translation-averaged
//! plan marginal and reflection symmetrization.

use crate::analysis::{extrapolate_constant, FitModel};
use crate::error::{param, Error, Result};
use crate::jellium::{e_jel, pair_sum};
use crate::kernel::{check_dim, CubeDomain, PeriodicConfiguration, PointConfiguration, RieszKernel};
use crate::potentials::{cube_cube_integral, point_cube_integral, Density, SignedChargeSystem};
use crate::special::{gamma_fn, upper_gamma};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// A lattice Λ = {Σ n_i b_i}; rows of `basis` are the b_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub name: String,
    pub basis: Vec<Vec<f64>>,
}

impl Lattice {
    /// A lattice of density one; |det| must be 1 within 1e-12.
    pub fn new(name: impl Into<String>, basis: Vec<Vec<f64>>) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(param("basis", "empty basis"));
        }
        if basis.iter().any(|r| r.len() != d) {
            return Err(param("basis", "basis must be a square matrix"));
        }
        if basis.iter().flatten().any(|x| !x.is_finite()) {
            return Err(param("basis", "non-finite entry"));
        }
        let l = Self { name: name.into(), basis };
        let det = l.det();
        if (det.abs() - 1.0).abs() > 1e-12 {
            return Err(param("basis", format!("|det| must be 1 (unit density), got {}", det.abs())));
        }
        Ok(l)
    }

    /// Rescales an arbitrary nonsingular basis to unit density.
    pub fn normalized(name: impl Into<String>, basis: Vec<Vec<f64>>) -> Result<Self> {
        let d = basis.len();
        let tmp = Self { name: String::new(), basis: basis.clone() };
        if d == 0 || basis.iter().any(|r| r.len() != d) {
            return Err(param("basis", "basis must be a nonempty square matrix"));
        }
        let det = tmp.det().abs();
        if !(det > 0.0) || !det.is_finite() {
            return Err(param("basis", "basis is singular"));
        }
        let f = det.powf(-1.0 / d as f64);
        Self::new(name, basis.into_iter().map(|r| r.into_iter().map(|x| x * f).collect()).collect())
    }

    pub fn zd(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(param("d", "dimension must be positive"));
        }
        Self::new(format!("Z{d}"), (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect())
    }

    pub fn bcc() -> Self {
        let a = 2f64.powf(1.0 / 3.0);
        Self { name: "BCC".into(), basis: vec![vec![a, 0.0, 0.0], vec![0.0, a, 0.0], vec![a / 2.0, a / 2.0, a / 2.0]] }
    }

    pub fn fcc() -> Self {
        let a = 4f64.powf(1.0 / 3.0);
        let h = a / 2.0;
        Self { name: "FCC".into(), basis: vec![vec![h, h, 0.0], vec![h, 0.0, h], vec![0.0, h, h]] }
    }

    pub fn triangular() -> Self {
        let a = (2.0 / 3f64.sqrt()).sqrt();
        Self { name: "triangular".into(), basis: vec![vec![a, 0.0], vec![a / 2.0, a * 3f64.sqrt() / 2.0]] }
    }

    /// Parses `{name, basis: [[...]]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Doc {
            name: String,
            basis: Vec<Vec<f64>>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| param("lattice", e.to_string()))?;
        Self::new(doc.name, doc.basis)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn by_name(name: &str, d: usize) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bcc" => Ok(Self::bcc()),
            "fcc" => Ok(Self::fcc()),
            "triangular" | "hexagonal" => Ok(Self::triangular()),
            "zd" | "z" | "cubic" => Self::zd(d),
            other => Err(param("lattice", format!("unknown lattice name {other:?}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Matrix with the basis vectors as columns.
    fn columns(&self) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.basis[j][i])
    }

    pub fn det(&self) -> f64 {
        self.columns().determinant()
    }

    /// Basis of the dual lattice {k : k·λ ∈ Z}.
    pub fn dual(&self) -> Result<Lattice> {
        let inv = self.columns().try_inverse().ok_or_else(|| param("basis", "basis is singular"))?;
        let d = self.dim();
        Ok(Lattice { name: format!("{}*", self.name), basis: (0..d).map(|i| (0..d).map(|j| inv[(i, j)]).collect()).collect() })
    }

    /// Lattice points x with |x| ≤ radius, excluding 0 when `skip_zero`.
    pub fn vectors_within(&self, radius: f64, skip_zero: bool) -> Vec<Vec<f64>> {
        let d = self.dim();
        let m = self.columns();
        let inv = m.clone().try_inverse().expect("unit-density basis");
        let bound: Vec<i64> = (0..d)
            .map(|i| ((0..d).map(|j| inv[(i, j)].powi(2)).sum::<f64>().sqrt() * radius).ceil() as i64)
            .collect();
        let mut out = Vec::new();
        let mut n: Vec<i64> = bound.iter().map(|b| -b).collect();
        let r2 = radius * radius;
        loop {
            let x: Vec<f64> = (0..d).map(|i| (0..d).map(|j| m[(i, j)] * n[j] as f64).sum()).collect();
            let nx: f64 = x.iter().map(|v| v * v).sum();
            if nx <= r2 && !(skip_zero && n.iter().all(|&v| v == 0)) {
                out.push(x);
            }
            let mut k = 0;
            loop {
                n[k] += 1;
                if n[k] <= bound[k] {
                    break;
                }
                n[k] = -bound[k];
                k += 1;
                if k == d {
                    return out;
                }
            }
        }
    }

    fn contains_point(&self, x: &[f64]) -> bool {
        let inv = self.columns().try_inverse().expect("unit-density basis");
        let d = self.dim();
        (0..d).all(|i| {
            let c: f64 = (0..d).map(|j| inv[(i, j)] * x[j]).sum();
            (c - c.round()).abs() < 1e-9
        })
    }

    /// Smallest L such that L·e_i ∈ Λ for all i, if one exists among short vectors.
    pub fn cubic_period(&self) -> Option<f64> {
        let d = self.dim();
        let mut cands: Vec<f64> = self
            .vectors_within(4.0, true)
            .into_iter()
            .filter(|x| x[0] > 0.0 && x[1..].iter().all(|v| v.abs() < 1e-9))
            .map(|x| x[0])
            .collect();
        cands.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cands.into_iter().find(|&l| {
            (0..d).all(|i| {
                let mut e = vec![0.0; d];
                e[i] = l;
                self.contains_point(&e)
            })
        })
    }
}

/// Λ ∩ K for the half-open cube K.
pub fn lattice_in_cube(l: &Lattice, k: &CubeDomain) -> Result<PointConfiguration> {
    let d = l.dim();
    check_dim(d, k.dim())?;
    let m = l.columns();
    let inv = m.clone().try_inverse().ok_or_else(|| param("basis", "basis is singular"))?;
    let lo = k.lower();
    let hi = k.upper();
    let mut nmin = vec![i64::MAX; d];
    let mut nmax = vec![i64::MIN; d];
    for mask in 0..(1usize << d) {
        let v: Vec<f64> = (0..d).map(|i| if (mask >> i) & 1 == 1 { hi[i] } else { lo[i] }).collect();
        for i in 0..d {
            let c: f64 = (0..d).map(|j| inv[(i, j)] * v[j]).sum();
            nmin[i] = nmin[i].min(c.floor() as i64 - 1);
            nmax[i] = nmax[i].max(c.ceil() as i64 + 1);
        }
    }
    let mut pts = Vec::new();
    let mut n = nmin.clone();
    loop {
        let x: Vec<f64> = (0..d).map(|i| (0..d).map(|j| m[(i, j)] * n[j] as f64).sum()).collect();
        if k.contains(&x) {
            pts.push(x);
        }
        let mut a = 0;
        loop {
            n[a] += 1;
            if n[a] <= nmax[a] {
                break;
            }
            n[a] = nmin[a];
            a += 1;
            if a == d {
                return Ok(PointConfiguration { dim: d, points: pts });
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeMethod {
    /// Theta-function (Ewald) split of the continued lattice sum.
    Ewald,
    /// E_Jel of Λ ∩ K over growing cubes, extrapolated.
    Windowed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeConstant {
    pub lattice: String,
    pub s: f64,
    pub d: usize,
    pub method: LatticeMethod,
    /// Per point, energy normalized with Σ_{p≠q} (both orders).
    pub value: f64,
    pub error: f64,
    /// Same constant with the pair sum counted once per unordered pair.
    pub half_value: f64,
    pub half_error: f64,
    /// (N, E/N) for the windowed method.
    pub series: Vec<(f64, f64)>,
    pub warning: Option<String>,
}

/// Analytically continued Σ'_{λ∈Λ} |λ|^{-s} of a unit-density lattice,
/// returned with a truncation estimate.
pub fn lattice_zeta(k: &RieszKernel, l: &Lattice) -> Result<(f64, f64)> {
    check_dim(k.d, l.dim())?;
    let (s, d) = (k.s, k.d as f64);
    let dual = l.dual()?;
    let radius = 7.0;
    let term = |v: &Vec<f64>, a: f64| {
        let x = PI * v.iter().map(|t| t * t).sum::<f64>();
        x.powf(-a) * upper_gamma(a, x)
    };
    let mut direct: Vec<(f64, f64)> = l
        .vectors_within(radius, true)
        .iter()
        .map(|v| (v.iter().map(|t| t * t).sum::<f64>(), term(v, s / 2.0)))
        .collect();
    let mut recip: Vec<(f64, f64)> = dual
        .vectors_within(radius, true)
        .iter()
        .map(|v| (v.iter().map(|t| t * t).sum::<f64>(), term(v, (d - s) / 2.0)))
        .collect();
    // shell-ordered accumulation, small terms first
    direct.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    recip.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let outer = |v: &[(f64, f64)]| v.iter().filter(|(r2, _)| *r2 > (radius - 1.0).powi(2)).map(|x| x.1.abs()).sum::<f64>();
    let sd: f64 = direct.iter().map(|x| x.1).sum();
    let sr: f64 = recip.iter().map(|x| x.1).sum();
    let total = sd + sr - 2.0 / (d - s) - 2.0 / s;
    let pref = PI.powf(s / 2.0) / gamma_fn(s / 2.0);
    let err = pref * (outer(&direct) + outer(&recip)) + 1e-14 * (pref * total).abs();
    Ok((pref * total, err))
}

/// Default window multiples of the cubic period.
pub fn default_windows(d: usize) -> Vec<usize> {
    match d {
        1 => vec![16, 32, 64, 128, 256, 512],
        2 => vec![6, 8, 12, 16, 24, 32],
        _ => vec![3, 4, 5, 6, 7, 8],
    }
}

/// E_Jel(K, Λ ∩ K)/N over windows K of side m·L (L the cubic period).
pub fn windowed_energies(k: &RieszKernel, l: &Lattice, multiples: &[usize]) -> Result<Vec<(f64, f64)>> {
    check_dim(k.d, l.dim())?;
    let period = l
        .cubic_period()
        .ok_or_else(|| Error::Unsupported(format!("lattice {} has no cubic period; windowed sums need one", l.name)))?;
    // centre the window on the mean of one period's points
    let cell = CubeDomain::new(vec![0.5 * period; k.d], period)?;
    let inside = lattice_in_cube(l, &cell)?;
    let n0 = inside.len() as f64;
    let mean: Vec<f64> = inside.barycenter_sum().iter().map(|b| b / n0).collect();
    let mut out = Vec::with_capacity(multiples.len());
    for &m in multiples {
        if m == 0 {
            return Err(param("windows", "window multiples must be positive"));
        }
        let side = m as f64 * period;
        let lower: Vec<f64> = mean.iter().map(|c| c - 0.5 * period).collect();
        let center: Vec<f64> = lower.iter().map(|x| x + 0.5 * side).collect();
        let win = CubeDomain::new(center, side)?;
        let pts = lattice_in_cube(l, &win)?;
        let n = pts.len() as f64;
        if (n - win.volume()).abs() > 1e-6 * n.max(1.0) {
            return Err(Error::Construction(format!("window holds {n} points for volume {}", win.volume())));
        }
        let e = e_jel(k, &win, &pts)?;
        out.push((n, e.total / n));
    }
    Ok(out)
}

/// C^lattice estimate for a lattice. `method = None` picks Ewald for s = d − 2
/// and windowed sums otherwise.
pub fn periodic_energy_per_point(
    k: &RieszKernel,
    l: &Lattice,
    method: Option<LatticeMethod>,
    window_sequence: &[usize],
) -> Result<LatticeConstant> {
    check_dim(k.d, l.dim())?;
    let df = k.d as f64;
    if k.s < df - 2.0 - 1e-12 {
        return Err(param("s", format!("need d - 2 <= s < d, got s = {}", k.s)));
    }
    let method = method.unwrap_or(if k.is_coulomb() { LatticeMethod::Ewald } else { LatticeMethod::Windowed });
    let (value, error, series, warning) = match method {
        LatticeMethod::Ewald => {
            let (v, e) = lattice_zeta(k, l)?;
            (v, e, Vec::new(), None)
        }
        LatticeMethod::Windowed => {
            let windows: Vec<usize> = if window_sequence.is_empty() { default_windows(k.d) } else { window_sequence.to_vec() };
            let series = windowed_energies(k, l, &windows)?;
            let est = extrapolate_constant(&series, &FitModel::surface(k.d))?;
            let mut warning = None;
            if k.is_coulomb() {
                warning = Some("windowed sums at s = d - 2 carry a shape-dependent offset".to_string());
            }
            let last = series.last().map(|x| x.1).unwrap_or(est.value);
            let mut error = est.error;
            if (last - est.value).abs() > 0.5 * est.value.abs() {
                warning = Some("window sequence far from its extrapolated limit; error widened".into());
                error = error.max((last - est.value).abs());
            }
            (est.value, error, series, warning)
        }
    };
    Ok(LatticeConstant {
        lattice: l.name.clone(),
        s: k.s,
        d: k.d,
        method,
        value,
        error,
        half_value: 0.5 * value,
        half_error: 0.5 * error,
        series,
        warning,
    })
}

/// μ_{N,R₁} = R₁^{-d} Σ_{q ∈ base} 1_{K_R + (q − cell centre)}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedMarginal {
    pub base: PeriodicConfiguration,
    pub window: CubeDomain,
    pub alpha: f64,
    pub shifts: Vec<Vec<f64>>,
    pub weight: f64,
}

impl AveragedMarginal {
    /// Density at x.
    pub fn density(&self, x: &[f64]) -> f64 {
        let hits = self.shifts.iter().filter(|a| self.window.translate(a).contains(x)).count();
        self.weight * hits as f64
    }

    pub fn total_mass(&self) -> f64 {
        self.weight * self.shifts.len() as f64 * self.window.volume()
    }

    /// Number of points of the periodic configuration in K_R.
    pub fn n_points(&self) -> usize {
        self.base.restrict(&self.window).len()
    }
}

impl Density for AveragedMarginal {
    fn charges(&self) -> SignedChargeSystem {
        let mut sys = SignedChargeSystem::empty(self.window.dim());
        for a in &self.shifts {
            sys = sys.with_background(self.window.translate(a), self.weight);
        }
        sys
    }

    fn mass(&self) -> f64 {
        self.total_mass()
    }

    fn self_pairing(&self, k: &RieszKernel) -> Result<f64> {
        // depends only on differences of shifts
        let n = self.shifts.len();
        let mut cache: Vec<(Vec<f64>, f64)> = Vec::new();
        let mut total = 0.0;
        for i in 0..n {
            for j in i..n {
                let diff: Vec<f64> = self.shifts[i].iter().zip(&self.shifts[j]).map(|(a, b)| a - b).collect();
                let hit = cache.iter().find(|(dv, _)| dv.iter().zip(&diff).all(|(a, b)| (a - b).abs() < 1e-14 * self.window.side));
                let v = match hit {
                    Some((_, v)) => *v,
                    None => {
                        let v = cube_cube_integral(k, &self.window.translate(&diff), &self.window)?;
                        cache.push((diff, v));
                        v
                    }
                };
                total += if i == j { v } else { 2.0 * v };
            }
        }
        Ok(self.weight * self.weight * total)
    }

    fn potential(&self, k: &RieszKernel, x: &[f64]) -> Result<f64> {
        let mut v = 0.0;
        for a in &self.shifts {
            v += point_cube_integral(k, &self.window.translate(a), x)?;
        }
        Ok(self.weight * v)
    }
}

fn window_aligned(base: &PeriodicConfiguration, window: &CubeDomain) -> Result<()> {
    let r1 = base.cell.side;
    let ratio = window.side / r1;
    if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
        return Err(param("window", format!("R/R1 must be a positive integer, got {ratio}")));
    }
    for (a, b) in window.lower().iter().zip(base.cell.lower()) {
        let t = (a - b) / r1;
        if (t - t.round()).abs() > 1e-9 {
            return Err(param("window", "window corners must lie on the periodicity grid"));
        }
    }
    if !base.is_unit_density() {
        return Err(param("base", format!("need R1^d = {} points per cell, got {}", base.cell.volume(), base.base_points.len())));
    }
    Ok(())
}

pub fn averaged_plan_marginal(base: &PeriodicConfiguration, window: &CubeDomain) -> Result<AveragedMarginal> {
    check_dim(base.cell.dim(), window.dim())?;
    window_aligned(base, window)?;
    let d = window.dim();
    let shifts = base
        .base_points
        .points
        .iter()
        .map(|q| q.iter().zip(&base.cell.center).map(|(a, c)| a - c).collect())
        .collect();
    let r = window.side;
    let r1 = base.cell.side;
    Ok(AveragedMarginal {
        base: base.clone(),
        window: window.clone(),
        alpha: (1.0 - r1 / r).powi(d as i32),
        shifts,
        weight: r1.powi(-(d as i32)),
    })
}

/// E_UEG(μ_{N,R₁}, ν|_{K_R}) = Σ_{p≠q} c(p − q) − ⟨μ_{N,R₁}, μ_{N,R₁}⟩_s.
pub fn plan_energy_ueg(k: &RieszKernel, base: &PeriodicConfiguration, window: &CubeDomain) -> Result<f64> {
    let mu = averaged_plan_marginal(base, window)?;
    let pts = base.restrict(window);
    Ok(pair_sum(k, &pts)? - mu.self_pairing(k)?)
}

/// Reflects a cell of side R₁/2 through its lower faces into a zero-barycenter
/// cell of side R₁ centred at the old lower corner.
pub fn reflect_symmetrize(base_cell: &PeriodicConfiguration) -> Result<PeriodicConfiguration> {
    let d = base_cell.cell.dim();
    let lo = base_cell.cell.lower();
    let hi = base_cell.cell.upper();
    for (i, p) in base_cell.base_points.points.iter().enumerate() {
        for a in 0..d {
            if !(p[a] > lo[a] && p[a] < hi[a]) {
                return Err(Error::Domain { index: i });
            }
        }
    }
    let mut pts = Vec::with_capacity(base_cell.base_points.len() << d);
    for mask in 0..(1usize << d) {
        for p in &base_cell.base_points.points {
            pts.push((0..d).map(|a| if (mask >> a) & 1 == 1 { 2.0 * lo[a] - p[a] } else { p[a] }).collect());
        }
    }
    let cell = CubeDomain::new(lo, 2.0 * base_cell.cell.side)?;
    PeriodicConfiguration::new(cell, PointConfiguration::new(d, pts)?, true)
}
