//! Jellium and uniform-electron-gas energies of finite configurations,
//! constrained minimization in a cube, and the associated bounds.

use crate::boxint;
use crate::error::{param, Error, Result};
use crate::kernel::{check_dim, dist2, CubeDomain, PointConfiguration, RieszKernel, UniformMeasure};
use crate::potentials::{cube_cube_integral, pairing, point_cube_integral, Density, SignedChargeSystem};
use crate::special::sphere_area;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnergyMode {
    Jellium,
    Ueg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub pair_sum: f64,
    pub attraction: f64,
    pub background_self: f64,
    pub total: f64,
    pub mode: EnergyMode,
}

impl EnergyBreakdown {
    fn jellium(pair_sum: f64, attraction: f64, background_self: f64) -> Self {
        Self {
            pair_sum,
            attraction,
            background_self,
            total: pair_sum - 2.0 * attraction + background_self,
            mode: EnergyMode::Jellium,
        }
    }

    fn ueg(pair_sum: f64, background_self: f64) -> Self {
        Self { pair_sum, attraction: 0.0, background_self, total: pair_sum - background_self, mode: EnergyMode::Ueg }
    }
}

fn check_config(k: &RieszKernel, config: &PointConfiguration) -> Result<()> {
    check_dim(k.d, config.dim)?;
    if let Some((i, j)) = config.coincidence() {
        return Err(Error::SingularPair { i, j });
    }
    Ok(())
}

/// Σ_{p≠q} |p − q|^{-s} (both orders counted).
pub fn pair_sum(k: &RieszKernel, config: &PointConfiguration) -> Result<f64> {
    check_config(k, config)?;
    let pts = &config.points;
    let rows: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .map(|i| (i + 1..pts.len()).map(|j| dist2(&pts[i], &pts[j]).powf(-0.5 * k.s)).sum())
        .collect();
    Ok(2.0 * rows.iter().sum::<f64>())
}

/// E_Jel(K, ν) = Σ_{p≠q} c(p−q) − 2Σ_p ∫_K c(p−y)dy + ∫∫_{K×K} c.
pub fn e_jel(k: &RieszKernel, domain: &CubeDomain, config: &PointConfiguration) -> Result<EnergyBreakdown> {
    check_dim(k.d, domain.dim())?;
    let pair = pair_sum(k, config)?;
    let att: Vec<f64> = config
        .points
        .par_iter()
        .map(|p| point_cube_integral(k, domain, p))
        .collect::<Result<_>>()?;
    let bg = cube_cube_integral(k, domain, domain)?;
    Ok(EnergyBreakdown::jellium(pair, att.iter().sum(), bg))
}

/// E_Jel written as ⟨ν − 1_K, ν − 1_K⟩*_s.
pub fn e_jel_pairing_form(k: &RieszKernel, domain: &CubeDomain, config: &PointConfiguration) -> Result<f64> {
    check_config(k, config)?;
    let sys = SignedChargeSystem::neutral_cell(config, &UniformMeasure::unit(domain.clone()));
    pairing(k, &sys, &sys, true)
}

/// E_UEG(μ, ν) = Σ_{p≠q} c(p−q) − ⟨μ, μ⟩_s.
pub fn e_ueg<M: Density + ?Sized>(k: &RieszKernel, mu: &M, config: &PointConfiguration) -> Result<EnergyBreakdown> {
    let pair = pair_sum(k, config)?;
    Ok(EnergyBreakdown::ueg(pair, mu.self_pairing(k)?))
}

/// 2⟨μ, ν − μ⟩_s.
pub fn jel_ueg_gap<M: Density + Sync + ?Sized>(k: &RieszKernel, mu: &M, config: &PointConfiguration) -> Result<f64> {
    check_config(k, config)?;
    let cross: Vec<f64> = config.points.par_iter().map(|p| mu.potential(k, p)).collect::<Result<_>>()?;
    Ok(2.0 * (cross.iter().sum::<f64>() - mu.self_pairing(k)?))
}

/// Pair kernel used during minimization: exact, or capped at radius η.
#[derive(Debug, Clone, Copy)]
struct PairKernel {
    s: f64,
    eta: f64,
}

impl PairKernel {
    /// (c(r), c'(r)/r) from r².
    fn eval(&self, r2: f64) -> (f64, f64) {
        if r2 <= self.eta * self.eta {
            (self.eta.powf(-self.s), 0.0)
        } else {
            let v = r2.powf(-0.5 * self.s);
            (v, -self.s * v / r2)
        }
    }
}

/// Jellium energy and gradient with respect to the flattened coordinates.
fn energy_and_gradient(k: &RieszKernel, domain: &CubeDomain, x: &[f64], pk: PairKernel) -> (f64, Vec<f64>) {
    let d = k.d;
    let n = x.len() / d;
    let lo = domain.lower();
    let hi = domain.upper();
    let per_point: Vec<(f64, f64, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = &x[i * d..(i + 1) * d];
            let mut g = vec![0.0; d];
            let mut e = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let q = &x[j * d..(j + 1) * d];
                let r2 = dist2(p, q);
                let (v, dv) = pk.eval(r2);
                e += v;
                for a in 0..d {
                    g[a] += 2.0 * dv * (p[a] - q[a]);
                }
            }
            let (att, ga) = boxint::point_box_with_gradient(k.s, &lo, &hi, p);
            for a in 0..d {
                g[a] -= 2.0 * ga[a];
            }
            (e, att, g)
        })
        .collect();
    let mut pair = 0.0;
    let mut att = 0.0;
    let mut grad = Vec::with_capacity(x.len());
    for (e, a, g) in per_point {
        pair += e;
        att += a;
        grad.extend(g);
    }
    (pair - 2.0 * att, grad)
}

/// Gradient of the jellium energy in the point positions (one row per point).
pub fn e_jel_gradient(k: &RieszKernel, domain: &CubeDomain, config: &PointConfiguration) -> Result<Vec<Vec<f64>>> {
    check_config(k, config)?;
    check_dim(k.d, domain.dim())?;
    let (_, g) = energy_and_gradient(k, domain, &config.flat(), PairKernel { s: k.s, eta: 0.0 });
    Ok(g.chunks(k.d).map(|c| c.to_vec()).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub restarts: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub anneal_stages: usize,
    pub memory: usize,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { restarts: 8, seed: 0, tolerance: 1e-6, max_iterations: 3000, anneal_stages: 3, memory: 12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizationResult {
    pub configuration: PointConfiguration,
    pub energy: EnergyBreakdown,
    pub separation: f64,
    pub restarts_used: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

struct Box_ {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Box_ {
    fn project(&self, x: &mut [f64]) {
        let d = self.lo.len();
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lo[i % d], self.hi[i % d]);
        }
    }

    /// Max-norm of x − P(x − g).
    fn projected_gradient_norm(&self, x: &[f64], g: &[f64]) -> f64 {
        let d = self.lo.len();
        x.iter()
            .zip(g)
            .enumerate()
            .map(|(i, (&xi, &gi))| (xi - (xi - gi).clamp(self.lo[i % d], self.hi[i % d])).abs())
            .fold(0.0, f64::max)
    }

    fn active(&self, i: usize, x: f64, g: f64) -> bool {
        let d = self.lo.len();
        (x <= self.lo[i % d] && g > 0.0) || (x >= self.hi[i % d] && g < 0.0)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct StageOutcome {
    x: Vec<f64>,
    f: f64,
    pg: f64,
}

/// Projected L-BFGS with Armijo backtracking.
fn lbfgs_stage(
    k: &RieszKernel,
    domain: &CubeDomain,
    bx: &Box_,
    x0: Vec<f64>,
    pk: PairKernel,
    opts: &MinimizeOptions,
    max_iter: usize,
) -> StageOutcome {
    let mut x = x0;
    bx.project(&mut x);
    let (mut f, mut g) = energy_and_gradient(k, domain, &x, pk);
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut pg = bx.projected_gradient_norm(&x, &g);
    for _ in 0..max_iter {
        if pg <= opts.tolerance {
            break;
        }
        let free: Vec<bool> = x.iter().zip(&g).enumerate().map(|(i, (&xi, &gi))| !bx.active(i, xi, gi)).collect();
        let mut q: Vec<f64> = g.iter().zip(&free).map(|(&gi, &fr)| if fr { gi } else { 0.0 }).collect();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = mem.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        } else {
            let gn = g.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
            let scale = 0.1 * (domain.side / (x.len() as f64 / k.d as f64).powf(1.0 / k.d as f64)) / gn;
            q.iter_mut().for_each(|v| *v *= scale);
        }
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().zip(&free).map(|(&v, &fr)| if fr { -v } else { 0.0 }).collect();
        if dot(&dir, &g) >= 0.0 {
            mem.clear();
            let gn = g.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
            let scale = 0.1 * domain.side / (x.len() as f64).max(1.0) / gn;
            dir = g.iter().zip(&free).map(|(&gi, &fr)| if fr { -gi * scale } else { 0.0 }).collect();
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let mut xn: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            bx.project(&mut xn);
            let dx: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
            let decrease = dot(&g, &dx);
            if decrease >= 0.0 {
                step *= 0.5;
                continue;
            }
            let (fn_, gn_) = energy_and_gradient(k, domain, &xn, pk);
            if fn_.is_finite() && fn_ <= f + 1e-4 * decrease {
                accepted = Some((xn, fn_, gn_, dx));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fn_, gn_, dx)) = accepted else {
            if mem.is_empty() {
                break;
            }
            mem.clear();
            continue;
        };
        let dy: Vec<f64> = gn_.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&dx, &dy);
        if sy > 1e-12 * dot(&dx, &dx).sqrt() * dot(&dy, &dy).sqrt() {
            mem.push_back((dx, dy, 1.0 / sy));
            if mem.len() > opts.memory {
                mem.pop_front();
            }
        }
        x = xn;
        f = fn_;
        g = gn_;
        pg = bx.projected_gradient_norm(&x, &g);
    }
    StageOutcome { x, f, pg }
}

/// Initial positions: cell centres of the smallest Z^d grid holding N points.
fn initial_positions(domain: &CubeDomain, d: usize, n: usize, restart: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let m = (1..).find(|m: &usize| m.pow(d as u32) >= n).unwrap();
    let h = domain.side / m as f64;
    let lo = domain.lower();
    let total = m.pow(d as u32);
    let mut cells: Vec<usize> = (0..total).collect();
    if restart > 0 && total > n {
        for i in 0..n {
            let j = rng.random_range(i..total);
            cells.swap(i, j);
        }
    }
    let mut out = Vec::with_capacity(n * d);
    for &c in cells.iter().take(n) {
        let mut rem = c;
        for a in 0..d {
            let idx = rem % m;
            rem /= m;
            let jitter = if restart > 0 { rng.random_range(-0.25..0.25) } else { 0.0 };
            out.push(lo[a] + (idx as f64 + 0.5 + jitter) * h);
        }
    }
    out
}

fn run_restart(k: &RieszKernel, domain: &CubeDomain, n: usize, opts: &MinimizeOptions, restart: usize) -> StageOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(restart as u64);
    let d = k.d;
    let margin = 1e-9 * domain.side;
    let bx = Box_ {
        lo: domain.lower().iter().map(|v| v + margin).collect(),
        hi: domain.upper().iter().map(|v| v - margin).collect(),
    };
    let mut x = initial_positions(domain, d, n, restart, &mut rng);
    let mut eta = 0.1 * domain.side * (n as f64).powf(-1.0 / d as f64);
    let stage_iter = (opts.max_iterations / 4).max(50);
    for _ in 0..opts.anneal_stages {
        let out = lbfgs_stage(k, domain, &bx, x, PairKernel { s: k.s, eta }, opts, stage_iter);
        x = out.x;
        eta *= 0.5;
    }
    let out = lbfgs_stage(k, domain, &bx, x, PairKernel { s: k.s, eta: 0.0 }, opts, opts.max_iterations);
    if out.pg > opts.tolerance {
        // one more attempt from the best point with fresh memory
        return lbfgs_stage(k, domain, &bx, out.x, PairKernel { s: k.s, eta: 0.0 }, opts, opts.max_iterations);
    }
    out
}

/// Ξ_{N,s}(K): multi-start local minimization of E_Jel(K, ·) over N points in K.
pub fn minimize_jellium(k: &RieszKernel, domain: &CubeDomain, n: usize, opts: &MinimizeOptions) -> Result<MinimizationResult> {
    check_dim(k.d, domain.dim())?;
    if n == 0 {
        return Err(param("n", "need at least one point"));
    }
    if opts.restarts == 0 {
        return Err(param("restarts", "need at least one restart"));
    }
    if !(opts.tolerance > 0.0) {
        return Err(param("tolerance", "must be positive"));
    }
    let runs: Vec<StageOutcome> = (0..opts.restarts).into_par_iter().map(|r| run_restart(k, domain, n, opts, r)).collect();
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        let better = r.f < runs[best].f;
        if better {
            best = i;
        }
    }
    let out = &runs[best];
    let configuration = PointConfiguration::from_flat(k.d, &out.x);
    let energy = e_jel(k, domain, &configuration)?;
    Ok(MinimizationResult {
        separation: configuration.min_separation(),
        configuration,
        energy,
        restarts_used: opts.restarts,
        converged: out.pg <= opts.tolerance,
        gradient_norm: out.pg,
    })
}

/// r_sep(ε) = r_B (4d/ε + 1)^{-1/(d−2)} with r_B = (d/|S^{d−1}|)^{1/d}.
pub fn separation_radius(k: &RieszKernel, epsilon: f64) -> Result<f64> {
    let d = k.d;
    if d < 3 {
        return Err(Error::Unsupported(format!("separation radius is only available for d >= 3 (got d = {d})")));
    }
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(param("epsilon", format!("need 0 < epsilon <= 2, got {epsilon}")));
    }
    let df = d as f64;
    let rb = (df / sphere_area(d)).powf(1.0 / df);
    Ok(rb * (4.0 * df / epsilon + 1.0).powf(-1.0 / (df - 2.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationCertificate {
    pub passed: bool,
    pub min_distance: f64,
    pub radius: f64,
}

pub fn check_separation(result: &MinimizationResult, k: &RieszKernel, epsilon: f64) -> Result<SeparationCertificate> {
    let radius = separation_radius(k, epsilon)?;
    let df = k.d as f64;
    if k.s < df - 2.0 - 1e-12 || k.s > df - epsilon + 1e-12 {
        return Err(param("epsilon", format!("need d - 2 <= s <= d - epsilon, got s = {}, epsilon = {epsilon}", k.s)));
    }
    let min_distance = result.configuration.min_separation();
    Ok(SeparationCertificate { passed: min_distance >= radius, min_distance, radius })
}

/// −4N|S^{d−1}|/(d − s).
pub fn jellium_lower_bound(k: &RieszKernel, n: usize) -> f64 {
    -4.0 * n as f64 * sphere_area(k.d) / (k.d as f64 - k.s)
}

/// Mean of E_Jel(K, ·) over N independent uniform points in K.
pub fn jellium_average_energy(k: &RieszKernel, domain: &CubeDomain, n: usize) -> Result<f64> {
    let cc = cube_cube_integral(k, domain, domain)?;
    let v = domain.volume();
    let nf = n as f64;
    Ok(cc * (nf * (nf - 1.0) / (v * v) - 2.0 * nf / v + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dim_examples() {
        let k = RieszKernel::new(0.5, 1).unwrap();
        let dom = CubeDomain::anchored(1, 1.0).unwrap();
        let c = PointConfiguration::new(1, vec![vec![0.5]]).unwrap();
        let e = e_jel(&k, &dom, &c).unwrap();
        assert!((e.total - (8.0 / 3.0 - 4.0 * 2f64.sqrt())).abs() < 1e-13);
        let mu = UniformMeasure::unit(dom.clone());
        assert!((e_ueg(&k, &mu, &c).unwrap().total + 8.0 / 3.0).abs() < 1e-13);
        let gap = jel_ueg_gap(&k, &mu, &c).unwrap();
        assert!((gap - 2.0 * (2.0 * 2f64.sqrt() - 8.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn separation_radius_values() {
        let k = RieszKernel::new(1.0, 3).unwrap();
        let r = separation_radius(&k, 1.0).unwrap();
        assert!((r - (3.0 / (4.0 * std::f64::consts::PI)).powf(1.0 / 3.0) / 13.0).abs() < 1e-14);
        assert!(separation_radius(&RieszKernel::new(1.0, 2).unwrap(), 1.0).is_err());
    }
}
