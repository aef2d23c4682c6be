//! Swiss-cheese ball packings, Fefferman–Gregg parameters and kernel split,
//! and the almost-subadditivity experiment for minimum jellium energies.

use crate::error::{param, Error, Result};
use crate::jellium::{minimize_jellium, MinimizeOptions};
use crate::kernel::{check_dim, dist2, lens_volume, CubeDomain, PointConfiguration, RieszKernel};
use crate::quad;
use crate::special::ball_volume;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// C_d = 2^{d+1}/|B₁|.
pub fn cheese_constant(d: usize) -> f64 {
    2f64.powi(d as i32 + 1) / ball_volume(d)
}

/// Smallest admissible ratio r_{k+1}/r_k, 1 + 4√d|B₁|.
pub fn ladder_ratio(d: usize) -> f64 {
    1.0 + 4.0 * (d as f64).sqrt() * ball_volume(d)
}

/// Lower bound on the cube side, 8√d|B₁|(M + C_d) r_M.
pub fn min_cube_side(d: usize, m: usize, r_max: f64) -> f64 {
    8.0 * (d as f64).sqrt() * ball_volume(d) * (m as f64 + cheese_constant(d)) * r_max
}

/// C = max{1 + 4√d|B₁|, 8√d|B₁|, C_d}.
pub fn fg_constant(d: usize) -> f64 {
    let b = ball_volume(d);
    let sd = (d as f64).sqrt();
    (1.0 + 4.0 * sd * b).max(8.0 * sd * b).max(cheese_constant(d))
}

/// Open density window (1/(M+C_d+1), 1/(M+C_d)).
pub fn density_window(d: usize, m: usize) -> (f64, f64) {
    let c = m as f64 + cheese_constant(d);
    (1.0 / (c + 1.0), 1.0 / c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingCertificate {
    pub disjoint: bool,
    pub contained: bool,
    pub densities: Vec<f64>,
    pub window: (f64, f64),
    pub in_window: bool,
}

impl PackingCertificate {
    pub fn passed(&self) -> bool {
        self.disjoint && self.contained && self.in_window
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallPacking {
    pub cube: CubeDomain,
    pub ladder: Vec<f64>,
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    pub family: Vec<usize>,
    pub seed: u64,
    pub certificate: PackingCertificate,
}

impl BallPacking {
    pub fn dim(&self) -> usize {
        self.cube.dim()
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.ladder.len()];
        for &f in &self.family {
            c[f] += 1;
        }
        c
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let s = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&s)
    }

    /// Recomputes every certificate from the raw balls.
    pub fn verify(&self) -> PackingCertificate {
        verify_balls(&self.cube, &self.ladder, &self.centers, &self.radii, &self.family)
    }

    fn index(&self) -> BallIndex {
        let mut idx = BallIndex::new(&self.cube, &self.ladder);
        for (i, (c, f)) in self.centers.iter().zip(&self.family).enumerate() {
            idx.insert(*f, c, i);
        }
        idx
    }
}

/// One uniform grid of buckets per family, cell side = ball diameter.
struct BallIndex {
    lo: Vec<f64>,
    d: usize,
    grids: Vec<(f64, usize, Vec<Vec<u32>>)>,
}

impl BallIndex {
    fn new(cube: &CubeDomain, ladder: &[f64]) -> Self {
        let d = cube.dim();
        let grids = ladder
            .iter()
            .map(|&r| {
                let h = 2.0 * r;
                let n = ((cube.side / h).ceil() as usize).max(1);
                (h, n, vec![Vec::new(); n.pow(d as u32)])
            })
            .collect();
        Self { lo: cube.lower(), d, grids }
    }

    fn cell(&self, f: usize, x: &[f64]) -> Vec<i64> {
        let (h, n, _) = &self.grids[f];
        (0..self.d).map(|k| (((x[k] - self.lo[k]) / h).floor() as i64).clamp(0, *n as i64 - 1)).collect()
    }

    fn flat(&self, f: usize, c: &[i64]) -> usize {
        let n = self.grids[f].1;
        c.iter().rev().fold(0usize, |acc, &i| acc * n + i as usize)
    }

    fn insert(&mut self, f: usize, x: &[f64], id: usize) {
        let c = self.cell(f, x);
        let i = self.flat(f, &c);
        self.grids[f].2[i].push(id as u32);
    }

    /// Calls `g` with every ball id of family `f` whose bucket meets the box
    /// x ± reach.
    fn near(&self, f: usize, x: &[f64], reach: f64, mut g: impl FnMut(usize) -> bool) -> bool {
        let (h, n, buckets) = &self.grids[f];
        let lo: Vec<i64> = (0..self.d).map(|k| (((x[k] - reach - self.lo[k]) / h).floor() as i64).max(0)).collect();
        let hi: Vec<i64> = (0..self.d).map(|k| (((x[k] + reach - self.lo[k]) / h).floor() as i64).min(*n as i64 - 1)).collect();
        if (0..self.d).any(|k| lo[k] > hi[k]) {
            return true;
        }
        let mut cur = lo.clone();
        loop {
            for &id in &buckets[self.flat(f, &cur)] {
                if !g(id as usize) {
                    return false;
                }
            }
            let mut k = 0;
            loop {
                if k == self.d {
                    return true;
                }
                cur[k] += 1;
                if cur[k] <= hi[k] {
                    break;
                }
                cur[k] = lo[k];
                k += 1;
            }
        }
    }
}

fn verify_balls(cube: &CubeDomain, ladder: &[f64], centers: &[Vec<f64>], radii: &[f64], family: &[usize]) -> PackingCertificate {
    let d = cube.dim();
    let (lo, hi) = (cube.lower(), cube.upper());
    let m = ladder.len();
    let window = density_window(d, m);
    let ok_shape = centers.len() == radii.len()
        && centers.len() == family.len()
        && family.iter().zip(radii).all(|(&f, &r)| f < m && r == ladder[f])
        && centers.iter().all(|c| c.len() == d);
    if !ok_shape {
        return PackingCertificate { disjoint: false, contained: false, densities: vec![], window, in_window: false };
    }
    let contained = centers.iter().zip(radii).all(|(c, &r)| (0..d).all(|k| c[k] - r >= lo[k] && c[k] + r <= hi[k]));
    let mut idx = BallIndex::new(cube, ladder);
    for (i, (c, &f)) in centers.iter().zip(family).enumerate() {
        idx.insert(f, c, i);
    }
    let disjoint = (0..centers.len()).into_par_iter().all(|a| {
        (0..m).all(|f| {
            idx.near(f, &centers[a], radii[a] + ladder[f], |b| {
                if b == a {
                    return true;
                }
                let rr = radii[a] + radii[b];
                dist2(&centers[a], &centers[b]) > rr * rr
            })
        })
    });
    let vol = cube.volume();
    let mut densities = vec![0.0; m];
    for (&f, &r) in family.iter().zip(radii) {
        densities[f] += ball_volume(d) * r.powi(d as i32) / vol;
    }
    let in_window = densities.iter().all(|&c| c > window.0 && c < window.1);
    PackingCertificate { disjoint, contained, densities, window, in_window }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackingOptions {
    pub seed: u64,
    /// Number of jitter seeds tried before giving up.
    pub seed_budget: usize,
}

impl Default for PackingOptions {
    fn default() -> Self {
        Self { seed: 0, seed_budget: 8 }
    }
}

/// Checks the ladder and cube against the packing hypotheses.
pub fn check_ladder(cube: &CubeDomain, ladder: &[f64]) -> Result<()> {
    let d = cube.dim();
    if d < 2 {
        return Err(Error::Unsupported("ball packings need d >= 2".into()));
    }
    if ladder.is_empty() {
        return Err(param("ladder", "need at least one radius"));
    }
    if ladder.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(param("ladder", "radii must be positive and finite"));
    }
    let ratio = ladder_ratio(d);
    for w in ladder.windows(2) {
        if !(w[1] > ratio * w[0]) {
            return Err(param("ladder", format!("consecutive radii {} and {} violate r_(k+1) > {ratio:.4} r_k", w[0], w[1])));
        }
    }
    let need = min_cube_side(d, ladder.len(), *ladder.last().unwrap());
    if !(cube.side > need) {
        return Err(param("side", format!("cube side {} must exceed {need:.4}", cube.side)));
    }
    Ok(())
}

/// Greedy multi-scale packing of `cube` with one ball family per radius,
/// largest radius first, on jittered grids; each family stops at the count
/// closest to the centre of its density window.
pub fn swiss_cheese(cube: &CubeDomain, ladder: &[f64], opts: &PackingOptions) -> Result<BallPacking> {
    check_ladder(cube, ladder)?;
    let d = cube.dim();
    let m = ladder.len();
    let (wlo, whi) = density_window(d, m);
    let vol = cube.volume();
    let targets: Vec<usize> = ladder
        .iter()
        .map(|&r| {
            let unit = ball_volume(d) * r.powi(d as i32) / vol;
            let a = (wlo / unit).floor() as usize + 1;
            let b = (whi / unit).ceil() as usize - 1;
            if a > b {
                Err(Error::Construction(format!("no ball count of radius {r} lands in the density window")))
            } else {
                Ok((a + b) / 2)
            }
        })
        .collect::<Result<_>>()?;
    let mut achieved = Vec::new();
    for attempt in 0..opts.seed_budget.max(1) {
        let seed = opts.seed.wrapping_add(attempt as u64);
        let (centers, radii, family) = greedy_fill(cube, ladder, &targets, seed);
        let certificate = verify_balls(cube, ladder, &centers, &radii, &family);
        if certificate.passed() {
            return Ok(BallPacking { cube: cube.clone(), ladder: ladder.to_vec(), centers, radii, family, seed, certificate });
        }
        achieved = certificate.densities;
    }
    Err(Error::Construction(format!(
        "density window ({wlo:.6}, {whi:.6}) not reached after {} seeds; achieved {achieved:?}",
        opts.seed_budget.max(1)
    )))
}

fn greedy_fill(cube: &CubeDomain, ladder: &[f64], targets: &[usize], seed: u64) -> (Vec<Vec<f64>>, Vec<f64>, Vec<usize>) {
    let d = cube.dim();
    let (lo, hi) = (cube.lower(), cube.upper());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = BallIndex::new(cube, ladder);
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let mut radii = Vec::new();
    let mut family = Vec::new();
    for f in (0..ladder.len()).rev() {
        let r = ladder[f];
        let h = 2.2 * r;
        let jitter = 0.04 * r;
        let offset: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * h).collect();
        let counts: Vec<usize> = (0..d)
            .map(|k| {
                let span = hi[k] - lo[k] - 2.0 * r - offset[k];
                if span < 0.0 {
                    0
                } else {
                    (span / h).floor() as usize + 1
                }
            })
            .collect();
        let total: usize = counts.iter().product();
        let mut order: Vec<usize> = (0..total).collect();
        order.shuffle(&mut rng);
        let mut placed = 0;
        for id in order {
            if placed == targets[f] {
                break;
            }
            let mut rem = id;
            let x: Vec<f64> = (0..d)
                .map(|k| {
                    let i = rem % counts[k];
                    rem /= counts[k];
                    lo[k] + r + offset[k] + i as f64 * h
                })
                .collect();
            let x: Vec<f64> = x.iter().map(|v| v + jitter * (2.0 * rng.random::<f64>() - 1.0)).collect();
            if (0..d).any(|k| x[k] - r < lo[k] || x[k] + r > hi[k]) {
                continue;
            }
            let free = (0..ladder.len()).all(|g| {
                idx.near(g, &x, r + ladder[g], |b| {
                    let rr = r + radii[b];
                    dist2(&x, &centers[b]) > rr * rr
                })
            });
            if free {
                idx.insert(f, &x, centers.len());
                centers.push(x);
                radii.push(r);
                family.push(f);
                placed += 1;
            }
        }
    }
    (centers, radii, family)
}

/// Parameters of the Fefferman–Gregg split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionParams {
    pub d: usize,
    pub m: usize,
    pub l: f64,
    /// R_k = R₁ C^{k−1}.
    pub ladder: Vec<f64>,
    pub kappa: f64,
    pub c_const: f64,
    pub clamped: bool,
    /// M < log(l/R₁)/(3 log C).
    pub regime_ok: bool,
    /// l > 8√d|B₁|(M + C_d) R_M.
    pub packing_ok: bool,
    pub warnings: Vec<String>,
}

/// R₁ = n^{1/(3d(d+1))}, l = n^{1/(2d(d+1))},
/// M = ⌊log n / (18 d(d+1) log C)⌋ − 1 with n = min(N₁, N₂), M ≥ 1.
pub fn fg_parameters(n1: usize, n2: usize, d: usize) -> Result<DecompositionParams> {
    if d == 0 {
        return Err(param("d", "dimension must be positive"));
    }
    let n = n1.min(n2).max(1) as f64;
    let df = d as f64;
    let c = fg_constant(d);
    let r1 = n.powf(1.0 / (3.0 * df * (df + 1.0)));
    let l = n.powf(1.0 / (2.0 * df * (df + 1.0)));
    let raw = (n.ln() / (18.0 * df * (df + 1.0) * c.ln())).floor() as i64 - 1;
    let mut warnings = Vec::new();
    let clamped = raw < 1;
    let m = if clamped {
        warnings.push(format!("M = {raw} clamped to 1"));
        1
    } else {
        raw as usize
    };
    let ladder: Vec<f64> = (0..m).map(|k| r1 * c.powi(k as i32)).collect();
    let regime_ok = (m as f64) < (l / r1).ln() / (3.0 * c.ln());
    if !regime_ok {
        warnings.push(format!("M = {m} violates M < log(l/R1)/(3 log C) = {:.4}", (l / r1).ln() / (3.0 * c.ln())));
    }
    let packing_ok = d >= 2 && l > min_cube_side(d, m, *ladder.last().unwrap());
    if !packing_ok {
        warnings.push("cube side too small for a packing with this ladder".into());
    }
    Ok(DecompositionParams { d, m, l, ladder, kappa: 0.5, c_const: c, clamped, regime_ok, packing_ok, warnings })
}

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

/// ρ_κ(t), the normalized C^∞ bump on [1−κ, 1+κ].
pub fn rho_kappa(kappa: f64, t: f64) -> f64 {
    bump((t - 1.0) / kappa) / (kappa * bump_mass())
}

fn bump_mass() -> f64 {
    quad::integrate_composite(20, -1.0, 1.0, 16, bump)
}

fn sample_t(kappa: f64, rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = 2.0 * rng.random::<f64>() - 1.0;
        if rng.random::<f64>() < bump(u) * std::f64::consts::E {
            return 1.0 + kappa * u;
        }
    }
}

/// E_ω Σ_{A∈F_ω} 1_A(x₁)1_A(x₂) for |x₁ − x₂| = ρ, in closed form over y
/// and by quadrature over t.
pub fn localization_weight(packing: &BallPacking, kappa: f64, rho: f64) -> f64 {
    let d = packing.dim();
    let l = packing.cube.side;
    let counts = packing.counts();
    let mut cuts = vec![1.0 - kappa, 1.0 + kappa];
    for &r in &packing.ladder {
        let t = rho / (2.0 * r);
        if t > 1.0 - kappa && t < 1.0 + kappa {
            cuts.push(t);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let norm = kappa * bump_mass();
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += quad::integrate_composite(20, w[0], w[1], 24, |t| {
            let lens: f64 = packing.ladder.iter().zip(&counts).map(|(&r, &n)| n as f64 * lens_volume(d, 2.0 * t * r, rho)).sum();
            bump((t - 1.0) / kappa) / norm * lens / (t * l).powi(d as i32)
        });
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FgSplitOptions {
    pub kappa: f64,
    pub samples: usize,
    pub seed: u64,
    /// The split constant C; defaults to `fg_constant(d)`.
    pub c_const: Option<f64>,
}

impl Default for FgSplitOptions {
    fn default() -> Self {
        Self { kappa: 0.5, samples: 2000, seed: 0, c_const: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FgSplit {
    /// Σ_{i≠j} c(x_i − x_j).
    pub full: f64,
    /// M/(M + C).
    pub weight: f64,
    /// Monte-Carlo estimate of weight · E_ω Σ_{i≠j} Σ_A 1_A 1_A c.
    pub localized: f64,
    pub localized_se: f64,
    /// The same quantity from the closed-form ω-average.
    pub localized_exact: f64,
    /// full − localized.
    pub residual: f64,
    /// weight · Σ_{i≠j} w(x_i − x_j) with w = c/weight − E_ω Σ_A 1_A 1_A c.
    pub residual_exact: f64,
    /// |localized + residual_exact − full| / localized_se.
    pub z_score: f64,
    pub passed: bool,
}

/// Monte-Carlo evaluation of the ball-localized part of the pair energy
/// over random dilations and translations of the periodized packing.
pub fn fg_energy_split(k: &RieszKernel, config: &PointConfiguration, packing: &BallPacking, opts: &FgSplitOptions) -> Result<FgSplit> {
    check_dim(k.d, config.dim)?;
    check_dim(k.d, packing.dim())?;
    if !(opts.kappa > 0.0 && opts.kappa <= 0.5) {
        return Err(param("kappa", "need 0 < kappa <= 1/2"));
    }
    if opts.samples < 2 {
        return Err(param("samples", "need at least two Monte-Carlo samples"));
    }
    if let Some((i, j)) = config.coincidence() {
        return Err(Error::SingularPair { i, j });
    }
    let d = k.d;
    let n = config.len();
    let m = packing.ladder.len() as f64;
    let c = opts.c_const.unwrap_or_else(|| fg_constant(d));
    let weight = m / (m + c);
    let mut full = 0.0;
    let mut loc_exact = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let r = dist2(&config.points[i], &config.points[j]).sqrt();
            let cij = r.powf(-k.s);
            full += 2.0 * cij;
            loc_exact += 2.0 * weight * localization_weight(packing, opts.kappa, r) * cij;
        }
    }
    let residual_exact = full - loc_exact;
    let idx = packing.index();
    let lo = packing.cube.lower();
    let l = packing.cube.side;
    let values: Vec<f64> = (0..opts.samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(s as u64);
            let t = sample_t(opts.kappa, &mut rng);
            let y: Vec<f64> = (0..d).map(|_| (rng.random::<f64>() - 0.5) * l * t).collect();
            let mut labels: Vec<(usize, Vec<i64>, usize)> = Vec::new();
            for (pi, x) in config.points.iter().enumerate() {
                let u: Vec<f64> = (0..d).map(|q| (x[q] - y[q]) / t).collect();
                let cell: Vec<i64> = (0..d).map(|q| ((u[q] - lo[q]) / l).floor() as i64).collect();
                let v: Vec<f64> = (0..d).map(|q| u[q] - cell[q] as f64 * l).collect();
                let mut hit = None;
                for f in 0..packing.ladder.len() {
                    let r = packing.ladder[f];
                    idx.near(f, &v, r, |b| {
                        if dist2(&v, &packing.centers[b]) < r * r {
                            hit = Some(b);
                            false
                        } else {
                            true
                        }
                    });
                    if hit.is_some() {
                        break;
                    }
                }
                if let Some(b) = hit {
                    labels.push((b, cell, pi));
                }
            }
            labels.sort();
            let mut val = 0.0;
            let mut a = 0;
            while a < labels.len() {
                let mut b = a + 1;
                while b < labels.len() && labels[b].0 == labels[a].0 && labels[b].1 == labels[a].1 {
                    b += 1;
                }
                for i in a..b {
                    for j in i + 1..b {
                        val += 2.0 * dist2(&config.points[labels[i].2], &config.points[labels[j].2]).powf(-0.5 * k.s);
                    }
                }
                a = b;
            }
            weight * val
        })
        .collect();
    let ns = values.len() as f64;
    let mean = values.iter().sum::<f64>() / ns;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (ns - 1.0);
    let se = (var / ns).sqrt();
    let gap = (mean + residual_exact - full).abs();
    let z = if se > 0.0 {
        gap / se
    } else if gap <= 1e-12 * (1.0 + full.abs()) {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(FgSplit {
        full,
        weight,
        localized: mean,
        localized_se: se,
        localized_exact: loc_exact,
        residual: full - mean,
        residual_exact,
        z_score: z,
        passed: z <= 3.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubadditivityReport {
    pub n1: usize,
    pub n2: usize,
    pub xi_total: f64,
    pub xi_1: f64,
    pub xi_2: f64,
    /// Ξ_{N₁+N₂} − Ξ_{N₁} − Ξ_{N₂}.
    pub excess: f64,
    /// (N₁ + N₂)/log min(N₁, N₂).
    pub budget_scale: f64,
    /// excess / budget_scale.
    pub c_add: f64,
    pub converged: bool,
}

/// Compares Ξ_{N₁+N₂} on a cube of volume N₁+N₂ with Ξ_{N₁} and Ξ_{N₂} on
/// separate cubes of volumes N₁ and N₂.
pub fn almost_subadditive_check(k: &RieszKernel, n1: usize, n2: usize, opts: &MinimizeOptions) -> Result<SubadditivityReport> {
    if n1 == 0 {
        return Err(param("N1", "need N1 >= 1"));
    }
    let d = k.d;
    let xi = |n: usize| -> Result<(f64, bool)> {
        if n == 0 {
            return Ok((0.0, true));
        }
        let cube = CubeDomain::anchored(d, (n as f64).powf(1.0 / d as f64))?;
        let r = minimize_jellium(k, &cube, n, opts)?;
        Ok((r.energy.total, r.converged))
    };
    let (xi_total, c0) = xi(n1 + n2)?;
    let (xi_1, c1) = xi(n1)?;
    let (xi_2, c2) = if n2 == n1 { (xi_1, c1) } else { xi(n2)? };
    let excess = if n2 == 0 { 0.0 } else { xi_total - xi_1 - xi_2 };
    let nmin = n1.min(n2);
    let budget_scale = if nmin >= 2 { (n1 + n2) as f64 / (nmin as f64).ln() } else { f64::INFINITY };
    let c_add = if budget_scale.is_finite() { excess / budget_scale } else { 0.0 };
    Ok(SubadditivityReport { n1, n2, xi_total, xi_1, xi_2, excess, budget_scale, c_add, converged: c0 && c1 && c2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_for_plane() {
        let (a, b) = density_window(2, 2);
        assert!((a - 0.18028).abs() < 1e-4 && (b - 0.21995).abs() < 1e-4);
        assert!((ladder_ratio(2) - 18.7715).abs() < 1e-3);
    }

    #[test]
    fn bump_normalized() {
        let total = quad::integrate_composite(20, 0.5, 1.5, 16, |t| rho_kappa(0.5, t));
        assert!((total - 1.0).abs() < 1e-12);
    }
}
