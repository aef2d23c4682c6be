//! Multi-marginal optimal transport with Riesz costs on finite grids, the
//! exact one-dimensional monotone solver, exchange-correlation energies and
//! the grand-canonical relaxation.

use crate::error::{param, Error, Result};
use crate::kernel::{check_dim, dist2, CubeDomain, RieszKernel, UniformMeasure};
use crate::potentials::{cube_cube_integral, Density};
use crate::simplex::{self, SparseLp};
use crate::special::ball_volume;
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;

/// Probability weights on finitely many sites. `cell` is the side of the
/// cube each site stands for when the grid quantizes a density; it fixes the
/// diagonal part of ⟨μ, μ⟩.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMarginal {
    pub sites: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub cell: Option<f64>,
}

impl GridMarginal {
    pub fn new(sites: Vec<Vec<f64>>, weights: Vec<f64>, cell: Option<f64>) -> Result<Self> {
        if sites.is_empty() {
            return Err(param("sites", "at least one site is required"));
        }
        if sites.len() != weights.len() {
            return Err(param("weights", format!("{} weights for {} sites", weights.len(), sites.len())));
        }
        let d = sites[0].len();
        if d == 0 {
            return Err(param("sites", "dimension must be positive"));
        }
        for p in &sites {
            check_dim(d, p.len())?;
            if p.iter().any(|x| !x.is_finite()) {
                return Err(param("sites", "coordinates must be finite"));
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(param("weights", "weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(param("weights", format!("weights sum to {total}, expected 1")));
        }
        if let Some(h) = cell {
            if !(h > 0.0) || !h.is_finite() {
                return Err(param("cell", format!("must be positive, got {h}")));
            }
        }
        Ok(Self { sites, weights, cell })
    }

    /// m equal cells on [a, b], one site at each midpoint.
    pub fn uniform_interval(a: f64, b: f64, m: usize) -> Result<Self> {
        Self::from_density(&PiecewiseDensity::uniform(a, b)?, m)
    }

    /// Midpoint quantization with the exact mass of each cell.
    pub fn from_density(rho: &PiecewiseDensity, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(param("m", "need at least one cell"));
        }
        let (a, b) = rho.support();
        let h = (b - a) / m as f64;
        let sites = (0..m).map(|i| vec![a + (i as f64 + 0.5) * h]).collect();
        let mut weights: Vec<f64> = (0..m).map(|i| rho.mass_between(a + i as f64 * h, a + (i + 1) as f64 * h)).collect();
        let t: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= t);
        Self::new(sites, weights, Some(h))
    }

    /// Uniform weights on the `per_side^d` cell centres of a cube.
    pub fn uniform_cube(domain: &CubeDomain, per_side: usize) -> Result<Self> {
        if per_side == 0 {
            return Err(param("per_side", "need at least one cell per side"));
        }
        let d = domain.dim();
        let h = domain.side / per_side as f64;
        let lo = domain.lower();
        let m = per_side.pow(d as u32);
        let sites = (0..m)
            .map(|mut idx| {
                (0..d)
                    .map(|k| {
                        let i = idx % per_side;
                        idx /= per_side;
                        lo[k] + (i as f64 + 0.5) * h
                    })
                    .collect()
            })
            .collect();
        Self::new(sites, vec![1.0 / m as f64; m], Some(h))
    }

    /// Rows `x1,…,xd,weight`; a non-numeric first row is read as a header.
    pub fn from_csv_reader<R: Read>(reader: R, cell: Option<f64>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut sites = Vec::new();
        let mut weights = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            let vals: std::result::Result<Vec<f64>, _> = rec.iter().map(|f| f.parse::<f64>()).collect();
            let vals = match vals {
                Ok(v) => v,
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::Io(format!("row {}: {e}", line + 1))),
            };
            if vals.len() < 2 {
                return Err(Error::Io(format!("row {}: need coordinates and a weight", line + 1)));
            }
            let (w, x) = vals.split_last().unwrap();
            sites.push(x.to_vec());
            weights.push(*w);
        }
        Self::new(sites, weights, cell)
    }

    pub fn load(path: impl AsRef<Path>, cell: Option<f64>) -> Result<Self> {
        let f = std::fs::File::open(path.as_ref()).map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(f, cell)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (p, w) in self.sites.iter().zip(&self.weights) {
            for x in p {
                out.push_str(&format!("{x:e},"));
            }
            out.push_str(&format!("{w:e}\n"));
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.sites[0].len()
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Image under x ↦ αx.
    pub fn dilate(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(param("alpha", "dilation factor must be positive"));
        }
        Ok(Self {
            sites: self.sites.iter().map(|p| p.iter().map(|x| alpha * x).collect()).collect(),
            weights: self.weights.clone(),
            cell: self.cell.map(|h| alpha * h),
        })
    }

    /// Σ M_i μ_i / Σ M_i, merging coincident sites.
    pub fn mixture(components: &[(usize, &GridMarginal)]) -> Result<Self> {
        let total: usize = components.iter().map(|c| c.0).sum();
        if components.is_empty() || total == 0 {
            return Err(param("components", "need at least one component with positive particle number"));
        }
        let cell = components[0].1.cell;
        let mut sites: Vec<Vec<f64>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (mi, mu) in components {
            if mu.cell != cell {
                return Err(param("cell", "mixture components must share the cell size"));
            }
            for (p, w) in mu.sites.iter().zip(&mu.weights) {
                let f = *mi as f64 * w / total as f64;
                match sites.iter().position(|q| q == p) {
                    Some(i) => weights[i] += f,
                    None => {
                        sites.push(p.clone());
                        weights.push(f);
                    }
                }
            }
        }
        let t: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= t);
        Self::new(sites, weights, cell)
    }

    fn diagonal_term(&self, k: &RieszKernel) -> Result<f64> {
        let h = self.cell.ok_or_else(|| {
            Error::Unsupported("mean-field integral of an atomic marginal is infinite; set a cell size".into())
        })?;
        let c = CubeDomain::centered(k.d, h)?;
        Ok(cube_cube_integral(k, &c, &c)? / h.powi(2 * k.d as i32))
    }

    /// Bilinear ⟨μ, ν⟩: point interactions between distinct sites, the
    /// averaged cell self-energy for coincident ones.
    pub fn pairing(&self, k: &RieszKernel, other: &GridMarginal) -> Result<f64> {
        check_dim(k.d, self.dim())?;
        check_dim(k.d, other.dim())?;
        let mut diag = None;
        let mut total = 0.0;
        for (p, wp) in self.sites.iter().zip(&self.weights) {
            for (q, wq) in other.sites.iter().zip(&other.weights) {
                if wp * wq == 0.0 {
                    continue;
                }
                let r2 = dist2(p, q);
                if r2 == 0.0 {
                    if self.cell != other.cell {
                        return Err(param("cell", "coincident sites with different cell sizes"));
                    }
                    if diag.is_none() {
                        diag = Some(self.diagonal_term(k)?);
                    }
                    total += wp * wq * diag.unwrap();
                } else {
                    total += wp * wq * r2.powf(-0.5 * k.s);
                }
            }
        }
        Ok(total)
    }

    /// Common density level ρ₀ when all positive weights are equal.
    pub fn uniform_level(&self) -> Option<f64> {
        let h = self.cell?;
        let pos: Vec<f64> = self.weights.iter().copied().filter(|w| *w > 0.0).collect();
        let w0 = pos[0];
        if pos.iter().all(|w| (w - w0).abs() <= 1e-12 * w0) {
            Some(w0 / h.powi(self.dim() as i32))
        } else {
            None
        }
    }

    pub fn diameter(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                m = m.max(dist2(&self.sites[i], &self.sites[j]));
            }
        }
        m.sqrt()
    }
}

/// Piecewise-constant probability density on an interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseDensity {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseDensity {
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || values.len() + 1 != breaks.len() {
            return Err(param("breaks", "need K+1 increasing breakpoints for K values"));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(param("breaks", "breakpoints must be finite and strictly increasing"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(param("values", "density values must be finite and nonnegative"));
        }
        let mass: f64 = values.iter().zip(breaks.windows(2)).map(|(v, w)| v * (w[1] - w[0])).sum();
        if (mass - 1.0).abs() > 1e-9 {
            return Err(param("values", format!("density has mass {mass}, expected 1")));
        }
        Ok(Self { breaks, values })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(b > a) {
            return Err(param("interval", "need a < b"));
        }
        Self::new(vec![a, b], vec![1.0 / (b - a)])
    }

    pub fn support(&self) -> (f64, f64) {
        (self.breaks[0], *self.breaks.last().unwrap())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.mass_between(self.breaks[0], x)
    }

    pub fn mass_between(&self, a: f64, b: f64) -> f64 {
        self.values
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(v, w)| v * (b.min(w[1]) - a.max(w[0])).max(0.0))
            .sum()
    }

    /// Knots (u, F^{-1}(u)) of the piecewise-linear quantile function.
    fn quantile_knots(&self) -> Vec<(f64, f64)> {
        let mut knots = vec![(0.0, self.breaks[0])];
        let mut u = 0.0;
        for (v, w) in self.values.iter().zip(self.breaks.windows(2)) {
            let du = v * (w[1] - w[0]);
            if du > 0.0 {
                u += du;
                knots.push((u, w[1]));
            } else {
                // flat piece of the cdf: a jump of the quantile
                knots.push((u, w[1]));
            }
        }
        let n = knots.len();
        knots[n - 1].0 = 1.0;
        knots
    }

    /// Right-continuous quantile F^{-1}(u).
    pub fn quantile(&self, u: f64) -> f64 {
        quantile_at(&self.quantile_knots(), u, false)
    }

    /// ⟨ρ, ρ⟩_s in closed form (d = 1, s < 1).
    pub fn self_pairing(&self, k: &RieszKernel) -> Result<f64> {
        if k.d != 1 {
            return Err(Error::Dimension { expected: 1, got: k.d });
        }
        let g = |t: f64| t.abs().powf(2.0 - k.s) / ((1.0 - k.s) * (2.0 - k.s));
        let mut total = 0.0;
        for (vi, wi) in self.values.iter().zip(self.breaks.windows(2)) {
            for (vj, wj) in self.values.iter().zip(self.breaks.windows(2)) {
                let (a, b, c, d) = (wi[0], wi[1], wj[0], wj[1]);
                total += vi * vj * (g(b - c) + g(a - d) - g(b - d) - g(a - c));
            }
        }
        Ok(total)
    }
}

fn quantile_at(knots: &[(f64, f64)], u: f64, left: bool) -> f64 {
    let i = if left {
        knots.partition_point(|k| k.0 < u)
    } else {
        knots.partition_point(|k| k.0 <= u)
    };
    if i == 0 {
        return knots[0].1;
    }
    if i >= knots.len() {
        return knots[knots.len() - 1].1;
    }
    let (u0, x0) = knots[i - 1];
    let (u1, x1) = knots[i];
    if u1 == u0 {
        return if left { x0 } else { x1 };
    }
    x0 + (x1 - x0) * (u - u0) / (u1 - u0)
}

/// Anything with a finite mean-field energy ⟨μ, μ⟩_s.
pub trait MeanField {
    fn mean_field(&self, k: &RieszKernel) -> Result<f64>;
}

impl MeanField for GridMarginal {
    fn mean_field(&self, k: &RieszKernel) -> Result<f64> {
        self.pairing(k, self)
    }
}

impl MeanField for PiecewiseDensity {
    fn mean_field(&self, k: &RieszKernel) -> Result<f64> {
        self.self_pairing(k)
    }
}

impl MeanField for UniformMeasure {
    fn mean_field(&self, k: &RieszKernel) -> Result<f64> {
        let m = self.mass();
        Ok(self.self_pairing(k)? / (m * m))
    }
}

/// A symmetric plan stored on sorted site tuples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePlan {
    pub n: usize,
    pub tuples: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
}

impl DiscretePlan {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// One-body marginal on `m` sites.
    pub fn marginal(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m];
        for (t, w) in self.tuples.iter().zip(&self.weights) {
            for &i in t {
                out[i] += w / self.n as f64;
            }
        }
        out
    }

    /// Σ_{i≠j} c over the plan.
    pub fn cost(&self, k: &RieszKernel, marginal: &GridMarginal) -> Result<f64> {
        let mut total = 0.0;
        for (t, w) in self.tuples.iter().zip(&self.weights) {
            total += w * tuple_cost(k, &marginal.sites, t)?;
        }
        Ok(total)
    }

    /// Smallest distance between two particles of any support tuple.
    pub fn min_separation(&self, marginal: &GridMarginal) -> f64 {
        let mut m = f64::INFINITY;
        for (t, w) in self.tuples.iter().zip(&self.weights) {
            if *w <= 0.0 {
                continue;
            }
            for a in 0..t.len() {
                for b in a + 1..t.len() {
                    m = m.min(dist2(&marginal.sites[t[a]], &marginal.sites[t[b]]));
                }
            }
        }
        m.sqrt()
    }
}

fn tuple_cost(k: &RieszKernel, sites: &[Vec<f64>], t: &[usize]) -> Result<f64> {
    let mut c = 0.0;
    for a in 0..t.len() {
        for b in a + 1..t.len() {
            let r2 = dist2(&sites[t[a]], &sites[t[b]]);
            if r2 == 0.0 {
                return Err(Error::SingularPair { i: t[a], j: t[b] });
            }
            c += 2.0 * r2.powf(-0.5 * k.s);
        }
    }
    Ok(c)
}

/// Calls `f` on every increasing n-subset of 0..m.
fn for_subsets(m: usize, n: usize, mut f: impl FnMut(&[usize])) {
    if n > m {
        return;
    }
    if n == 0 {
        f(&[]);
        return;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        f(&idx);
        let mut i = n;
        while i > 0 && idx[i - 1] == m - n + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binomial(m: usize, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LpCertificate {
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Σ x_j |reduced cost_j|.
    pub complementary_slackness: f64,
    pub iterations: usize,
}

impl LpCertificate {
    fn from_solution(lp: &SparseLp, sol: &simplex::LpSolution) -> Self {
        let cs = (0..lp.columns.len())
            .map(|j| {
                let r = lp.costs[j] - lp.columns[j].iter().map(|&(row, v)| sol.duals[row] * v).sum::<f64>();
                sol.x[j] * r.abs()
            })
            .sum();
        Self {
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            complementary_slackness: cs,
            iterations: sol.iterations,
        }
    }

    pub fn passed(&self, scale: f64) -> bool {
        let tol = 1e-9 * (1.0 + scale.abs());
        self.primal_residual <= tol && self.dual_residual <= tol && self.complementary_slackness <= tol
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MmotSolution {
    pub plan: DiscretePlan,
    pub cost: f64,
    pub certificate: LpCertificate,
}

/// Enumeration guard m^N ≤ 10^7.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Exact N-marginal optimum over symmetric plans on the grid, as a linear
/// program over sorted N-subsets of distinct sites.
pub fn mmot_bruteforce(k: &RieszKernel, marginal: &GridMarginal, n: usize) -> Result<MmotSolution> {
    check_dim(k.d, marginal.dim())?;
    if n < 2 {
        return Err(param("N", "need at least two particles"));
    }
    let support: Vec<usize> = (0..marginal.len()).filter(|&i| marginal.weights[i] > 0.0).collect();
    let m = support.len();
    if (m as f64).powi(n as i32) > ENUMERATION_LIMIT {
        return Err(Error::Size(format!("m^N = {m}^{n} exceeds {ENUMERATION_LIMIT:e}")));
    }
    if let Some(i) = support.iter().find(|&&i| marginal.weights[i] * n as f64 > 1.0 + 1e-12) {
        return Err(Error::Infeasible(format!(
            "site {i} carries weight {} > 1/N; no plan avoids the diagonal",
            marginal.weights[*i]
        )));
    }
    let sites: Vec<Vec<f64>> = support.iter().map(|&i| marginal.sites[i].clone()).collect();
    let rhs = support.iter().map(|&i| n as f64 * marginal.weights[i]).collect();
    let mut lp = SparseLp::new(m, rhs);
    let mut tuples = Vec::new();
    for_subsets(m, n, |t| {
        if let Ok(c) = tuple_cost(k, &sites, t) {
            lp.add_column(t.iter().map(|&i| (i, 1.0)).collect(), c);
            tuples.push(t.to_vec());
        }
    });
    let sol = simplex::solve(&lp)?;
    let certificate = LpCertificate::from_solution(&lp, &sol);
    if !certificate.passed(sol.objective) {
        return Err(Error::Accuracy { target: 1e-9, achieved: certificate.complementary_slackness.max(certificate.dual_residual) });
    }
    let mut plan = DiscretePlan { n, tuples: Vec::new(), weights: Vec::new() };
    for (t, x) in tuples.iter().zip(&sol.x) {
        if *x > 0.0 {
            plan.tuples.push(t.iter().map(|&i| support[i]).collect());
            plan.weights.push(*x);
        }
    }
    Ok(MmotSolution { plan, cost: sol.objective, certificate })
}

/// Exact F_{N,s} of a piecewise-constant density on an interval via the
/// co-monotone quantile coupling.
pub fn monotone_1d(k: &RieszKernel, rho: &PiecewiseDensity, n: usize) -> Result<f64> {
    if k.d != 1 {
        return Err(Error::Dimension { expected: 1, got: k.d });
    }
    if !(k.s < 1.0) {
        return Err(param("s", "the monotone solver needs s < 1 in one dimension"));
    }
    if n < 2 {
        return Ok(0.0);
    }
    let knots = rho.quantile_knots();
    let nf = n as f64;
    let h = 1.0 / nf;
    // breakpoints of every shifted quantile inside [0, 1/N]
    let mut cuts = vec![0.0, h];
    for &(u, _) in &knots {
        let r = u - (u * nf).floor() * h;
        if r > 0.0 && r < h {
            cuts.push(r);
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let s = k.s;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (u0, u1) = (w[0], w[1]);
        if u1 <= u0 {
            continue;
        }
        for i in 0..n {
            for j in i + 1..n {
                let g0 = quantile_at(&knots, u0 + j as f64 * h, false) - quantile_at(&knots, u0 + i as f64 * h, false);
                let g1 = quantile_at(&knots, u1 + j as f64 * h, true) - quantile_at(&knots, u1 + i as f64 * h, true);
                if !(g0 > 0.0 && g1 > 0.0) {
                    return Err(Error::SingularPair { i, j });
                }
                let piece = if (g1 - g0).abs() <= 1e-14 * g0 {
                    g0.powf(-s)
                } else {
                    (g1.powf(1.0 - s) - g0.powf(1.0 - s)) / ((1.0 - s) * (g1 - g0))
                };
                total += 2.0 * (u1 - u0) * piece;
            }
        }
    }
    Ok(nf * total)
}

/// E^xc = F_N − N²⟨μ, μ⟩; F_1 ≡ 0.
pub fn exc<M: MeanField + ?Sized>(k: &RieszKernel, marginal: &M, n: usize, cost: f64) -> Result<f64> {
    let f = if n <= 1 { 0.0 } else { cost };
    let nf = n as f64;
    Ok(f - nf * nf * marginal.mean_field(k)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrandCanonicalState {
    /// λ_n for n = 0..=n_max.
    pub lambdas: Vec<f64>,
    pub marginals: Vec<Option<GridMarginal>>,
    pub plans: Vec<Option<DiscretePlan>>,
    pub cost: f64,
    pub exc: Option<f64>,
    /// max of |Σλ − 1| and |Σ n λ_n μ_n − Nμ|.
    pub constraint_residual: f64,
    pub certificate: LpCertificate,
}

/// Grand-canonical relaxation solved as one joint linear program over
/// n-subsets for all n ≤ n_max.
pub fn gc_ot(k: &RieszKernel, marginal: &GridMarginal, n: f64, n_max: usize) -> Result<GrandCanonicalState> {
    check_dim(k.d, marginal.dim())?;
    if !(n >= 0.0) || !n.is_finite() {
        return Err(param("N", "particle number must be finite and nonnegative"));
    }
    if (n_max as f64) < n.ceil() + 2.0 {
        return Err(param("n_max", format!("need n_max ≥ ceil(N) + 2 = {}", n.ceil() + 2.0)));
    }
    let m = marginal.len();
    let size: f64 = (2..=n_max).map(|j| binomial(m, j)).sum();
    if size > ENUMERATION_LIMIT {
        return Err(Error::Size(format!("{size:e} subsets exceed {ENUMERATION_LIMIT:e}")));
    }
    let mut rhs: Vec<f64> = marginal.weights.iter().map(|w| n * w).collect();
    rhs.push(1.0);
    let mut lp = SparseLp::new(m + 1, rhs);
    let mut tuples: Vec<Vec<usize>> = Vec::new();
    lp.add_column(vec![(m, 1.0)], 0.0);
    tuples.push(Vec::new());
    for i in 0..m {
        lp.add_column(vec![(i, 1.0), (m, 1.0)], 0.0);
        tuples.push(vec![i]);
    }
    for size in 2..=n_max.min(m) {
        for_subsets(m, size, |t| {
            if let Ok(c) = tuple_cost(k, &marginal.sites, t) {
                let mut col: Vec<(usize, f64)> = t.iter().map(|&i| (i, 1.0)).collect();
                col.push((m, 1.0));
                lp.add_column(col, c);
                tuples.push(t.to_vec());
            }
        });
    }
    let sol = simplex::solve(&lp).map_err(|e| match e {
        Error::Infeasible(_) => Error::Infeasible(format!("no mixture of at most {n_max} particles has density N·μ with N = {n}")),
        other => other,
    })?;
    let certificate = LpCertificate::from_solution(&lp, &sol);
    if !certificate.passed(sol.objective) {
        return Err(Error::Accuracy { target: 1e-9, achieved: certificate.complementary_slackness.max(certificate.dual_residual) });
    }
    let mut lambdas = vec![0.0; n_max + 1];
    let mut dens = vec![vec![0.0; m]; n_max + 1];
    let mut plans: Vec<Option<DiscretePlan>> = vec![None; n_max + 1];
    for (t, x) in tuples.iter().zip(&sol.x) {
        if *x <= 0.0 {
            continue;
        }
        let j = t.len();
        lambdas[j] += x;
        for &i in t {
            dens[j][i] += x;
        }
        if j >= 2 {
            let p = plans[j].get_or_insert(DiscretePlan { n: j, tuples: Vec::new(), weights: Vec::new() });
            p.tuples.push(t.clone());
            p.weights.push(*x);
        }
    }
    let mut marginals = vec![None; n_max + 1];
    for j in 1..=n_max {
        if lambdas[j] > 0.0 {
            let w: Vec<f64> = dens[j].iter().map(|x| x / (j as f64 * lambdas[j])).collect();
            let t: f64 = w.iter().sum();
            let w = w.iter().map(|x| x / t).collect();
            marginals[j] = Some(GridMarginal { sites: marginal.sites.clone(), weights: w, cell: marginal.cell });
            if let Some(p) = plans[j].as_mut() {
                p.weights.iter_mut().for_each(|x| *x /= lambdas[j]);
            }
        }
    }
    let mut residual = (lambdas.iter().sum::<f64>() - 1.0).abs();
    for i in 0..m {
        let tot: f64 = (1..=n_max).map(|j| dens[j][i]).sum();
        residual = residual.max((tot - n * marginal.weights[i]).abs());
    }
    let exc = marginal.mean_field(k).ok().map(|mf| sol.objective - n * n * mf);
    Ok(GrandCanonicalState { lambdas, marginals, plans, cost: sol.objective, exc, constraint_residual: residual, certificate })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubadditivityVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub component_exc: Vec<f64>,
    pub violation: f64,
    pub holds: bool,
}

/// E^xc_{ΣM_i}(Σ M_i μ_i / Σ M_i) ≤ Σ E^xc_{M_i}(μ_i) with 1e-9 slack.
pub fn subadditivity_check(k: &RieszKernel, components: &[(usize, &GridMarginal)]) -> Result<SubadditivityVerdict> {
    let ot = |mu: &GridMarginal, n: usize| -> Result<f64> {
        if n <= 1 {
            Ok(0.0)
        } else {
            Ok(mmot_bruteforce(k, mu, n)?.cost)
        }
    };
    let mix = GridMarginal::mixture(components)?;
    let total: usize = components.iter().map(|c| c.0).sum();
    let lhs = exc(k, &mix, total, ot(&mix, total)?)?;
    let component_exc = components
        .iter()
        .map(|(mi, mu)| exc(k, *mu, *mi, ot(mu, *mi)?))
        .collect::<Result<Vec<f64>>>()?;
    let rhs: f64 = component_exc.iter().sum();
    let violation = (lhs - rhs).max(0.0);
    let holds = lhs <= rhs + 1e-9 * (1.0 + rhs.abs());
    Ok(SubadditivityVerdict { lhs, rhs, component_exc, violation, holds })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparationBound {
    pub radius: f64,
    pub diameter: f64,
    /// The radius exceeds the support diameter, so nothing is certified.
    pub vacuous: bool,
}

/// r = (N²(N−1)/2 · ω(N^{-2}(N−1)^{-1}))^{-1/s} with the concentration
/// modulus ω(t) = (t / (ρ₀|B₁|))^{1/d} of a uniform density level ρ₀.
pub fn plan_separation_bound(k: &RieszKernel, marginal: &GridMarginal, n: usize) -> Result<SeparationBound> {
    check_dim(k.d, marginal.dim())?;
    if n < 2 {
        return Err(param("N", "need at least two particles"));
    }
    let rho0 = marginal
        .uniform_level()
        .ok_or_else(|| Error::Unsupported("concentration modulus is only available for uniform densities".into()))?;
    let radius = separation_radius_uniform(k, rho0, n);
    let diameter = marginal.diameter();
    Ok(SeparationBound { radius, diameter, vacuous: !(radius <= diameter) })
}

pub fn separation_radius_uniform(k: &RieszKernel, rho0: f64, n: usize) -> f64 {
    let nf = n as f64;
    let t = 1.0 / (nf * nf * (nf - 1.0));
    let omega = (t / (rho0 * ball_volume(k.d))).powf(1.0 / k.d as f64);
    (nf * nf * (nf - 1.0) / 2.0 * omega).powf(-1.0 / k.s)
}
