//! Extrapolation of asymptotic constants, s-continuity scans and
//! comparison pipelines.

use crate::error::{param, Error, Result};
use crate::jellium::{jel_ueg_gap, minimize_jellium, MinimizeOptions};
use crate::kernel::{check_dim, CubeDomain, PeriodicConfiguration, RieszKernel, UniformMeasure};
use crate::lattice::{averaged_plan_marginal, periodic_energy_per_point, Lattice, LatticeConstant};
use crate::potentials::{default_xi_sequence, fourier_zero_limit, net_potential_integral, Density, SignedChargeSystem};
use crate::transport::{exc, mmot_bruteforce, monotone_1d, GridMarginal, PiecewiseDensity};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// value_N = C + Σ_{k=1..terms} a_k N^{-k·exponent}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitModel {
    pub exponent: f64,
    pub terms: usize,
}

impl FitModel {
    /// C + a N^{-1/d} + b N^{-2/d}.
    pub fn surface(d: usize) -> Self {
        Self { exponent: 1.0 / d as f64, terms: 2 }
    }

    /// `surface(d)`, dropping the N^{-2/d} term when only three points exist.
    pub fn surface_for(d: usize, points: usize) -> Self {
        let mut m = Self::surface(d);
        if points < 4 {
            m.terms = 1;
        }
        m
    }

    pub fn describe(&self) -> String {
        let mut s = String::from("C");
        for k in 1..=self.terms {
            s.push_str(&format!(" + a{k}*N^(-{})", k as f64 * self.exponent));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub value: f64,
    pub error: f64,
    pub model: String,
    pub series: Vec<(f64, f64)>,
    pub coefficients: Vec<f64>,
    pub max_residual: f64,
}

fn fit(series: &[(f64, f64)], model: &FitModel) -> Result<Vec<f64>> {
    let n = series.len();
    let p = model.terms + 1;
    let a = DMatrix::from_fn(n, p, |i, j| series[i].0.powf(-(j as f64) * model.exponent));
    let b = DVector::from_iterator(n, series.iter().map(|x| x.1));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-13 * smax) {
        return Err(Error::Fit("degenerate design matrix".into()));
    }
    let x = svd.solve(&b, 1e-14 * smax).map_err(|e| Error::Fit(e.to_string()))?;
    Ok(x.iter().copied().collect())
}

fn predict(c: &[f64], model: &FitModel, n: f64) -> f64 {
    c.iter().enumerate().map(|(j, a)| a * n.powf(-(j as f64) * model.exponent)).sum()
}

/// Least-squares extrapolation to N → ∞ with a jackknife error bar, widened
/// to at least the held-out residual of the largest-N point.
pub fn extrapolate_constant(series: &[(f64, f64)], model: &FitModel) -> Result<ConstantEstimate> {
    if model.terms == 0 || series.len() < model.terms + 2 {
        return Err(Error::Fit(format!("need at least {} points, got {}", model.terms.max(1) + 2, series.len())));
    }
    if series.windows(2).any(|w| !(w[1].0 > w[0].0)) || series[0].0 <= 0.0 {
        return Err(Error::Fit("N must be positive and strictly increasing".into()));
    }
    if series.iter().any(|x| !x.1.is_finite()) {
        return Err(Error::Fit("series contains non-finite values".into()));
    }
    let coefficients = fit(series, model)?;
    let value = coefficients[0];
    let n = series.len();
    let loo: Vec<f64> = (0..n)
        .map(|i| {
            let sub: Vec<_> = series.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x).collect();
            fit(&sub, model).map(|c| c[0])
        })
        .collect::<Result<_>>()?;
    let mean = loo.iter().sum::<f64>() / n as f64;
    let jack = ((n as f64 - 1.0) / n as f64 * loo.iter().map(|c| (c - mean).powi(2)).sum::<f64>()).sqrt();
    let held = fit(&series[..n - 1], model)?;
    let (nl, vl) = series[n - 1];
    let held_residual = (predict(&held, model, nl) - vl).abs();
    let max_residual = series.iter().map(|&(x, v)| (predict(&coefficients, model, x) - v).abs()).fold(0.0, f64::max);
    Ok(ConstantEstimate {
        value,
        error: jack.max(held_residual),
        model: model.describe(),
        series: series.to_vec(),
        coefficients,
        max_residual,
    })
}

/// What `scan_s` evaluates at each exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScanProblem {
    /// Ξ_{N,s} on the cube of volume N.
    Jellium { d: usize, options: MinimizeOptions },
    /// F_{N,s} of a grid marginal by linear programming.
    Ot { marginal: GridMarginal },
    /// F_{N,s} of a one-dimensional density by the monotone coupling.
    OtMonotone { density: PiecewiseDensity },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTable {
    pub n: usize,
    pub s: Vec<f64>,
    pub values: Vec<f64>,
    /// max |f(s_{i+1}) − f(s_i)|; None for fewer than two grid points.
    pub max_jump: Option<f64>,
    /// The last jump exceeds twice the median jump.
    pub endpoint_growth: bool,
}

pub fn scan_s(problem: &ScanProblem, n: usize, s_grid: &[f64]) -> Result<ScanTable> {
    if s_grid.is_empty() {
        return Err(param("s_grid", "need at least one exponent"));
    }
    let mut values = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let v = match problem {
            ScanProblem::Jellium { d, options } => {
                let k = RieszKernel::new(s, *d)?;
                if s < *d as f64 - 2.0 - 1e-12 {
                    return Err(param("s_grid", format!("jellium scans need s >= d - 2, got {s}")));
                }
                let cube = CubeDomain::anchored(*d, (n as f64).powf(1.0 / *d as f64))?;
                minimize_jellium(&k, &cube, n, options)?.energy.total
            }
            ScanProblem::Ot { marginal } => {
                let k = RieszKernel::new(s, marginal.dim())?;
                mmot_bruteforce(&k, marginal, n)?.cost
            }
            ScanProblem::OtMonotone { density } => monotone_1d(&RieszKernel::new(s, 1)?, density, n)?,
        };
        values.push(v);
    }
    let jumps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let max_jump = jumps.iter().copied().reduce(f64::max);
    let endpoint_growth = if jumps.len() >= 3 {
        let mut sorted = jumps.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        *jumps.last().unwrap() > 2.0 * sorted[sorted.len() / 2]
    } else {
        false
    };
    Ok(ScanTable { n, s: s_grid.to_vec(), values, max_jump, endpoint_growth })
}

/// Inserts midpoints between consecutive grid values.
pub fn refine_grid(s_grid: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * s_grid.len());
    for w in s_grid.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    if let Some(&last) = s_grid.last() {
        out.push(last);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub r: f64,
    pub n: usize,
    /// (E_UEG(K_R, ν|K_R) − E_Jel(K_R, ν|K_R))/N.
    pub ueg_minus_jel: f64,
    /// (E_UEG(μ_{N,R₁}, ν|K_R) − E_UEG(K_R, ν|K_R))/N.
    pub plan_minus_ueg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// 2/|K_{R₁}| ∫ h of the neutral cell, spatial method.
    pub limit_spatial: f64,
    /// Same from the ξ → 0 Fourier limit.
    pub limit_fourier: f64,
    /// d − 2 < s, where both limits vanish.
    pub strict_regime: bool,
    /// The last step of the sequence moves the scaled differences toward
    /// their limits; at s = d − 2 only the first one has a known limit.
    pub converging: bool,
}

/// Finite-R versions of the jellium/UEG comparison identities for a
/// periodic configuration, with their R → ∞ limits.
pub fn comparison_limits(k: &RieszKernel, base: &PeriodicConfiguration, multiples: &[usize]) -> Result<ComparisonReport> {
    check_dim(k.d, base.cell.dim())?;
    if !base.zero_barycenter {
        return Err(param("base", "the cell must have zero barycenter"));
    }
    if multiples.is_empty() || multiples.windows(2).any(|w| w[1] <= w[0]) || multiples[0] == 0 {
        return Err(param("R_sequence", "need increasing positive multiples of R1"));
    }
    let d = k.d;
    let r1 = base.cell.side;
    let lower = base.cell.lower();
    let mut rows = Vec::with_capacity(multiples.len());
    for &m in multiples {
        let r = m as f64 * r1;
        let center: Vec<f64> = lower.iter().map(|x| x + 0.5 * r).collect();
        let window = CubeDomain::new(center, r)?;
        let pts = base.restrict(&window);
        let n = pts.len();
        let bg = UniformMeasure::unit(window.clone());
        let ueg_minus_jel = jel_ueg_gap(k, &bg, &pts)? / n as f64;
        let mu = averaged_plan_marginal(base, &window)?;
        let plan_minus_ueg = (bg.self_pairing(k)? - mu.self_pairing(k)?) / n as f64;
        rows.push(ComparisonRow { r, n, ueg_minus_jel, plan_minus_ueg });
    }
    let centred: Vec<Vec<f64>> =
        base.base_points.points.iter().map(|p| p.iter().zip(&base.cell.center).map(|(a, c)| a - c).collect()).collect();
    let cell = SignedChargeSystem::empty(d).with_background(CubeDomain::centered(d, r1)?, -1.0);
    let cell = centred.into_iter().fold(cell, |c, p| c.with_atom(p, 1.0));
    let vol = base.cell.volume();
    let spatial = net_potential_integral(k, &cell)?;
    let mut dir = vec![0.0; d];
    dir[0] = 1.0;
    let fourier = fourier_zero_limit(k, &cell, &default_xi_sequence(), &dir)?;
    let limit_spatial = 2.0 / vol * spatial.value;
    let limit_fourier = 2.0 / vol * fourier.limit;
    let strict_regime = k.s > d as f64 - 2.0 + 1e-12;
    let target = if strict_regime { 0.0 } else { limit_spatial };
    let mut converging = rows.len() >= 2;
    if converging {
        let (prev, last) = (&rows[rows.len() - 2], &rows[rows.len() - 1]);
        // a sequence already sitting on its limit counts as converging
        let closer = |a: f64, b: f64| a < b || a <= 1e-12;
        converging = closer((last.ueg_minus_jel - target).abs(), (prev.ueg_minus_jel - target).abs());
        if strict_regime {
            converging &= closer(last.plan_minus_ueg.abs(), prev.plan_minus_ueg.abs());
        }
    }
    Ok(ComparisonReport { rows, limit_spatial, limit_fourier, strict_regime, converging })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareBudgets {
    /// N values for Ξ_N/N.
    pub jellium_ns: Vec<usize>,
    /// N values for E^xc_N/N^{1+s/d}.
    pub ot_ns: Vec<usize>,
    /// Grid cells per side for the transport channel when d ≥ 2.
    pub grid_per_side: usize,
    pub lattice: Option<String>,
    pub minimize: MinimizeOptions,
}

impl Default for CompareBudgets {
    fn default() -> Self {
        Self {
            jellium_ns: vec![4, 8, 16, 32, 64],
            ot_ns: vec![4, 8, 16, 32, 64],
            grid_per_side: 6,
            lattice: None,
            minimize: MinimizeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOfConstants {
    pub s: f64,
    pub d: usize,
    pub jellium: ConstantEstimate,
    /// None when the transport series is too short to extrapolate.
    pub ueg: Option<ConstantEstimate>,
    /// (N, E^xc_N/N^{1+s/d}) actually computed.
    pub ueg_series: Vec<(f64, f64)>,
    pub lattice: Option<LatticeConstant>,
    /// C_Jel estimate − C_UEG estimate.
    pub gap: Option<f64>,
    pub combined_error: Option<f64>,
    /// C_Jel ≤ C_UEG + combined error (and ≤ the lattice value + its error).
    pub easy_inequality: bool,
    pub all_negative: bool,
    pub notes: Vec<String>,
}

/// Ξ_N/N, E^xc_N/N^{1+s/d} and lattice constants side by side.
pub fn compare_constants(k: &RieszKernel, budgets: &CompareBudgets) -> Result<ComparisonOfConstants> {
    let d = k.d;
    let df = d as f64;
    let mut notes = Vec::new();
    let mut jel_series = Vec::with_capacity(budgets.jellium_ns.len());
    for &n in &budgets.jellium_ns {
        let cube = CubeDomain::anchored(d, (n as f64).powf(1.0 / df))?;
        let r = minimize_jellium(k, &cube, n, &budgets.minimize)?;
        if !r.converged {
            notes.push(format!("jellium N = {n} stopped at projected gradient {:e}", r.gradient_norm));
        }
        jel_series.push((n as f64, r.energy.total / n as f64));
    }
    let jellium = extrapolate_constant(&jel_series, &FitModel::surface_for(d, jel_series.len()))?;

    let mut ueg_series = Vec::new();
    if d == 1 {
        let rho = PiecewiseDensity::uniform(0.0, 1.0)?;
        for &n in &budgets.ot_ns {
            let f = monotone_1d(k, &rho, n)?;
            ueg_series.push((n as f64, exc(k, &rho, n, f)? / (n as f64).powf(1.0 + k.s)));
        }
    } else {
        let grid = GridMarginal::uniform_cube(&CubeDomain::anchored(d, 1.0)?, budgets.grid_per_side)?;
        for &n in budgets.ot_ns.iter().filter(|&&n| (2..=4).contains(&n)) {
            match mmot_bruteforce(k, &grid, n) {
                Ok(sol) => ueg_series.push((n as f64, exc(k, &grid, n, sol.cost)? / (n as f64).powf(1.0 + k.s / df))),
                Err(e) => notes.push(format!("transport N = {n} skipped: {e}")),
            }
        }
        notes.push("transport channel in d >= 2 is limited to N <= 4 on a grid".into());
    }
    let ueg = match extrapolate_constant(&ueg_series, &FitModel::surface_for(d, ueg_series.len())) {
        Ok(e) => Some(e),
        Err(e) => {
            notes.push(format!("no transport extrapolation: {e}"));
            None
        }
    };
    let lattice = match &budgets.lattice {
        Some(name) => Some(periodic_energy_per_point(k, &Lattice::by_name(name, d)?, None, &[])?),
        None => None,
    };
    let gap = ueg.as_ref().map(|u| jellium.value - u.value);
    let combined_error = ueg.as_ref().map(|u| jellium.error + u.error);
    let mut easy_inequality = match (&ueg, combined_error) {
        (Some(u), Some(err)) => jellium.value <= u.value + err,
        _ => true,
    };
    if let Some(lc) = &lattice {
        easy_inequality &= jellium.value <= lc.value + lc.error + jellium.error;
    }
    let all_negative = jellium.value < 0.0 && ueg.as_ref().is_none_or(|u| u.value < 0.0) && lattice.as_ref().is_none_or(|l| l.value < 0.0);
    if !all_negative {
        notes.push("an extrapolated constant came out nonnegative".into());
    }
    Ok(ComparisonOfConstants { s: k.s, d, jellium, ueg, ueg_series, lattice, gap, combined_error, easy_inequality, all_negative, notes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_model_is_recovered() {
        let s: Vec<_> = [4.0, 9.0, 16.0, 25.0, 36.0].iter().map(|&n: &f64| (n, -1.5 + 2.0 * n.powf(-0.5))).collect();
        let e = extrapolate_constant(&s, &FitModel::surface(2)).unwrap();
        assert!((e.value + 1.5).abs() < 1e-12);
        assert!(e.max_residual < 1e-12);
    }

    #[test]
    fn short_series_is_rejected() {
        let s = [(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)];
        assert!(extrapolate_constant(&s, &FitModel::surface(1)).is_err());
    }
}
