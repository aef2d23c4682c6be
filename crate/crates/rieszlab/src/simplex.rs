//! Two-phase revised simplex for `min c·x, A x = b, x ≥ 0` with sparse
//! columns and an explicitly maintained dense basis inverse.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

#[derive(Debug, Clone, Default)]
pub struct SparseLp {
    pub n_rows: usize,
    /// Column j as (row, value) pairs.
    pub columns: Vec<Vec<(usize, f64)>>,
    pub costs: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl SparseLp {
    pub fn new(n_rows: usize, rhs: Vec<f64>) -> Self {
        Self { n_rows, columns: Vec::new(), costs: Vec::new(), rhs }
    }

    pub fn add_column(&mut self, entries: Vec<(usize, f64)>, cost: f64) -> usize {
        self.columns.push(entries);
        self.costs.push(cost);
        self.columns.len() - 1
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
    /// max |A x − b|.
    pub primal_residual: f64,
    /// max(0, −min reduced cost).
    pub dual_residual: f64,
    pub iterations: usize,
}

struct State<'a> {
    lp: &'a SparseLp,
    sign: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
}

impl<'a> State<'a> {
    fn m(&self) -> usize {
        self.lp.n_rows
    }

    fn n(&self) -> usize {
        self.lp.columns.len()
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n()
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if self.is_artificial(j) {
            vec![(j - self.n(), 1.0)]
        } else {
            self.lp.columns[j].iter().map(|&(r, v)| (r, v * self.sign[r])).collect()
        }
    }

    fn ftran(&self, col: &[(usize, f64)]) -> Vec<f64> {
        let m = self.m();
        let mut d = vec![0.0; m];
        for &(r, v) in col {
            for i in 0..m {
                d[i] += self.binv[i * m + r] * v;
            }
        }
        d
    }

    fn duals(&self, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let m = self.m();
        let mut y = vec![0.0; m];
        for i in 0..m {
            let cb = cost(self.basis[i]);
            if cb != 0.0 {
                for j in 0..m {
                    y[j] += cb * self.binv[i * m + j];
                }
            }
        }
        y
    }

    fn pivot(&mut self, r: usize, j: usize, d: &[f64], t: f64) {
        let m = self.m();
        for i in 0..m {
            self.xb[i] -= t * d[i];
        }
        self.xb[r] = t;
        let p = d[r];
        for k in 0..m {
            self.binv[r * m + k] /= p;
        }
        for i in 0..m {
            if i != r && d[i] != 0.0 {
                let f = d[i];
                for k in 0..m {
                    self.binv[i * m + k] -= f * self.binv[r * m + k];
                }
            }
        }
        self.in_basis[self.basis[r]] = false;
        self.basis[r] = j;
        self.in_basis[j] = true;
        self.iterations += 1;
        if self.iterations % 64 == 0 {
            self.refactor();
        }
    }

    fn refactor(&mut self) {
        let m = self.m();
        let mut b = DMatrix::<f64>::zeros(m, m);
        for (i, &j) in self.basis.iter().enumerate() {
            for (r, v) in self.column(j) {
                b[(r, i)] = v;
            }
        }
        if let Some(inv) = b.try_inverse() {
            for i in 0..m {
                for k in 0..m {
                    self.binv[i * m + k] = inv[(i, k)];
                }
            }
            for i in 0..m {
                self.xb[i] = (0..m).map(|k| self.binv[i * m + k] * self.lp.rhs[k] * self.sign[k]).sum::<f64>();
                if self.xb[i] < 0.0 && self.xb[i] > -1e-12 {
                    self.xb[i] = 0.0;
                }
            }
        }
    }

    /// Runs simplex iterations for the given costs; artificials never enter.
    fn optimize(&mut self, cost: &dyn Fn(usize) -> f64, scale: f64, block_artificials: bool) -> Result<()> {
        let m = self.m();
        let tol = 1e-11 * scale.max(1e-300);
        let mut degenerate = 0usize;
        let limit = 50_000 + 200 * (m + self.n());
        loop {
            if self.iterations > limit {
                return Err(Error::Accuracy { target: 0.0, achieved: f64::INFINITY });
            }
            let y = self.duals(cost);
            let bland = degenerate > 40;
            let mut enter = None;
            let mut best = -tol;
            for j in 0..self.n() {
                if self.in_basis[j] {
                    continue;
                }
                let r = cost(j) - self.lp.columns[j].iter().map(|&(row, v)| y[row] * v * self.sign[row]).sum::<f64>();
                if r < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = r;
                }
            }
            let Some(j) = enter else { return Ok(()) };
            let d = self.ftran(&self.column(j));
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let blocked_artificial = block_artificials && self.is_artificial(self.basis[i]) && d[i].abs() > 1e-9;
                let t = if blocked_artificial {
                    0.0
                } else if d[i] > 1e-9 {
                    self.xb[i].max(0.0) / d[i]
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((li, lt)) => {
                        t < lt - 1e-14 || (t <= lt + 1e-14 && (if bland { self.basis[i] < self.basis[li] } else { d[i].abs() > d[li].abs() }))
                    }
                };
                if better {
                    leave = Some((i, t));
                }
            }
            let Some((r, t)) = leave else {
                return Err(Error::Infeasible("linear program is unbounded".into()));
            };
            if t <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, j, &d, t);
        }
    }
}

/// Solves `min c·x` subject to `A x = b`, `x ≥ 0`.
pub fn solve(lp: &SparseLp) -> Result<LpSolution> {
    let m = lp.n_rows;
    let n = lp.columns.len();
    if lp.rhs.len() != m || lp.costs.len() != n {
        return Err(Error::Size("inconsistent linear program dimensions".into()));
    }
    if lp.columns.iter().flatten().any(|&(r, v)| r >= m || !v.is_finite()) || lp.costs.iter().any(|c| !c.is_finite()) {
        return Err(Error::Size("column entry out of range or non-finite".into()));
    }
    let sign: Vec<f64> = lp.rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
    let mut binv = vec![0.0; m * m];
    for i in 0..m {
        binv[i * m + i] = 1.0;
    }
    let mut in_basis = vec![false; n + m];
    for i in 0..m {
        in_basis[n + i] = true;
    }
    let mut st = State {
        lp,
        sign: sign.clone(),
        basis: (n..n + m).collect(),
        in_basis,
        binv,
        xb: lp.rhs.iter().map(|b| b.abs()).collect(),
        iterations: 0,
    };
    let bscale = lp.rhs.iter().map(|b| b.abs()).fold(0.0, f64::max).max(1e-300);
    let phase1 = |j: usize| if j >= n { 1.0 } else { 0.0 };
    st.optimize(&phase1, 1.0, false)?;
    let infeas: f64 = (0..m).filter(|&i| st.basis[i] >= n).map(|i| st.xb[i]).sum();
    if infeas > 1e-9 * (1.0 + bscale) {
        return Err(Error::Infeasible(format!("constraints cannot be met (residual {infeas:e})")));
    }
    // drive zero-level artificials out where possible
    for r in 0..m {
        if st.basis[r] < n {
            continue;
        }
        let row: Vec<f64> = (0..m).map(|k| st.binv[r * m + k]).collect();
        let found = (0..n).filter(|&j| !st.in_basis[j]).find(|&j| {
            let v: f64 = lp.columns[j].iter().map(|&(rr, val)| row[rr] * val * sign[rr]).sum();
            v.abs() > 1e-9
        });
        if let Some(j) = found {
            let d = st.ftran(&st.column(j));
            st.pivot(r, j, &d, 0.0);
        }
    }
    let cscale = lp.costs.iter().map(|c| c.abs()).fold(0.0, f64::max);
    let phase2 = |j: usize| if j >= n { 0.0 } else { lp.costs[j] };
    st.optimize(&phase2, cscale.max(1e-300), true)?;
    st.refactor();

    let mut x = vec![0.0; n];
    for (i, &j) in st.basis.iter().enumerate() {
        if j < n {
            x[j] = st.xb[i].max(0.0);
        }
    }
    let objective: f64 = x.iter().zip(&lp.costs).map(|(a, c)| a * c).sum();
    let ys = st.duals(&phase2);
    let duals: Vec<f64> = ys.iter().zip(&sign).map(|(y, s)| y * s).collect();
    let mut ax = vec![0.0; m];
    for (j, col) in lp.columns.iter().enumerate() {
        for &(r, v) in col {
            ax[r] += v * x[j];
        }
    }
    let primal_residual = ax.iter().zip(&lp.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let dual_residual = (0..n)
        .map(|j| lp.costs[j] - lp.columns[j].iter().map(|&(r, v)| duals[r] * v).sum::<f64>())
        .fold(0.0, |acc: f64, r| acc.max(-r));
    Ok(LpSolution { x, objective, duals, primal_residual, dual_residual, iterations: st.iterations })
}
