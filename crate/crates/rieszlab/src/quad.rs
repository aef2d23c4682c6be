//! Gauss–Legendre rules and composite (graded) panel helpers. All rules
//! are non-adaptive.

use gauss_quad::GaussLegendre;
use std::num::NonZeroUsize;
use std::sync::OnceLock;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub x: Vec<f64>,
    pub w: Vec<f64>,
}

const MAX_ORDER: usize = 64;

fn table() -> &'static Vec<Rule> {
    static RULES: OnceLock<Vec<Rule>> = OnceLock::new();
    RULES.get_or_init(|| {
        (1..=MAX_ORDER)
            .map(|n| {
                let gl = GaussLegendre::new(NonZeroUsize::new(n).unwrap());
                let (x, w) = gl.as_node_weight_pairs().iter().copied().unzip();
                Rule { x, w }
            })
            .collect()
    })
}

/// Gauss–Legendre rule with `n` nodes (1 ≤ n ≤ 64).
pub fn rule(n: usize) -> &'static Rule {
    &table()[n.clamp(1, MAX_ORDER) - 1]
}

/// Nodes and weights mapped to `[a, b]`.
pub fn mapped(n: usize, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let r = rule(n);
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    r.x.iter().zip(&r.w).map(move |(&x, &w)| (m + h * x, h * w))
}

pub fn integrate(n: usize, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    mapped(n, a, b).map(|(x, w)| w * f(x)).sum()
}

/// Panels of `[0, len]` growing geometrically away from 0, starting at `scale`.
pub fn graded_panels(len: f64, scale: f64) -> Vec<(f64, f64)> {
    if len <= 0.0 {
        return Vec::new();
    }
    let scale = scale.max(len * 1e-14);
    if scale >= len {
        return vec![(0.0, len)];
    }
    let mut out = vec![(0.0, scale)];
    let mut a = scale;
    while a < len {
        let b = (2.0 * a).min(len);
        // avoid a sliver at the end
        let b = if len - b < 0.25 * a { len } else { b };
        out.push((a, b));
        a = b;
    }
    out
}

/// Nodes/weights on `[0, len]` graded toward 0 at `scale`.
pub fn graded_nodes(n: usize, len: f64, scale: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for_graded(n, len, scale, |x, w| out.push((x, w)));
    out
}

/// Visits the nodes of [`graded_nodes`] without allocating.
pub fn for_graded(n: usize, len: f64, scale: f64, mut f: impl FnMut(f64, f64)) {
    if len <= 0.0 {
        return;
    }
    let r = rule(n);
    let mut panel = |a: f64, b: f64| {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        for (&x, &w) in r.x.iter().zip(&r.w) {
            f(m + h * x, h * w);
        }
    };
    let scale = scale.max(len * 1e-14);
    if scale >= len {
        panel(0.0, len);
        return;
    }
    panel(0.0, scale);
    let mut a = scale;
    while a < len {
        let b = (2.0 * a).min(len);
        let b = if len - b < 0.25 * a { len } else { b };
        panel(a, b);
        a = b;
    }
}

/// Uniform composite nodes on `[a, b]` with `panels` panels.
pub fn composite_nodes(n: usize, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|k| mapped(n, a + k as f64 * h, a + (k + 1) as f64 * h))
        .collect()
}

pub fn integrate_composite(n: usize, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    composite_nodes(n, a, b, panels).into_iter().map(|(x, w)| w * f(x)).sum()
}

/// Tensor product of per-axis node lists, calling `f(point, weight)`.
pub fn tensor(axes: &[Vec<(f64, f64)>], mut f: impl FnMut(&[f64], f64)) {
    let d = axes.len();
    if d == 0 {
        f(&[], 1.0);
        return;
    }
    if axes.iter().any(|a| a.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; d];
    let mut pt = vec![0.0; d];
    loop {
        let mut w = 1.0;
        for k in 0..d {
            let (x, wk) = axes[k][idx[k]];
            pt[k] = x;
            w *= wk;
        }
        f(&pt, w);
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < axes[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return;
            }
        }
    }
}

/// Tensor integral of `f` over the box `[lo, hi]` with `n` nodes and
/// `panels` uniform panels per axis.
pub fn box_integral(n: usize, panels: usize, lo: &[f64], hi: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let axes: Vec<_> = lo
        .iter()
        .zip(hi)
        .map(|(&a, &b)| composite_nodes(n, a, b, panels))
        .collect();
    let mut acc = 0.0;
    tensor(&axes, |p, w| acc += w * f(p));
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let v = integrate(5, 0.0, 2.0, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-11);
    }

    #[test]
    fn graded_covers_interval() {
        let p = graded_panels(10.0, 1e-3);
        assert_eq!(p[0].0, 0.0);
        assert_eq!(p.last().unwrap().1, 10.0);
        for w in p.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        let v: f64 = graded_nodes(16, 1.0, 1e-14).iter().map(|(x, w)| w * x.powf(-0.5)).sum();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn tensor_volume() {
        let v = box_integral(3, 2, &[0.0, 1.0, -1.0], &[1.0, 3.0, 1.0], |_| 1.0);
        assert!((v - 4.0).abs() < 1e-13);
    }
}
