//! Box integrals of |z|^{-s}, with and without polynomial weights.
//!
//! Integrals over a box are reduced by inclusion–exclusion to boxes with a
//! corner at the singular point; those are split into pyramids with apex
//! at the corner, whose radial integral is done in closed form.

use crate::quad;

const NQ: usize = 16;
const NFAR: usize = 20;
const NQ2: usize = 10;

/// ∫_0^1 t (h² + t²q²)^{-s/2} dt.
fn phi2(s: f64, h: f64, q: f64) -> f64 {
    phi2_scaled(1.0 - 0.5 * s, h.powf(2.0 - s), h * h, q * q)
}

/// `phi2` with a = 1 − s/2, hp = h^{2−s}, h2 = h², q2 = q².
#[inline]
fn phi2_scaled(a: f64, hp: f64, h2: f64, q2: f64) -> f64 {
    let l = (q2 / h2).ln_1p();
    let al = a * l;
    let e = if al.abs() < 1e-8 { l * (1.0 + 0.5 * al) } else { al.exp_m1() / a };
    hp * e / (2.0 * q2)
}

/// G_h(b0, b1) for a two-dimensional box.
fn corner_shifted2(s: f64, h: f64, b0: f64, b1: f64) -> f64 {
    let a = 1.0 - 0.5 * s;
    let hp = h.powf(2.0 - s);
    let h2 = h * h;
    let mut total = 0.0;
    for (bi, bj) in [(b0, b1), (b1, b0)] {
        let mut acc = 0.0;
        let bi2 = bi * bi;
        quad::for_graded(NQ2, bj, bi, |w, wt| acc += wt * phi2_scaled(a, hp, h2, bi2 + w * w));
        total += bi * acc;
    }
    total
}

/// ∫_0^1 t^{m-1} (h² + t²q²)^{-s/2} dt.
fn psi(s: f64, m: usize, h: f64, q: f64) -> f64 {
    if m == 2 {
        return phi2(s, h, q);
    }
    quad::graded_nodes(NQ, 1.0, (h / q).min(1.0))
        .into_iter()
        .map(|(t, w)| w * t.powi(m as i32 - 1) * (h * h + t * t * q * q).powf(-0.5 * s))
        .sum()
}

/// G_h(b) = ∫_{[0,b]} (h² + |w|²)^{-s/2} dw over an m-dimensional box.
pub fn corner_shifted(s: f64, h: f64, b: &[f64]) -> f64 {
    let m = b.len();
    if m == 0 {
        return h.powf(-s);
    }
    if b.iter().any(|&x| x <= 0.0) {
        return 0.0;
    }
    if h == 0.0 {
        return if s < m as f64 { corner(s, b) } else { f64::INFINITY };
    }
    if m == 1 {
        return b[0] * psi(s, 1, h, b[0]);
    }
    if m == 2 {
        return corner_shifted2(s, h, b[0], b[1]);
    }
    let mut total = 0.0;
    for i in 0..m {
        let bi = b[i];
        let axes: Vec<_> = (0..m)
            .filter(|&j| j != i)
            .map(|j| quad::graded_nodes(NQ, b[j], bi))
            .collect();
        let mut acc = 0.0;
        quad::tensor(&axes, |w, wt| {
            let q = (bi * bi + w.iter().map(|x| x * x).sum::<f64>()).sqrt();
            acc += wt * psi(s, m, h, q);
        });
        total += bi * acc;
    }
    total
}

/// J(e) = ∫_{[0,e]} |z|^{-s} dz (requires s < dim).
pub fn corner(s: f64, e: &[f64]) -> f64 {
    let d = e.len();
    if e.iter().any(|&x| x <= 0.0) {
        return 0.0;
    }
    if d == 1 {
        return e[0].powf(1.0 - s) / (1.0 - s);
    }
    let mut total = 0.0;
    for i in 0..d {
        let rest: Vec<f64> = (0..d).filter(|&j| j != i).map(|j| e[j]).collect();
        total += e[i] * corner_shifted(s, e[i], &rest);
    }
    total / (d as f64 - s)
}

/// Signed corner extents for ∫_l^u along one axis (singular point at 0).
fn axis_terms(l: f64, u: f64) -> [(f64, f64); 2] {
    if l >= 0.0 {
        [(1.0, u), (-1.0, l)]
    } else if u <= 0.0 {
        [(1.0, -l), (-1.0, -u)]
    } else {
        [(1.0, u), (1.0, -l)]
    }
}

/// Σ over corner combinations of sign · f(extents).
fn inclusion_exclusion(l: &[f64], u: &[f64], mut f: impl FnMut(&[f64]) -> f64) -> f64 {
    let d = l.len();
    let terms: Vec<_> = (0..d).map(|i| axis_terms(l[i], u[i])).collect();
    let mut ext = vec![0.0; d];
    let mut total = 0.0;
    for mask in 0..(1usize << d) {
        let mut sign = 1.0;
        let mut zero = false;
        for i in 0..d {
            let (sg, e) = terms[i][(mask >> i) & 1];
            if e <= 0.0 {
                zero = true;
                break;
            }
            sign *= sg;
            ext[i] = e;
        }
        if !zero {
            total += sign * f(&ext);
        }
    }
    total
}

fn far_geometry(l: &[f64], u: &[f64]) -> (f64, f64) {
    let mut dist2 = 0.0;
    let mut side: f64 = 0.0;
    for (&a, &b) in l.iter().zip(u) {
        let g = if a > 0.0 { a } else if b < 0.0 { -b } else { 0.0 };
        dist2 += g * g;
        side = side.max(b - a);
    }
    (dist2.sqrt(), side)
}

/// ∫_{[lo,hi]} |p − y|^{-s} dy.
pub fn point_box(s: f64, lo: &[f64], hi: &[f64], p: &[f64]) -> f64 {
    let l: Vec<f64> = lo.iter().zip(p).map(|(a, x)| a - x).collect();
    let u: Vec<f64> = hi.iter().zip(p).map(|(b, x)| b - x).collect();
    let (dist, side) = far_geometry(&l, &u);
    if dist >= side {
        return quad::box_integral(NFAR, 1, &l, &u, |z| z.iter().map(|x| x * x).sum::<f64>().powf(-0.5 * s));
    }
    inclusion_exclusion(&l, &u, |e| corner(s, e))
}

/// Value and gradient of [`point_box`] together; a point strictly inside
/// the box reuses the pyramid integrals for the face terms.
pub fn point_box_with_gradient(s: f64, lo: &[f64], hi: &[f64], p: &[f64]) -> (f64, Vec<f64>) {
    let d = p.len();
    let inside = (0..d).all(|i| lo[i] < p[i] && p[i] < hi[i]);
    if !inside || s >= d as f64 {
        return (point_box(s, lo, hi, p), point_box_gradient(s, lo, hi, p));
    }
    let below: Vec<f64> = (0..d).map(|i| p[i] - lo[i]).collect();
    let above: Vec<f64> = (0..d).map(|i| hi[i] - p[i]).collect();
    let mut grad = vec![0.0; d];
    let mut value = 0.0;
    let mut e = vec![0.0; d];
    let mut rest = vec![0.0; d.saturating_sub(1)];
    for mask in 0..(1usize << d) {
        for i in 0..d {
            e[i] = if (mask >> i) & 1 == 1 { above[i] } else { below[i] };
        }
        for i in 0..d {
            let mut k = 0;
            for j in 0..d {
                if j != i {
                    rest[k] = e[j];
                    k += 1;
                }
            }
            let g = corner_shifted(s, e[i], &rest);
            value += e[i] * g;
            if (mask >> i) & 1 == 1 {
                grad[i] -= g;
            } else {
                grad[i] += g;
            }
        }
    }
    (value / (d as f64 - s), grad)
}

/// ∫_{[lo,hi]} (h² + |w − p|²)^{-s/2} dw; `lo`, `hi`, `p` have one entry per face axis.
pub fn face_box(s: f64, h: f64, lo: &[f64], hi: &[f64], p: &[f64]) -> f64 {
    if lo.is_empty() {
        return h.powf(-s);
    }
    let l: Vec<f64> = lo.iter().zip(p).map(|(a, x)| a - x).collect();
    let u: Vec<f64> = hi.iter().zip(p).map(|(b, x)| b - x).collect();
    let (dist, side) = far_geometry(&l, &u);
    if (dist * dist + h * h).sqrt() >= side {
        return quad::box_integral(NFAR, 1, &l, &u, |w| {
            (h * h + w.iter().map(|x| x * x).sum::<f64>()).powf(-0.5 * s)
        });
    }
    inclusion_exclusion(&l, &u, |e| corner_shifted(s, h, e))
}

/// ∇_p ∫_{[lo,hi]} |p − y|^{-s} dy.
pub fn point_box_gradient(s: f64, lo: &[f64], hi: &[f64], p: &[f64]) -> Vec<f64> {
    let d = p.len();
    let l: Vec<f64> = lo.iter().zip(p).map(|(a, x)| a - x).collect();
    let u: Vec<f64> = hi.iter().zip(p).map(|(b, x)| b - x).collect();
    let (dist, side) = far_geometry(&l, &u);
    if dist >= side {
        let mut g = vec![0.0; d];
        let axes: Vec<_> = l.iter().zip(&u).map(|(&a, &b)| quad::composite_nodes(NFAR, a, b, 1)).collect();
        quad::tensor(&axes, |z, w| {
            let r2: f64 = z.iter().map(|x| x * x).sum();
            let f = s * r2.powf(-0.5 * s - 1.0);
            // z = y − p, ∂_p |p − y|^{-s} = s z |z|^{-s-2}
            for k in 0..d {
                g[k] += w * f * z[k];
            }
        });
        return g;
    }
    (0..d)
        .map(|i| {
            let flo: Vec<f64> = (0..d).filter(|&j| j != i).map(|j| lo[j]).collect();
            let fhi: Vec<f64> = (0..d).filter(|&j| j != i).map(|j| hi[j]).collect();
            let fp: Vec<f64> = (0..d).filter(|&j| j != i).map(|j| p[j]).collect();
            face_box(s, (p[i] - lo[i]).abs(), &flo, &fhi, &fp) - face_box(s, (hi[i] - p[i]).abs(), &flo, &fhi, &fp)
        })
        .collect()
}

/// W(c) = ∫_{[0,c]} |z|^{-s} Π_i (α_i + β_i z_i) dz.
fn corner_weighted(s: f64, c: &[f64], alpha: &[f64], beta: &[f64]) -> f64 {
    let d = c.len();
    if c.iter().any(|&x| x <= 0.0) {
        return 0.0;
    }
    if d == 1 {
        return c[0].powf(1.0 - s) * (alpha[0] / (1.0 - s) + beta[0] * c[0] / (2.0 - s));
    }
    let df = d as f64;
    let denom: Vec<f64> = (0..=d).map(|k| 1.0 / (df - s + k as f64)).collect();
    let mut total = 0.0;
    let mut poly = vec![0.0; d + 1];
    for i in 0..d {
        let ci = c[i];
        let others: Vec<usize> = (0..d).filter(|&j| j != i).collect();
        let axes: Vec<_> = others.iter().map(|&j| quad::graded_nodes(NQ, c[j], ci)).collect();
        let mut acc = 0.0;
        quad::tensor(&axes, |w, wt| {
            poly.iter_mut().for_each(|x| *x = 0.0);
            poly[0] = alpha[i];
            poly[1] = beta[i] * ci;
            let mut deg = 1;
            for (k, &j) in others.iter().enumerate() {
                let (a, b) = (alpha[j], beta[j] * w[k]);
                for t in (0..=deg).rev() {
                    let v = poly[t];
                    poly[t + 1] += b * v;
                    poly[t] = a * v;
                }
                deg += 1;
            }
            let p: f64 = poly.iter().zip(&denom).map(|(x, y)| x * y).sum();
            let r2 = ci * ci + w.iter().map(|x| x * x).sum::<f64>();
            acc += wt * r2.powf(-0.5 * s) * p;
        });
        total += ci * acc;
    }
    total
}

/// Overlap length of [lo1, hi1] and [lo2 + z, hi2 + z].
fn overlap(lo1: f64, hi1: f64, lo2: f64, hi2: f64, z: f64) -> f64 {
    (hi1.min(hi2 + z) - lo1.max(lo2 + z)).max(0.0)
}

/// Linear pieces (a, b, α, β) of the overlap function along one axis.
fn overlap_pieces(lo1: f64, hi1: f64, lo2: f64, hi2: f64) -> Vec<(f64, f64, f64, f64)> {
    let mut br = vec![lo1 - hi2, lo1 - lo2, hi1 - hi2, hi1 - lo2, 0.0];
    br.sort_by(|a, b| a.partial_cmp(b).unwrap());
    br.dedup();
    let zmin = lo1 - hi2;
    let zmax = hi1 - lo2;
    let mut out = Vec::new();
    for w in br.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a || a < zmin || b > zmax {
            continue;
        }
        let ta = overlap(lo1, hi1, lo2, hi2, a);
        let tb = overlap(lo1, hi1, lo2, hi2, b);
        let beta = (tb - ta) / (b - a);
        let alpha = ta - beta * a;
        if ta == 0.0 && tb == 0.0 {
            continue;
        }
        out.push((a, b, alpha, beta));
    }
    out
}

/// ∫_{[lo1,hi1]} ∫_{[lo2,hi2]} |x − y|^{-s} dy dx.
pub fn box_box(s: f64, lo1: &[f64], hi1: &[f64], lo2: &[f64], hi2: &[f64]) -> f64 {
    let d = lo1.len();
    let pieces: Vec<_> = (0..d).map(|i| overlap_pieces(lo1[i], hi1[i], lo2[i], hi2[i])).collect();
    if pieces.iter().any(|p| p.is_empty()) {
        return 0.0;
    }
    let mut idx = vec![0usize; d];
    let mut total = 0.0;
    let (mut l, mut u, mut al, mut be) = (vec![0.0; d], vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    loop {
        for i in 0..d {
            let (a, b, alpha, beta) = pieces[i][idx[i]];
            l[i] = a;
            u[i] = b;
            al[i] = alpha;
            be[i] = beta;
        }
        let (dist, side) = far_geometry(&l, &u);
        if dist >= side {
            total += quad::box_integral(NQ, 1, &l, &u, |z| {
                let r2: f64 = z.iter().map(|x| x * x).sum();
                let w: f64 = (0..d).map(|k| al[k] + be[k] * z[k]).product();
                r2.powf(-0.5 * s) * w
            });
        } else {
            let mut pl = l.clone();
            let mut pu = u.clone();
            let mut pb = be.clone();
            for i in 0..d {
                if u[i] <= 0.0 {
                    pl[i] = -u[i];
                    pu[i] = -l[i];
                    pb[i] = -be[i];
                }
            }
            let mut acc = 0.0;
            for mask in 0..(1usize << d) {
                let mut sign = 1.0;
                let mut c = vec![0.0; d];
                let mut zero = false;
                for i in 0..d {
                    if (mask >> i) & 1 == 1 {
                        if pl[i] <= 0.0 {
                            zero = true;
                            break;
                        }
                        c[i] = pl[i];
                        sign = -sign;
                    } else {
                        c[i] = pu[i];
                    }
                }
                if !zero {
                    acc += sign * corner_weighted(s, &c, &al, &pb);
                }
            }
            total += acc;
        }
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < pieces[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == d {
                return total;
            }
        }
    }
}
