use proptest::prelude::*;
use rieszlab::decomposition::*;
use rieszlab::kernel::{CubeDomain, PointConfiguration, RieszKernel};
use std::collections::HashMap;
use std::f64::consts::PI;

fn unit_ball(d: usize) -> f64 {
    match d {
        2 => PI,
        3 => 4.0 * PI / 3.0,
        _ => unreachable!(),
    }
}

/// Pairwise disjointness, containment and family densities from scratch.
fn audit(p: &BallPacking) -> (bool, bool, Vec<f64>) {
    let d = p.dim();
    let lo = p.cube.lower();
    let hi = p.cube.upper();
    let contained = p.centers.iter().zip(&p.radii).all(|(c, r)| (0..d).all(|i| c[i] - r >= lo[i] - 1e-9 && c[i] + r <= hi[i] + 1e-9));
    // bucket every ball into each grid cell its bounding box meets
    let g = 2.0 * p.ladder.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, (c, r)) in p.centers.iter().zip(&p.radii).enumerate() {
        let lo: Vec<i64> = c.iter().map(|x| ((x - r) / g).floor() as i64).collect();
        let hi: Vec<i64> = c.iter().map(|x| ((x + r) / g).floor() as i64).collect();
        let mut key = lo.clone();
        loop {
            grid.entry(key.clone()).or_default().push(i);
            let mut axis = 0;
            while axis < d {
                key[axis] += 1;
                if key[axis] <= hi[axis] {
                    break;
                }
                key[axis] = lo[axis];
                axis += 1;
            }
            if axis == d {
                break;
            }
        }
    }
    let overlap = |i: usize, j: usize| {
        let dist: f64 = p.centers[i].iter().zip(&p.centers[j]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        dist < p.radii[i] + p.radii[j] - 1e-9
    };
    let disjoint = grid.values().all(|bucket| {
        bucket.iter().enumerate().all(|(a, &i)| bucket[a + 1..].iter().all(|&j| !overlap(i, j)))
    });
    let vol = p.cube.volume();
    let densities = p.counts().iter().zip(&p.ladder).map(|(&n, &r)| n as f64 * unit_ball(d) * r.powi(d as i32) / vol).collect();
    (disjoint, contained, densities)
}

#[test]
fn constants_follow_their_definitions() {
    for d in [2usize, 3] {
        let b = unit_ball(d);
        let sd = (d as f64).sqrt();
        let cd = 2f64.powi(d as i32 + 1) / b;
        assert!((cheese_constant(d) - cd).abs() < 1e-12);
        assert!((ladder_ratio(d) - (1.0 + 4.0 * sd * b)).abs() < 1e-12);
        assert!((fg_constant(d) - (1.0 + 4.0 * sd * b).max(8.0 * sd * b).max(cd)).abs() < 1e-12);
        let (lo, hi) = density_window(d, 2);
        assert!((lo - 1.0 / (3.0 + cd)).abs() < 1e-15 && (hi - 1.0 / (2.0 + cd)).abs() < 1e-15);
    }
}

#[test]
fn parameters_flag_small_systems() {
    let p = fg_parameters(1000, 5000, 2).unwrap();
    assert!(p.clamped && p.m == 1);
    assert!((p.ladder[0] - 1000f64.powf(1.0 / 18.0)).abs() < 1e-12);
    assert!((p.l - 1000f64.powf(1.0 / 12.0)).abs() < 1e-12);
    assert!(!p.packing_ok && !p.warnings.is_empty());
    assert!(fg_parameters(10, 10, 0).is_err());
}

#[test]
fn bad_ladders_are_rejected() {
    let cube = CubeDomain::anchored(2, 400.0).unwrap();
    assert!(swiss_cheese(&cube, &[1.0, 2.0], &PackingOptions::default()).is_err());
    assert!(swiss_cheese(&CubeDomain::anchored(2, 50.0).unwrap(), &[1.0], &PackingOptions::default()).is_err());
    assert!(swiss_cheese(&CubeDomain::anchored(1, 500.0).unwrap(), &[1.0], &PackingOptions::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn packings_pass_an_independent_audit(seed in any::<u64>(), side in 128.0f64..160.0) {
        let cube = CubeDomain::anchored(2, side).unwrap();
        let p = swiss_cheese(&cube, &[1.0], &PackingOptions { seed, seed_budget: 8 }).unwrap();
        let (disjoint, contained, dens) = audit(&p);
        let (lo, hi) = density_window(2, 1);
        prop_assert!(disjoint && contained);
        prop_assert!(dens.iter().all(|x| *x > lo && *x < hi), "{dens:?}");
        prop_assert!(p.verify().passed());
        let back = BallPacking::from_json(&p.to_json().unwrap()).unwrap();
        prop_assert_eq!(&back, &p);
    }
}

#[test]
fn two_scale_packing_and_tampering() {
    let r2 = 1.05 * ladder_ratio(2);
    let side = 1.01 * min_cube_side(2, 2, r2);
    let cube = CubeDomain::anchored(2, side).unwrap();
    let p = swiss_cheese(&cube, &[1.0, r2], &PackingOptions { seed: 5, seed_budget: 8 }).unwrap();
    let (disjoint, contained, dens) = audit(&p);
    assert!(disjoint && contained);
    let (lo, hi) = density_window(2, 2);
    assert!(dens.iter().all(|x| *x > lo && *x < hi), "{dens:?}");
    for (a, b) in dens.iter().zip(&p.verify().densities) {
        assert!((a - b).abs() < 1e-9 * a, "{dens:?} vs {:?}", p.verify().densities);
    }

    let mut bad = p.clone();
    let (c, r) = (bad.centers[0].clone(), bad.radii[0]);
    bad.centers.push(c.iter().map(|x| x + 0.5 * r).collect());
    bad.radii.push(r);
    bad.family.push(bad.family[0]);
    assert!(!bad.verify().disjoint);
    let mut out = p.clone();
    out.centers[0][0] = -10.0;
    assert!(!out.verify().contained);
}

#[test]
fn localization_weight_at_zero_distance_is_the_covered_fraction() {
    let cube = CubeDomain::anchored(2, 130.0).unwrap();
    let p = swiss_cheese(&cube, &[1.0], &PackingOptions { seed: 2, seed_budget: 8 }).unwrap();
    let covered: f64 = audit(&p).2.iter().sum();
    for kappa in [0.2, 0.5] {
        let w0 = localization_weight(&p, kappa, 0.0);
        assert!((w0 - covered).abs() < 1e-8 * covered, "{w0} vs {covered}");
        let mut prev = w0;
        for rho in [0.3, 0.9, 1.5, 2.2] {
            let w = localization_weight(&p, kappa, rho);
            assert!(w <= prev + 1e-12 && w >= 0.0);
            prev = w;
        }
        assert_eq!(localization_weight(&p, kappa, 2.0 * (1.0 + kappa) + 1e-9), 0.0);
    }
    let bump: f64 = (0..20000).map(|i| rho_kappa(0.3, 0.7 + 0.6 * (i as f64 + 0.5) / 20000.0)).sum::<f64>() * 0.6 / 20000.0;
    assert!((bump - 1.0).abs() < 1e-9);
}

#[test]
fn split_adds_up_and_tracks_its_estimate() {
    let cube = CubeDomain::anchored(2, 128.0).unwrap();
    let p = swiss_cheese(&cube, &[1.0], &PackingOptions { seed: 8, seed_budget: 8 }).unwrap();
    let pts: Vec<Vec<f64>> = (0..15).map(|i| vec![0.37 * i as f64, 1.3 * (i as f64).sin()]).collect();
    let cfg = PointConfiguration::new(2, pts).unwrap();
    let k = RieszKernel::new(1.0, 2).unwrap();
    let s = fg_energy_split(&k, &cfg, &p, &FgSplitOptions { samples: 4000, seed: 1, ..Default::default() }).unwrap();
    assert!((s.localized_exact + s.residual_exact - s.full).abs() < 1e-10 * s.full);
    assert!((s.localized + s.residual - s.full).abs() < 1e-10 * s.full);
    assert!((s.weight - 1.0 / (1.0 + fg_constant(2))).abs() < 1e-15);
    assert!(s.z_score < 4.0, "{s:?}");
    let again = fg_energy_split(&k, &cfg, &p, &FgSplitOptions { samples: 4000, seed: 1, ..Default::default() }).unwrap();
    assert_eq!(s, again);
}
