use proptest::prelude::*;
use rieszlab::jellium::*;
use rieszlab::kernel::{CubeDomain, PointConfiguration, RieszKernel};

/// E_Jel on an interval written out with elementary antiderivatives.
fn interval_oracle(s: f64, a: f64, b: f64, pts: &[f64]) -> f64 {
    let mut pair = 0.0;
    for (i, p) in pts.iter().enumerate() {
        for (j, q) in pts.iter().enumerate() {
            if i != j {
                pair += (p - q).abs().powf(-s);
            }
        }
    }
    let attraction: f64 = pts.iter().map(|p| ((p - a).powf(1.0 - s) + (b - p).powf(1.0 - s)) / (1.0 - s)).sum();
    let background = 2.0 * (b - a).powf(2.0 - s) / ((1.0 - s) * (2.0 - s));
    pair - 2.0 * attraction + background
}

fn interval_points() -> impl Strategy<Value = (f64, Vec<f64>)> {
    (0.05f64..0.95, 2usize..9).prop_flat_map(|(s, n)| (Just(s), prop::collection::vec(0.0f64..1.0, n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interval_energy_matches_closed_form((s, u) in interval_points(), a in -3.0f64..3.0) {
        let n = u.len() as f64;
        let pts: Vec<f64> = u.iter().map(|x| a + x * n).collect();
        prop_assume!(PointConfiguration::new(1, pts.iter().map(|p| vec![*p]).collect()).unwrap().min_separation() > 1e-6);
        let k = RieszKernel::new(s, 1).unwrap();
        let dom = CubeDomain::anchored(1, n).unwrap().translate(&[a]);
        let cfg = PointConfiguration::new(1, pts.iter().map(|p| vec![*p]).collect()).unwrap();
        let got = e_jel(&k, &dom, &cfg).unwrap().total;
        let want = interval_oracle(s, a, a + n, &pts);
        prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "{got} vs {want}");
    }

    #[test]
    fn energy_is_translation_invariant(raw in prop::collection::vec(0.0f64..1.0, 6..13), shift in prop::collection::vec(-5.0f64..5.0, 3), s in 0.2f64..2.8) {
        let k = RieszKernel::new(s, 3).unwrap();
        let n = raw.len() / 3;
        let side = (n as f64).cbrt();
        let cfg = PointConfiguration::new(3, raw.chunks(3).take(n).map(|c| c.iter().map(|x| x * side).collect()).collect()).unwrap();
        prop_assume!(cfg.min_separation() > 1e-3);
        let dom = CubeDomain::anchored(3, side).unwrap();
        let a = e_jel(&k, &dom, &cfg).unwrap().total;
        let b = e_jel(&k, &dom.translate(&shift), &cfg.translate(&shift)).unwrap().total;
        prop_assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()));
        let p = e_jel_pairing_form(&k, &dom, &cfg).unwrap();
        prop_assert!((a - p).abs() < 1e-8 * (1.0 + a.abs()), "{a} vs {p}");
    }

    #[test]
    fn gradient_matches_central_differences(raw in prop::collection::vec(0.05f64..0.95, 8), s in 0.3f64..1.8) {
        let k = RieszKernel::new(s, 2).unwrap();
        let side = 2.0;
        let pts: Vec<Vec<f64>> = raw.chunks(2).map(|c| vec![c[0] * side, c[1] * side]).collect();
        let cfg = PointConfiguration::new(2, pts.clone()).unwrap();
        prop_assume!(cfg.min_separation() > 0.05);
        let dom = CubeDomain::anchored(2, side).unwrap();
        let g = e_jel_gradient(&k, &dom, &cfg).unwrap();
        let h = 1e-5;
        for i in 0..pts.len() {
            for c in 0..2 {
                let mut plus = pts.clone();
                let mut minus = pts.clone();
                plus[i][c] += h;
                minus[i][c] -= h;
                let ep = e_jel(&k, &dom, &PointConfiguration::new(2, plus).unwrap()).unwrap().total;
                let em = e_jel(&k, &dom, &PointConfiguration::new(2, minus).unwrap()).unwrap().total;
                let fd = (ep - em) / (2.0 * h);
                prop_assert!((fd - g[i][c]).abs() < 1e-5 * (1.0 + fd.abs()), "{fd} vs {}", g[i][c]);
            }
        }
    }
}

#[test]
fn minimizers_sit_between_the_bounds() {
    for (s, d, n) in [(0.5, 1, 8), (1.0, 2, 6), (1.0, 3, 8), (2.0, 3, 5)] {
        let k = RieszKernel::new(s, d).unwrap();
        let dom = CubeDomain::anchored(d, (n as f64).powf(1.0 / d as f64)).unwrap();
        let opts = MinimizeOptions { restarts: 4, seed: 3, ..Default::default() };
        let r = minimize_jellium(&k, &dom, n, &opts).unwrap();
        let xi = r.energy.total;
        let avg = jellium_average_energy(&k, &dom, n).unwrap();
        assert!(jellium_lower_bound(&k, n) <= xi, "s={s} d={d}");
        assert!(xi <= avg && avg < 0.0, "s={s} d={d}: {xi} vs {avg}");
        assert_eq!(r.configuration.len(), n);
        assert!(r.configuration.points.iter().all(|p| dom.contains_closed(p)));
        let again = e_jel(&k, &dom, &r.configuration).unwrap().total;
        assert!((again - xi).abs() < 1e-9 * xi.abs());
    }
}

#[test]
fn one_dimensional_minimizer_beats_the_centred_lattice() {
    let k = RieszKernel::new(0.5, 1).unwrap();
    let n = 10;
    let dom = CubeDomain::anchored(1, n as f64).unwrap();
    let r = minimize_jellium(&k, &dom, n, &MinimizeOptions { restarts: 3, seed: 1, ..Default::default() }).unwrap();
    let lattice: Vec<f64> = (0..n).map(|i| i as f64 + 0.5).collect();
    let want = interval_oracle(0.5, 0.0, n as f64, &lattice);
    assert!(r.energy.total <= want + 1e-9, "{} vs {want}", r.energy.total);
    assert!(r.configuration.min_separation() > 0.5);
    assert!(check_separation(&r, &k, 0.1).is_err());
}

#[test]
fn coincident_points_are_rejected() {
    let k = RieszKernel::new(1.0, 2).unwrap();
    let dom = CubeDomain::anchored(2, 2.0).unwrap();
    let cfg = PointConfiguration::new(2, vec![vec![0.5, 0.5], vec![1.0, 1.0], vec![0.5, 0.5]]).unwrap();
    assert!(e_jel(&k, &dom, &cfg).is_err());
}
