use crate::config::*;
use crate::{num, CliError, Command, Context, Output, Table};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rieszlab::analysis::{
    compare_constants, comparison_limits, extrapolate_constant, refine_grid, scan_s, CompareBudgets, FitModel, ScanProblem,
};
use rieszlab::decomposition::{fg_energy_split, swiss_cheese, BallPacking, FgSplitOptions, PackingOptions};
use rieszlab::jellium::{
    check_separation, e_jel, e_ueg, jel_ueg_gap, jellium_lower_bound, minimize_jellium, EnergyBreakdown, MinimizeOptions,
};
use rieszlab::lattice::{lattice_in_cube, periodic_energy_per_point, reflect_symmetrize, LatticeMethod};
use rieszlab::transport::{exc, mmot_bruteforce, monotone_1d, plan_separation_bound, MeanField, PiecewiseDensity};
use rieszlab::{CubeDomain, PeriodicConfiguration, PointConfiguration, RieszKernel, UniformMeasure};
use serde_json::json;

type Res<T> = Result<T, CliError>;

pub fn dispatch(ctx: &Context, text: &str) -> Res<Output> {
    match ctx.command {
        Command::Energy => energy(ctx, parse(text)?),
        Command::Minimize => minimize(ctx, parse(text)?),
        Command::LatticeConst => lattice_const(ctx, parse(text)?),
        Command::Mmot => mmot(ctx, parse(text)?),
        Command::Monotone1d => monotone(ctx, parse(text)?),
        Command::SwissCheese => cheese(ctx, parse(text)?),
        Command::FgSplit => fg_split(ctx, parse(text)?),
        Command::ScanS => scan(ctx, parse(text)?),
        Command::Compare => compare(ctx, parse(text)?),
        Command::Limits => limits(ctx, parse(text)?),
    }
}

fn name_of(ctx: &Context, name: &Option<String>) -> String {
    name.clone().unwrap_or_else(|| ctx.command.label().to_string())
}

fn to_value<T: serde::Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("serializable result")
}

fn breakdown_row(label: &str, n: usize, e: &EnergyBreakdown) -> Vec<String> {
    vec![label.into(), n.to_string(), num(e.pair_sum), num(e.attraction), num(e.background_self), num(e.total)]
}

fn energy(ctx: &Context, cfg: EnergyConfig) -> Res<Output> {
    let k = cfg.kernel.build("kernel")?;
    let d = k.d;
    let pts = match (&cfg.points, &cfg.points_csv) {
        (Some(p), None) => points(d, p, "points")?,
        (None, Some(f)) => points_csv(d, &resolve(&ctx.base_dir, f), "points_csv")?,
        _ => return Err(CliError::config("points", "give exactly one of `points` or `points_csv`")),
    };
    if pts.is_empty() {
        return Err(CliError::config("points", "need at least one point"));
    }
    let n = pts.len();
    let domain = match &cfg.domain {
        Some(c) => c.build(d, "domain")?,
        None => CubeDomain::anchored(d, (n as f64).powf(1.0 / d as f64))?,
    };
    let mu = UniformMeasure::new(domain.clone(), n as f64 / domain.volume())?;
    let mut table = Table::new(["mode", "n", "pair_sum", "attraction", "background_self", "total"]);
    let mut result = json!({ "n": n, "domain": domain });
    if cfg.mode != EnergyKind::Ueg {
        let e = e_jel(&k, &domain, &pts)?;
        table.push(breakdown_row("jellium", n, &e));
        result["jellium"] = to_value(&e);
    }
    if cfg.mode != EnergyKind::Jellium {
        let e = e_ueg(&k, &mu, &pts)?;
        table.push(breakdown_row("ueg", n, &e));
        result["ueg"] = to_value(&e);
    }
    if cfg.mode == EnergyKind::Both {
        result["ueg_minus_jellium"] = json!(jel_ueg_gap(&k, &mu, &pts)?);
    }
    Ok(Output { name: name_of(ctx, &cfg.name), seed: None, table, result, extras: Vec::new() })
}

fn minimize_options(ctx: &Context, seed: u64, restarts: Option<usize>, max_iterations: Option<usize>, tol: Option<f64>) -> MinimizeOptions {
    let mut o = MinimizeOptions { seed, ..Default::default() };
    if let Some(r) = restarts {
        o.restarts = r;
    }
    if let Some(m) = max_iterations {
        o.max_iterations = m;
    }
    if let Some(t) = ctx.tolerance.or(tol) {
        o.tolerance = t;
    }
    o
}

fn minimize(ctx: &Context, cfg: MinimizeConfig) -> Res<Output> {
    let k = cfg.kernel.build("kernel")?;
    cfg.validate()?;
    let seed = ctx.require_seed(cfg.seed)?;
    let mut opts = minimize_options(ctx, seed, cfg.restarts, cfg.max_iterations, cfg.tolerance);
    if let Some(a) = cfg.anneal_stages {
        opts.anneal_stages = a;
    }
    let d = k.d;
    let df = d as f64;
    let epsilon = match cfg.epsilon {
        Some(e) if !(e > 0.0 && e <= 2.0 && k.s <= df - e + 1e-12) => {
            return Err(CliError::config("epsilon", format!("need 0 < epsilon <= min(2, d - s), got {e}")))
        }
        Some(e) => Some(e),
        None if d >= 3 && k.s >= df - 2.0 => Some((df - k.s).min(2.0)),
        None => None,
    };
    let mut table = Table::new(["n", "xi", "xi_per_n", "lower_bound", "converged", "gradient_norm", "min_separation"]);
    let mut points_table = Table::new(["n", "index"].into_iter().map(String::from).chain((0..d).map(|a| format!("x{a}"))));
    let mut rows = Vec::new();
    let mut series = Vec::new();
    let mut bounds_ok = true;
    for &n in &cfg.ns {
        let cube = CubeDomain::anchored(d, (n as f64).powf(1.0 / df))?;
        let r = minimize_jellium(&k, &cube, n, &opts)?;
        let xi = r.energy.total;
        let lb = jellium_lower_bound(&k, n);
        bounds_ok &= lb <= xi && xi <= 0.0;
        let sep = match epsilon {
            Some(e) if d >= 3 => Some(check_separation(&r, &k, e)?),
            _ => None,
        };
        table.push(vec![
            n.to_string(),
            num(xi),
            num(xi / n as f64),
            num(lb),
            r.converged.to_string(),
            num(r.gradient_norm),
            num(r.separation),
        ]);
        if cfg.write_points {
            for (i, p) in r.configuration.points.iter().enumerate() {
                let mut row = vec![n.to_string(), i.to_string()];
                row.extend(p.iter().map(|&x| num(x)));
                points_table.push(row);
            }
        }
        series.push((n as f64, xi / n as f64));
        rows.push(json!({
            "n": n,
            "xi": xi,
            "xi_per_n": xi / n as f64,
            "energy": r.energy,
            "lower_bound": lb,
            "converged": r.converged,
            "gradient_norm": r.gradient_norm,
            "min_separation": r.separation,
            "separation_certificate": sep,
        }));
    }
    let mut result = json!({ "rows": rows, "bounds_ok": bounds_ok, "epsilon": epsilon, "options": opts });
    let distinct = {
        let mut ns = cfg.ns.clone();
        ns.sort_unstable();
        ns.dedup();
        ns.len()
    };
    if distinct >= 3 {
        let series = sorted_series(series);
        match extrapolate_constant(&series, &FitModel::surface_for(d, series.len())) {
            Ok(est) => result["constant"] = to_value(&est),
            Err(e) => result["constant_error"] = json!(e.to_string()),
        }
    } else {
        result["constant_error"] = json!("need at least three distinct N to extrapolate");
    }
    let mut extras = Vec::new();
    if cfg.write_points {
        extras.push(("points.csv".to_string(), table_to_string(&points_table)?));
    }
    Ok(Output { name: name_of(ctx, &cfg.name), seed: Some(seed), table, result, extras })
}

fn sorted_series(mut series: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    series.sort_by(|a, b| a.0.total_cmp(&b.0));
    series.dedup_by(|a, b| a.0 == b.0);
    series
}

fn table_to_string(t: &Table) -> Res<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&t.header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in &t.rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).map_err(|e| CliError::Io(e.to_string()))
}

fn lattice_const(ctx: &Context, cfg: LatticeConfig) -> Res<Output> {
    let k = cfg.kernel.build("kernel")?;
    let l = cfg.lattice.build(k.d, &ctx.base_dir, "lattice")?;
    if k.s < k.d as f64 - 2.0 - 1e-12 {
        return Err(CliError::config("kernel.s", format!("lattice constants need s >= d - 2, got {}", k.s)));
    }
    let method = cfg.method.map(|m| match m {
        MethodSpec::Ewald => LatticeMethod::Ewald,
        MethodSpec::Windowed => LatticeMethod::Windowed,
    });
    let c = periodic_energy_per_point(&k, &l, method, &cfg.windows)?;
    let mut table = Table::new(["quantity", "n", "value", "error"]);
    table.push(vec!["value".into(), String::new(), num(c.value), num(c.error)]);
    table.push(vec!["half_value".into(), String::new(), num(c.half_value), num(c.half_error)]);
    for &(n, e) in &c.series {
        table.push(vec!["window".into(), num(n), num(e), String::new()]);
    }
    let result = json!({
        "lattice": c.lattice,
        "basis": l.basis,
        "method": c.method,
        "value": c.value,
        "error": c.error,
        "half_value": c.half_value,
        "half_error": c.half_error,
        "series": c.series,
        "warning": c.warning,
    });
    Ok(Output { name: name_of(ctx, &cfg.name), seed: None, table, result, extras: Vec::new() })
}

fn mmot(ctx: &Context, cfg: MmotConfig) -> Res<Output> {
    let k = cfg.kernel.build("kernel")?;
    if cfg.n < 2 {
        return Err(CliError::config("n", "need at least two marginals"));
    }
    let mu = cfg.marginal.build(k.d, &ctx.base_dir, "marginal")?;
    let sol = mmot_bruteforce(&k, &mu, cfg.n)?;
    let n = cfg.n;
    let d = k.d;
    let mut header = vec!["weight".to_string()];
    header.extend((0..n).map(|j| format!("site{j}")));
    for j in 0..n {
        header.extend((0..d).map(|a| format!("x{j}_{a}")));
    }
    let mut table = Table::new(header);
    for (t, &w) in sol.plan.tuples.iter().zip(&sol.plan.weights) {
        let mut row = vec![num(w)];
        row.extend(t.iter().map(|i| i.to_string()));
        for &i in t {
            row.extend(mu.sites[i].iter().map(|&x| num(x)));
        }
        table.push(row);
    }
    let e = exc(&k, &mu, n, sol.cost).ok();
    let scale = (n as f64).powf(1.0 + k.s / d as f64);
    let separation = plan_separation_bound(&k, &mu, n).ok();
    let result = json!({
        "n": n,
        "sites": mu.len(),
        "cost": sol.cost,
        "exc": e,
        "exc_scaled": e.map(|v| v / scale),
        "certificate": sol.certificate,
        "certificate_passed": sol.certificate.passed(sol.cost),
        "plan_min_separation": sol.plan.min_separation(&mu),
        "separation_bound": separation,
    });
    Ok(Output { name: name_of(ctx, &cfg.name), seed: None, table, result, extras: Vec::new() })
}

fn monotone(ctx: &Context, cfg: Monotone1dConfig) -> Res<Output> {
    if !(cfg.s > 0.0 && cfg.s < 1.0) {
        return Err(CliError::config("s", format!("need 0 < s < 1, got {}", cfg.s)));
    }
    let k = RieszKernel::new(cfg.s, 1)?;
    let rho = match &cfg.density {
        Some(spec) => spec.build("density")?,
        None => PiecewiseDensity::uniform(0.0, 1.0)?,
    };
    if cfg.ns.is_empty() {
        return Err(CliError::config("ns", "need at least one N"));
    }
    for (i, &n) in cfg.ns.iter().enumerate() {
        if n < 2 {
            return Err(CliError::config(format!("ns[{i}]"), "N must be at least 2"));
        }
    }
    let mf = rho.mean_field(&k)?;
    let mut table = Table::new(["n", "cost", "exc", "exc_scaled"]);
    let mut series = Vec::new();
    let mut rows = Vec::new();
    for &n in &cfg.ns {
        let cost = monotone_1d(&k, &rho, n)?;
        let e = exc(&k, &rho, n, cost)?;
        let scaled = e / (n as f64).powf(1.0 + cfg.s);
        table.push(vec![n.to_string(), num(cost), num(e), num(scaled)]);
        series.push((n as f64, scaled));
        rows.push(json!({ "n": n, "cost": cost, "exc": e, "exc_scaled": scaled }));
    }
    let mut result = json!({ "mean_field": mf, "rows": rows });
    let series = sorted_series(series);
    if series.len() >= 3 {
        match extrapolate_constant(&series, &FitModel::surface_for(1, series.len())) {
            Ok(est) => result["constant"] = to_value(&est),
            Err(e) => result["constant_error"] = json!(e.to_string()),
        }
    }
    Ok(Output { name: name_of(ctx, &cfg.name), seed: None, table, result, extras: Vec::new() })
}

fn packing_table(p: &BallPacking) -> Table {
    let d = p.dim();
    let mut t = Table::new(["family", "radius"].into_iter().map(String::from).chain((0..d).map(|a| format!("x{a}"))));
    for i in 0..p.len() {
        let mut row = vec![p.family[i].to_string(), num(p.radii[i])];
        row.extend(p.centers[i].iter().map(|&x| num(x)));
        t.push(row);
    }
    t
}

fn packing_summary(p: &BallPacking) -> serde_json::Value {
    json!({
        "cube": p.cube,
        "ladder": p.ladder,
        "balls": p.len(),
        "counts": p.counts(),
        "seed": p.seed,
        "certificate": p.certificate,
        "passed": p.certificate.passed(),
    })
}

fn cheese(ctx: &Context, cfg: SwissCheeseConfig) -> Res<Output> {
    let seed = ctx.require_seed(cfg.seed)?;
    if cfg.d < 2 {
        return Err(CliError::config("d", "packings need d >= 2"));
    }
    let cube = cfg.cube.build(cfg.d, "cube")?;
    let mut opts = PackingOptions { seed, ..Default::default() };
    if let Some(b) = cfg.seed_budget {
        if b == 0 {
            return Err(CliError::config("seed_budget", "need at least one attempt"));
        }
        opts.seed_budget = b;
    }
    let p = swiss_cheese(&cube, &cfg.ladder, &opts).map_err(|e| match e {
        rieszlab::Error::Parameter { reason, .. } => CliError::config("ladder", reason),
        other => other.into(),
    })?;
    let json = p.to_json()?;
    Ok(Output {
        name: name_of(ctx, &cfg.name),
        seed: Some(seed),
        table: packing_table(&p),
        result: packing_summary(&p),
        extras: vec![("packing.json".into(), json)],
    })
}

fn fg_split(ctx: &Context, cfg: FgSplitConfig) -> Res<Output> {
    let k = cfg.kernel.build("kernel")?;
    let seed = ctx.require_seed(cfg.seed)?;
    let packing = match &cfg.packing {
        PackingSource::File(f) => {
            let p = BallPacking::load(resolve(&ctx.base_dir, f)).map_err(|e| CliError::config("packing.file", e.to_string()))?;
            if !p.verify().passed() {
                return Err(CliError::config("packing.file", "packing fails its certificates"));
            }
            p
        }
        PackingSource::Generate { cube, ladder, seed_budget } => {
            let cube = cube.build(k.d, "packing.generate.cube")?;
            let opts = PackingOptions { seed, seed_budget: seed_budget.unwrap_or(PackingOptions::default().seed_budget) };
            swiss_cheese(&cube, ladder, &opts)?
        }
    };
    if packing.dim() != k.d {
        return Err(CliError::config("packing", format!("packing has dimension {}, kernel has d = {}", packing.dim(), k.d)));
    }
    let config = match &cfg.points {
        PointSource::Explicit(p) => points(k.d, p, "points.explicit")?,
        PointSource::Csv(f) => points_csv(k.d, &resolve(&ctx.base_dir, f), "points.csv")?,
        PointSource::Random(n) => {
            if *n < 2 {
                return Err(CliError::config("points.random", "need at least two points"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::MAX);
            let lo = packing.cube.lower();
            let side = packing.cube.side;
            let pts = (0..*n).map(|_| lo.iter().map(|&l| l + side * rng.random::<f64>()).collect()).collect();
            PointConfiguration::new(k.d, pts)?
        }
    };
    let mut opts = FgSplitOptions { seed, c_const: cfg.c_const, ..Default::default() };
    if let Some(s) = cfg.samples {
        if s < 2 {
            return Err(CliError::config("samples", "need at least two samples"));
        }
        opts.samples = s;
    }
    if let Some(kp) = cfg.kappa {
        if !(kp > 0.0 && kp < 1.0) {
            return Err(CliError::config("kappa", format!("need 0 < kappa < 1, got {kp}")));
        }
        opts.kappa = kp;
    }
    let r = fg_energy_split(&k, &config, &packing, &opts)?;
    let mut table = Table::new([
        "n", "full", "weight", "localized", "localized_se", "localized_exact", "residual", "residual_exact", "z_score", "passed",
    ]);
    table.push(vec![
        config.len().to_string(),
        num(r.full),
        num(r.weight),
        num(r.localized),
        num(r.localized_se),
        num(r.localized_exact),
        num(r.residual),
        num(r.residual_exact),
        num(r.z_score),
        r.passed.to_string(),
    ]);
    let result = json!({ "split": r, "options": opts, "packing": packing_summary(&packing), "points": config.len() });
    Ok(Output { name: name_of(ctx, &cfg.name), seed: Some(seed), table, result, extras: Vec::new() })
}

fn scan(ctx: &Context, cfg: ScanConfig) -> Res<Output> {
    if cfg.s_grid.is_empty() {
        return Err(CliError::config("s_grid", "need at least one exponent"));
    }
    if cfg.s_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::config("s_grid", "exponents must be strictly increasing"));
    }
    let (problem, d, seed) = match &cfg.problem {
        ScanProblemSpec::Jellium { d, restarts, max_iterations } => {
            let seed = ctx.require_seed(cfg.seed)?;
            let opts = minimize_options(ctx, seed, *restarts, *max_iterations, None);
            (ScanProblem::Jellium { d: *d, options: opts }, *d, Some(seed))
        }
        ScanProblemSpec::Ot { d, marginal } => {
            (ScanProblem::Ot { marginal: marginal.build(*d, &ctx.base_dir, "problem.ot.marginal")? }, *d, None)
        }
        ScanProblemSpec::Monotone { density } => {
            let rho = match density {
                Some(s) => s.build("problem.monotone.density")?,
                None => PiecewiseDensity::uniform(0.0, 1.0)?,
            };
            (ScanProblem::OtMonotone { density: rho }, 1, None)
        }
    };
    if d == 0 {
        return Err(CliError::config("problem.d", "dimension must be at least 1"));
    }
    let lo = if matches!(problem, ScanProblem::Jellium { .. }) { (d as f64 - 2.0).max(0.0) } else { 0.0 };
    for (i, &s) in cfg.s_grid.iter().enumerate() {
        let ok = s < d as f64 && (s > lo || (s == lo && lo > 0.0));
        if !ok {
            return Err(CliError::config(format!("s_grid[{i}]"), format!("need {lo} < s < {d} (s = d - 2 allowed for jellium), got {s}")));
        }
    }
    if cfg.n < 2 {
        return Err(CliError::config("n", "need N >= 2"));
    }
    let coarse = scan_s(&problem, cfg.n, &cfg.s_grid)?;
    let mut table = Table::new(["grid", "s", "value"]);
    for (s, v) in coarse.s.iter().zip(&coarse.values) {
        table.push(vec!["coarse".into(), num(*s), num(*v)]);
    }
    let mut result = json!({ "n": cfg.n, "coarse": coarse });
    if cfg.refine && cfg.s_grid.len() >= 2 {
        let fine = scan_s(&problem, cfg.n, &refine_grid(&cfg.s_grid))?;
        for (s, v) in fine.s.iter().zip(&fine.values) {
            table.push(vec!["fine".into(), num(*s), num(*v)]);
        }
        let ratio = match (coarse.max_jump, fine.max_jump) {
            (Some(a), Some(b)) if a > 0.0 => Some(b / a),
            _ => None,
        };
        result["jump_ratio"] = json!(ratio);
        result["halving_ok"] = json!(ratio.map(|r| r <= 0.6));
        result["fine"] = to_value(&fine);
    }
    Ok(Output { name: name_of(ctx, &cfg.name), seed, table, result, extras: Vec::new() })
}

fn compare(ctx: &Context, cfg: CompareConfig) -> Res<Output> {
    let k = cfg.kernel.build("kernel")?;
    let seed = ctx.require_seed(cfg.seed)?;
    let mut b = CompareBudgets { minimize: minimize_options(ctx, seed, cfg.restarts, cfg.max_iterations, None), ..Default::default() };
    let check_ns = |ns: &Vec<usize>, field: &str| -> Res<()> {
        if ns.len() < 3 {
            return Err(CliError::config(field, "need at least three values of N"));
        }
        if let Some(i) = ns.iter().position(|&n| n < 2) {
            return Err(CliError::config(format!("{field}[{i}]"), "N must be at least 2"));
        }
        Ok(())
    };
    if let Some(ns) = &cfg.jellium_ns {
        check_ns(ns, "jellium_ns")?;
        b.jellium_ns = ns.clone();
    }
    if let Some(ns) = &cfg.ot_ns {
        check_ns(ns, "ot_ns")?;
        b.ot_ns = ns.clone();
    }
    if let Some(g) = cfg.grid_per_side {
        b.grid_per_side = g;
    }
    b.lattice = cfg.lattice.clone();
    let c = compare_constants(&k, &b)?;
    let mut table = Table::new(["channel", "n", "value", "error"]);
    for &(n, v) in &c.jellium.series {
        table.push(vec!["jellium".into(), num(n), num(v), String::new()]);
    }
    for &(n, v) in &c.ueg_series {
        table.push(vec!["ueg".into(), num(n), num(v), String::new()]);
    }
    table.push(vec!["jellium_constant".into(), "inf".into(), num(c.jellium.value), num(c.jellium.error)]);
    if let Some(u) = &c.ueg {
        table.push(vec!["ueg_constant".into(), "inf".into(), num(u.value), num(u.error)]);
    }
    if let Some(l) = &c.lattice {
        table.push(vec![format!("lattice_{}", l.lattice), "inf".into(), num(l.value), num(l.error)]);
    }
    let result = json!({ "comparison": c, "budgets": b });
    Ok(Output { name: name_of(ctx, &cfg.name), seed: Some(seed), table, result, extras: Vec::new() })
}

/// Conventional cubic cell of a lattice, shifted so that it holds a
/// zero-barycenter set of interior points.
fn lattice_cell(name: &str, d: usize) -> Res<PeriodicConfiguration> {
    let l = rieszlab::lattice::Lattice::by_name(name, d).map_err(|e| CliError::config("cell.lattice", e.to_string()))?;
    let a = l.cubic_period().ok_or_else(|| CliError::config("cell.lattice", format!("{name} has no cubic period")))?;
    for f in [0.0, 0.25, 0.125, 0.375] {
        let cube = CubeDomain::new(vec![f * a; d], a)?;
        let pts = lattice_in_cube(&l, &cube)?;
        let lo = cube.lower();
        let interior = pts.points.iter().all(|p| p.iter().zip(&lo).all(|(x, l)| (x - l).abs() > 1e-9));
        if !interior {
            continue;
        }
        if let Ok(pc) = PeriodicConfiguration::new(cube, pts, true) {
            return Ok(pc);
        }
    }
    Err(CliError::config("cell.lattice", format!("no zero-barycenter cubic cell found for {name}")))
}

fn limits(ctx: &Context, cfg: LimitsConfig) -> Res<Output> {
    let k = cfg.kernel.build("kernel")?;
    let d = k.d;
    if k.s < d as f64 - 2.0 - 1e-12 {
        return Err(CliError::config("kernel.s", format!("need s >= d - 2, got {}", k.s)));
    }
    let base = match &cfg.cell {
        CellSpec::Lattice(name) => lattice_cell(name, d)?,
        CellSpec::Explicit { side, points: pts, center, reflect } => {
            let cube = CubeSpec { side: *side, center: center.clone() }.build(d, "cell.explicit")?;
            let pts = points(d, pts, "cell.explicit.points")?;
            let err = |e: rieszlab::Error| CliError::config("cell.explicit.points", e.to_string());
            if *reflect {
                reflect_symmetrize(&PeriodicConfiguration::new(cube, pts, false).map_err(err)?).map_err(err)?
            } else {
                PeriodicConfiguration::new(cube, pts, true).map_err(err)?
            }
        }
    };
    if cfg.multiples.is_empty() || cfg.multiples[0] == 0 || cfg.multiples.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::config("multiples", "need strictly increasing positive integers"));
    }
    let rep = comparison_limits(&k, &base, &cfg.multiples)?;
    let mut table = Table::new(["r", "n", "ueg_minus_jel", "plan_minus_ueg"]);
    for r in &rep.rows {
        table.push(vec![num(r.r), r.n.to_string(), num(r.ueg_minus_jel), num(r.plan_minus_ueg)]);
    }
    let result = json!({ "cell": base, "report": rep });
    Ok(Output { name: name_of(ctx, &cfg.name), seed: None, table, result, extras: Vec::new() })
}
