use std::path::Path;
use std::process::{Command, Output};

fn rieszlab(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rieszlab"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn summary(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.summary.json"))).unwrap()).unwrap()
}

#[test]
fn minimize_writes_series_and_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "min.json", r#"{"kernel": {"s": 0.5, "d": 1}, "ns": [4, 8, 16]}"#);
    let out = rieszlab(&["minimize", "--seed", "1"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.path().join("minimize.csv")).unwrap();
    let header = rdr.headers().unwrap().clone();
    assert_eq!(&header[0], "n");
    assert_eq!(&header[2], "xi_per_n");
    let rows: Vec<(usize, f64)> =
        rdr.records().map(|r| r.unwrap()).map(|r| (r[0].parse().unwrap(), r[2].parse().unwrap())).collect();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![4, 8, 16]);
    assert!(rows.iter().all(|r| r.1 < 0.0));
    let s = summary(dir.path(), "minimize");
    let c = s["result"]["constant"]["value"].as_f64().unwrap();
    assert!((c + 2.9207).abs() < 5e-3, "{c}");
    assert_eq!(s["provenance"]["seed"], 1);
}

#[test]
fn lattice_constant_for_bcc() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bcc.json", r#"{"name": "bcc", "kernel": {"s": 1, "d": 3}, "lattice": {"name": "bcc"}}"#);
    let out = rieszlab(&["lattice-const"], &cfg, dir.path());
    assert!(out.status.success());
    let v = summary(dir.path(), "bcc")["result"]["half_value"].as_f64().unwrap();
    assert!((v + 1.4442).abs() < 2e-3, "{v}");
}

#[test]
fn lattice_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "z1.json", r#"{"name": "integers", "basis": [[1.0]]}"#);
    let cfg = write(dir.path(), "c.json", r#"{"kernel": {"s": 0.5, "d": 1}, "lattice": {"file": "z1.json"}, "method": "ewald"}"#);
    let out = rieszlab(&["lattice-const"], &cfg, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = summary(dir.path(), "lattice-const")["result"]["value"].as_f64().unwrap();
    assert!((v + 2.920709).abs() < 1e-5, "{v}");
}

#[test]
fn malformed_configs_exit_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (r#"{"kernel": {"s": "one", "d": 3}, "lattice": {"name": "bcc"}}"#, "kernel.s"),
        (r#"{"kernel": {"s": 1, "d": 3}, "lattis": {"name": "bcc"}}"#, "lattis"),
        (r#"{"kernel": {"s": 4, "d": 3}, "lattice": {"name": "bcc"}}"#, "kernel.s"),
        (r#"{"kernel": {"s": 1, "d": 3}}"#, "lattice"),
        (r#"{"kernel": {"s": 1, "d": 3}, "lattice": {"name": "bcc"}, "windows": [1, -2]}"#, "windows[1]"),
        (r#"{"kernel": {"s": 1, "d": 3}, "lattice": {"name": "bcc"#, "<document>"),
    ];
    for (i, (body, field)) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("bad{i}.json"), body);
        let out = rieszlab(&["lattice-const"], &cfg, dir.path());
        assert_eq!(out.status.code(), Some(2), "case {i}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(field), "case {i}: {err}");
    }
}

#[test]
fn stochastic_commands_require_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"d": 2, "cube": {"side": 128}, "ladder": [1]}"#);
    let out = rieszlab(&["swiss-cheese"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
    let out = rieszlab(&["swiss-cheese", "--seed", "4"], &cfg, dir.path());
    assert!(out.status.success());
    assert!(dir.path().join("swiss-cheese.packing.json").exists());
}

#[test]
fn numeric_failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "big.json",
        r#"{"kernel": {"s": 0.5, "d": 1}, "n": 6, "marginal": {"uniform_interval": {"a": 0, "b": 1, "m": 60}}}"#,
    );
    let out = rieszlab(&["mmot"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too large"));
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "fg.json",
        r#"{"kernel": {"s": 1, "d": 2},
            "packing": {"generate": {"cube": {"side": 128}, "ladder": [1]}},
            "points": {"random": 12}, "samples": 300}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(rieszlab(&["fg-split", "--seed", "9", "--threads", "1"], &cfg, &a).status.success());
    assert!(rieszlab(&["fg-split", "--seed", "9", "--threads", "4"], &cfg, &b).status.success());
    let read = |d: &Path| std::fs::read(d.join("fg-split.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert!(rieszlab(&["fg-split", "--seed", "10"], &cfg, &b).status.success());
    assert_ne!(read(&a), read(&b));
}

#[test]
fn summary_embeds_the_exact_config() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"s": 0.5, "ns": [2, 4, 8], "density": {"breaks": [0, 0.5, 1], "values": [1.5, 0.5]}}"#;
    let cfg = write(dir.path(), "m.json", body);
    assert!(rieszlab(&["monotone1d"], &cfg, dir.path()).status.success());
    let s = summary(dir.path(), "monotone1d");
    let original: serde_json::Value = serde_json::from_str(body).unwrap();
    assert_eq!(s["config"], original);
    assert_eq!(s["command"], "monotone1d");
    assert_eq!(s["provenance"]["config_sha256"].as_str().unwrap(), rieszlab_cli::sha256_hex(body.as_bytes()));
    assert!(s["provenance"]["git_revision"].is_string());
    // the embedded config reruns to the same CSV
    let again = write(dir.path(), "again.json", &serde_json::to_string(&s["config"]).unwrap());
    let other = dir.path().join("again");
    assert!(rieszlab(&["monotone1d"], &again, &other).status.success());
    assert_eq!(
        std::fs::read(dir.path().join("monotone1d.csv")).unwrap(),
        std::fs::read(other.join("monotone1d.csv")).unwrap()
    );
}

#[test]
fn remaining_commands_run() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("energy", r#"{"kernel": {"s": 1, "d": 2}, "points": [[0.2, 0.3], [1.1, 1.4]], "mode": "both"}"#, None),
        ("mmot", r#"{"kernel": {"s": 0.5, "d": 1}, "n": 3, "marginal": {"uniform_interval": {"a": 0, "b": 1, "m": 12}}}"#, None),
        ("scan-s", r#"{"problem": {"monotone": {}}, "n": 3, "s_grid": [0.2, 0.5, 0.8]}"#, None),
        ("compare", r#"{"kernel": {"s": 0.5, "d": 1}, "jellium_ns": [4, 8, 16], "ot_ns": [4, 8, 16]}"#, Some("3")),
        ("limits", r#"{"kernel": {"s": 0.5, "d": 1}, "cell": {"explicit": {"side": 1, "points": [[0.3]], "reflect": true}}, "multiples": [1, 2, 4]}"#, None),
    ];
    for (cmd, body, seed) in cases {
        let cfg = write(dir.path(), &format!("{cmd}.json"), body);
        let mut args = vec![cmd];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        let out = rieszlab(&args, &cfg, dir.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(format!("{cmd}.csv")).exists());
        assert_eq!(summary(dir.path(), cmd)["command"], cmd);
    }
    let e = summary(dir.path(), "energy");
    let gap = e["result"]["ueg_minus_jellium"].as_f64().unwrap();
    let diff = e["result"]["ueg"]["total"].as_f64().unwrap() - e["result"]["jellium"]["total"].as_f64().unwrap();
    assert!((gap - diff).abs() < 1e-10 * diff.abs().max(1.0));
}
