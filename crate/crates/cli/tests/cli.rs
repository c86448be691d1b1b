use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stmcirc_cli::commands::build_design;
use stmcirc_cli::table::map_from_csv;
use stmcirc_cli::touchstone::S3p;
use stmcirc_cli::{parse_config, DEFAULT_CONFIG};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stmcirc"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

/// Reference config with `replace` lines substituted by key.
fn variant(dir: &Path, name: &str, replace: &[&str]) -> PathBuf {
    let keys: Vec<&str> = replace.iter().map(|l| l.split('=').next().unwrap().trim()).collect();
    let mut text: String = DEFAULT_CONFIG
        .lines()
        .filter(|l| !keys.iter().any(|k| l.trim_start().starts_with(k)))
        .map(|l| format!("{l}\n"))
        .collect();
    for l in replace {
        text.push_str(l);
        text.push('\n');
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn unknown_key_is_a_config_error_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "bad.cfg", &["junction.bogus = 1"]);
    let o = run(&["design"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("junction.bogus") && e.contains("line"), "{e}");
}

#[test]
fn malformed_and_missing_inputs_exit_with_config_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = variant(dir.path(), "nan.cfg", &["junction.c0_pF = twelve"]);
    assert_eq!(run(&["junction"], &cfg, &out).status.code(), Some(2));
    let cfg = variant(dir.path(), "grid.cfg", &["grid.points = 101"]);
    assert_eq!(run(&["junction"], &cfg, &out).status.code(), Some(2));
    assert_eq!(run(&["bound"], &dir.path().join("missing.cfg"), &out).status.code(), Some(2));
}

#[test]
fn unreachable_isolation_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "b80.cfg", &["spec.beta_dB = 80"]);
    let o = run(&["design"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn reference_design_writes_every_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["design"], &configs().join("anchored.cfg"), &out);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "design.s3p",
        "design_sparams.csv",
        "design_mag.svg",
        "design_phase.svg",
        "elements.csv",
        "metrics.csv",
        "metrics.txt",
    ] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let report = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(report.contains("972.0") && report.contains("1045.0"), "{report}");
}

#[test]
fn format_selection_limits_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_stmcirc"))
        .args(["junction", "--format", "csv", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert!(names.iter().all(|n| n.ends_with(".csv")), "{names:?}");
    assert!(names.contains(&"yc.csv".to_string()));
}

#[test]
fn touchstone_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg_path = configs().join("anchored.cfg");
    assert!(run(&["design"], &cfg_path, &out).status.success());
    let parsed = S3p::parse(&std::fs::read_to_string(out.join("design.s3p")).unwrap()).unwrap();
    let cfg = stmcirc_cli::load_config(&cfg_path).unwrap();
    let (_, design, _) = build_design(&cfg).unwrap();
    let resp = &design.response;
    assert_eq!(parsed.freqs.len(), resp.freq_grid.len());
    assert_eq!(parsed.z0, 50.0);
    for (k, (f, s)) in resp.freq_grid.iter().zip(&resp.s).enumerate() {
        assert!((parsed.freqs[k] - f).abs() <= 1e-8 * f);
        let m = s.expand();
        for (got, want) in parsed.data[k].iter().flatten().zip(m.iter().flatten()) {
            let d = got - want;
            assert!(d.re.abs() <= 1e-8 * want.re.abs().max(1e-300));
            assert!(d.im.abs() <= 1e-8 * want.im.abs().max(1e-300));
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(
        dir.path(),
        "small.cfg",
        &["sweep.fm_points = 12", "sweep.dc_points = 12"],
    );
    let files = ["sweep_map.csv", "sweep_locus.csv", "design.s3p", "metrics.csv", "design_sparams.csv"];
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        assert!(run(&["sweep"], &cfg, &out).status.success());
        assert!(run(&["design"], &cfg, &out).status.success());
        outputs.push(files.map(|f| std::fs::read(out.join(f)).unwrap()));
    }
    assert!(outputs[0] == outputs[1]);
}

#[test]
fn sweep_map_reloads_and_respects_the_modulation_clamp() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(
        dir.path(),
        "row.cfg",
        &["sweep.fm_min = 0.02", "sweep.fm_max = 0.03", "sweep.fm_points = 2", "sweep.dc_points = 30"],
    );
    let out = dir.path().join("out");
    let o = run(&["sweep"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let map = map_from_csv(&std::fs::read_to_string(out.join("sweep_map.csv")).unwrap()).unwrap();
    assert_eq!(map.fm_ratios, vec![0.02, 0.03]);
    // fm is 2 % of each cell's modulated tank resonance; the bound is
    // relative to the B = 0 center, which sits within 0.1 % of it.
    let base = stmcirc_cli::load_config(&cfg).unwrap().junction;
    let feasible: Vec<_> = map.cells[0].iter().filter(|c| c.feasible).collect();
    assert!(!feasible.is_empty());
    for c in feasible {
        let (b, fc) = (c.bound_frac.unwrap(), c.center.unwrap());
        let fm = 0.02 * base.with_dc_ratio(c.dc_ratio).unwrap().f_resonance();
        assert!(b <= 2.0 * fm / fc * (1.0 + 1e-9), "bound {b}");
        assert!(b <= 0.04 * 1.001, "bound {b}");
    }
}

#[test]
fn sweep_without_feasible_cells_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(
        dir.path(),
        "weak.cfg",
        &["sweep.dc_min = 0.001", "sweep.dc_max = 0.002", "sweep.fm_points = 4", "sweep.dc_points = 4"],
    );
    let o = run(&["sweep"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn unmodulated_junction_is_reciprocal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "dc0.cfg", &["junction.dc_ratio = 0"]);
    let out = dir.path().join("out");
    let o = run(&["junction"], &cfg, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("junction_sparams.csv")).unwrap();
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let h = r.headers().unwrap().clone();
    let col = |name: &str| h.iter().position(|x| x == name).unwrap();
    let (a, b, c, d) = (col("s21_re"), col("s21_im"), col("s31_re"), col("s31_im"));
    for rec in r.records() {
        let rec = rec.unwrap();
        let v = |k: usize| rec[k].parse::<f64>().unwrap();
        for (x, y) in [(v(a), v(c)), (v(b), v(d))] {
            assert!((x - y).abs() <= 1e-13 * x.abs().max(y.abs()), "{x} vs {y}");
        }
    }
}

#[test]
fn verify_passes_on_reference_and_warns_on_deep_modulation() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify"], &configs().join("reference.cfg"), &dir.path().join("a"));
    let report = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(o.status.success(), "{report}{}", stderr(&o));
    assert!(!report.contains("FAIL"));

    let cfg = variant(dir.path(), "deep.cfg", &["junction.dc_ratio = 0.99"]);
    let o = run(&["verify"], &cfg, &dir.path().join("b"));
    let report = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(o.status.success());
    assert!(report.lines().any(|l| l.starts_with("WARN") && l.contains("truncation")), "{report}");
}

#[test]
fn lossless_junction_is_conjugately_matched() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = variant(dir.path(), "lossless.cfg", &["junction.q0 = inf"]);
    let o = run(&["verify"], &cfg, &dir.path().join("out"));
    let report = String::from_utf8_lossy(&o.stdout).into_owned();
    assert!(o.status.success(), "{report}");
    assert!(report.lines().any(|l| l.starts_with("PASS") && l.contains("Yin = Yc*")));
}

#[test]
fn default_config_is_the_shipped_reference() {
    let embedded = parse_config(DEFAULT_CONFIG).unwrap();
    let shipped = stmcirc_cli::load_config(&configs().join("reference.cfg")).unwrap();
    assert_eq!(embedded, shipped);
}
