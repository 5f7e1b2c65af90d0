use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn tqp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tqp"))
        .args(args)
        .output()
        .expect("tqp runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

/// Data rows of a CSV as maps from header to value.
fn csv_rows(path: &str) -> Vec<std::collections::HashMap<String, f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| {
            header
                .iter()
                .cloned()
                .zip(l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)))
                .collect()
        })
        .collect()
}

fn telegraph_config(tau_even: f64, tau_odd: f64, n_shots: usize) -> String {
    format!(
        r#"{{"telegraph": {{"tau_even": {tau_even}, "tau_odd": {tau_odd}, "n_shots": {n_shots}, "seed": 1}}}}"#
    )
}

#[test]
fn spectrum_is_deterministic_and_resolves_the_splitting() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "c.json",
        r#"{"spectrum": {"fields": [0.0, 0.25], "offset_charges": [0.0, 0.25]}}"#,
    );
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    assert_eq!(code(&tqp(&["spectrum", "-c", &cfg, "-o", &a])), 0);
    assert_eq!(code(&tqp(&["spectrum", "-c", &cfg, "-o", &b])), 0);
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("# config_sha256: "));
    assert!(text.contains("# tqp_version: "));
    let rows = csv_rows(&a);
    assert_eq!(rows.len(), 4);
    let at = rows.iter().find(|r| r["b_par_tesla"] == 0.25).unwrap();
    // GHz; at least 0.2 kHz
    assert!(at["df01"] >= 0.2e-6, "df01 = {} GHz", at["df01"]);
    assert!(at["f01"] > 4.0 && at["f01"] < 6.0);
}

#[test]
fn empty_grids_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "o.csv");
    let spectrum = write(&dir, "s.json", r#"{"spectrum": {"fields": []}}"#);
    let r = tqp(&["spectrum", "-c", &spectrum, "-o", &out]);
    assert_eq!(code(&r), 2, "{}", stderr(&r));
    assert!(stderr(&r).contains("empty grid"));
    let sweep = write(
        &dir,
        "w.json",
        r#"{"sweep": {"axis": "field", "values": [], "p1": {"fixed": {"p1": 0.054}}}}"#,
    );
    assert_eq!(code(&tqp(&["sweep", "-c", &sweep, "-o", &out])), 2);
    assert!(!Path::new(&out).exists());
}

#[test]
fn bad_configs_exit_2() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "o.csv");
    let unknown = write(
        &dir,
        "u.json",
        r#"{"spectrum": {"fields": [0.0]}, "colour": 1}"#,
    );
    let r = tqp(&["spectrum", "-c", &unknown, "-o", &out]);
    assert_eq!(code(&r), 2);
    assert!(stderr(&r).contains("colour"), "{}", stderr(&r));
    let missing_section = write(&dir, "m.json", "{}");
    assert_eq!(
        code(&tqp(&["sweep", "-c", &missing_section, "-o", &out])),
        2
    );
    assert_eq!(
        code(&tqp(&["spectrum", "-c", "/nonexistent.json", "-o", &out])),
        2
    );
    assert_eq!(code(&tqp(&["frobnicate"])), 2);
}

#[test]
fn missing_inputs_exit_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", "{}");
    let r = tqp(&["fit", "rates", "-c", &cfg, "-d", "/nonexistent/data.csv"]);
    assert_eq!(code(&r), 2, "{}", stderr(&r));
    assert_eq!(code(&tqp(&["analyze", "/nonexistent/trace.csv"])), 2);
}

#[test]
fn malformed_trace_reports_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &telegraph_config(1e-3, 1e-3, 2000));
    let trace = path(&dir, "t.csv");
    assert_eq!(code(&tqp(&["simulate", "-c", &cfg, "-o", &trace])), 0);
    let text = std::fs::read_to_string(&trace).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[9] = "0.001,not-a-number";
    std::fs::write(&trace, lines.join("\n") + "\n").unwrap();
    let r = tqp(&["analyze", &trace]);
    assert_eq!(code(&r), 4, "{}", stderr(&r));
    assert!(stderr(&r).contains(":10:"), "{}", stderr(&r));
}

#[test]
fn simulate_is_reproducible_and_analyze_recovers_dwell_times() {
    let dir = TempDir::new().unwrap();
    let (tau_even, tau_odd) = (1.208e-3, 1.088e-3);
    let cfg = write(
        &dir,
        "c.json",
        &telegraph_config(tau_even, tau_odd, 1 << 18),
    );
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    assert_eq!(code(&tqp(&["simulate", "-c", &cfg, "-o", &a])), 0);
    assert_eq!(code(&tqp(&["simulate", "-c", &cfg, "-o", &b])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let report = path(&dir, "r.json");
    let r = tqp(&["analyze", &a, "-o", &report]);
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let even = v["hmm"]["tau_p_even"].as_f64().unwrap();
    let odd = v["hmm"]["tau_p_odd"].as_f64().unwrap();
    assert!((even / tau_even - 1.0).abs() <= 0.1, "even {even}");
    assert!((odd / tau_odd - 1.0).abs() <= 0.1, "odd {odd}");
    let combined = 2.0 / (1.0 / tau_even + 1.0 / tau_odd);
    let spectral = v["psd"]["tau_p"].as_f64().unwrap();
    assert!(
        (spectral / combined - 1.0).abs() <= 0.1,
        "spectral {spectral}"
    );
    assert!(v["viterbi_switches"].as_u64().unwrap() > 100);
    assert!((v["fidelity"].as_f64().unwrap() - 0.89).abs() < 0.02);
    assert!(v["provenance"]["trace_sha256"].is_string());
}

#[test]
fn constant_parity_trace_fails_gracefully() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", &telegraph_config(1e6, 1e6, 20_000));
    let trace = path(&dir, "t.csv");
    assert_eq!(code(&tqp(&["simulate", "-c", &cfg, "-o", &trace])), 0);
    let r = tqp(&["analyze", &trace]);
    assert_eq!(code(&r), 3, "{}", stderr(&r));
    assert!(stderr(&r).contains("degenerate"), "{}", stderr(&r));
    assert!(r.stdout.is_empty());
}

#[test]
fn sweeps_match_across_worker_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = repo()
        .join("configs/field_sweep.json")
        .display()
        .to_string();
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    assert_eq!(code(&tqp(&["sweep", "-c", &cfg, "-o", &a, "-j", "1"])), 0);
    assert_eq!(code(&tqp(&["sweep", "-c", &cfg, "-o", &b, "-j", "3"])), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rows = csv_rows(&a);
    assert_eq!(rows.len(), 11);
    for r in &rows {
        let sum = r["paps"] + r["qp01"] + r["qp10"] + r["qpii"];
        assert!((sum * r["tau_p_even"] - 1.0).abs() < 1e-12);
    }
    assert_eq!(code(&tqp(&["sweep", "-c", &cfg, "-o", &a, "-j", "0"])), 2);
}

#[test]
fn temperature_sweep_shortens_lifetime_above_50_mk() {
    let dir = TempDir::new().unwrap();
    let cfg = repo()
        .join("configs/temperature_sweep.json")
        .display()
        .to_string();
    let out = path(&dir, "t.csv");
    assert_eq!(code(&tqp(&["sweep", "-c", &cfg, "-o", &out])), 0);
    let rows: Vec<_> = csv_rows(&out)
        .into_iter()
        .filter(|r| r["axis"] >= 0.05)
        .collect();
    assert!(rows.len() >= 5);
    for w in rows.windows(2) {
        assert!(w[1]["tau_p_even"] < w[0]["tau_p_even"]);
        assert!(w[1]["tau_p_odd"] < w[0]["tau_p_odd"]);
    }
}

fn fit(recipe: &str, data: &str) -> (Output, Value) {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", "{}");
    let report = path(&dir, "r.json");
    let data = repo().join("data").join(data).display().to_string();
    let r = tqp(&["fit", recipe, "-c", &cfg, "-d", &data, "-o", &report]);
    let v = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    (r, v)
}

#[test]
fn rates_fit_on_bundled_data() {
    let (r, v) = fit("rates", "parity_lifetimes.csv");
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert_eq!(v["converged"], true);
    let gap = v["fit"]["gap_difference"].as_f64().unwrap();
    assert!((5.0..=6.0).contains(&gap), "gap difference {gap}");
    assert!(v["fit"]["report"]["covariance"].is_array());
    let gaps = &v["device"]["gaps"];
    let applied = gaps["delta_b"].as_f64().unwrap() - gaps["delta_t"].as_f64().unwrap();
    assert!((applied - gap).abs() < 1e-12);
}

#[test]
fn spectrum_fit_on_bundled_data() {
    let (r, v) = fit("spectrum", "spectrum.csv");
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let f = &v["fit"];
    for (name, want, tol) in [
        ("ec", 0.3275, 0.01),
        ("ej0_a", 19.47, 0.01),
        ("ej0_b", 5.97, 0.01),
        ("b_c", 1.85, 0.02),
    ] {
        let got = f[name].as_f64().unwrap();
        assert!((got / want - 1.0).abs() <= tol, "{name}: {got}");
    }
    assert!((f["c2"].as_f64().unwrap() + 0.009).abs() < 1e-3);
}

#[test]
fn small_fits_on_bundled_data() {
    let (r, v) = fit("p1", "p1.csv");
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    assert!((v["fit"]["even"]["params"]["a"].as_f64().unwrap() - 0.034).abs() < 5e-3);
    let (r, v) = fit("t1", "t1.csv");
    assert_eq!(code(&r), 0, "{}", stderr(&r));
    let gamma = v["fit"]["gamma10_ee"].as_f64().unwrap();
    assert!((gamma * 7e-6 - 1.0).abs() < 0.05, "{gamma}");
}

#[test]
fn malformed_data_table_exits_4() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "c.json", "{}");
    let data = write(
        &dir,
        "d.csv",
        "observable,value,sigma,temp_kelvin\nt1,1e-5,1e-6,0.02\nt1,oops,1e-6,0.04\n",
    );
    let r = tqp(&["fit", "t1", "-c", &cfg, "-d", &data]);
    assert_eq!(code(&r), 4, "{}", stderr(&r));
    assert!(stderr(&r).contains(":3:"), "{}", stderr(&r));
}
