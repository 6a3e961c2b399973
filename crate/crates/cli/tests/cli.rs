// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use optomech::sweep::SweepResult;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_optomech"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn optomech")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find(|l| l.starts_with(key))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
        .split('=')
        .nth(1)
        .unwrap()
        .split_whitespace()
        .next()
        .unwrap()
}

#[test]
fn steady_reports_device_values() {
    let cfg = configs().join("paper_device.json");
    let o = run(&["steady", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(field(&text, "n ").parse::<f64>().unwrap(), 0.0);
    let q: f64 = field(&text, "Q ").parse().unwrap();
    assert!((q - 6700.0).abs() / 6700.0 < 0.01);
    let g: f64 = field(&text, "G ").parse().unwrap();
    assert!((g - 3.45e5).abs() / 3.45e5 < 0.01);
}

#[test]
fn balanced_drives_leave_membrane_at_rest() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("paper_device.json"))
        .unwrap()
        .replace("\"power_d_w\": 0.0", "\"power_d_w\": 0.001")
        .replace("\"ignore_backaction\": true", "\"ignore_backaction\": false");
    let cfg = dir.path().join("balanced.json");
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["steady", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let out = stdout(&o);
    let b_line = out.lines().find(|l| l.starts_with("b_s")).unwrap();
    assert!(b_line.contains("= 0.0000000000000000e0 +0.0000000000000000e0i"), "{b_line}");
    assert_eq!(field(&out, "n ").parse::<f64>().unwrap(), 1.0);
}

#[test]
fn missing_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("paper_device.json"))
        .unwrap()
        .replace("  \"effective_mass_kg\": 1.45e-10,\n", "");
    let cfg = dir.path().join("broken.json");
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["steady", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("effective_mass_kg"));
}

#[test]
fn non_convergence_exit_code() {
    // a strong second drive red-detuned by ω_m/2 has no fixed point the
    // damped iteration can reach from the undriven state
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("paper_device.json"))
        .unwrap()
        .replace("\"power_d_w\": 0.0", "\"power_d_w\": 0.05")
        .replace("\"detuning_d_hz\": -947000.0", "\"detuning_d_hz\": 473500.0")
        .replace("\"ignore_backaction\": true", "\"ignore_backaction\": false");
    let cfg = dir.path().join("strong.json");
    std::fs::write(&cfg, text).unwrap();
    let o = run(&["steady", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stdout(&o));
}

#[test]
fn response_rows() {
    let cfg = configs().join("paper_device.json");
    let o = run(&["response", "--config", cfg.to_str().unwrap(), "--x", "0", "--n", "nstar,1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| {
            l.split_whitespace()
                .take(8)
                .map(|v| v.parse().unwrap())
                .collect()
        })
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0][2].abs() < 1e-10 && rows[0][3].abs() < 1e-10);
    let out_l = rows[1][5];
    let out_r = rows[1][6];
    assert!((out_l - 1.6e5).abs() / 1.6e5 < 0.02);
    assert!((rows[1][7] - (out_l - out_r)).abs() <= 1e-12 * out_l);
    assert!(text.lines().skip(1).all(|l| l.trim_end().ends_with("true")));
}

#[test]
fn response_flags_singular_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("edge.json");
    std::fs::write(
        &cfg,
        r#"{"mode":"reduced","kappa_hz":1.0,"gamma_m_hz":0.0,"coupling_hz":1.0,"n":1.0}"#,
    )
    .unwrap();
    let o = run(&["response", "--config", cfg.to_str().unwrap(), "--x", "0,0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().nth(1).unwrap().contains("singular"));
    assert!(!text.lines().nth(2).unwrap().contains("singular"));
}

#[test]
fn figure_presets() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["figure", "fig2", "--out", out, "--points", "11"]);
    assert!(o.status.success());
    let res = SweepResult::read_csv(std::fs::File::open(dir.path().join("fig2.csv")).unwrap()).unwrap();
    assert_eq!(res.columns.len(), 2);
    assert_eq!(res.axis_values.len(), 11);

    let o = run(&["figure", "all", "--out", out, "--points", "5"]);
    assert!(o.status.success());
    let count = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(count, 9);

    let o = run(&["figure", "fig9", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("fig4_inset") && err.contains("fig6"), "{err}");
}

#[test]
fn custom_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("transparency_reduced.json");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--axis",
        "n",
        "--start",
        "0",
        "--stop",
        "1",
        "--points",
        "21",
        "--quantities",
        "abs2_b,re_epsT",
        "--name",
        "scan",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("scan.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "n,abs2_b__x_over_kappa=0,re_epsT__x_over_kappa=0"
    );
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn verify_passes_and_skips_threshold() {
    let cfg = configs().join("transparency_reduced.json");
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--grid", "n=0.3,1.2266;x=0,0.1"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.trim_end().ends_with("PASS"));
    assert!(text.contains("skipped: unstable") || text.contains("skipped: too close"), "{text}");
}

#[test]
fn verify_dumps_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("transparency_reduced.json");
    let o = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "n=0.3;x=0.5",
        "--dump",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("trajectory_n=0.3_x=0.5.csv")).unwrap();
    assert!(text.starts_with("t,re_b,im_b,re_c1,im_c1,re_c2dag,im_c2dag\n"));
}

#[test]
fn stability_report() {
    let cfg = configs().join("paper_device.json");
    let o = run(&["stability", "--config", cfg.to_str().unwrap(), "--n", "1,ndiv,1.1"]);
    assert!(o.status.success());
    let lines: Vec<String> = stdout(&o).lines().filter(|l| l.starts_with("n = ")).map(String::from).collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].contains("stable = true"));
    assert!(lines[2].contains("stable = false"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["response", "--x", "abc"]).status.code(), Some(1));
    let missing = run(&["steady", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(run(&["--help"]).status.success());
}
