use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracbessel::fractional::{LowerTerm, TimeOperator};
use fracbessel::mittag_leffler::homogeneous_response;
use fracbessel::specfun::{bessel_zeros, BesselOrder};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fracbessel"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn solve(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["solve", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn report(out: &Path) -> toml::Value {
    fs::read_to_string(out.join("report.toml")).unwrap().parse().unwrap()
}

const DAMPED: &str = r#"
[problem]
nu = 1.0
alpha = 1.5
t_end = 1.0
modes = 12

[[problem.terms]]
lambda = -0.5
order = 0.5

[grid]
t_intervals = 128
x_nodes = 21

[verify]
pde_probe = false
"#;

#[test]
fn zero_source_gives_zero_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "zero.toml", &format!("{DAMPED}\n[source]\nkind = \"zero\"\n"));
    let out = dir.path().join("out");
    let o = solve(&cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let csv = fs::read_to_string(out.join("solution.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,u"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 129 * 21);
    assert!(rows.iter().all(|r| r.ends_with(",0.0000000000000000e0")));
    let r = report(&out);
    assert_eq!(r["status"].as_str(), Some("ok"));
    for key in ["nonlocal", "boundary", "max_abs_u"] {
        assert_eq!(r["defects"][key].as_float(), Some(0.0), "{key}");
    }
}

#[test]
fn resonant_weight_is_rejected_with_the_mode_index() {
    let op = TimeOperator::new(1.5, vec![LowerTerm { lambda: -0.5, order: 0.5 }]).unwrap();
    let g1 = bessel_zeros(BesselOrder::new(1.0).unwrap(), 1).unwrap().gamma(1);
    let m = -1.0 / homogeneous_response(&op, g1 * g1, 1.0).unwrap();
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let cfg =
        write_config(dir.path(), "res.toml", &DAMPED.replace("t_end = 1.0", &format!("t_end = 1.0\nm = {m:.17e}")));
    let o = solve(&cfg, &out, &[]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    assert!(!out.join("solution.csv").exists());
    let r = report(&out);
    assert_eq!(r["status"].as_str(), Some("resonance"));
    let modes = r["resonant_modes"].as_array().unwrap();
    assert_eq!(modes.len(), 1);
    assert_eq!(modes[0]["k"].as_integer(), Some(1));
    let forbidden = modes[0]["forbidden_m"].as_float().unwrap();
    assert!((forbidden - m).abs() < 1e-12 * m.abs());
    assert!(r["message"].as_str().unwrap().contains("k=1 forbids M="));

    let cfg = write_config(
        dir.path(),
        "ok.toml",
        &DAMPED.replace("t_end = 1.0", &format!("t_end = 1.0\nm = {:.17e}", m * 1.001)),
    );
    assert_eq!(code(&solve(&cfg, &out, &[])), 0);
}

#[test]
fn single_mode_source_excites_one_mode() {
    let dir = TempDir::new().unwrap();
    let body = format!(
        "{DAMPED}\n[source]\nkind = \"separable\"\ntime = {{ kind = \"sine\", omega = 3.0 }}\nspace = {{ kind = \"bessel-mode\", mode = 3 }}\n"
    );
    let cfg = write_config(dir.path(), "one.toml", &body);
    let out = dir.path().join("out");
    let o = solve(&cfg, &out, &[]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = report(&out);
    let peaks: Vec<f64> = r["modes"].as_array().unwrap().iter().map(|m| m["max_abs_u"].as_float().unwrap()).collect();
    let top = peaks.iter().copied().fold(0.0, f64::max);
    let active: Vec<usize> = peaks.iter().enumerate().filter(|(_, &p)| p > 1e-10 * top).map(|(i, _)| i + 1).collect();
    assert_eq!(active, vec![3]);
    assert!(r["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("endpoint")));
}

#[test]
fn output_does_not_depend_on_threads() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/example.toml")).unwrap();
    let cfg = write_config(
        dir.path(),
        "ex.toml",
        &text.replace("t_intervals = 256", "t_intervals = 64").replace("pde_probe = true", "pde_probe = false"),
    );
    let files: Vec<Vec<u8>> = [("a", "1"), ("b", "4"), ("c", "4")]
        .iter()
        .map(|(name, threads)| {
            let out = dir.path().join(name);
            assert_eq!(code(&solve(&cfg, &out, &["--threads", threads])), 0);
            [fs::read(out.join("solution.csv")).unwrap(), fs::read(out.join("modes.csv")).unwrap()].concat()
        })
        .collect();
    assert_eq!(files[0], files[1]);
    assert_eq!(files[1], files[2]);
}

#[test]
fn tabulated_source_matches_the_formula() {
    let dir = TempDir::new().unwrap();
    let analytic = format!(
        "{DAMPED}\n[source]\nkind = \"separable\"\ntime = {{ kind = \"polynomial\", coeffs = [1.0, 0.5] }}\nspace = {{ kind = \"power-bump\", p = 4.0, q = 3.0 }}\n"
    );
    let cfg = write_config(dir.path(), "analytic.toml", &analytic);
    let out_a = dir.path().join("a");
    assert_eq!(code(&solve(&cfg, &out_a, &["--modes", "8"])), 0);

    let mut table = String::from("t,x,f\n");
    for j in 0..=128 {
        let t = j as f64 / 128.0;
        for i in 0..=400 {
            let x = i as f64 / 400.0;
            table.push_str(&format!("{t:.17e},{x:.17e},{:.17e}\n", (1.0 + 0.5 * t) * x.powi(4) * (1.0 - x).powi(3)));
        }
    }
    fs::write(dir.path().join("f.csv"), table).unwrap();
    let cfg =
        write_config(dir.path(), "tab.toml", &format!("{DAMPED}\n[source]\nkind = \"tabulated\"\npath = \"f.csv\"\n"));
    let out_b = dir.path().join("b");
    let o = solve(&cfg, &out_b, &["--modes", "8"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let read = |p: &Path| -> Vec<f64> {
        fs::read_to_string(p.join("solution.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
            .collect()
    };
    let (a, b) = (read(&out_a), read(&out_b));
    let peak = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(peak > 0.0 && diff < 1e-4 * peak, "diff {diff:e} peak {peak:e}");
}

#[test]
fn invalid_configs_exit_4() {
    let dir = TempDir::new().unwrap();
    let five = (0..5).map(|_| "[[problem.terms]]\nlambda = 1.0\norder = 0.3\n").collect::<String>();
    let cfg = write_config(dir.path(), "five.toml", &format!("[problem]\nnu = 1.0\nalpha = 0.7\n{five}"));
    let out = dir.path().join("out");
    for args in [
        vec!["check", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        vec!["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        vec!["solve", "--out", out.to_str().unwrap()],
        vec!["solve", "--config", "/nonexistent/run.toml"],
        vec!["check", "--tol", "nonlocal=-1", "--suites", "4"],
        vec!["check", "--tol", "speed=3", "--suites", "4"],
        vec!["check", "--suites", "13"],
        vec!["solve", "--bogus-flag"],
        vec!["zeros", "--nu", "-1"],
        vec!["ml", "--exponents", "1", "--offset", "0", "--args", "1"],
    ] {
        assert_eq!(code(&run(&args)), 4, "{args:?}");
    }
    let big = write_config(dir.path(), "big.toml", "[problem]\nnu = 1.0\nalpha = 2.0\nmodes = 100\n");
    let o = solve(&big, &out, &[]);
    assert_eq!(code(&o), 4);
    assert_eq!(report(&out)["status"].as_str(), Some("invalid-config"));
}

#[test]
fn looser_ml_tolerance_still_passes_the_reduction_suite() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let o = run(&["check", "--suites", "1,4", "--tol", "ml=1e-2", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.contains("criterion  1 ml reduction") && text.contains("PASS"));
    let r: toml::Value = fs::read_to_string(out.join("check_report.toml")).unwrap().parse().unwrap();
    assert_eq!(r["params"]["ml_tol"].as_float(), Some(1e-2));
    assert_eq!(r["all_passed"].as_bool(), Some(true));
}

#[test]
fn zeros_and_ml_subcommands() {
    let o = run(&["zeros", "--nu", "0.5", "--modes", "3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,gamma");
    for (k, line) in lines[1..].iter().enumerate() {
        let g: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((g - (k + 1) as f64 * std::f64::consts::PI).abs() < 1e-13);
    }
    assert_eq!(lines.len(), 4);

    let o = run(&["ml", "--exponents", "1", "--offset", "1", "--args", "1"]);
    assert_eq!(code(&o), 0);
    let first = stdout(&o).lines().next().unwrap().to_string();
    let v: f64 = first.strip_prefix("value = ").unwrap().parse().unwrap();
    assert!((v - std::f64::consts::E).abs() < 1e-15);

    let o = run(&["ml", "--exponents", "2,0.5", "--offset", "1", "--args", "-4,-0.5"]);
    assert_eq!(code(&o), 0);
}
