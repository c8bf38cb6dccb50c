use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_transonic");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("TRANSONIC_OUT_DIR").output().expect("spawn transonic")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn fixture<'a>(dim: &'a str, rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["--gamma", "1.4", "--b0", "2.5", "--u0", "1.5", "--r0", "1", "--r1", "2", "--dim", dim];
    v.extend_from_slice(rest);
    v
}

#[test]
fn radial_writes_solution_and_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let mut args = vec!["radial"];
    args.extend(fixture("3", &["--rs", "1.5", "--out", out.to_str().unwrap()]));
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.starts_with("r_s = 1.500000000000"), "{stdout}");
    let sol = json(&out.join("solution.json"));
    // frozen from the independent quadrature oracle
    assert!((sol["phi1"].as_f64().unwrap() - 2.649152267892623).abs() < 1e-10);
    assert!((sol["v1"].as_f64().unwrap() - 0.20028555969274914).abs() < 1e-12);
    for name in ["supersonic.csv", "subsonic.csv"] {
        let text = std::fs::read_to_string(out.join(name)).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("r,v,rho,p,mach,phi"));
        assert_eq!(lines.count(), 201);
    }
}

#[test]
fn datum_flags_are_mutually_exclusive() {
    let o = run(&["radial", "--rs", "1.5", "--v1", "0.8"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot be used with"));
}

#[test]
fn missing_datum_is_a_range_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["radial", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("exactly one of"));
}

#[test]
fn out_of_interval_exit_potential_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["radial"];
    args.extend(fixture("3", &["--phi1", "5.0", "--out", dir.path().to_str().unwrap()]));
    let o = run(&args);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("admissible open interval"));
}

#[test]
fn empty_speed_interval_is_an_invariant_breach() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("i");
    let mut args = vec!["interval"];
    args.extend(fixture("3", &["--out", out.to_str().unwrap()]));
    let o = run(&args);
    assert_eq!(code(&o), 3);
    let iv = json(&out.join("interval.json"));
    assert_eq!(iv["empty"], true);
    assert!((iv["lo"].as_f64().unwrap() - 0.20028555969274914).abs() < 1e-12);
}

#[test]
fn potential_interval_and_map() {
    let dir = tempfile::tempdir().unwrap();
    let iv_dir = dir.path().join("i");
    let mut args = vec!["interval"];
    args.extend(fixture("3", &["--kind", "potential", "--out", iv_dir.to_str().unwrap()]));
    assert_eq!(code(&run(&args)), 0);
    let iv = json(&iv_dir.join("interval.json"));
    let (lo, hi) = (iv["lo"].as_f64().unwrap(), iv["hi"].as_f64().unwrap());
    assert!((lo - 1.931970514842559).abs() < 1e-8 && (hi - 3.727257197252384).abs() < 1e-8);

    for (dim, samples) in [("3", "100"), ("2", "100"), ("3", "2")] {
        let out = dir.path().join(format!("m{dim}_{samples}"));
        let mut args = vec!["map"];
        args.extend(fixture(dim, &["--kind", "potential", "--samples", samples, "--out", out.to_str().unwrap()]));
        let o = run(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let text = std::fs::read_to_string(out.join("map.csv")).unwrap();
        let rows: Vec<Vec<f64>> =
            text.lines().skip(1).map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), samples.parse::<usize>().unwrap());
        assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
        if dim == "3" && samples == "2" {
            assert!((rows[0][1] - lo).abs() < 1e-10 && (rows[1][1] - hi).abs() < 1e-10);
        }
    }
}

#[test]
fn constant_speed_map_is_an_invariant_breach() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["map"];
    args.extend(fixture("3", &["--samples", "10", "--out", dir.path().to_str().unwrap()]));
    let o = run(&args);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not strictly increasing"));
    assert_eq!(std::fs::read_to_string(dir.path().join("map.csv")).unwrap().lines().count(), 11);
}

#[test]
fn verify2d_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let mut args = vec!["verify2d"];
    args.extend(fixture(
        "2",
        &[
            "--rs",
            "1.6",
            "--nr",
            "32",
            "--ntheta",
            "16",
            "--mode",
            "2",
            "--amplitude",
            "0.05",
            "--out",
            out.to_str().unwrap(),
        ],
    ));
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("report.json"));
    assert_eq!(report["verdict"], "converged");
    assert!((report["reference_shock_radius"].as_f64().unwrap() - 1.6).abs() < 1e-9);
    let field = std::fs::read_to_string(out.join("field.csv")).unwrap();
    assert_eq!(field.lines().next(), Some("r,theta,v_r,v_theta,speed,rho"));
    assert_eq!(field.lines().count(), 1 + 32 * 16);
    let hist = std::fs::read_to_string(out.join("front_history.csv")).unwrap();
    assert_eq!(hist.lines().next(), Some("iteration,theta,f"));
    let iterations = report["outer_iterations"].as_u64().unwrap() as usize;
    assert_eq!(hist.lines().count(), 1 + 16 * (iterations + 1));
}

#[test]
fn verify2d_rejections() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cases: [(&str, &[&str]); 3] = [
        ("3", &["--phi1", "2.8", "--out", out]),
        ("2", &["--v1", "0.2", "--out", out]),
        ("2", &["--phi1", "2.8", "--amplitude", "0.5", "--out", out]),
    ];
    for (dim, rest) in cases {
        let mut args = vec!["verify2d"];
        args.extend(fixture(dim, rest));
        assert_eq!(code(&run(&args)), 2, "{args:?}");
    }
}

#[test]
fn non_convergence_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["verify2d"];
    args.extend(fixture(
        "2",
        &[
            "--rs",
            "1.6",
            "--nr",
            "32",
            "--ntheta",
            "16",
            "--amplitude",
            "0.05",
            "--max-outer",
            "1",
            "--out",
            dir.path().to_str().unwrap(),
        ],
    ));
    let o = run(&args);
    assert_eq!(code(&o), 4);
    assert_eq!(json(&dir.path().join("report.json"))["verdict"], "max-iterations");
}

#[test]
fn env_overrides_default_out_dir_and_flag_overrides_env() {
    let dir = tempfile::tempdir().unwrap();
    let env_out = dir.path().join("env");
    let flag_out = dir.path().join("flag");
    let mut args = vec!["radial"];
    args.extend(fixture("3", &["--rs", "1.5"]));
    let o = Command::new(BIN).args(&args).env("TRANSONIC_OUT_DIR", &env_out).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(env_out.join("solution.json").exists());
    args.extend(["--out", flag_out.to_str().unwrap()]);
    let o = Command::new(BIN).args(&args).env("TRANSONIC_OUT_DIR", &env_out).output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(flag_out.join("solution.json").exists());
}

#[test]
fn manifest_records_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["radial", "--gamma", "1.3", "--dim", "2", "--rs", "1.5", "--out", dir.path().to_str().unwrap()];
    assert_eq!(code(&run(&args)), 0);
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "radial");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["config"]["gamma"], 1.3);
    assert_eq!(m["config"]["dim"], 2);
    assert_eq!(m["config"]["r_s"], 1.5);
    assert!(m["config"].get("out").is_none());
}
