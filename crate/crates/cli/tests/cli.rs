use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subbergman"))
        .args(args)
        .output()
        .expect("spawn subbergman")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn kernel_eval_prints_fifteen_digits() {
    let o = run(&["kernel", "eval", "--kind", "bergman", "--alpha", "0", "--z", "0.5", "--w", "0.5"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("re 1.77777777777778e0"), "{out}");
    assert!(out.contains("im 0.00000000000000e0"), "{out}");
}

#[test]
fn kernel_batch_appends_columns() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("pairs.csv");
    let output = dir.path().join("out.csv");
    fs::write(&input, "z_re,z_im,w_re,w_im\n0.5,0,0.5,0\n0,0,0.3,0.4\n").unwrap();
    let o = run(&[
        "kernel", "eval", "--kind", "sub", "--alpha", "-0.5", "--symbol", "mobius a=0.5",
        "--batch", input.to_str().unwrap(), "--out", output.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv::Reader::from_path(&output).unwrap();
    assert_eq!(rd.headers().unwrap().iter().next_back(), Some("k_im"));
    assert_eq!(rd.records().count(), 2);
}

#[test]
fn cnp_failure_writes_witness() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = run(&[
        "cnp", "test", "--alpha", "0", "--symbol", "blaschke zeros=0.5,-0.5", "--trials", "5",
        "--out", report.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("fail"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["report"]["verdict"], "fail");
    assert!(v["report"]["min_eigenvalue"].as_f64().unwrap() < -1e-6);
    let witness = fs::read_to_string(dir.path().join("witness.csv")).unwrap();
    assert!(witness.starts_with("index,z_re,z_im,in_witness"));
}

#[test]
fn cnp_pass_has_no_witness() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = run(&[
        "cnp", "test", "--alpha", "-0.5", "--symbol", "mobius a=0.4", "--trials", "5",
        "--out", report.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("psd_pass"));
    assert!(!dir.path().join("witness.csv").exists());
}

#[test]
fn defect_spectrum_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("spectrum.json");
    let o = run(&[
        "defect", "spectrum", "--which", "conj", "--alpha", "0", "--symbol", "series 0,1",
        "--size", "200", "--window", "10:100", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    for key in ["alpha", "symbol", "size", "eigenvalues", "decay_exponent", "window", "schatten"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let top = v["eigenvalues"][0].as_f64().unwrap();
    assert!((top - 0.5).abs() < 1e-12);
}

#[test]
fn toeplitz_csv_shape() {
    let o = run(&["toeplitz", "build", "--alpha", "0", "--symbol", "series 0,1", "--size", "5"]);
    assert!(o.status.success());
    let mut rd = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(rd.headers().unwrap().len(), 10);
    assert_eq!(rd.records().count(), 5);
}

#[test]
fn berezin_matches_closed_form() {
    let o = run(&["berezin", "--alpha", "0", "--symbol", "mobius a=0.5", "--a", "0.3", "--a", "-0.2+0.4i"]);
    assert!(o.status.success());
    for line in stdout(&o).lines().skip(1) {
        let f: Vec<f64> = line.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert!((f[0] - f[1]).abs() < 1e-9, "{line}");
    }
}

#[test]
fn verify_scenario_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    let config = dir.path().join("cfg.txt");
    fs::write(
        &scenario,
        r#"{"name": "small", "alpha": [-1, 0], "symbols": ["series 0,1"], "checks": ["hardy_degenerate", "rescaling_identity"]}"#,
    )
    .unwrap();
    fs::write(&config, "# smaller run\nsize = 100\nwindow = 10:60\nseed = 3\n").unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "verify", scenario.to_str().unwrap(), "--config", config.to_str().unwrap(),
        "--set", "seed=11", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["size"], "100");
    assert_eq!(v["config"]["seed"], "11");
    assert_eq!(v["summary"]["fail"], 0);
    assert!(out.join("report.csv").exists());
}

#[test]
fn verify_exits_nonzero_on_failure() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.json");
    fs::write(
        &scenario,
        r#"{"name": "strict", "alpha": [-0.5], "symbols": ["mobius a=0.5"], "checks": ["berezin_identity"]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&[
        "verify", scenario.to_str().unwrap(), "--set", "size=16", "--set", "window=2:8",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn bad_input_is_an_error() {
    let o = run(&["kernel", "eval", "--alpha", "0", "--z", "2", "--w", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unit disk"));
    let o = run(&["verify", "all", "--set", "nonsense=1"]);
    assert_eq!(o.status.code(), Some(2));
}
