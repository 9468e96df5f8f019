use std::process::{Command, Output};

fn fzeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fzeta"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field(line: &str, i: usize) -> f64 {
    line.split(',').nth(i).unwrap().parse().unwrap()
}

#[test]
fn cantor_zeta_row() {
    let o = fzeta(&["zeta", "--set", "cantor:2,1/3", "--s", "0.8+0i", "--delta", "0.25"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "s_re,s_im,value_re,value_im,est_error,method");
    // 2^(1-s) s^(-1) (3^s - 2)^(-1) + 2 delta^s / s at delta = 1/4
    let s = 0.8f64;
    let expected = 2f64.powf(1.0 - s) / (s * (3f64.powf(s) - 2.0)) + 2.0 * 0.25f64.powf(s) / s;
    assert!((field(lines[1], 2) - expected).abs() < 1e-10 * expected);
    assert_eq!(field(lines[1], 3), 0.0);
}

#[test]
fn sierpinski_single_pole() {
    let o = fzeta(&["poles", "--form", "sierpinski", "--window", "1.5,2.0,-1,1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    let d = 8f64.ln() / 3f64.ln();
    assert!((field(rows[0], 0) - d).abs() < 1e-8);
    assert!(field(rows[0], 1).abs() < 1e-8);
}

#[test]
fn output_is_byte_identical() {
    let args = ["zeta", "--set", "cantor:3,1/5", "--s", "0.9+2i,1.5-0.5i", "--delta", "0.3"];
    let a = fzeta(&args);
    let b = fzeta(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.csv");
    let c = fzeta(&[&args[..], &["--out", path.to_str().unwrap()]].concat());
    assert!(c.status.success());
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
}

#[test]
fn exit_codes() {
    let dependent = fzeta(&["qp", "--set", "qp:1/2;2,4"]);
    assert_eq!(dependent.status.code(), Some(2));
    let err = stderr(&dependent);
    assert!(err.contains("[2,-1]"), "{err}");
    assert_eq!(err.lines().count(), 1);

    let diverges = fzeta(&["zeta", "--set", "cantor:2,1/3", "--s", "0.5"]);
    assert_eq!(diverges.status.code(), Some(3));

    let unsupported = fzeta(&["zeta", "--set", "cusp:2", "--s", "2"]);
    assert_eq!(unsupported.status.code(), Some(4));

    let bad = fzeta(&["zeta", "--set", "cantor:2,1/2", "--s", "1"]);
    assert_eq!(bad.status.code(), Some(2));

    let coarse = fzeta(&["zeta", "--set", "cantor:2,1/3", "--s", "0.8", "--tol", "1e-30"]);
    assert_eq!(coarse.status.code(), Some(2));
}

#[test]
fn quasiperiodic_components() {
    let o = fzeta(&["qp", "--set", "qp:1/2;2,3"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    // T = ln m / D, spacing 2 pi / T
    assert!((field(rows[0], 3) - 2.0 * 2f64.ln()).abs() < 1e-12);
    assert!((field(rows[1], 4) - std::f64::consts::PI / 3f64.ln()).abs() < 1e-12);

    let o = fzeta(&["qp", "--set", "qp:1/2;2,3", "--s", "1.2+1i"]);
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    assert!((field(row, 2) - field(row, 4)).abs() < 1e-9);
    assert!((field(row, 3) - field(row, 5)).abs() < 1e-9);
}

#[test]
fn cantor_dimension_and_period() {
    let o = fzeta(&["dim", "--set", "cantor:2,1/3", "--dim", "0.6309297535714574"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let row = out.lines().nth(1).unwrap();
    assert!((field(row, 2) - 2f64.ln() / 3f64.ln()).abs() < 5e-3);
    let class = row.rsplit(',').next().unwrap();
    let period: f64 = class.trim_start_matches("periodic(").trim_end_matches(')').parse().unwrap();
    assert!((period - 3f64.ln()).abs() < 1e-3, "{class}");
}

#[test]
fn spectral_subcommands() {
    let o = fzeta(&["spectral", "zeta", "--model", "interval:1", "--s", "2"]);
    let out = stdout(&o);
    // sum (pi k)^(-2) = 1/6
    assert!((field(out.lines().nth(1).unwrap(), 2) - 1.0 / 6.0).abs() < 1e-12);

    let o = fzeta(&["spectral", "eigen", "--model", "rectangle:1,1", "--count", "3"]);
    let out = stdout(&o);
    let mus: Vec<f64> = out.lines().skip(1).map(|l| field(l, 1)).collect();
    let pi2 = std::f64::consts::PI.powi(2);
    assert_eq!(mus.len(), 3);
    assert!((mus[0] - 2.0 * pi2).abs() < 1e-9 && (mus[2] - 5.0 * pi2).abs() < 1e-9);

    let o = fzeta(&["spectral", "residue", "--model", "rectangle:1,1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let row = stdout(&o);
    let row = row.lines().nth(1).unwrap();
    assert!(field(row, 2) < 1e-2);
}

#[test]
fn strict_job_spec() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("job.json");
    let out = dir.path().join("out.csv");
    std::fs::write(
        &job,
        format!(
            r#"{{"command":"zeta","input":"cantor:2,1/3","params":{{"s":"0.8+0i","delta":0.25}},"output":{:?}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let o = fzeta(&["job", job.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let direct = fzeta(&["zeta", "--set", "cantor:2,1/3", "--s", "0.8+0i", "--delta", "0.25"]);
    assert_eq!(std::fs::read(&out).unwrap(), direct.stdout);

    std::fs::write(&job, r#"{"command":"zeta","input":"cantor:2,1/3","params":{"s":"1"},"colour":"red"}"#).unwrap();
    let o = fzeta(&["job", job.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));

    std::fs::write(&job, r#"{"command":"zeta","input":"cantor:2,1/3","params":{"speed":"1"}}"#).unwrap();
    assert_eq!(fzeta(&["job", job.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn verify_single_criterion() {
    let o = fzeta(&["verify", "--suite", "paper", "--criterion", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("PASS"), "{out}");
    assert!(out.contains("1/1 criteria passed"));
}
