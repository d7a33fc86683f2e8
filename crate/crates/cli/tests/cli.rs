use std::path::Path;
use std::process::{Command, Output};

fn geolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geolab"))
        .args(args)
        .env_remove("GEOLAB_ZEROS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .and_then(|v| v.split_whitespace().next())
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| panic!("{key} missing in {text}"))
}

#[test]
fn count_at_fourteen() {
    let o = geolab(&["count", "--x", "14"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "pi"), 3.0);
    assert!((value(&text, "theta") - 7.1926).abs() < 1e-4);
    assert!((value(&text, "psi") - 7.1926).abs() < 1e-4);
}

#[test]
fn random_gallagher_run() {
    let o = geolab(&[
        "gallagher",
        "--random",
        "100",
        "--seed",
        "7",
        "--theta",
        "0.25",
        "--U",
        "1.0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("100/100 hold"));
}

#[test]
fn gallagher_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("terms.csv");
    std::fs::write(&path, "nu,re,im\n0,1,0\n").unwrap();
    let o = geolab(&[
        "gallagher",
        "--input",
        path.to_str().unwrap(),
        "--theta",
        "0.5",
        "--U",
        "1",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(value(&text, "lhs"), 2.0);
    assert!(text.contains("holds=true"));
}

#[test]
fn validate_empty_zeros_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.txt");
    std::fs::write(&path, "").unwrap();
    let o = geolab(&["validate-zeros", "--zeros", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("zeros=0"));
    assert!(text.contains("valid=false"));
}

#[test]
fn environment_table_is_used_unless_flag_given() {
    let dir = tempfile::tempdir().unwrap();
    let env_path = dir.path().join("env.txt");
    std::fs::write(&env_path, "9.5336952614\n12.1730083247\n").unwrap();
    let run = |extra: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_geolab"))
            .arg("validate-zeros")
            .args(extra)
            .env("GEOLAB_ZEROS", &env_path)
            .output()
            .unwrap()
    };
    assert!(stdout(&run(&[])).contains("zeros=2"));
    let flag_path = dir.path().join("flag.txt");
    std::fs::write(&flag_path, "9.5336952614\n").unwrap();
    assert!(stdout(&run(&["--zeros", flag_path.to_str().unwrap()])).contains("zeros=1"));
}

#[test]
fn usage_errors_exit_one() {
    let o = geolab(&["count", "--x", "14", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = geolab(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn domain_and_io_errors() {
    let o = geolab(&["explicit", "--x", "1e4", "--T", "30"]);
    assert_eq!(o.status.code(), Some(1));
    let o = geolab(&["validate-zeros", "--zeros", "/nonexistent/zeros.txt"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "9.5\n-1\n").unwrap();
    let o = geolab(&["validate-zeros", "--zeros", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let o = geolab(&["table", "--t-max", "10", "--out", "/nonexistent/dir/t.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn outputs_do_not_depend_on_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str, name: &str| {
        let out = dir.path().join(name);
        let o = geolab(&[
            "scan",
            "--x-min",
            "100",
            "--x-max",
            "1e6",
            "--per-decade",
            "6",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        read(&out)
    };
    let one = run("1", "one.csv");
    assert_eq!(one, run("3", "three.csv"));
    assert!(String::from_utf8_lossy(&one).starts_with(
        "x,pi,theta,psi,li,psi_residual,pi_residual,eq6_norm,thm_norm,T_used,exceptional\n"
    ));
}

#[test]
fn table_cache_is_written_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("traces.bin");
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    for out in [&first, &second] {
        let o = geolab(&[
            "table",
            "--t-max",
            "300",
            "--cache",
            cache.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(&read(&cache)[..4], b"GLTT");
    assert_eq!(read(&first), read(&second));
    let csv = String::from_utf8(read(&first)).unwrap();
    assert!(csv.starts_with("t,D,h_star,primitive,log_norm,norm\n3,5,1,1,"));
    assert_eq!(csv.lines().count(), 299);
}

#[test]
fn exceptional_and_eq4_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exc.csv");
    let o = geolab(&[
        "exceptional",
        "--n-min",
        "2",
        "--n-max",
        "4",
        "--epsilon",
        "0.1",
        "--samples",
        "64",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(read(&out)).unwrap();
    assert!(text.starts_with("n,measure_estimate,paper_bound,exceeded,total\n"));
    assert_eq!(text.lines().count(), 4);

    let out = dir.path().join("eq4.csv");
    let o = geolab(&[
        "eq4",
        "--n-min",
        "2",
        "--n-max",
        "3",
        "--T-list",
        "10,30",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(read(&out)).unwrap();
    assert!(text.starts_with("n,T,integral,ratio\n"));
    assert_eq!(text.lines().count(), 5);
}
