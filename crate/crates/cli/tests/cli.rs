use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BASE: &str = r#"
engine = "clifford"
steps = 40
trajectories = 60
master_seed = 99
p_flip = 0.95
p_nec = 0.8
p_unit = 0.02
p_reset = 0.02
p_me = 0.01
plots = true

[lattice]
kind = "square_periodic"
rows = 4
cols = 4
"#;

fn toomdtc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toomdtc")).args(args).output().unwrap()
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file() && p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_str().unwrap().to_string(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "a.cfg", BASE);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(toomdtc(&["run", &cfg, "--out", a.to_str().unwrap()]).status.success());
    assert!(toomdtc(&["--threads", "1", "run", &cfg, "--out", b.to_str().unwrap()]).status.success());
    let fa = files(&a);
    assert!(fa.iter().any(|(n, _)| n == "magnetization.csv"));
    assert!(fa.iter().any(|(n, _)| n == "histogram.csv"));
    assert!(fa.iter().any(|(n, _)| n == "decay_fit.csv"));
    assert_eq!(fa, files(&b));

    let m = fs::read_to_string(a.join("manifest.json")).unwrap();
    assert!(m.contains("config_sha256"));
    assert!(m.contains("\"magnetization.csv\""));
    let head = fs::read_to_string(a.join("magnetization.csv")).unwrap();
    assert!(head.starts_with("t,mean_M,stderr_M,mean_M_even_parity_tag\n"));
}

#[test]
fn out_of_range_probability_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "bad.cfg", &BASE.replace("p_flip = 0.95", "p_flip = 1.5"));
    let out = tmp.path().join("x");
    for args in [vec!["run", &cfg, "--out", out.to_str().unwrap()], vec!["validate", &cfg]] {
        let o = toomdtc(&args);
        assert_eq!(o.status.code(), Some(1));
        assert!(String::from_utf8_lossy(&o.stderr).contains("p_flip"));
    }
    assert!(!out.exists());
}

#[test]
fn single_value_sweep_matches_run() {
    let tmp = tempfile::tempdir().unwrap();
    let run_cfg = write_cfg(tmp.path(), "r.cfg", BASE);
    let sweep_cfg = write_cfg(tmp.path(), "s.cfg", &BASE.replace("p_nec = 0.8", "p_nec = [0.8]"));
    let (r, s) = (tmp.path().join("r"), tmp.path().join("s"));
    assert!(toomdtc(&["run", &run_cfg, "--out", r.to_str().unwrap()]).status.success());
    assert!(toomdtc(&["sweep", &sweep_cfg, "--out", s.to_str().unwrap()]).status.success());
    assert_eq!(files(&r), files(&s.join("point_00")));
    let combined = fs::read_to_string(s.join("combined.csv")).unwrap();
    assert!(combined.starts_with("p_nec,t,mean_M"));
    assert_eq!(combined.lines().count(), 1 + 41);
}

#[test]
fn size_sweep_writes_lifetime_tables() {
    let tmp = tempfile::tempdir().unwrap();
    let text = BASE.replace("rows = 4\ncols = 4", "size = [4, 6]").replace("steps = 40", "steps = 120");
    let cfg = write_cfg(tmp.path(), "s.cfg", &text);
    let out = tmp.path().join("o");
    let o = toomdtc(&["sweep", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let tau = fs::read_to_string(out.join("tau_table.csv")).unwrap();
    assert_eq!(tau.lines().count(), 3);
    assert!(fs::read_to_string(out.join("xi_fit.csv")).unwrap().starts_with("status,xi"));
    assert!(out.join("point_01/magnetization.csv").exists());
}

#[test]
fn sweep_arity_is_enforced() {
    let tmp = tempfile::tempdir().unwrap();
    let two = write_cfg(
        tmp.path(),
        "two.cfg",
        &BASE.replace("p_nec = 0.8", "p_nec = [0.5, 0.8]").replace("p_me = 0.01", "p_me = [0.0, 0.01]"),
    );
    assert_eq!(toomdtc(&["sweep", &two]).status.code(), Some(1));
    let one = write_cfg(tmp.path(), "one.cfg", &BASE.replace("p_nec = 0.8", "p_nec = [0.5, 0.8]"));
    assert_eq!(toomdtc(&["run", &one, "--out", "unused"]).status.code(), Some(1));
    let none = write_cfg(tmp.path(), "none.cfg", BASE);
    assert_eq!(toomdtc(&["sweep", &none, "--out", "unused"]).status.code(), Some(1));
    assert_eq!(toomdtc(&["run", "/nonexistent/cfg"]).status.code(), Some(1));
}

#[test]
fn oracle_check_passes() {
    let o = toomdtc(&["oracle-check"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 3);
}
