use std::fs;
use std::process::{Command, Output};

fn naifs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_naifs")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn list_kinds() {
    let o = naifs(&["list", "maps"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for m in ["doubling", "rotation", "tent", "permutation_table", "shift"] {
        assert!(text.contains(m), "{m}");
    }
    let o = naifs(&["list", "unknown"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("maps, spaces, potentials"));
}

#[test]
fn verify_swap_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = naifs(&["verify", "two_point_swap", "--out", dir.path().to_str().unwrap(), "--workers", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("verdicts.csv")).unwrap();
    assert!(csv.starts_with("theorem,level,lhs,rhs,slack,verdict,context,"));
    assert!(!csv.contains("violated"));
    assert!(fs::read_to_string(dir.path().join("summary.txt")).unwrap().contains("0 violated"));
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let o = naifs(&["sweep", "mixed_circle_sweep", "--seed", "11", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("curve_res256_eps0.125.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("n,eps,kind,log_avg,per_n_value,stderr,word_mode,"));
    assert!(lines.all(|l| l.ends_with(",11")));
}

#[test]
fn config_errors_exit_2_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"space": {"family": "circle_grid", "resolution": 64},
            "schedule": {"cycle": [[{"kind": "doubling"}]]},
            "n_range": [1, 4]}"#,
    )
    .unwrap();
    let o = naifs(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("eps_list"), "{}", stderr(&o));
    let o = naifs(&["run", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.json");
    fs::write(
        &path,
        r#"{"space": {"family": "circle_grid", "resolution": 64},
            "schedule": {"cycle": [[{"kind": "doubling"}]]},
            "n_range": [1, 2], "eps_list": [0.1], "solve": "exhaustive"}"#,
    )
    .unwrap();
    let o = naifs(&["run", path.to_str().unwrap(), "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn proxy_violation_after_escalation_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let o = naifs(&["verify", "shift_to_doubling_factor", "--tol", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("verdicts.csv")).unwrap();
    let row = csv.lines().find(|l| l.starts_with("factor_upper")).unwrap();
    assert!(row.contains(",violated,") && row.contains(",true,"), "{row}");
}
