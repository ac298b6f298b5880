use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn frontburn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frontburn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Short two-point sweep; cheap enough for a test.
fn small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("small.cfg");
    fs::write(
        &path,
        "# short runs\n\
         sweep_A = 0\n\
         sweep_A = 4\n\
         sweep_kappa = 1\n\
         t_transient = 2\n\
         t_end = 6\n\
         wall_time = false\n",
    )
    .unwrap();
    path
}

#[test]
fn fineq_selftest_passes() {
    let o = frontburn(&["fineq-selftest", "--dx", "2e-3", "--seeds", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("extremal profile") && !s.contains("FAIL"), "{s}");
}

#[test]
fn fineq_selftest_rejects_bad_dx() {
    let o = frontburn(&["fineq-selftest", "--dx", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn fit_reads_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let mut text =
        String::from("A,kappa,v_avg,v_std,bound_two_layer,bound_multi_layer,genbound_pass,wall_time_s\n");
    for a in [5, 10, 15, 20] {
        text += &format!("{a},0.5,{},0,0.1,0.1,true,0\n", 0.25 * a as f64 + 2.0);
    }
    fs::write(&csv, text).unwrap();
    let o = frontburn(&["fit", csv.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "kappa,slope,intercept,r2\n0.5,0.25,2,1\n");

    let out = dir.path().join("slopes.csv");
    let o = frontburn(&["fit", csv.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(
        fs::read_to_string(out).unwrap(),
        "kappa,slope,intercept,r2\n0.5,0.25,2,1\n"
    );
}

#[test]
fn fit_rejects_degenerate_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    fs::write(
        &csv,
        "A,kappa,v_avg,v_std,bound_two_layer,bound_multi_layer,genbound_pass,wall_time_s\n5,1,2,0,0,0,true,0\n",
    )
    .unwrap();
    let o = frontburn(&["fit", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "sweep_A = 1\nsweep_kappa = 1\nnot_a_key = 3\n").unwrap();
    let o = frontburn(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains(":3"), "{}", stderr(&o));
}

#[test]
fn run_writes_deterministic_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out1 = dir.path().join("one");
    let out2 = dir.path().join("two");
    let o = frontburn(&[
        "run",
        cfg.to_str().unwrap(),
        "--output-dir",
        out1.to_str().unwrap(),
        "--threads",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = frontburn(&[
        "run",
        cfg.to_str().unwrap(),
        "--set",
        &format!("output_dir={}", out2.display()),
        "--threads",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let sweep = fs::read_to_string(out1.join("sweep.csv")).unwrap();
    let mut lines = sweep.lines();
    assert_eq!(
        lines.next(),
        Some("A,kappa,v_avg,v_std,bound_two_layer,bound_multi_layer,genbound_pass,wall_time_s")
    );
    assert_eq!(lines.count(), 2);
    for name in [
        "sweep.csv",
        "bounds.csv",
        "traces/trace_A0_kappa1.csv",
        "traces/trace_A4_kappa1.csv",
    ] {
        let a = fs::read(out1.join(name)).unwrap();
        let b = fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    let trace = fs::read_to_string(out1.join("traces/trace_A0_kappa1.csv")).unwrap();
    assert!(trace.starts_with("t,v_reaction,v_timederiv,front_pos\n0,"));
}

#[test]
fn check_bounds_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let o = frontburn(&["check-bounds", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}\n{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("bound checks passed"));

    // An absurd constant makes the two-layer check fail.
    let o = frontburn(&["check-bounds", cfg.to_str().unwrap(), "--c-two", "1000"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}
