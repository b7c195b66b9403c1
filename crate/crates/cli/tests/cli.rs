use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cll(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cll"))
        .args(args)
        .env("CLL_OUT_DIR", dir)
        .env_remove("RUST_LOG")
        .output()
        .expect("failed to launch cll")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn solve_sod_writes_final_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = cll(
        dir.path(),
        &["solve", "--problem", "sod", "--scheme", "nt", "--limiter", "va", "--n", "400", "--cfl", "0.45"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let fin = fs::read_to_string(dir.path().join("sod_nt_va_final.csv")).unwrap();
    let mut lines = fin.lines();
    assert_eq!(lines.next().unwrap(), "# field1d v1 k=3 n=400 t=2.0000000000000001e-1");
    assert_eq!(lines.count(), 400);
    let report = fs::read_to_string(dir.path().join("sod_nt_va_report.csv")).unwrap();
    assert!(report.starts_with("t,dt,tv_1,tv_2,tv_3,mass_1,mass_2,mass_3,min_rho,min_p\n"));
}

#[test]
fn unknown_limiter_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = cll(dir.path(), &["solve", "--problem", "sod", "--limiter", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    for name in ["minmod", "minmod-theta", "va", "va-eps"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn zero_cfl_and_unknown_problem_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = cll(dir.path(), &["solve", "--problem", "burgers", "--scheme", "cu", "--cfl", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cll(dir.path(), &["solve", "--problem", "nowhere"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cll(dir.path(), &["solve", "--problem", "sod", "--n", "many"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn positivity_fault_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let o = cll(
        dir.path(),
        &[
            "solve", "--problem", "sod", "--scheme", "cu", "--cfl", "1", "--integrator", "euler", "--basis",
            "componentwise", "--speed-mode", "kt",
        ],
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("positivity"));
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["solve", "--problem", "burgers", "--scheme", "cu", "--n", "100", "--snapshots", "0.5,1"];
    assert!(cll(a.path(), &args).status.success());
    assert!(cll(b.path(), &args).status.success());
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 4, "{names:?}");
    assert!(a.path().join("burgers_cu_va_t0.5.csv").exists());
    for name in names {
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap());
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# sod at low resolution\nproblem = sod\nlimiter = minmod\nn = 50\nt_end = 0.05\n").unwrap();
    let o = cll(dir.path(), &["solve", "--config", cfg.to_str().unwrap(), "--limiter", "va"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let fin = fs::read_to_string(dir.path().join("sod_nt_va_final.csv")).unwrap();
    assert!(fin.starts_with("# field1d v1 k=3 n=50 t=5.0000000000000003e-2"));
    assert!(!dir.path().join("sod_nt_minmod_final.csv").exists());
}

#[test]
fn out_dir_flag_beats_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let o = cll(
        env_dir.path(),
        &["solve", "--problem", "sod", "--n", "40", "--out-dir", flag_dir.path().to_str().unwrap()],
    );
    assert!(o.status.success());
    assert!(flag_dir.path().join("sod_nt_va_final.csv").exists());
    assert!(!env_dir.path().join("sod_nt_va_final.csv").exists());
}

#[test]
fn dmr_writes_field2d() {
    let dir = tempfile::tempdir().unwrap();
    let o = cll(dir.path(), &["solve", "--problem", "dmr", "--n", "48", "--ny", "12", "--t-end", "0.02"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("dmr_cu_va_final.dat")).unwrap();
    assert!(text.starts_with("# field2d v1 nx=48 ny=12 xmin=0.0000000000000000e0 xmax=4.0000000000000000e0"));
    // four blocks of 12 rows plus three separators
    assert_eq!(text.lines().count(), 1 + 4 * 12 + 3);
}

#[test]
fn smooth_advection_converges_at_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let o = cll(
        dir.path(),
        &["convergence", "--problem", "smooth-advection", "--limiter", "va", "--ns", "100,200,400,800"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(dir.path().join("smooth-advection_nt_va_convergence.csv")).unwrap();
    let last = table.lines().last().unwrap();
    let order: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert!((order - 2.0).abs() < 0.35, "{table}");
}

#[test]
fn convergence_needs_three_distinct_resolutions() {
    let dir = tempfile::tempdir().unwrap();
    let o = cll(dir.path(), &["convergence", "--problem", "smooth-advection", "--ns", "100,100,200"]);
    assert_eq!(o.status.code(), Some(2));
    let o = cll(dir.path(), &["convergence", "--problem", "smooth-advection", "--ns", "100,200"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_deduplicates_limiters() {
    let dir = tempfile::tempdir().unwrap();
    let o = cll(
        dir.path(),
        &["compare", "--problem", "advection", "--scheme", "nt", "--n", "100", "--limiters", "va,minmod,va"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = fs::read_to_string(dir.path().join("advection_nt_compare.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows.len(), 3, "{summary}");
    assert!(rows[1].starts_with("va,") && rows[2].starts_with("minmod,"));
    assert!(dir.path().join("advection_nt_minmod_final.csv").exists());
    let o = cll(dir.path(), &["compare", "--problem", "advection", "--limiters", ""]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn list_problems_names_every_benchmark() {
    let dir = tempfile::tempdir().unwrap();
    let o = cll(dir.path(), &["list-problems"]);
    let out = String::from_utf8(o.stdout).unwrap();
    for name in ["advection", "smooth-advection", "burgers", "sod", "osher-shu", "dmr", "shear-layer"] {
        assert!(out.lines().any(|l| l.starts_with(name)), "{name} missing");
    }
}

#[test]
fn tvd_report_at_the_theoretical_cfl() {
    let dir = tempfile::tempdir().unwrap();
    let o = cll(dir.path(), &["tvd-report", "--problem", "advection", "--cfl", "0.24", "--n", "200"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("advection_nt_va_tvd.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[5] == "0"));
    let o = cll(dir.path(), &["tvd-report", "--problem", "sod"]);
    assert_eq!(o.status.code(), Some(2));
}
