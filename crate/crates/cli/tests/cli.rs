use std::path::Path;
use std::process::{Command, Output};

use hallfem_cli::{Failure, EXIT_CHECK, EXIT_CONFIG, EXIT_IO, EXIT_SOLVER};
use hallfem_core::feec::incidence_curl;
use hallfem_core::feec::incidence_grad;
use hallfem_core::mesh::build_unit_box_mesh;
use hallfem_core::study::composition_vanishes;
use hallfem_core::Error;

fn hallfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hallfem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_run(out: &Path) -> Output {
    hallfem(&[
        "run",
        "--experiment",
        "orszag-tang",
        "--n",
        "2",
        "--tau",
        "0.1",
        "--T",
        "0.2",
        "--out",
        out.to_str().unwrap(),
    ])
}

#[test]
fn check_passes() {
    let o = hallfem(&["check"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.lines().any(|l| l.starts_with("PASS")));
    assert!(!text.lines().any(|l| l.starts_with("FAIL")));
    assert!(text.contains(" 0 failed"));
}

#[test]
fn run_writes_csv_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let o = small_run(dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("orszag-tang_diag.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 3);
    assert!(lines[0].starts_with("step,time,energy"));
    for step in [0, 2] {
        assert!(dir
            .path()
            .join(format!("orszag-tang_step{step}.vtk"))
            .exists());
    }
    assert!(!dir.path().join("orszag-tang_step1.vtk").exists());
    assert!(stdout(&o).contains("energy monotone: true"));
}

#[test]
fn runs_are_reproducible_byte_for_byte() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(small_run(a.path()).status.code(), Some(0));
    assert_eq!(small_run(b.path()).status.code(), Some(0));
    for f in ["orszag-tang_diag.csv", "orszag-tang_step2.vtk"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn configuration_errors_exit_with_code_2() {
    for args in [
        vec!["run", "--tau", "-1"],
        vec!["run", "--n", "0"],
        vec!["run", "--experiment", "nonsense"],
        vec!["run", "--nu", "0"],
        vec!["converge-time", "--jobs", "0"],
    ] {
        let dir = tempfile::tempdir().unwrap();
        let mut a = args.clone();
        let out = dir.path().to_str().unwrap().to_string();
        a.extend(["--out", &out]);
        let o = hallfem(&a);
        assert_eq!(
            o.status.code(),
            Some(EXIT_CONFIG),
            "{args:?}: {}",
            stdout(&o)
        );
    }
    // a manifest whose meshes do not divide the reference resolution
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.cfg");
    std::fs::write(&cfg, "experiment = orszag-tang\nmeshes = 3, 4\nn_ref = 8\n").unwrap();
    let o = hallfem(&["converge-space", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(EXIT_CONFIG));
}

#[test]
fn io_errors_exit_with_code_1() {
    let o = hallfem(&["run", "--config", "/nonexistent/manifest.cfg"]);
    assert_eq!(o.status.code(), Some(EXIT_IO));
    // output directory blocked by a file
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = small_run(&blocker.join("sub"));
    assert_eq!(o.status.code(), Some(EXIT_IO));
}

#[test]
fn solver_failure_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.cfg");
    std::fs::write(
        &cfg,
        "experiment = orszag-tang\nn = 2\ntau = 0.1\nT = 0.1\nsolver = gmres\nmax_iterations = 1\nrestart = 1\ntol = 1e-14\n",
    )
    .unwrap();
    let o = hallfem(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(EXIT_SOLVER), "{}", stdout(&o));
}

#[test]
fn failure_codes_follow_error_kinds() {
    let code = |e: Error| Failure::from(e).code;
    assert_eq!(code(Error::Io(std::io::Error::other("x"))), EXIT_IO);
    assert_eq!(code(Error::Config("x".into())), EXIT_CONFIG);
    assert_eq!(code(Error::InvalidResolution(0)), EXIT_CONFIG);
    assert_eq!(
        code(Error::SingularMatrix {
            column: 0,
            pivot: 0.0
        }),
        EXIT_SOLVER
    );
    assert_eq!(
        code(Error::NotConverged {
            iterations: 1,
            residual: 1.0
        }),
        EXIT_SOLVER
    );
    assert_eq!(EXIT_CHECK, 4);
}

#[test]
fn flags_override_manifest_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.cfg");
    std::fs::write(
        &cfg,
        "experiment = orszag-tang\nn = 8\ntau = 0.5\nT = 1.0\nname = flagged\n",
    )
    .unwrap();
    let o = hallfem(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "2",
        "--T",
        "0.1",
        "--tau",
        "0.05",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("flagged: dim=2 n=2 tau=0.05 T=0.1 steps=2"));
}

#[test]
fn single_mesh_study_has_no_rate_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.cfg");
    std::fs::write(
        &cfg,
        "experiment = orszag-tang\ntau = 0.05\nT = 0.1\nmeshes = 2\nn_ref = 4\nname = one\n",
    )
    .unwrap();
    let o = hallfem(&[
        "converge-space",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let table = std::fs::read_to_string(dir.path().join("one_converge_space.csv")).unwrap();
    assert_eq!(table.lines().filter(|l| l.starts_with("error,")).count(), 1);
    assert_eq!(table.lines().filter(|l| l.starts_with("rate,")).count(), 0);
}

#[test]
fn temporal_study_writes_errors_and_rates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.cfg");
    std::fs::write(
        &cfg,
        "experiment = orszag-tang\nn = 2\nT = 0.2\ntaus = 0.1, 0.05\ntau_ref = 0.01\nname = t\n",
    )
    .unwrap();
    let o = hallfem(&[
        "converge-time",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let table = std::fs::read_to_string(dir.path().join("t_converge_time.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert!(lines[0].starts_with("# reference n=2 tau=0.01 T=0.2"));
    assert_eq!(lines[1], "kind,tau,E0_u,E1_u,E0_B,E0_J");
    assert_eq!(lines.iter().filter(|l| l.starts_with("error,")).count(), 2);
    let rate: Vec<&str> = lines
        .iter()
        .find(|l| l.starts_with("rate,"))
        .unwrap()
        .split(',')
        .collect();
    assert_eq!(rate[1], "0.1->0.05");
    // errors against the small-step reference shrink with the step
    let e: Vec<f64> = lines
        .iter()
        .filter(|l| l.starts_with("error,"))
        .map(|l| l.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert!(e[1] < e[0]);
}

#[test]
fn check_detects_a_sign_flipped_operator() {
    let m = build_unit_box_mesh(2, 3).unwrap();
    let (g, c) = (incidence_grad(&m), incidence_curl(&m));
    assert!(composition_vanishes(&g, &c));
    // flipping the orientation of one edge in the curl breaks curl grad = 0
    let mut broken = c.clone();
    let col = broken.col_idx().iter().position(|j| *j == 0).unwrap();
    broken.values_mut()[col] *= -1.0;
    assert!(!composition_vanishes(&g, &broken));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = hallfem(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hallfem(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let help = stdout(&o);
    for sub in ["run", "converge-space", "converge-time", "check"] {
        assert!(help.contains(sub));
    }
}
