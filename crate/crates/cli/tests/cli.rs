//! Contract tests for the command-line surface: exit codes, column layouts,
//! config-file merging, and the abort behavior.

use std::io::Write;
use std::process::{Command, Output};

fn autoreson(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autoreson"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|s| s.to_string())
        .collect()
}

fn header_of(out: &Output) -> String {
    stdout_lines(out)
        .into_iter()
        .find(|l| !l.starts_with('#'))
        .expect("has a header row")
}

#[test]
fn validation_failures_exit_2() {
    for args in [
        &["simulate", "--f", "0"][..],
        &["simulate", "--beta", "-1"],
        &["simulate", "--tau-max", "0"],
        &["simulate", "--rel-tol", "0"],
        &["duffing", "--tau-max", "1"], // epsilon missing
        &["duffing", "--epsilon", "2", "--tau-max", "1"],
        &["sweep", "--c-fall", "1.5"],
    ] {
        let out = autoreson(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: expected exit 2, got {:?}\nstderr: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn unknown_flags_and_commands_exit_2() {
    assert_eq!(autoreson(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        autoreson(&["simulate", "--no-such-flag"]).status.code(),
        Some(2)
    );
}

#[test]
fn simulate_emits_the_specified_columns() {
    let out = autoreson(&["simulate", "--tau-max", "2", "--out", "-"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        header_of(&out),
        "tau,re,im,abs,germ_re,germ_im,germ_abs,deviation_abs"
    );
    let lines = stdout_lines(&out);
    // The tau = 0 row sits outside the germ domain: trailing cells empty.
    let first = lines
        .iter()
        .skip_while(|l| l.starts_with('#'))
        .nth(1)
        .unwrap();
    assert!(first.ends_with(",,,"), "germ cells not empty: {first}");
    // Every emitted number is finite and parseable.
    for line in lines.iter().filter(|l| !l.starts_with('#')).skip(1) {
        for cell in line.split(',').filter(|c| !c.is_empty()) {
            let x: f64 = cell.parse().expect("numeric cell");
            assert!(x.is_finite());
        }
    }
}

#[test]
fn germ_grid_is_clipped_inside_the_domain() {
    let out = autoreson(&[
        "germ", "--beta", "0.05", "--f", "1", "--tau-max", "1000", "--stride", "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        header_of(&out),
        "tau,theta,germ_re,germ_im,germ_abs,alpha0,alpha1,rho1,re_lambda,im_lambda1,residual_abs"
    );
    let lines = stdout_lines(&out);
    let rows: Vec<&String> = lines
        .iter()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect();
    assert!(!rows.is_empty());
    for row in &rows {
        let cells: Vec<f64> = row
            .split(',')
            .map(|c| c.parse().expect("no empty or NaN cells in germ output"))
            .collect();
        let (tau, germ_abs) = (cells[0], cells[4]);
        assert!(tau < 400.0, "row outside the life time: {row}");
        assert!(cells.iter().all(|x| x.is_finite()));
        // The germ modulus tracks sqrt(tau) once the slow time is order one.
        if tau > 50.0 {
            assert!(
                (germ_abs - tau.sqrt()).abs() / tau.sqrt() < 0.1,
                "germ_abs {germ_abs} off the sqrt track at tau = {tau}"
            );
        }
    }
}

#[test]
fn duffing_compare_adds_envelope_columns() {
    let out = autoreson(&[
        "duffing", "--epsilon", "1e-3", "--beta", "0.2", "--tau-max", "1", "--stride", "0.5",
        "--compare",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        header_of(&out),
        "t,u,v,tau,psi_est_re,psi_est_im,psi_est_abs,psi_re,psi_im,psi_abs,deviation_abs"
    );
}

#[test]
fn escaping_oscillator_flushes_partial_csv_and_exits_3() {
    // At these parameters the envelope pushes the oscillator over its
    // potential barrier and the run aborts mid-way.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("duffing.csv");
    let out = autoreson(&[
        "duffing", "--epsilon", "1e-3", "--beta", "0.2", "--tau-max", "30", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let text = std::fs::read_to_string(&path).unwrap();
    let last = text.lines().last().unwrap();
    assert!(
        last.starts_with("# aborted at tau="),
        "missing abort marker, got: {last}"
    );
    assert!(text.lines().filter(|l| !l.starts_with('#')).count() > 100);
}

#[test]
fn sweep_single_point_skips_the_fit() {
    let out = autoreson(&[
        "sweep", "--beta-list", "0.2", "--f-list", "1", "--rel-tol", "1e-7", "--abs-tol", "1e-9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("skipped (insufficient points)"),
        "missing skip note:\n{text}"
    );
    assert_eq!(header_of(&out), "beta,f,status,tau_fall,max_abs,decay_rate");
}

#[test]
fn config_file_feeds_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let mut file = std::fs::File::create(&cfg).unwrap();
    writeln!(file, "# reference point").unwrap();
    writeln!(file, "beta=0.1").unwrap();
    writeln!(file, "tau-max=3").unwrap();
    writeln!(file, "stride=1.0").unwrap();
    drop(file);

    let from_file = autoreson(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_file.status.code(), Some(0));
    let text = String::from_utf8_lossy(&from_file.stdout);
    assert!(text.contains("# beta=1.00000000000e-1"), "{text}");
    assert!(text.contains("# tau-max=3.00000000000e0"));

    // A flag overrides the file value.
    let overridden = autoreson(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--beta", "0.2",
    ]);
    let text = String::from_utf8_lossy(&overridden.stdout);
    assert!(text.contains("# beta=2.00000000000e-1"), "{text}");

    // Unknown keys are rejected.
    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "betaa=0.1\n").unwrap();
    let out = autoreson(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn file_output_matches_stdout_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.csv");
    let to_stdout = autoreson(&["simulate", "--tau-max", "2", "--out", "-"]);
    let to_file = autoreson(&["simulate", "--tau-max", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(to_file.status.code(), Some(0));
    let file_bytes = std::fs::read(&path).unwrap();
    assert_eq!(to_stdout.stdout, file_bytes);
}

#[test]
fn default_simulate_reproduces_growth_and_fall() {
    // The default parameter set shows the captured envelope climbing the
    // resonant track and collapsing near its life time.
    let out = autoreson(&["simulate", "--out", "-"]);
    assert_eq!(out.status.code(), Some(0));
    let abs: Vec<f64> = stdout_lines(&out)
        .iter()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    let max = abs.iter().copied().fold(0.0f64, f64::max);
    assert!(max > 15.0, "no autoresonant growth: max {max}");
    assert!(
        *abs.last().unwrap() < 5.0,
        "no fall by tau = 600: end {}",
        abs.last().unwrap()
    );
}

#[test]
fn germ_residual_column_shrinks_when_beta_is_halved() {
    // Rows at matching theta (theta = 0.5 appears at tau = 50 for
    // beta = 0.1 and tau = 200 for beta = 0.05).
    let residual_at = |beta: &str, tau: f64| -> f64 {
        let out = autoreson(&[
            "germ", "--beta", beta, "--f", "1", "--tau-max", "500", "--stride", "5",
        ]);
        assert_eq!(out.status.code(), Some(0));
        stdout_lines(&out)
            .iter()
            .filter(|l| !l.starts_with('#'))
            .skip(1)
            .find_map(|l| {
                let mut cells = l.split(',');
                let row_tau: f64 = cells.next().unwrap().parse().unwrap();
                (row_tau == tau).then(|| cells.next_back().unwrap().parse().unwrap())
            })
            .expect("grid contains the matching row")
    };
    let coarse = residual_at("0.1", 50.0);
    let fine = residual_at("0.05", 200.0);
    assert!(
        fine < coarse,
        "residual did not shrink: {fine} vs {coarse}"
    );
}

#[test]
fn controlled_simulate_accepts_law_flags() {
    let out = autoreson(&[
        "simulate", "--sweep-law", "saturating", "--sweep-scale", "0.05", "--tau-max", "5",
        "--stride", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("# sweep-law=saturating"));
    assert!(text.contains("# sweep-scale=5.00000000000e-2"));
}
