//! Acceptance criterion 10: reruns of the reference capture run and the
//! scaling-law sweep produce bit-identical CSV through the CLI.

use std::process::Command;

fn run_to_bytes(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_autoreson"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(!out.stdout.is_empty());
    out.stdout
}

#[test]
fn criterion_10_determinism() {
    // Criterion 1 settings are the simulate defaults.
    let sim_args = ["simulate", "--out", "-"];
    let first = run_to_bytes(&sim_args);
    let second = run_to_bytes(&sim_args);
    let simulate_identical = first == second;

    // Criterion 3 settings are the sweep defaults.
    let sweep_args = ["sweep", "--out", "-"];
    let first = run_to_bytes(&sweep_args);
    let second = run_to_bytes(&sweep_args);
    let sweep_identical = first == second;

    // The emitted summary carries the fitted scaling law.
    let text = String::from_utf8_lossy(&first).to_string();
    let exponent: f64 = text
        .lines()
        .find(|l| l.starts_with("# fit tau_fall~beta"))
        .and_then(|l| l.split("exponent=").nth(1))
        .and_then(|rest| rest.split_whitespace().next())
        .expect("sweep output has a fall-time fit line")
        .parse()
        .expect("exponent parses");
    assert!(
        (-2.3..=-1.7).contains(&exponent),
        "emitted fall-time exponent {exponent} outside the expected band"
    );

    println!(
        "ACCEPTANCE 10 (determinism): {} — simulate rerun identical: {simulate_identical}, sweep rerun identical: {sweep_identical}",
        if simulate_identical && sweep_identical {
            "PASS"
        } else {
            "FAIL"
        }
    );
    assert!(simulate_identical, "simulate CSV differs across reruns");
    assert!(sweep_identical, "sweep CSV differs across reruns");
}
