use std::fs;

use shadowsim::sweep::SWEEP_FILE;
use shadowsim::{parse_config, sweep};

const AI: &str = r#"
model.name = "activator-inhibitor"
model.p = 2.0
model.q = 1.0
model.r = 2.0
model.s = 0.0
model.tau = 1.0
grid.n = 64
init.u0 = "1 + 0.1*cos(pi*x)"
init.xi0 = 1.0
run.t_end = 1.0
"#;

const GS: &str = r#"
model.name = "gray-scott"
model.b = 0.1
model.k = 0.01
grid.n = 256
init.u0 = "sharp-peak"
init.peak.height = 0.7
init.xi0 = 1.0
run.t_end = 4.0
run.isolate_peak = true
"#;

#[test]
fn no_values_give_an_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let rows = sweep(
        &parse_config(AI).unwrap(),
        "model.tau",
        &[],
        true,
        dir.path(),
    )
    .unwrap();
    assert!(rows.is_empty());
    let text = fs::read_to_string(dir.path().join(SWEEP_FILE)).unwrap();
    assert_eq!(text.lines().count(), 1);
}

#[test]
fn unit_state_flips_at_the_tau_threshold() {
    // (s + 1)/(p − 1) = 1 for this model
    let dir = tempfile::tempdir().unwrap();
    let values = [0.25, 0.5, 0.9, 1.1, 2.0, 4.0];
    let rows = sweep(
        &parse_config(AI).unwrap(),
        "model.tau",
        &values,
        false,
        dir.path(),
    )
    .unwrap();
    let states: Vec<_> = rows.iter().map(|r| r.unit_state.as_str()).collect();
    assert_eq!(
        states,
        [
            "ode-stable",
            "ode-stable",
            "ode-stable",
            "ode-unstable",
            "ode-unstable",
            "ode-unstable"
        ]
    );
    assert!(rows
        .iter()
        .all(|r| r.regime == "global" && r.status == "skipped"));
    let order: Vec<f64> = rows.iter().map(|r| r.value).collect();
    assert_eq!(order, values);
}

#[test]
fn certificate_switches_on_with_xi0() {
    let dir = tempfile::tempdir().unwrap();
    let rows = sweep(
        &parse_config(GS).unwrap(),
        "init.xi0",
        &[0.05, 1.0],
        true,
        dir.path(),
    )
    .unwrap();
    assert_eq!(rows[0].verdict, "not-certified");
    assert_eq!(rows[1].verdict, "certified");
    assert_eq!(rows[1].status, "blowup");
    assert!(rows[1].t_star.unwrap() < 2.0);
}

#[test]
fn failing_rows_are_recorded_and_the_rest_run() {
    let dir = tempfile::tempdir().unwrap();
    let rows = sweep(
        &parse_config(AI).unwrap(),
        "model.p",
        &[2.0, 0.5, 3.0],
        false,
        dir.path(),
    )
    .unwrap();
    assert_eq!(rows[1].status, "error");
    assert!(rows[1].error.contains('p'), "{}", rows[1].error);
    assert!(rows[0].error.is_empty() && rows[2].error.is_empty());
    assert_eq!(fs::read_dir(dir.path().join("rows")).unwrap().count(), 3);
}

#[test]
fn integer_axis_keeps_integer_values() {
    let dir = tempfile::tempdir().unwrap();
    let base = parse_config(AI).unwrap();
    let rows = sweep(&base, "grid.n", &[32.0, 64.5], false, dir.path()).unwrap();
    assert_eq!(rows[0].status, "skipped");
    assert_eq!(rows[1].status, "error");
    assert!(sweep(&base, "model.name", &[1.0], false, dir.path()).is_err());
}
