use std::fs;

use shadowsim::emit_csv;
use shadowsim::output::{read_table, REPORT_FILE, SCALARS_FILE, TRAJECTORY_FILE};
use shadowsim::parse_config;
use shadowsim_core::{run_shadow, Report, Traj};

const SPEC: &str = r#"
model.name = "carcinogenesis"
model.a = 2.0
model.d = 1.0
model.kappa0 = 8.125
grid.n = 16
init.u0 = "6 + cos(pi*x)"
init.xi0 = 1.0
run.t_end = 0.5
run.sample_every = 0.25
run.monitors = ["carc-apriori", "carc-mass"]
"#;

fn short_run(n: usize) -> (Traj, Report) {
    let spec = parse_config(&SPEC.replace("grid.n = 16", &format!("grid.n = {n}"))).unwrap();
    let grid = spec.grid().unwrap();
    run_shadow(
        &spec.model.kinetics().unwrap(),
        &grid,
        &spec.u0.field(&grid),
        spec.xi0,
        &spec.run.integrator().unwrap(),
    )
    .unwrap()
}

#[test]
fn empty_trajectory_writes_headers_only() {
    let (mut traj, mut report) = short_run(16);
    traj.samples.clear();
    report.monitor_log.clear();
    let dir = tempfile::tempdir().unwrap();
    emit_csv(&traj, &report, dir.path()).unwrap();
    for (file, header) in [
        (TRAJECTORY_FILE, "t,x,u\n"),
        (SCALARS_FILE, "t,xi,mass,max_u\n"),
        (REPORT_FILE, "monitor,t,lhs,rhs,pass\n"),
    ] {
        assert_eq!(fs::read_to_string(dir.path().join(file)).unwrap(), header);
    }
}

#[test]
fn single_sample_on_two_cells() {
    let (mut traj, report) = short_run(2);
    traj.samples.truncate(1);
    let dir = tempfile::tempdir().unwrap();
    emit_csv(&traj, &report, dir.path()).unwrap();
    let (_, long) = read_table(&dir.path().join(TRAJECTORY_FILE)).unwrap();
    let (_, scalars) = read_table(&dir.path().join(SCALARS_FILE)).unwrap();
    assert_eq!(long.len(), 2);
    assert_eq!(scalars.len(), 1);
    assert_eq!(scalars[0][0], 0.0);
    assert_eq!(scalars[0][1], 1.0);
}

#[test]
fn rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (t1, r1) = short_run(16);
    let (t2, r2) = short_run(16);
    emit_csv(&t1, &r1, a.path()).unwrap();
    emit_csv(&t2, &r2, b.path()).unwrap();
    for file in [TRAJECTORY_FILE, SCALARS_FILE, REPORT_FILE] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn values_survive_the_text_round_trip() {
    let (traj, report) = short_run(16);
    let dir = tempfile::tempdir().unwrap();
    emit_csv(&traj, &report, dir.path()).unwrap();
    let (header, long) = read_table(&dir.path().join(TRAJECTORY_FILE)).unwrap();
    assert_eq!(header, ["t", "x", "u"]);
    assert_eq!(long.len(), traj.len() * traj.nodes.len());
    let written = traj.samples.iter().flat_map(|s| {
        traj.nodes
            .iter()
            .zip(s.u.iter())
            .map(move |(&x, &u)| (s.t, x, u))
    });
    for (row, (t, x, u)) in long.iter().zip(written) {
        for (got, want) in row.iter().zip([t, x, u]) {
            assert!(
                (got - want).abs() <= 1e-12 * want.abs().max(1e-300),
                "{got} vs {want}"
            );
        }
    }
    let (_, scalars) = read_table(&dir.path().join(SCALARS_FILE)).unwrap();
    for (row, m) in scalars.iter().zip(traj.masses()) {
        assert!((row[2] - m).abs() <= 1e-12 * m);
    }
    let log = fs::read_to_string(dir.path().join(REPORT_FILE)).unwrap();
    assert_eq!(log.lines().count(), report.monitor_log.len() + 1);
    assert!(log.lines().skip(1).all(|l| l.ends_with(",true")));
}
