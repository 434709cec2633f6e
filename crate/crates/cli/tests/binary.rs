use std::fs;
use std::process::{Command, Output};

fn shadowsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadowsim"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const GS_BLOWUP: &str = r#"
model.name = "gray-scott"
model.b = 0.1
model.k = 0.01
grid.n = 128
init.u0 = "sharp-peak"
init.peak.height = 0.7
init.xi0 = 1.0
run.t_end = 4.0
run.isolate_peak = true
"#;

#[test]
fn exit_codes_follow_the_run_status() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gs.toml");
    fs::write(&cfg, GS_BLOWUP).unwrap();
    let cfg = cfg.to_str().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let blowup = shadowsim(&["simulate", "--config", cfg, "--out", out]);
    assert_eq!(blowup.status.code(), Some(2), "{}", stdout(&blowup));
    assert!(stdout(&blowup).contains("status: blowup"));

    let done = shadowsim(&[
        "simulate",
        "--config",
        cfg,
        "--out",
        out,
        "--set",
        "run.t_end=0.5",
    ]);
    assert_eq!(done.status.code(), Some(0), "{}", stdout(&done));
    assert!(dir.path().join("out/trajectory.csv").exists());
    assert!(dir.path().join("out/run.toml").exists());

    let cert = shadowsim(&["certify", "--config", cfg, "--out", out]);
    assert_eq!(cert.status.code(), Some(0));
    assert!(stdout(&cert).contains("verdict: certified"));

    let bad = shadowsim(&["simulate", "--config", cfg, "--set", "model.k=-1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));
}

#[test]
fn dry_run_prints_a_reloadable_spec() {
    let dir = tempfile::tempdir().unwrap();
    let o = shadowsim(&["figure", "3", "--dry-run", "--set", "grid.n=64"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("grid.n = 64\n"));
    let saved = dir.path().join("fig3.toml");
    fs::write(&saved, &text).unwrap();
    let again = shadowsim(&["simulate", "--dry-run", "--config", saved.to_str().unwrap()]);
    assert_eq!(stdout(&again), text);
}

#[test]
fn steady_lists_the_three_constant_states() {
    let dir = tempfile::tempdir().unwrap();
    let o = shadowsim(&[
        "steady",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "model.name=carcinogenesis",
        "--set",
        "model.a=2",
        "--set",
        "model.d=1",
        "--set",
        "model.kappa0=8.125",
        "--set",
        "init.u0=8",
        "--set",
        "init.xi0=0.125",
        "--set",
        "grid.n=64",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let table = fs::read_to_string(dir.path().join("steady.csv")).unwrap();
    assert_eq!(
        table.lines().filter(|l| l.starts_with("constant,")).count(),
        3
    );
}

#[test]
fn unknown_figure_is_a_usage_error() {
    let o = shadowsim(&["figure", "7"]);
    assert_eq!(o.status.code(), Some(2));
}
