//! Acceptance criteria, one line per criterion. Run a subset by passing
//! criterion numbers: `cargo test --test acceptance -- 3 4`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shadowsim::presets::figure_spec;
use shadowsim_core::{
    ai_kinetic_regime, blowup_certificate, convergence_study, eigenpair_residual,
    ode_steady_states, run_rdode, run_shadow, shadow_steady_states, CellMask, Config,
    ExactSolution, Field, Grid, History, KineticRegime, Kinetics, Monitor, Profile, SharpPeak,
    Stability, Status, StudyConfig, Traj,
};
use shadowsim_validation::{inert, ls_slope};

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run(model: &Kinetics, grid: &Grid, u0: &Field<f64>, xi0: f64, cfg: &Config) -> Traj {
    let (traj, rep) = run_shadow(model, grid, u0, xi0, cfg).expect("valid run");
    assert!(
        rep.status == Status::Completed,
        "run ended with {:?}",
        rep.status
    );
    traj
}

fn steady_states() -> Outcome {
    let model = Kinetics::carcinogenesis(2.0, 1.0, 65.0 / 8.0).unwrap();
    let grid = Grid::uniform(256).unwrap();
    let cat = ode_steady_states(&model).map_err(|e| e.to_string())?;
    let want = [(0.0, 65.0 / 8.0), (8.0, 0.125), (0.125, 8.0)];
    let mut worst_res = 0.0f64;
    let mut matched = cat.states.len() == want.len();
    for (st, (u, xi)) in cat.states.iter().zip(want) {
        matched &= (st.u_on - u).abs() <= 1e-12 * u.max(1.0) && (st.xi - xi).abs() <= 1e-12 * xi;
        let (rf, rg) = st.residuals(&model, &grid).map_err(|e| e.to_string())?;
        worst_res = worst_res.max(rf).max(rg);
    }
    let found: Vec<_> = cat.states.iter().map(|s| (s.u_on, s.xi)).collect();
    ensure(
        matched && worst_res <= 1e-10,
        format!("states {found:?}, max residual {worst_res:.1e}"),
    )
}

fn gs_oracle_error(rel_tol: f64) -> f64 {
    let model = Kinetics::gray_scott(1.0, 0.1).unwrap();
    let grid = Grid::uniform(256).unwrap();
    let u0 = grid.sample(|x| 0.5 + 0.3 * (2.0 * PI * x).sin());
    let cfg = Config::new(5.0, 1e-3).with_rel_tol(rel_tol);
    let traj = run(&model, &grid, &u0, 0.5, &cfg);
    let exact = ExactSolution::new(&model, History::from_trajectory(&traj).unwrap()).unwrap();
    let mut worst = 0.0f64;
    for s in &traj.samples {
        for (&ui, &u0i) in s.u.iter().zip(u0.iter()) {
            let want = exact.u_at(u0i, s.t).unwrap();
            worst = worst.max((ui - want).abs() / want.abs());
        }
    }
    worst
}

fn gs_oracle() -> Outcome {
    let loose = gs_oracle_error(1e-6);
    let tight = gs_oracle_error(1e-8);
    ensure(
        loose <= 1e-4 && tight <= 1e-6,
        format!("max relative error {loose:.2e} at rel_tol 1e-6, {tight:.2e} at 1e-8"),
    )
}

/// Certificate on the base grid, then blowup runs on it and on the doubled grid.
fn certified_blowup(
    model: &Kinetics,
    peak: SharpPeak<f64>,
    xi0: f64,
    monitors: Vec<Monitor>,
) -> Outcome {
    let base = 512;
    let grid = Grid::uniform(base).unwrap();
    let cert = blowup_certificate(model, &grid, &peak, xi0).map_err(|e| e.to_string())?;
    let tmax = cert
        .tmax_upper
        .ok_or_else(|| format!("certificate {}: {:?}", cert.verdict(), cert.hypotheses))?;
    let mut t_stars = Vec::new();
    for n in [base, 2 * base] {
        let grid = Grid::uniform(n).unwrap();
        let (u0, _) = peak.sample(&grid);
        let mut cfg = Config::new(2.0 * tmax, 1e-2).with_monitors(monitors.clone());
        cfg.isolate_peak = true;
        let (_, rep) = run_shadow(model, &grid, &u0, xi0, &cfg).map_err(|e| e.to_string())?;
        let Status::Blowup { t_star, .. } = rep.status else {
            return Err(format!(
                "n={n}: expected blowup, got {}",
                rep.status.label()
            ));
        };
        if !rep.is_monitor_clean() {
            let v = rep.violations().next().unwrap();
            return Err(format!("n={n}: {} violated at t={}", v.monitor, v.t));
        }
        t_stars.push(t_star);
    }
    let drift = (t_stars[1] - t_stars[0]).abs() / t_stars[0];
    ensure(
        t_stars.iter().all(|&t| t <= tmax) && drift < 0.02,
        format!(
            "t_star {:.5} / {:.5} (drift {:.2}%), Tmax_upper {tmax:.4}, monitors clean",
            t_stars[0],
            t_stars[1],
            100.0 * drift
        ),
    )
}

fn gs_blowup() -> Outcome {
    certified_blowup(
        &Kinetics::gray_scott(0.1, 0.01).unwrap(),
        SharpPeak::new(0.7, 0.5, 0.25),
        1.0,
        vec![Monitor::GsBlowupEnvelope, Monitor::GsXiBand],
    )
}

fn ai_blowup() -> Outcome {
    certified_blowup(
        &Kinetics::activator_inhibitor(2.0, 1.0, 2.0, 0.0, 1.0).unwrap(),
        SharpPeak::new(1.0, 0.5, 0.25),
        0.5,
        vec![Monitor::AiXiFloor],
    )
}

/// Random data inside the growth theorem's hypotheses for λ = 1/2, which the
/// max-floor monitor relies on: ξ0 ≤ κ0/2 and ξ0∫u0² > κ0/2.
fn carc_apriori() -> Outcome {
    let model = Kinetics::carcinogenesis(2.0, 1.0, 65.0 / 8.0).unwrap();
    let grid = Grid::uniform(256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let monitors = vec![
        Monitor::CarcApriori,
        Monitor::CarcMass,
        Monitor::CarcMaxFloor,
        Monitor::CarcRatioMonotone,
    ];
    let mut records = 0;
    for case in 0..20 {
        let level = rng.gen_range(4.0..10.0);
        let modes: Vec<(f64, f64)> = (1..=3)
            .map(|_| {
                (
                    rng.gen_range(0.0..level / 4.0),
                    rng.gen_range(0.0..2.0 * PI),
                )
            })
            .collect();
        let u0 = grid.sample(|x| {
            level
                + modes
                    .iter()
                    .enumerate()
                    .map(|(k, (a, phase))| a * ((k + 1) as f64 * PI * x + phase).cos())
                    .sum::<f64>()
        });
        let l2 = grid.quadrature(&u0.map(|v| v * v)).unwrap();
        let xi0 = rng.gen_range(0.3..4.0);
        assert!(xi0 * l2 > 65.0 / 16.0, "case {case} outside the hypotheses");
        let cfg = Config::new(10.0, 0.05).with_monitors(monitors.clone());
        let (_, rep) = run_shadow(&model, &grid, &u0, xi0, &cfg).map_err(|e| e.to_string())?;
        if let Some(v) = rep.violations().next() {
            return Err(format!(
                "case {case}: {} violated at t={}: {:e} > {:e}",
                v.monitor, v.t, v.lhs, v.rhs
            ));
        }
        records += rep.monitor_log.len();
    }
    Ok(format!("20 runs, {records} monitor records, all clean"))
}

fn figure_run(id: i64) -> (Grid, Traj) {
    let spec = figure_spec(id).unwrap();
    let grid = spec.grid().unwrap();
    let model = spec.model.kinetics().unwrap();
    let traj = run(
        &model,
        &grid,
        &spec.u0.field(&grid),
        spec.xi0,
        &spec.run.integrator().unwrap(),
    );
    (grid, traj)
}

fn figure_one() -> Outcome {
    let (grid, traj) = figure_run(1);
    let last = traj.last().unwrap();
    let peak = last.u.argmax();
    let x_peak = grid.nodes()[peak];
    let near = (x_peak - 0.5063).abs() <= grid.spacing();
    let edge = last.u[0];
    let xi_monotone = traj
        .samples
        .windows(2)
        .filter(|w| w[0].t >= 1.0)
        .all(|w| w[1].xi <= w[0].xi);
    ensure(
        near && last.u[peak] >= 100.0 && edge < 1.0 && xi_monotone,
        format!(
            "peak {:.2} at x={x_peak:.5}, u(0,20)={edge:.2e}, xi(20)={:.4e}, xi non-increasing after t=1: {xi_monotone}",
            last.u[peak], last.xi
        ),
    )
}

fn figure_two() -> Outcome {
    let (grid, traj) = figure_run(2);
    let last = traj.last().unwrap();
    let right = last.u[grid.nearest_node(5.0 / 6.0)];
    let left = last.u[grid.nearest_node(1.0 / 6.0)];
    ensure(
        right > 40.0 && left < 8.0,
        format!("t=12: u(5/6)={right:.3} (needs > 40), u(1/6)={left:.3} (needs < 8)"),
    )
}

fn figure_four() -> Outcome {
    let model = Kinetics::carcinogenesis(2.0, 1.0, 65.0 / 8.0).unwrap();
    let (grid, traj) = figure_run(4);
    let mask = CellMask::interval(&grid, 0.25, 0.75);
    let cat = shadow_steady_states(&model, &grid, &mask).map_err(|e| e.to_string())?;
    let target = cat
        .states
        .iter()
        .max_by(|a, b| a.u_on.total_cmp(&b.u_on))
        .ok_or("no plateau steady state")?;
    let last = traj.last().unwrap();
    let plateau: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(last.u.iter())
        .filter(|(x, _)| (0.3..=0.7).contains(*x))
        .map(|(_, &u)| u)
        .collect();
    let mean = plateau.iter().sum::<f64>() / plateau.len() as f64;
    let du = (mean - target.u_on).abs() / target.u_on;
    let dxi = (last.xi - target.xi).abs() / target.xi;
    ensure(
        du <= 0.02 && dxi <= 0.05,
        format!(
            "t=12: plateau mean {mean:.3} vs {:.3} ({:.1}% off, allowed 2%), xi {:.4} vs {:.4} ({:.1}% off, allowed 5%)",
            target.u_on,
            100.0 * du,
            last.xi,
            target.xi,
            100.0 * dxi
        ),
    )
}

fn eigenpairs() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;

    let grid = Grid::uniform(128).unwrap();
    let left = CellMask::interval(&grid, 0.0, 0.5);
    let gs = Kinetics::gray_scott(0.25, 0.01).unwrap();
    let gs_state = shadow_steady_states(&gs, &grid, &left).unwrap().states[0].clone();
    let split = grid.sample(|x| {
        if x < 0.25 {
            1.0
        } else if x < 0.5 {
            -1.0
        } else {
            0.0
        }
    });
    let wave = grid.sample(|x| (2.0 * PI * x).cos());

    let ai = Kinetics::activator_inhibitor(2.0, 1.0, 2.0, 0.0, 1.0).unwrap();
    let ai_state = ode_steady_states(&ai).unwrap().states[0].clone();
    let carc = Kinetics::carcinogenesis(2.0, 1.0, 65.0 / 8.0).unwrap();
    let carc_state = ode_steady_states(&carc).unwrap().states[1].clone();

    for (name, model, state, w0, lambda) in [
        ("gs", &gs, &gs_state, &split, 0.26),
        ("ai", &ai, &ai_state, &wave, 1.0),
        ("carc", &carc, &carc_state, &wave, 0.5),
    ] {
        let f_u = model.eval_partials(state.u_on, state.xi).unwrap().f_u;
        let res = eigenpair_residual(model, &grid, state, w0).map_err(|e| e.to_string())?;
        ok &= res <= 1e-10 && (f_u - lambda).abs() <= 1e-12 && f_u > 0.0;
        parts.push(format!("{name}: lambda0={f_u:.6} residual={res:.1e}"));
    }
    ensure(ok, parts.join(", "))
}

fn shadow_limit() -> Outcome {
    let grid = Grid::uniform(256).unwrap();
    let carc = Kinetics::carcinogenesis(2.0, 1.0, 65.0 / 8.0).unwrap();
    let cfg = StudyConfig::new(vec![100.0, 1000.0, 10000.0], 2.0);
    let tol = cfg.rel_tol;

    let u0 = grid.sample(|x| 8.0 - 0.05 * ((2.0 * PI * x).cos() + 0.25 * (1.0 - x)));
    let v0 = Field::constant(256, 0.125);
    let study = convergence_study(&carc, &grid, &u0, &v0, &cfg).map_err(|e| e.to_string())?;
    let metrics: Vec<f64> = study.rows.iter().map(|r| r.metric).collect();
    let shown: Vec<String> = metrics.iter().map(|m| format!("{m:.3e}")).collect();
    let decreasing = metrics.windows(2).all(|w| w[1] < w[0]);

    let flat = convergence_study(
        &carc,
        &grid,
        &Field::constant(256, 7.0),
        &Field::constant(256, 0.2),
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    let flat_worst = flat.rows.iter().map(|r| r.metric).fold(0.0, f64::max);

    let heat_v0 = grid.sample(|x| 1.0 + (PI * x).cos());
    let mut heat_cfg = Config::new(0.2, 0.01);
    heat_cfg.rel_tol = 1e-9;
    let (heat, _) = run_rdode(
        &inert(),
        &grid,
        &Field::constant(256, 0.0),
        &heat_v0,
        1.0,
        &heat_cfg,
    )
    .map_err(|e| e.to_string())?;
    let pts: Vec<(f64, f64)> = heat
        .samples
        .iter()
        .map(|s| (s.t, (s.v.max() - 1.0).ln()))
        .collect();
    let rate = -ls_slope(&pts);
    let rate_err = (rate / (PI * PI) - 1.0).abs();

    ensure(
        decreasing && flat_worst <= 10.0 * tol && rate_err <= 0.02,
        format!(
            "metrics {}, x-independent worst {flat_worst:.2e}, heat rate {rate:.4} ({:.2}% from pi^2)",
            shown.join(" > "),
            100.0 * rate_err
        ),
    )
}

fn regime_map() -> Outcome {
    let cases = [
        (
            (2.0, 1.0, 2.0, 0.0, 0.5),
            KineticRegime::Global,
            Stability::OdeStable,
        ),
        (
            (3.0, 3.0, 1.0, 0.0, 1.0),
            KineticRegime::BlowupPossible,
            Stability::OdeUnstable,
        ),
        (
            (2.0, 1.0, 2.0, 0.0, 2.0),
            KineticRegime::Global,
            Stability::OdeUnstable,
        ),
        (
            (3.0, 3.0, 1.0, 0.0, 0.4),
            KineticRegime::BlowupPossible,
            Stability::OdeStable,
        ),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for ((p, q, r, s, tau), regime, unit) in cases {
        let rep = ai_kinetic_regime(p, q, r, s, tau).map_err(|e| e.to_string())?;
        ok &= rep.regime == regime && rep.unit_state == unit;
        parts.push(format!(
            "({p},{q},{r},{s},{tau}) {} {}",
            rep.regime.as_str(),
            rep.unit_state.as_str()
        ));
    }
    ensure(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "steady states",
            budget: Duration::from_secs(1),
            check: steady_states,
        },
        Criterion {
            id: 2,
            name: "gray-scott oracle",
            budget: Duration::from_secs(30),
            check: gs_oracle,
        },
        Criterion {
            id: 3,
            name: "gray-scott certified blowup",
            budget: Duration::from_secs(60),
            check: gs_blowup,
        },
        Criterion {
            id: 4,
            name: "activator-inhibitor certified blowup",
            budget: Duration::from_secs(60),
            check: ai_blowup,
        },
        Criterion {
            id: 5,
            name: "carcinogenesis a-priori bounds",
            budget: Duration::from_secs(300),
            check: carc_apriori,
        },
        Criterion {
            id: 6,
            name: "figure 1 single spike",
            budget: Duration::from_secs(60),
            check: figure_one,
        },
        Criterion {
            id: 7,
            name: "figure 2 spike selection",
            budget: Duration::from_secs(60),
            check: figure_two,
        },
        Criterion {
            id: 8,
            name: "figure 4 plateau",
            budget: Duration::from_secs(60),
            check: figure_four,
        },
        Criterion {
            id: 9,
            name: "eigenpair instability",
            budget: Duration::from_secs(1),
            check: eigenpairs,
        },
        Criterion {
            id: 10,
            name: "shadow limit",
            budget: Duration::from_secs(300),
            check: shadow_limit,
        },
        Criterion {
            id: 11,
            name: "kinetic regime map",
            budget: Duration::from_secs(60),
            check: regime_map,
        },
    ];
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();

    let mut failed = 0;
    let mut ran = 0;
    for c in criteria
        .iter()
        .filter(|c| wanted.is_empty() || wanted.contains(&c.id))
    {
        let start = Instant::now();
        let result =
            std::panic::catch_unwind(c.check).unwrap_or_else(|_| Err("panicked".to_string()));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(d) if elapsed <= c.budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {:?} budget", c.budget)),
            Err(d) => (false, d),
        };
        ran += 1;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<38} {} {:>8.2}s  {detail}",
            c.id,
            c.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("\nacceptance: {} passed, {failed} failed", ran - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
