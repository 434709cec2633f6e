use std::fs;
use std::path::{Path, PathBuf};

use shadowsim_core::{
    ai_kinetic_regime, blowup_certificate, classify_shadow_stability, convergence_study,
    ode_steady_states, run_kinetics, run_shadow, shadow_steady_states, CellMask, Report, Status,
    Traj,
};

use crate::config::{Command, ModelSpec, RunSpec};
use crate::error::CliError;
use crate::output::{emit_csv, ensure_dir, real, write_table};
use crate::sweep::sweep;

pub const SPEC_FILE: &str = "run.toml";

/// What a command printed and wrote, plus the process exit code:
/// 0 completed or certified, 2 blowup detected, 1 failure.
#[derive(Debug, Default)]
pub struct Outcome {
    pub exit_code: i32,
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

fn status_code(status: &Status) -> i32 {
    match status {
        Status::Completed => 0,
        Status::Blowup { .. } => 2,
        Status::StepFailure { .. } => 1,
    }
}

pub fn execute(spec: &RunSpec, out: &Path) -> Result<Outcome, CliError> {
    ensure_dir(out)?;
    let spec_path = out.join(SPEC_FILE);
    fs::write(&spec_path, spec.serialize()).map_err(|source| CliError::Io {
        path: spec_path.clone(),
        source,
    })?;
    let mut outcome = match spec.command {
        Command::Simulate => simulate(spec, out)?,
        Command::Kinetics => kinetics(spec, out)?,
        Command::Steady => steady(spec, out)?,
        Command::Certify => certify(spec, out)?,
        Command::Limit => limit(spec, out)?,
        Command::Sweep => run_sweep(spec, out)?,
    };
    outcome.files.insert(0, spec_path);
    Ok(outcome)
}

fn summarize(traj: &Traj, report: &Report, lines: &mut Vec<String>) {
    lines.push(format!("status: {}", report.status.label()));
    if let Status::Blowup { t_star, node } = report.status {
        lines.push(format!(
            "t_star: {t_star:.6e} at x = {:.6}",
            traj.nodes[node]
        ));
    }
    if let Some(last) = traj.last() {
        let peak = last.u.argmax();
        lines.push(format!(
            "t = {:.6}: max u = {:.6e} at x = {:.6}, xi = {:.6e}",
            last.t, last.u[peak], traj.nodes[peak], last.xi
        ));
    }
    lines.push(format!(
        "steps: {} accepted, {} rejected",
        report.steps_accepted, report.steps_rejected
    ));
    if !report.monitor_log.is_empty() {
        let bad: Vec<_> = report.violations().collect();
        match bad.first() {
            None => lines.push("monitors: clean".into()),
            Some(r) => lines.push(format!(
                "monitors: {} violation(s), first {} at t = {}: {:e} > {:e}",
                bad.len(),
                r.monitor,
                r.t,
                r.lhs,
                r.rhs
            )),
        }
    }
    if report.negativity_violations > 0 {
        lines.push(format!(
            "negativity violations: {}",
            report.negativity_violations
        ));
    }
    if let Some(rate) = report.fitted_growth_rate {
        lines.push(format!("fitted growth rate of max u: {rate:.4}"));
    }
    lines.extend(report.diagnostics.iter().cloned());
}

fn simulate(spec: &RunSpec, out: &Path) -> Result<Outcome, CliError> {
    let model = spec.model.kinetics()?;
    let grid = spec.grid()?;
    let u0 = spec.u0.field(&grid);
    let (traj, report) = run_shadow(&model, &grid, &u0, spec.xi0, &spec.run.integrator()?)?;
    let mut outcome = Outcome {
        exit_code: status_code(&report.status),
        files: emit_csv(&traj, &report, out)?,
        ..Default::default()
    };
    summarize(&traj, &report, &mut outcome.lines);
    Ok(outcome)
}

fn kinetics(spec: &RunSpec, out: &Path) -> Result<Outcome, CliError> {
    let model = spec.model.kinetics()?;
    let u0 = spec.u0.constant()?;
    let (traj, report) = run_kinetics(&model, u0, spec.xi0, &spec.run.integrator()?)?;
    let mut outcome = Outcome {
        exit_code: status_code(&report.status),
        files: emit_csv(&traj, &report, out)?,
        ..Default::default()
    };
    if let ModelSpec::ActivatorInhibitor { p, q, r, s, tau } = spec.model {
        let rep = ai_kinetic_regime(p, q, r, s, tau)?;
        outcome.lines.push(format!(
            "regime: {}, (1,1) {}, tau threshold {}",
            rep.regime.as_str(),
            rep.unit_state.as_str(),
            rep.tau_threshold
        ));
    }
    summarize(&traj, &report, &mut outcome.lines);
    Ok(outcome)
}

fn steady(spec: &RunSpec, out: &Path) -> Result<Outcome, CliError> {
    let model = spec.model.kinetics()?;
    let grid = spec.grid()?;
    let mask = CellMask::interval(&grid, spec.steady_mask.0, spec.steady_mask.1);
    let ode = ode_steady_states(&model)?;
    let shadow = shadow_steady_states(&model, &grid, &mask)?;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (kind, cat) in [("constant", &ode), ("piecewise", &shadow)] {
        for st in &cat.states {
            let class = classify_shadow_stability(&model, st)?;
            let (rf, rg) = st.residuals(&model, &grid)?;
            lines.push(format!(
                "{kind}: u = {} / {}, xi = {}, measure {}, {}",
                st.u_on,
                st.u_off,
                st.xi,
                st.measure,
                class.as_str()
            ));
            rows.push(vec![
                kind.to_string(),
                real(st.u_on),
                real(st.u_off),
                real(st.xi),
                real(st.measure),
                class.as_str().to_string(),
                real(rf),
                real(rg),
            ]);
        }
        lines.extend(cat.diagnostics.iter().map(|d| format!("{kind}: {d}")));
    }
    let path = out.join("steady.csv");
    write_table(
        &path,
        &[
            "kind",
            "u_on",
            "u_off",
            "xi",
            "measure",
            "classification",
            "residual_f",
            "residual_g",
        ],
        &rows,
    )?;
    Ok(Outcome {
        exit_code: 0,
        lines,
        files: vec![path],
    })
}

fn certify(spec: &RunSpec, out: &Path) -> Result<Outcome, CliError> {
    let model = spec.model.kinetics()?;
    let grid = spec.grid()?;
    let cert = blowup_certificate(&model, &grid, &*spec.u0.profile(), spec.xi0)?;
    let mut lines = vec![format!("verdict: {}", cert.verdict())];
    let rows: Vec<Vec<String>> = cert
        .hypotheses
        .iter()
        .map(|h| {
            lines.push(format!(
                "{}: {:e} vs {:e} ({})",
                h.name,
                h.lhs,
                h.rhs,
                if h.satisfied { "holds" } else { "fails" }
            ));
            vec![
                h.name.to_string(),
                real(h.lhs),
                real(h.rhs),
                h.satisfied.to_string(),
            ]
        })
        .collect();
    if let Some(m) = cert.singular_mass {
        lines.push(format!(
            "singular mass: {:e} on {} cells, {:e} on {} (ratio {:.4})",
            m.coarse,
            m.coarse_cells,
            m.fine,
            2 * m.coarse_cells,
            m.ratio
        ));
    }
    if let Some(t) = cert.tmax_upper {
        lines.push(format!("blowup no later than t = {t:.6e}"));
    }
    if let Some((lo, hi)) = cert.lambda_window {
        lines.push(format!("lambda window: [{lo}, {hi}]"));
    }
    lines.extend(cert.notes.iter().cloned());
    let path = out.join("certificate.csv");
    write_table(&path, &["hypothesis", "lhs", "rhs", "satisfied"], &rows)?;
    Ok(Outcome {
        exit_code: 0,
        lines,
        files: vec![path],
    })
}

fn limit(spec: &RunSpec, out: &Path) -> Result<Outcome, CliError> {
    let model = spec.model.kinetics()?;
    let grid = spec.grid()?;
    let u0 = spec.u0.field(&grid);
    let v0 = spec.v0_field(&grid);
    let study = convergence_study(&model, &grid, &u0, &v0, &spec.study_config())?;
    let mut lines = vec![format!("shadow reference: {}", study.shadow_status.label())];
    let rows: Vec<Vec<String>> = study
        .rows
        .iter()
        .map(|r| {
            lines.push(format!(
                "D = {:e}: metric {:e}, sup norm {:e}, {}",
                r.diffusion,
                r.metric,
                r.sup_norm,
                r.status.label()
            ));
            vec![
                real(r.diffusion),
                real(r.metric),
                r.status.label().to_string(),
                real(r.sup_norm),
            ]
        })
        .collect();
    if let Some(s) = study.fitted_slope {
        lines.push(format!("fitted slope in D: {s:.4}"));
    }
    if !study.uniform_bound_holds {
        lines.push("uniform bound in D violated".into());
    }
    let path = out.join("limit.csv");
    write_table(&path, &["D", "metric", "status", "sup_norm"], &rows)?;
    Ok(Outcome {
        exit_code: 0,
        lines,
        files: vec![path],
    })
}

fn run_sweep(spec: &RunSpec, out: &Path) -> Result<Outcome, CliError> {
    let opts = spec
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::key("sweep.axis", "missing"))?;
    let rows = sweep(spec, &opts.axis, &opts.values, opts.simulate, out)?;
    let lines = rows
        .iter()
        .map(|r| {
            let mut s = format!("{} = {}: {}", opts.axis, r.value, r.status);
            if let Some(t) = r.t_star {
                s.push_str(&format!(" at {t:.6e}"));
            }
            s.push_str(&format!(", certificate {}", r.verdict));
            if !r.regime.is_empty() {
                s.push_str(&format!(", {} / (1,1) {}", r.regime, r.unit_state));
            }
            if !r.error.is_empty() {
                s.push_str(&format!(" ({})", r.error));
            }
            s
        })
        .collect();
    Ok(Outcome {
        exit_code: 0,
        lines,
        files: vec![out.join(crate::sweep::SWEEP_FILE)],
    })
}
