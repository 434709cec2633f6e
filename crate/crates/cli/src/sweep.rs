//! One-parameter sweeps: every row rebuilds the spec with the swept key
//! replaced, runs in a bounded pool and writes its own file; the summary is
//! merged afterwards in input order.

use std::path::Path;

use rayon::prelude::*;
use shadowsim_core::{ai_kinetic_regime, blowup_certificate, run_shadow, Status};
use toml::Value;

use crate::config::{ModelSpec, RunSpec};
use crate::error::CliError;
use crate::output::{ensure_dir, real, write_table};

pub const SWEEP_FILE: &str = "sweep.csv";
pub const HEADER: [&str; 7] = [
    "value",
    "status",
    "t_star",
    "verdict",
    "regime",
    "unit_state",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Run status label, `skipped` without simulation, `error` on failure.
    pub status: String,
    pub t_star: Option<f64>,
    /// Certificate verdict, or `n/a` where no certificate applies.
    pub verdict: String,
    /// Kinetic regime and `(1,1)` stability; activator-inhibitor only.
    pub regime: String,
    pub unit_state: String,
    pub error: String,
}

impl SweepRow {
    fn new(value: f64) -> Self {
        Self {
            value,
            status: "error".into(),
            t_star: None,
            verdict: "n/a".into(),
            regime: String::new(),
            unit_state: String::new(),
            error: String::new(),
        }
    }

    fn record(&self) -> Vec<String> {
        vec![
            real(self.value),
            self.status.clone(),
            self.t_star.map(real).unwrap_or_default(),
            self.verdict.clone(),
            self.regime.clone(),
            self.unit_state.clone(),
            self.error.clone(),
        ]
    }
}

/// Worker pool bounded by `SHADOWSIM_THREADS` when it is set.
pub fn worker_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = std::env::var("SHADOWSIM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn row_spec(base: &RunSpec, axis: &str, value: f64) -> Result<RunSpec, CliError> {
    let mut map = base.to_map();
    map.retain(|k, _| !k.starts_with("sweep."));
    map.insert("command".into(), Value::String("simulate".into()));
    let v = match map.get(axis) {
        Some(Value::Integer(_)) => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(CliError::key(
                    axis,
                    format!("{value} is not a nonnegative integer"),
                ));
            }
            Value::Integer(value as i64)
        }
        _ => Value::Float(value),
    };
    map.insert(axis.to_string(), v);
    RunSpec::from_map(map)
}

fn evaluate(base: &RunSpec, axis: &str, value: f64, simulate: bool) -> SweepRow {
    let mut row = SweepRow::new(value);
    let result = (|| -> Result<(), CliError> {
        let spec = row_spec(base, axis, value)?;
        let model = spec.model.kinetics()?;
        let grid = spec.grid()?;
        if let ModelSpec::ActivatorInhibitor { p, q, r, s, tau } = spec.model {
            let rep = ai_kinetic_regime(p, q, r, s, tau)?;
            row.regime = rep.regime.as_str().into();
            row.unit_state = rep.unit_state.as_str().into();
        }
        let profile = spec.u0.profile();
        if let Ok(cert) = blowup_certificate(&model, &grid, &*profile, spec.xi0) {
            row.verdict = cert.verdict().into();
        }
        if simulate {
            let u0 = spec.u0.field(&grid);
            let (_, rep) = run_shadow(&model, &grid, &u0, spec.xi0, &spec.run.integrator()?)?;
            row.status = rep.status.label().into();
            if let Status::Blowup { t_star, .. } = rep.status {
                row.t_star = Some(t_star);
            }
        } else {
            row.status = "skipped".into();
        }
        Ok(())
    })();
    if let Err(e) = result {
        row.status = "error".into();
        row.error = e.to_string();
    }
    row
}

fn check_axis(base: &RunSpec, axis: &str) -> Result<(), CliError> {
    match base.to_map().get(axis) {
        Some(Value::Float(_) | Value::Integer(_)) if !axis.starts_with("sweep.") => Ok(()),
        _ => Err(CliError::key(
            "sweep.axis",
            format!("'{axis}' is not a numeric parameter of this spec"),
        )),
    }
}

/// Runs `base` once per value of `axis` and writes `sweep.csv` to `out`.
pub fn sweep(
    base: &RunSpec,
    axis: &str,
    values: &[f64],
    simulate: bool,
    out: &Path,
) -> Result<Vec<SweepRow>, CliError> {
    check_axis(base, axis)?;
    let rows_dir = out.join("rows");
    ensure_dir(&rows_dir)?;
    let pool = worker_pool()?;
    let rows: Vec<Result<SweepRow, CliError>> = pool.install(|| {
        values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| {
                let row = evaluate(base, axis, v, simulate);
                let path = rows_dir.join(format!("row-{i:04}.csv"));
                write_table(&path, &HEADER, &[row.record()])?;
                Ok(row)
            })
            .collect()
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    let records: Vec<Vec<String>> = rows.iter().map(SweepRow::record).collect();
    write_table(&out.join(SWEEP_FILE), &HEADER, &records)?;
    Ok(rows)
}
