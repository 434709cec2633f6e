//! CSV emission. Reals are written as `{:.11e}`, i.e. 12 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use shadowsim_core::{Report, Traj};

use crate::error::CliError;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const SCALARS_FILE: &str = "scalars.csv";
pub const REPORT_FILE: &str = "report.csv";

pub fn real(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

/// Writes `header` and `rows` to `path`.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let wrap = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row).map_err(wrap)?;
    }
    w.flush().map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Trajectory `(t, x, u)` in long form, scalars `(t, xi, mass, max_u)` and the
/// monitor log `(monitor, t, lhs, rhs, pass)`.
pub fn emit_csv(traj: &Traj, report: &Report, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    ensure_dir(dir)?;
    let mut long = Vec::with_capacity(traj.len() * traj.nodes.len());
    for s in &traj.samples {
        for (x, u) in traj.nodes.iter().zip(s.u.iter()) {
            long.push(vec![real(s.t), real(*x), real(*u)]);
        }
    }
    let scalars: Vec<Vec<String>> = traj
        .samples
        .iter()
        .zip(traj.masses())
        .map(|(s, mass)| vec![real(s.t), real(s.xi), real(mass), real(s.u.max())])
        .collect();
    let log: Vec<Vec<String>> = report
        .monitor_log
        .iter()
        .map(|r| {
            vec![
                r.monitor.to_string(),
                real(r.t),
                real(r.lhs),
                real(r.rhs),
                r.pass.to_string(),
            ]
        })
        .collect();

    let paths = [TRAJECTORY_FILE, SCALARS_FILE, REPORT_FILE].map(|f| dir.join(f));
    write_table(&paths[0], &["t", "x", "u"], &long)?;
    write_table(&paths[1], &["t", "xi", "mass", "max_u"], &scalars)?;
    write_table(&paths[2], &["monitor", "t", "lhs", "rhs", "pass"], &log)?;
    Ok(paths.to_vec())
}

/// Reads a numeric table back, header excluded.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let wrap = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut r = csv::Reader::from_path(path).map_err(wrap)?;
    let header = r
        .headers()
        .map_err(wrap)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(wrap)?;
        let row = rec
            .iter()
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    CliError::Usage(format!("{}: '{s}' is not a number", path.display()))
                })
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}
