//! The four carcinogenesis figure setups: `a = 2`, `d = 1`, `κ0 = 65/8`,
//! `ξ0 = 1/8` on 512 cells.

use crate::config::{load_map, KeyMap, RunSpec};
use crate::error::CliError;

pub const FIG1_U0: &str = "8 - 0.05*(cos(2*pi*x) + 0.25*(1 - x))";
pub const FIG2_U0: &str = "8 + 0.05*sin(3*pi*x)*(1 + 0.1*x)";
pub const FIG3_U0: &str = "8 + 0.05*sin(3*pi*x)";
pub const FIG4_U0: &str = "piecewise(0.25, 0.75, 8, 8 - 0.05*sin(2*pi*x + 0.5*pi))";

const COMMON: &str = r#"
command = "simulate"
model.name = "carcinogenesis"
model.a = 2.0
model.d = 1.0
model.kappa0 = 8.125
grid.n = 512
init.xi0 = 0.125
run.sample_every = 0.1
"#;

/// The preset document for figure `id`.
pub fn figure_text(id: i64) -> Result<String, CliError> {
    let specific = match id {
        1 => format!("init.u0 = \"{FIG1_U0}\"\nrun.t_end = 20.0\n{}", monitors()),
        2 => format!("init.u0 = \"{FIG2_U0}\"\nrun.t_end = 12.0\n{}", monitors()),
        3 => format!("init.u0 = \"{FIG3_U0}\"\nrun.t_end = 12.0\n{}", monitors()),
        4 => format!("init.u0 = \"{FIG4_U0}\"\nrun.t_end = 12.0\n{}", monitors()),
        _ => return Err(CliError::key("figure", format!("expected 1..4, got {id}"))),
    };
    Ok(format!("{COMMON}{specific}"))
}

fn monitors() -> &'static str {
    "run.lemma_lambda = 0.5\n\
     run.monitors = [\"carc-apriori\", \"carc-mass\", \"carc-lemma-invariant\", \"carc-max-floor\", \"carc-ratio-monotone\"]\n"
}

pub fn figure_map(id: i64) -> Result<KeyMap, CliError> {
    load_map(&figure_text(id)?)
}

pub fn figure_spec(id: i64) -> Result<RunSpec, CliError> {
    RunSpec::from_map(figure_map(id)?)
}
