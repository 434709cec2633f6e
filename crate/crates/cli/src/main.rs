use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use shadowsim::config::{apply_override, load_map, KeyMap};
use shadowsim::{execute, presets, CliError, RunSpec};
use toml::Value;

#[derive(Parser)]
#[command(
    name = "shadowsim",
    version,
    about = "Shadow reaction-diffusion simulator"
)]
struct Cli {
    /// Run specification with dotted keys (model.*, grid.n, init.*, run.*, ...).
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Override one key, e.g. --set grid.n=1024. Repeatable.
    #[arg(short, long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    /// Output directory.
    #[arg(short, long, default_value = "out", global = true)]
    out: PathBuf,

    /// Print the resolved specification and exit.
    #[arg(long, global = true)]
    dry_run: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the shadow system.
    Simulate,
    /// Integrate the space-homogeneous kinetic system.
    Kinetics,
    /// List constant and piecewise constant steady states.
    Steady,
    /// Evaluate the blowup or growth certificate for the initial data.
    Certify,
    /// Compare reaction-diffusion runs with the shadow system as D grows.
    Limit,
    /// Repeat a run over the values of one parameter.
    Sweep,
    /// Reproduce one of the four carcinogenesis figures.
    Figure {
        #[arg(value_parser = clap::value_parser!(i64).range(1..=4))]
        id: i64,
    },
}

impl Cmd {
    fn key(&self) -> &'static str {
        match self {
            Cmd::Simulate | Cmd::Figure { .. } => "simulate",
            Cmd::Kinetics => "kinetics",
            Cmd::Steady => "steady",
            Cmd::Certify => "certify",
            Cmd::Limit => "limit",
            Cmd::Sweep => "sweep",
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunSpec, CliError> {
    let mut map = match cli.command {
        Cmd::Figure { id } => presets::figure_map(id)?,
        _ => KeyMap::new(),
    };
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        map.append(&mut load_map(&text)?);
    }
    for o in &cli.set {
        apply_override(&mut map, o)?;
    }
    map.insert("command".into(), Value::String(cli.command.key().into()));
    RunSpec::from_map(map)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let spec = match resolve(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    // write errors (a closed pipe) are ignored; the exit code still reports the run
    let mut stdout = std::io::stdout().lock();
    if cli.dry_run {
        let _ = write!(stdout, "{spec}");
        return ExitCode::SUCCESS;
    }
    match execute(&spec, &cli.out) {
        Ok(outcome) => {
            for line in &outcome.lines {
                let _ = writeln!(stdout, "{line}");
            }
            for f in &outcome.files {
                let _ = writeln!(stdout, "wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
