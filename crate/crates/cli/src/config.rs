//! Run specifications as flat documents with dotted keys, e.g.
//!
//! ```toml
//! model.name = "carcinogenesis"
//! model.a = 2.0
//! grid.n = 512
//! init.u0 = "8 - 0.05*(cos(2*pi*x) + 0.25*(1 - x))"
//! init.xi0 = 0.125
//! run.t_end = 20.0
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use shadowsim_core::{
    Config, Field64, FnProfile, Grid, Kinetics, Monitor, Profile, SampleSchedule, SharpPeak,
    StudyConfig,
};
use toml::Value;

use crate::error::CliError;
use crate::expr::Expr;
use crate::presets;

pub type KeyMap = BTreeMap<String, Value>;
type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Kinetics,
    Steady,
    Certify,
    Limit,
    Sweep,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Kinetics => "kinetics",
            Self::Steady => "steady",
            Self::Certify => "certify",
            Self::Limit => "limit",
            Self::Sweep => "sweep",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "simulate" => Self::Simulate,
            "kinetics" => Self::Kinetics,
            "steady" => Self::Steady,
            "certify" => Self::Certify,
            "limit" => Self::Limit,
            "sweep" => Self::Sweep,
            _ => return Err(CliError::key("command", format!("unknown command '{s}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    GrayScott {
        b: f64,
        k: f64,
    },
    ActivatorInhibitor {
        p: f64,
        q: f64,
        r: f64,
        s: f64,
        tau: f64,
    },
    Carcinogenesis {
        a: f64,
        d: f64,
        kappa0: f64,
    },
}

impl ModelSpec {
    pub fn kinetics(&self) -> Result<Kinetics> {
        Ok(match *self {
            Self::GrayScott { b, k } => Kinetics::gray_scott(b, k)?,
            Self::ActivatorInhibitor { p, q, r, s, tau } => {
                Kinetics::activator_inhibitor(p, q, r, s, tau)?
            }
            Self::Carcinogenesis { a, d, kappa0 } => Kinetics::carcinogenesis(a, d, kappa0)?,
        })
    }

    fn write(&self, map: &mut KeyMap) {
        let mut put = |k: &str, v: f64| {
            map.insert(format!("model.{k}"), Value::Float(v));
        };
        let name = match *self {
            Self::GrayScott { b, k } => {
                put("b", b);
                put("k", k);
                "gray-scott"
            }
            Self::ActivatorInhibitor { p, q, r, s, tau } => {
                put("p", p);
                put("q", q);
                put("r", r);
                put("s", s);
                put("tau", tau);
                "activator-inhibitor"
            }
            Self::Carcinogenesis { a, d, kappa0 } => {
                put("a", a);
                put("d", d);
                put("kappa0", kappa0);
                "carcinogenesis"
            }
        };
        map.insert("model.name".into(), Value::String(name.into()));
    }
}

/// `u0` either as an expression over `x` or as the snapped sharp peak
/// `height·(1 − |x − center|^exponent)`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Expr(Expr),
    SharpPeak {
        height: f64,
        center: f64,
        exponent: f64,
    },
}

pub const SHARP_PEAK: &str = "sharp-peak";

impl InitialData {
    pub fn field(&self, grid: &Grid) -> Field64 {
        self.profile().sample(grid).0
    }

    pub fn profile(&self) -> Box<dyn Profile<f64> + '_> {
        match self {
            Self::Expr(e) => Box::new(FnProfile(move |x: f64| e.eval(x))),
            Self::SharpPeak {
                height,
                center,
                exponent,
            } => Box::new(SharpPeak::new(*height, *center, *exponent)),
        }
    }

    /// The value used by the space-homogeneous `kinetics` command.
    pub fn constant(&self) -> Result<f64> {
        match self {
            Self::Expr(e) if !e.depends_on_x() => Ok(e.eval(0.0)),
            _ => Err(CliError::key(
                "init.u0",
                "kinetics needs a constant expression",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub t_end: f64,
    pub sample_every: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub blowup_threshold: f64,
    pub growth_cap: f64,
    pub isolate_peak: bool,
    pub max_steps: usize,
    pub monitors: Vec<String>,
    pub lemma_lambda: Option<f64>,
}

pub const MONITOR_NAMES: [&str; 9] = [
    "gs-xi-band",
    "gs-blowup-envelope",
    "gs-kinetic-sum",
    "ai-xi-floor",
    "carc-apriori",
    "carc-mass",
    "carc-lemma-invariant",
    "carc-max-floor",
    "carc-ratio-monotone",
];

fn monitor_tag(name: &str, lambda: Option<f64>) -> Result<Monitor> {
    Ok(match name {
        "gs-xi-band" => Monitor::GsXiBand,
        "gs-blowup-envelope" => Monitor::GsBlowupEnvelope,
        "gs-kinetic-sum" => Monitor::GsKineticSum,
        "ai-xi-floor" => Monitor::AiXiFloor,
        "carc-apriori" => Monitor::CarcApriori,
        "carc-mass" => Monitor::CarcMass,
        "carc-lemma-invariant" => Monitor::CarcLemmaInvariant(lambda.ok_or_else(|| {
            CliError::key("run.lemma_lambda", "required by carc-lemma-invariant")
        })?),
        "carc-max-floor" => Monitor::CarcMaxFloor,
        "carc-ratio-monotone" => Monitor::CarcRatioMonotone,
        _ => {
            return Err(CliError::key(
                "run.monitors",
                format!("unknown monitor '{name}', expected one of {MONITOR_NAMES:?}"),
            ))
        }
    })
}

impl RunOptions {
    pub fn integrator(&self) -> Result<Config> {
        let mut cfg = Config::new(self.t_end, self.sample_every);
        cfg.schedule = SampleSchedule::Every(self.sample_every);
        cfg.rel_tol = self.rel_tol;
        cfg.abs_tol = self.abs_tol;
        cfg.dt_init = self.dt_init;
        cfg.dt_min = self.dt_min;
        cfg.blowup_threshold = self.blowup_threshold;
        cfg.growth_cap = self.growth_cap;
        cfg.isolate_peak = self.isolate_peak;
        cfg.max_steps = self.max_steps;
        cfg.monitors = self
            .monitors
            .iter()
            .map(|m| monitor_tag(m, self.lemma_lambda))
            .collect::<Result<_>>()?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitOptions {
    pub d_list: Vec<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub axis: String,
    pub values: Vec<f64>,
    /// Integrate every row; turn off for certificate or regime maps only.
    pub simulate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub model: ModelSpec,
    pub n: usize,
    pub u0: InitialData,
    pub xi0: f64,
    /// Initial inhibitor field for `limit`; defaults to the constant `xi0`.
    pub v0: Option<Expr>,
    pub run: RunOptions,
    pub limit: LimitOptions,
    /// Interval carrying the upper branch of the piecewise steady states.
    pub steady_mask: (f64, f64),
    pub sweep: Option<SweepOptions>,
}

impl RunSpec {
    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::uniform(self.n)?)
    }

    pub fn v0_field(&self, grid: &Grid) -> Field64 {
        match &self.v0 {
            Some(e) => grid.sample(|x| e.eval(x)),
            None => Field64::constant(grid.n_cells(), self.xi0),
        }
    }

    pub fn study_config(&self) -> StudyConfig {
        let mut cfg = StudyConfig::new(self.limit.d_list.clone(), self.run.t_end);
        cfg.alpha = self.limit.alpha;
        cfg.rel_tol = self.run.rel_tol;
        cfg
    }

    pub fn to_map(&self) -> KeyMap {
        let mut m = KeyMap::new();
        let f = Value::Float;
        let floats = |v: &[f64]| Value::Array(v.iter().map(|&x| Value::Float(x)).collect());
        m.insert(
            "command".into(),
            Value::String(self.command.as_str().into()),
        );
        self.model.write(&mut m);
        m.insert("grid.n".into(), Value::Integer(self.n as i64));
        match &self.u0 {
            InitialData::Expr(e) => {
                m.insert("init.u0".into(), Value::String(e.source().into()));
            }
            InitialData::SharpPeak {
                height,
                center,
                exponent,
            } => {
                m.insert("init.u0".into(), Value::String(SHARP_PEAK.into()));
                m.insert("init.peak.height".into(), f(*height));
                m.insert("init.peak.center".into(), f(*center));
                m.insert("init.peak.exponent".into(), f(*exponent));
            }
        }
        m.insert("init.xi0".into(), f(self.xi0));
        if let Some(v0) = &self.v0 {
            m.insert("init.v0".into(), Value::String(v0.source().into()));
        }
        let r = &self.run;
        for (k, v) in [
            ("t_end", r.t_end),
            ("sample_every", r.sample_every),
            ("rel_tol", r.rel_tol),
            ("abs_tol", r.abs_tol),
            ("dt_init", r.dt_init),
            ("dt_min", r.dt_min),
            ("blowup_threshold", r.blowup_threshold),
            ("growth_cap", r.growth_cap),
        ] {
            m.insert(format!("run.{k}"), f(v));
        }
        m.insert("run.isolate_peak".into(), Value::Boolean(r.isolate_peak));
        m.insert("run.max_steps".into(), Value::Integer(r.max_steps as i64));
        m.insert(
            "run.monitors".into(),
            Value::Array(r.monitors.iter().cloned().map(Value::String).collect()),
        );
        if let Some(l) = r.lemma_lambda {
            m.insert("run.lemma_lambda".into(), f(l));
        }
        m.insert("limit.d".into(), floats(&self.limit.d_list));
        m.insert("limit.alpha".into(), f(self.limit.alpha));
        m.insert(
            "steady.mask".into(),
            floats(&[self.steady_mask.0, self.steady_mask.1]),
        );
        if let Some(s) = &self.sweep {
            m.insert("sweep.axis".into(), Value::String(s.axis.clone()));
            m.insert("sweep.values".into(), floats(&s.values));
            m.insert("sweep.simulate".into(), Value::Boolean(s.simulate));
        }
        m
    }

    /// Sorted `key = value` lines; `parse_config` reads them back unchanged.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.to_map() {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    pub fn from_map(map: KeyMap) -> Result<Self> {
        let mut r = Reader { map };
        if let Some(fig) = r.map.remove("figure") {
            let id = match fig {
                Value::Integer(i) => i,
                _ => return Err(CliError::key("figure", "expected an integer 1..4")),
            };
            let mut base = presets::figure_map(id)?;
            base.append(&mut r.map);
            r.map = base;
        }

        let command: Command = r.string("command", Some("simulate"))?.parse()?;
        let name = r.string("model.name", None)?;
        let model = match name.as_str() {
            "gray-scott" => ModelSpec::GrayScott {
                b: r.float("model.b", None)?,
                k: r.float("model.k", None)?,
            },
            "activator-inhibitor" => ModelSpec::ActivatorInhibitor {
                p: r.float("model.p", None)?,
                q: r.float("model.q", None)?,
                r: r.float("model.r", None)?,
                s: r.float("model.s", None)?,
                tau: r.float("model.tau", None)?,
            },
            "carcinogenesis" => ModelSpec::Carcinogenesis {
                a: r.float("model.a", None)?,
                d: r.float("model.d", None)?,
                kappa0: r.float("model.kappa0", None)?,
            },
            other => {
                return Err(CliError::key(
                    "model.name",
                    format!(
                        "unknown model '{other}', expected gray-scott, activator-inhibitor or carcinogenesis"
                    ),
                ))
            }
        };
        model.kinetics()?;

        let n = r.integer("grid.n", Some(256))?;
        if n < 2 {
            return Err(CliError::key(
                "grid.n",
                format!("at least 2 cells required, got {n}"),
            ));
        }
        let u0_text =
            expr_text("init.u0", r.take("init.u0"))?.ok_or_else(|| Reader::missing("init.u0"))?;
        let u0 = if u0_text == SHARP_PEAK {
            InitialData::SharpPeak {
                height: r.float("init.peak.height", None)?,
                center: r.float("init.peak.center", Some(0.5))?,
                exponent: r.float("init.peak.exponent", Some(0.25))?,
            }
        } else {
            InitialData::Expr(Expr::parse(&u0_text)?)
        };
        let xi0 = r.float("init.xi0", None)?;
        let v0 = expr_text("init.v0", r.take("init.v0"))?
            .map(|s| Expr::parse(&s))
            .transpose()?;

        let defaults = Config::new(1.0, 1.0);
        let t_end = r.float("run.t_end", Some(10.0))?;
        let run = RunOptions {
            t_end,
            sample_every: r.float("run.sample_every", Some(t_end / 100.0))?,
            rel_tol: r.float("run.rel_tol", Some(defaults.rel_tol))?,
            abs_tol: r.float("run.abs_tol", Some(defaults.abs_tol))?,
            dt_init: r.float("run.dt_init", Some(defaults.dt_init))?,
            dt_min: r.float("run.dt_min", Some(defaults.dt_min))?,
            blowup_threshold: r.float("run.blowup_threshold", Some(defaults.blowup_threshold))?,
            growth_cap: r.float("run.growth_cap", Some(defaults.growth_cap))?,
            isolate_peak: r.boolean("run.isolate_peak", Some(false))?,
            max_steps: r.integer("run.max_steps", Some(defaults.max_steps))?,
            monitors: r.strings("run.monitors", Some(Vec::new()))?,
            lemma_lambda: r.optional_float("run.lemma_lambda")?,
        };
        run.integrator()?;

        let limit = LimitOptions {
            d_list: r.floats("limit.d", Some(vec![100.0, 1000.0, 10000.0]))?,
            alpha: r.float("limit.alpha", Some(0.25))?,
        };
        let mask = r.floats("steady.mask", Some(vec![0.0, 0.5]))?;
        let steady_mask = match mask[..] {
            [lo, hi] if lo < hi => (lo, hi),
            _ => {
                return Err(CliError::key(
                    "steady.mask",
                    "expected [lo, hi] with lo < hi",
                ))
            }
        };
        let sweep = match r.map.remove("sweep.axis") {
            Some(Value::String(axis)) => Some(SweepOptions {
                axis,
                values: r.floats("sweep.values", Some(Vec::new()))?,
                simulate: r.boolean("sweep.simulate", Some(true))?,
            }),
            Some(_) => return Err(CliError::key("sweep.axis", "expected a key name")),
            None => None,
        };
        if command == Command::Sweep && sweep.is_none() {
            return Err(CliError::key("sweep.axis", "required by the sweep command"));
        }
        r.finish()?;

        Ok(Self {
            command,
            model,
            n,
            u0,
            xi0,
            v0,
            run,
            limit,
            steady_mask,
            sweep,
        })
    }
}

impl fmt::Display for RunSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

/// Expression source; a bare number stands for the constant.
fn expr_text(key: &str, v: Option<Value>) -> Result<Option<String>> {
    Ok(match v {
        None => None,
        Some(Value::String(s)) => Some(s),
        Some(Value::Integer(i)) => Some(i.to_string()),
        Some(Value::Float(f)) => Some(format!("{f:?}")),
        Some(_) => return Err(CliError::key(key, "expected an expression string")),
    })
}

fn flatten(prefix: &str, table: toml::Table, out: &mut KeyMap) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other);
            }
        }
    }
}

/// Parses a document into its flat key map.
pub fn load_map(text: &str) -> Result<KeyMap> {
    let table: toml::Table = text.parse()?;
    let mut map = KeyMap::new();
    flatten("", table, &mut map);
    Ok(map)
}

/// Applies `key=value`; the value is read as TOML and falls back to a bare string.
pub fn apply_override(map: &mut KeyMap, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("expected key=value, got '{assignment}'")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("single key"),
        Err(_) => Value::String(raw.to_string()),
    };
    map.insert(key.to_string(), value);
    Ok(())
}

pub fn parse_config(text: &str) -> Result<RunSpec> {
    RunSpec::from_map(load_map(text)?)
}

pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<RunSpec> {
    let mut map = load_map(text)?;
    for o in overrides {
        apply_override(&mut map, o)?;
    }
    RunSpec::from_map(map)
}

struct Reader {
    map: KeyMap,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<Value> {
        self.map.remove(key)
    }

    fn missing(key: &str) -> CliError {
        CliError::key(key, "missing")
    }

    fn float(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.take(key) {
            Some(v) => as_float(key, &v),
            None => default.ok_or_else(|| Self::missing(key)),
        }
    }

    fn optional_float(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| as_float(key, &v)).transpose()
    }

    fn integer(&mut self, key: &str, default: Option<usize>) -> Result<usize> {
        match self.take(key) {
            Some(Value::Integer(i)) if i >= 0 => Ok(i as usize),
            Some(_) => Err(CliError::key(key, "expected a nonnegative integer")),
            None => default.ok_or_else(|| Self::missing(key)),
        }
    }

    fn boolean(&mut self, key: &str, default: Option<bool>) -> Result<bool> {
        match self.take(key) {
            Some(Value::Boolean(b)) => Ok(b),
            Some(_) => Err(CliError::key(key, "expected true or false")),
            None => default.ok_or_else(|| Self::missing(key)),
        }
    }

    fn string(&mut self, key: &str, default: Option<&str>) -> Result<String> {
        match self.take(key) {
            Some(Value::String(s)) => Ok(s),
            Some(_) => Err(CliError::key(key, "expected a string")),
            None => default
                .map(str::to_string)
                .ok_or_else(|| Self::missing(key)),
        }
    }

    fn floats(&mut self, key: &str, default: Option<Vec<f64>>) -> Result<Vec<f64>> {
        match self.take(key) {
            Some(Value::Array(a)) => a.iter().map(|v| as_float(key, v)).collect(),
            Some(_) => Err(CliError::key(key, "expected an array of numbers")),
            None => default.ok_or_else(|| Self::missing(key)),
        }
    }

    fn strings(&mut self, key: &str, default: Option<Vec<String>>) -> Result<Vec<String>> {
        match self.take(key) {
            Some(Value::Array(a)) => a
                .into_iter()
                .map(|v| match v {
                    Value::String(s) => Ok(s),
                    _ => Err(CliError::key(key, "expected an array of strings")),
                })
                .collect(),
            Some(_) => Err(CliError::key(key, "expected an array of strings")),
            None => default.ok_or_else(|| Self::missing(key)),
        }
    }

    fn finish(self) -> Result<()> {
        match self.map.into_keys().next() {
            Some(k) => Err(CliError::key(&k, "unknown key")),
            None => Ok(()),
        }
    }
}

fn as_float(key: &str, v: &Value) -> Result<f64> {
    match *v {
        Value::Float(x) => Ok(x),
        Value::Integer(i) => Ok(i as f64),
        _ => Err(CliError::key(key, "expected a number")),
    }
}
