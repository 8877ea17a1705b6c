//! Flat `key = value` experiment configuration.
//!
//! A config file holds one assignment per line; `#` starts a comment.
//! Command-line overrides (`--set key=value`) are applied on top, and the
//! resolved configuration is echoed into every CSV it produces.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use dcapprox::space::Exponent;
use dcapprox::{Ball, NormedSpace, SolverConfig, Vector};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Converge,
    HilbertEquiv,
    Sandwich,
    Adversary,
    Modulus,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Converge,
        Experiment::HilbertEquiv,
        Experiment::Sandwich,
        Experiment::Adversary,
        Experiment::Modulus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Converge => "converge",
            Experiment::HilbertEquiv => "hilbert-equiv",
            Experiment::Sandwich => "sandwich",
            Experiment::Adversary => "adversary",
            Experiment::Modulus => "modulus",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

/// Labels accepted by `function`; `all` expands to the first five.
pub const FUNCTION_LABELS: [&str; 6] = ["norm", "linear", "max-affine", "sawtooth", "distance", "constant"];

const KEYS: [&str; 22] = [
    "experiment",
    "dim",
    "p",
    "function",
    "power",
    "lambdas",
    "region.center",
    "region.radius",
    "grid",
    "solver.coarse_samples",
    "solver.refine_iterations",
    "solver.tolerance",
    "solver.starts",
    "seed",
    "corpus_seed",
    "depths",
    "epsilons",
    "modulus.samples",
    "modulus.refine",
    "rate_slack",
    "modulus_tolerance",
    "allow_empirical",
];

const EXTRA_KEYS: [&str; 2] = ["timing", "output"];

/// Where a raw value came from, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
enum Origin {
    Line(usize),
    Override,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override => f.write_str("--set"),
        }
    }
}

/// Unresolved assignments.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Origin)>,
}

fn known(key: &str) -> bool {
    KEYS.contains(&key) || EXTRA_KEYS.contains(&key)
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig, CliError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body.split_once('=').ok_or_else(|| CliError::Config {
                at: format!("line {line_no}"),
                message: format!("expected `key = value`, got `{body}`"),
            })?;
            let k = k.trim();
            if !known(k) {
                return Err(CliError::Config {
                    at: format!("line {line_no}"),
                    message: format!("unknown key `{k}`"),
                });
            }
            if raw.entries.contains_key(k) {
                return Err(CliError::Config {
                    at: format!("line {line_no}"),
                    message: format!("`{k}` assigned twice"),
                });
            }
            raw.entries
                .insert(k.to_string(), (v.trim().to_string(), Origin::Line(line_no)));
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<RawConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            at: path.display().to_string(),
            message: e.to_string(),
        })?;
        RawConfig::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| CliError::Config {
            at: "--set".into(),
            message: format!("expected KEY=VALUE, got `{assignment}`"),
        })?;
        let k = k.trim();
        if !known(k) {
            return Err(CliError::Config {
                at: "--set".into(),
                message: format!("unknown key `{k}`"),
            });
        }
        self.entries
            .insert(k.to_string(), (v.trim().to_string(), Origin::Override));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&(String, Origin)> {
        self.entries.get(key)
    }
}

/// Fully resolved and validated settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub dim: usize,
    pub p: Exponent,
    pub functions: Vec<String>,
    /// Exponent of the power regularizer.
    pub power: f64,
    pub lambdas: Vec<f64>,
    pub region_center: Vec<f64>,
    pub region_radius: f64,
    pub grid: usize,
    pub solver: SolverConfig,
    pub seed: u64,
    pub corpus_seed: u64,
    pub depths: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub modulus_samples: usize,
    pub modulus_refine: usize,
    /// Allowance added to the rate bound in `converge`.
    pub rate_slack: f64,
    /// Allowed distance to the analytic modulus.
    pub modulus_tolerance: f64,
    pub allow_empirical: bool,
    /// Record wall-clock times (makes output run-dependent).
    pub timing: bool,
    pub output: Option<String>,
}

struct Resolver<'a> {
    raw: &'a RawConfig,
}

impl Resolver<'_> {
    fn value<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.raw.get(key) {
            None => Ok(default),
            Some((v, origin)) => v.parse().map_err(|e: T::Err| CliError::Config {
                at: origin.to_string(),
                message: format!("`{key}`: {e}"),
            }),
        }
    }

    fn list<T: FromStr>(&self, key: &str, default: Vec<T>) -> Result<Vec<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        match self.raw.get(key) {
            None => Ok(default),
            Some((v, origin)) => v
                .split(',')
                .map(|t| t.trim())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse().map_err(|e: T::Err| CliError::Config {
                        at: origin.to_string(),
                        message: format!("`{key}`: `{t}`: {e}"),
                    })
                })
                .collect(),
        }
    }

    fn fail(&self, key: &str, message: impl Into<String>) -> CliError {
        CliError::Config {
            at: self
                .raw
                .get(key)
                .map_or_else(|| "default".to_string(), |(_, o)| o.to_string()),
            message: format!("`{key}`: {}", message.into()),
        }
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        other => Err(format!("expected a boolean, got `{other}`")),
    }
}

impl ExperimentConfig {
    /// Resolves `raw` for `experiment`; a conflicting `experiment` key is an error.
    pub fn resolve(raw: &RawConfig, experiment: Option<Experiment>) -> Result<Self, CliError> {
        let r = Resolver { raw };
        let from_file: Option<Experiment> = match raw.get("experiment") {
            None => None,
            Some((v, origin)) => Some(v.parse().map_err(|e| CliError::Config {
                at: origin.to_string(),
                message: e,
            })?),
        };
        let experiment = match (experiment, from_file) {
            (Some(a), Some(b)) if a != b => {
                return Err(r.fail("experiment", format!("config says `{b}` but `{a}` was requested")))
            }
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(r.fail("experiment", "no experiment selected")),
        };

        let depths: Vec<usize> = r.list("depths", vec![8, 16, 32])?;
        let family_dim: usize = depths.iter().map(|n| n + 1).sum();
        let (default_dim, default_p) = match experiment {
            Experiment::Adversary => (family_dim.max(1), "inf".to_string()),
            _ => (2, "2".to_string()),
        };
        let dim: usize = r.value("dim", default_dim)?;
        if dim == 0 {
            return Err(r.fail("dim", "must be at least 1"));
        }
        let p_text: String = r.value("p", default_p)?;
        let p = Exponent::parse(&p_text).map_err(|e| r.fail("p", e.to_string()))?;
        if matches!(p, Exponent::Finite(q) if !(q >= 1.0)) {
            return Err(r.fail("p", "must be at least 1 or `inf`"));
        }

        let mut functions: Vec<String> = r.list("function", vec!["all".to_string()])?;
        if functions.is_empty() {
            return Err(r.fail("function", "empty list"));
        }
        if functions.iter().any(|f| f == "all") {
            functions = FUNCTION_LABELS[..5].iter().map(|s| s.to_string()).collect();
        }
        for f in &functions {
            if !FUNCTION_LABELS.contains(&f.as_str()) {
                return Err(r.fail(
                    "function",
                    format!("`{f}` is not in the corpus ({})", FUNCTION_LABELS.join(", ")),
                ));
            }
        }

        let power: f64 = r.value("power", 2.0)?;
        if !(power >= 2.0) || !power.is_finite() {
            return Err(r.fail("power", "must be a finite number >= 2"));
        }
        let lambdas: Vec<f64> = r.list("lambdas", vec![4.0, 16.0, 64.0])?;
        if lambdas.is_empty() {
            return Err(r.fail("lambdas", "empty schedule"));
        }
        if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(r.fail("lambdas", "entries must be positive"));
        }
        if lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(r.fail("lambdas", "must be strictly increasing"));
        }

        let region_center: Vec<f64> = r.list("region.center", vec![0.0; dim])?;
        if region_center.len() != dim {
            return Err(r.fail("region.center", format!("needs {dim} coordinates")));
        }
        if region_center.iter().any(|c| !c.is_finite()) {
            return Err(r.fail("region.center", "coordinates must be finite"));
        }
        let region_radius: f64 = r.value("region.radius", 1.0)?;
        if !(region_radius > 0.0 && region_radius.is_finite()) {
            return Err(r.fail("region.radius", "must be positive"));
        }
        let grid: usize = r.value("grid", 41)?;
        if grid < 2 {
            return Err(r.fail("grid", "must be at least 2"));
        }

        let seed: u64 = r.value("seed", 0)?;
        let defaults = SolverConfig::default();
        let solver = SolverConfig {
            coarse_samples: r.value("solver.coarse_samples", defaults.coarse_samples)?,
            refine_iterations: r.value("solver.refine_iterations", defaults.refine_iterations)?,
            tolerance: r.value("solver.tolerance", defaults.tolerance)?,
            starts: r.value("solver.starts", defaults.starts)?,
            seed,
        };
        solver
            .validate()
            .map_err(|e| r.fail("solver", e.to_string()))?;

        if experiment == Experiment::Adversary {
            if depths.is_empty() {
                return Err(r.fail("depths", "empty schedule"));
            }
            if let Some(n) = depths.iter().find(|n| **n < 2 || **n % 2 != 0) {
                return Err(r.fail("depths", format!("depth {n} must be even and at least 2")));
            }
            if p != Exponent::Infinity {
                return Err(r.fail("p", "tree families live in l_inf (p = inf)"));
            }
            if dim < family_dim {
                return Err(r.fail("dim", format!("the family needs at least {family_dim} coordinates")));
            }
        }

        let epsilons: Vec<f64> = r.list("epsilons", vec![0.5, 1.0, 1.5])?;
        if epsilons.iter().any(|e| !(*e > 0.0 && *e <= 2.0)) {
            return Err(r.fail("epsilons", "entries must lie in (0, 2]"));
        }
        let modulus_samples: usize = r.value("modulus.samples", 20_000)?;
        if modulus_samples == 0 {
            return Err(r.fail("modulus.samples", "must be at least 1"));
        }
        let modulus_refine: usize = r.value("modulus.refine", 4_000)?;
        let rate_slack: f64 = r.value("rate_slack", 1e-4)?;
        let modulus_tolerance: f64 = r.value("modulus_tolerance", 1e-3)?;
        if !(rate_slack >= 0.0) || !(modulus_tolerance >= 0.0) {
            return Err(r.fail("rate_slack", "slacks must be non-negative"));
        }
        let allow_empirical = match raw.get("allow_empirical") {
            None => false,
            Some((v, _)) => parse_bool(v).map_err(|e| r.fail("allow_empirical", e))?,
        };
        let timing = match raw.get("timing") {
            None => false,
            Some((v, _)) => parse_bool(v).map_err(|e| r.fail("timing", e))?,
        };
        let output = raw.get("output").map(|(v, _)| v.clone());

        Ok(ExperimentConfig {
            experiment,
            dim,
            p,
            functions,
            power,
            lambdas,
            region_center,
            region_radius,
            grid,
            solver,
            seed,
            corpus_seed: r.value("corpus_seed", 0)?,
            depths,
            epsilons,
            modulus_samples,
            modulus_refine,
            rate_slack,
            modulus_tolerance,
            allow_empirical,
            timing,
            output,
        })
    }

    pub fn space(&self) -> NormedSpace {
        NormedSpace::new(self.dim, self.p).expect("validated exponent")
    }

    pub fn region(&self) -> Ball {
        Ball::new(
            Vector::new(self.region_center.clone()).expect("validated center"),
            self.region_radius,
        )
        .expect("validated radius")
    }

    /// `key = value` lines for every setting, in a fixed order.
    pub fn resolved_lines(&self) -> Vec<String> {
        let join = |v: &[f64]| v.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",");
        let values: [String; 22] = [
            self.experiment.to_string(),
            self.dim.to_string(),
            self.p.to_string(),
            self.functions.join(","),
            self.power.to_string(),
            join(&self.lambdas),
            join(&self.region_center),
            self.region_radius.to_string(),
            self.grid.to_string(),
            self.solver.coarse_samples.to_string(),
            self.solver.refine_iterations.to_string(),
            self.solver.tolerance.to_string(),
            self.solver.starts.to_string(),
            self.seed.to_string(),
            self.corpus_seed.to_string(),
            self.depths.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
            join(&self.epsilons),
            self.modulus_samples.to_string(),
            self.modulus_refine.to_string(),
            self.rate_slack.to_string(),
            self.modulus_tolerance.to_string(),
            self.allow_empirical.to_string(),
        ];
        let mut lines: Vec<String> = KEYS
            .iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}"))
            .collect();
        lines.push(format!("timing = {}", self.timing));
        lines
    }
}
