//! The five experiments behind the CLI subcommands.

use std::time::Instant;

use rayon::prelude::*;

use dcapprox::regularization::grid_points;
use dcapprox::space::ConstantSource;
use dcapprox::tree::{adversarial_branch_walk, build_tree_family, counterexample_function, error_lower_bound, SignIndex};
use dcapprox::{
    inf_convolve, make_corpus, rate_bound, regularize_power, regularize_quadratic, LipschitzFunction,
    NormedSpace, PowerTypeConstant, SampleBudget, Vector,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;

/// One CSV record.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub space: String,
    pub function: String,
    /// Regularization parameter; the tree depth for `adversary` and
    /// epsilon for `modulus`.
    pub lambda: f64,
    pub measured: f64,
    pub bound: f64,
    /// Margin by which the assertion holds: `bound - measured`, or
    /// `measured - bound` where the bound is a lower bound (`adversary`).
    pub slack: f64,
    pub evaluations: u64,
    pub runtime_ms: u64,
    pub seed: u64,
}

/// Rows plus every assertion that failed while producing them.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub violations: Vec<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match cfg.experiment {
        Experiment::Converge => run_converge(cfg),
        Experiment::HilbertEquiv => run_hilbert_equiv(cfg),
        Experiment::Sandwich => run_sandwich(cfg),
        Experiment::Adversary => run_adversary(cfg),
        Experiment::Modulus => run_modulus(cfg),
    }
}

/// Corpus member by label; `constant` is the function 1.
pub fn corpus_function(label: &str, space: &NormedSpace, corpus_seed: u64) -> Result<LipschitzFunction, CliError> {
    if label == "constant" {
        return Ok(LipschitzFunction::new("constant", 1.0, |_| 1.0)?);
    }
    make_corpus(space, corpus_seed)
        .into_iter()
        .find(|f| f.label() == label)
        .ok_or_else(|| CliError::Config {
            at: "function".into(),
            message: format!("`{label}` is not in the corpus"),
        })
}

struct Clock {
    start: Instant,
    on: bool,
}

impl Clock {
    fn start(on: bool) -> Self {
        Clock {
            start: Instant::now(),
            on,
        }
    }

    fn ms(&self) -> u64 {
        if self.on {
            self.start.elapsed().as_millis() as u64
        } else {
            0
        }
    }
}

fn row(cfg: &ExperimentConfig, function: &str, lambda: f64, measured: f64, bound: f64, evaluations: usize, ms: u64) -> ResultRow {
    ResultRow {
        experiment: cfg.experiment.to_string(),
        space: cfg.space().to_string(),
        function: function.to_string(),
        lambda,
        measured,
        bound,
        slack: bound - measured,
        evaluations: evaluations as u64,
        runtime_ms: ms,
        seed: cfg.seed,
    }
}

fn budget(cfg: &ExperimentConfig) -> SampleBudget {
    SampleBudget {
        samples: cfg.modulus_samples,
        refine_sweeps: cfg.modulus_refine,
        seed: cfg.seed,
    }
}

/// Power-type constant usable in a bound, or a config error explaining why not.
fn usable_constant(cfg: &ExperimentConfig, space: &NormedSpace) -> Result<PowerTypeConstant, CliError> {
    let c = space.power_type_constant(cfg.power, &budget(cfg))?;
    if !(c.value > 0.0) {
        return Err(CliError::Config {
            at: "p".into(),
            message: format!("{space} has no positive power-type constant for power {}", cfg.power),
        });
    }
    if matches!(c.source, ConstantSource::Empirical { .. }) && !cfg.allow_empirical {
        return Err(CliError::Config {
            at: "allow_empirical".into(),
            message: format!(
                "only an empirical constant ({}) is known for {space}; set allow_empirical = true",
                c.value
            ),
        });
    }
    Ok(c)
}

fn grid(cfg: &ExperimentConfig) -> Result<Vec<Vector>, CliError> {
    let pts = grid_points(&cfg.space(), &cfg.region(), cfg.grid)?;
    if pts.is_empty() {
        return Err(CliError::Config {
            at: "grid".into(),
            message: "no grid point falls inside the region".into(),
        });
    }
    Ok(pts)
}

/// Per point, one `(value, evaluations)` pair per schedule entry.
fn sweep<F>(points: &[Vector], per_point: F) -> Result<Vec<Vec<(f64, f64, usize)>>, CliError>
where
    F: Fn(&Vector) -> Result<Vec<(f64, f64, usize)>, dcapprox::Error> + Sync,
{
    Ok(points
        .par_iter()
        .map(&per_point)
        .collect::<Result<Vec<_>, _>>()?)
}

/// Sup-distance between `f` and its power regularizer for each `lambda`,
/// against the rate bound.
pub fn run_converge(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = cfg.space();
    let constant = usable_constant(cfg, &space)?;
    let pts = grid(cfg)?;
    let mut out = Outcome::default();
    for label in &cfg.functions {
        let f = corpus_function(label, &space, cfg.corpus_seed)?;
        let clock = Clock::start(cfg.timing);
        let table = sweep(&pts, |x| {
            let fx = f.eval(x);
            cfg.lambdas
                .iter()
                .map(|&lam| {
                    let r = regularize_power(&f, cfg.power, lam, x, &space, &cfg.solver)?;
                    Ok(((fx - r.value).abs(), r.value, r.evaluations))
                })
                .collect()
        })?;
        let ms = clock.ms();
        let mut previous: Option<f64> = None;
        for (i, &lam) in cfg.lambdas.iter().enumerate() {
            let measured = table.iter().map(|v| v[i].0).fold(0.0, f64::max);
            let evals = table.iter().map(|v| v[i].2).sum();
            let bound = rate_bound(cfg.power, &constant, lam, f.lipschitz(), cfg.allow_empirical)?;
            if measured > bound + cfg.rate_slack {
                out.violations.push(format!(
                    "converge {label} lambda={lam}: sup error {measured} exceeds bound {bound} + {}",
                    cfg.rate_slack
                ));
            }
            if let Some(prev) = previous {
                if measured > prev + 2.0 * cfg.solver.tolerance {
                    out.violations.push(format!(
                        "converge {label} lambda={lam}: error {measured} grew from {prev}"
                    ));
                }
            }
            previous = Some(measured);
            out.rows.push(row(cfg, label, lam, measured, bound, evals, ms));
        }
    }
    Ok(out)
}

/// Largest gap between the quadratic regularizer and the Moreau envelope.
pub fn run_hilbert_equiv(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = cfg.space();
    if !space.is_hilbert() {
        return Err(CliError::Config {
            at: "p".into(),
            message: format!("Hilbert-only experiment; {space} is not a Hilbert space"),
        });
    }
    let pts = grid(cfg)?;
    let bound = 2.0 * cfg.solver.tolerance;
    let mut out = Outcome::default();
    for label in &cfg.functions {
        let f = corpus_function(label, &space, cfg.corpus_seed)?;
        let clock = Clock::start(cfg.timing);
        let table = sweep(&pts, |x| {
            cfg.lambdas
                .iter()
                .map(|&lam| {
                    let q = regularize_quadratic(&f, lam, x, &space, &cfg.solver)?;
                    let m = inf_convolve(&f, 2.0, lam, x, &space, &cfg.solver)?;
                    Ok(((q.value - m.value).abs(), q.value, q.evaluations + m.evaluations))
                })
                .collect()
        })?;
        let ms = clock.ms();
        for (i, &lam) in cfg.lambdas.iter().enumerate() {
            let measured = table.iter().map(|v| v[i].0).fold(0.0, f64::max);
            let evals = table.iter().map(|v| v[i].2).sum();
            if measured > bound {
                out.violations.push(format!(
                    "hilbert-equiv {label} lambda={lam}: gap {measured} exceeds {bound}"
                ));
            }
            out.rows.push(row(cfg, label, lam, measured, bound, evals, ms));
        }
    }
    Ok(out)
}

/// Worst violation of `inf-conv(lambda C) <= f^p_lambda <= f^p_lambda' <= f`
/// for consecutive `lambda < lambda'` in the schedule.
pub fn run_sandwich(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = cfg.space();
    let constant = usable_constant(cfg, &space)?;
    let pts = grid(cfg)?;
    let bound = 2.0 * cfg.solver.tolerance;
    let mut out = Outcome::default();
    for label in &cfg.functions {
        let f = corpus_function(label, &space, cfg.corpus_seed)?;
        let clock = Clock::start(cfg.timing);
        let table = sweep(&pts, |x| {
            let fx = f.eval(x);
            let mut prev = f64::NEG_INFINITY;
            cfg.lambdas
                .iter()
                .map(|&lam| {
                    let mid = regularize_power(&f, cfg.power, lam, x, &space, &cfg.solver)?;
                    let low = inf_convolve(&f, cfg.power, lam * constant.value, x, &space, &cfg.solver)?;
                    let worst = (low.value - mid.value).max(mid.value - fx).max(prev - mid.value);
                    prev = mid.value;
                    Ok((worst, mid.value, mid.evaluations + low.evaluations))
                })
                .collect()
        })?;
        let ms = clock.ms();
        for (i, &lam) in cfg.lambdas.iter().enumerate() {
            let measured = table.iter().map(|v| v[i].0).fold(f64::NEG_INFINITY, f64::max);
            let evals = table.iter().map(|v| v[i].2).sum();
            if measured > bound {
                out.violations.push(format!(
                    "sandwich {label} lambda={lam}: ordering violated by {measured}"
                ));
            }
            out.rows.push(row(cfg, label, lam, measured, bound, evals, ms));
        }
    }
    Ok(out)
}

type Eval = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A convex pair `(c, d)` with `sup |c| <= m` on the `l_inf` unit ball.
pub struct CatalogPair {
    pub label: String,
    pub m: f64,
    pub c: Eval,
    pub d: Eval,
}

fn sup_sq(x: &[f64]) -> f64 {
    let n = x.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    n * n
}

/// Zero pair, `a ||x||^2` forms and a max-affine `c`.
pub fn catalog() -> Vec<CatalogPair> {
    let zero = || -> Eval { Box::new(|_| 0.0) };
    let pieces: [([f64; 3], f64); 3] = [([0.5, 0.0, 0.0], 0.25), ([-0.5, 0.0, 0.0], 0.25), ([0.0, 0.25, 0.25], 0.0)];
    // sup over the unit ball of |a.x + b| is ||a||_1 + |b|.
    let m_affine = pieces
        .iter()
        .map(|(a, b)| a.iter().map(|t| t.abs()).sum::<f64>() + b.abs())
        .fold(0.0, f64::max);
    vec![
        CatalogPair {
            label: "zero".into(),
            m: 0.0,
            c: zero(),
            d: zero(),
        },
        CatalogPair {
            label: "quadratic-0.5".into(),
            m: 0.5,
            c: Box::new(|x| 0.5 * sup_sq(x)),
            d: zero(),
        },
        CatalogPair {
            label: "quadratic-1".into(),
            m: 1.0,
            c: Box::new(sup_sq),
            d: zero(),
        },
        CatalogPair {
            label: "quadratic-difference".into(),
            m: 1.0,
            c: Box::new(sup_sq),
            d: Box::new(|x| 0.5 * sup_sq(x)),
        },
        CatalogPair {
            label: "max-affine".into(),
            m: m_affine,
            c: Box::new(move |x| {
                pieces
                    .iter()
                    .map(|(a, b)| a.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + b)
                    .fold(f64::NEG_INFINITY, f64::max)
            }),
            d: zero(),
        },
    ]
}

/// Trees with at most this many nodes have their error measured on every
/// node; deeper ones on the walked branch.
pub const ENUMERATE_NODES: usize = 1 << 17;

/// Branch walk and error lower bound for each catalog pair on each tree
/// of the family.
pub fn run_adversary(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = cfg.space();
    let family = build_tree_family(&cfg.depths, &space)?;
    let f = counterexample_function(&family, &space)?;
    let pairs = catalog();
    let mut out = Outcome::default();
    for tree in &family.trees {
        let n = tree.depth();
        let theta = tree.theta();
        let results: Vec<Result<(ResultRow, Vec<String>), CliError>> = pairs
            .par_iter()
            .map(|pair| {
                let clock = Clock::start(cfg.timing);
                let c = |x: &Vector| Ok((pair.c)(x.as_slice()));
                let d = |x: &Vector| Ok((pair.d)(x.as_slice()));
                let mut evaluations = 0usize;
                let mut node_sup = 0.0f64;
                let mut c_sup = 0.0f64;
                if tree.len() <= ENUMERATE_NODES {
                    for pos in 0..tree.len() {
                        let x = tree.node(&SignIndex::from_position(pos))?;
                        let cv = (pair.c)(x.as_slice());
                        let gap = (f.eval(&x) - (cv - (pair.d)(x.as_slice()))).abs();
                        node_sup = node_sup.max(gap);
                        c_sup = c_sup.max(cv.abs());
                    }
                    evaluations += tree.len();
                }
                let probe = adversarial_branch_walk(c, d, tree, &f, 0.0)?;
                evaluations += 2 * n + 1;
                for l in &probe.levels {
                    c_sup = c_sup.max(l.c_value.abs());
                }
                let measured = node_sup.max(probe.max_gap);
                // The guarantee only needs the hypothesis on visited nodes.
                let walk = adversarial_branch_walk(c, d, tree, &f, measured)?;
                let bound = error_lower_bound(pair.m, theta, n)?;
                let mut violations = Vec::new();
                if measured < bound - 1e-9 {
                    violations.push(format!(
                        "adversary {} depth {n}: error {measured} below lower bound {bound}",
                        pair.label
                    ));
                }
                if !walk.is_sound() {
                    violations.push(format!(
                        "adversary {} depth {n}: c grew {} < guaranteed {}",
                        pair.label, walk.total_c_growth, walk.guaranteed_growth
                    ));
                }
                if c_sup > pair.m + 1e-12 {
                    violations.push(format!(
                        "adversary {}: |c| reached {c_sup} above M = {}",
                        pair.label, pair.m
                    ));
                }
                let label = format!("{}(M={})", pair.label, pair.m);
                let mut r = row(cfg, &label, n as f64, measured, bound, evaluations, clock.ms());
                r.slack = measured - bound;
                Ok((r, violations))
            })
            .collect();
        for r in results {
            let (row, v) = r?;
            out.rows.push(row);
            out.violations.extend(v);
        }
    }
    Ok(out)
}

/// Exact modulus of convexity where it is known in closed form.
pub fn analytic_modulus(space: &NormedSpace, epsilon: f64) -> Option<f64> {
    if space.dim() == 1 {
        Some(epsilon / 2.0)
    } else if space.is_hilbert() {
        Some(1.0 - (1.0 - epsilon * epsilon / 4.0).max(0.0).sqrt())
    } else {
        None
    }
}

/// Brackets of the modulus of convexity for each epsilon.
pub fn run_modulus(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let space = cfg.space();
    let mut out = Outcome::default();
    let results: Vec<_> = cfg
        .epsilons
        .par_iter()
        .map(|&eps| {
            let clock = Clock::start(cfg.timing);
            let est = space.modulus_of_convexity(eps, &budget(cfg))?;
            Ok::<_, CliError>((eps, est, clock.ms()))
        })
        .collect();
    for r in results {
        let (eps, est, ms) = r?;
        if est.lower > est.upper {
            out.violations.push(format!(
                "modulus eps={eps}: lower {} above upper {}",
                est.lower, est.upper
            ));
        }
        out.rows.push(row(cfg, "bracket", eps, est.upper, est.lower, est.samples_used, ms));
        if let Some(exact) = analytic_modulus(&space, eps) {
            if (est.upper - exact).abs() > cfg.modulus_tolerance {
                out.violations.push(format!(
                    "modulus eps={eps}: upper {} is {} away from {exact}",
                    est.upper,
                    (est.upper - exact).abs()
                ));
            }
            out.rows.push(row(cfg, "analytic", eps, est.upper, exact, est.samples_used, ms));
        }
    }
    Ok(out)
}
