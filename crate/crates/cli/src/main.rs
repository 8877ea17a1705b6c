use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dcapprox::tree::{build_sign_tree, validate_tree, DyadicTree};
use dcapprox::{Exponent, NormedSpace};
use dcapprox_cli::{output, run, CliError, Experiment, ExperimentConfig, RawConfig};

#[derive(Parser)]
#[command(name = "dcapprox", version, about = "Regularization and DC-approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sup-distance to the power regularizer against the rate bound.
    Converge(Common),
    /// Quadratic regularizer versus Moreau envelope (Hilbert spaces only).
    HilbertEquiv(Common),
    /// Ordering of inf-convolution, power regularizer and the function.
    Sandwich(Common),
    /// Adversarial walk down a dyadic tree family.
    Adversary(Common),
    /// Modulus-of-convexity brackets.
    Modulus(Common),
    /// Run the experiment named by the `experiment` key.
    Run(Common),
    /// Check a tree file: midpoint law, separation and norm bound.
    ValidateTree {
        file: PathBuf,
        /// Exponent of the ambient norm.
        #[arg(long, default_value = "inf")]
        p: String,
    },
    /// Print the sign tree of the given depth.
    SignTree {
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        block_start: usize,
        /// Ambient dimension; defaults to `block_start + depth`.
        #[arg(long)]
        dim: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override a configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn experiment(common: &Common, which: Option<Experiment>) -> Result<bool, CliError> {
    let mut raw = match &common.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    if let Some(seed) = common.seed {
        raw.set(&format!("seed={seed}"))?;
    }
    for s in &common.set {
        raw.set(s)?;
    }
    let cfg = ExperimentConfig::resolve(&raw, which)?;
    let outcome = run(&cfg)?;
    let text = output::render(&cfg, &outcome.rows)?;
    match common.out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from)) {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    for v in &outcome.violations {
        eprintln!("FAIL: {v}");
    }
    Ok(outcome.passed())
}

fn validate(file: &PathBuf, p: &str) -> Result<bool, CliError> {
    let tree = DyadicTree::parse(&std::fs::read_to_string(file)?)?;
    let space = NormedSpace::new(tree.dim(), Exponent::parse(p)?)?;
    let report = validate_tree(&tree, &space)?;
    println!("nodes = {}", report.nodes);
    println!("midpoint_exact = {}", report.midpoint_exact);
    if let Some((alpha, err)) = &report.midpoint_violation {
        println!("midpoint_violation = {alpha} {err:e}");
    }
    println!("min_separation = {}", report.min_separation);
    if let Some((a, b)) = &report.closest_pair {
        println!("closest_pair = {a} {b}");
    }
    println!("separation_slack = {}", report.separation_slack);
    println!("max_norm = {}", report.max_norm);
    println!("valid = {}", report.is_valid());
    Ok(report.is_valid())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Converge(c) => experiment(c, Some(Experiment::Converge)),
        Command::HilbertEquiv(c) => experiment(c, Some(Experiment::HilbertEquiv)),
        Command::Sandwich(c) => experiment(c, Some(Experiment::Sandwich)),
        Command::Adversary(c) => experiment(c, Some(Experiment::Adversary)),
        Command::Modulus(c) => experiment(c, Some(Experiment::Modulus)),
        Command::Run(c) => experiment(c, None),
        Command::ValidateTree { file, p } => validate(file, p),
        Command::SignTree { depth, block_start, dim } => build_sign_tree(*depth, *block_start, dim.unwrap_or(block_start + depth))
            .and_then(|t| t.to_text())
            .map(|text| {
                print!("{text}");
                true
            })
            .map_err(CliError::from),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
