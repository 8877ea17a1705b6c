//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. An optional argument selects criteria by number
//! (`cargo test --test acceptance -- 4`).

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use dcapprox::regularization::{analytic_constant, grid_points};
use dcapprox::tree::{build_sign_tree, build_tree_family, validate_tree, FamilyCheck};
use dcapprox::{make_corpus, rate_bound, regularize_quadratic, Ball, NormedSpace, SampleBudget, SolverConfig};
use dcapprox_cli::experiments::{run_adversary, run_converge, run_modulus, run_sandwich};
use dcapprox_cli::{ExperimentConfig, Outcome, RawConfig};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn config(text: &str) -> ExperimentConfig {
    let raw = RawConfig::parse(text).expect("valid config");
    ExperimentConfig::resolve(&raw, None).expect("resolvable config")
}

fn summarize(outcome: &Outcome) -> Check {
    let worst = outcome
        .rows
        .iter()
        .map(|r| r.slack)
        .fold(f64::INFINITY, f64::min);
    ensure(
        outcome.passed(),
        format!(
            "{} rows, min slack {worst:.3e}{}",
            outcome.rows.len(),
            outcome
                .violations
                .first()
                .map(|v| format!("; {v}"))
                .unwrap_or_default()
        ),
    )
}

fn unit_grid(space: &NormedSpace, per_axis: usize) -> Vec<dcapprox::Vector> {
    grid_points(space, &Ball::centered(space.dim(), 1.0).unwrap(), per_axis).unwrap()
}

fn hilbert_identity() -> Check {
    let lambdas = [9.0, 36.0, 144.0];
    let mut worst = 0.0f64;
    let mut tol = 0.0;
    for d in 1..=3 {
        let space = NormedSpace::lp(d, 2.0).unwrap();
        let solver = SolverConfig {
            coarse_samples: if d == 3 { 200 } else { 2000 },
            ..SolverConfig::default()
        };
        tol = solver.tolerance;
        let pts = unit_grid(&space, 41);
        for f in make_corpus(&space, 0) {
            let gap = pts
                .par_iter()
                .map(|x| {
                    lambdas
                        .iter()
                        .map(|&lam| {
                            let v = regularize_quadratic(&f, lam, x, &space, &solver).unwrap().value;
                            (v - support::corpus_moreau(&space, 0, f.label(), x.as_slice(), lam)).abs()
                        })
                        .fold(0.0, f64::max)
                })
                .reduce(|| 0.0, f64::max);
            worst = worst.max(gap);
        }
    }
    ensure(worst <= 2.0 * tol, format!("max gap to exact envelope {worst:.3e}"))
}

fn huber_oracle() -> Check {
    let space = NormedSpace::lp(1, 2.0).unwrap();
    let f = make_corpus(&space, 0).swap_remove(0);
    let solver = SolverConfig::default();
    let mut worst = 0.0f64;
    for (x, expected) in [(0.25, 0.0625), (2.0, 1.75)] {
        let xv = dcapprox::Vector::new(vec![x]).unwrap();
        let v = regularize_quadratic(&f, 1.0, &xv, &space, &solver).unwrap().value;
        let analytic = support::moreau_norm(x, 1.0);
        let grid = (-600_000..=600_000)
            .map(|i| {
                let y = i as f64 * 1e-5;
                y.abs() + space.defect2_slices(&[x], &[y])
            })
            .fold(f64::INFINITY, f64::min);
        for other in [expected, analytic, grid] {
            worst = worst.max((v - other).abs());
        }
    }
    ensure(worst <= 1e-6, format!("max deviation {worst:.3e}"))
}

fn monotone_sandwich() -> Check {
    let lambdas = [4.0, 16.0, 64.0];
    let solver = SolverConfig::default();
    let slack = 2.0 * solver.tolerance;
    let mut worst = f64::NEG_INFINITY;
    for (p, per_axis) in [(2.0, 41), (3.0, 21), (4.0, 21)] {
        let space = NormedSpace::lp(2, p).unwrap();
        let pts = unit_grid(&space, per_axis);
        for f in make_corpus(&space, 0) {
            let w = pts
                .par_iter()
                .map(|x| {
                    let vals: Vec<f64> = lambdas
                        .iter()
                        .map(|&lam| regularize_quadratic(&f, lam, x, &space, &solver).unwrap().value)
                        .collect();
                    let mut w = vals[2] - f.eval(x);
                    for pair in vals.windows(2) {
                        w = w.max(pair[0] - pair[1]);
                    }
                    w
                })
                .reduce(|| f64::NEG_INFINITY, f64::max);
            worst = worst.max(w);
        }
    }
    ensure(worst <= slack, format!("largest ordering violation {worst:.3e}"))
}

const RATE_CASES: [(&str, usize, usize); 3] = [("2", 2, 41), ("4", 2, 41), ("2", 3, 21)];

fn rate_config(experiment: &str, p: &str, d: usize, grid: usize) -> ExperimentConfig {
    config(&format!(
        "experiment = {experiment}\np = {p}\npower = {p}\ndim = {d}\ngrid = {grid}\nlambdas = 16,64,256\n"
    ))
}

fn rate_reproduction() -> Check {
    let anchor = rate_bound(2.0, &analytic_constant(1.0), 100.0, 1.0, false).unwrap();
    if (anchor - 0.01).abs() > 1e-15 {
        return Err(format!("bound at lambda 100, p 2 is {anchor}"));
    }
    let mut details = Vec::new();
    for (p, d, grid) in RATE_CASES {
        let out = run_converge(&rate_config("converge", p, d, grid)).map_err(|e| e.to_string())?;
        details.push(format!("l{p}^{d}: {}", summarize(&out)?));
    }
    Ok(details.join("; "))
}

fn power_sandwich() -> Check {
    let mut details = Vec::new();
    for (p, d, grid) in RATE_CASES {
        let out = run_sandwich(&rate_config("sandwich", p, d, grid)).map_err(|e| e.to_string())?;
        details.push(format!("l{p}^{d}: {}", summarize(&out)?));
    }
    Ok(details.join("; "))
}

const TRIALS: usize = 100_000;
const SLACK: f64 = 1e-9;

fn random_pair(rng: &mut StdRng) -> (Vec<f64>, Vec<f64>) {
    let d = rng.gen_range(1..=5);
    let x = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    (x, y)
}

fn combine(x: &[f64], y: &[f64], a: f64, b: f64) -> Vec<f64> {
    x.iter().zip(y).map(|(s, t)| a * s + b * t).collect()
}

fn inequality_suites() -> Check {
    let norms = [1.0, 1.5, 2.0, 3.0, 4.0, 7.5, f64::INFINITY];
    let powers = [2.0, 2.5, 3.0, 4.0, 6.0];
    let mut rng = StdRng::seed_from_u64(2024);
    let mut counts = [0usize; 4];
    for _ in 0..TRIALS {
        let (x, y) = random_pair(&mut rng);
        let s = NormedSpace::lp(x.len(), norms[rng.gen_range(0..norms.len())]).unwrap();
        let gap = s.norm_slice(&x) - s.norm_slice(&y);
        if s.defect2_slices(&x, &y) < gap * gap - SLACK {
            counts[0] += 1;
        }

        let p = powers[rng.gen_range(0..powers.len())];
        let lp = NormedSpace::lp(x.len(), p).unwrap();
        if lp.defect_p_slices(p, &x, &y) < lp.norm_pow_slice(&combine(&x, &y, 1.0, -1.0), p) - SLACK {
            counts[1] += 1;
        }
        let lhs = lp.norm_pow_slice(&combine(&x, &y, 1.0, 1.0), p) + lp.norm_pow_slice(&combine(&x, &y, 1.0, -1.0), p);
        if lhs < 2.0 * lp.norm_pow_slice(&x, p) + 2.0 * lp.norm_pow_slice(&y, p) - SLACK {
            counts[2] += 1;
        }

        let mu: f64 = rng.gen_range(0.0..=1.0);
        let z = combine(&x, &y, mu, 1.0 - mu);
        let nx = s.norm_sq_slice(&x);
        let ny = s.norm_sq_slice(&y);
        let m = s.norm_sq_slice(&combine(&x, &y, 0.5, 0.5));
        let chain = s.defect2_slices(&x, &y) + (nx - ny).abs() + 4.0 * (m - nx).abs().max((m - ny).abs());
        if s.defect2_slices(&x, &z) > chain + SLACK {
            counts[3] += 1;
        }
    }
    ensure(
        counts.iter().all(|&c| c == 0),
        format!(
            "{TRIALS} trials each; violations: norm gap {}, power defect {}, two-sided {}, segment chain {}",
            counts[0], counts[1], counts[2], counts[3]
        ),
    )
}

fn tree_validity() -> Check {
    let tree = build_sign_tree(16, 0, 16).map_err(|e| e.to_string())?;
    let space = NormedSpace::lp(16, f64::INFINITY).unwrap();
    let r = validate_tree(&tree, &space).map_err(|e| e.to_string())?;
    let tree_ok = r.nodes == 131_071 && r.midpoint_exact && r.min_separation == 1.0 && r.is_valid();
    let depths = [6, 8, 10];
    let fspace = NormedSpace::lp(depths.iter().map(|n| n + 1).sum(), f64::INFINITY).unwrap();
    let fam = build_tree_family(&depths, &fspace).map_err(|e| e.to_string())?;
    let members_ok = fam
        .trees
        .iter()
        .all(|t| validate_tree(t, &fspace).map(|r| r.is_valid()).unwrap_or(false));
    let fam_ok = fam.check == FamilyCheck::Enumerated && fam.mutual_distance >= 1.0 && members_ok;
    ensure(
        tree_ok && fam_ok,
        format!(
            "{} nodes, midpoint exact {}, separation {}; family mutual distance {} ({:?})",
            r.nodes, r.midpoint_exact, r.min_separation, fam.mutual_distance, fam.check
        ),
    )
}

fn adversary_bound() -> Check {
    let out = run_adversary(&config("experiment = adversary\ndepths = 8,16,32\n")).map_err(|e| e.to_string())?;
    let unit: Vec<f64> = out
        .rows
        .iter()
        .filter(|r| r.function.starts_with("quadratic-1("))
        .map(|r| r.bound)
        .collect();
    if unit != [0.0, 0.125, 0.1875] {
        return Err(format!("bound sequence for M = 1 is {unit:?}"));
    }
    summarize(&out)
}

fn modulus_brackets() -> Check {
    let out = run_modulus(&config("experiment = modulus\np = 2\ndim = 2\nepsilons = 0.5,1,1.5\n")).map_err(|e| e.to_string())?;
    let l2 = summarize(&out)?;
    let l1 = NormedSpace::lp(2, 1.0).unwrap();
    let est = l1
        .modulus_of_convexity(1.0, &SampleBudget::default())
        .map_err(|e| e.to_string())?;
    ensure(est.upper == 0.0, format!("l2: {l2}; l1 upper at 1 = {:e}", est.upper))
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_dcapprox"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "dim = 2\np = 3\npower = 3\ngrid = 9\nfunction = max-affine,distance\nlambdas = 16,64\n")
        .map_err(|e| e.to_string())?;
    let cfg = cfg.to_str().unwrap();
    let mut compared = Vec::new();
    for sub in ["converge", "sandwich", "modulus"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{sub}-{run}.csv"));
            let (code, _) = run_cli(&[sub, "--config", cfg, "--seed", "11", "--out", path.to_str().unwrap()]);
            if code != 0 {
                return Err(format!("{sub} exited with {code}"));
            }
            outputs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{sub} output differs between runs"));
        }
        compared.push(format!("{sub} {} bytes", outputs[0].len()));
    }
    let (c1, a) = run_cli(&["adversary", "--set", "depths=4,6"]);
    let (c2, b) = run_cli(&["adversary", "--set", "depths=4,6"]);
    if c1 != 0 || c2 != 0 || a != b {
        return Err("adversary output differs between runs".into());
    }
    compared.push(format!("adversary {} bytes", a.len()));
    Ok(format!("identical: {}", compared.join(", ")))
}

fn exit_codes() -> Check {
    let cases: [(&[&str], i32); 4] = [
        (&["modulus", "--set", "dim=2", "--set", "epsilons=1"], 0),
        (&["hilbert-equiv", "--set", "p=3"], 2),
        (&["converge", "--set", "nonsense=1"], 2),
        (&["adversary", "--set", "depths=3"], 2),
    ];
    let mut seen = Vec::new();
    for (args, want) in cases {
        let (code, _) = run_cli(args);
        if code != want {
            return Err(format!("{args:?} exited with {code}, expected {want}"));
        }
        seen.push(code.to_string());
    }
    Ok(format!("exit codes {}", seen.join(",")))
}

struct Criterion {
    id: &'static str,
    name: &'static str,
    run: fn() -> Check,
}

const CRITERIA: [Criterion; 11] = [
    Criterion { id: "1", name: "quadratic regularizer equals Moreau envelope on l2", run: hilbert_identity },
    Criterion { id: "2", name: "Huber values of |x| at lambda 1", run: huber_oracle },
    Criterion { id: "3", name: "quadratic regularizers increase to f", run: monotone_sandwich },
    Criterion { id: "4", name: "uniform rate of the power regularizer", run: rate_reproduction },
    Criterion { id: "5", name: "inf-convolution below power regularizer below f", run: power_sandwich },
    Criterion { id: "6", name: "inequality fuzz suites", run: inequality_suites },
    Criterion { id: "7", name: "sign tree and family validity", run: tree_validity },
    Criterion { id: "8", name: "adversary error lower bound and walk soundness", run: adversary_bound },
    Criterion { id: "9", name: "modulus of convexity brackets", run: modulus_brackets },
    Criterion { id: "10", name: "byte-identical CSV for identical config and seed", run: determinism },
    Criterion { id: "10b", name: "CLI exit codes", run: exit_codes },
];

fn main() -> ExitCode {
    let selected: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for c in CRITERIA.iter() {
        if !selected.is_empty() && !selected.iter().any(|s| c.id.starts_with(s.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let (status, detail) = match result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:<3} {status}  {} ({secs:.1}s): {detail}", c.id, c.name);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
