//! Derivative-free minimization over a norm ball.
//!
//! Every infimum in the library is realized by [`inner_minimize`]: a coarse
//! low-discrepancy sweep of the ball, a few zoomed sweeps around the
//! incumbent, then a pattern search with a rotating direction basis started
//! from the best few well-separated candidates. The returned value is always
//! the objective at a feasible point, hence an upper bound on the infimum.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::numeric::lex_cmp;
use crate::space::NormedSpace;
use crate::vector::Vector;

const PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Settings for [`inner_minimize`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Number of low-discrepancy points drawn over the whole ball.
    pub coarse_samples: usize,
    /// Cap on polling sweeps per local search.
    pub refine_iterations: usize,
    /// Local search stops once every step is below this size.
    pub tolerance: f64,
    pub seed: u64,
    /// Number of local searches (best separated candidates).
    pub starts: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            coarse_samples: 2000,
            refine_iterations: 4000,
            tolerance: 1e-6,
            seed: 0,
            starts: 3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(invalid("tolerance", "must be positive and finite"));
        }
        if self.coarse_samples == 0 {
            return Err(invalid("coarse_samples", "must be at least 1"));
        }
        if self.starts == 0 {
            return Err(invalid("starts", "must be at least 1"));
        }
        Ok(())
    }

    /// The recommended coarse sample floor `2^d` (advisory only).
    pub fn recommended_floor(dim: usize) -> usize {
        1usize << dim.min(30)
    }
}

/// Closed ball `{ y : ||y - center|| <= radius }` in the space's norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vector,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vector, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", format!("must be positive, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    pub fn centered(dim: usize, radius: f64) -> Result<Self> {
        Ball::new(Vector::zeros(dim), radius)
    }

    pub fn contains(&self, space: &NormedSpace, y: &[f64]) -> bool {
        space.dist_slices(y, self.center.as_slice()) <= self.radius
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub evaluations: usize,
    /// Whether the winning local search reached the step tolerance.
    pub converged: bool,
    pub local_searches: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub point: Vector,
    pub value: f64,
    pub diagnostics: Diagnostics,
}

/// Mixes a base seed with a stream index (evaluation point) so that every
/// evaluation draws from its own reproducible random source.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Shifted Halton points in `[-1, 1]^d`.
struct Halton {
    index: u64,
    shift: Vec<f64>,
}

impl Halton {
    fn new(dim: usize, rng: &mut ChaCha8Rng) -> Self {
        Halton {
            index: 1,
            shift: (0..dim).map(|_| rng.gen::<f64>()).collect(),
        }
    }

    fn next_into(&mut self, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate() {
            let base = PRIMES[k % PRIMES.len()] as u64;
            let u = (radical_inverse(self.index, base) + self.shift[k]).fract();
            *o = 2.0 * u - 1.0;
        }
        self.index += 1;
    }
}

#[derive(Clone)]
struct Candidate {
    point: Vec<f64>,
    value: f64,
    step: f64,
}

/// Keeps the best `cap` candidates ordered by value, then lexicographically.
struct Leaderboard {
    cap: usize,
    items: Vec<Candidate>,
}

impl Leaderboard {
    fn new(cap: usize) -> Self {
        Leaderboard {
            cap,
            items: Vec::with_capacity(cap + 1),
        }
    }

    fn better(a: &Candidate, b: &Candidate) -> bool {
        match a.value.total_cmp(&b.value) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => lex_cmp(&a.point, &b.point).is_lt(),
        }
    }

    fn offer(&mut self, point: &[f64], value: f64, step: f64) {
        if self.items.len() == self.cap {
            let worst = self.items.last().expect("non-empty");
            if !(value < worst.value
                || (value == worst.value && lex_cmp(point, &worst.point).is_lt()))
            {
                return;
            }
        }
        let cand = Candidate {
            point: point.to_vec(),
            value,
            step,
        };
        let pos = self
            .items
            .iter()
            .position(|c| Self::better(&cand, c))
            .unwrap_or(self.items.len());
        self.items.insert(pos, cand);
        self.items.truncate(self.cap);
    }

    fn best(&self) -> &Candidate {
        &self.items[0]
    }
}

struct Counted<'a, F> {
    f: &'a F,
    evals: usize,
}

impl<F: Fn(&[f64]) -> f64> Counted<'_, F> {
    fn eval(&mut self, y: &[f64]) -> Result<f64> {
        self.evals += 1;
        let v = (self.f)(y);
        if v.is_nan() || v == f64::INFINITY || v == f64::NEG_INFINITY {
            return Err(Error::NonFiniteObjective {
                point: y.to_vec(),
                value: v,
            });
        }
        Ok(v)
    }
}

/// Draws up to `count` low-discrepancy points of `ball` and offers them.
fn sweep_ball<F: Fn(&[f64]) -> f64>(
    obj: &mut Counted<'_, F>,
    space: &NormedSpace,
    center: &[f64],
    radius: f64,
    count: usize,
    rng: &mut ChaCha8Rng,
    board: &mut Leaderboard,
    outer: &Ball,
) -> Result<Vec<Candidate>> {
    let d = center.len();
    let mut halton = Halton::new(d, rng);
    let mut unit = vec![0.0; d];
    let mut y = vec![0.0; d];
    let mut accepted = 0usize;
    // Best sample per orthant around the center (first four coordinates).
    let mut best: Vec<Option<Candidate>> = vec![None; 1 << d.min(4)];
    let max_attempts = count.saturating_mul(64).max(64);
    // Points of the l_inf cube of side 2r that lie in the norm ball.
    let cell = 2.0 * radius / (count as f64).powf(1.0 / d as f64);
    for _ in 0..max_attempts {
        if accepted == count {
            break;
        }
        halton.next_into(&mut unit);
        for k in 0..d {
            y[k] = center[k] + radius * unit[k];
        }
        if space.dist_slices(&y, center) > radius || !outer.contains(space, &y) {
            continue;
        }
        accepted += 1;
        let v = obj.eval(&y)?;
        board.offer(&y, v, cell);
        let bin = (0..d.min(4)).fold(0, |b, k| b << 1 | usize::from(y[k] >= center[k]));
        if best[bin].as_ref().map_or(true, |b| v < b.value) {
            best[bin] = Some(Candidate {
                point: y.clone(),
                value: v,
                step: cell,
            });
        }
    }
    Ok(best.into_iter().flatten().collect())
}

/// Pattern search followed by the simplex polish.
fn descend<F, C>(
    obj: &mut Counted<'_, F>,
    start: &Candidate,
    cfg: &SolverConfig,
    feasible: &C,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, f64, bool)>
where
    F: Fn(&[f64]) -> f64,
    C: Fn(&[f64]) -> bool,
{
    let step = start.step.max(cfg.tolerance);
    let (p, v, _) = pattern_search(
        obj,
        &start.point,
        start.value,
        step,
        cfg.tolerance,
        cfg.refine_iterations,
        feasible,
        rng,
    )?;
    simplex_polish(obj, p, v, step, cfg.tolerance, cfg.refine_iterations, feasible, rng)
}

/// Hill-valley test: no interior point of the segment rises above both ends.
fn same_basin<F: Fn(&[f64]) -> f64>(
    obj: &mut Counted<'_, F>,
    a: &[f64],
    va: f64,
    b: &[f64],
    vb: f64,
) -> Result<bool> {
    let top = va.max(vb);
    let mut y = vec![0.0; a.len()];
    for t in [0.25, 0.5, 0.75] {
        for k in 0..a.len() {
            y[k] = a[k] + t * (b[k] - a[k]);
        }
        if obj.eval(&y)? > top + 1e-12 * (1.0 + top.abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Minimizes `objective` over `ball`.
///
/// `seeds` are evaluated first and always compete with the sampled points,
/// so the result never exceeds the objective at any seed (or at the center).
/// `stream` selects the random stream, typically the index of the evaluation
/// point in a sweep.
pub fn inner_minimize<F>(
    objective: F,
    space: &NormedSpace,
    ball: &Ball,
    seeds: &[&[f64]],
    cfg: &SolverConfig,
    stream: u64,
) -> Result<Minimum>
where
    F: Fn(&[f64]) -> f64,
{
    cfg.validate()?;
    let d = space.dim();
    if ball.center.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: ball.center.dim(),
        });
    }
    for s in seeds {
        if s.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.len(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, stream));
    let mut obj = Counted {
        f: &objective,
        evals: 0,
    };
    let cell = 2.0 * ball.radius / (cfg.coarse_samples as f64).powf(1.0 / d as f64);
    let mut board = Leaderboard::new(16 * cfg.starts + 16);

    let center = ball.center.as_slice();
    let v = obj.eval(center)?;
    board.offer(center, v, cell);
    let mut pinned = Vec::with_capacity(seeds.len());
    for s in seeds {
        if ball.contains(space, s) {
            let v = obj.eval(s)?;
            board.offer(s, v, cell);
            // Small first step: the descent should follow the seed's own basin.
            pinned.push(Candidate {
                point: s.to_vec(),
                value: v,
                step: (64.0 * cfg.tolerance).min(cell),
            });
        }
    }

    sweep_ball(
        &mut obj,
        space,
        center,
        ball.radius,
        cfg.coarse_samples,
        &mut rng,
        &mut board,
        ball,
    )?;

    // Zoom: progressively smaller sweeps around the incumbent and the seeds.
    let zoom_count = (cfg.coarse_samples / 16).clamp(4 * d + 4, 64);
    // The best point of each zoom sweep is kept as a probe: the leaderboard
    // alone tends to fill up with near-copies of the incumbent.
    let mut probes: Vec<Candidate> = Vec::new();
    let mut r = ball.radius / 4.0;
    while r > 16.0 * cfg.tolerance && r > 0.0 {
        let inc = board.best().point.clone();
        probes.extend(sweep_ball(&mut obj, space, &inc, r, zoom_count, &mut rng, &mut board, ball)?);
        for p in &pinned {
            if p.point != inc {
                probes.extend(sweep_ball(&mut obj, space, &p.point, r, zoom_count, &mut rng, &mut board, ball)?);
            }
        }
        r /= 4.0;
    }
    probes.sort_by(|a, b| a.value.total_cmp(&b.value).then_with(|| lex_cmp(&a.point, &b.point)));

    // Separated starts: greedy in leaderboard order.
    let mut starts: Vec<Candidate> = Vec::with_capacity(cfg.starts);
    for cand in &board.items {
        if starts.len() == cfg.starts {
            break;
        }
        let far = starts.iter().all(|s| {
            space.dist_slices(&s.point, &cand.point) > 0.5 * cand.step.min(s.step)
        });
        if far {
            starts.push(cand.clone());
        }
    }

    let feasible = |y: &[f64]| ball.contains(space, y);
    let mut minima: Vec<(Vec<f64>, f64, bool)> = Vec::new();
    for s in &starts {
        minima.push(descend(&mut obj, s, cfg, &feasible, &mut rng)?);
    }
    // Every seed gets its own descent.
    let mut seeded = 0;
    for p in &pinned {
        if !starts.iter().any(|s| s.point == p.point) {
            minima.push(descend(&mut obj, p, cfg, &feasible, &mut rng)?);
            seeded += 1;
        }
    }
    // Candidates separated from every minimum found so far by a bump along
    // the joining segment lie in another basin; search those too.
    let mut extra = 0;
    for cand in board.items.iter().chain(&probes) {
        if extra == 2 * cfg.starts {
            break;
        }
        let mut known = false;
        for (m, v, _) in &minima {
            if same_basin(&mut obj, &cand.point, cand.value, m, *v)? {
                known = true;
                break;
            }
        }
        if !known {
            minima.push(descend(&mut obj, cand, cfg, &feasible, &mut rng)?);
            extra += 1;
        }
    }
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for local in minima {
        let replace = match &best {
            None => true,
            Some((p, v, _)) => {
                local.1 < *v || (local.1 == *v && lex_cmp(&local.0, p).is_lt())
            }
        };
        if replace {
            best = Some(local);
        }
    }
    let searches = starts.len() + seeded + extra;
    let (point, value, converged) = best.expect("at least one start");
    Ok(Minimum {
        point: Vector::from_vec_unchecked(point),
        value,
        diagnostics: Diagnostics {
            evaluations: obj.evals,
            converged,
            local_searches: searches,
        },
    })
}

/// Unconstrained local pattern search used by the sampling-based estimators.
pub fn local_search<F>(
    objective: F,
    start: &[f64],
    initial_step: f64,
    tolerance: f64,
    max_sweeps: usize,
    seed: u64,
) -> Result<Minimum>
where
    F: Fn(&[f64]) -> f64,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut obj = Counted {
        f: &objective,
        evals: 0,
    };
    let f0 = obj.eval(start)?;
    let (point, value, converged) = pattern_search(
        &mut obj,
        start,
        f0,
        initial_step,
        tolerance,
        max_sweeps,
        |_| true,
        &mut rng,
    )?;
    Ok(Minimum {
        point: Vector::from_vec_unchecked(point),
        value,
        diagnostics: Diagnostics {
            evaluations: obj.evals,
            converged,
            local_searches: 1,
        },
    })
}

/// Orthonormalizes `first` followed by the rows of `basis`, dropping the
/// row most parallel to `first`.
fn rotate_basis(basis: &mut [Vec<f64>], first: &[f64]) {
    let d = basis.len();
    let norm = first.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 || d < 2 {
        return;
    }
    let lead: Vec<f64> = first.iter().map(|v| v / norm).collect();
    let drop = (0..d)
        .max_by(|&a, &b| {
            let pa: f64 = basis[a].iter().zip(&lead).map(|(x, y)| x * y).sum::<f64>().abs();
            let pb: f64 = basis[b].iter().zip(&lead).map(|(x, y)| x * y).sum::<f64>().abs();
            pa.total_cmp(&pb)
        })
        .expect("non-empty basis");
    let mut out: Vec<Vec<f64>> = vec![lead];
    for (i, row) in basis.iter().enumerate() {
        if i == drop {
            continue;
        }
        let mut v = row.clone();
        for q in &out {
            let c: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
        let n = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if n < 1e-12 {
            return;
        }
        v.iter_mut().for_each(|t| *t /= n);
        out.push(v);
    }
    for (dst, src) in basis.iter_mut().zip(out) {
        *dst = src;
    }
}

fn random_basis(d: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect();
    let dir: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    rotate_basis(&mut basis, &dir);
    basis
}

/// Pattern search along a rotating orthonormal basis.
///
/// Each direction keeps its own step, doubled on success and halved on
/// failure. Once every direction has both succeeded and failed since the
/// last rotation, the basis is re-aligned with the accumulated displacement
/// so that steps follow ridges and valleys. After convergence the search is
/// restarted from the incumbent with a fresh random basis until a restart
/// fails to improve.
#[allow(clippy::too_many_arguments)]
fn pattern_search<F, C>(
    obj: &mut Counted<'_, F>,
    start: &[f64],
    start_value: f64,
    initial_step: f64,
    tolerance: f64,
    max_sweeps: usize,
    feasible: C,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, f64, bool)>
where
    F: Fn(&[f64]) -> f64,
    C: Fn(&[f64]) -> bool,
{
    let d = start.len();
    let mut x = start.to_vec();
    let mut fx = start_value;
    let mut trial = vec![0.0; d];
    let mut sweeps = 0usize;
    let mut converged = false;
    let mut step0 = initial_step;
    let mut basis: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            e
        })
        .collect();

    for restart in 0..4 {
        let restart_value = fx;
        let mut steps = vec![step0; d];
        let mut displacement = vec![0.0; d];
        let mut succeeded = vec![false; d];
        let mut failed = vec![false; d];
        converged = false;
        while sweeps < max_sweeps {
            sweeps += 1;
            for i in 0..d {
                let h = steps[i];
                let mut moved = false;
                for sign in [1.0, -1.0] {
                    for k in 0..d {
                        trial[k] = x[k] + sign * h * basis[i][k];
                    }
                    if trial == x || !feasible(&trial) {
                        continue;
                    }
                    let ft = obj.eval(&trial)?;
                    if ft < fx {
                        for k in 0..d {
                            displacement[k] += trial[k] - x[k];
                        }
                        x.copy_from_slice(&trial);
                        fx = ft;
                        moved = true;
                        break;
                    }
                }
                if moved {
                    steps[i] = h * 2.0;
                    succeeded[i] = true;
                } else {
                    steps[i] = h * 0.5;
                    failed[i] = true;
                }
            }
            if d > 1 && succeeded.iter().all(|&s| s) && failed.iter().all(|&f| f) {
                let mean = steps.iter().sum::<f64>() / d as f64;
                rotate_basis(&mut basis, &displacement);
                steps.iter_mut().for_each(|s| *s = mean);
                displacement.iter_mut().for_each(|t| *t = 0.0);
                succeeded.iter_mut().for_each(|s| *s = false);
                failed.iter_mut().for_each(|f| *f = false);
            }
            if steps.iter().all(|&s| s < tolerance) {
                converged = true;
                break;
            }
        }
        if !converged || restart > 0 && fx >= restart_value {
            break;
        }
        if restart > 0 && restart_value - fx <= 0.0 {
            break;
        }
        basis = random_basis(d, rng);
        step0 = 64.0 * tolerance;
    }
    Ok((x, fx, converged))
}

/// Nelder-Mead simplex search from `start`; infeasible vertices count as
/// `+inf`. Stops when the simplex diameter drops below `tolerance`.
#[allow(clippy::too_many_arguments)]
fn nelder_mead<F, C>(
    obj: &mut Counted<'_, F>,
    start: &[f64],
    start_value: f64,
    size: f64,
    tolerance: f64,
    max_iter: usize,
    feasible: &C,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, f64, bool)>
where
    F: Fn(&[f64]) -> f64,
    C: Fn(&[f64]) -> bool,
{
    let d = start.len();
    let eval = |y: &[f64], obj: &mut Counted<'_, F>| -> Result<f64> {
        if feasible(y) {
            obj.eval(y)
        } else {
            Ok(f64::INFINITY)
        }
    };
    let basis = random_basis(d, rng);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((start.to_vec(), start_value));
    for dir in &basis {
        let v: Vec<f64> = start.iter().zip(dir).map(|(a, b)| a + size * b).collect();
        let fv = eval(&v, obj)?;
        simplex.push((v, fv));
    }
    let order = |s: &mut Vec<(Vec<f64>, f64)>| {
        s.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| lex_cmp(&a.0, &b.0)));
    };
    let mut centroid = vec![0.0; d];
    let mut converged = false;
    for _ in 0..max_iter {
        order(&mut simplex);
        let best = &simplex[0].0;
        let diam = simplex[1..]
            .iter()
            .map(|(v, _)| v.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diam < tolerance {
            converged = true;
            break;
        }
        centroid.iter_mut().for_each(|c| *c = 0.0);
        for (v, _) in &simplex[..d] {
            for k in 0..d {
                centroid[k] += v[k] / d as f64;
            }
        }
        let worst = simplex[d].clone();
        let along = |t: f64| -> Vec<f64> {
            (0..d).map(|k| centroid[k] + t * (centroid[k] - worst.0[k])).collect()
        };
        let xr = along(1.0);
        let fr = eval(&xr, obj)?;
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe, obj)?;
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(0.5);
            let fc = eval(&xc, obj)?;
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc, obj)?;
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[d] = (xc, fc);
            continue;
        }
        let head = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let v: Vec<f64> = head.iter().zip(&vertex.0).map(|(a, b)| a + 0.5 * (b - a)).collect();
            let fv = eval(&v, obj)?;
            *vertex = (v, fv);
        }
    }
    order(&mut simplex);
    let (x, fx) = simplex.swap_remove(0);
    Ok((x, fx, converged))
}

/// Repeated simplex searches from the incumbent with shrinking initial
/// size; stops once a restart fails to improve.
#[allow(clippy::too_many_arguments)]
fn simplex_polish<F, C>(
    obj: &mut Counted<'_, F>,
    start: Vec<f64>,
    start_value: f64,
    size: f64,
    tolerance: f64,
    max_iter: usize,
    feasible: &C,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, f64, bool)>
where
    F: Fn(&[f64]) -> f64,
    C: Fn(&[f64]) -> bool,
{
    let (mut x, mut fx) = (start, start_value);
    let mut size = size.max(16.0 * tolerance);
    let mut converged = false;
    for round in 0..8 {
        let (y, fy, conv) = nelder_mead(obj, &x, fx, size, tolerance, max_iter, feasible, rng)?;
        let improved = fy < fx;
        if improved {
            x = y;
            fx = fy;
        }
        converged = conv;
        if !improved && round > 0 {
            break;
        }
        size = (size / 10.0).max(16.0 * tolerance);
    }
    Ok((x, fx, converged))
}
