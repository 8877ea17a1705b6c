//! Finite-dimensional `l_p` spaces, convexity defects and the modulus of
//! convexity.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::numeric::{abs_pow, CompensatedSum};
use crate::solver::{local_search, stream_seed};
use crate::vector::Vector;

/// Exponents above this value use compensated summation for p-th powers.
const COMPENSATED_ABOVE: f64 = 8.0;

/// The exponent selecting an `l_p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "infinity" | "Inf" | "INF" | "∞") {
            return Ok(Exponent::Infinity);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| invalid("p", format!("cannot parse exponent `{t}`")))?;
        if p.is_infinite() && p > 0.0 {
            return Ok(Exponent::Infinity);
        }
        Ok(Exponent::Finite(p))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

/// `R^d` with an `l_p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormedSpace {
    dim: usize,
    exponent: Exponent,
}

impl fmt::Display for NormedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}^{}", self.exponent, self.dim)
    }
}

/// Sampling effort for the estimators in this module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBudget {
    /// Random pairs drawn before refinement.
    pub samples: usize,
    /// Polling sweeps given to the local refinement of the best pairs.
    pub refine_sweeps: usize,
    pub seed: u64,
}

impl Default for SampleBudget {
    fn default() -> Self {
        SampleBudget {
            samples: 20_000,
            refine_sweeps: 4_000,
            seed: 0,
        }
    }
}

/// Bracket `[lower, upper]` on the modulus of convexity at `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulusEstimate {
    pub epsilon: f64,
    pub lower: f64,
    pub upper: f64,
    pub samples_used: usize,
    /// Feasible pair realizing `upper`.
    pub witness: (Vector, Vector),
}

/// Where a power-type constant comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantSource {
    /// Known closed form (Clarkson's inequality).
    Analytic,
    /// Infimum over sampled pairs; an upper bound on the true constant.
    Empirical { pairs: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTypeConstant {
    pub value: f64,
    pub source: ConstantSource,
}

impl PowerTypeConstant {
    pub fn is_empirical(&self) -> bool {
        matches!(self.source, ConstantSource::Empirical { .. })
    }
}

impl NormedSpace {
    pub fn new(dim: usize, exponent: Exponent) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if let Exponent::Finite(p) = exponent {
            if !(p >= 1.0) || p.is_infinite() {
                return Err(invalid("p", format!("exponent must be >= 1, got {p}")));
            }
        }
        Ok(NormedSpace { dim, exponent })
    }

    /// `l_p^dim`; `p = f64::INFINITY` selects the max norm.
    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        let exponent = if p == f64::INFINITY {
            Exponent::Infinity
        } else {
            Exponent::Finite(p)
        };
        Self::new(dim, exponent)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn exponent(&self) -> Exponent {
        self.exponent
    }

    pub fn is_hilbert(&self) -> bool {
        self.exponent == Exponent::Finite(2.0) || self.dim == 1
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFiniteCoordinate { index, value });
        }
        Ok(())
    }

    /// `||x||`, validating the dimension.
    pub fn norm(&self, x: &Vector) -> Result<f64> {
        self.check(x.as_slice())?;
        Ok(self.norm_slice(x.as_slice()))
    }

    /// `||x||` without validation; the hot path used by the solvers.
    #[inline]
    pub fn norm_slice(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match self.exponent {
            Exponent::Infinity => x.iter().fold(0.0, |m, v| m.max(v.abs())),
            Exponent::Finite(p) if p == 1.0 => x.iter().map(|v| v.abs()).sum(),
            Exponent::Finite(p) if p == 2.0 => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            Exponent::Finite(p) => {
                let scale = x.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
                if scale == 0.0 {
                    return 0.0;
                }
                let s = if p > COMPENSATED_ABOVE {
                    x.iter()
                        .map(|v| abs_pow(v / scale, p))
                        .collect::<CompensatedSum>()
                        .value()
                } else {
                    x.iter().map(|v| abs_pow(v / scale, p)).sum::<f64>()
                };
                scale * s.powf(1.0 / p)
            }
        }
    }

    /// `||x||^2`; for `l_2` this avoids the square root entirely.
    #[inline]
    pub fn norm_sq_slice(&self, x: &[f64]) -> f64 {
        match self.exponent {
            Exponent::Finite(p) if p == 2.0 => x.iter().map(|v| v * v).sum(),
            _ => {
                let n = self.norm_slice(x);
                n * n
            }
        }
    }

    /// `||x||^p` for a power `p >= 1`.
    #[inline]
    pub fn norm_pow_slice(&self, x: &[f64], power: f64) -> f64 {
        if power == 2.0 {
            self.norm_sq_slice(x)
        } else {
            abs_pow(self.norm_slice(x), power)
        }
    }

    /// `||x - y||`.
    #[inline]
    pub fn dist_slices(&self, x: &[f64], y: &[f64]) -> f64 {
        match self.exponent {
            Exponent::Infinity => x
                .iter()
                .zip(y)
                .fold(0.0, |m, (a, b)| m.max((a - b).abs())),
            Exponent::Finite(p) if p == 1.0 => x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum(),
            Exponent::Finite(p) if p == 2.0 => x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt(),
            Exponent::Finite(_) => {
                let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
                self.norm_slice(&diff)
            }
        }
    }

    pub fn dist(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check(x.as_slice())?;
        self.check(y.as_slice())?;
        Ok(self.dist_slices(x.as_slice(), y.as_slice()))
    }

    /// Quadratic convexity defect `2||x||^2 + 2||y||^2 - ||x+y||^2`.
    pub fn defect2(&self, x: &Vector, y: &Vector) -> Result<f64> {
        self.check(x.as_slice())?;
        self.check(y.as_slice())?;
        Ok(self.defect2_slices(x.as_slice(), y.as_slice()))
    }

    #[inline]
    pub fn defect2_slices(&self, x: &[f64], y: &[f64]) -> f64 {
        let d = x.len();
        let mut sum = [0.0f64; 16];
        let nxy = if d <= sum.len() {
            for k in 0..d {
                sum[k] = x[k] + y[k];
            }
            self.norm_sq_slice(&sum[..d])
        } else {
            let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
            self.norm_sq_slice(&s)
        };
        2.0 * self.norm_sq_slice(x) + 2.0 * self.norm_sq_slice(y) - nxy
    }

    /// Power defect `2^{p-1}||x||^p + 2^{p-1}||y||^p - ||x+y||^p`, `p >= 2`.
    pub fn defect_p(&self, p: f64, x: &Vector, y: &Vector) -> Result<f64> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(invalid("p", format!("power defect needs p >= 2, got {p}")));
        }
        self.check(x.as_slice())?;
        self.check(y.as_slice())?;
        Ok(self.defect_p_slices(p, x.as_slice(), y.as_slice()))
    }

    #[inline]
    pub fn defect_p_slices(&self, p: f64, x: &[f64], y: &[f64]) -> f64 {
        if p == 2.0 {
            return self.defect2_slices(x, y);
        }
        let d = x.len();
        let mut buf = [0.0f64; 16];
        let nxy = if d <= buf.len() {
            for k in 0..d {
                buf[k] = x[k] + y[k];
            }
            self.norm_slice(&buf[..d])
        } else {
            let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
            self.norm_slice(&s)
        };
        let c = 2f64.powf(p - 1.0);
        let a = c * abs_pow(self.norm_slice(x), p);
        let b = c * abs_pow(self.norm_slice(y), p);
        let s = abs_pow(nxy, p);
        if p > COMPENSATED_ABOVE {
            [a, b, -s].into_iter().collect::<CompensatedSum>().value()
        } else {
            a + b - s
        }
    }

    /// Analytic lower bound on the modulus of convexity: Clarkson's bound
    /// `1 - (1 - (eps/2)^q)^{1/q}` for `l_q`, `q >= 2`, and zero otherwise.
    pub fn modulus_lower_bound(&self, epsilon: f64) -> f64 {
        match self.exponent {
            Exponent::Finite(q) if q >= 2.0 => {
                let t = abs_pow(epsilon / 2.0, q);
                (1.0 - (1.0 - t).max(0.0).powf(1.0 / q)).max(0.0)
            }
            _ if self.dim == 1 => epsilon / 2.0,
            _ => 0.0,
        }
    }

    /// Brackets the modulus of convexity `delta(epsilon)`.
    ///
    /// Pairs are parameterized by a midpoint direction `u` and a difference
    /// direction `w`: the difference is fixed to length `epsilon` along `w`
    /// and the midpoint is pushed along `u` as far as the unit ball allows.
    /// Each evaluated pair is re-checked for feasibility, so `upper` is a
    /// rigorous upper bound on `delta(epsilon)`.
    pub fn modulus_of_convexity(&self, epsilon: f64, budget: &SampleBudget) -> Result<ModulusEstimate> {
        if !(epsilon > 0.0 && epsilon <= 2.0) {
            return Err(invalid(
                "epsilon",
                format!("must lie in (0, 2], got {epsilon}"),
            ));
        }
        let d = self.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(budget.seed, 0x6d6f64));
        let mut samples = 0usize;
        let mut best: Option<(f64, Vector, Vector)> = None;
        let mut params: Vec<(f64, Vec<f64>)> = Vec::new();

        let consider = |theta: &[f64], best: &mut Option<(f64, Vector, Vector)>| -> f64 {
            match self.pair_from_directions(epsilon, &theta[..d], &theta[d..]) {
                Some((val, x, y)) => {
                    if best.as_ref().map_or(true, |b| val < b.0) {
                        *best = Some((val, x, y));
                    }
                    val
                }
                None => 2.0,
            }
        };

        // Structured seeds: coordinate and diagonal directions.
        for theta in self.structured_directions(2 * d) {
            samples += 1;
            let v = consider(&theta, &mut best);
            params.push((v, theta));
        }
        for _ in 0..budget.samples {
            let theta: Vec<f64> = (0..2 * d).map(|_| rng.sample(StandardNormal)).collect();
            samples += 1;
            let v = consider(&theta, &mut best);
            params.push((v, theta));
        }
        params.sort_by(|a, b| a.0.total_cmp(&b.0));

        for (i, (_, theta)) in params.iter().take(3).enumerate() {
            let cell = std::cell::RefCell::new(&mut best);
            let refined = local_search(
                |t: &[f64]| {
                    let mut b = cell.borrow_mut();
                    consider(t, &mut b)
                },
                theta,
                0.25,
                1e-10,
                budget.refine_sweeps,
                stream_seed(budget.seed, i as u64 + 1),
            )?;
            samples += refined.diagnostics.evaluations;
        }

        let (upper, x, y) = best.ok_or_else(|| invalid("epsilon", "no feasible pair found"))?;
        let upper = upper.clamp(0.0, 1.0);
        let lower = self.modulus_lower_bound(epsilon).min(upper);
        Ok(ModulusEstimate {
            epsilon,
            lower,
            upper,
            samples_used: samples,
            witness: (x, y),
        })
    }

    /// Direction pairs built from `{-1, 0, 1}` patterns, capped at a few
    /// hundred entries.
    fn structured_directions(&self, len: usize) -> Vec<Vec<f64>> {
        let d = self.dim;
        let mut half: Vec<Vec<f64>> = Vec::new();
        for i in 0..d {
            half.push(Vector::basis(d, i).into_inner());
            for j in (i + 1)..d {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; d];
                    v[i] = 1.0;
                    v[j] = s;
                    half.push(v);
                }
            }
        }
        half.push(vec![1.0; d]);
        half.truncate(24);
        let mut out = Vec::new();
        for a in &half {
            for b in &half {
                let mut t = a.clone();
                t.extend_from_slice(b);
                debug_assert_eq!(t.len(), len);
                out.push(t);
            }
        }
        out
    }

    /// Feasible pair with `||x - y|| >= epsilon` for the given directions and
    /// the value `1 - ||(x+y)/2||`, or `None` if the directions are degenerate.
    fn pair_from_directions(&self, epsilon: f64, u: &[f64], w: &[f64]) -> Option<(f64, Vector, Vector)> {
        let nu = self.norm_slice(u);
        let nw = self.norm_slice(w);
        if !(nu > 0.0 && nw > 0.0) || !nu.is_finite() || !nw.is_finite() {
            return None;
        }
        let u: Vec<f64> = u.iter().map(|t| t / nu).collect();
        let mut scale = 0.5 * epsilon / nw;
        let mut v: Vec<f64> = w.iter().map(|t| t * scale).collect();
        let mut tries = 0;
        while 2.0 * self.norm_slice(&v) < epsilon {
            tries += 1;
            if tries > 8 {
                return None;
            }
            scale *= 1.0 + 4.0 * f64::EPSILON;
            v = w.iter().map(|t| t * scale).collect();
        }
        let d = self.dim;
        let build = |s: f64| -> (Vec<f64>, Vec<f64>) {
            let x: Vec<f64> = (0..d).map(|k| s * u[k] + v[k]).collect();
            let y: Vec<f64> = (0..d).map(|k| s * u[k] - v[k]).collect();
            (x, y)
        };
        let feasible = |s: f64| {
            let (x, y) = build(s);
            self.norm_slice(&x) <= 1.0 && self.norm_slice(&y) <= 1.0
        };
        if !feasible(0.0) {
            return None;
        }
        let (mut lo, mut hi) = (0.0f64, 2.0f64);
        if feasible(1.0) {
            lo = 1.0;
        } else {
            hi = 1.0;
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if feasible(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (x, y) = build(lo);
        if self.dist_slices(&x, &y) < epsilon {
            return None;
        }
        let m: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
        let val = 1.0 - self.norm_slice(&m);
        Some((val, Vector::from_vec_unchecked(x), Vector::from_vec_unchecked(y)))
    }

    /// Largest known `C` with `C ||x-y||^p <= defect_p(x, y)` for all pairs.
    ///
    /// `l_q` with `2 <= q <= p` gives the analytic value 1. Other spaces get
    /// the infimum of `defect_p / ||x-y||^p` over structured and random pairs
    /// (refined locally), clamped to `[0, 1]` and flagged as empirical.
    pub fn power_type_constant(&self, p: f64, budget: &SampleBudget) -> Result<PowerTypeConstant> {
        if !(p >= 2.0) || !p.is_finite() {
            return Err(invalid("p", format!("power type needs p >= 2, got {p}")));
        }
        if let Exponent::Finite(q) = self.exponent {
            if (2.0..=p).contains(&q) || (self.dim == 1) {
                return Ok(PowerTypeConstant {
                    value: 1.0,
                    source: ConstantSource::Analytic,
                });
            }
        }
        let d = self.dim;
        let ratio = |t: &[f64]| -> f64 {
            let (x, y) = t.split_at(d);
            let diff = self.dist_slices(x, y);
            if !(diff > 1e-12) {
                return 1.0;
            }
            let r = self.defect_p_slices(p, x, y) / abs_pow(diff, p);
            if r.is_finite() {
                r
            } else {
                1.0
            }
        };
        let mut pairs = 0usize;
        let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
        // Structured pairs with coordinates in {-1, 0, 1}.
        let pattern_count = 3usize.pow(d.min(4) as u32);
        let patterns: Vec<Vec<f64>> = (0..pattern_count)
            .map(|mut k| {
                (0..d)
                    .map(|i| {
                        if i >= 4 {
                            return 0.0;
                        }
                        let c = (k % 3) as f64 - 1.0;
                        k /= 3;
                        c
                    })
                    .collect()
            })
            .collect();
        for a in &patterns {
            for b in &patterns {
                let mut t = a.clone();
                t.extend_from_slice(b);
                pairs += 1;
                scored.push((ratio(&t), t));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(budget.seed, 0x707463));
        for _ in 0..budget.samples {
            let t: Vec<f64> = (0..2 * d).map(|_| rng.sample(StandardNormal)).collect();
            pairs += 1;
            scored.push((ratio(&t), t));
        }
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = scored[0].0;
        for (i, (_, t)) in scored.iter().take(3).enumerate() {
            let m = local_search(ratio, t, 0.1, 1e-9, budget.refine_sweeps, stream_seed(budget.seed, i as u64))?;
            pairs += m.diagnostics.evaluations;
            best = best.min(m.value);
        }
        Ok(PowerTypeConstant {
            value: best.clamp(0.0, 1.0),
            source: ConstantSource::Empirical { pairs },
        })
    }
}

/// Draws a point uniformly-ish in the ball of the given radius: a Gaussian
/// direction normalized in the space norm, scaled by `radius * U^{1/d}`.
pub fn sample_ball(space: &NormedSpace, radius: f64, rng: &mut impl Rng) -> Vector {
    let d = space.dim();
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = space.norm_slice(&g);
        if n > 0.0 {
            let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
            return Vector::from_vec_unchecked(g.into_iter().map(|t| t * r / n).collect());
        }
    }
}
