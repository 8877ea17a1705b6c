//! Difference-of-convex regularization of Lipschitz functions.
//!
//! For an `L`-Lipschitz `f` and `lambda > 0` the quadratic regularizer is
//!
//! ```text
//! f_lambda(x) = inf_y { f(y) + lambda * (2||x||^2 + 2||y||^2 - ||x+y||^2) }
//! ```
//!
//! and the power regularizer replaces the defect by
//! `2^{p-1}||x||^p + 2^{p-1}||y||^p - ||x+y||^p`. Both are differences of
//! convex functions; `f_lambda = c - d` with `c(x) = 2 lambda ||x||^2` and
//! `d(x) = sup_y { lambda ||x+y||^2 - 2 lambda ||y||^2 - f(y) }`.
//!
//! Inputs with `L != 1` are handled through `f_{K mu} = K (f/K)_mu`: the
//! normalized parameter `mu = lambda / L` decides the search region, which
//! is provably large enough to contain every `y` that beats `y = x`.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::lipschitz::LipschitzFunction;
use crate::numeric::abs_pow;
use crate::solver::{inner_minimize, Ball, SolverConfig};
use crate::space::{ConstantSource, NormedSpace, PowerTypeConstant};
use crate::vector::Vector;

/// Smallest normalized parameter for which the radius `2(1 + ||x||)` is proved.
pub const NORMALIZED_THRESHOLD: f64 = 3.0;

/// Largest dimension accepted by grid sweeps.
pub const MAX_GRID_DIM: usize = 4;

/// One evaluation of a regularizer.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizationResult {
    pub value: f64,
    /// Point attaining `value` in the inner infimum.
    pub minimizer: Vector,
    pub search_radius: f64,
    pub evaluations: usize,
    pub converged: bool,
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {v}")))
    }
}

fn check_dim(space: &NormedSpace, x: &Vector) -> Result<()> {
    if x.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: x.dim(),
        });
    }
    Ok(())
}

/// Radius `2(1 + ||x||)` of the ball around the origin that contains every
/// competitive `y`, valid once `lambda / L >= 3`.
pub fn search_radius(x: &Vector, lipschitz: f64, lambda: f64, space: &NormedSpace) -> Result<f64> {
    check_positive("lipschitz", lipschitz)?;
    check_positive("lambda", lambda)?;
    let normalized = lambda / lipschitz;
    if normalized < NORMALIZED_THRESHOLD {
        return Err(Error::ParameterTooSmall {
            normalized,
            required: NORMALIZED_THRESHOLD,
            suggested_lambda: NORMALIZED_THRESHOLD * lipschitz,
        });
    }
    Ok(2.0 * (1.0 + space.norm(x)?))
}

/// Search radius used by the regularizers: `2(1 + ||x||)` when the
/// normalized parameter is at least 3, otherwise the root bound
/// `||x|| + max(1, (1 + sqrt(1 + 8 mu ||x||)) / (2 mu))` obtained from
/// `mu (||x|| - ||y||)^2 <= ||x|| + ||y||`.
pub fn admissible_radius(x: &Vector, lipschitz: f64, lambda: f64, space: &NormedSpace) -> Result<f64> {
    match search_radius(x, lipschitz, lambda, space) {
        Err(Error::ParameterTooSmall { normalized, .. }) => {
            let a = space.norm(x)?;
            let s = (1.0 + (1.0 + 8.0 * normalized * a).sqrt()) / (2.0 * normalized);
            Ok(a + s.max(1.0))
        }
        other => other,
    }
}

/// Stream index derived from the coordinates, so each evaluation point
/// owns its random source regardless of scheduling.
fn point_stream(x: &[f64], salt: u64) -> u64 {
    x.iter().fold(salt ^ 0xcbf2_9ce4_8422_2325, |h, c| {
        (h ^ c.to_bits()).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn finish(min: crate::solver::Minimum, radius: f64) -> RegularizationResult {
    RegularizationResult {
        value: min.value,
        minimizer: min.point,
        search_radius: radius,
        evaluations: min.diagnostics.evaluations,
        converged: min.diagnostics.converged,
    }
}

/// Quadratic regularizer `f_lambda(x)`.
pub fn regularize_quadratic(
    f: &LipschitzFunction,
    lambda: f64,
    x: &Vector,
    space: &NormedSpace,
    cfg: &SolverConfig,
) -> Result<RegularizationResult> {
    check_dim(space, x)?;
    let radius = admissible_radius(x, f.lipschitz(), lambda, space)?;
    let xs = x.as_slice();
    let objective = |y: &[f64]| f.eval_slice(y) + lambda * space.defect2_slices(xs, y);
    let ball = Ball::centered(space.dim(), radius)?;
    let min = inner_minimize(objective, space, &ball, &[xs], cfg, point_stream(xs, 2))?;
    Ok(finish(min, radius))
}

/// Power regularizer `f^p_lambda(x)`, `p >= 2`.
///
/// The search radius is the same as for the quadratic regularizer: in any
/// norm the power defect dominates `(||x|| - ||y||)^p`, which is all the
/// radius argument needs.
pub fn regularize_power(
    f: &LipschitzFunction,
    p: f64,
    lambda: f64,
    x: &Vector,
    space: &NormedSpace,
    cfg: &SolverConfig,
) -> Result<RegularizationResult> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(invalid("p", format!("power regularizer needs p >= 2, got {p}")));
    }
    check_dim(space, x)?;
    let radius = admissible_radius(x, f.lipschitz(), lambda, space)?;
    let xs = x.as_slice();
    let objective = |y: &[f64]| f.eval_slice(y) + lambda * space.defect_p_slices(p, xs, y);
    let ball = Ball::centered(space.dim(), radius)?;
    let min = inner_minimize(objective, space, &ball, &[xs], cfg, point_stream(xs, 2))?;
    Ok(finish(min, radius))
}

/// Inf-convolution `inf_y { f(y) + lambda ||x - y||^power }`.
///
/// For `power > 1` only `||y - x|| <= (L / lambda)^{1/(power-1)}` can beat
/// `y = x`. For `power = 1` the search uses the ball of radius
/// `2(1 + ||x||)` around `x`; use [`inf_convolve_within`] to choose another.
pub fn inf_convolve(
    f: &LipschitzFunction,
    power: f64,
    lambda: f64,
    x: &Vector,
    space: &NormedSpace,
    cfg: &SolverConfig,
) -> Result<RegularizationResult> {
    check_dim(space, x)?;
    let hint = 2.0 * (1.0 + space.norm(x)?);
    inf_convolve_within(f, power, lambda, x, space, cfg, hint)
}

pub fn inf_convolve_within(
    f: &LipschitzFunction,
    power: f64,
    lambda: f64,
    x: &Vector,
    space: &NormedSpace,
    cfg: &SolverConfig,
    diameter_hint: f64,
) -> Result<RegularizationResult> {
    if !(power >= 1.0) || !power.is_finite() {
        return Err(invalid("power", format!("must be >= 1, got {power}")));
    }
    check_positive("lambda", lambda)?;
    check_dim(space, x)?;
    let radius = if power > 1.0 {
        (f.lipschitz() / lambda).powf(1.0 / (power - 1.0))
    } else {
        check_positive("diameter_hint", diameter_hint)?;
        diameter_hint
    };
    let xs = x.as_slice();
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid("lambda", "inf-convolution radius degenerated"));
    }
    let objective = |y: &[f64]| {
        let dist = space.dist_slices(xs, y);
        f.eval_slice(y) + lambda * abs_pow(dist, power)
    };
    let ball = Ball::new(x.clone(), radius)?;
    let min = inner_minimize(objective, space, &ball, &[xs], cfg, point_stream(xs, 3))?;
    Ok(finish(min, radius))
}

/// `f_lambda = c - d` with both halves convex.
#[derive(Debug, Clone)]
pub struct ConvexPair {
    f: LipschitzFunction,
    space: NormedSpace,
    cfg: SolverConfig,
    lambda: f64,
}

impl ConvexPair {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `c(x) = 2 lambda ||x||^2`.
    pub fn c(&self, x: &Vector) -> Result<f64> {
        check_dim(&self.space, x)?;
        Ok(2.0 * self.lambda * self.space.norm_sq_slice(x.as_slice()))
    }

    /// `d(x) = sup_y { lambda ||x+y||^2 - 2 lambda ||y||^2 - f(y) }` over the
    /// same ball that realizes `f_lambda(x)`.
    pub fn d(&self, x: &Vector) -> Result<f64> {
        check_dim(&self.space, x)?;
        let radius = admissible_radius(x, self.f.lipschitz(), self.lambda, &self.space)?;
        let xs = x.as_slice();
        let lambda = self.lambda;
        let space = self.space;
        let f = &self.f;
        let negated = |y: &[f64]| {
            let mut s = [0.0f64; 16];
            let n = y.len();
            let sum_sq = if n <= 16 {
                for k in 0..n {
                    s[k] = xs[k] + y[k];
                }
                space.norm_sq_slice(&s[..n])
            } else {
                let v: Vec<f64> = xs.iter().zip(y).map(|(a, b)| a + b).collect();
                space.norm_sq_slice(&v)
            };
            f.eval_slice(y) + 2.0 * lambda * space.norm_sq_slice(y) - lambda * sum_sq
        };
        let ball = Ball::centered(space.dim(), radius)?;
        let min = inner_minimize(negated, &space, &ball, &[xs], &self.cfg, point_stream(xs, 2))?;
        Ok(-min.value)
    }

    /// `c(x) - d(x)`.
    pub fn value(&self, x: &Vector) -> Result<f64> {
        Ok(self.c(x)? - self.d(x)?)
    }
}

/// Builds the convex decomposition of the quadratic regularizer.
pub fn decompose(
    f: &LipschitzFunction,
    lambda: f64,
    space: &NormedSpace,
    cfg: &SolverConfig,
) -> Result<ConvexPair> {
    check_positive("lambda", lambda)?;
    cfg.validate()?;
    Ok(ConvexPair {
        f: f.clone(),
        space: *space,
        cfg: cfg.clone(),
        lambda,
    })
}

/// Regular grid with `per_axis` points per coordinate over the bounding
/// cube of `region`, restricted to points inside the region.
pub fn grid_points(space: &NormedSpace, region: &Ball, per_axis: usize) -> Result<Vec<Vector>> {
    let d = space.dim();
    if d > MAX_GRID_DIM {
        return Err(Error::GridDimensionTooLarge {
            dim: d,
            max: MAX_GRID_DIM,
        });
    }
    if per_axis < 2 {
        return Err(invalid("grid", "need at least 2 points per axis"));
    }
    check_dim(space, &region.center)?;
    let total = per_axis.pow(d as u32);
    let step = 2.0 * region.radius / (per_axis - 1) as f64;
    let c = region.center.as_slice();
    let mut out = Vec::new();
    let mut y = vec![0.0; d];
    for idx in 0..total {
        let mut k = idx;
        for i in (0..d).rev() {
            let j = k % per_axis;
            k /= per_axis;
            y[i] = if j == per_axis - 1 {
                c[i] + region.radius
            } else {
                c[i] - region.radius + step * j as f64
            };
        }
        if region.contains(space, &y) {
            out.push(Vector::from_vec_unchecked(y.clone()));
        }
    }
    Ok(out)
}

/// Largest `|f - g|` found on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SupDistance {
    /// Lower bound on the true supremum over the region.
    pub value: f64,
    pub argmax: Vector,
    pub grid_points: usize,
    /// Grid spacing; the sup over the region may exceed `value` by up to
    /// the combined Lipschitz constants times this resolution.
    pub spacing: f64,
}

/// Maximum of `|f - g|` over the grid points of `region`.
pub fn sup_distance<G>(
    f: &LipschitzFunction,
    g: G,
    space: &NormedSpace,
    region: &Ball,
    per_axis: usize,
) -> Result<SupDistance>
where
    G: Fn(&Vector) -> Result<f64> + Sync,
{
    let pts = grid_points(space, region, per_axis)?;
    if pts.is_empty() {
        return Err(invalid("region", "grid has no point inside the region"));
    }
    let gaps: Vec<f64> = pts
        .par_iter()
        .map(|x| Ok((f.eval(x) - g(x)?).abs()))
        .collect::<Result<Vec<f64>>>()?;
    let (i, value) = gaps
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    Ok(SupDistance {
        value,
        argmax: pts[i].clone(),
        grid_points: pts.len(),
        spacing: 2.0 * region.radius / (per_axis - 1) as f64,
    })
}

/// Uniform error bound `L (L / (lambda C))^{1/(p-1)}` for the power
/// regularizer of an `L`-Lipschitz function.
///
/// Empirical constants are refused unless `allow_empirical` is set, since
/// an overestimated constant would make the bound unsound.
pub fn rate_bound(
    p: f64,
    constant: &PowerTypeConstant,
    lambda: f64,
    lipschitz: f64,
    allow_empirical: bool,
) -> Result<f64> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(invalid("p", format!("needs p >= 2, got {p}")));
    }
    let c = constant.value;
    if !(c > 0.0 && c <= 1.0) {
        return Err(invalid("C", format!("must lie in (0, 1], got {c}")));
    }
    if matches!(constant.source, ConstantSource::Empirical { .. }) && !allow_empirical {
        return Err(Error::EmpiricalConstant { value: c });
    }
    check_positive("lambda", lambda)?;
    check_positive("lipschitz", lipschitz)?;
    Ok(lipschitz * (lipschitz / (lambda * c)).powf(1.0 / (p - 1.0)))
}

/// Analytic constant helper for [`rate_bound`].
pub fn analytic_constant(value: f64) -> PowerTypeConstant {
    PowerTypeConstant {
        value,
        source: ConstantSource::Analytic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lipschitz::{linear_functional, make_corpus};
    use crate::space::sample_ball;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    fn abs1() -> (NormedSpace, LipschitzFunction) {
        let s = NormedSpace::lp(1, 2.0).unwrap();
        let f = LipschitzFunction::new("abs", 1.0, |y| y[0].abs()).unwrap();
        (s, f)
    }

    #[test]
    fn radius_examples() {
        let l2 = NormedSpace::lp(2, 2.0).unwrap();
        let unit = v(&[0.6, 0.8]);
        assert_eq!(search_radius(&unit, 1.0, 3.0, &l2).unwrap(), 4.0);
        assert_eq!(search_radius(&v(&[0.0, 0.0]), 1.0, 10.0, &l2).unwrap(), 2.0);
        assert_eq!(search_radius(&unit, 2.0, 6.0, &l2).unwrap(), 4.0);
        match search_radius(&unit, 1.0, 2.0, &l2) {
            Err(Error::ParameterTooSmall { suggested_lambda, .. }) => assert_eq!(suggested_lambda, 3.0),
            other => panic!("{other:?}"),
        }
        // Small parameters fall back to the root bound, which is larger.
        let r = admissible_radius(&unit, 1.0, 1.0, &l2).unwrap();
        assert!((r - (1.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn huber_values() {
        let (s, f) = abs1();
        let cfg = SolverConfig::default();
        for (x, want) in [(0.25, 0.0625), (2.0, 1.75), (-2.0, 1.75), (0.0, 0.0)] {
            let q = regularize_quadratic(&f, 1.0, &v(&[x]), &s, &cfg).unwrap();
            assert!((q.value - want).abs() < 1e-6, "quadratic at {x}: {}", q.value);
            let m = inf_convolve(&f, 2.0, 1.0, &v(&[x]), &s, &cfg).unwrap();
            assert!((m.value - want).abs() < 1e-6, "moreau at {x}: {}", m.value);
            assert!(q.minimizer.as_slice()[0].abs() <= q.search_radius);
        }
        // Grid oracle for the same envelope.
        let grid = |x: f64| {
            (0..=400_000)
                .map(|i| -2.0 + 8.0 * i as f64 / 400_000.0)
                .map(|y: f64| y.abs() + (x - y) * (x - y))
                .fold(f64::INFINITY, f64::min)
        };
        assert!((grid(0.25) - 0.0625).abs() < 1e-6);
        assert!((grid(2.0) - 1.75).abs() < 1e-6);
    }

    #[test]
    fn constants_are_fixed_points() {
        let s = NormedSpace::lp(2, 3.0).unwrap();
        let five = LipschitzFunction::constant(5.0);
        let cfg = SolverConfig { coarse_samples: 200, ..Default::default() };
        for x in [v(&[0.0, 0.0]), v(&[0.7, -0.2]), v(&[-1.0, 1.0])] {
            for lam in [3.0, 50.0] {
                assert_eq!(regularize_quadratic(&five, lam, &x, &s, &cfg).unwrap().value, 5.0);
                assert_eq!(regularize_power(&five, 4.0, lam, &x, &s, &cfg).unwrap().value, 5.0);
                assert_eq!(inf_convolve(&five, 2.0, lam, &x, &s, &cfg).unwrap().value, 5.0);
            }
        }
    }

    #[test]
    fn power_two_matches_quadratic() {
        let s = NormedSpace::lp(2, 4.0).unwrap();
        let cfg = SolverConfig { coarse_samples: 300, ..Default::default() };
        let region = Ball::centered(2, 1.0).unwrap();
        for f in make_corpus(&s, 1) {
            for x in grid_points(&s, &region, 7).unwrap() {
                let a = regularize_quadratic(&f, 16.0, &x, &s, &cfg).unwrap().value;
                let b = regularize_power(&f, 2.0, 16.0, &x, &s, &cfg).unwrap().value;
                assert!((a - b).abs() <= 2.0 * cfg.tolerance, "{} at {x}: {a} vs {b}", f.label());
            }
        }
    }

    #[test]
    fn power_four_identity_within_rate() {
        let s = NormedSpace::lp(1, 2.0).unwrap();
        let f = linear_functional(&s, &v(&[1.0])).unwrap();
        let cfg = SolverConfig::default();
        let bound = (1.0f64 / 16.0).powf(1.0 / 3.0);
        let mut worst: f64 = 0.0;
        for i in 0..=40 {
            let x = -1.0 + i as f64 / 20.0;
            let r = regularize_power(&f, 4.0, 16.0, &v(&[x]), &s, &cfg).unwrap();
            // Oracle: dense 1D scan of the same objective.
            let obj = |y: f64| y + 16.0 * (8.0 * x.powi(4) + 8.0 * y.powi(4) - (x + y).powi(4));
            let oracle = (0..=200_000)
                .map(|k| -4.0 + 8.0 * k as f64 / 200_000.0)
                .map(obj)
                .fold(f64::INFINITY, f64::min);
            assert!(r.value <= oracle + 1e-9);
            assert!(r.value >= oracle - 1e-4, "{x}: {} vs {oracle}", r.value);
            worst = worst.max(x - r.value);
        }
        assert!(worst <= bound, "{worst} > {bound}");
        assert!(worst > 0.0);
    }

    #[test]
    fn power_regularizer_rejects_small_p() {
        let (s, f) = abs1();
        let cfg = SolverConfig::default();
        assert!(regularize_power(&f, 1.5, 9.0, &v(&[0.0]), &s, &cfg).is_err());
        assert!(inf_convolve(&f, 0.5, 9.0, &v(&[0.0]), &s, &cfg).is_err());
    }

    #[test]
    fn first_power_inf_convolution_is_identity() {
        let s = NormedSpace::lp(2, 2.0).unwrap();
        let cfg = SolverConfig { coarse_samples: 300, ..Default::default() };
        for f in make_corpus(&s, 2) {
            for x in [v(&[0.3, -0.4]), v(&[0.0, 0.9]), v(&[-0.5, -0.5])] {
                let r = inf_convolve(&f, 1.0, 1.5, &x, &s, &cfg).unwrap();
                assert!((r.value - f.eval(&x)).abs() <= 1e-12, "{}", f.label());
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let (s, f) = abs1();
        let cfg = SolverConfig::default();
        let pair = decompose(&f, 9.0, &s, &cfg).unwrap();
        assert_eq!(pair.c(&v(&[0.0])).unwrap(), 0.0);
        for x in [-0.8, 0.1, 0.45] {
            let q = regularize_quadratic(&f, 9.0, &v(&[x]), &s, &cfg).unwrap().value;
            assert!((pair.value(&v(&[x])).unwrap() - q).abs() <= 2e-6);
        }
        let zero = LipschitzFunction::constant(0.0);
        let pair = decompose(&zero, 4.0, &s, &cfg).unwrap();
        for x in [-0.7, 0.0, 0.3] {
            let d = pair.d(&v(&[x])).unwrap();
            assert!((d - 8.0 * x * x).abs() < 1e-9, "{x}: {d}");
            assert!(pair.value(&v(&[x])).unwrap().abs() < 1e-9);
        }
        assert!(decompose(&zero, 0.0, &s, &cfg).is_err());
    }

    #[test]
    fn decomposition_halves_are_midpoint_convex() {
        let s = NormedSpace::lp(2, 3.0).unwrap();
        let cfg = SolverConfig { coarse_samples: 100, ..Default::default() };
        let f = make_corpus(&s, 0).remove(3);
        let pair = decompose(&f, 6.0, &s, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = sample_ball(&s, 2.0, &mut rng);
            let b = sample_ball(&s, 2.0, &mut rng);
            let m = a.midpoint(&b);
            for g in [
                &(|x: &Vector| pair.c(x)) as &dyn Fn(&Vector) -> Result<f64>,
                &|x: &Vector| pair.d(x),
            ] {
                let lhs = g(&m).unwrap();
                let rhs = 0.5 * (g(&a).unwrap() + g(&b).unwrap());
                assert!(lhs <= rhs + 1e-9 + 2.0 * cfg.tolerance, "{lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn sup_distance_examples() {
        let (s, f) = abs1();
        let region = Ball::centered(1, 2.0).unwrap();
        let same = sup_distance(&f, |x| Ok(f.eval(x)), &s, &region, 81).unwrap();
        assert_eq!(same.value, 0.0);
        let huber = |x: &Vector| {
            let t = x.as_slice()[0].abs();
            Ok(if t >= 0.5 { t - 0.25 } else { t * t })
        };
        let gap = sup_distance(&f, huber, &s, &region, 81).unwrap();
        assert!((gap.value - 0.25).abs() < 1e-15);
        assert!(gap.argmax.as_slice()[0].abs() >= 0.5);
        assert_eq!(gap.spacing, 0.05);

        let linf = NormedSpace::lp(2, f64::INFINITY).unwrap();
        let norm = make_corpus(&linf, 0).remove(0);
        let unit = Ball::centered(2, 1.0).unwrap();
        let r = sup_distance(&norm, |_| Ok(0.0), &linf, &unit, 5).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.grid_points, 25);

        let big = NormedSpace::lp(5, 2.0).unwrap();
        let g = LipschitzFunction::constant(0.0);
        assert!(matches!(
            sup_distance(&g, |_| Ok(0.0), &big, &Ball::centered(5, 1.0).unwrap(), 3),
            Err(Error::GridDimensionTooLarge { .. })
        ));
        assert!(sup_distance(&f, huber, &s, &region, 1).is_err());
    }

    #[test]
    fn rate_bound_values() {
        let one = analytic_constant(1.0);
        assert!((rate_bound(2.0, &one, 100.0, 1.0, false).unwrap() - 0.01).abs() < 1e-15);
        assert!((rate_bound(2.0, &one, 100.0, 2.0, false).unwrap() - 0.04).abs() < 1e-15);
        assert!((rate_bound(4.0, &one, 1000.0, 1.0, false).unwrap() - 0.1).abs() < 1e-12);
        assert!(rate_bound(2.0, &analytic_constant(0.0), 1.0, 1.0, false).is_err());
        let emp = PowerTypeConstant {
            value: 0.5,
            source: ConstantSource::Empirical { pairs: 10 },
        };
        assert!(matches!(
            rate_bound(2.0, &emp, 1.0, 1.0, false),
            Err(Error::EmpiricalConstant { .. })
        ));
        assert!((rate_bound(2.0, &emp, 2.0, 1.0, true).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_reaches_both_faces() {
        let l2 = NormedSpace::lp(1, 2.0).unwrap();
        let pts = grid_points(&l2, &Ball::centered(1, 1.0).unwrap(), 41).unwrap();
        assert_eq!(pts.len(), 41);
        assert_eq!(pts[0].as_slice()[0], -1.0);
        assert_eq!(pts[40].as_slice()[0], 1.0);
        assert_eq!(pts[20].as_slice()[0], 0.0);
    }
}
