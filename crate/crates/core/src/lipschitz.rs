//! Lipschitz functions, point-set distance functions and the test corpus.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::space::{sample_ball, Exponent, NormedSpace};
use crate::vector::Vector;

/// Relative slack allowed above the declared constant before a sampled
/// ratio counts as a violation.
pub const LIPSCHITZ_SLACK: f64 = 1e-9;

/// Radius of the default sampling region for [`verify_lipschitz`].
pub const DEFAULT_VERIFY_RADIUS: f64 = 3.0;

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A black-box function with a declared Lipschitz constant.
#[derive(Clone)]
pub struct LipschitzFunction {
    evaluator: Evaluator,
    lipschitz: f64,
    label: String,
}

impl fmt::Debug for LipschitzFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LipschitzFunction")
            .field("label", &self.label)
            .field("lipschitz", &self.lipschitz)
            .finish_non_exhaustive()
    }
}

impl LipschitzFunction {
    pub fn new<F>(label: impl Into<String>, lipschitz: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(invalid(
                "lipschitz_constant",
                format!("must be positive and finite, got {lipschitz}"),
            ));
        }
        Ok(LipschitzFunction {
            evaluator: Arc::new(f),
            lipschitz,
            label: label.into(),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    #[inline]
    pub fn eval_slice(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        self.eval_slice(x.as_slice())
    }

    /// `k * f` with constant `k * L`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        let inner = Arc::clone(&self.evaluator);
        LipschitzFunction::new(
            format!("{}*{}", k, self.label),
            k.abs() * self.lipschitz,
            move |x| k * inner(x),
        )
    }

    /// Same evaluator under a different declared constant (used to build
    /// deliberately mislabeled functions in tests and to normalize).
    pub fn with_declared_constant(&self, lipschitz: f64) -> Result<Self> {
        let inner = Arc::clone(&self.evaluator);
        LipschitzFunction::new(self.label.clone(), lipschitz, move |x| inner(x))
    }

    /// A constant function; declared constant 1 (any positive value is valid).
    pub fn constant(c: f64) -> Self {
        LipschitzFunction::new(format!("const{c}"), 1.0, move |_| c).expect("valid constant")
    }
}

/// A nonempty finite set of points of uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<Vector>,
}

impl PointSet {
    pub fn new(points: Vec<Vector>) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyPointSet)?;
        let d = first.dim();
        if let Some(bad) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        Ok(PointSet { points })
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Parses one point per line, whitespace-separated reals. Blank lines and
    /// lines starting with `#` are skipped; the first point fixes the dimension.
    pub fn parse(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut dim = None;
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let coords = t
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| Error::Parse {
                        line: i + 1,
                        message: format!("not a number: `{tok}`"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let d = *dim.get_or_insert(coords.len());
            if coords.len() != d {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected {d} coordinates, found {}", coords.len()),
                });
            }
            let v = Vector::new(coords).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            points.push(v);
        }
        PointSet::new(points)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Parse {
            line: 0,
            message: format!("{}: {e}", path.as_ref().display()),
        })?;
        Self::parse(&text)
    }
}

/// `x -> min_{q in s} ||x - q||`, declared 1-Lipschitz.
pub fn distance_function(space: &NormedSpace, set: &PointSet) -> Result<LipschitzFunction> {
    if set.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: set.dim(),
        });
    }
    let space = *space;
    let flat: Vec<f64> = set
        .points()
        .iter()
        .flat_map(|p| p.as_slice().iter().copied())
        .collect();
    let d = space.dim();
    LipschitzFunction::new(format!("dist{}", set.len()), 1.0, move |x| {
        flat.chunks_exact(d)
            .map(|q| space.dist_slices(x, q))
            .fold(f64::INFINITY, f64::min)
    })
}

/// Exponent of the dual norm.
pub fn dual_exponent(e: Exponent) -> Exponent {
    match e {
        Exponent::Infinity => Exponent::Finite(1.0),
        Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
        Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
    }
}

/// `x -> <a, x> / ||a||_*`, which is 1-Lipschitz.
pub fn linear_functional(space: &NormedSpace, a: &Vector) -> Result<LipschitzFunction> {
    let dual = NormedSpace::new(space.dim(), dual_exponent(space.exponent()))?;
    let n = dual.norm(a)?;
    if n == 0.0 {
        return Err(invalid("a", "functional must be nonzero"));
    }
    let a: Vec<f64> = a.as_slice().iter().map(|t| t / n).collect();
    LipschitzFunction::new("linear", 1.0, move |x| {
        x.iter().zip(&a).map(|(u, v)| u * v).sum()
    })
}

/// `x -> max_i (<a_i, x> + b_i)` with constant `max_i ||a_i||_*`.
pub fn max_affine(space: &NormedSpace, pieces: &[(Vector, f64)]) -> Result<LipschitzFunction> {
    if pieces.is_empty() {
        return Err(invalid("pieces", "need at least one affine piece"));
    }
    let dual = NormedSpace::new(space.dim(), dual_exponent(space.exponent()))?;
    let mut lip: f64 = 0.0;
    for (a, _) in pieces {
        lip = lip.max(dual.norm(a)?);
    }
    let pieces: Vec<(Vec<f64>, f64)> = pieces
        .iter()
        .map(|(a, b)| (a.as_slice().to_vec(), *b))
        .collect();
    LipschitzFunction::new("max-affine", lip.max(f64::MIN_POSITIVE), move |x| {
        pieces
            .iter()
            .map(|(a, b)| x.iter().zip(a).map(|(u, v)| u * v).sum::<f64>() + b)
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

/// Triangle wave of slope +-1 and the given period, applied to coordinate 0.
pub fn sawtooth(period: f64) -> Result<LipschitzFunction> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(invalid("period", "must be positive"));
    }
    let half = 0.5 * period;
    LipschitzFunction::new("sawtooth", 1.0, move |x| {
        let r = x[0].rem_euclid(period);
        half - (r - half).abs()
    })
}

/// Affine pieces `(a, b)` of the corpus max-affine function. Every slope
/// has unit dual norm except the half-length `e2` piece (`e1` in 1D).
pub fn corpus_pieces(space: &NormedSpace) -> Vec<(Vector, f64)> {
    let d = space.dim();
    let dual = NormedSpace::new(d, dual_exponent(space.exponent())).expect("valid dual");
    let mut pieces: Vec<(Vector, f64)> = vec![
        (Vector::basis(d, 0), 0.0),
        (Vector::basis(d, 0).scaled(-1.0), 0.2),
    ];
    if d > 1 {
        pieces.push((Vector::basis(d, 1).scaled(0.5), 0.1));
        let diag = Vector::new(vec![1.0; d]).expect("finite");
        let n = dual.norm(&diag).expect("dims match");
        pieces.push((diag.scaled(-1.0 / n), 0.05));
    } else {
        pieces.push((Vector::basis(1, 0).scaled(0.5), 0.1));
    }
    pieces
}

/// The five anchor points of the corpus distance function, drawn uniformly
/// from the ball of radius 1.5.
pub fn corpus_anchors(space: &NormedSpace, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vector> = (0..5).map(|_| sample_ball(space, 1.5, &mut rng)).collect();
    PointSet::new(pts).expect("nonempty")
}

/// Standard 1-Lipschitz corpus: norm, linear functional, max-affine,
/// sawtooth and the distance to five random points.
pub fn make_corpus(space: &NormedSpace, seed: u64) -> Vec<LipschitzFunction> {
    let d = space.dim();
    let sp = *space;
    let norm = LipschitzFunction::new("norm", 1.0, move |x| sp.norm_slice(x)).expect("valid");
    let linear = linear_functional(space, &Vector::basis(d, 0)).expect("e1 is nonzero");
    let max_aff = max_affine(space, &corpus_pieces(space)).expect("valid pieces");
    let saw = sawtooth(0.5).expect("valid period");
    let dist = distance_function(space, &corpus_anchors(space, seed)).expect("dims match");
    let dist = relabel(dist, "distance");
    vec![norm, linear, max_aff, saw, dist]
}

fn relabel(f: LipschitzFunction, label: &str) -> LipschitzFunction {
    LipschitzFunction {
        label: label.to_string(),
        ..f
    }
}

/// Outcome of a sampled Lipschitz check.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzReport {
    pub max_ratio: f64,
    pub witness: (Vector, Vector),
    pub declared: f64,
    pub violation: bool,
}

/// Samples pairs in the ball of radius [`DEFAULT_VERIFY_RADIUS`] and records
/// the largest difference quotient.
pub fn verify_lipschitz(
    f: &LipschitzFunction,
    space: &NormedSpace,
    trials: usize,
    seed: u64,
) -> Result<LipschitzReport> {
    verify_lipschitz_in(f, space, trials, seed, DEFAULT_VERIFY_RADIUS)
}

/// [`verify_lipschitz`] over the ball of the given radius. Half of the pairs
/// are independent points, half are close pairs that probe local slopes.
pub fn verify_lipschitz_in(
    f: &LipschitzFunction,
    space: &NormedSpace,
    trials: usize,
    seed: u64,
    radius: f64,
) -> Result<LipschitzReport> {
    if trials == 0 {
        return Err(invalid("trials", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (-1.0f64, Vector::zeros(space.dim()), Vector::zeros(space.dim()));
    for t in 0..trials {
        let x = sample_ball(space, radius, &mut rng);
        let y = if t % 2 == 0 {
            sample_ball(space, radius, &mut rng)
        } else {
            let scale = radius * 10f64.powi(-(((t / 2) % 4) as i32) - 1);
            &x + &sample_ball(space, scale, &mut rng)
        };
        let dist = space.dist_slices(x.as_slice(), y.as_slice());
        // Below this separation the quotient is dominated by rounding.
        if dist < 1e-5 * radius {
            continue;
        }
        let ratio = (f.eval(&x) - f.eval(&y)).abs() / dist;
        if ratio > best.0 {
            best = (ratio, x, y);
        }
    }
    let (max_ratio, a, b) = best;
    let max_ratio = max_ratio.max(0.0);
    Ok(LipschitzReport {
        max_ratio,
        witness: (a, b),
        declared: f.lipschitz(),
        violation: max_ratio > f.lipschitz() * (1.0 + LIPSCHITZ_SLACK),
    })
}
