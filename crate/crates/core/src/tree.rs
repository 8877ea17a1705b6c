//! Dyadic trees in `l_p^D`, the tree-family counterexample and the
//! convexity branch walk.
//!
//! A dyadic tree of depth `n` has nodes `x_alpha` for every sign sequence
//! `alpha` of length `0..=n`, and every interior node is the exact midpoint
//! of its two children. Sign trees realize this in a block of coordinates:
//! `x_alpha` carries `alpha` in the first `|alpha|` block coordinates and
//! zeros after, so in `l_inf` distinct nodes are at distance at least 1.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::lipschitz::LipschitzFunction;
use crate::space::{Exponent, NormedSpace};
use crate::vector::Vector;

/// Largest depth accepted by any tree.
pub const MAX_DEPTH: usize = 60;

/// Largest `nodes * dim` that will be materialized.
pub const MAX_EXPLICIT_COORDS: usize = 1 << 24;

/// A finite sign sequence `alpha`, written as a string of `+`/`-`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SignIndex(Vec<i8>);

impl SignIndex {
    pub fn root() -> Self {
        SignIndex(Vec::new())
    }

    /// Panics unless every entry is `1` or `-1`.
    pub fn new(signs: Vec<i8>) -> Self {
        assert!(signs.iter().all(|&s| s == 1 || s == -1), "signs must be +-1");
        SignIndex(signs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    pub fn child(&self, sign: i8) -> SignIndex {
        let mut v = self.0.clone();
        v.push(if sign >= 0 { 1 } else { -1 });
        SignIndex(v)
    }

    /// Position in level order, `+` before `-`.
    pub fn position(&self) -> usize {
        let k = self.0.len();
        let rank = self
            .0
            .iter()
            .fold(0usize, |r, &s| (r << 1) | usize::from(s < 0));
        (1usize << k) - 1 + rank
    }

    /// Inverse of [`SignIndex::position`].
    pub fn from_position(pos: usize) -> SignIndex {
        let level = (usize::BITS - 1 - (pos + 1).leading_zeros()) as usize;
        let rank = pos + 1 - (1usize << level);
        let signs = (0..level)
            .map(|i| if rank >> (level - 1 - i) & 1 == 1 { -1 } else { 1 })
            .collect();
        SignIndex(signs)
    }
}

impl fmt::Display for SignIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            f.write_str(if s > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for SignIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                other => Err(invalid("sign index", format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<i8>>>()
            .map(SignIndex)
    }
}

/// Coordinates of a sign tree: fixed `anchor` entries shared by every node
/// plus `scale * alpha` laid out from `block_start`.
#[derive(Debug, Clone, PartialEq)]
struct SignLayout {
    anchor: Vec<(usize, f64)>,
    block_start: usize,
    scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Sign(SignLayout),
    /// Level-order coordinates, `dim` per node.
    Explicit(Vec<f64>),
}

/// A dyadic tree with levels `0..=depth` in `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicTree {
    depth: usize,
    dim: usize,
    theta: f64,
    repr: Repr,
}

fn node_count(depth: usize) -> usize {
    (1usize << (depth + 1)) - 1
}

impl DyadicTree {
    /// Tree from level-order coordinates (`+` child before `-`).
    pub fn from_nodes(depth: usize, dim: usize, theta: f64, coords: Vec<f64>) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(invalid("depth", format!("at most {MAX_DEPTH}")));
        }
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(invalid("theta", "must be positive"));
        }
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        let want = node_count(depth).checked_mul(dim).unwrap_or(usize::MAX);
        if coords.len() != want {
            return Err(invalid(
                "nodes",
                format!("expected {want} coordinates, got {}", coords.len()),
            ));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate {
                index: i,
                value: coords[i],
            });
        }
        Ok(DyadicTree {
            depth,
            dim,
            theta,
            repr: Repr::Explicit(coords),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Number of nodes, `2^(depth+1) - 1`.
    pub fn len(&self) -> usize {
        node_count(self.depth)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_explicit(&self) -> bool {
        matches!(self.repr, Repr::Explicit(_))
    }

    pub fn can_materialize(&self) -> bool {
        self.len().saturating_mul(self.dim) <= MAX_EXPLICIT_COORDS
    }

    /// Multiplies every coordinate (and the separation) by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(invalid("scale", "must be positive"));
        }
        let repr = match &self.repr {
            Repr::Sign(l) => Repr::Sign(SignLayout {
                anchor: l.anchor.iter().map(|&(i, v)| (i, v * s)).collect(),
                block_start: l.block_start,
                scale: l.scale * s,
            }),
            Repr::Explicit(c) => Repr::Explicit(c.iter().map(|v| v * s).collect()),
        };
        Ok(DyadicTree {
            theta: self.theta * s,
            repr,
            ..*self
        })
    }

    fn check_index(&self, alpha: &SignIndex) -> Result<()> {
        if alpha.len() > self.depth {
            return Err(invalid(
                "sign index",
                format!("length {} exceeds depth {}", alpha.len(), self.depth),
            ));
        }
        Ok(())
    }

    fn write_node(&self, alpha: &[i8], out: &mut [f64]) {
        match &self.repr {
            Repr::Sign(l) => {
                out.iter_mut().for_each(|c| *c = 0.0);
                for &(i, v) in &l.anchor {
                    out[i] = v;
                }
                for (j, &s) in alpha.iter().enumerate() {
                    out[l.block_start + j] = l.scale * s as f64;
                }
            }
            Repr::Explicit(c) => {
                let pos = SignIndex(alpha.to_vec()).position();
                out.copy_from_slice(&c[pos * self.dim..(pos + 1) * self.dim]);
            }
        }
    }

    /// Coordinates of `x_alpha`.
    pub fn node(&self, alpha: &SignIndex) -> Result<Vector> {
        self.check_index(alpha)?;
        let mut out = vec![0.0; self.dim];
        self.write_node(alpha.signs(), &mut out);
        Ok(Vector::from_vec_unchecked(out))
    }

    /// Level-order coordinates of every node.
    pub fn materialize(&self) -> Result<Vec<f64>> {
        if let Repr::Explicit(c) = &self.repr {
            return Ok(c.clone());
        }
        if !self.can_materialize() {
            return Err(invalid(
                "depth",
                format!("{} nodes in dimension {} is too many to list", self.len(), self.dim),
            ));
        }
        let mut out = vec![0.0; self.len() * self.dim];
        for pos in 0..self.len() {
            let alpha = SignIndex::from_position(pos);
            self.write_node(alpha.signs(), &mut out[pos * self.dim..(pos + 1) * self.dim]);
        }
        Ok(out)
    }

    /// Explicit copy with `x_alpha` replaced.
    pub fn with_node(&self, alpha: &SignIndex, coords: &Vector) -> Result<DyadicTree> {
        self.check_index(alpha)?;
        if coords.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: coords.dim(),
            });
        }
        let mut all = self.materialize()?;
        let pos = alpha.position();
        all[pos * self.dim..(pos + 1) * self.dim].copy_from_slice(coords.as_slice());
        DyadicTree::from_nodes(self.depth, self.dim, self.theta, all)
    }

    /// Plain-text form: a `depth D theta` header, then one line per node
    /// with its sign string (empty for the root) and `D` coordinates.
    pub fn to_text(&self) -> Result<String> {
        let all = self.materialize()?;
        let mut s = format!("{} {} {}\n", self.depth, self.dim, self.theta);
        for (pos, row) in all.chunks_exact(self.dim).enumerate() {
            s.push_str(&SignIndex::from_position(pos).to_string());
            for c in row {
                s.push(' ');
                s.push_str(&c.to_string());
            }
            s.push('\n');
        }
        Ok(s)
    }

    /// Parses [`DyadicTree::to_text`] output; nodes may come in any order.
    pub fn parse(text: &str) -> Result<DyadicTree> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hl, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let perr = |line: usize, message: String| Error::Parse {
            line: line + 1,
            message,
        };
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 {
            return Err(perr(hl, "header must be `depth D theta`".into()));
        }
        let depth: usize = h[0].parse().map_err(|e| perr(hl, format!("depth: {e}")))?;
        let dim: usize = h[1].parse().map_err(|e| perr(hl, format!("dimension: {e}")))?;
        let theta: f64 = h[2].parse().map_err(|e| perr(hl, format!("theta: {e}")))?;
        if depth > MAX_DEPTH || node_count(depth).saturating_mul(dim) > MAX_EXPLICIT_COORDS {
            return Err(perr(hl, "tree too large".into()));
        }
        let n = node_count(depth);
        let mut coords = vec![0.0; n * dim];
        let mut seen = vec![false; n];
        for (ln, line) in lines {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let (alpha, nums) = if tokens.len() == dim {
                (SignIndex::root(), &tokens[..])
            } else if tokens.len() == dim + 1 {
                (tokens[0].parse::<SignIndex>().map_err(|e| perr(ln, e.to_string()))?, &tokens[1..])
            } else {
                return Err(perr(ln, format!("expected {dim} coordinates")));
            };
            if alpha.len() > depth {
                return Err(perr(ln, format!("node {alpha} deeper than {depth}")));
            }
            let pos = alpha.position();
            if seen[pos] {
                return Err(perr(ln, format!("node {alpha:?} listed twice")));
            }
            seen[pos] = true;
            for (k, t) in nums.iter().enumerate() {
                coords[pos * dim + k] = t.parse().map_err(|e| perr(ln, format!("{t}: {e}")))?;
            }
        }
        if let Some(pos) = seen.iter().position(|s| !s) {
            return Err(perr(
                text.lines().count(),
                format!("node `{}` missing", SignIndex::from_position(pos)),
            ));
        }
        DyadicTree::from_nodes(depth, dim, theta, coords)
    }
}

/// Sign tree of the given depth in coordinates
/// `block_start..block_start + depth` of `R^ambient_dim`.
pub fn build_sign_tree(depth: usize, block_start: usize, ambient_dim: usize) -> Result<DyadicTree> {
    if depth > MAX_DEPTH {
        return Err(invalid("depth", format!("at most {MAX_DEPTH}")));
    }
    if ambient_dim == 0 || block_start + depth > ambient_dim {
        return Err(Error::BlockOverflow {
            start: block_start,
            end: block_start + depth,
            ambient: ambient_dim,
        });
    }
    Ok(DyadicTree {
        depth,
        dim: ambient_dim,
        theta: 1.0,
        repr: Repr::Sign(SignLayout {
            anchor: Vec::new(),
            block_start,
            scale: 1.0,
        }),
    })
}

/// Outcome of [`validate_tree`].
#[derive(Debug, Clone, PartialEq)]
pub struct TreeReport {
    pub nodes: usize,
    pub midpoint_exact: bool,
    /// First interior node (level order) breaking the midpoint law, with
    /// the largest coordinate deviation.
    pub midpoint_violation: Option<(SignIndex, f64)>,
    /// Exact minimum distance between distinct nodes (`inf` for one node).
    pub min_separation: f64,
    pub closest_pair: Option<(SignIndex, SignIndex)>,
    /// `min_separation - theta`.
    pub separation_slack: f64,
    pub max_norm: f64,
}

impl TreeReport {
    pub fn is_valid(&self) -> bool {
        self.midpoint_exact && self.separation_slack >= 0.0 && self.max_norm <= 1.0
    }
}

/// Exact closest pair by branch and bound over coordinates.
///
/// Any norm dominates each coordinate difference, so a pair of groups whose
/// values differ by at least the incumbent in one coordinate cannot contain
/// a closer pair. Groups of equal coordinate values are refined on the next
/// coordinate; small or exhausted groups are compared directly.
struct ClosestPair<'a> {
    pts: &'a [f64],
    dim: usize,
    space: &'a NormedSpace,
    best: f64,
    pair: Option<(usize, usize)>,
}

impl ClosestPair<'_> {
    fn row(&self, i: usize) -> &[f64] {
        &self.pts[i * self.dim..(i + 1) * self.dim]
    }

    fn offer(&mut self, i: usize, j: usize) {
        let d = self.space.dist_slices(self.row(i), self.row(j));
        let key = (i.min(j), i.max(j));
        if d < self.best || (d == self.best && self.pair.is_some_and(|p| key < p)) {
            self.best = d;
            self.pair = Some(key);
        }
    }

    fn groups(&self, idx: &mut [usize], k: usize) -> Vec<(f64, std::ops::Range<usize>)> {
        let pts = self.pts;
        let dim = self.dim;
        idx.sort_by(|&a, &b| pts[a * dim + k].total_cmp(&pts[b * dim + k]).then(a.cmp(&b)));
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=idx.len() {
            if i == idx.len() || pts[idx[i] * dim + k] != pts[idx[start] * dim + k] {
                out.push((pts[idx[start] * dim + k], start..i));
                start = i;
            }
        }
        out
    }

    fn within(&mut self, idx: &mut [usize], k: usize) {
        if idx.len() < 2 {
            return;
        }
        if idx.len() <= 8 || k == self.dim {
            for a in 0..idx.len() {
                for b in a + 1..idx.len() {
                    self.offer(idx[a], idx[b]);
                }
            }
            return;
        }
        let groups = self.groups(idx, k);
        for g in 0..groups.len() {
            let (v, r) = groups[g].clone();
            let mut own = idx[r.clone()].to_vec();
            self.within(&mut own, k + 1);
            for (w, r2) in groups.iter().skip(g + 1) {
                if w - v >= self.best {
                    break;
                }
                let mut a = idx[r.clone()].to_vec();
                let mut b = idx[r2.clone()].to_vec();
                self.across(&mut a, &mut b, k + 1);
            }
        }
    }

    fn across(&mut self, a: &mut [usize], b: &mut [usize], k: usize) {
        if a.is_empty() || b.is_empty() {
            return;
        }
        if a.len() * b.len() <= 64 || k == self.dim {
            for &i in a.iter() {
                for &j in b.iter() {
                    self.offer(i, j);
                }
            }
            return;
        }
        let ga = self.groups(a, k);
        let gb = self.groups(b, k);
        for (va, ra) in &ga {
            for (vb, rb) in &gb {
                if (va - vb).abs() >= self.best {
                    continue;
                }
                let mut sa = a[ra.clone()].to_vec();
                let mut sb = b[rb.clone()].to_vec();
                self.across(&mut sa, &mut sb, k + 1);
            }
        }
    }
}

fn check_space(space: &NormedSpace, dim: usize) -> Result<()> {
    if space.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: dim,
        });
    }
    Ok(())
}

/// Checks the midpoint law bit for bit, the separation `>= theta` over all
/// pairs of distinct nodes, and membership in the unit ball.
pub fn validate_tree(tree: &DyadicTree, space: &NormedSpace) -> Result<TreeReport> {
    check_space(space, tree.dim)?;
    let pts = tree.materialize()?;
    let d = tree.dim;
    let n = tree.len();
    let row = |i: usize| &pts[i * d..(i + 1) * d];

    let mut midpoint_violation = None;
    for i in 0..n {
        let (l, r) = (2 * i + 1, 2 * i + 2);
        if r >= n {
            break;
        }
        let dev = (0..d)
            .map(|k| (row(i)[k] - (0.5 * row(l)[k] + 0.5 * row(r)[k])).abs())
            .fold(0.0, f64::max);
        let exact = (0..d).all(|k| row(i)[k] == 0.5 * row(l)[k] + 0.5 * row(r)[k]);
        if !exact {
            midpoint_violation = Some((SignIndex::from_position(i), dev));
            break;
        }
    }

    let max_norm = (0..n).map(|i| space.norm_slice(row(i))).fold(0.0, f64::max);

    let mut cp = ClosestPair {
        pts: &pts,
        dim: d,
        space,
        best: f64::INFINITY,
        pair: None,
    };
    // Parent-child pairs give a tight starting incumbent.
    for i in 1..n {
        cp.offer(i, (i - 1) / 2);
    }
    let mut idx: Vec<usize> = (0..n).collect();
    cp.within(&mut idx, 0);

    Ok(TreeReport {
        nodes: n,
        midpoint_exact: midpoint_violation.is_none(),
        midpoint_violation,
        min_separation: cp.best,
        closest_pair: cp
            .pair
            .map(|(a, b)| (SignIndex::from_position(a), SignIndex::from_position(b))),
        separation_slack: cp.best - tree.theta,
        max_norm,
    })
}

/// How the mutual distance of a family was established.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyCheck {
    /// Exact closest cross pair over all node pairs.
    Enumerated,
    /// Members too large to list: every node of member `i` has the value
    /// `rho_i` in a coordinate where every other member is zero.
    Structural,
}

/// Sign trees in disjoint coordinate blocks of `l_inf^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeFamily {
    pub trees: Vec<DyadicTree>,
    pub rho: Vec<f64>,
    pub mutual_distance: f64,
    pub check: FamilyCheck,
}

/// Member `i` is the subtree below the first child of a depth
/// `depths[i] + 1` sign tree placed in its own block.
pub fn build_tree_family(depths: &[usize], space: &NormedSpace) -> Result<TreeFamily> {
    if space.exponent() != Exponent::Infinity {
        return Err(invalid("space", "tree families live in l_inf"));
    }
    if depths.is_empty() {
        return Err(invalid("depths", "need at least one member"));
    }
    let dim = space.dim();
    let needed: usize = depths.iter().map(|n| n + 1).sum();
    if needed > dim {
        return Err(Error::BlockOverflow {
            start: 0,
            end: needed,
            ambient: dim,
        });
    }
    let mut trees = Vec::with_capacity(depths.len());
    let mut start = 0;
    for &n in depths {
        if n > MAX_DEPTH {
            return Err(invalid("depth", format!("at most {MAX_DEPTH}")));
        }
        trees.push(DyadicTree {
            depth: n,
            dim,
            theta: 1.0,
            repr: Repr::Sign(SignLayout {
                anchor: vec![(start, 1.0)],
                block_start: start + 1,
                scale: 1.0,
            }),
        });
        start += n + 1;
    }
    let rho = vec![1.0; trees.len()];
    let listable = trees
        .iter()
        .try_fold(0usize, |acc, t| acc.checked_add(t.len().checked_mul(dim)?))
        .is_some_and(|total| total <= MAX_EXPLICIT_COORDS);
    let (mutual_distance, check) = if trees.len() < 2 {
        (f64::INFINITY, FamilyCheck::Enumerated)
    } else if listable {
        (enumerate_mutual(&trees, space)?, FamilyCheck::Enumerated)
    } else {
        // The roots realize the bound exactly.
        let a = trees[0].node(&SignIndex::root())?;
        let b = trees[1].node(&SignIndex::root())?;
        (space.dist(&a, &b)?, FamilyCheck::Structural)
    };
    Ok(TreeFamily {
        trees,
        rho,
        mutual_distance,
        check,
    })
}

fn enumerate_mutual(trees: &[DyadicTree], space: &NormedSpace) -> Result<f64> {
    let lists: Vec<Vec<f64>> = trees.iter().map(|t| t.materialize()).collect::<Result<_>>()?;
    let d = space.dim();
    let mut best = f64::INFINITY;
    for p in 0..lists.len() {
        for q in p + 1..lists.len() {
            let mut pts = lists[p].clone();
            pts.extend_from_slice(&lists[q]);
            let np = lists[p].len() / d;
            let nq = lists[q].len() / d;
            let mut cp = ClosestPair {
                pts: &pts,
                dim: d,
                space,
                best,
                pair: None,
            };
            cp.offer(0, np);
            let mut a: Vec<usize> = (0..np).collect();
            let mut b: Vec<usize> = (np..np + nq).collect();
            cp.across(&mut a, &mut b, 0);
            best = cp.best;
        }
    }
    Ok(best)
}

/// Distance from `z` to the even-level nodes of one member.
fn member_distance(tree: &DyadicTree, exponent: Exponent, z: &[f64], scratch: &mut Vec<f64>) -> f64 {
    match &tree.repr {
        Repr::Sign(l) => sign_member_distance(l, tree.depth, exponent, z, scratch),
        Repr::Explicit(c) => {
            let d = tree.dim;
            let space = NormedSpace::new(d, exponent).expect("valid exponent");
            let mut best = f64::INFINITY;
            for level in (0..=tree.depth).step_by(2) {
                for pos in (1usize << level) - 1..(1usize << (level + 1)) - 1 {
                    best = best.min(space.dist_slices(z, &c[pos * d..(pos + 1) * d]));
                }
            }
            best
        }
    }
}

/// Closed form: the minimum over sign choices decouples per coordinate, so
/// only the level `k` remains to be minimized.
fn sign_member_distance(
    l: &SignLayout,
    depth: usize,
    exponent: Exponent,
    z: &[f64],
    scratch: &mut Vec<f64>,
) -> f64 {
    let block = l.block_start..l.block_start + depth;
    let (p, inf) = match exponent {
        Exponent::Infinity => (1.0, true),
        Exponent::Finite(p) => (p, false),
    };
    let term = |t: f64| if inf { t.abs() } else { t.abs().powf(p) };
    let join = |a: f64, b: f64| if inf { a.max(b) } else { a + b };

    let mut base = 0.0;
    for (i, &zi) in z.iter().enumerate() {
        if block.contains(&i) {
            continue;
        }
        let target = l.anchor.iter().find(|(a, _)| *a == i).map_or(0.0, |&(_, v)| v);
        base = join(base, term(zi - target));
    }
    // scratch[k] = cost of the block coordinates at or after k left at zero.
    scratch.clear();
    scratch.resize(depth + 1, 0.0);
    for j in (0..depth).rev() {
        scratch[j] = join(scratch[j + 1], term(z[l.block_start + j]));
    }
    let mut prefix = 0.0;
    let mut best = f64::INFINITY;
    for k in 0..=depth {
        if k % 2 == 0 {
            best = best.min(join(prefix, scratch[k]));
        }
        if k < depth {
            let w = z[l.block_start + k].abs();
            prefix = join(prefix, term(w - l.scale));
        }
    }
    let total = join(base, best);
    if inf {
        total
    } else {
        total.powf(1.0 / p)
    }
}

/// `f = dist(., S)` where `S` holds the even-level nodes of every member
/// (levels counted from each member's own root).
pub fn counterexample_function(family: &TreeFamily, space: &NormedSpace) -> Result<LipschitzFunction> {
    for t in &family.trees {
        check_space(space, t.dim)?;
    }
    let trees = family.trees.clone();
    let exponent = space.exponent();
    LipschitzFunction::new("tree-distance", 1.0, move |z| {
        let mut scratch = Vec::new();
        trees
            .iter()
            .map(|t| member_distance(t, exponent, z, &mut scratch))
            .fold(f64::INFINITY, f64::min)
    })
}

/// One visited node of a branch walk.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkLevel {
    pub node: SignIndex,
    pub c_value: f64,
    pub d_value: f64,
    pub f_value: f64,
    /// `|f - (c - d)|` at the node.
    pub hypothesis_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WalkReport {
    pub branch: SignIndex,
    /// Root first, one entry per level.
    pub levels: Vec<WalkLevel>,
    /// `c` gained over each double step.
    pub c_increments: Vec<f64>,
    pub total_c_growth: f64,
    pub guaranteed_growth: f64,
    pub hypothesis_held: bool,
    /// Largest hypothesis gap along the branch.
    pub max_gap: f64,
}

impl WalkReport {
    /// Growth meets the guarantee whenever the hypothesis held.
    pub fn is_sound(&self) -> bool {
        !self.hypothesis_held || self.total_c_growth >= self.guaranteed_growth - 1e-9
    }
}

fn checked(name: &str, node: &SignIndex, v: Result<f64>) -> Result<f64> {
    let v = v?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::EvaluatorFailure {
            node: format!("{name} at `{node}`"),
            value: v,
        })
    }
}

/// Walks down `tree` two levels at a time: first to the child with the
/// larger `d`, then to the child with the larger `c` (ties go to `+`).
pub fn adversarial_branch_walk<C, D>(
    c: C,
    d: D,
    tree: &DyadicTree,
    f: &LipschitzFunction,
    delta: f64,
) -> Result<WalkReport>
where
    C: Fn(&Vector) -> Result<f64>,
    D: Fn(&Vector) -> Result<f64>,
{
    if tree.depth % 2 != 0 {
        return Err(invalid("depth", "the walk needs an even depth"));
    }
    if !(delta >= 0.0) {
        return Err(invalid("delta", "must be non-negative"));
    }
    let visit = |alpha: &SignIndex| -> Result<WalkLevel> {
        let x = tree.node(alpha)?;
        let cv = checked("c", alpha, c(&x))?;
        let dv = checked("d", alpha, d(&x))?;
        let fv = checked("f", alpha, Ok(f.eval(&x)))?;
        Ok(WalkLevel {
            node: alpha.clone(),
            c_value: cv,
            d_value: dv,
            f_value: fv,
            hypothesis_gap: (fv - (cv - dv)).abs(),
        })
    };
    let mut alpha = SignIndex::root();
    let mut levels = vec![visit(&alpha)?];
    let mut c_increments = Vec::with_capacity(tree.depth / 2);
    for step in 0..tree.depth {
        let plus = visit(&alpha.child(1))?;
        let minus = visit(&alpha.child(-1))?;
        let pick_minus = if step % 2 == 0 {
            minus.d_value > plus.d_value
        } else {
            minus.c_value > plus.c_value
        };
        let next = if pick_minus { minus } else { plus };
        alpha = next.node.clone();
        levels.push(next);
        if step % 2 == 1 {
            let k = levels.len();
            c_increments.push(levels[k - 1].c_value - levels[k - 3].c_value);
        }
    }
    let max_gap = levels.iter().map(|l| l.hypothesis_gap).fold(0.0, f64::max);
    let total_c_growth = levels.last().expect("root").c_value - levels[0].c_value;
    Ok(WalkReport {
        branch: alpha,
        levels,
        c_increments,
        total_c_growth,
        guaranteed_growth: (tree.theta / 2.0 - 2.0 * delta) * (tree.depth / 2) as f64,
        hypothesis_held: max_gap <= delta,
        max_gap,
    })
}

/// `max(0, theta/4 - 2M/n)`: the error any convex pair with `|c| <= M` on
/// the unit ball must make somewhere on a depth-`n` tree.
pub fn error_lower_bound(m: f64, theta: f64, depth: usize) -> Result<f64> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(invalid("M", "must be finite and non-negative"));
    }
    if depth < 2 || depth % 2 != 0 {
        return Err(invalid("depth", "must be even and at least 2"));
    }
    if !(theta > 0.0) {
        return Err(invalid("theta", "must be positive"));
    }
    Ok((theta / 4.0 - 2.0 * m / depth as f64).max(0.0))
}
