//! Closed-form Moreau envelopes `inf_y f(y) + lam |x - y|^2` on l2 for the
//! standard corpus.

use dcapprox::lipschitz::{corpus_anchors, corpus_pieces};
use dcapprox::NormedSpace;

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum::<f64>().sqrt()
}

/// Envelope of the norm as a function of `r = |x|`.
pub fn moreau_norm(r: f64, lam: f64) -> f64 {
    if r >= 1.0 / (2.0 * lam) {
        r - 1.0 / (4.0 * lam)
    } else {
        lam * r * r
    }
}

/// Gauss-Jordan with partial pivoting; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in 0..n {
            if r != c {
                let m = a[r][c] / a[c][c];
                for k in c..n {
                    a[r][k] -= m * a[c][k];
                }
                b[r] -= m * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// By duality the envelope of `max_i (a_i.x + b_i)` is
/// `max_w sum w_i (a_i.x + b_i) - |sum w_i a_i|^2 / (4 lam)` over the
/// simplex. Each support set is solved from its KKT system.
pub fn moreau_max_affine(pieces: &[(Vec<f64>, f64)], x: &[f64], lam: f64) -> f64 {
    let m = pieces.len();
    let c: Vec<f64> = pieces
        .iter()
        .map(|(a, b)| a.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + b)
        .collect();
    let g = |i: usize, j: usize| pieces[i].0.iter().zip(&pieces[j].0).map(|(u, v)| u * v).sum::<f64>();
    let mut best = f64::NEG_INFINITY;
    for mask in 1u32..(1 << m) {
        let s: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let k = s.len();
        let mut a = vec![vec![0.0; k + 1]; k + 1];
        let mut b = vec![0.0; k + 1];
        for (r, &i) in s.iter().enumerate() {
            for (q, &j) in s.iter().enumerate() {
                a[r][q] = g(i, j) / (2.0 * lam);
            }
            a[r][k] = 1.0;
            b[r] = c[i];
        }
        for q in 0..k {
            a[k][q] = 1.0;
        }
        b[k] = 1.0;
        let Some(sol) = solve(a, b) else { continue };
        let w = &sol[..k];
        if w.iter().any(|&t| t < -1e-12) {
            continue;
        }
        let mut v = vec![0.0; x.len()];
        let mut lin = 0.0;
        for (q, &i) in s.iter().enumerate() {
            lin += w[q] * c[i];
            for (vt, at) in v.iter_mut().zip(&pieces[i].0) {
                *vt += w[q] * at;
            }
        }
        best = best.max(lin - v.iter().map(|t| t * t).sum::<f64>() / (4.0 * lam));
    }
    best
}

/// Triangle wave of the given period; minimizes over each linear piece.
pub fn moreau_sawtooth(x0: f64, lam: f64, period: f64) -> f64 {
    let h = period / 2.0;
    let k0 = (x0 / h).floor() as i64;
    let reach = 4 + (1.0 / (lam * h)) as i64;
    let mut best = f64::INFINITY;
    for k in (k0 - reach)..=(k0 + reach) {
        let lo = k as f64 * h;
        let (f0, s) = if k.rem_euclid(2) == 0 { (0.0, 1.0) } else { (h, -1.0) };
        let y = (x0 - s / (2.0 * lam)).clamp(lo, lo + h);
        best = best.min(f0 + s * (y - lo) + lam * (y - x0) * (y - x0));
    }
    best
}

/// Envelope of the corpus member `label` built for `space` (which must be l2).
pub fn corpus_moreau(space: &NormedSpace, seed: u64, label: &str, x: &[f64], lam: f64) -> f64 {
    match label {
        "norm" => moreau_norm(euclid(x), lam),
        "linear" => x[0] - 1.0 / (4.0 * lam),
        "max-affine" => {
            let p: Vec<(Vec<f64>, f64)> = corpus_pieces(space)
                .into_iter()
                .map(|(a, b)| (a.into_inner(), b))
                .collect();
            moreau_max_affine(&p, x, lam)
        }
        "sawtooth" => moreau_sawtooth(x[0], lam, 0.5),
        "distance" => corpus_anchors(space, seed)
            .points()
            .iter()
            .map(|p| {
                let d: Vec<f64> = x.iter().zip(p.as_slice()).map(|(a, b)| a - b).collect();
                moreau_norm(euclid(&d), lam)
            })
            .fold(f64::INFINITY, f64::min),
        other => panic!("no oracle for `{other}`"),
    }
}
