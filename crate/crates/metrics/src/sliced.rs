//! Sliced Wasserstein-1 between empirical point clouds.
//!
//! The clouds are projected onto a fixed, seeded set of random unit
//! directions; along each direction the exact 1-D Wasserstein-1 distance is
//! computed from sorted quantile functions, and the results are averaged.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic projection directions: `n` unit vectors in `dim` dimensions,
/// sampled as normalized Gaussians from a ChaCha stream seeded with `seed`.
pub fn directions(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        // Box-Muller keeps us independent of distribution crates
        let mut v = Vec::with_capacity(dim);
        while v.len() < dim {
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen_range(0.0..1.0);
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = 2.0 * std::f64::consts::PI * u2;
            v.push(r * theta.cos());
            if v.len() < dim {
                v.push(r * theta.sin());
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        out.push(v.into_iter().map(|x| x / norm).collect());
    }
    out
}

/// Exact 1-D Wasserstein-1 between two empirical distributions with uniform
/// weights (sizes may differ): the integral of the quantile-function gap.
pub fn w1_1d(xs: &[f64], ys: &[f64]) -> f64 {
    assert!(!xs.is_empty() && !ys.is_empty());
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).unwrap());
    b.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (n, m) = (a.len(), b.len());
    let mut i = 0usize;
    let mut j = 0usize;
    let mut t = 0.0f64;
    let mut total = 0.0f64;
    while i < n && j < m {
        let ta = (i + 1) as f64 / n as f64;
        let tb = (j + 1) as f64 / m as f64;
        let next = ta.min(tb);
        total += (next - t) * (a[i] - b[j]).abs();
        t = next;
        if ta <= tb {
            i += 1;
        }
        if tb <= ta {
            j += 1;
        }
    }
    total
}

/// Average the per-direction 1-D distances of the projected clouds.
pub fn sliced_w1(a: &[Vec<f64>], b: &[Vec<f64>], dirs: &[Vec<f64>]) -> f64 {
    if a.is_empty() || b.is_empty() || dirs.is_empty() {
        return 0.0;
    }
    let project = |cloud: &[Vec<f64>], u: &[f64]| -> Vec<f64> {
        cloud.iter().map(|p| p.iter().zip(u).map(|(x, c)| x * c).sum()).collect()
    };
    let mut total = 0.0;
    for u in dirs {
        total += w1_1d(&project(a, u), &project(b, u));
    }
    total / dirs.len() as f64
}
