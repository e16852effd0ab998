//! Shared test oracles: dense grid search with golden-section refinement,
//! independent of the solver code paths they validate.

#![allow(dead_code)]

use ndarray::Array1;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of a unimodal extended-real function.
pub fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..300 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// 1-D minimizer by dense grid over `[lo, hi]` followed by golden-section
/// refinement around the best cell.
pub fn grid_minimize_1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let cells = 2000;
    let mut best_t = lo;
    let mut best_v = f64::INFINITY;
    for i in 0..=cells {
        let t = lo + (hi - lo) * i as f64 / cells as f64;
        let v = f(t);
        if v < best_v {
            best_v = v;
            best_t = t;
        }
    }
    let cell = (hi - lo) / cells as f64;
    golden(
        &f,
        (best_t - 2.0 * cell).max(lo),
        (best_t + 2.0 * cell).min(hi),
        1e-12,
    )
}

/// N-dimensional minimizer by per-coordinate grid + golden refinement,
/// cycled until stationary. Exact for coordinate-separable objectives and
/// convergent for smooth convex couplings.
pub fn grid_minimize(
    f: impl Fn(&Array1<f64>) -> f64,
    lo: f64,
    hi: f64,
    dim: usize,
    sweeps: usize,
) -> Array1<f64> {
    // Coarse full grid for small dims, then coordinate refinement.
    let mut best = Array1::from_elem(dim, 0.5 * (lo + hi));
    let mut best_v = f(&best);
    let per_dim = match dim {
        1 => 2001,
        2 => 201,
        _ => 41,
    };
    let mut idx = vec![0usize; dim];
    let mut x = Array1::zeros(dim);
    'grid: loop {
        for j in 0..dim {
            x[j] = lo + (hi - lo) * idx[j] as f64 / (per_dim - 1) as f64;
        }
        let v = f(&x);
        if v < best_v {
            best_v = v;
            best.assign(&x);
        }
        let mut j = 0;
        loop {
            idx[j] += 1;
            if idx[j] < per_dim {
                break;
            }
            idx[j] = 0;
            j += 1;
            if j == dim {
                break 'grid;
            }
        }
    }
    let cell = (hi - lo) / (per_dim - 1) as f64;
    let mut width = 2.0 * cell;
    for _ in 0..sweeps {
        for j in 0..dim {
            let t = golden(
                |t| {
                    let mut y = best.clone();
                    y[j] = t;
                    f(&y)
                },
                (best[j] - width).max(lo),
                (best[j] + width).min(hi),
                1e-13,
            );
            let mut y = best.clone();
            y[j] = t;
            let v = f(&y);
            if v <= best_v {
                best_v = v;
                best = y;
            }
        }
        width = (width * 0.6).max(1e-11);
    }
    best
}
