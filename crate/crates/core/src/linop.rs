//! Linear operators with forward/adjoint application and spectral-norm
//! estimation.
//!
//! Every solver in this crate touches its constraint operators only through
//! [`LinearMap`], so the per-iteration operator-application counts quoted in
//! the method descriptions can be audited via [`LinearMap::op_counts`].

use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array1, Array2};
use once_cell::sync::OnceCell;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_dim, Error, Result};

/// Structural kind of a [`LinearMap`].
#[derive(Debug, Clone)]
pub enum MapKind {
    /// The identity on `R^dim`.
    Identity,
    /// `x -> alpha * x`.
    ScaledIdentity(f64),
    /// Row-major dense matrix, `out_dim x in_dim`.
    Dense(Array2<f64>),
    /// `x -> <a, x>` as a map into `R^1`.
    RankOne(Array1<f64>),
}

/// Number of forward and adjoint applications performed so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounts {
    pub forward: u64,
    pub adjoint: u64,
}

impl OpCounts {
    pub fn since(self, earlier: OpCounts) -> OpCounts {
        OpCounts {
            forward: self.forward - earlier.forward,
            adjoint: self.adjoint - earlier.adjoint,
        }
    }
}

/// An immutable linear operator `R^in_dim -> R^out_dim`.
///
/// The operator norm is estimated once (power iteration on the normal
/// operator) and cached; values are safe to share across concurrent solver
/// runs once the cache is populated.
#[derive(Debug)]
pub struct LinearMap {
    in_dim: usize,
    out_dim: usize,
    kind: MapKind,
    cached_norm: OnceCell<f64>,
    orthonormal: OnceCell<bool>,
    forward_count: AtomicU64,
    adjoint_count: AtomicU64,
}

impl Clone for LinearMap {
    fn clone(&self) -> Self {
        LinearMap {
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            kind: self.kind.clone(),
            cached_norm: self.cached_norm.clone(),
            orthonormal: self.orthonormal.clone(),
            forward_count: AtomicU64::new(0),
            adjoint_count: AtomicU64::new(0),
        }
    }
}

impl LinearMap {
    pub fn identity(dim: usize) -> Self {
        Self::new(dim, dim, MapKind::Identity).expect("identity dims agree")
    }

    pub fn scaled_identity(alpha: f64, dim: usize) -> Self {
        Self::new(dim, dim, MapKind::ScaledIdentity(alpha)).expect("square by construction")
    }

    pub fn dense(matrix: Array2<f64>) -> Self {
        let (out_dim, in_dim) = matrix.dim();
        Self::new(in_dim, out_dim, MapKind::Dense(matrix)).expect("dims from matrix shape")
    }

    pub fn rank_one(row: Array1<f64>) -> Self {
        let in_dim = row.len();
        Self::new(in_dim, 1, MapKind::RankOne(row)).expect("dims from row length")
    }

    pub fn new(in_dim: usize, out_dim: usize, kind: MapKind) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidParameter("map dims must be >= 1".into()));
        }
        match &kind {
            MapKind::Identity | MapKind::ScaledIdentity(_) if in_dim != out_dim => {
                return Err(Error::InvalidParameter(
                    "identity kinds require in_dim = out_dim".into(),
                ));
            }
            MapKind::Dense(m) if m.dim() != (out_dim, in_dim) => {
                return Err(Error::InvalidParameter(format!(
                    "dense matrix is {:?}, expected ({out_dim}, {in_dim})",
                    m.dim()
                )));
            }
            MapKind::RankOne(a) if a.len() != in_dim || out_dim != 1 => {
                return Err(Error::InvalidParameter(
                    "rank_one maps into R^1 with in_dim = len(a)".into(),
                ));
            }
            _ => {}
        }
        Ok(LinearMap {
            in_dim,
            out_dim,
            kind,
            cached_norm: OnceCell::new(),
            orthonormal: OnceCell::new(),
            forward_count: AtomicU64::new(0),
            adjoint_count: AtomicU64::new(0),
        })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn op_counts(&self) -> OpCounts {
        OpCounts {
            forward: self.forward_count.load(Ordering::Relaxed),
            adjoint: self.adjoint_count.load(Ordering::Relaxed),
        }
    }

    /// Matrix-vector product of the represented operator.
    pub fn apply(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        check_dim("apply", self.in_dim, x.len())?;
        self.forward_count.fetch_add(1, Ordering::Relaxed);
        Ok(match &self.kind {
            MapKind::Identity => x.clone(),
            MapKind::ScaledIdentity(alpha) => x * *alpha,
            MapKind::Dense(m) => m.dot(x),
            MapKind::RankOne(a) => Array1::from_elem(1, a.dot(x)),
        })
    }

    /// Transpose product; satisfies `<Ax, y> = <x, A^T y>`.
    pub fn apply_adjoint(&self, y: &Array1<f64>) -> Result<Array1<f64>> {
        check_dim("apply_adjoint", self.out_dim, y.len())?;
        self.adjoint_count.fetch_add(1, Ordering::Relaxed);
        Ok(match &self.kind {
            MapKind::Identity => y.clone(),
            MapKind::ScaledIdentity(alpha) => y * *alpha,
            MapKind::Dense(m) => m.t().dot(y),
            MapKind::RankOne(a) => a * y[0],
        })
    }

    /// Largest-singular-value estimate via power iteration on the normal
    /// operator, deterministic for a fixed seed.
    ///
    /// The returned value is inflated by `1 + 10*tol` before caching: every
    /// schedule condition downstream is safe under over-estimation of the
    /// norm (it only shrinks step sizes), while a raw Rayleigh-quotient
    /// estimate can undershoot.
    pub fn operator_norm(&self, tol: f64, max_iters: usize, seed: u64) -> Result<f64> {
        if let Some(v) = self.cached_norm.get() {
            return Ok(*v);
        }
        let value = self.estimate_norm(tol, max_iters, seed)?;
        Ok(*self.cached_norm.get_or_init(|| value))
    }

    /// `operator_norm` with the crate-wide default accuracy settings.
    pub fn norm(&self) -> f64 {
        self.operator_norm(1e-12, 50_000, 0)
            .expect("norm estimation with default budget")
    }

    pub fn cached_norm(&self) -> Option<f64> {
        self.cached_norm.get().copied()
    }

    fn estimate_norm(&self, tol: f64, max_iters: usize, seed: u64) -> Result<f64> {
        if tol <= 0.0 {
            return Err(Error::InvalidParameter("tol must be positive".into()));
        }
        // Exact for the trivially scaled kinds.
        match &self.kind {
            MapKind::Identity => return Ok(1.0),
            MapKind::ScaledIdentity(alpha) => return Ok(alpha.abs()),
            _ => {}
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = Array1::from_shape_fn(self.in_dim, |_| rng.gen_range(-1.0..1.0));
        let mut norm_v = norm2(&v);
        if norm_v == 0.0 {
            v[0] = 1.0;
            norm_v = 1.0;
        }
        v /= norm_v;
        let mut lambda = 0.0_f64;
        for _ in 0..max_iters {
            let w = self.normal_apply(&v);
            let norm_w = norm2(&w);
            if norm_w == 0.0 {
                // A^T A v = 0: the operator annihilates v; restart deterministically.
                return Ok(0.0);
            }
            let lambda_new = v.dot(&w).max(0.0);
            let done = (lambda_new - lambda).abs() <= tol * lambda_new.max(f64::MIN_POSITIVE);
            v = w / norm_w;
            lambda = lambda_new;
            if done {
                return Ok(lambda.sqrt() * (1.0 + 10.0 * tol));
            }
        }
        Err(Error::NonConvergence {
            what: "operator norm power iteration".into(),
            last_estimate: lambda.sqrt() * (1.0 + 10.0 * tol),
        })
    }

    // A^T (A v) without touching the application counters.
    fn normal_apply(&self, v: &Array1<f64>) -> Array1<f64> {
        match &self.kind {
            MapKind::Identity => v.clone(),
            MapKind::ScaledIdentity(alpha) => v * (alpha * alpha),
            MapKind::Dense(m) => m.t().dot(&m.dot(v)),
            MapKind::RankOne(a) => a * a.dot(v),
        }
    }

    /// Whether `M^T M = I` holds numerically (so `||Mx|| = ||x||` and the
    /// solvers' closed-form prox steps apply). Checked once and cached.
    pub fn is_orthonormal(&self) -> bool {
        *self.orthonormal.get_or_init(|| match &self.kind {
            MapKind::Identity => true,
            MapKind::ScaledIdentity(alpha) => (alpha.abs() - 1.0).abs() <= 1e-12,
            MapKind::RankOne(a) => self.in_dim == 1 && (norm2(a) - 1.0).abs() <= 1e-10,
            MapKind::Dense(m) => {
                if self.in_dim > self.out_dim {
                    return false;
                }
                let gram = m.t().dot(m);
                let mut max_err = 0.0_f64;
                for i in 0..self.in_dim {
                    for j in 0..self.in_dim {
                        let target = if i == j { 1.0 } else { 0.0 };
                        max_err = max_err.max((gram[[i, j]] - target).abs());
                    }
                }
                max_err <= 1e-10
            }
        })
    }
}

/// Euclidean norm helper shared across the crate.
pub fn norm2(x: &Array1<f64>) -> f64 {
    x.dot(x).sqrt()
}
