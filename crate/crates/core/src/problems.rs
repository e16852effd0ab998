//! Problem specification and built-in instance builders.
//!
//! A [`ProblemSpec`] is the full description of one instance of
//! `min g(u) + h(v)  s.t.  A u + B v = c`: the two functions, the coupling
//! operators, the smoothing center, the constraint-range diameter `D_f`,
//! optional exact conjugate evaluators (which unlock gap reporting and dual
//! residuals), and an optional reference solution for bound checks.

use std::fmt;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convex::{BregmanDistance, FnKind, ProjSet, ProperConvexFn};
use crate::error::{check_dim, Error, Result};
use crate::linop::{norm2, LinearMap};
use crate::oracle;

/// Exact Fenchel-conjugate evaluator attached to a problem.
pub type ConjugateFn = Arc<dyn Fn(&Array1<f64>) -> f64 + Send + Sync>;

/// Solves the v-subproblem `argmin_v h(v) - <lambda, B v> + (eta/2)||A u + B v - c||^2`
/// given `(eta, lambda, A u)`; used when `B` is not orthonormal.
pub type VSubproblemSolver =
    Arc<dyn Fn(f64, &Array1<f64>, &Array1<f64>) -> Result<Array1<f64>> + Send + Sync>;

/// Solves the u-subproblem
/// `argmin_u g(u) - <lambda, A u> + (rho/2)||A u + B v - c||^2 + gamma b(u, center)`
/// given `(rho, gamma, lambda, B v)`; used when `A` is not orthonormal.
pub type USubproblemSolver =
    Arc<dyn Fn(f64, f64, &Array1<f64>, &Array1<f64>) -> Result<Array1<f64>> + Send + Sync>;

/// Where a reference solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    BruteForce,
}

/// Known optimum data used by bound checks. `lambda_star` is `None` when dual
/// recovery failed and the reference is primal-only.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub f_star: f64,
    pub u_star: Array1<f64>,
    pub v_star: Array1<f64>,
    pub lambda_star: Option<Array1<f64>>,
    pub provenance: Provenance,
}

impl ReferenceSolution {
    /// Dual optimal value under strong duality.
    pub fn d_star(&self) -> f64 {
        -self.f_star
    }

    pub fn lambda_star_norm(&self) -> Option<f64> {
        self.lambda_star.as_ref().map(norm2)
    }
}

/// One instance of the two-block template.
#[derive(Clone)]
pub struct ProblemSpec {
    pub g: ProperConvexFn,
    pub h: ProperConvexFn,
    pub a: LinearMap,
    pub b: LinearMap,
    pub c: Array1<f64>,
    /// Smoothing center; must lie in `dom g`.
    pub center: Array1<f64>,
    /// `sup { ||A u + B v - c|| : u in dom g, v in dom h }` when known.
    pub d_f: Option<f64>,
    pub g_conjugate: Option<ConjugateFn>,
    pub h_conjugate: Option<ConjugateFn>,
    pub reference: Option<ReferenceSolution>,
    /// Benchmark starting point (interpreted per method; dual-space for the
    /// smoothing solvers on feasibility instances).
    pub start_point: Option<Array1<f64>>,
    pub u_solver: Option<USubproblemSolver>,
    pub v_solver: Option<VSubproblemSolver>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("p1", &self.a.in_dim())
            .field("p2", &self.b.in_dim())
            .field("n", &self.c.len())
            .field("d_f", &self.d_f)
            .field("gap_capable", &self.is_gap_capable())
            .field("has_reference", &self.reference.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn new(
        g: ProperConvexFn,
        h: ProperConvexFn,
        a: LinearMap,
        b: LinearMap,
        c: Array1<f64>,
        center: Array1<f64>,
    ) -> Result<Self> {
        check_dim("ProblemSpec g/A", a.in_dim(), g.dim())?;
        check_dim("ProblemSpec h/B", b.in_dim(), h.dim())?;
        check_dim("ProblemSpec A/c", a.out_dim(), c.len())?;
        check_dim("ProblemSpec B/c", b.out_dim(), c.len())?;
        check_dim("ProblemSpec center", g.dim(), center.len())?;
        if !g.eval(&center)?.is_finite() {
            return Err(Error::InvalidParameter(
                "smoothing center must lie in dom g".into(),
            ));
        }
        Ok(ProblemSpec {
            g,
            h,
            a,
            b,
            c,
            center,
            d_f: None,
            g_conjugate: None,
            h_conjugate: None,
            reference: None,
            start_point: None,
            u_solver: None,
            v_solver: None,
        })
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn p1(&self) -> usize {
        self.a.in_dim()
    }

    pub fn p2(&self) -> usize {
        self.b.in_dim()
    }

    /// The Bregman distance used by the smoothing machinery (squared
    /// Euclidean around the problem center, `L_b = 1`).
    pub fn bregman(&self) -> BregmanDistance {
        BregmanDistance::squared_euclidean(self.center.clone())
    }

    /// Operator norm of `A` (estimated and cached on first use).
    pub fn norm_a(&self) -> f64 {
        self.a.norm()
    }

    /// `A u + B v - c` and its Euclidean norm, with exactly one application
    /// of each operator.
    pub fn constraint_residual(&self, u: &Array1<f64>, v: &Array1<f64>) -> Result<(Array1<f64>, f64)> {
        let r = &self.a.apply(u)? + &self.b.apply(v)? - &self.c;
        let n = norm2(&r);
        Ok((r, n))
    }

    /// Primal objective `g(u) + h(v)` (may be `+inf`).
    pub fn objective(&self, u: &Array1<f64>, v: &Array1<f64>) -> Result<f64> {
        Ok(self.g.eval(u)? + self.h.eval(v)?)
    }

    /// Exact dual objective `g*(A^T lambda) + h*(B^T lambda) - <c, lambda>`;
    /// requires both conjugate evaluators.
    pub fn dual_objective(&self, lambda: &Array1<f64>) -> Result<f64> {
        let (g_conj, h_conj) = match (&self.g_conjugate, &self.h_conjugate) {
            (Some(g), Some(h)) => (g, h),
            _ => {
                return Err(Error::MissingCapability(
                    "dual objective needs exact conjugate evaluators for g* and h*".into(),
                ))
            }
        };
        let at = self.a.apply_adjoint(lambda)?;
        let bt = self.b.apply_adjoint(lambda)?;
        Ok(g_conj(&at) + h_conj(&bt) - self.c.dot(lambda))
    }

    /// Gap reporting is possible iff both conjugates are attached.
    pub fn is_gap_capable(&self) -> bool {
        self.g_conjugate.is_some() && self.h_conjugate.is_some()
    }

    /// `D_f` from the spec when present, else the rigorous over-estimate
    /// `||A|| sup||u|| + ||B|| sup||v|| + ||c||` over the (bounded) domains.
    pub fn df_or_estimate(&self) -> Option<f64> {
        if self.d_f.is_some() {
            return self.d_f;
        }
        let gu = self.g.domain_sup_norm()?;
        let hv = self.h.domain_sup_norm()?;
        Some(self.a.norm() * gu + self.b.norm() * hv + norm2(&self.c))
    }

    /// Samples `(u, v)` pairs from the domain and verifies that `d_f`
    /// dominates the constraint residual on each; `Ok(max_observed)`.
    pub fn check_df_domination(&self, samples: usize, seed: u64) -> Result<f64> {
        let df = self
            .d_f
            .or_else(|| self.df_or_estimate())
            .ok_or_else(|| Error::MissingCapability("no D_f and unbounded domain".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut max_seen = 0.0_f64;
        for _ in 0..samples {
            let (u, v) = match (self.g.sample_domain(&mut rng), self.h.sample_domain(&mut rng)) {
                (Some(u), Some(v)) => (u, v),
                _ => {
                    return Err(Error::MissingCapability(
                        "domain sampler unavailable for this instance".into(),
                    ))
                }
            };
            let (_, r) = self.constraint_residual(&u, &v)?;
            if r > df * (1.0 + 1e-9) {
                return Err(Error::InvalidParameter(format!(
                    "D_f = {df} violated by sampled residual {r}"
                )));
            }
            max_seen = max_seen.max(r);
        }
        Ok(max_seen)
    }
}

/// The half-plane feasibility benchmark: two halfspaces through the origin
/// whose tangent angle is controlled by `angle`, posed as
/// `min s_C1(u) + s_C2(v)  s.t.  u + v = 0` with ball-bounded domains.
///
/// The attached dual evaluators are the set distances, so the reported dual
/// objective is `d_C1(lambda) + d_C2(lambda)` with optimal value 0; the
/// reference solution is the origin (it lies in both halfspaces).
pub fn build_feasibility_instance(n: usize, angle: f64, radius: Option<f64>) -> Result<ProblemSpec> {
    if n < 2 {
        return Err(Error::InvalidParameter("feasibility instance needs n >= 2".into()));
    }
    if angle < 0.0 {
        return Err(Error::InvalidParameter("tangent angle must be >= 0".into()));
    }
    let r = radius.unwrap_or(10.0 * (n as f64).sqrt());
    let half = n / 2;
    let a1 = Array1::from_shape_fn(n, |i| if i < half { angle } else { -1.0 });
    let a2 = Array1::from_shape_fn(n, |i| if i < half { 0.0 } else { 1.0 });
    let c1 = ProjSet::Halfspace { a: a1, b: 0.0 };
    let c2 = ProjSet::Halfspace { a: a2, b: 0.0 };

    let support_in_ball = |set: &ProjSet| -> Result<ProperConvexFn> {
        ProperConvexFn::sum(
            n,
            vec![
                FnKind::SupportOfSet { set: set.clone() },
                FnKind::IndicatorBall {
                    center: Array1::zeros(n),
                    radius: r,
                },
            ],
        )
    };
    let g = support_in_ball(&c1)?;
    let h = support_in_ball(&c2)?;

    let mut spec = ProblemSpec::new(
        g,
        h,
        LinearMap::identity(n),
        LinearMap::identity(n),
        Array1::zeros(n),
        Array1::zeros(n),
    )?;
    spec.d_f = Some(2.0 * r);
    let (d1, d2) = (c1.clone(), c2.clone());
    spec.g_conjugate = Some(Arc::new(move |z| d1.distance(z)));
    spec.h_conjugate = Some(Arc::new(move |z| d2.distance(z)));
    spec.reference = Some(ReferenceSolution {
        f_star: 0.0,
        u_star: Array1::zeros(n),
        v_star: Array1::zeros(n),
        lambda_star: Some(Array1::zeros(n)),
        provenance: Provenance::Analytic,
    });
    spec.start_point = Some(Array1::ones(n));
    Ok(spec)
}

/// The two halfspace projectors of a feasibility instance, for the
/// projection-based baselines.
pub fn feasibility_projectors(n: usize, angle: f64) -> (ProjSet, ProjSet) {
    let half = n / 2;
    let a1 = Array1::from_shape_fn(n, |i| if i < half { angle } else { -1.0 });
    let a2 = Array1::from_shape_fn(n, |i| if i < half { 0.0 } else { 1.0 });
    (
        ProjSet::Halfspace { a: a1, b: 0.0 },
        ProjSet::Halfspace { a: a2, b: 0.0 },
    )
}

/// Reformulates `min g(u) + h(F u - y)` as the two-block template with
/// `A = F`, `B = -I`, `c = y`.
pub fn build_composite(
    g: ProperConvexFn,
    h: ProperConvexFn,
    f_map: LinearMap,
    y: Array1<f64>,
    center: Array1<f64>,
) -> Result<ProblemSpec> {
    let n = y.len();
    check_dim("build_composite F/y", f_map.out_dim(), n)?;
    check_dim("build_composite h", h.dim(), n)?;
    ProblemSpec::new(g, h, f_map, LinearMap::scaled_identity(-1.0, n), y, center)
}

/// Options for [`build_box_lp`].
#[derive(Debug, Clone)]
pub struct BoxLpOptions {
    /// Side dimension (`p1 = p2 = n`); at most 3 so the reference oracle can
    /// brute-force the optimum.
    pub dim: usize,
    pub q_g: Array1<f64>,
    pub q_h: Array1<f64>,
    pub seed: u64,
}

impl BoxLpOptions {
    pub fn random(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1));
        BoxLpOptions {
            dim,
            q_g: Array1::from_shape_fn(dim, |_| rng.gen_range(-1.0..1.0)),
            q_h: Array1::from_shape_fn(dim, |_| rng.gen_range(-1.0..1.0)),
            seed,
        }
    }
}

/// A randomly rotated box-LP test instance:
/// `g(u) = <q_g, u> + delta_box(u)`, `h(v) = <q_h, v> + delta_box(v)` over
/// `[-1,1]^dim`, with random orthogonal `A`, `B` and a feasible `c` built
/// from a random interior point. Exact separable conjugates are attached,
/// `D_f` comes from vertex enumeration, and the reference solution from the
/// brute-force oracle.
pub fn build_box_lp(opts: &BoxLpOptions) -> Result<ProblemSpec> {
    let dim = opts.dim;
    if dim == 0 || dim > 3 {
        return Err(Error::InvalidParameter("box-LP dim must be 1..=3".into()));
    }
    check_dim("box-LP q_g", dim, opts.q_g.len())?;
    check_dim("box-LP q_h", dim, opts.q_h.len())?;

    let mut last_err = String::new();
    for attempt in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(attempt * 0x1234_5678_9abc));
        let a = random_orthogonal(dim, &mut rng);
        let b = random_orthogonal(dim, &mut rng);
        let u0 = Array1::from_shape_fn(dim, |_| rng.gen_range(-0.5..0.5));
        let v0 = Array1::from_shape_fn(dim, |_| rng.gen_range(-0.5..0.5));

        match assemble_box_lp(opts, a, b, &u0, &v0) {
            Ok(spec) => return Ok(spec),
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(Error::Construction {
        attempts: 10,
        reason: last_err,
    })
}

fn assemble_box_lp(
    opts: &BoxLpOptions,
    a: Array2<f64>,
    b: Array2<f64>,
    u0: &Array1<f64>,
    v0: &Array1<f64>,
) -> Result<ProblemSpec> {
    let dim = opts.dim;
    let a_map = LinearMap::dense(a.clone());
    let b_map = LinearMap::dense(b.clone());
    if !a_map.is_orthonormal() || !b_map.is_orthonormal() {
        return Err(Error::Construction {
            attempts: 1,
            reason: "generated operator failed the orthonormality check".into(),
        });
    }
    let c = a.dot(u0) + b.dot(v0);

    let lo = Array1::from_elem(dim, -1.0);
    let hi = Array1::from_elem(dim, 1.0);
    let box_linear = |q: &Array1<f64>| -> Result<ProperConvexFn> {
        ProperConvexFn::sum(
            dim,
            vec![
                FnKind::Linear { q: q.clone() },
                FnKind::IndicatorBox {
                    lo: lo.clone(),
                    hi: hi.clone(),
                },
            ],
        )
    };
    let g = box_linear(&opts.q_g)?;
    let h = box_linear(&opts.q_h)?;

    let mut spec = ProblemSpec::new(g, h, a_map, b_map, c.clone(), Array1::zeros(dim))?;

    // D_f by exhaustive vertex enumeration: the residual norm is convex, so
    // its maximum over box x box sits at a vertex pair.
    let mut df: f64 = 0.0;
    for mu in 0..(1usize << dim) {
        for mv in 0..(1usize << dim) {
            let u = Array1::from_shape_fn(dim, |i| if mu >> i & 1 == 1 { 1.0 } else { -1.0 });
            let v = Array1::from_shape_fn(dim, |i| if mv >> i & 1 == 1 { 1.0 } else { -1.0 });
            let r = a.dot(&u) + b.dot(&v) - &c;
            df = df.max(norm2(&r));
        }
    }
    spec.d_f = Some(df);

    // Separable conjugate of <q, .> + delta_box: sum_i max over the interval.
    let conj = |q: Array1<f64>| -> ConjugateFn {
        Arc::new(move |z: &Array1<f64>| {
            z.iter()
                .zip(q.iter())
                .map(|(&zi, &qi)| (zi - qi).abs())
                .sum()
        })
    };
    spec.g_conjugate = Some(conj(opts.q_g.clone()));
    spec.h_conjugate = Some(conj(opts.q_h.clone()));

    let reference = oracle::solve_small(&spec, 41)?;
    spec.reference = Some(reference);
    Ok(spec)
}

fn random_orthogonal(dim: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    // Gram-Schmidt on a random Gaussian-ish matrix; retries are handled by
    // the caller's attempt loop if a column degenerates.
    loop {
        let m = Array2::from_shape_fn((dim, dim), |_| rng.gen_range(-1.0..1.0_f64));
        if let Some(q) = gram_schmidt(&m) {
            return q;
        }
    }
}

fn gram_schmidt(m: &Array2<f64>) -> Option<Array2<f64>> {
    let dim = m.nrows();
    let mut q = m.clone();
    for j in 0..dim {
        for k in 0..j {
            let proj = q.column(j).dot(&q.column(k));
            let col_k = q.column(k).to_owned();
            let mut col_j = q.column_mut(j);
            col_j.scaled_add(-proj, &col_k);
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        if norm < 1e-8 {
            return None;
        }
        q.column_mut(j).mapv_inplace(|x| x / norm);
        // One re-orthogonalization pass keeps the Gram error near machine eps.
        for k in 0..j {
            let proj = q.column(j).dot(&q.column(k));
            let col_k = q.column(k).to_owned();
            let mut col_j = q.column_mut(j);
            col_j.scaled_add(-proj, &col_k);
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        if norm < 1e-8 {
            return None;
        }
        q.column_mut(j).mapv_inplace(|x| x / norm);
    }
    Some(q)
}

/// Options for [`build_cone_projection`], the strongly convex test instance:
/// `g(u) = (mu/2)||u - anchor||^2` on a ball around the anchor,
/// `h = s_C2 + delta_ball` for a halfspace `C2` through the origin, and the
/// coupling `u + v = 0`. The optimum projects the anchor onto the ray spanned
/// by the halfspace normal, so the full reference solution is analytic.
#[derive(Debug, Clone)]
pub struct ConeProjectionOptions {
    pub dim: usize,
    pub mu: f64,
    /// Anchor of the quadratic; must have a negative component along the
    /// halfspace normal so the optimum is nontrivial.
    pub anchor: Array1<f64>,
    /// Halfspace normal (unnormalized).
    pub normal: Array1<f64>,
}

impl ConeProjectionOptions {
    pub fn default_2d(mu: f64) -> Self {
        ConeProjectionOptions {
            dim: 2,
            mu,
            anchor: ndarray::arr1(&[0.15, -0.2]),
            normal: ndarray::arr1(&[0.0, 1.0]),
        }
    }
}

pub fn build_cone_projection(opts: &ConeProjectionOptions) -> Result<ProblemSpec> {
    let dim = opts.dim;
    if opts.mu <= 0.0 {
        return Err(Error::InvalidParameter("mu must be positive".into()));
    }
    check_dim("cone projection anchor", dim, opts.anchor.len())?;
    check_dim("cone projection normal", dim, opts.normal.len())?;
    let unit = &opts.normal / norm2(&opts.normal);
    let along = unit.dot(&opts.anchor);
    if along >= 0.0 {
        return Err(Error::InvalidParameter(
            "anchor must have a negative component along the halfspace normal".into(),
        ));
    }
    let t_star = -along;
    let u_star = &unit * (-t_star);
    let v_star = &unit * t_star;
    let lambda_star = (&u_star - &opts.anchor) * opts.mu;
    let f_star = 0.5 * opts.mu * norm2(&(&u_star - &opts.anchor)).powi(2);

    // Radii chosen so both domain constraints are inactive at the optimum.
    let rho_u = 2.0 * (norm2(&opts.anchor) + t_star);
    let r_v = 2.0 * t_star + 0.25;

    let g = ProperConvexFn::sum(
        dim,
        vec![
            FnKind::Quadratic {
                mu: opts.mu,
                center: opts.anchor.clone(),
            },
            FnKind::IndicatorBall {
                center: opts.anchor.clone(),
                radius: rho_u,
            },
        ],
    )?;
    let c2 = ProjSet::Halfspace {
        a: opts.normal.clone(),
        b: 0.0,
    };
    let h = ProperConvexFn::sum(
        dim,
        vec![
            FnKind::SupportOfSet { set: c2.clone() },
            FnKind::IndicatorBall {
                center: Array1::zeros(dim),
                radius: r_v,
            },
        ],
    )?;

    let mut spec = ProblemSpec::new(
        g,
        h,
        LinearMap::identity(dim),
        LinearMap::identity(dim),
        Array1::zeros(dim),
        opts.anchor.clone(),
    )?;

    // sup ||u + v|| over ball(anchor, rho_u) x segment[0, r_v unit]: the
    // segment part is convex in t, so only the endpoints matter.
    let end0 = norm2(&opts.anchor);
    let end1 = norm2(&(&opts.anchor + &(&unit * r_v)));
    spec.d_f = Some(end0.max(end1) + rho_u);

    let (mu, anchor) = (opts.mu, opts.anchor.clone());
    spec.g_conjugate = Some(Arc::new(move |z: &Array1<f64>| {
        // conjugate of (mu/2)||.-anchor||^2 + delta_ball(anchor, rho): radial
        // 1-D maximization.
        let zn = norm2(z);
        let radial = if zn <= mu * rho_u {
            zn * zn / (2.0 * mu)
        } else {
            rho_u * zn - 0.5 * mu * rho_u * rho_u
        };
        z.dot(&anchor) + radial
    }));
    let unit_c = unit.clone();
    spec.h_conjugate = Some(Arc::new(move |z: &Array1<f64>| {
        // support of the segment [0, r_v unit].
        r_v * z.dot(&unit_c).max(0.0)
    }));
    spec.reference = Some(ReferenceSolution {
        f_star,
        u_star,
        v_star,
        lambda_star: Some(lambda_star),
        provenance: Provenance::Analytic,
    });
    Ok(spec)
}
