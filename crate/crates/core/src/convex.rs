//! Extended-real convex functions with closed-form proximal operators, the
//! projectable sets they are built from, and the Bregman distance used for
//! smoothing.
//!
//! Prox parameterization: `prox(t, x)` solves
//! `argmin_z { f(z) + (1/(2t)) ||z - x||^2 }`, i.e. `prox_{t f}`. A prox
//! written elsewhere as `prox_{gamma^{-1} f}` maps to `t = 1/gamma`; that
//! translation is done once at the call sites and nowhere else.

use ndarray::Array1;
use rand::Rng;

use crate::error::{check_dim, Error, Result};
use crate::linop::norm2;

/// Relative slack used when deciding domain membership, so that prox outputs
/// that sit on a boundary up to rounding still evaluate as feasible.
pub const DOMAIN_TOL: f64 = 1e-9;

/// A closed convex set with a closed-form Euclidean projection.
#[derive(Debug, Clone)]
pub enum ProjSet {
    /// `{ x : <a, x> <= b }`.
    Halfspace { a: Array1<f64>, b: f64 },
    Ball { center: Array1<f64>, radius: f64 },
    Box { lo: Array1<f64>, hi: Array1<f64> },
    /// `{ t * unit : t in [0, len] }` for a unit vector `unit`.
    Segment { unit: Array1<f64>, len: f64 },
    Point { at: Array1<f64> },
    WholeSpace { dim: usize },
}

impl ProjSet {
    pub fn dim(&self) -> usize {
        match self {
            ProjSet::Halfspace { a, .. } => a.len(),
            ProjSet::Ball { center, .. } => center.len(),
            ProjSet::Box { lo, .. } => lo.len(),
            ProjSet::Segment { unit, .. } => unit.len(),
            ProjSet::Point { at } => at.len(),
            ProjSet::WholeSpace { dim } => *dim,
        }
    }

    pub fn project(&self, x: &Array1<f64>) -> Array1<f64> {
        match self {
            ProjSet::Halfspace { a, b } => {
                let viol = a.dot(x) - b;
                if viol <= 0.0 {
                    x.clone()
                } else {
                    x - &(a * (viol / a.dot(a)))
                }
            }
            ProjSet::Ball { center, radius } => {
                let d = x - center;
                let n = norm2(&d);
                if n <= *radius {
                    x.clone()
                } else {
                    center + &(d * (*radius / n))
                }
            }
            ProjSet::Box { lo, hi } => Array1::from_shape_fn(lo.len(), |i| x[i].clamp(lo[i], hi[i])),
            ProjSet::Segment { unit, len } => unit * x.dot(unit).clamp(0.0, *len),
            ProjSet::Point { at } => at.clone(),
            ProjSet::WholeSpace { .. } => x.clone(),
        }
    }

    /// Euclidean distance `||x - project(x)||`.
    pub fn distance(&self, x: &Array1<f64>) -> f64 {
        match self {
            // Cheap exact form for halfspaces.
            ProjSet::Halfspace { a, b } => (a.dot(x) - b).max(0.0) / norm2(a),
            _ => norm2(&(x - &self.project(x))),
        }
    }

    pub fn contains(&self, x: &Array1<f64>, tol: f64) -> bool {
        self.distance(x) <= tol * (1.0 + norm2(x))
    }

    /// Support function `s_C(u) = sup_{x in C} <u, x>` (extended real).
    pub fn support(&self, u: &Array1<f64>) -> f64 {
        match self {
            ProjSet::Halfspace { a, b } => {
                // Finite only on the ray { t a : t >= 0 }, where it equals t b.
                let t = u.dot(a) / a.dot(a);
                let resid = norm2(&(u - &(a * t)));
                if resid <= DOMAIN_TOL * (1.0 + norm2(u)) && t >= -DOMAIN_TOL {
                    t.max(0.0) * b
                } else {
                    f64::INFINITY
                }
            }
            ProjSet::Ball { center, radius } => u.dot(center) + radius * norm2(u),
            ProjSet::Box { lo, hi } => lo
                .iter()
                .zip(hi.iter())
                .zip(u.iter())
                .map(|((&l, &h), &ui)| (l * ui).max(h * ui))
                .sum(),
            ProjSet::Segment { unit, len } => len * u.dot(unit).max(0.0),
            ProjSet::Point { at } => u.dot(at),
            ProjSet::WholeSpace { .. } => {
                if norm2(u) <= DOMAIN_TOL {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

/// `prox_{t s_C}(x) = x - t pi_C(x/t)` (Moreau decomposition for support
/// functions).
pub fn prox_support_moreau(set: &ProjSet, t: f64, x: &Array1<f64>) -> Result<Array1<f64>> {
    if t <= 0.0 {
        return Err(Error::InvalidParameter("prox step t must be positive".into()));
    }
    check_dim("prox_support_moreau", set.dim(), x.len())?;
    let scaled = x / t;
    Ok(x - &(set.project(&scaled) * t))
}

/// Structural kind of a [`ProperConvexFn`].
#[derive(Debug, Clone)]
pub enum FnKind {
    Zero,
    Linear { q: Array1<f64> },
    IndicatorBox { lo: Array1<f64>, hi: Array1<f64> },
    IndicatorBall { center: Array1<f64>, radius: f64 },
    IndicatorHalfspace { a: Array1<f64>, b: f64 },
    /// The support function `s_C` of a projectable set.
    SupportOfSet { set: ProjSet },
    /// `(mu/2) ||x - center||^2`.
    Quadratic { mu: f64, center: Array1<f64> },
    /// A sum of the kinds above. Prox stays closed-form for at most one
    /// quadratic, any linear terms, and one structural (indicator/support)
    /// part; additionally the pair {support of a halfspace through the
    /// origin, ball at the origin} collapses to a segment indicator.
    Sum(Vec<FnKind>),
}

/// A proper closed convex function on `R^dim` with a closed-form prox.
#[derive(Debug, Clone)]
pub struct ProperConvexFn {
    dim: usize,
    kind: FnKind,
    strong_convexity: f64,
}

impl ProperConvexFn {
    pub fn new(dim: usize, kind: FnKind) -> Result<Self> {
        let declared = kind_dim(&kind);
        if let Some(d) = declared {
            check_dim("ProperConvexFn", dim, d)?;
        }
        let strong_convexity = kind_strong_convexity(&kind);
        Ok(ProperConvexFn {
            dim,
            kind,
            strong_convexity,
        })
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(dim, FnKind::Zero).expect("zero fn")
    }

    pub fn linear(q: Array1<f64>) -> Self {
        let dim = q.len();
        Self::new(dim, FnKind::Linear { q }).expect("linear fn")
    }

    pub fn indicator_box(lo: Array1<f64>, hi: Array1<f64>) -> Self {
        let dim = lo.len();
        Self::new(dim, FnKind::IndicatorBox { lo, hi }).expect("box fn")
    }

    pub fn support_of(set: ProjSet) -> Self {
        let dim = set.dim();
        Self::new(dim, FnKind::SupportOfSet { set }).expect("support fn")
    }

    pub fn quadratic(mu: f64, center: Array1<f64>) -> Self {
        let dim = center.len();
        Self::new(dim, FnKind::Quadratic { mu, center }).expect("quadratic fn")
    }

    pub fn sum(dim: usize, parts: Vec<FnKind>) -> Result<Self> {
        Self::new(dim, FnKind::Sum(parts))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &FnKind {
        &self.kind
    }

    /// Strong convexity modulus (`mu_g`); 0 when none.
    pub fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }

    /// Exact function value; `+inf` outside the domain of indicator kinds.
    pub fn eval(&self, x: &Array1<f64>) -> Result<f64> {
        check_dim("fn_eval", self.dim, x.len())?;
        Ok(eval_kind(&self.kind, x))
    }

    /// `argmin_z { f(z) + (1/(2t)) ||z - x||^2 }`.
    pub fn prox(&self, t: f64, x: &Array1<f64>) -> Result<Array1<f64>> {
        if t <= 0.0 {
            return Err(Error::InvalidParameter("prox step t must be positive".into()));
        }
        check_dim("prox", self.dim, x.len())?;
        prox_kind(&self.kind, t, x)
    }

    /// `argmin_u { f(u) - <w, u> }`; requires strong convexity so the
    /// minimizer is unique.
    pub fn tilted_argmin(&self, w: &Array1<f64>) -> Result<Array1<f64>> {
        check_dim("tilted_argmin", self.dim, w.len())?;
        if self.strong_convexity <= 0.0 {
            return Err(Error::Configuration(
                "tilted_argmin requires a strongly convex function".into(),
            ));
        }
        let parts = Decomposition::of(&self.kind)?;
        // Minimize mu/2 ||u - z||^2 + <q - w, u> + structural part.
        let u0 = &parts.quad_center + &((w - &parts.linear) / parts.mu);
        parts.structural.resolve(1.0 / parts.mu, &u0)
    }

    /// Largest `||x||` over the domain, when the domain is bounded.
    pub fn domain_sup_norm(&self) -> Option<f64> {
        domain_geometry(&self.kind).map(|g| g.sup_norm)
    }

    /// Domain diameter, when bounded.
    pub fn domain_diameter(&self) -> Option<f64> {
        domain_geometry(&self.kind).map(|g| g.diameter)
    }

    /// A random point of the domain (used by sampling-based validations);
    /// `None` when the domain is unbounded or has no sampler.
    pub fn sample_domain<R: Rng>(&self, rng: &mut R) -> Option<Array1<f64>> {
        sample_kind(&self.kind, self.dim, rng)
    }

    /// The projectable set of the first support-function part, if any (the
    /// projection baselines drive their steps through it).
    pub fn support_set(&self) -> Option<&ProjSet> {
        fn find(kind: &FnKind) -> Option<&ProjSet> {
            match kind {
                FnKind::SupportOfSet { set } => Some(set),
                FnKind::Sum(parts) => parts.iter().find_map(find),
                _ => None,
            }
        }
        find(&self.kind)
    }

    /// When the function is affine over a box (`<q, .> + delta_box`), returns
    /// `(q, lo, hi)`; used by the brute-force oracle's vertex enumeration.
    pub fn affine_over_box(&self) -> Option<(Array1<f64>, Array1<f64>, Array1<f64>)> {
        let parts = Decomposition::of(&self.kind).ok()?;
        if parts.mu != 0.0 {
            return None;
        }
        match parts.structural {
            Structural::Project(ProjSet::Box { lo, hi }) => Some((parts.linear, lo, hi)),
            _ => None,
        }
    }

    /// Gradient of the smooth (quadratic + linear) part at `x`.
    pub fn smooth_gradient(&self, x: &Array1<f64>) -> Result<Array1<f64>> {
        check_dim("smooth_gradient", self.dim, x.len())?;
        let parts = Decomposition::of(&self.kind)?;
        Ok(&((x - &parts.quad_center) * parts.mu) + &parts.linear)
    }

    /// Equality rows of the inclusion `w in ∂f(x)`: pairs `(row, rhs)` such
    /// that any subgradient `w` satisfies `<row, w> = rhs`. Components pinned
    /// by inequality constraints only (active bounds, cone endpoints) emit no
    /// rows; they are covered by [`Self::subgradient_residual`].
    pub fn subdiff_equalities(&self, x: &Array1<f64>) -> Result<Vec<(Array1<f64>, f64)>> {
        check_dim("subdiff_equalities", self.dim, x.len())?;
        let parts = Decomposition::of(&self.kind)?;
        let grad = &((x - &parts.quad_center) * parts.mu) + &parts.linear;
        let mut rows = Vec::new();
        let unit_row = |i: usize| {
            let mut e = Array1::zeros(self.dim);
            e[i] = 1.0;
            e
        };
        match &parts.structural {
            Structural::None => {
                for i in 0..self.dim {
                    rows.push((unit_row(i), grad[i]));
                }
            }
            Structural::Project(ProjSet::Box { lo, hi }) => {
                for i in 0..self.dim {
                    if !at_bound(x[i], lo[i]) && !at_bound(x[i], hi[i]) {
                        rows.push((unit_row(i), grad[i]));
                    }
                }
            }
            Structural::Project(ProjSet::Ball { center, radius }) => {
                let d = x - center;
                if norm2(&d) < radius * (1.0 - ACTIVE_TOL) {
                    for i in 0..self.dim {
                        rows.push((unit_row(i), grad[i]));
                    }
                } else {
                    // On the sphere the normal cone is the outward ray; the
                    // tangential components of any subgradient match grad.
                    let dhat = &d / norm2(&d);
                    for i in 0..self.dim {
                        let row = &unit_row(i) - &(&dhat * dhat[i]);
                        let rhs = row.dot(&grad);
                        rows.push((row, rhs));
                    }
                }
            }
            Structural::Project(ProjSet::Segment { unit, len }) => {
                let t = x.dot(unit);
                if t > ACTIVE_TOL * (1.0 + len) && t < len * (1.0 - ACTIVE_TOL) {
                    rows.push((unit.clone(), unit.dot(&grad)));
                }
            }
            Structural::Support(ProjSet::Halfspace { a, b }) if *b == 0.0 => {
                // Indicator of the ray spanned by `a`.
                let unit = a / norm2(a);
                let t = x.dot(&unit);
                if t > ACTIVE_TOL {
                    rows.push((unit.clone(), unit.dot(&grad)));
                }
            }
            _ => {
                return Err(Error::Unsupported(
                    "subdifferential structure unavailable for this kind".into(),
                ))
            }
        }
        Ok(rows)
    }

    /// Residual of the inclusion `w in ∂f(x)` (0 when the inclusion holds).
    pub fn subgradient_residual(&self, x: &Array1<f64>, w: &Array1<f64>) -> Result<f64> {
        check_dim("subgradient_residual", self.dim, x.len())?;
        check_dim("subgradient_residual", self.dim, w.len())?;
        let parts = Decomposition::of(&self.kind)?;
        let grad = &((x - &parts.quad_center) * parts.mu) + &parts.linear;
        let excess = w - &grad;
        let residual = match &parts.structural {
            Structural::None => norm2(&excess),
            Structural::Project(ProjSet::Box { lo, hi }) => {
                let mut worst = 0.0_f64;
                for i in 0..self.dim {
                    let at_lo = at_bound(x[i], lo[i]);
                    let at_hi = at_bound(x[i], hi[i]);
                    let e = excess[i];
                    let viol = match (at_lo, at_hi) {
                        (true, true) => 0.0, // pinned coordinate, any sign ok
                        (true, false) => e.max(0.0),
                        (false, true) => (-e).max(0.0),
                        (false, false) => e.abs(),
                    };
                    worst = worst.max(viol);
                }
                worst
            }
            Structural::Project(ProjSet::Ball { center, radius }) => {
                let d = x - center;
                if norm2(&d) < radius * (1.0 - ACTIVE_TOL) {
                    norm2(&excess)
                } else {
                    let dhat = &d / norm2(&d);
                    let along = excess.dot(&dhat).max(0.0);
                    norm2(&(&excess - &(&dhat * along)))
                }
            }
            Structural::Project(ProjSet::Segment { unit, len }) => {
                let t = x.dot(unit);
                let along = excess.dot(unit);
                if t <= ACTIVE_TOL * (1.0 + len) {
                    along.max(0.0)
                } else if t >= len * (1.0 - ACTIVE_TOL) {
                    (-along).max(0.0)
                } else {
                    along.abs()
                }
            }
            Structural::Support(ProjSet::Halfspace { a, b }) if *b == 0.0 => {
                let unit = a / norm2(a);
                let t = x.dot(&unit);
                let along = excess.dot(&unit);
                if t <= ACTIVE_TOL {
                    along.max(0.0)
                } else {
                    along.abs()
                }
            }
            _ => {
                return Err(Error::Unsupported(
                    "subdifferential structure unavailable for this kind".into(),
                ))
            }
        };
        Ok(residual)
    }
}

const ACTIVE_TOL: f64 = 1e-7;

fn at_bound(x: f64, bound: f64) -> bool {
    (x - bound).abs() <= ACTIVE_TOL * (1.0 + bound.abs())
}

fn kind_dim(kind: &FnKind) -> Option<usize> {
    match kind {
        FnKind::Zero => None,
        FnKind::Linear { q } => Some(q.len()),
        FnKind::IndicatorBox { lo, .. } => Some(lo.len()),
        FnKind::IndicatorBall { center, .. } => Some(center.len()),
        FnKind::IndicatorHalfspace { a, .. } => Some(a.len()),
        FnKind::SupportOfSet { set } => Some(set.dim()),
        FnKind::Quadratic { center, .. } => Some(center.len()),
        FnKind::Sum(parts) => parts.iter().find_map(kind_dim),
    }
}

fn kind_strong_convexity(kind: &FnKind) -> f64 {
    match kind {
        FnKind::Quadratic { mu, .. } => *mu,
        FnKind::Sum(parts) => parts.iter().map(kind_strong_convexity).sum(),
        _ => 0.0,
    }
}

fn eval_kind(kind: &FnKind, x: &Array1<f64>) -> f64 {
    match kind {
        FnKind::Zero => 0.0,
        FnKind::Linear { q } => q.dot(x),
        FnKind::IndicatorBox { lo, hi } => {
            let inside = x.iter().enumerate().all(|(i, &xi)| {
                let tol = DOMAIN_TOL * (1.0 + lo[i].abs().max(hi[i].abs()));
                xi >= lo[i] - tol && xi <= hi[i] + tol
            });
            if inside {
                0.0
            } else {
                f64::INFINITY
            }
        }
        FnKind::IndicatorBall { center, radius } => {
            if norm2(&(x - center)) <= radius * (1.0 + DOMAIN_TOL) + DOMAIN_TOL {
                0.0
            } else {
                f64::INFINITY
            }
        }
        FnKind::IndicatorHalfspace { a, b } => {
            if a.dot(x) - b <= DOMAIN_TOL * (1.0 + norm2(x)) {
                0.0
            } else {
                f64::INFINITY
            }
        }
        FnKind::SupportOfSet { set } => set.support(x),
        FnKind::Quadratic { mu, center } => {
            let d = x - center;
            0.5 * mu * d.dot(&d)
        }
        FnKind::Sum(parts) => parts.iter().map(|p| eval_kind(p, x)).sum(),
    }
}

/// The closed-form prox decomposition of a (possibly summed) kind:
/// a single isotropic quadratic, an accumulated linear tilt, and one
/// structural piece.
struct Decomposition {
    mu: f64,
    quad_center: Array1<f64>,
    linear: Array1<f64>,
    structural: Structural,
}

enum Structural {
    None,
    Project(ProjSet),
    Support(ProjSet),
}

impl Structural {
    /// Finish a prox/argmin once the smooth parts are absorbed: the remaining
    /// problem is `argmin struct(u) + (1/(2t_eff)) ||u - u0||^2`.
    fn resolve(&self, t_eff: f64, u0: &Array1<f64>) -> Result<Array1<f64>> {
        match self {
            Structural::None => Ok(u0.clone()),
            Structural::Project(set) => Ok(set.project(u0)),
            Structural::Support(set) => prox_support_moreau(set, t_eff, u0),
        }
    }
}

impl Decomposition {
    fn of(kind: &FnKind) -> Result<Decomposition> {
        let dim = kind_dim(kind).unwrap_or(0);
        let mut out = Decomposition {
            mu: 0.0,
            quad_center: Array1::zeros(dim),
            linear: Array1::zeros(dim),
            structural: Structural::None,
        };
        let mut structural_parts: Vec<&FnKind> = Vec::new();
        collect(kind, &mut out, &mut structural_parts)?;
        out.structural = combine_structural(&structural_parts)?;
        return Ok(out);

        fn collect<'k>(
            kind: &'k FnKind,
            out: &mut Decomposition,
            structural: &mut Vec<&'k FnKind>,
        ) -> Result<()> {
            match kind {
                FnKind::Zero => {}
                FnKind::Linear { q } => out.linear = &out.linear + q,
                FnKind::Quadratic { mu, center } => {
                    if out.mu > 0.0 {
                        return Err(Error::Unsupported(
                            "sum kinds support at most one quadratic part".into(),
                        ));
                    }
                    out.mu = *mu;
                    out.quad_center = center.clone();
                }
                FnKind::Sum(parts) => {
                    for p in parts {
                        collect(p, out, structural)?;
                    }
                }
                other => structural.push(other),
            }
            Ok(())
        }

        fn combine_structural(parts: &[&FnKind]) -> Result<Structural> {
            match parts {
                [] => Ok(Structural::None),
                [one] => Ok(match one {
                    FnKind::IndicatorBox { lo, hi } => Structural::Project(ProjSet::Box {
                        lo: lo.clone(),
                        hi: hi.clone(),
                    }),
                    FnKind::IndicatorBall { center, radius } => {
                        Structural::Project(ProjSet::Ball {
                            center: center.clone(),
                            radius: *radius,
                        })
                    }
                    FnKind::IndicatorHalfspace { a, b } => Structural::Project(ProjSet::Halfspace {
                        a: a.clone(),
                        b: *b,
                    }),
                    FnKind::SupportOfSet { set } => Structural::Support(set.clone()),
                    _ => unreachable!("smooth parts were absorbed"),
                }),
                [p1, p2] => {
                    // s_{halfspace through 0} is the indicator of the ray
                    // spanned by the normal; intersected with a ball at the
                    // origin it becomes a segment indicator.
                    let segment = match (p1, p2) {
                        (
                            FnKind::SupportOfSet {
                                set: ProjSet::Halfspace { a, b },
                            },
                            FnKind::IndicatorBall { center, radius },
                        )
                        | (
                            FnKind::IndicatorBall { center, radius },
                            FnKind::SupportOfSet {
                                set: ProjSet::Halfspace { a, b },
                            },
                        ) if *b == 0.0 && center.iter().all(|&c| c == 0.0) => {
                            Some((a.clone(), *radius))
                        }
                        _ => None,
                    };
                    match segment {
                        Some((a, radius)) => Ok(Structural::Project(ProjSet::Segment {
                            unit: &a / norm2(&a),
                            len: radius,
                        })),
                        None => Err(Error::Unsupported(
                            "no closed-form prox for this sum of structural parts".into(),
                        )),
                    }
                }
                _ => Err(Error::Unsupported(
                    "no closed-form prox for sums with more than two structural parts".into(),
                )),
            }
        }
    }
}

fn prox_kind(kind: &FnKind, t: f64, x: &Array1<f64>) -> Result<Array1<f64>> {
    match kind {
        FnKind::Zero => Ok(x.clone()),
        FnKind::Linear { q } => Ok(x - &(q * t)),
        FnKind::IndicatorBox { lo, hi } => Ok(ProjSet::Box {
            lo: lo.clone(),
            hi: hi.clone(),
        }
        .project(x)),
        FnKind::IndicatorBall { center, radius } => Ok(ProjSet::Ball {
            center: center.clone(),
            radius: *radius,
        }
        .project(x)),
        FnKind::IndicatorHalfspace { a, b } => Ok(ProjSet::Halfspace {
            a: a.clone(),
            b: *b,
        }
        .project(x)),
        FnKind::SupportOfSet { set } => prox_support_moreau(set, t, x),
        FnKind::Quadratic { mu, center } => Ok((x + &(center * (t * mu))) / (1.0 + t * mu)),
        FnKind::Sum(_) => {
            let parts = Decomposition::of(kind)?;
            let scale = 1.0 + t * parts.mu;
            let u0 = (x - &(&parts.linear * t) + &(&parts.quad_center * (t * parts.mu))) / scale;
            parts.structural.resolve(t / scale, &u0)
        }
    }
}

struct DomainGeometry {
    sup_norm: f64,
    diameter: f64,
}

fn domain_geometry(kind: &FnKind) -> Option<DomainGeometry> {
    match kind {
        FnKind::IndicatorBox { lo, hi } => {
            let sup_norm = lo
                .iter()
                .zip(hi.iter())
                .map(|(&l, &h)| l.abs().max(h.abs()).powi(2))
                .sum::<f64>()
                .sqrt();
            let d = hi - lo;
            Some(DomainGeometry {
                sup_norm,
                diameter: norm2(&d),
            })
        }
        FnKind::IndicatorBall { center, radius } => Some(DomainGeometry {
            sup_norm: norm2(center) + radius,
            diameter: 2.0 * radius,
        }),
        FnKind::Sum(parts) => {
            // Domain of a sum is the intersection; any bounded part bounds it.
            parts
                .iter()
                .filter_map(domain_geometry)
                .min_by(|a, b| a.diameter.total_cmp(&b.diameter))
        }
        _ => None,
    }
}

fn sample_kind<R: Rng>(kind: &FnKind, dim: usize, rng: &mut R) -> Option<Array1<f64>> {
    match kind {
        FnKind::IndicatorBox { lo, hi } => Some(Array1::from_shape_fn(dim, |i| {
            rng.gen_range(lo[i]..=hi[i])
        })),
        FnKind::IndicatorBall { center, radius } => {
            // Gaussian direction, radial cdf inversion: uniform in the ball.
            let g = Array1::from_shape_fn(dim, |_| {
                // Box-Muller from two uniforms.
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
            });
            let n = norm2(&g).max(f64::MIN_POSITIVE);
            let r = radius * rng.gen_range(0.0..1.0_f64).powf(1.0 / dim as f64);
            Some(center + &(g * (r / n)))
        }
        FnKind::Sum(_) => {
            let parts = Decomposition::of(kind).ok()?;
            match parts.structural {
                Structural::Project(ProjSet::Box { lo, hi }) => {
                    sample_kind(&FnKind::IndicatorBox { lo, hi }, dim, rng)
                }
                Structural::Project(ProjSet::Ball { center, radius }) => {
                    sample_kind(&FnKind::IndicatorBall { center, radius }, dim, rng)
                }
                Structural::Project(ProjSet::Segment { unit, len }) => {
                    let t = rng.gen_range(0.0..=len);
                    Some(&unit * t)
                }
                _ => None,
            }
        }
        _ => None,
    }
}

/// Squared-Euclidean Bregman distance `b(u, center) = 1/2 ||u - center||^2`,
/// 1-strongly convex with gradient Lipschitz constant `lipschitz` (= 1 for
/// this kind; kept as an explicit field because the parameter schedules
/// reference it).
#[derive(Debug, Clone)]
pub struct BregmanDistance {
    pub center: Array1<f64>,
    pub lipschitz: f64,
}

impl BregmanDistance {
    pub fn squared_euclidean(center: Array1<f64>) -> Self {
        BregmanDistance {
            center,
            lipschitz: 1.0,
        }
    }

    pub fn eval(&self, u: &Array1<f64>) -> Result<f64> {
        check_dim("bregman_eval", self.center.len(), u.len())?;
        let d = u - &self.center;
        Ok(0.5 * d.dot(&d))
    }

    pub fn grad(&self, u: &Array1<f64>) -> Result<Array1<f64>> {
        check_dim("bregman_grad", self.center.len(), u.len())?;
        Ok(u - &self.center)
    }
}
