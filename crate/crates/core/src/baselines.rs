//! Classical comparison methods: ADMM, AMA, the parameter-free feasibility
//! ADMM, its Douglas-Rachford form with iterate recovery, Dykstra's
//! alternating projections, and Haugazeau's method.
//!
//! The projection methods drive two set projectors directly; the template
//! methods (ADMM/AMA) reuse the same subproblem machinery as the smoothing
//! solvers with a fixed penalty.

use std::time::Instant;

use ndarray::Array1;

use crate::convex::ProjSet;
use crate::error::{Error, Result};
use crate::gap::{epsilon_solution_check, Verdict};
use crate::linop::norm2;
use crate::problems::ProblemSpec;
use crate::subproblems::{solve_u_subproblem, solve_v_subproblem};
use crate::trace::{IterateRecord, RunOutcome, StopReason, Trace};

/// Which baseline to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineMethod {
    /// Classical two-block ADMM with fixed penalty `rho`.
    Admm { rho: f64 },
    /// Classical AMA with fixed penalty `rho`; requires strongly convex `g`.
    Ama { rho: f64 },
    /// The penalty-free specialization of ADMM to two-set feasibility.
    AdmmFeasibility,
    /// Douglas-Rachford form of the same scheme, with `(u, v)` recovery.
    DouglasRachford,
    Dykstra,
    Haugazeau,
}

#[derive(Debug, Clone)]
pub struct BaselineConfig {
    pub method: BaselineMethod,
    pub max_iters: usize,
    pub eps: f64,
    pub thin: usize,
    /// Starting point: `x0` for the projection methods, `lambda0` for the
    /// template methods and the feasibility pair. Defaults to the problem's
    /// `start_point` (or zero).
    pub start: Option<Array1<f64>>,
}

impl BaselineConfig {
    pub fn new(method: BaselineMethod) -> Self {
        BaselineConfig {
            method,
            max_iters: 1000,
            eps: 1e-6,
            thin: 1,
            start: None,
        }
    }
}

#[derive(Debug)]
pub struct BaselineRun {
    pub trace: Trace,
    pub outcome: RunOutcome,
}

// ---------------------------------------------------------------------------
// Template methods.
// ---------------------------------------------------------------------------

/// Classical ADMM state (`b_v` is carried so each iteration applies each
/// operator exactly once).
#[derive(Debug, Clone)]
pub struct AdmmState {
    pub u: Array1<f64>,
    pub v: Array1<f64>,
    pub lambda: Array1<f64>,
    pub b_v: Array1<f64>,
    pub z: Array1<f64>,
}

/// One ADMM sweep: penalized `u` step around the previous `v`, penalized `v`
/// step around the new `u`, then the multiplier update with step `rho`.
pub fn admm_step(spec: &ProblemSpec, state: &AdmmState, rho: f64) -> Result<AdmmState> {
    let u = solve_u_subproblem(spec, rho, 0.0, &state.lambda, &state.b_v)?;
    let a_u = spec.a.apply(&u)?;
    let v = solve_v_subproblem(spec, rho, &state.lambda, &a_u)?;
    let b_v = spec.b.apply(&v)?;
    let z = &a_u + &b_v - &spec.c;
    let lambda = &state.lambda - &(&z * rho);
    Ok(AdmmState { u, v, lambda, b_v, z })
}

/// One AMA sweep: unpenalized `u` step (needs strongly convex `g`), then the
/// same `v` and multiplier updates as ADMM.
pub fn ama_step(spec: &ProblemSpec, state: &AdmmState, rho: f64) -> Result<AdmmState> {
    if spec.g.strong_convexity() <= 0.0 {
        return Err(Error::Configuration(
            "AMA requires strongly convex g".into(),
        ));
    }
    let at = spec.a.apply_adjoint(&state.lambda)?;
    let u = spec.g.tilted_argmin(&at)?;
    let a_u = spec.a.apply(&u)?;
    let v = solve_v_subproblem(spec, rho, &state.lambda, &a_u)?;
    let b_v = spec.b.apply(&v)?;
    let z = &a_u + &b_v - &spec.c;
    let lambda = &state.lambda - &(&z * rho);
    Ok(AdmmState { u, v, lambda, b_v, z })
}

pub fn admm_initial_state(spec: &ProblemSpec, v0: Array1<f64>, lambda0: Array1<f64>) -> Result<AdmmState> {
    let b_v = spec.b.apply(&v0)?;
    Ok(AdmmState {
        u: Array1::zeros(spec.p1()),
        z: Array1::zeros(spec.n()),
        v: v0,
        lambda: lambda0,
        b_v,
    })
}

// ---------------------------------------------------------------------------
// Feasibility specializations (two projectors, no parameters).
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct FeasAdmmState {
    pub u: Array1<f64>,
    pub v: Array1<f64>,
    pub lambda: Array1<f64>,
}

/// The parameter-free feasibility scheme:
/// `u+ = (l - v) - pi1(l - v)`, `v+ = (l - u+) - pi2(l - u+)`,
/// `l+ = l - (u+ + v+)`.
pub fn admm_feasibility_step(state: &FeasAdmmState, pi1: &ProjSet, pi2: &ProjSet) -> FeasAdmmState {
    let s1 = &state.lambda - &state.v;
    let u = &s1 - &pi1.project(&s1);
    let s2 = &state.lambda - &u;
    let v = &s2 - &pi2.project(&s2);
    let lambda = &state.lambda - &(&u + &v);
    FeasAdmmState { u, v, lambda }
}

/// Douglas-Rachford pair `(z, lambda)` for the same feasibility scheme.
#[derive(Debug, Clone)]
pub struct DrState {
    pub z: Array1<f64>,
    pub lambda: Array1<f64>,
}

impl DrState {
    /// Matches the feasibility-ADMM start `(v0, lambda0)`:
    /// `z0 = v0 + pi1(lambda0 - v0)`, `lambda1 = pi2(z0)`.
    pub fn from_feasibility_start(
        v0: &Array1<f64>,
        lambda0: &Array1<f64>,
        pi1: &ProjSet,
        pi2: &ProjSet,
    ) -> DrState {
        let z = v0 + &pi1.project(&(lambda0 - v0));
        let lambda = pi2.project(&z);
        DrState { z, lambda }
    }
}

/// One Douglas-Rachford sweep:
/// `z+ = z + pi1(2 lambda - z) - lambda`, `lambda+ = pi2(z+)`.
/// Also returns the recovered template pair
/// `u+ = lambda - z+`, `v+ = z+ - lambda+`.
pub fn dr_feasibility_step(
    state: &DrState,
    pi1: &ProjSet,
    pi2: &ProjSet,
) -> (DrState, Array1<f64>, Array1<f64>) {
    let reflect = &(&state.lambda * 2.0) - &state.z;
    let z = &state.z + &pi1.project(&reflect) - &state.lambda;
    let lambda = pi2.project(&z);
    let u = &state.lambda - &z;
    let v = &z - &lambda;
    (DrState { z, lambda }, u, v)
}

/// Dykstra's alternating projections with correction terms; converges to the
/// projection of the start point onto the intersection.
#[derive(Debug, Clone)]
pub struct DykstraState {
    pub x: Array1<f64>,
    pub p: Array1<f64>,
    pub q: Array1<f64>,
}

impl DykstraState {
    pub fn new(x0: Array1<f64>) -> Self {
        let dim = x0.len();
        DykstraState {
            x: x0,
            p: Array1::zeros(dim),
            q: Array1::zeros(dim),
        }
    }

    /// Magnitude of the carried corrections (a boundedness telemetry).
    pub fn correction_size(&self) -> f64 {
        norm2(&self.p) + norm2(&self.q)
    }
}

pub fn dykstra_step(state: &DykstraState, pi1: &ProjSet, pi2: &ProjSet) -> DykstraState {
    let y = pi1.project(&(&state.x + &state.p));
    let p = &(&state.x + &state.p) - &y;
    let x = pi2.project(&(&y + &state.q));
    let q = &(&y + &state.q) - &x;
    DykstraState { x, p, q }
}

/// Haugazeau's anchored three-point construction applied to the alternating
/// projection operator `P2 P1`; converges strongly to the projection of the
/// anchor onto the intersection.
#[derive(Debug, Clone)]
pub struct HaugazeauState {
    pub anchor: Array1<f64>,
    pub x: Array1<f64>,
    /// Set when a degenerate construction was replaced by the bare
    /// projection candidate.
    pub degenerate: bool,
}

impl HaugazeauState {
    pub fn new(x0: Array1<f64>) -> Self {
        HaugazeauState {
            anchor: x0.clone(),
            x: x0,
            degenerate: false,
        }
    }
}

/// One sweep `x+ = Q(anchor, x, P1(P2 x))`: the anchored steering applied to
/// the alternating-projection operator.
pub fn haugazeau_step(state: &HaugazeauState, pi1: &ProjSet, pi2: &ProjSet) -> HaugazeauState {
    let z = pi1.project(&pi2.project(&state.x));
    let (x, degenerate) = haugazeau_combine(&state.anchor, &state.x, &z);
    HaugazeauState {
        anchor: state.anchor.clone(),
        x,
        degenerate: state.degenerate || degenerate,
    }
}

/// The three-point operator `Q(x, y, z)`: the projection of `x` onto the
/// intersection of the halfspaces `{ w : <w - y, x - y> <= 0 }` and
/// `{ w : <w - z, y - z> >= 0 }`. The degenerate branch (inconsistent
/// halfspaces, only possible through rounding) returns the projection
/// candidate `z` with a flag.
fn haugazeau_combine(x: &Array1<f64>, y: &Array1<f64>, z: &Array1<f64>) -> (Array1<f64>, bool) {
    let xy = x - y;
    let yz = y - z;
    let pi = xy.dot(&yz);
    let mu = xy.dot(&xy);
    let nu = yz.dot(&yz);
    let rho = mu * nu - pi * pi;
    let scale = (mu * nu).max(1e-300);
    if nu <= 1e-300 {
        // y already lies in the target set.
        return (z.clone(), false);
    }
    if rho.abs() <= 1e-14 * scale {
        if pi >= 0.0 {
            (z.clone(), false)
        } else {
            (z.clone(), true)
        }
    } else if pi * nu >= rho {
        (x + &(&(z - y) * (1.0 + pi / nu)), false)
    } else {
        (y + &(&(&xy * pi + &(&(z - y) * mu)) * (nu / rho)), false)
    }
}

// ---------------------------------------------------------------------------
// Run driver.
// ---------------------------------------------------------------------------

/// Runs a baseline on a problem, recording the same trace columns as the
/// smoothing solvers (bounds and gap columns stay empty; the classical
/// methods carry no such guarantees on this template).
pub fn run_baseline(spec: &ProblemSpec, config: &BaselineConfig) -> Result<BaselineRun> {
    let started = Instant::now();
    let mut trace = Trace::default();
    let d_star = spec.reference.as_ref().map(|r| r.d_star());
    let f_star = spec.reference.as_ref().map(|r| r.f_star);
    let eps = config.eps;

    let projectors = || -> Result<(ProjSet, ProjSet)> {
        match (spec.g.support_set(), spec.h.support_set()) {
            (Some(a), Some(b)) => Ok((a.clone(), b.clone())),
            _ => Err(Error::MissingCapability(
                "projection baselines need support-function blocks with projectable sets".into(),
            )),
        }
    };

    // Records one iterate; `Some(partial)` when every computable component
    // of the epsilon check passed.
    let push = |trace: &mut Trace,
                k: usize,
                u: Option<&Array1<f64>>,
                v: Option<&Array1<f64>>,
                feas: f64,
                lambda: &Array1<f64>,
                is_last: bool|
     -> Result<Option<bool>> {
        let mut rec = IterateRecord::new(k);
        rec.feasibility_gap = feas;
        if let (Some(fs), Some(u), Some(v)) = (f_star, u, v) {
            rec.primal_obj_residual = Some(spec.objective(u, v)? - fs);
        }
        if let Some(ds) = d_star {
            if spec.is_gap_capable() {
                rec.dual_obj_residual = Some(spec.dual_objective(lambda)? - ds);
            }
        }
        rec.wall_time_ns = started.elapsed().as_nanos() as u64;
        let (pv, fv, dv) = epsilon_solution_check(&rec, eps);
        let verdicts = [pv, fv, dv];
        let stop = !verdicts.contains(&Verdict::Fail);
        if (k - 1) % config.thin == 0 || is_last || stop {
            trace.push(rec);
        }
        Ok(stop.then(|| verdicts.contains(&Verdict::Unknown)))
    };

    let max_iters = config.max_iters.max(1);
    let finish = |stop: StopReason, iterations: usize, trace: Trace, partial: bool| BaselineRun {
        trace,
        outcome: RunOutcome {
            stop,
            iterations,
            partial_check: partial,
        },
    };

    match config.method {
        BaselineMethod::Admm { rho } | BaselineMethod::Ama { rho } => {
            if rho <= 0.0 {
                return Err(Error::Configuration("penalty rho must be positive".into()));
            }
            let lambda0 = config
                .start
                .clone()
                .unwrap_or_else(|| Array1::zeros(spec.n()));
            let mut state = admm_initial_state(spec, Array1::zeros(spec.p2()), lambda0)?;
            for k in 1..=max_iters {
                state = match config.method {
                    BaselineMethod::Admm { .. } => admm_step(spec, &state, rho)?,
                    _ => ama_step(spec, &state, rho)?,
                };
                let feas = norm2(&state.z);
                if let Some(partial) = push(
                    &mut trace,
                    k,
                    Some(&state.u),
                    Some(&state.v),
                    feas,
                    &state.lambda,
                    k == max_iters,
                )? {
                    return Ok(finish(StopReason::EpsilonSolution, k, trace, partial));
                }
            }
        }
        BaselineMethod::AdmmFeasibility => {
            let (pi1, pi2) = projectors()?;
            let lambda0 = config
                .start
                .clone()
                .unwrap_or_else(|| Array1::zeros(spec.n()));
            let mut state = FeasAdmmState {
                u: Array1::zeros(spec.p1()),
                v: Array1::zeros(spec.p2()),
                lambda: lambda0,
            };
            for k in 1..=max_iters {
                state = admm_feasibility_step(&state, &pi1, &pi2);
                let feas = norm2(&(&state.u + &state.v));
                if let Some(partial) = push(
                    &mut trace,
                    k,
                    Some(&state.u),
                    Some(&state.v),
                    feas,
                    &state.lambda,
                    k == max_iters,
                )? {
                    return Ok(finish(StopReason::EpsilonSolution, k, trace, partial));
                }
            }
        }
        BaselineMethod::DouglasRachford => {
            let (pi1, pi2) = projectors()?;
            let lambda0 = config
                .start
                .clone()
                .unwrap_or_else(|| Array1::zeros(spec.n()));
            let v0 = Array1::zeros(spec.p2());
            let mut state = DrState::from_feasibility_start(&v0, &lambda0, &pi1, &pi2);
            // The init itself recovers the first pair.
            let mut u = &lambda0 - &state.z;
            let mut v = &state.z - &state.lambda;
            for k in 1..=max_iters {
                let feas = norm2(&(&u + &v));
                if let Some(partial) = push(
                    &mut trace,
                    k,
                    Some(&u),
                    Some(&v),
                    feas,
                    &state.lambda,
                    k == max_iters,
                )? {
                    return Ok(finish(StopReason::EpsilonSolution, k, trace, partial));
                }
                let (next, nu, nv) = dr_feasibility_step(&state, &pi1, &pi2);
                state = next;
                u = nu;
                v = nv;
            }
        }
        BaselineMethod::Dykstra => {
            let (pi1, pi2) = projectors()?;
            let x0 = config
                .start
                .clone()
                .or_else(|| spec.start_point.clone())
                .unwrap_or_else(|| Array1::zeros(spec.n()));
            let mut state = DykstraState::new(x0);
            for k in 1..=max_iters {
                state = dykstra_step(&state, &pi1, &pi2);
                // The iterate is the point being driven into the
                // intersection; its residual is the distance sum.
                let feas = pi1.distance(&state.x) + pi2.distance(&state.x);
                if let Some(partial) = push(&mut trace, k, None, None, feas, &state.x, k == max_iters)? {
                    return Ok(finish(StopReason::EpsilonSolution, k, trace, partial));
                }
            }
        }
        BaselineMethod::Haugazeau => {
            let (pi1, pi2) = projectors()?;
            let x0 = config
                .start
                .clone()
                .or_else(|| spec.start_point.clone())
                .unwrap_or_else(|| Array1::zeros(spec.n()));
            let mut state = HaugazeauState::new(x0);
            for k in 1..=max_iters {
                state = haugazeau_step(&state, &pi1, &pi2);
                let feas = pi1.distance(&state.x) + pi2.distance(&state.x);
                if let Some(partial) = push(&mut trace, k, None, None, feas, &state.x, k == max_iters)? {
                    return Ok(finish(StopReason::EpsilonSolution, k, trace, partial));
                }
            }
        }
    }
    let iterations = trace.last().map(|r| r.k).unwrap_or(0);
    Ok(finish(StopReason::MaxIters, iterations, trace, false))
}
