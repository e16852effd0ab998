//! The smoothing alternating minimization algorithm (SAMA) and its strongly
//! convex variants.
//!
//! One iteration alternates a smoothed `u`-prox step, a penalized
//! `v`-subproblem, and a dual ascent step, wrapped in a dual acceleration and
//! a primal weighted-averaging combination with step `tau_k = 3/(k+4)`. All
//! parameters follow closed-form schedules; nothing is tuned.
//!
//! Sign convention: the `u` step uses
//! `prox_{g/gamma}(center + gamma^{-1} A^T lambda_hat)`, the form obtained
//! from the stationarity condition of the subproblem
//! `min g(u) - <A^T lambda_hat, u> + gamma b(u, center)`. Every step is
//! verified against grid-refinement subproblem oracles in the test suite.

use std::time::Instant;

use ndarray::Array1;

use crate::error::{Error, Result};
use crate::gap::{epsilon_solution_check, GapEvaluator, Verdict};
use crate::linop::norm2;
use crate::problems::ProblemSpec;
use crate::subproblems::solve_v_subproblem;
use crate::trace::{IterateRecord, RunOutcome, StopReason, Trace};

/// Scheduled parameters for one standard-SAMA iteration `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamaParams {
    pub tau: f64,
    /// Smoothness parameter at this iterate (`gamma_k`).
    pub gamma: f64,
    /// Smoothness parameter used by the upcoming `u` step (`gamma_{k+1}`).
    pub gamma_next: f64,
    pub beta: f64,
    pub beta_next: f64,
    pub eta: f64,
}

/// Closed-form parameter schedule: `tau_k = 3/(k+4)`,
/// `gamma_{k+1} = 5 gamma1/(k+5)`,
/// `beta_k = 18 ||A||^2 (k+5) / (5 gamma1 (k+1)(k+7))`,
/// `eta_k = 5 gamma1 / (2 ||A||^2 (k+5))`.
pub fn schedule(k: usize, gamma1: f64, norm_a: f64) -> SamaParams {
    let kf = k as f64;
    let na2 = norm_a * norm_a;
    let beta_at = |kf: f64| 18.0 * na2 * (kf + 5.0) / (5.0 * gamma1 * (kf + 1.0) * (kf + 7.0));
    SamaParams {
        tau: 3.0 / (kf + 4.0),
        gamma: 5.0 * gamma1 / (kf + 4.0),
        gamma_next: 5.0 * gamma1 / (kf + 5.0),
        beta: beta_at(kf),
        beta_next: beta_at(kf + 1.0),
        eta: 5.0 * gamma1 / (2.0 * na2 * (kf + 5.0)),
    }
}

/// Update rule used by the strongly convex variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScRule {
    /// Constant penalty: `eta_k = mu/(2||A||^2)`,
    /// `beta_k = 18||A||^2/(mu (k+1)(k+7))`.
    Rule1,
    /// Decaying penalty: `eta_k = mu tau_k/||A||^2`,
    /// `beta_k = 2||A||^2/(mu (k+1))`.
    Rule2,
}

/// Scheduled parameters for one strongly convex iteration (no smoothing).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScParams {
    pub tau: f64,
    pub eta: f64,
    pub beta: f64,
    pub beta_next: f64,
}

pub fn sc_schedule(k: usize, norm_a: f64, mu: f64, rule: ScRule) -> Result<ScParams> {
    if mu <= 0.0 {
        return Err(Error::Configuration(
            "strongly convex schedule requires mu > 0".into(),
        ));
    }
    let na2 = norm_a * norm_a;
    let tau_at = |kf: f64| 3.0 / (kf + 4.0);
    let beta_at = |kf: f64| match rule {
        ScRule::Rule1 => 18.0 * na2 / (mu * (kf + 1.0) * (kf + 7.0)),
        ScRule::Rule2 => 2.0 * na2 / (mu * (kf + 1.0)),
    };
    let kf = k as f64;
    Ok(ScParams {
        tau: tau_at(kf),
        eta: match rule {
            ScRule::Rule1 => mu / (2.0 * na2),
            ScRule::Rule2 => mu * tau_at(kf) / na2,
        },
        beta: beta_at(kf),
        beta_next: beta_at(kf + 1.0),
    })
}

/// Which SAMA flavor to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamaVariant {
    Standard,
    StronglyConvex(ScRule),
}

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct SamaConfig {
    /// Initial smoothness parameter; defaults to `||A||`, which balances the
    /// worst-case objective and feasibility bounds. Smaller values favor the
    /// objective residual, larger ones the feasibility gap.
    pub gamma1: Option<f64>,
    pub variant: SamaVariant,
    /// Replace the dual-average recursion by
    /// `lambda*_{k+1} = lambda*_k + (lambda_bar_{k+1} - lambda_hat_k)/tau_k`,
    /// which accelerates the dual residual under strong convexity.
    pub dual_accel_mod: bool,
    pub max_iters: usize,
    pub eps: f64,
    pub record_gap: bool,
    /// Dual starting point; defaults to the origin (the convergence-bound
    /// checks assume that default).
    pub lambda0: Option<Array1<f64>>,
    /// Initialization overrides; validated against the admissible region.
    pub eta0: Option<f64>,
    pub beta1: Option<f64>,
    /// Record every `thin`-th iterate (the first and last are always kept).
    pub thin: usize,
}

impl Default for SamaConfig {
    fn default() -> Self {
        SamaConfig {
            gamma1: None,
            variant: SamaVariant::Standard,
            dual_accel_mod: false,
            max_iters: 1000,
            eps: 1e-6,
            record_gap: false,
            lambda0: None,
            eta0: None,
            beta1: None,
            thin: 1,
        }
    }
}

/// Parameters attached to a state, depending on the variant.
#[derive(Debug, Clone, Copy)]
pub enum StepParams {
    Standard(SamaParams),
    StronglyConvex(ScParams),
}

impl StepParams {
    pub fn tau(&self) -> f64 {
        match self {
            StepParams::Standard(p) => p.tau,
            StepParams::StronglyConvex(p) => p.tau,
        }
    }

    pub fn eta(&self) -> f64 {
        match self {
            StepParams::Standard(p) => p.eta,
            StepParams::StronglyConvex(p) => p.eta,
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            StepParams::Standard(p) => p.beta,
            StepParams::StronglyConvex(p) => p.beta,
        }
    }

    pub fn beta_next(&self) -> f64 {
        match self {
            StepParams::Standard(p) => p.beta_next,
            StepParams::StronglyConvex(p) => p.beta_next,
        }
    }
}

/// Iterate bundle after `k` iterations: primal averages, dual iterate, the
/// auxiliary dual point, and the recursively maintained constraint residual
/// `z_bar = A u_bar + B v_bar - c`.
#[derive(Debug, Clone)]
pub struct SamaState {
    pub k: usize,
    pub u_bar: Array1<f64>,
    pub v_bar: Array1<f64>,
    pub lambda_bar: Array1<f64>,
    pub lambda_star: Array1<f64>,
    pub z_bar: Array1<f64>,
    pub params: StepParams,
}

impl SamaState {
    pub fn feasibility_gap(&self) -> f64 {
        norm2(&self.z_bar)
    }
}

/// A finished run.
#[derive(Debug)]
pub struct SamaRun {
    pub state: SamaState,
    pub trace: Trace,
    pub outcome: RunOutcome,
}

pub struct SamaSolver<'a> {
    pub problem: &'a ProblemSpec,
    pub config: SamaConfig,
    norm_a: f64,
    gamma1: f64,
    mu: f64,
}

impl<'a> SamaSolver<'a> {
    pub fn new(problem: &'a ProblemSpec, config: SamaConfig) -> Result<Self> {
        let norm_a = problem.norm_a();
        if norm_a <= 0.0 {
            return Err(Error::Configuration(
                "operator A must have positive norm".into(),
            ));
        }
        let gamma1 = config.gamma1.unwrap_or(norm_a);
        if gamma1 <= 0.0 {
            return Err(Error::Configuration("gamma1 must be positive".into()));
        }
        if config.thin == 0 {
            return Err(Error::Configuration("thin must be >= 1".into()));
        }
        let mu = problem.g.strong_convexity();
        if matches!(config.variant, SamaVariant::StronglyConvex(_)) && mu <= 0.0 {
            return Err(Error::Configuration(
                "strongly convex variants require g with positive strong convexity".into(),
            ));
        }
        if !problem.b.is_orthonormal() && problem.v_solver.is_none() {
            return Err(Error::MissingCapability(
                "B is not orthonormal and no v-subproblem solver was supplied".into(),
            ));
        }
        Ok(SamaSolver {
            problem,
            config,
            norm_a,
            gamma1,
            mu,
        })
    }

    pub fn norm_a(&self) -> f64 {
        self.norm_a
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    fn params_at(&self, k: usize) -> Result<StepParams> {
        Ok(match self.config.variant {
            SamaVariant::Standard => StepParams::Standard(schedule(k, self.gamma1, self.norm_a)),
            SamaVariant::StronglyConvex(rule) => {
                StepParams::StronglyConvex(sc_schedule(k, self.norm_a, self.mu, rule)?)
            }
        })
    }

    /// Default `eta_0` for the configured variant.
    fn eta0(&self) -> Result<f64> {
        if let Some(e) = self.config.eta0 {
            if e <= 0.0 {
                return Err(Error::Configuration("eta0 must be positive".into()));
            }
            return Ok(e);
        }
        Ok(match self.config.variant {
            SamaVariant::Standard => self.gamma1 / (2.0 * self.norm_a * self.norm_a),
            SamaVariant::StronglyConvex(ScRule::Rule1) => {
                self.mu / (2.0 * self.norm_a * self.norm_a)
            }
            SamaVariant::StronglyConvex(ScRule::Rule2) => {
                // eta_0 of the rule evaluated at k = 0 (tau_0 = 3/4).
                self.mu * 0.75 / (self.norm_a * self.norm_a)
            }
        })
    }

    fn beta1(&self) -> Result<f64> {
        if let Some(b) = self.config.beta1 {
            if b <= 0.0 {
                return Err(Error::Configuration("beta1 must be positive".into()));
            }
            return Ok(b);
        }
        Ok(self.params_at(1)?.beta())
    }

    /// Builds the first iterate from `lambda0` via one smoothed prox step,
    /// one penalized `v` step, and one dual update.
    pub fn init(&self) -> Result<SamaState> {
        let p = self.problem;
        let lambda0 = match &self.config.lambda0 {
            Some(l) => {
                if l.len() != p.n() {
                    return Err(Error::DimensionMismatch {
                        context: "lambda0",
                        expected: p.n(),
                        got: l.len(),
                    });
                }
                l.clone()
            }
            None => Array1::zeros(p.n()),
        };
        let eta0 = self.eta0()?;
        let beta1 = self.beta1()?;
        self.validate_init(eta0, beta1)?;

        let at_lambda = p.a.apply_adjoint(&lambda0)?;
        let u1 = match self.config.variant {
            SamaVariant::Standard => {
                let arg = &p.center + &(&at_lambda / self.gamma1);
                p.g.prox(1.0 / self.gamma1, &arg)?
            }
            SamaVariant::StronglyConvex(_) => p.g.tilted_argmin(&at_lambda)?,
        };
        let a_u = p.a.apply(&u1)?;
        let v1 = solve_v_subproblem(p, eta0, &lambda0, &a_u)?;
        let b_v = p.b.apply(&v1)?;
        let z1 = &a_u + &b_v - &p.c;
        let lambda_bar = &lambda0 - &(&z1 * eta0);
        let lambda_star = &z1 * (-1.0 / beta1);
        Ok(SamaState {
            k: 1,
            u_bar: u1,
            v_bar: v1,
            lambda_bar,
            lambda_star,
            z_bar: z1,
            params: self.params_at(1)?,
        })
    }

    fn validate_init(&self, eta0: f64, beta1: f64) -> Result<()> {
        match self.config.variant {
            SamaVariant::Standard => {
                let na2 = self.norm_a * self.norm_a;
                let slack = 5.0 * self.gamma1 - 2.0 * eta0 * na2;
                if slack <= 0.0 {
                    return Err(Error::Configuration(format!(
                        "initialization requires 5*gamma1 > 2*eta0*||A||^2 \
                         (got 5*{} <= 2*{eta0}*{na2})",
                        self.gamma1
                    )));
                }
                let beta_min = 2.0 * self.gamma1 / (slack * eta0);
                if beta1 < beta_min * (1.0 - 1e-12) {
                    return Err(Error::Configuration(format!(
                        "initialization requires beta1 >= 2*gamma1/((5*gamma1 - 2*eta0*||A||^2)*eta0) \
                         = {beta_min}, got {beta1}"
                    )));
                }
            }
            SamaVariant::StronglyConvex(_) => {
                let na2 = self.norm_a * self.norm_a;
                let cap = 2.5 * eta0 - na2 * eta0 * eta0 / self.mu;
                if cap <= 0.0 || 1.0 / beta1 > cap * (1.0 + 1e-12) {
                    return Err(Error::Configuration(format!(
                        "initialization requires 1/beta1 <= 5*eta0/2 - ||A||^2*eta0^2/mu \
                         (= {cap}), got beta1 = {beta1}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Advances the state by one iteration.
    pub fn step(&self, state: &mut SamaState) -> Result<()> {
        let p = self.problem;
        let params = self.params_at(state.k)?;
        let tau = params.tau();
        let eta = params.eta();

        // Dual acceleration.
        let lambda_hat = &(&state.lambda_bar * (1.0 - tau)) + &(&state.lambda_star * tau);

        // u step: smoothed prox or tilted argmin.
        let at_lambda = p.a.apply_adjoint(&lambda_hat)?;
        let u_hat = match params {
            StepParams::Standard(sp) => {
                let arg = &p.center + &(&at_lambda / sp.gamma_next);
                p.g.prox(1.0 / sp.gamma_next, &arg)?
            }
            StepParams::StronglyConvex(_) => p.g.tilted_argmin(&at_lambda)?,
        };
        let a_u = p.a.apply(&u_hat)?;

        // v step with the same penalty eta.
        let v_hat = solve_v_subproblem(p, eta, &lambda_hat, &a_u)?;
        let b_v = p.b.apply(&v_hat)?;
        let z_hat = &a_u + &b_v - &p.c;

        // Dual ascent.
        let lambda_next = &lambda_hat - &(&z_hat * eta);

        // Auxiliary dual point: recursive form of beta^{-1}(c - A u_bar - B v_bar),
        // or the acceleration modification.
        let diff = &lambda_next - &lambda_hat;
        state.lambda_star = if self.config.dual_accel_mod {
            &state.lambda_star + &(&diff / tau)
        } else {
            (&(&state.lambda_star * ((1.0 - tau) * params.beta())) + &(&diff * (tau / eta)))
                / params.beta_next()
        };

        // Weighted averaging of the primal pair and the carried residual.
        state.u_bar = &(&state.u_bar * (1.0 - tau)) + &(&u_hat * tau);
        state.v_bar = &(&state.v_bar * (1.0 - tau)) + &(&v_hat * tau);
        state.z_bar = &(&state.z_bar * (1.0 - tau)) + &(&z_hat * tau);
        state.lambda_bar = lambda_next;
        state.k += 1;
        state.params = self.params_at(state.k)?;
        Ok(())
    }

    /// Runs until the epsilon-solution check passes on every computable
    /// component or `max_iters` is reached, recording the trace.
    pub fn run(&self) -> Result<SamaRun> {
        let started = Instant::now();
        let mut state = self.init()?;
        let mut trace = Trace::default();
        let gap_eval = if self.config.record_gap {
            GapEvaluator::new(self.problem).ok()
        } else {
            None
        };
        let d_f = self.problem.df_or_estimate();
        let mut prev_gap: Option<f64> = None;
        let mut partial = false;

        loop {
            let mut rec = self.make_record(&state, &gap_eval, d_f, &mut prev_gap)?;
            rec.wall_time_ns = started.elapsed().as_nanos() as u64;
            let (pv, fv, dv) = epsilon_solution_check(&rec, self.config.eps);
            let verdicts = [pv, fv, dv];
            let stop_eps = !verdicts.contains(&Verdict::Fail);
            let is_last = stop_eps || state.k >= self.config.max_iters;
            if (state.k - 1) % self.config.thin == 0 || is_last {
                trace.push(rec);
            }
            if stop_eps {
                partial = verdicts.contains(&Verdict::Unknown);
                return Ok(SamaRun {
                    outcome: RunOutcome {
                        stop: StopReason::EpsilonSolution,
                        iterations: state.k,
                        partial_check: partial,
                    },
                    state,
                    trace,
                });
            }
            if state.k >= self.config.max_iters {
                return Ok(SamaRun {
                    outcome: RunOutcome {
                        stop: StopReason::MaxIters,
                        iterations: state.k,
                        partial_check: partial,
                    },
                    state,
                    trace,
                });
            }
            self.step(&mut state)?;
        }
    }

    fn make_record(
        &self,
        state: &SamaState,
        gap_eval: &Option<GapEvaluator>,
        d_f: Option<f64>,
        prev_gap: &mut Option<f64>,
    ) -> Result<IterateRecord> {
        let p = self.problem;
        let mut rec = IterateRecord::new(state.k);
        rec.feasibility_gap = state.feasibility_gap();

        if let Some(reference) = &p.reference {
            let f = p.objective(&state.u_bar, &state.v_bar)?;
            rec.primal_obj_residual = Some(f - reference.f_star);
            if p.is_gap_capable() {
                let d = p.dual_objective(&state.lambda_bar)?;
                rec.dual_obj_residual = Some(d - reference.d_star());
            }
            self.record_bounds(&mut rec, state.k, reference, d_f);
        }

        if let Some(ge) = gap_eval {
            let gap = match state.params {
                StepParams::Standard(sp) => {
                    ge.smoothed_gap(&state.u_bar, &state.v_bar, &state.lambda_bar, sp.gamma, sp.beta)?
                }
                StepParams::StronglyConvex(sp) => {
                    ge.exact_gap(&state.u_bar, &state.v_bar, &state.lambda_bar, sp.beta)?
                }
            };
            rec.smoothed_gap = Some(gap.value);
            if state.k > 1 {
                if let (Some(prev), Some(df)) = (*prev_gap, d_f) {
                    // Gap-reduction inequality for the step k-1 -> k; the
                    // additive term is eta tau^2 D_f^2 / 4 for both the
                    // standard and the strongly convex schedules.
                    let prior = self.params_at(state.k - 1)?;
                    let (tau, eta) = (prior.tau(), prior.eta());
                    rec.gap_red_lhs = Some(gap.value);
                    rec.gap_red_rhs = Some((1.0 - tau) * prev + eta * tau * tau / 4.0 * df * df);
                }
            }
            *prev_gap = Some(gap.value);
        }
        Ok(rec)
    }

    fn record_bounds(
        &self,
        rec: &mut IterateRecord,
        k: usize,
        reference: &crate::problems::ReferenceSolution,
        d_f: Option<f64>,
    ) {
        let (lambda_norm, d_f) = match (reference.lambda_star_norm(), d_f) {
            (Some(l), Some(d)) => (l, d),
            _ => return, // bound reporting is partial without reference data
        };
        let dist_center = norm2(&(&self.problem.center - &reference.u_star));
        match self.config.variant {
            SamaVariant::Standard => {
                let (bp, bf, bd) =
                    sama_worst_case_bounds(k, self.gamma1, self.norm_a, dist_center, lambda_norm, d_f);
                rec.bound_primal = Some(bp);
                rec.bound_feas = Some(bf);
                rec.bound_dual = Some(bd);
            }
            SamaVariant::StronglyConvex(rule) => {
                let (bp, bf) = sc_worst_case_bounds(k, rule, self.mu, self.norm_a, lambda_norm, d_f);
                rec.bound_primal = Some(bp);
                rec.bound_feas = Some(bf);
            }
        }
    }
}

/// Worst-case bounds of the standard schedule at iteration `k`:
/// objective residual, feasibility gap, and dual objective residual.
pub fn sama_worst_case_bounds(
    k: usize,
    gamma1: f64,
    norm_a: f64,
    dist_center: f64,
    lambda_norm: f64,
    d_f: f64,
) -> (f64, f64, f64) {
    let kf = k as f64;
    let na2 = norm_a * norm_a;
    let r2 = dist_center * dist_center / 2.0;
    let primal = 5.0 * gamma1 / (kf + 4.0) * (r2 + 9.0 * d_f * d_f / (8.0 * na2 * (kf + 3.0)));
    let root = (r2 + 9.0 * d_f * d_f / (8.0 * na2 * (kf + 7.0))).sqrt();
    let feas = 36.0 * na2 * lambda_norm / (5.0 * gamma1 * (kf + 1.0))
        + 6.0 * norm_a / (kf + 1.0) * root;
    let dual = 36.0 * na2 * lambda_norm * lambda_norm / (5.0 * gamma1 * (kf + 1.0))
        + 6.0 * norm_a * lambda_norm / (kf + 1.0) * root
        + primal;
    (primal, feas, dual)
}

/// Worst-case bounds of the strongly convex rules at iteration `k`:
/// objective residual and feasibility gap.
pub fn sc_worst_case_bounds(
    k: usize,
    rule: ScRule,
    mu: f64,
    norm_a: f64,
    lambda_norm: f64,
    d_f: f64,
) -> (f64, f64) {
    let kf = k as f64;
    let na2 = norm_a * norm_a;
    match rule {
        ScRule::Rule1 => {
            let primal = 9.0 * mu * d_f * d_f / (16.0 * na2 * (kf + 3.0));
            let feas = 36.0 * na2 * lambda_norm / (mu * (kf + 1.0) * (kf + 7.0))
                + 9.0 * d_f / (2.0 * ((kf + 1.0) * (kf + 3.0) * (kf + 7.0)).sqrt());
            (primal, feas)
        }
        ScRule::Rule2 => {
            let primal = 27.0 * mu * d_f * d_f / (4.0 * na2 * (kf + 3.0) * (kf + 3.0));
            let feas = 4.0 * na2 * lambda_norm / (mu * (kf + 1.0))
                + 3.0 * 3.0_f64.sqrt() / (kf + 3.0) * d_f / (kf + 1.0).sqrt();
            (primal, feas)
        }
    }
}

/// Primal-dual gap guarantee of the strongly convex rules:
/// `G(w_k) + (1/(2 beta_k)) ||A u_k + B v_k - c||^2 <= 9 mu / (4 ||A||^2 (k+3))`.
pub fn sc_gap_bound(k: usize, mu: f64, norm_a: f64) -> f64 {
    9.0 * mu / (4.0 * norm_a * norm_a * (k as f64 + 3.0))
}
