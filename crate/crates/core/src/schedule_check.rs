//! Validators for the parameter-schedule conditions that the gap-reduction
//! guarantees require.
//!
//! Each solver's schedule was derived to satisfy a set of per-iteration
//! inequalities; this module re-substitutes the closed forms and reports the
//! first numerical violation over a `k` range. The SADMM checker also
//! documents that the half-sized `beta_k` variant (`paper_beta`) breaks the
//! first condition at every `k` by a factor of 2.

use crate::error::{Error, Result};
use crate::sadmm;
use crate::sama::{self, ScRule};

/// Which schedule to validate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    Sama,
    ScRule1,
    ScRule2,
    Sadmm { paper_beta: bool },
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub k: usize,
    pub condition: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct ScheduleReport {
    pub kind: ScheduleKind,
    pub checked_up_to: usize,
    pub violation: Option<Violation>,
}

impl ScheduleReport {
    pub fn ok(&self) -> bool {
        self.violation.is_none()
    }
}

/// Relative slack for conditions that hold with equality by construction.
const SLACK: f64 = 1e-9;

fn geq(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs - SLACK * rhs.abs().max(1.0)
}

fn eq(lhs: f64, rhs: f64) -> bool {
    (lhs - rhs).abs() <= SLACK * rhs.abs().max(1.0)
}

/// Substitutes the schedule into its conditions for `k = 1..=k_max` and
/// reports the first violation. `l_b` is the gradient Lipschitz constant of
/// the Bregman kind (1 for squared Euclidean); `mu` is required by the
/// strongly convex rules.
pub fn check_schedule(
    kind: ScheduleKind,
    k_max: usize,
    gamma1: f64,
    norm_a: f64,
    mu: f64,
    l_b: f64,
) -> Result<ScheduleReport> {
    if gamma1 <= 0.0 || norm_a <= 0.0 || l_b < 1.0 {
        return Err(Error::InvalidParameter(
            "schedule check needs gamma1 > 0, ||A|| > 0, L_b >= 1".into(),
        ));
    }
    let na2 = norm_a * norm_a;
    let mut violation = None;

    'outer: for k in 1..=k_max {
        let checks: Vec<(&'static str, f64, f64, bool)> = match kind {
            ScheduleKind::Sama => {
                let p = sama::schedule(k, gamma1, norm_a);
                vec![
                    (
                        "(1 + tau/L_b) * gamma_{k+1} >= gamma_k",
                        (1.0 + p.tau / l_b) * p.gamma_next,
                        p.gamma,
                        false,
                    ),
                    (
                        "beta_{k+1} >= (1 - tau) * beta_k",
                        p.beta_next,
                        (1.0 - p.tau) * p.beta,
                        false,
                    ),
                    (
                        "(1 - tau^2) * gamma_{k+1} * beta_k >= 2 ||A||^2 tau^2",
                        (1.0 - p.tau * p.tau) * p.gamma_next * p.beta,
                        2.0 * na2 * p.tau * p.tau,
                        false,
                    ),
                    (
                        "2 ||A||^2 eta_k = gamma_{k+1}",
                        2.0 * na2 * p.eta,
                        p.gamma_next,
                        true,
                    ),
                ]
            }
            ScheduleKind::ScRule1 | ScheduleKind::ScRule2 => {
                let rule = if kind == ScheduleKind::ScRule1 {
                    ScRule::Rule1
                } else {
                    ScRule::Rule2
                };
                let p = sama::sc_schedule(k, norm_a, mu, rule)?;
                vec![
                    (
                        "beta_{k+1} >= (1 - tau) * beta_k",
                        p.beta_next,
                        (1.0 - p.tau) * p.beta,
                        false,
                    ),
                    (
                        "eta*(3/2 + tau - ||A||^2 eta / mu) >= tau^2 / ((1 - tau) beta)",
                        p.eta * (1.5 + p.tau - na2 * p.eta / mu),
                        p.tau * p.tau / ((1.0 - p.tau) * p.beta),
                        false,
                    ),
                ]
            }
            ScheduleKind::Sadmm { paper_beta } => {
                let p = sadmm::schedule(k, gamma1, norm_a, paper_beta);
                vec![
                    (
                        "(1 - tau)(1 + 2 tau) eta_k beta_k >= 2 tau^2",
                        (1.0 - p.tau) * (1.0 + 2.0 * p.tau) * p.eta * p.beta,
                        2.0 * p.tau * p.tau,
                        false,
                    ),
                    (
                        "gamma_{k+1} >= (3 - 2 tau)/(3 - (2 - 1/L_b) tau) * gamma_k",
                        p.gamma_next,
                        (3.0 - 2.0 * p.tau) / (3.0 - (2.0 - 1.0 / l_b) * p.tau) * p.gamma,
                        false,
                    ),
                    (
                        "beta_{k+1} >= (1 - tau) * beta_k",
                        p.beta_next,
                        (1.0 - p.tau) * p.beta,
                        false,
                    ),
                    (
                        "gamma_{k+1} >= ||A||^2 (eta_k + rho_k / tau_k)",
                        p.gamma_next,
                        na2 * (p.eta + p.rho / p.tau),
                        false,
                    ),
                ]
            }
        };
        for (name, lhs, rhs, exact) in checks {
            let holds = if exact { eq(lhs, rhs) } else { geq(lhs, rhs) };
            if !holds {
                violation = Some(Violation {
                    k,
                    condition: name,
                    lhs,
                    rhs,
                });
                break 'outer;
            }
        }
    }

    Ok(ScheduleReport {
        kind,
        checked_up_to: k_max,
        violation,
    })
}
