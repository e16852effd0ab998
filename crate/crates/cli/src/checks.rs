//! The `check` subcommand: schedule conditions, per-iterate bound
//! verification, and gap-reduction verification.

use anyhow::{bail, Result};

use splitgap::schedule_check::{check_schedule, ScheduleKind};
use splitgap::trace::Trace;

use crate::config::{Algo, RunConfig};
use crate::runner;

pub struct CheckOutcome {
    pub ok: bool,
    pub summary: String,
}

pub fn schedule(
    algo: Algo,
    k_max: usize,
    gamma1: f64,
    norm_a: f64,
    mu: f64,
    l_b: f64,
    paper_beta: bool,
) -> Result<CheckOutcome> {
    let kind = match algo {
        Algo::Sama => ScheduleKind::Sama,
        Algo::SamaSc1 => ScheduleKind::ScRule1,
        Algo::SamaSc2 => ScheduleKind::ScRule2,
        Algo::Sadmm => ScheduleKind::Sadmm { paper_beta },
        other => bail!(
            "`check schedule` applies to the scheduled solvers (sama, sadmm, sama-sc1, sama-sc2), got {}",
            other.name()
        ),
    };
    let report = check_schedule(kind, k_max, gamma1, norm_a, mu, l_b)?;
    Ok(match report.violation {
        None => CheckOutcome {
            ok: true,
            summary: format!(
                "schedule {:?}: all conditions hold for k = 1..{}",
                kind, report.checked_up_to
            ),
        },
        Some(v) => CheckOutcome {
            ok: false,
            summary: format!(
                "schedule {:?}: condition `{}` violated at k = {} (lhs {:.6e} < rhs {:.6e})",
                kind, v.condition, v.k, v.lhs, v.rhs
            ),
        },
    })
}

/// Relative slack allowed when asserting recorded bounds.
const BOUND_SLACK: f64 = 1e-8;

fn worst_ratio(trace: &Trace, value: impl Fn(&splitgap::IterateRecord) -> Option<(f64, f64)>) -> Option<f64> {
    let mut worst: Option<f64> = None;
    for r in &trace.records {
        if let Some((v, bound)) = value(r) {
            let slack = (v - bound) / bound.abs().max(1e-300);
            worst = Some(worst.map_or(slack, |w: f64| w.max(slack)));
        }
    }
    worst
}

pub fn bounds(config: &RunConfig) -> Result<CheckOutcome> {
    let mut config = config.clone();
    config.thin = 1; // bound checks run on every iterate
    let result = runner::run(&config)?;
    let trace = &result.trace;
    if trace
        .records
        .iter()
        .all(|r| r.bound_primal.is_none() && r.bound_feas.is_none())
    {
        bail!(
            "the problem carries no reference data (u*, lambda*, D_f); bound checking needs a \
             gap-capable instance such as box-lp or sc-quad"
        );
    }
    let wp = worst_ratio(trace, |r| Some((r.primal_obj_residual?, r.bound_primal?)));
    let wf = worst_ratio(trace, |r| Some((r.feasibility_gap, r.bound_feas?)));
    let wd = worst_ratio(trace, |r| Some((r.dual_obj_residual?, r.bound_dual?)));
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, w) in [("primal", wp), ("feasibility", wf), ("dual", wd)] {
        match w {
            Some(w) => {
                if w > BOUND_SLACK {
                    ok = false;
                }
                parts.push(format!("{name} max slack {w:+.3e}"));
            }
            None => parts.push(format!("{name} not checked")),
        }
    }
    Ok(CheckOutcome {
        ok,
        summary: format!(
            "bounds over {} iterates: {} -> {}",
            trace.len(),
            parts.join(", "),
            if ok { "pass" } else { "VIOLATED" }
        ),
    })
}

pub fn gap_reduction(config: &RunConfig) -> Result<CheckOutcome> {
    let mut config = config.clone();
    config.record_gap = true;
    config.thin = 1;
    let result = runner::run(&config)?;
    let trace = &result.trace;
    let mut checked = 0usize;
    let mut worst: f64 = f64::NEG_INFINITY;
    for r in &trace.records {
        if let (Some(lhs), Some(rhs)) = (r.gap_red_lhs, r.gap_red_rhs) {
            checked += 1;
            worst = worst.max((lhs - rhs) / (1.0 + lhs.abs()));
        }
    }
    if checked == 0 {
        bail!(
            "no gap-reduction data recorded; the instance must carry exact conjugates and a \
             finite D_f (try box-lp or sc-quad)"
        );
    }
    let ok = worst <= BOUND_SLACK;
    Ok(CheckOutcome {
        ok,
        summary: format!(
            "gap reduction over {checked} transitions: max normalized excess {worst:+.3e} -> {}",
            if ok { "pass" } else { "VIOLATED" }
        ),
    })
}
