//! Builds problem instances from configuration and drives the solvers.

use anyhow::{anyhow, Context, Result};
use ndarray::Array1;

use splitgap::baselines::{run_baseline, BaselineConfig, BaselineMethod};
use splitgap::convex::ProjSet;
use splitgap::problems::{
    build_box_lp, build_composite, build_cone_projection, build_feasibility_instance,
    BoxLpOptions, ConeProjectionOptions, ProblemSpec,
};
use splitgap::sadmm::{SadmmConfig, SadmmSolver};
use splitgap::sama::{SamaConfig, SamaSolver, SamaVariant, ScRule};
use splitgap::trace::{RunOutcome, Trace};
use splitgap::{LinearMap, ProperConvexFn};

use crate::config::{Algo, ProblemKind, ProblemSettings, RunConfig};

pub struct RunResult {
    pub trace: Trace,
    pub outcome: RunOutcome,
}

pub fn build_problem(settings: &ProblemSettings) -> Result<ProblemSpec> {
    match settings.kind {
        ProblemKind::Feasibility => {
            build_feasibility_instance(settings.n, settings.angle, settings.radius)
                .map_err(|e| anyhow!(e))
        }
        ProblemKind::BoxLp => {
            build_box_lp(&BoxLpOptions::random(settings.dim, settings.seed)).map_err(|e| anyhow!(e))
        }
        ProblemKind::ScQuad => {
            let mut opts = ConeProjectionOptions::default_2d(settings.mu);
            opts.dim = 2;
            build_cone_projection(&opts).map_err(|e| anyhow!(e))
        }
        ProblemKind::CompositeL1 => {
            // l1/l1 composite toy: both blocks are the support function of
            // the unit box (the l1 norm), coupled by a fixed well-conditioned
            // map; reformulated as A = F, B = -I, c = y.
            let dim = settings.dim.max(2);
            let l1 = |d: usize| {
                ProperConvexFn::support_of(ProjSet::Box {
                    lo: Array1::from_elem(d, -1.0),
                    hi: Array1::from_elem(d, 1.0),
                })
            };
            let f = LinearMap::dense(ndarray::Array2::from_shape_fn((dim, dim), |(i, j)| {
                if i == j {
                    1.0
                } else if j + 1 == i {
                    0.5
                } else {
                    0.0
                }
            }));
            let y = Array1::from_shape_fn(dim, |i| 0.5 + 0.25 * i as f64);
            build_composite(l1(dim), l1(dim), f, y, Array1::zeros(dim)).map_err(|e| anyhow!(e))
        }
    }
}

/// The benchmark start point for a problem (all-ones on feasibility
/// instances, the dual origin otherwise).
fn start_point(spec: &ProblemSpec, settings: &ProblemSettings) -> Option<Array1<f64>> {
    match settings.kind {
        ProblemKind::Feasibility => spec.start_point.clone(),
        _ => None,
    }
}

pub fn run(config: &RunConfig) -> Result<RunResult> {
    let spec = build_problem(&config.problem)?;
    run_on(&spec, config)
}

pub fn run_on(spec: &ProblemSpec, config: &RunConfig) -> Result<RunResult> {
    let start = start_point(spec, &config.problem);
    match config.algo {
        Algo::Sama | Algo::SamaSc1 | Algo::SamaSc2 => {
            let variant = match config.algo {
                Algo::Sama => SamaVariant::Standard,
                Algo::SamaSc1 => SamaVariant::StronglyConvex(ScRule::Rule1),
                _ => SamaVariant::StronglyConvex(ScRule::Rule2),
            };
            let solver = SamaSolver::new(
                spec,
                SamaConfig {
                    gamma1: config.gamma1,
                    variant,
                    max_iters: config.max_iters,
                    eps: config.eps,
                    record_gap: config.record_gap,
                    lambda0: start,
                    thin: config.thin,
                    ..SamaConfig::default()
                },
            )
            .context("configuring the solver")?;
            let run = solver.run().context("running the solver")?;
            Ok(RunResult {
                trace: run.trace,
                outcome: run.outcome,
            })
        }
        Algo::Sadmm => {
            let solver = SadmmSolver::new(
                spec,
                SadmmConfig {
                    gamma1: config.gamma1,
                    paper_beta: config.paper_beta,
                    max_iters: config.max_iters,
                    eps: config.eps,
                    record_gap: config.record_gap,
                    lambda0: start,
                    thin: config.thin,
                    ..SadmmConfig::default()
                },
            )
            .context("configuring the solver")?;
            let run = solver.run().context("running the solver")?;
            Ok(RunResult {
                trace: run.trace,
                outcome: run.outcome,
            })
        }
        Algo::Ama | Algo::Admm | Algo::Dr | Algo::AdmmFeas | Algo::Dykstra | Algo::Haugazeau => {
            let method = match config.algo {
                Algo::Ama => BaselineMethod::Ama { rho: config.rho },
                Algo::Admm => BaselineMethod::Admm { rho: config.rho },
                Algo::Dr => BaselineMethod::DouglasRachford,
                Algo::AdmmFeas => BaselineMethod::AdmmFeasibility,
                Algo::Dykstra => BaselineMethod::Dykstra,
                _ => BaselineMethod::Haugazeau,
            };
            let mut bconfig = BaselineConfig::new(method);
            bconfig.max_iters = config.max_iters;
            bconfig.eps = config.eps;
            bconfig.thin = config.thin;
            bconfig.start = start;
            let run = run_baseline(spec, &bconfig).context("running the baseline")?;
            Ok(RunResult {
                trace: run.trace,
                outcome: run.outcome,
            })
        }
    }
}
