//! Solvers for linearly constrained convex programs
//! `min g(u) + h(v)  s.t.  A u + B v = c`
//! built around smoothing the primal-dual gap function.
//!
//! The crate provides:
//!
//! - smoothing alternating-direction methods (SAMA and SADMM) with fully
//!   automatic parameter schedules, plus strongly convex SAMA variants;
//! - classical baselines: ADMM, AMA, the parameter-free feasibility ADMM,
//!   Douglas-Rachford splitting with iterate recovery, Dykstra's alternating
//!   projections, and Haugazeau's method;
//! - a smoothed primal-dual gap diagnostic and per-iteration verification of
//!   the solvers' convergence bounds, gap-reduction inequalities, and
//!   parameter-schedule conditions;
//! - built-in problem families (half-plane feasibility, composite
//!   reformulations, box-constrained LPs) with brute-force reference
//!   solutions for bound checking.

pub mod baselines;
pub mod convex;
pub mod error;
pub mod gap;
pub mod linop;
pub mod oracle;
pub mod problems;
pub mod sadmm;
pub mod sama;
pub mod schedule_check;
mod subproblems;
pub mod trace;

pub use convex::{BregmanDistance, FnKind, ProjSet, ProperConvexFn};
pub use error::{Error, Result};
pub use gap::{GapEvaluator, SolutionBounds};
pub use linop::{LinearMap, MapKind, OpCounts};
pub use problems::{ProblemSpec, ReferenceSolution};
pub use trace::{IterateRecord, RunOutcome, StopReason, Trace};
