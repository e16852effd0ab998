//! Per-iteration records, run outcomes, and trace analysis helpers.

/// Metrics recorded at one iteration. Optional fields are absent when the
/// problem lacks the data to compute them (no reference solution, no
/// conjugates, gap reporting disabled).
#[derive(Debug, Clone)]
pub struct IterateRecord {
    pub k: usize,
    /// `f(x_k) - f*`; `+inf` when the iterate is outside `dom f`.
    pub primal_obj_residual: Option<f64>,
    /// `||A u_k + B v_k - c||`.
    pub feasibility_gap: f64,
    /// `d(lambda_k) - d*`.
    pub dual_obj_residual: Option<f64>,
    /// The smoothed gap at the iterate's own parameters.
    pub smoothed_gap: Option<f64>,
    pub bound_primal: Option<f64>,
    pub bound_feas: Option<f64>,
    pub bound_dual: Option<f64>,
    pub gap_red_lhs: Option<f64>,
    pub gap_red_rhs: Option<f64>,
    pub wall_time_ns: u64,
}

impl IterateRecord {
    pub fn new(k: usize) -> Self {
        IterateRecord {
            k,
            primal_obj_residual: None,
            feasibility_gap: 0.0,
            dual_obj_residual: None,
            smoothed_gap: None,
            bound_primal: None,
            bound_feas: None,
            bound_dual: None,
            gap_red_lhs: None,
            gap_red_rhs: None,
            wall_time_ns: 0,
        }
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// All computable epsilon-solution components passed.
    EpsilonSolution,
    MaxIters,
}

/// Final summary of a solver run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub stop: StopReason,
    pub iterations: usize,
    /// Whether the epsilon check ran with some components unknown.
    pub partial_check: bool,
}

/// An ordered list of per-iteration records.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub records: Vec<IterateRecord>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterateRecord> {
        self.records.last()
    }

    pub fn push(&mut self, rec: IterateRecord) {
        debug_assert!(
            self.records.last().map_or(true, |r| rec.k > r.k),
            "iteration counter must be strictly increasing"
        );
        self.records.push(rec);
    }

    /// Least-squares slope of `log y` against `log k` over `k` in
    /// `[k_lo, k_hi]`, using `select` to pick the metric. Non-positive
    /// values are skipped; `None` when fewer than two usable points remain.
    pub fn loglog_slope(
        &self,
        k_lo: usize,
        k_hi: usize,
        select: impl Fn(&IterateRecord) -> Option<f64>,
    ) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .records
            .iter()
            .filter(|r| r.k >= k_lo && r.k <= k_hi)
            .filter_map(|r| {
                let y = select(r)?;
                if y > 0.0 && y.is_finite() {
                    Some(((r.k as f64).ln(), y.ln()))
                } else {
                    None
                }
            })
            .collect();
        fit_slope(&pts)
    }
}

/// Slope of the least-squares line through `(x, y)` points.
pub fn fit_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_inverse_k_is_minus_one() {
        let mut trace = Trace::default();
        for k in 1..=1000 {
            let mut r = IterateRecord::new(k);
            r.dual_obj_residual = Some(1.0 / k as f64);
            trace.push(r);
        }
        let slope = trace
            .loglog_slope(100, 1000, |r| r.dual_obj_residual)
            .unwrap();
        assert!((slope + 1.0).abs() < 1e-9, "slope {slope}");
    }

    #[test]
    fn slope_skips_nonpositive_and_requires_two_points() {
        let mut trace = Trace::default();
        for k in 1..=10 {
            let mut r = IterateRecord::new(k);
            r.dual_obj_residual = Some(0.0);
            trace.push(r);
        }
        assert!(trace.loglog_slope(1, 10, |r| r.dual_obj_residual).is_none());
    }
}
