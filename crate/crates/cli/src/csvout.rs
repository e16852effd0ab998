//! Trace serialization: the fixed-header CSV format, written atomically.

use anyhow::{Context, Result};
use std::io::Write;
use std::path::Path;

use splitgap::trace::Trace;

pub const HEADER: &str = "k,primal_obj_residual,feasibility_gap,dual_obj_residual,smoothed_gap,\
bound_primal,bound_feas,bound_dual,gap_red_lhs,gap_red_rhs,wall_time_ns";

fn field(v: Option<f64>) -> String {
    match v {
        Some(x) if x == f64::INFINITY => "inf".to_string(),
        Some(x) if x == f64::NEG_INFINITY => "-inf".to_string(),
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

pub fn to_csv(trace: &Trace) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in &trace.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.k,
            field(r.primal_obj_residual),
            field(Some(r.feasibility_gap)),
            field(r.dual_obj_residual),
            field(r.smoothed_gap),
            field(r.bound_primal),
            field(r.bound_feas),
            field(r.bound_dual),
            field(r.gap_red_lhs),
            field(r.gap_red_rhs),
            r.wall_time_ns,
        ));
    }
    out
}

/// Writes the trace to `path` atomically (temp file + rename).
pub fn write_csv(trace: &Trace, path: &Path) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
    }
    let tmp = path.with_extension("csv.tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(to_csv(trace).as_bytes())
            .with_context(|| format!("writing {}", tmp.display()))?;
        f.flush()?;
    }
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming {} into place", path.display()))?;
    Ok(())
}
