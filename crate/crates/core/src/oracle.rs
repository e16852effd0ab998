//! Brute-force reference solver for small instances.
//!
//! `solve_small` parameterizes the affine feasible set `{A u + B v = c}`,
//! grid-searches the bounded domain, refines by cyclic golden-section, and
//! (for affine objectives over boxes) polishes with exact basic-solution
//! enumeration. The dual multiplier is recovered by least squares on the
//! active subdifferential equalities and validated against both inclusions
//! of the optimality system.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::linop::{norm2, LinearMap};
use crate::problems::{ProblemSpec, Provenance, ReferenceSolution};

/// Tolerance for accepting a recovered multiplier.
const LAMBDA_TOL: f64 = 1e-6;

/// Brute-force solve of a small instance (total primal dim <= 6).
pub fn solve_small(spec: &ProblemSpec, grid_resolution: usize) -> Result<ReferenceSolution> {
    let p1 = spec.p1();
    let p2 = spec.p2();
    let p = p1 + p2;
    let n = spec.n();
    if p > 6 {
        return Err(Error::Unsupported(
            "brute-force oracle handles total primal dim <= 6".into(),
        ));
    }
    let sup_u = spec
        .g
        .domain_sup_norm()
        .ok_or_else(|| Error::Unsupported("unbounded dom g".into()))?;
    let sup_v = spec
        .h
        .domain_sup_norm()
        .ok_or_else(|| Error::Unsupported("unbounded dom h".into()))?;

    let a = map_to_dense(&spec.a)?;
    let b = map_to_dense(&spec.b)?;
    let mut m = Array2::zeros((n, p));
    for i in 0..n {
        for j in 0..p1 {
            m[[i, j]] = a[[i, j]];
        }
        for j in 0..p2 {
            m[[i, p1 + j]] = b[[i, j]];
        }
    }

    // Min-norm particular solution x0 = M^T (M M^T)^{-1} c.
    let mmt = m.dot(&m.t());
    let y = solve_dense(&mmt, &spec.c).ok_or_else(|| {
        Error::Unsupported("constraint operator is row-rank deficient".into())
    })?;
    let x0 = m.t().dot(&y);

    let basis = null_space(&m);
    let mdim = basis.len();

    let objective = |x: &Array1<f64>| -> f64 {
        let u = x.slice(ndarray::s![..p1]).to_owned();
        let v = x.slice(ndarray::s![p1..]).to_owned();
        spec.objective(&u, &v).unwrap_or(f64::INFINITY)
    };

    let radius = (sup_u * sup_u + sup_v * sup_v).sqrt() + norm2(&x0) + 1e-9;
    let from_s = |s: &Array1<f64>| -> Array1<f64> {
        let mut x = x0.clone();
        for (j, col) in basis.iter().enumerate() {
            x.scaled_add(s[j], col);
        }
        x
    };

    let mut best_s = Array1::zeros(mdim);
    let mut best_val = objective(&from_s(&best_s));
    let mut best_norm = norm2(&from_s(&best_s));

    if mdim > 0 {
        // Dense grid, budget-capped per dimension.
        let budget = 4_000_000f64;
        let per_dim = (budget.powf(1.0 / mdim as f64).floor() as usize)
            .min(grid_resolution.max(3))
            .max(3);
        let mut idx = vec![0usize; mdim];
        let mut s = Array1::zeros(mdim);
        loop {
            for j in 0..mdim {
                s[j] = -radius + 2.0 * radius * idx[j] as f64 / (per_dim - 1) as f64;
            }
            let x = from_s(&s);
            let val = objective(&x);
            let xnorm = norm2(&x);
            if val < best_val - 1e-15 || (val <= best_val + 1e-15 && xnorm < best_norm) {
                best_val = val;
                best_s = s.clone();
                best_norm = xnorm;
            }
            // advance the multi-index
            let mut j = 0;
            loop {
                idx[j] += 1;
                if idx[j] < per_dim {
                    break;
                }
                idx[j] = 0;
                j += 1;
                if j == mdim {
                    break;
                }
            }
            if j == mdim {
                break;
            }
        }
        if !best_val.is_finite() {
            return Err(Error::Unsupported(
                "grid search found no feasible point (thin domain?)".into(),
            ));
        }

        // Cyclic coordinate golden-section refinement.
        let cell = 2.0 * radius / (per_dim - 1) as f64;
        let mut width = 2.0 * cell;
        for _sweep in 0..200 {
            let mut improved = false;
            for j in 0..mdim {
                let phi = |t: f64| {
                    let mut s = best_s.clone();
                    s[j] = t;
                    objective(&from_s(&s))
                };
                let (t, val) = golden_min(
                    phi,
                    (best_s[j] - width).max(-radius),
                    (best_s[j] + width).min(radius),
                    1e-12,
                );
                if val < best_val - 1e-15 {
                    best_val = val;
                    best_s[j] = t;
                    improved = true;
                }
            }
            width = (width * 0.7).max(1e-10);
            if !improved && width <= 1e-9 {
                break;
            }
        }
    }

    let mut best_x = from_s(&best_s);
    let mut f_star = objective(&best_x);

    // Exact basic-solution enumeration when both blocks are affine over
    // boxes (the box-LP family): the optimum is a vertex of the feasible
    // polytope.
    if let (Some((qg, lo_g, hi_g)), Some((qh, lo_h, hi_h))) =
        (spec.g.affine_over_box(), spec.h.affine_over_box())
    {
        let mut q = Array1::zeros(p);
        let mut lo = Array1::zeros(p);
        let mut hi = Array1::zeros(p);
        for j in 0..p1 {
            q[j] = qg[j];
            lo[j] = lo_g[j];
            hi[j] = hi_g[j];
        }
        for j in 0..p2 {
            q[p1 + j] = qh[j];
            lo[p1 + j] = lo_h[j];
            hi[p1 + j] = hi_h[j];
        }
        if let Some((vx, vval)) = best_vertex(&m, &spec.c, &q, &lo, &hi) {
            let vnorm = norm2(&vx);
            if vval < f_star - 1e-15
                || (vval <= f_star + 1e-12 && vnorm < norm2(&best_x) - 1e-12)
            {
                best_x = vx;
                f_star = vval;
            }
        }
    }

    if !f_star.is_finite() {
        return Err(Error::Unsupported("no feasible point found".into()));
    }

    let u_star = best_x.slice(ndarray::s![..p1]).to_owned();
    let v_star = best_x.slice(ndarray::s![p1..]).to_owned();
    let lambda_star = recover_lambda(spec, &a, &b, &u_star, &v_star).ok();

    Ok(ReferenceSolution {
        f_star,
        u_star,
        v_star,
        lambda_star,
        provenance: Provenance::BruteForce,
    })
}

/// Least-squares multiplier recovery from the active subdifferential
/// equalities, validated against both inclusions of the optimality system.
fn recover_lambda(
    spec: &ProblemSpec,
    a: &Array2<f64>,
    b: &Array2<f64>,
    u_star: &Array1<f64>,
    v_star: &Array1<f64>,
) -> Result<Array1<f64>> {
    let n = spec.n();
    let mut rows: Vec<Array1<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    for (row_u, r) in spec.g.subdiff_equalities(u_star)? {
        rows.push(a.dot(&row_u));
        rhs.push(r);
    }
    for (row_v, r) in spec.h.subdiff_equalities(v_star)? {
        rows.push(b.dot(&row_v));
        rhs.push(r);
    }

    // Min-norm least squares via the eigendecomposition of E^T E.
    let k = rows.len();
    let mut ete = Array2::zeros((n, n));
    let mut etr = Array1::zeros(n);
    for i in 0..k {
        for x in 0..n {
            etr[x] += rows[i][x] * rhs[i];
            for y in 0..n {
                ete[[x, y]] += rows[i][x] * rows[i][y];
            }
        }
    }
    let lambda = pinv_solve_sym(&ete, &etr);

    let at_lambda = a.t().dot(&lambda);
    let bt_lambda = b.t().dot(&lambda);
    let res_g = spec.g.subgradient_residual(u_star, &at_lambda)?;
    let res_h = spec.h.subgradient_residual(v_star, &bt_lambda)?;
    if res_g <= LAMBDA_TOL && res_h <= LAMBDA_TOL {
        Ok(lambda)
    } else {
        Err(Error::NonConvergence {
            what: "multiplier recovery (reference is primal-only)".into(),
            last_estimate: res_g.max(res_h),
        })
    }
}

/// Golden-section minimization of a unimodal (extended-real convex) function.
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    let fm = f(mid);
    if f1 <= f2 && f1 <= fm {
        (x1, f1)
    } else if f2 <= fm {
        (x2, f2)
    } else {
        (mid, fm)
    }
}

/// Best basic feasible solution of `min <q, x> : M x = c, lo <= x <= hi`.
fn best_vertex(
    m: &Array2<f64>,
    c: &Array1<f64>,
    q: &Array1<f64>,
    lo: &Array1<f64>,
    hi: &Array1<f64>,
) -> Option<(Array1<f64>, f64)> {
    let (n, p) = m.dim();
    let fixed_count = p - n;
    let mut best: Option<(Array1<f64>, f64)> = None;

    let mut subset = (0..fixed_count).collect::<Vec<usize>>();
    loop {
        // For the chosen fixed coordinates, try every bound assignment.
        for mask in 0..(1usize << fixed_count) {
            let mut x = Array1::zeros(p);
            let mut is_fixed = vec![false; p];
            for (bit, &j) in subset.iter().enumerate() {
                is_fixed[j] = true;
                x[j] = if mask >> bit & 1 == 1 { hi[j] } else { lo[j] };
            }
            let free: Vec<usize> = (0..p).filter(|&j| !is_fixed[j]).collect();
            // Solve the n x n system on the free block.
            let mut mf = Array2::zeros((n, n));
            let mut rhsv = c.clone();
            for (col, &j) in free.iter().enumerate() {
                for i in 0..n {
                    mf[[i, col]] = m[[i, j]];
                }
            }
            for j in 0..p {
                if is_fixed[j] {
                    for i in 0..n {
                        rhsv[i] -= m[[i, j]] * x[j];
                    }
                }
            }
            let sol = match solve_dense(&mf, &rhsv) {
                Some(s) => s,
                None => continue,
            };
            let mut feasible = true;
            for (col, &j) in free.iter().enumerate() {
                x[j] = sol[col];
                if x[j] < lo[j] - 1e-9 || x[j] > hi[j] + 1e-9 {
                    feasible = false;
                    break;
                }
            }
            if !feasible {
                continue;
            }
            let val = q.dot(&x);
            let replace = match &best {
                None => true,
                Some((bx, bv)) => {
                    val < bv - 1e-15 || (val <= bv + 1e-15 && norm2(&x) < norm2(bx))
                }
            };
            if replace {
                best = Some((x, val));
            }
        }
        // Next subset (lexicographic).
        if fixed_count == 0 {
            break;
        }
        let mut i = fixed_count;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] != i + p - fixed_count {
                break;
            }
        }
        if subset[i] == i + p - fixed_count {
            return best;
        }
        subset[i] += 1;
        for j in i + 1..fixed_count {
            subset[j] = subset[j - 1] + 1;
        }
    }
    best
}

pub(crate) fn map_to_dense(map: &LinearMap) -> Result<Array2<f64>> {
    let mut m = Array2::zeros((map.out_dim(), map.in_dim()));
    for j in 0..map.in_dim() {
        let mut e = Array1::zeros(map.in_dim());
        e[j] = 1.0;
        let col = map.apply(&e)?;
        for i in 0..map.out_dim() {
            m[[i, j]] = col[i];
        }
    }
    Ok(m)
}

/// Gaussian elimination with partial pivoting; `None` on (numerical)
/// singularity.
pub(crate) fn solve_dense(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Some(Array1::zeros(0));
    }
    let mut m = a.clone();
    let mut rhs = b.clone();
    let scale = m.iter().fold(0.0f64, |acc, &x| acc.max(x.abs())).max(1e-300);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if m[[r, col]].abs() > m[[piv, col]].abs() {
                piv = r;
            }
        }
        if m[[piv, col]].abs() <= 1e-12 * scale {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap([col, j], [piv, j]);
            }
            rhs.swap(col, piv);
        }
        for r in col + 1..n {
            let f = m[[r, col]] / m[[col, col]];
            for j in col..n {
                m[[r, j]] -= f * m[[col, j]];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = Array1::zeros(n);
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for j in row + 1..n {
            s -= m[[row, j]] * x[j];
        }
        x[row] = s / m[[row, row]];
    }
    Some(x)
}

/// Orthonormal basis of the null space of `m` via RREF.
pub(crate) fn null_space(m: &Array2<f64>) -> Vec<Array1<f64>> {
    let (rows, cols) = m.dim();
    let mut r = m.clone();
    let scale = r.iter().fold(0.0f64, |acc, &x| acc.max(x.abs())).max(1e-300);
    let mut pivot_cols = Vec::new();
    let mut lead = 0usize;
    for row in 0..rows {
        let mut col = lead;
        loop {
            if col >= cols {
                break;
            }
            let mut piv = row;
            for rr in row..rows {
                if r[[rr, col]].abs() > r[[piv, col]].abs() {
                    piv = rr;
                }
            }
            if r[[piv, col]].abs() > 1e-10 * scale {
                if piv != row {
                    for j in 0..cols {
                        r.swap([row, j], [piv, j]);
                    }
                }
                break;
            }
            col += 1;
        }
        if col >= cols {
            break;
        }
        let d = r[[row, col]];
        for j in 0..cols {
            r[[row, j]] /= d;
        }
        for rr in 0..rows {
            if rr != row && r[[rr, col]].abs() > 0.0 {
                let f = r[[rr, col]];
                for j in 0..cols {
                    r[[rr, j]] -= f * r[[row, j]];
                }
            }
        }
        pivot_cols.push(col);
        lead = col + 1;
    }
    let free_cols: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::new();
    for &fc in &free_cols {
        let mut v = Array1::zeros(cols);
        v[fc] = 1.0;
        for (ri, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -r[[ri, fc]];
        }
        // Gram-Schmidt against earlier basis vectors.
        for b in &basis {
            let proj: f64 = v.dot(b);
            v.scaled_add(-proj, b);
        }
        let nv = norm2(&v);
        if nv > 1e-12 {
            basis.push(v / nv);
        }
    }
    basis
}

/// Min-norm solution of the (possibly singular) symmetric system `S x = b`
/// via a Jacobi eigendecomposition.
pub(crate) fn pinv_solve_sym(s: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let n = s.nrows();
    if n == 0 {
        return Array1::zeros(0);
    }
    let mut a = s.clone();
    let mut v = Array2::eye(n);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                off = off.max(a[[i, j]].abs());
            }
        }
        if off <= 1e-14 * (1.0 + a.diag().iter().fold(0.0f64, |m, &x| m.max(x.abs()))) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[[p, q]].abs() <= 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[[q, q]] - a[[p, p]]) / a[[p, q]];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - sn * akq;
                    a[[k, q]] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - sn * aqk;
                    a[[q, k]] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - sn * vkq;
                    v[[k, q]] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let eigs = a.diag().to_owned();
    let max_eig = eigs.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    let cutoff = 1e-10 * max_eig.max(1e-300);
    let mut x = Array1::zeros(n);
    for k in 0..n {
        if eigs[k].abs() > cutoff {
            let coeff = v.column(k).dot(b) / eigs[k];
            x.scaled_add(coeff, &v.column(k).to_owned());
        }
    }
    x
}
