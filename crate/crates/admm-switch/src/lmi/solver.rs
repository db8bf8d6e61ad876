//! Self-contained semidefinite feasibility via a log-det barrier.
//!
//! The strict problem "find x with A_b(x) ≺ 0 for every block b, PD
//! variables ≻ 0" is decided through the slack program
//!
//!   minimize t  s.t.  A_b(x) ⪯ t·I,  ε·I − P ⪯ t·I,  −ι_k ≤ t,  |x_k| − R ≤ t
//!
//! which always has an interior point (take t large), so no separate phase-I
//! is needed. A path-following barrier with exact Newton steps drives t
//! down; the verdict is Feasible as soon as the current interior point has
//! t ≤ −eps (the point itself is the certificate), and Infeasible once the
//! barrier duality gap proves min t > −eps. Affine matrix equalities are
//! eliminated up front by reparameterizing on their null space.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::{verify_assignment, Assignment, LmiError, LmiProblem, VarKind};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Strictness margin: feasible means every block ⪯ −eps·I after
    /// per-block normalization by coefficient norm.
    pub eps: f64,
    /// Floor ε for positive-definite variables.
    pub pd_floor: f64,
    /// Box bound on every scalar decision entry.
    pub var_bound: f64,
    /// Largest constraint block dimension accepted.
    pub dim_cap: usize,
    pub eta0: f64,
    pub eta_factor: f64,
    pub eta_max: f64,
    pub max_newton: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            eps: 1e-7,
            pd_floor: 1e-6,
            var_bound: 1e6,
            dim_cap: 64,
            eta0: 1.0,
            eta_factor: 10.0,
            eta_max: 1e13,
            max_newton: 80,
        }
    }
}

/// Outcome of a feasibility solve.
#[derive(Clone, Debug)]
pub enum FeasibilityResult {
    /// Strictly feasible; the assignment has passed [`verify_assignment`]
    /// and `margin` is the smallest definiteness gap across constraints.
    Feasible { assignment: Assignment, margin: f64 },
    /// No point achieves slack ≤ −eps; carries the best slack reached.
    Infeasible { best_slack: f64 },
    NumericalFailure { reason: String },
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityResult::Feasible { .. })
    }
}

struct SlackBlock {
    f0: DMatrix<f64>,
    coeffs: Vec<(usize, DMatrix<f64>)>,
    dim: usize,
}

struct ScalarRow {
    a: DVector<f64>,
    b: f64,
}

struct Flattened {
    /// x = x_p + Z y
    z: DMatrix<f64>,
    x_p: DVector<f64>,
    var_offsets: Vec<usize>,
    x_dim: usize,
}

fn flatten(p: &LmiProblem) -> Flattened {
    let mut var_offsets = Vec::with_capacity(p.vars.len());
    let mut off = 0usize;
    for v in &p.vars {
        var_offsets.push(off);
        off += v.entries().len();
    }
    Flattened {
        z: DMatrix::identity(off, off),
        x_p: DVector::zeros(off),
        var_offsets,
        x_dim: off,
    }
}

fn assignment_from_x(p: &LmiProblem, fl: &Flattened, x: &DVector<f64>) -> Assignment {
    let mats = p
        .vars
        .iter()
        .enumerate()
        .map(|(vi, v)| {
            let mut m = DMatrix::zeros(v.n, v.n);
            for (k, &(i, j)) in v.entries().iter().enumerate() {
                let val = x[fl.var_offsets[vi] + k];
                m[(i, j)] = val;
                if matches!(v.kind, VarKind::SymmetricPd | VarKind::Symmetric) && i != j {
                    m[(j, i)] = val;
                }
            }
            m
        })
        .collect();
    Assignment { mats }
}

/// Rows of the linear system implied by the matrix equalities, over x.
fn equality_rows(p: &LmiProblem, fl: &Flattened) -> (DMatrix<f64>, DVector<f64>) {
    let mut rows: Vec<DVector<f64>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let zero = assignment_from_x(p, fl, &DVector::zeros(fl.x_dim));
    for eq in &p.equalities {
        let base = eq.lhs.eval(&zero) - eq.rhs.eval(&zero);
        let (r, c) = eq.lhs.shape();
        let mut coeff_rows = vec![DVector::zeros(fl.x_dim); r * c];
        for (vi, v) in p.vars.iter().enumerate() {
            for (k, &entry) in v.entries().iter().enumerate() {
                let basis = v.basis(entry);
                let g = eq.lhs.coeff_for(super::VarId(vi), &basis)
                    - eq.rhs.coeff_for(super::VarId(vi), &basis);
                for i in 0..r {
                    for j in 0..c {
                        coeff_rows[i * c + j][fl.var_offsets[vi] + k] = g[(i, j)];
                    }
                }
            }
        }
        for i in 0..r {
            for j in 0..c {
                let row = coeff_rows[i * c + j].clone();
                if row.iter().any(|&v| v != 0.0) || base[(i, j)] != 0.0 {
                    rows.push(row);
                    rhs.push(-base[(i, j)]);
                }
            }
        }
    }
    if rows.is_empty() {
        return (DMatrix::zeros(0, fl.x_dim), DVector::zeros(0));
    }
    let e = DMatrix::from_rows(&rows.iter().map(|r| r.transpose()).collect::<Vec<_>>());
    (e, DVector::from_vec(rhs))
}

/// Null-space reparameterization x = x_p + Z y from E x = d.
///
/// Works through the symmetric eigendecomposition of EᵀE, whose full
/// orthonormal eigenbasis splits into the row space (positive eigenvalues)
/// and the null space (zero eigenvalues).
fn eliminate_equalities(
    e: &DMatrix<f64>,
    d: &DVector<f64>,
    x_dim: usize,
) -> Result<(DMatrix<f64>, DVector<f64>), LmiError> {
    if e.nrows() == 0 {
        return Ok((DMatrix::identity(x_dim, x_dim), DVector::zeros(x_dim)));
    }
    let gram = e.transpose() * e;
    let se = gram.symmetric_eigen();
    let lam_max = se.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v));
    let tol = 1e-12 * lam_max.max(1.0);
    let mut null_cols = Vec::new();
    let mut x_p = DVector::zeros(x_dim);
    let etd = e.transpose() * d;
    for k in 0..x_dim {
        let lam = se.eigenvalues[k];
        let v = se.eigenvectors.column(k);
        if lam <= tol {
            null_cols.push(v.clone_owned());
        } else {
            // pseudoinverse part: x_p += v (vᵀ Eᵀd) / λ
            let w = v.dot(&etd) / lam;
            x_p += v * w;
        }
    }
    let res = (e * &x_p - d).norm();
    if res > 1e-8 * d.norm().max(1.0) {
        return Err(LmiError::Shape(format!(
            "inconsistent equality constraints, residual {res:.3e}"
        )));
    }
    let mut z = DMatrix::zeros(x_dim, null_cols.len());
    for (c, col) in null_cols.iter().enumerate() {
        z.set_column(c, col);
    }
    Ok((z, x_p))
}

pub fn solve_feasibility(p: &LmiProblem, eps: f64) -> FeasibilityResult {
    let opts = SolveOptions {
        eps,
        ..SolveOptions::default()
    };
    solve_feasibility_opts(p, &opts)
}

pub fn solve_feasibility_opts(p: &LmiProblem, opts: &SolveOptions) -> FeasibilityResult {
    match prepare_and_solve(p, opts) {
        Ok(r) => r,
        Err(e) => FeasibilityResult::NumericalFailure {
            reason: e.to_string(),
        },
    }
}

fn prepare_and_solve(p: &LmiProblem, opts: &SolveOptions) -> Result<FeasibilityResult, LmiError> {
    for c in &p.constraints {
        let (r, _) = c.expr.shape();
        if r > opts.dim_cap {
            return Err(LmiError::DimensionCap {
                name: c.name.clone(),
                dim: r,
                cap: opts.dim_cap,
            });
        }
    }
    let mut fl = flatten(p);
    let (e_rows, d_rhs) = equality_rows(p, &fl);
    let (z, x_p) = eliminate_equalities(&e_rows, &d_rhs, fl.x_dim)?;
    fl.z = z;
    fl.x_p = x_p;
    let y_dim = fl.z.ncols();

    // Assemble slack blocks over y: constraints plus PD-variable domains.
    let mut blocks: Vec<SlackBlock> = Vec::new();
    let zero_asg = assignment_from_x(p, &fl, &fl.x_p);
    let sym_check = |name: &str, m: &DMatrix<f64>| -> Result<(), LmiError> {
        let scale = m.iter().fold(0.0f64, |a, &v| a.max(v.abs())).max(1.0);
        let asym = (m - m.transpose())
            .iter()
            .fold(0.0f64, |a, &v| a.max(v.abs()));
        if asym > 1e-9 * scale {
            return Err(LmiError::ConstraintNotSymmetric(name.into(), asym));
        }
        Ok(())
    };

    for c in &p.constraints {
        let dim = c.expr.shape().0;
        let f0 = c.expr.eval(&zero_asg);
        sym_check(&c.name, &f0)?;
        let mut coeffs_x: Vec<(usize, DMatrix<f64>)> = Vec::new();
        for vid in c.expr.vars_used() {
            let v = &p.vars[vid.0];
            for (k, &entry) in v.entries().iter().enumerate() {
                let g = c.expr.coeff_for(vid, &v.basis(entry));
                sym_check(&c.name, &g)?;
                coeffs_x.push((fl.var_offsets[vid.0] + k, g));
            }
        }
        // project to y-space through Z
        let mut coeffs_y: Vec<(usize, DMatrix<f64>)> = Vec::new();
        for l in 0..y_dim {
            let mut g = DMatrix::zeros(dim, dim);
            let mut any = false;
            for (k, gk) in &coeffs_x {
                let w = fl.z[(*k, l)];
                if w != 0.0 {
                    g += gk * w;
                    any = true;
                }
            }
            if any && g.iter().any(|&v| v.abs() > 1e-300) {
                coeffs_y.push((l, g));
            }
        }
        // per-block normalization so eps means the same thing everywhere
        let scale = coeffs_y
            .iter()
            .map(|(_, g)| g.norm())
            .fold(f0.norm(), f64::max)
            .max(1.0);
        let f0 = f0 / scale;
        let coeffs_y = coeffs_y.into_iter().map(|(l, g)| (l, g / scale)).collect();
        blocks.push(SlackBlock {
            f0,
            coeffs: coeffs_y,
            dim,
        });
    }

    // PD-variable domain blocks: pd_floor·I − P ⪯ t·I.
    for (vi, v) in p.vars.iter().enumerate() {
        if v.kind != VarKind::SymmetricPd {
            continue;
        }
        let mut f0 = DMatrix::identity(v.n, v.n) * opts.pd_floor;
        // subtract the particular-solution part of P
        let pmat = &zero_asg.mats[vi];
        f0 -= pmat;
        let mut coeffs_y: Vec<(usize, DMatrix<f64>)> = Vec::new();
        for l in 0..y_dim {
            let mut g = DMatrix::zeros(v.n, v.n);
            let mut any = false;
            for (k, &entry) in v.entries().iter().enumerate() {
                let w = fl.z[(fl.var_offsets[vi] + k, l)];
                if w != 0.0 {
                    g -= v.basis(entry) * w;
                    any = true;
                }
            }
            if any {
                coeffs_y.push((l, g));
            }
        }
        blocks.push(SlackBlock {
            f0,
            coeffs: coeffs_y,
            dim: v.n,
        });
    }

    // Scalar slack rows: boxes on every entry, nonnegativity for tagged
    // diagonals. Row form: a·y + b ≤ t.
    let mut rows: Vec<ScalarRow> = Vec::new();
    let z_row = |k: usize| -> DVector<f64> {
        DVector::from_fn(y_dim, |l, _| fl.z[(k, l)])
    };
    for (vi, v) in p.vars.iter().enumerate() {
        for (k, _entry) in v.entries().iter().enumerate() {
            let gk = fl.var_offsets[vi] + k;
            let a = z_row(gk);
            let b = fl.x_p[gk];
            rows.push(ScalarRow {
                a: a.clone(),
                b: b - opts.var_bound,
            });
            rows.push(ScalarRow {
                a: -a.clone(),
                b: -b - opts.var_bound,
            });
            if v.kind == VarKind::DiagonalNonneg {
                rows.push(ScalarRow { a: -a, b: -b });
            }
        }
    }

    let m_total: f64 = blocks.iter().map(|b| b.dim as f64).sum::<f64>() + rows.len() as f64;

    // Interior start.
    let x_default = {
        let asg = p.default_assignment();
        let mut x = DVector::zeros(fl.x_dim);
        for (vi, v) in p.vars.iter().enumerate() {
            for (k, &(i, j)) in v.entries().iter().enumerate() {
                x[fl.var_offsets[vi] + k] = asg.mats[vi][(i, j)];
            }
        }
        x
    };
    let mut y = fl.z.transpose() * (&x_default - &fl.x_p);
    let mut t = {
        let mut worst = f64::NEG_INFINITY;
        for b in &blocks {
            let s = eval_block(b, &y);
            let top = super::eig::eigvals_sym(&s).map(|ev| *ev.last().unwrap());
            worst = worst.max(top.unwrap_or(f64::INFINITY));
        }
        for r in &rows {
            worst = worst.max(r.a.dot(&y) + r.b);
        }
        if !worst.is_finite() {
            return Err(LmiError::Shape("could not evaluate initial point".into()));
        }
        worst + 1.0
    };

    let mut eta = opts.eta0;
    let eps_req = opts.eps;
    let debug = std::env::var("LMI_DEBUG").is_ok();
    while eta <= opts.eta_max {
        if let Err(e) = newton_center(&blocks, &rows, eta, &mut y, &mut t, opts) {
            // Centering broke down (typically an extremely ill-conditioned
            // Hessian near a marginal boundary). If the duality bound at the
            // last good iterate already rules out slack ≤ −eps, the verdict
            // is still conclusive.
            if t - 2.0 * m_total / eta > -eps_req {
                return Ok(FeasibilityResult::Infeasible { best_slack: t });
            }
            return Err(e);
        }
        if debug {
            eprintln!("stage eta={eta:.2e} t={t:.6e} ynorm={:.3e}", y.norm());
        }
        if t <= -eps_req {
            // The current interior point is itself a strict certificate.
            let x = &fl.x_p + &fl.z * &y;
            let asg = assignment_from_x(p, &fl, &x);
            let report = verify_assignment(p, &asg, eps_req);
            if report.passed() {
                return Ok(FeasibilityResult::Feasible {
                    assignment: asg,
                    margin: report.margin(),
                });
            }
            // Interior but verification disagrees: tighten further before
            // giving up (can happen right at the eps boundary).
            if eta * opts.eta_factor > opts.eta_max {
                return Ok(FeasibilityResult::NumericalFailure {
                    reason: format!(
                        "solver found slack {t:.3e} but verification failed: {:?}",
                        report.failures
                    ),
                });
            }
        } else {
            // Barrier duality gap: min t ≥ t − m/η at the central point.
            let lower = t - 2.0 * m_total / eta;
            if lower > -eps_req {
                return Ok(FeasibilityResult::Infeasible { best_slack: t });
            }
        }
        eta *= opts.eta_factor;
    }
    Ok(FeasibilityResult::NumericalFailure {
        reason: format!("undecided at eta cap (slack {t:.3e})"),
    })
}

fn eval_block(b: &SlackBlock, y: &DVector<f64>) -> DMatrix<f64> {
    let mut m = b.f0.clone();
    for (l, g) in &b.coeffs {
        m += g * y[*l];
    }
    m
}

/// Minimize η·t − Σ logdet(tI − A_b(y)) − Σ log(t − a·y − b) by damped Newton.
fn newton_center(
    blocks: &[SlackBlock],
    rows: &[ScalarRow],
    eta: f64,
    y: &mut DVector<f64>,
    t: &mut f64,
    opts: &SolveOptions,
) -> Result<(), LmiError> {
    let y_dim = y.len();
    let n_z = y_dim + 1; // y then t

    let barrier_value = |y: &DVector<f64>, t: f64| -> Option<f64> {
        let mut val = eta * t;
        for b in blocks {
            let s = DMatrix::identity(b.dim, b.dim) * t - eval_block(b, y);
            let chol = Cholesky::new(s)?;
            let mut logdet = 0.0;
            for i in 0..b.dim {
                let d = chol.l()[(i, i)];
                if d <= 0.0 {
                    return None;
                }
                logdet += d.ln();
            }
            val -= 2.0 * logdet;
        }
        for r in rows {
            let s = t - r.a.dot(y) - r.b;
            if s <= 0.0 {
                return None;
            }
            val -= s.ln();
        }
        Some(val)
    };

    for _iter in 0..opts.max_newton {
        let mut grad = DVector::zeros(n_z);
        let mut hess = DMatrix::zeros(n_z, n_z);
        grad[y_dim] = eta;

        for b in blocks {
            let s = DMatrix::identity(b.dim, b.dim) * *t - eval_block(b, y);
            let chol = Cholesky::new(s).ok_or_else(|| {
                LmiError::Shape("interior point lost positive definiteness".into())
            })?;
            let sinv = chol.inverse();
            let ws: Vec<(usize, DMatrix<f64>)> = b
                .coeffs
                .iter()
                .map(|(l, g)| (*l, &sinv * g))
                .collect();
            let tr_sinv = sinv.trace();
            grad[y_dim] -= tr_sinv;
            for (l, w) in &ws {
                grad[*l] += w.trace();
            }
            // Hessian entries: tr(W_l W_m), -tr(W_l Sinv), tr(Sinv²)
            for ai in 0..ws.len() {
                let (l, wl) = &ws[ai];
                for (m, wm) in ws.iter().skip(ai) {
                    let mut tr = 0.0;
                    for i in 0..b.dim {
                        for j in 0..b.dim {
                            tr += wl[(i, j)] * wm[(j, i)];
                        }
                    }
                    hess[(*l, *m)] += tr;
                    if l != m {
                        hess[(*m, *l)] += tr;
                    }
                }
                let mut tr_ws = 0.0;
                for i in 0..b.dim {
                    for j in 0..b.dim {
                        tr_ws += wl[(i, j)] * sinv[(j, i)];
                    }
                }
                hess[(*l, y_dim)] -= tr_ws;
                hess[(y_dim, *l)] -= tr_ws;
            }
            let mut tr_s2 = 0.0;
            for i in 0..b.dim {
                for j in 0..b.dim {
                    tr_s2 += sinv[(i, j)] * sinv[(j, i)];
                }
            }
            hess[(y_dim, y_dim)] += tr_s2;
        }
        for r in rows {
            let s = *t - r.a.dot(y) - r.b;
            let inv = 1.0 / s;
            let inv2 = inv * inv;
            for i in 0..y_dim {
                if r.a[i] != 0.0 {
                    grad[i] += r.a[i] * inv;
                    hess[(i, y_dim)] -= r.a[i] * inv2;
                    hess[(y_dim, i)] -= r.a[i] * inv2;
                    for j in 0..y_dim {
                        if r.a[j] != 0.0 {
                            hess[(i, j)] += r.a[i] * r.a[j] * inv2;
                        }
                    }
                }
            }
            grad[y_dim] -= inv;
            hess[(y_dim, y_dim)] += inv2;
        }

        // Newton direction with ridge fallback.
        let mut ridge = 0.0;
        let delta = loop {
            let mut h = hess.clone();
            if ridge > 0.0 {
                for i in 0..n_z {
                    h[(i, i)] += ridge;
                }
            }
            match Cholesky::new(h) {
                Some(ch) => break ch.solve(&(-&grad)),
                None => {
                    ridge = if ridge == 0.0 { 1e-12 } else { ridge * 100.0 };
                    if ridge > 1.0 {
                        return Err(LmiError::Shape("Newton system not solvable".into()));
                    }
                }
            }
        };

        let decrement = -grad.dot(&delta);
        if !decrement.is_finite() {
            return Err(LmiError::Shape("non-finite Newton decrement".into()));
        }
        if decrement.abs() < 1e-10 {
            return Ok(());
        }

        let f0 = barrier_value(y, *t).ok_or_else(|| {
            LmiError::Shape("barrier value undefined at current point".into())
        })?;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..70 {
            let y_new = &*y + delta.rows(0, y_dim) * step;
            let t_new = *t + delta[y_dim] * step;
            if let Some(f_new) = barrier_value(&y_new, t_new) {
                if f_new <= f0 - 0.25 * step * decrement.max(0.0) + 1e-12 {
                    *y = y_new;
                    *t = t_new;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            // Centering has stalled; the point is still strictly interior.
            return Ok(());
        }
        if decrement < 1e-9 {
            return Ok(());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::{Expr, VarKind};
    use nalgebra::dmatrix;

    /// {P > 0 : B²P − τ²P < 0} with B = 0.5, τ = 0.6: any P > 0 works.
    #[test]
    fn scalar_feasible() {
        let mut p = LmiProblem::new();
        let pv = p.add_var("P", VarKind::SymmetricPd, 1);
        let expr = Expr::var(&p, pv).scale(0.25 - 0.36);
        p.add_constraint("stein", expr);
        match solve_feasibility(&p, 1e-7) {
            FeasibilityResult::Feasible { assignment, margin } => {
                assert!(assignment.mats[0][(0, 0)] > 0.0);
                assert!(margin > 0.0);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    /// {P > 0 : P − 0.81P < 0} is infeasible (coefficient +0.19).
    #[test]
    fn scalar_infeasible() {
        let mut p = LmiProblem::new();
        let pv = p.add_var("P", VarKind::SymmetricPd, 1);
        let expr = Expr::var(&p, pv).scale(1.0 - 0.81);
        p.add_constraint("stein", expr);
        assert!(matches!(
            solve_feasibility(&p, 1e-7),
            FeasibilityResult::Infeasible { .. }
        ));
    }

    #[test]
    fn dimension_cap_enforced() {
        let mut p = LmiProblem::new();
        let pv = p.add_var("P", VarKind::SymmetricPd, 70);
        p.add_constraint("big", Expr::var(&p, pv).scale(-1.0));
        assert!(matches!(
            solve_feasibility(&p, 1e-7),
            FeasibilityResult::NumericalFailure { .. }
        ));
    }

    /// Random stable B̄ (ρ = 0.7): B̄ᵀPB̄ − 0.81P ≺ 0 must be feasible and
    /// the discrete Lyapunov series P* = Σ (B̄ᵀ/τ)^k Q (B̄/τ)^k certifies it.
    #[test]
    fn lyapunov_series_oracle() {
        let mut rng = crate::rng::SplitRng::new(3);
        for _ in 0..4 {
            let raw = DMatrix::from_fn(3, 3, |_, _| rng.normal());
            let rho = crate::system::spectral_radius(&raw);
            let b = raw * (0.7 / rho);
            let mut p = LmiProblem::new();
            let pv = p.add_var("P", VarKind::SymmetricPd, 3);
            let tau2 = 0.81;
            let expr = Expr::sandwich(b.transpose(), pv, b.clone())
                .add(Expr::var(&p, pv).scale(-tau2));
            p.add_constraint("stein", expr);
            let res = solve_feasibility(&p, 1e-7);
            assert!(res.is_feasible(), "stable system must certify: {res:?}");

            // independent series oracle
            let bt = b.transpose() / tau2.sqrt();
            let bs = &b / tau2.sqrt();
            let mut acc = DMatrix::identity(3, 3);
            let mut term = DMatrix::identity(3, 3);
            for _ in 0..500 {
                term = &bt * &term * &bs;
                acc += &term;
            }
            let check = b.transpose() * &acc * &b - &acc * tau2;
            let top = crate::lmi::eig::max_eig_sym(&check).unwrap();
            assert!(top < 0.0, "series oracle violated: {top}");
        }
    }

    /// Equality handling: X diagonal 2x2 with X·D = D·V, D = diag(1, 2),
    /// V free; forces V = X under diagonality.
    #[test]
    fn equalities_are_eliminated() {
        let mut p = LmiProblem::new();
        let x = p.add_var("X", VarKind::Diagonal, 2);
        let v = p.add_var("V", VarKind::Square, 2);
        let d = dmatrix![1.0, 0.0; 0.0, 2.0];
        let lhs = Expr::sandwich(DMatrix::identity(2, 2), x, d.clone());
        let rhs = Expr::sandwich(d.clone(), v, DMatrix::identity(2, 2));
        p.add_equality("XD=DV", lhs, rhs);
        // require X + I < 0; the equality then pins V = X. Feasible at X = -2I.
        let c = Expr::var(&p, x).add(Expr::konst(DMatrix::identity(2, 2)));
        p.add_constraint("xneg", c);
        match solve_feasibility(&p, 1e-7) {
            FeasibilityResult::Feasible { assignment, .. } => {
                let xm = &assignment.mats[0];
                let vm = &assignment.mats[1];
                assert!((xm * &d - &d * vm).norm() < 1e-8);
                assert!(xm[(0, 0)] < -1.0 && xm[(1, 1)] < -1.0);
            }
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    /// Soundness fuzz: random small problems; Feasible verdicts must verify.
    #[test]
    fn fuzz_soundness() {
        let mut rng = crate::rng::SplitRng::new(11);
        let mut n_feas = 0;
        for _ in 0..20 {
            let n = 2 + rng.gen_range_usize(2);
            let a = DMatrix::from_fn(n, n, |_, _| rng.normal());
            let sym = (&a + a.transpose()) * 0.5;
            let mut p = LmiProblem::new();
            let pv = p.add_var("P", VarKind::SymmetricPd, n);
            let g = p.add_var("g", VarKind::DiagonalNonneg, n);
            let expr = Expr::var(&p, pv)
                .add(Expr::var(&p, g).scale(1.0))
                .add(Expr::konst(sym.clone()))
                .scale(1.0)
                .sub(Expr::var(&p, pv).scale(2.0));
            p.add_constraint("rand", expr);
            match solve_feasibility(&p, 1e-7) {
                FeasibilityResult::Feasible { assignment, .. } => {
                    n_feas += 1;
                    assert!(verify_assignment(&p, &assignment, 1e-7).passed());
                    // homogeneous part only if konst is zero; here it is not,
                    // so no scaling check.
                }
                FeasibilityResult::Infeasible { .. } => {}
                FeasibilityResult::NumericalFailure { reason } => {
                    panic!("unexpected numerical failure: {reason}")
                }
            }
        }
        assert!(n_feas > 0, "corpus should contain feasible cases");
    }

    /// Homogeneity: scaling a feasible certificate of an all-linear problem
    /// by 10 keeps it verifying.
    #[test]
    fn homogeneous_scaling() {
        let b = dmatrix![0.2, 0.3; 0.0, 0.4];
        let mut p = LmiProblem::new();
        let pv = p.add_var("P", VarKind::SymmetricPd, 2);
        let expr = Expr::sandwich(b.transpose(), pv, b.clone())
            .add(Expr::var(&p, pv).scale(-0.81));
        p.add_constraint("stein", expr);
        if let FeasibilityResult::Feasible { assignment, .. } = solve_feasibility(&p, 1e-7) {
            let scaled = assignment.scaled(10.0);
            assert!(verify_assignment(&p, &scaled, 1e-7).passed());
        } else {
            panic!("expected feasible");
        }
    }
}
