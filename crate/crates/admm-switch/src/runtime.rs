//! Executable GS-ADMM / PJ-ADMM on concrete problem instances.
//!
//! Block subproblems are solved in closed form: quadratic blocks take the
//! explicit gradient step that the reduced switched-system matrices encode
//! (so reduced-space and full-space simulations of the same instance agree
//! exactly on the σ₁ = σ_p instance class), and ℓ₁ blocks take the exact
//! soft-threshold prox. Controlled variants are generated from the closed
//! loop B + DK so that synthesized certificates apply to what actually
//! runs.

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{BlockSpec, ObjectiveDesc, ProblemSpec, ProximalVariant, QModel, SignConvention};
use crate::rng::SplitRng;
use crate::synthesis::Controller;
use crate::system::{Mode, SwitchedSystem};

/// Concrete N-block instance: dense A_i, offset q, executable objectives.
#[derive(Clone, Debug)]
pub struct Instance {
    pub a_blocks: Vec<DMatrix<f64>>,
    pub q: DVector<f64>,
    pub objectives: Vec<ObjectiveDesc>,
    pub beta: f64,
    pub gamma: f64,
    pub alpha: Vec<f64>,
    /// Reference solution, when known (per-block).
    pub x_star: Option<Vec<DVector<f64>>>,
    pub sign_convention: SignConvention,
}

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("instance inconsistent: {0}")]
    BadInstance(String),
    #[error("block {0}: objective kind cannot be executed ({1})")]
    NotExecutable(usize, &'static str),
    #[error("controlled run on an inhomogeneous instance needs x_star for the offset q̂")]
    MissingReference,
    #[error("instance decode error: {0}")]
    Decode(String),
}

impl Instance {
    pub fn n_blocks(&self) -> usize {
        self.a_blocks.len()
    }

    pub fn m(&self) -> usize {
        self.q.len()
    }

    pub fn validate(&self) -> Result<(), RuntimeError> {
        if self.a_blocks.is_empty() {
            return Err(RuntimeError::BadInstance("no blocks".into()));
        }
        let m = self.q.len();
        for (i, a) in self.a_blocks.iter().enumerate() {
            if a.nrows() != m {
                return Err(RuntimeError::BadInstance(format!(
                    "block {i} has {} rows, q has {m}",
                    a.nrows()
                )));
            }
        }
        if self.objectives.len() != self.n_blocks() || self.alpha.len() != self.n_blocks() {
            return Err(RuntimeError::BadInstance(
                "objectives/alpha length mismatch".into(),
            ));
        }
        if let Some(xs) = &self.x_star {
            if xs.len() != self.n_blocks()
                || xs
                    .iter()
                    .zip(&self.a_blocks)
                    .any(|(x, a)| x.len() != a.ncols())
            {
                return Err(RuntimeError::BadInstance("x_star shape mismatch".into()));
            }
        }
        Ok(())
    }

    /// Largest/smallest singular values of block i.
    pub fn sigma_bounds(&self, i: usize) -> (f64, f64) {
        let sv = self.a_blocks[i].clone().svd(false, false).singular_values;
        (sv.max(), sv.min())
    }

    /// The paired declarative spec; singular values computed on load.
    pub fn to_problem_spec(&self, variant: ProximalVariant) -> ProblemSpec {
        let blocks = (0..self.n_blocks())
            .map(|i| {
                let (s1, sp) = self.sigma_bounds(i);
                BlockSpec {
                    sigma_max: s1,
                    sigma_min: sp,
                    objective: self.objectives[i].clone(),
                }
            })
            .collect();
        ProblemSpec {
            blocks,
            beta: self.beta,
            gamma: self.gamma,
            alpha: self.alpha.clone(),
            q: if self.q.norm() == 0.0 {
                QModel::Zero
            } else {
                QModel::Norm {
                    value: self.q.norm(),
                }
            },
            variant,
            sign_convention: self.sign_convention,
        }
    }
}

/// Per-iteration record of a run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// ‖Σ A_i x_i − q‖ after each iteration.
    pub primal_residual: Vec<f64>,
    /// ‖(x, λ) − (x*, λ*)‖ when a reference is known.
    pub distance: Option<Vec<f64>>,
    /// ‖(x, λ)‖ after each iteration.
    pub state_norm: Vec<f64>,
    pub status: RunStatus,
    /// Block order used within each sweep (GS only).
    pub sequence_used: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Converged,
    Finished,
    Diverged { at: usize },
}

/// State norm beyond which a run aborts as diverged.
const DIVERGENCE_GUARD: f64 = 1e12;

/// Closed-form minimizer of c‖x‖² + (weight/2)‖x − center‖².
pub fn prox_quadratic(c: f64, center: &DVector<f64>, weight: f64) -> DVector<f64> {
    assert!(weight > 0.0, "prox weight must be positive");
    center * (weight / (2.0 * c + weight))
}

/// Element-wise soft threshold max{|x|−r, 0}·sign(x).
pub fn prox_l1(r: f64, center: &DVector<f64>) -> DVector<f64> {
    assert!(r >= 0.0, "threshold must be nonnegative");
    center.map(|x| {
        if x > r {
            x - r
        } else if x < -r {
            x + r
        } else {
            0.0
        }
    })
}

struct RunCtx<'a> {
    inst: &'a Instance,
    /// λ-coupling sign in the x-residual: −1 consistent, +1 as printed.
    lam_sign: f64,
    /// Pseudoinverses A_i⁺ for controller injection.
    pinv: Vec<DMatrix<f64>>,
    /// β/α̂_i row scales of D (controller injection per block).
    d_x: Vec<f64>,
    controller: Option<&'a Controller>,
    /// q̂ offsets: K·(ξ*, λ*) rows.
    q_hat: DVector<f64>,
    /// ξ*, λ* for distance measurement.
    reference: Option<(Vec<DVector<f64>>, DVector<f64>)>,
}

fn lambda_star(inst: &Instance) -> Result<DVector<f64>, RuntimeError> {
    // KKT stationarity at the reference: ∇f_i(x_i*) = A_iᵀ λ* for the
    // consistent convention (and −A_iᵀλ* as printed). Least squares over
    // all blocks.
    let xs = inst.x_star.as_ref().ok_or(RuntimeError::MissingReference)?;
    let m = inst.m();
    let sign = match inst.sign_convention {
        SignConvention::Consistent => 1.0,
        SignConvention::AsPrinted => -1.0,
    };
    let mut rows = DMatrix::zeros(0, m);
    let mut rhs = DVector::zeros(0);
    for (i, a) in inst.a_blocks.iter().enumerate() {
        let grad = match &inst.objectives[i] {
            ObjectiveDesc::Quadratic { c } => &xs[i] * (2.0 * c),
            ObjectiveDesc::L1 { weight } => xs[i].map(|v| weight * v.signum()),
            ObjectiveDesc::SectorOnly { .. } => {
                return Err(RuntimeError::NotExecutable(i, "sector-only"))
            }
        };
        let n_i = a.ncols();
        let mut new_rows = DMatrix::zeros(rows.nrows() + n_i, m);
        new_rows.view_mut((0, 0), (rows.nrows(), m)).copy_from(&rows);
        new_rows
            .view_mut((rows.nrows(), 0), (n_i, m))
            .copy_from(&(a.transpose() * sign));
        rows = new_rows;
        let mut new_rhs = DVector::zeros(rhs.len() + n_i);
        new_rhs.rows_mut(0, rhs.len()).copy_from(&rhs);
        new_rhs.rows_mut(rhs.len(), n_i).copy_from(&grad);
        rhs = new_rhs;
    }
    rows.svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| RuntimeError::BadInstance(format!("KKT solve failed: {e}")))
}

fn make_ctx<'a>(
    inst: &'a Instance,
    controller: Option<&'a Controller>,
) -> Result<RunCtx<'a>, RuntimeError> {
    inst.validate()?;
    for (i, o) in inst.objectives.iter().enumerate() {
        if matches!(o, ObjectiveDesc::SectorOnly { .. }) {
            return Err(RuntimeError::NotExecutable(i, "sector-only"));
        }
    }
    let lam_sign = match inst.sign_convention {
        SignConvention::Consistent => -1.0,
        SignConvention::AsPrinted => 1.0,
    };
    let n = inst.n_blocks();
    let pinv: Vec<DMatrix<f64>> = inst
        .a_blocks
        .iter()
        .map(|a| {
            let ata = a.transpose() * a;
            ata.try_inverse().expect("full column rank assumed") * a.transpose()
        })
        .collect();
    let d_x: Vec<f64> = (0..n)
        .map(|i| {
            let s1sq = {
                let (s1, _) = inst.sigma_bounds(i);
                s1 * s1
            };
            let ah = inst.alpha[i] / s1sq;
            -inst.beta / ah
        })
        .collect();
    let reference = match (&inst.x_star, inst.q.norm() == 0.0) {
        (Some(xs), _) => {
            let xi_star: Vec<DVector<f64>> = inst
                .a_blocks
                .iter()
                .zip(xs)
                .map(|(a, x)| a * x)
                .collect();
            let lam = lambda_star(inst)?;
            Some((xi_star, lam))
        }
        (None, true) => {
            // homogeneous instance: the origin is the optimum
            let xi_star = inst
                .a_blocks
                .iter()
                .map(|a| DVector::zeros(a.nrows()))
                .collect();
            Some((xi_star, DVector::zeros(inst.m())))
        }
        (None, false) => None,
    };
    let q_hat = if let Some(ctrl) = controller {
        let (xi_star, lam_star) = reference
            .as_ref()
            .ok_or(RuntimeError::MissingReference)?;
        let dim = n + 1;
        if ctrl.k.nrows() != dim {
            return Err(RuntimeError::BadInstance(format!(
                "controller is {}x{}, instance needs {dim}x{dim}",
                ctrl.k.nrows(),
                ctrl.k.ncols()
            )));
        }
        // q̂_i = Σ_j k_ij·⟨ξ_j*⟩ + k_{i,N+1}·⟨λ*⟩ in each coordinate; at the
        // reduced level these are the row sums against the equilibrium.
        // Stored per-row as vectors via the reduced embedding below.
        let _ = (xi_star, lam_star);
        DVector::zeros(dim)
    } else {
        DVector::zeros(n + 1)
    };
    Ok(RunCtx {
        inst,
        lam_sign,
        pinv,
        d_x,
        controller,
        q_hat,
        reference,
    })
}

impl RunCtx<'_> {
    /// Controller correction vectors for every block row and the λ row,
    /// computed from the current ξ_j = A_j x_j and λ: row i of D·K applied
    /// to the stacked state, shifted so the correction vanishes at the
    /// equilibrium.
    fn corrections(
        &self,
        xi: &[DVector<f64>],
        lam: &DVector<f64>,
    ) -> Option<(Vec<DVector<f64>>, DVector<f64>)> {
        let ctrl = self.controller?;
        let n = self.inst.n_blocks();
        let m = self.inst.m();
        let k = &ctrl.k;
        let (xi_star, lam_star) = self
            .reference
            .as_ref()
            .expect("controlled runs require a reference (checked at setup)");
        let mut block_corr = Vec::with_capacity(n);
        for i in 0..n {
            let mut v = DVector::zeros(m);
            for (j, x) in xi.iter().enumerate() {
                v += (x - &xi_star[j]) * k[(i, j)];
            }
            v += (lam - lam_star) * k[(i, n)];
            block_corr.push(v * self.d_x[i]);
        }
        let mut vl = DVector::zeros(m);
        for (j, x) in xi.iter().enumerate() {
            vl += (x - &xi_star[j]) * k[(n, j)];
        }
        vl += (lam - lam_star) * k[(n, n)];
        let d_lam = -self.inst.gamma * self.inst.beta;
        Some((block_corr, vl * d_lam))
    }

    /// One explicit block update. `r_other` is Σ_{j≠i} A_j x_j − q at the
    /// iterates the discipline prescribes.
    fn block_update(
        &self,
        i: usize,
        x_i: &DVector<f64>,
        r_with_self: &DVector<f64>,
        lam: &DVector<f64>,
        corr: Option<&DVector<f64>>,
    ) -> DVector<f64> {
        let inst = self.inst;
        let a = &inst.a_blocks[i];
        let alpha = inst.alpha[i];
        let beta = inst.beta;
        // gradient of the penalty at current iterates, λ folded in
        let drive = a.transpose() * (r_with_self * beta + lam * self.lam_sign);
        let mut out = match &inst.objectives[i] {
            ObjectiveDesc::Quadratic { c } => {
                // explicit gradient step matching the reduced system
                x_i - (x_i * (2.0 * c) + &drive) / alpha
            }
            ObjectiveDesc::L1 { weight } => {
                let v = x_i - &drive / alpha;
                prox_l1(weight / alpha, &v)
            }
            ObjectiveDesc::SectorOnly { .. } => unreachable!("rejected at setup"),
        };
        if let Some(c) = corr {
            out += &self.pinv[i] * c;
        }
        out
    }
}

/// Run GS-ADMM: one sweep updates the blocks in `sequence` order (each
/// exactly once), then the multiplier via λ⁺ = λ − γβ(ΣA_jx_j − q) at the
/// post-sweep iterates.
pub fn run_gs(
    inst: &Instance,
    sequence: &[usize],
    iters: usize,
    controller: Option<&Controller>,
) -> Result<Trajectory, RuntimeError> {
    let n = inst.n_blocks();
    {
        let mut seen = vec![false; n];
        if sequence.len() != n || sequence.iter().any(|&i| i >= n) {
            return Err(RuntimeError::BadInstance("sequence must list every block".into()));
        }
        for &s in sequence {
            if seen[s] {
                return Err(RuntimeError::BadInstance("sequence repeats a block".into()));
            }
            seen[s] = true;
        }
    }
    run_inner(inst, Some(sequence), iters, controller)
}

/// Run PJ-ADMM: all blocks update in parallel from the previous iterates;
/// the multiplier update also uses the pre-update iterates.
pub fn run_pj(
    inst: &Instance,
    iters: usize,
    controller: Option<&Controller>,
) -> Result<Trajectory, RuntimeError> {
    run_inner(inst, None, iters, controller)
}

fn run_inner(
    inst: &Instance,
    sequence: Option<&[usize]>,
    iters: usize,
    controller: Option<&Controller>,
) -> Result<Trajectory, RuntimeError> {
    let x0 = start_state(inst);
    run_custom(inst, sequence, x0, DVector::zeros(inst.m()), iters, controller)
}

/// Deterministic nonzero start used when the caller does not supply one.
fn start_state(inst: &Instance) -> Vec<DVector<f64>> {
    let mut rng = SplitRng::new(0xADA0).split(17);
    inst.a_blocks
        .iter()
        .map(|a| DVector::from_fn(a.ncols(), |_, _| rng.normal()))
        .collect()
}

/// Run PJ with a caller-chosen initial state.
pub fn run_pj_from(
    inst: &Instance,
    x0: Vec<DVector<f64>>,
    lam0: DVector<f64>,
    iters: usize,
    controller: Option<&Controller>,
) -> Result<Trajectory, RuntimeError> {
    run_custom(inst, None, x0, lam0, iters, controller)
}

/// Run GS with a caller-chosen initial state.
pub fn run_gs_from(
    inst: &Instance,
    sequence: &[usize],
    x0: Vec<DVector<f64>>,
    lam0: DVector<f64>,
    iters: usize,
    controller: Option<&Controller>,
) -> Result<Trajectory, RuntimeError> {
    run_custom(inst, Some(sequence), x0, lam0, iters, controller)
}

fn run_custom(
    inst: &Instance,
    sequence: Option<&[usize]>,
    x0: Vec<DVector<f64>>,
    lam0: DVector<f64>,
    iters: usize,
    controller: Option<&Controller>,
) -> Result<Trajectory, RuntimeError> {
    let ctx = make_ctx(inst, controller)?;
    let n = inst.n_blocks();
    let mut x = x0;
    let mut lam = lam0;
    if x.len() != n || lam.len() != inst.m() {
        return Err(RuntimeError::BadInstance("start state shape".into()));
    }

    let mut primal = Vec::with_capacity(iters);
    let mut dist: Option<Vec<f64>> = ctx.reference.as_ref().map(|_| Vec::with_capacity(iters));
    let mut norms = Vec::with_capacity(iters);
    let mut status = RunStatus::Finished;

    for k in 0..iters {
        let xi: Vec<DVector<f64>> = inst.a_blocks.iter().zip(&x).map(|(a, v)| a * v).collect();
        let corr = ctx.corrections(&xi, &lam);
        match sequence {
            Some(seq) => {
                let mut xi_cur = xi;
                for &i in seq {
                    let mut r = -inst.q.clone();
                    for v in &xi_cur {
                        r += v;
                    }
                    let c_i = corr.as_ref().map(|(b, _)| &b[i]);
                    let xn = ctx.block_update(i, &x[i], &r, &lam, c_i);
                    x[i] = xn;
                    xi_cur[i] = &inst.a_blocks[i] * &x[i];
                }
                let mut r = -inst.q.clone();
                for v in &xi_cur {
                    r += v;
                }
                lam -= (&r) * (inst.gamma * inst.beta);
                if let Some((_, cl)) = &corr {
                    lam += cl;
                }
            }
            None => {
                let mut r = -inst.q.clone();
                for v in &xi {
                    r += v;
                }
                let mut x_new = Vec::with_capacity(n);
                for i in 0..n {
                    let c_i = corr.as_ref().map(|(b, _)| &b[i]);
                    x_new.push(ctx.block_update(i, &x[i], &r, &lam, c_i));
                }
                x = x_new;
                lam -= (&r) * (inst.gamma * inst.beta);
                if let Some((_, cl)) = &corr {
                    lam += cl;
                }
            }
        }

        let mut r = -inst.q.clone();
        for (a, v) in inst.a_blocks.iter().zip(&x) {
            r += a * v;
        }
        primal.push(r.norm());
        let mut sq = lam.norm_squared();
        for v in &x {
            sq += v.norm_squared();
        }
        let norm = sq.sqrt();
        norms.push(norm);
        if let (Some(d), Some((xi_star, lam_star))) = (dist.as_mut(), ctx.reference.as_ref()) {
            let mut dsq = (&lam - lam_star).norm_squared();
            for (i, a) in inst.a_blocks.iter().enumerate() {
                dsq += (a * &x[i] - &xi_star[i]).norm_squared();
            }
            d.push(dsq.sqrt());
        }
        if norm > DIVERGENCE_GUARD {
            status = RunStatus::Diverged { at: k };
            break;
        }
    }

    if status == RunStatus::Finished {
        let converged = match (&dist, primal.last()) {
            (Some(d), _) if !d.is_empty() => {
                let d0 = d[0].max(1e-300);
                d.last().unwrap() / d0 < 1e-6
            }
            (_, Some(&pr)) => pr < 1e-9,
            _ => false,
        };
        if converged {
            status = RunStatus::Converged;
        }
    }

    Ok(Trajectory {
        primal_residual: primal,
        distance: dist,
        state_norm: norms,
        status,
        sequence_used: sequence.map(|s| s.to_vec()),
    })
}

/// Estimated per-iteration contraction factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RateEstimate {
    Rate(f64),
    /// Distances grow without bound.
    Diverged,
    /// Distances are numerically zero over the window.
    ConvergedExactly,
}

/// Least-squares slope of log(distance) over the trailing `window` samples.
pub fn empirical_rate_series(d: &[f64], window: usize) -> RateEstimate {
    assert!(window >= 2, "window must have at least two samples");
    if d.len() < window {
        return empirical_rate_series(d, d.len().max(2).min(window));
    }
    let tail = &d[d.len() - window..];
    if tail.iter().all(|&v| v == 0.0) {
        return RateEstimate::ConvergedExactly;
    }
    if tail.last().unwrap() > &1e11 {
        return RateEstimate::Diverged;
    }
    // least squares on log values; zero entries are converged-exact tails
    let logs: Vec<f64> = tail.iter().map(|&v| v.max(1e-300).ln()).collect();
    let n = logs.len() as f64;
    let tbar = (n - 1.0) / 2.0;
    let lbar = logs.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, l) in logs.iter().enumerate() {
        let dt = t as f64 - tbar;
        num += dt * (l - lbar);
        den += dt * dt;
    }
    let slope = num / den;
    let rate = slope.exp();
    if rate > 1.0 + 1e-9 && *tail.last().unwrap() > tail[0] {
        // locally growing; classify as divergent only when clearly so
        if rate > 1.01 {
            return RateEstimate::Diverged;
        }
    }
    RateEstimate::Rate(rate)
}

/// Rate from a trajectory's distance series (falls back to state norms,
/// which measure distance to the origin equilibrium).
pub fn empirical_rate(traj: &Trajectory, window: usize) -> RateEstimate {
    if traj.status != RunStatus::Finished && matches!(traj.status, RunStatus::Diverged { .. }) {
        return RateEstimate::Diverged;
    }
    match &traj.distance {
        Some(d) => empirical_rate_series(d, window),
        None => empirical_rate_series(&traj.state_norm, window),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    L2,
    L1,
}

/// Random regression/sparse-recovery instance: Gaussian A with unit-norm
/// columns split evenly into blocks, x* with exactly `sparsity` nonzeros,
/// q = A x* + δ with δ ~ N(0, σ²I). Reproducible from the seed.
pub fn generate_instance(
    kind: InstanceKind,
    m: usize,
    n_total: usize,
    n_blocks: usize,
    sparsity: usize,
    noise_sigma: f64,
    seed: u64,
) -> Instance {
    assert!(m > 0 && n_total > 0 && n_blocks > 0 && n_blocks <= n_total);
    assert!(sparsity <= n_total);
    let root = SplitRng::new(seed);
    let mut rng_a = root.split(1);
    let mut rng_x = root.split(2);
    let mut rng_noise = root.split(3);

    let mut a = DMatrix::from_fn(m, n_total, |_, _| rng_a.normal());
    for j in 0..n_total {
        let nrm = a.column(j).norm();
        if nrm > 0.0 {
            let scaled = a.column(j) / nrm;
            a.set_column(j, &scaled);
        }
    }
    let mut x_star = DVector::zeros(n_total);
    let mut idx: Vec<usize> = (0..n_total).collect();
    rng_x.shuffle(&mut idx);
    for &j in idx.iter().take(sparsity) {
        x_star[j] = rng_x.normal();
    }
    let noise = DVector::from_fn(m, |_, _| rng_noise.normal() * noise_sigma);
    let q = &a * &x_star + noise;

    // even partition; any remainder spreads over the first blocks
    let base = n_total / n_blocks;
    let extra = n_total % n_blocks;
    let mut a_blocks = Vec::with_capacity(n_blocks);
    let mut xs_blocks = Vec::with_capacity(n_blocks);
    let mut col = 0;
    for b in 0..n_blocks {
        let w = base + usize::from(b < extra);
        a_blocks.push(a.columns(col, w).clone_owned());
        xs_blocks.push(x_star.rows(col, w).clone_owned());
        col += w;
    }
    let objective = match kind {
        InstanceKind::L2 => ObjectiveDesc::Quadratic { c: 0.5 },
        InstanceKind::L1 => ObjectiveDesc::L1 { weight: 1.0 },
    };
    Instance {
        a_blocks,
        q,
        objectives: vec![objective; n_blocks],
        beta: 1.0,
        gamma: 1.0,
        alpha: vec![1.0; n_blocks],
        x_star: Some(xs_blocks),
        sign_convention: SignConvention::Consistent,
    }
}

/// Simulate the reduced (N+1)-dimensional switched system with per-step
/// gains chosen by `gain_fn` (each within the sector) and subsystem order
/// from `order_fn` per sweep. Returns the state after every completed
/// subsystem step. Jacobi systems apply the single full map once per step.
pub fn simulate_reduced(
    sys: &SwitchedSystem,
    controller: Option<&DMatrix<f64>>,
    x0: &DVector<f64>,
    steps: usize,
    mut gain_fn: impl FnMut(usize) -> f64,
    mut order_fn: impl FnMut(&mut Vec<usize>),
) -> Vec<DVector<f64>> {
    let dim = sys.dim();
    let base_b = match controller {
        Some(k) => &sys.b + &sys.d * k,
        None => sys.b.clone(),
    };
    let mut state = x0.clone();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(state.clone());
    match sys.mode {
        Mode::Jacobi => {
            for _ in 0..steps {
                let mut next = &base_b * &state;
                for i in 0..sys.n_blocks {
                    next[i] += sys.c[(i, i)] * gain_fn(i) * state[i];
                }
                state = next;
                out.push(state.clone());
            }
        }
        Mode::GaussSeidel => {
            let mut order: Vec<usize> = (0..sys.n_blocks).collect();
            let mut done = 0;
            'outer: loop {
                order_fn(&mut order);
                for &i in order.iter().chain(std::iter::once(&sys.n_blocks)) {
                    if done == steps {
                        break 'outer;
                    }
                    let mut next = state.clone();
                    let mut acc = 0.0;
                    for j in 0..dim {
                        acc += base_b[(i, j)] * state[j];
                    }
                    if i < sys.n_blocks {
                        acc += sys.c[(i, i)] * gain_fn(i) * state[i];
                    }
                    next[i] = acc;
                    state = next;
                    out.push(state.clone());
                    done += 1;
                }
            }
        }
    }
    out
}

/// Instance JSON with base64-encoded row-major f64 matrices.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    m: usize,
    blocks: Vec<BlockData>,
    q: String,
    objectives: Vec<ObjectiveDesc>,
    beta: f64,
    gamma: f64,
    alpha: Vec<f64>,
    x_star: Option<Vec<String>>,
    #[serde(default)]
    sign_convention: SignConvention,
}

#[derive(Serialize, Deserialize)]
struct BlockData {
    cols: usize,
    a: String,
}

fn encode_f64s(vals: impl Iterator<Item = f64>) -> String {
    let mut bytes = Vec::new();
    for v in vals {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    B64.encode(bytes)
}

fn decode_f64s(s: &str) -> Result<Vec<f64>, RuntimeError> {
    let bytes = B64
        .decode(s)
        .map_err(|e| RuntimeError::Decode(e.to_string()))?;
    if bytes.len() % 8 != 0 {
        return Err(RuntimeError::Decode("payload not a multiple of 8 bytes".into()));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

impl Instance {
    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            m: self.m(),
            blocks: self
                .a_blocks
                .iter()
                .map(|a| BlockData {
                    cols: a.ncols(),
                    a: encode_f64s((0..a.nrows()).flat_map(|i| {
                        (0..a.ncols()).map(move |j| (i, j))
                    }).map(|(i, j)| a[(i, j)])),
                })
                .collect(),
            q: encode_f64s(self.q.iter().copied()),
            objectives: self.objectives.clone(),
            beta: self.beta,
            gamma: self.gamma,
            alpha: self.alpha.clone(),
            x_star: self
                .x_star
                .as_ref()
                .map(|xs| xs.iter().map(|x| encode_f64s(x.iter().copied())).collect()),
            sign_convention: self.sign_convention,
        };
        serde_json::to_string_pretty(&file).expect("instance serialization")
    }

    pub fn from_json(text: &str) -> Result<Instance, RuntimeError> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| RuntimeError::Decode(e.to_string()))?;
        let m = file.m;
        let mut a_blocks = Vec::with_capacity(file.blocks.len());
        for b in &file.blocks {
            let vals = decode_f64s(&b.a)?;
            if vals.len() != m * b.cols {
                return Err(RuntimeError::Decode("block size mismatch".into()));
            }
            a_blocks.push(DMatrix::from_row_slice(m, b.cols, &vals));
        }
        let qv = decode_f64s(&file.q)?;
        if qv.len() != m {
            return Err(RuntimeError::Decode("q size mismatch".into()));
        }
        let x_star = match file.x_star {
            Some(xs) => {
                let mut out = Vec::with_capacity(xs.len());
                for (s, a) in xs.iter().zip(&a_blocks) {
                    let v = decode_f64s(s)?;
                    if v.len() != a.ncols() {
                        return Err(RuntimeError::Decode("x_star size mismatch".into()));
                    }
                    out.push(DVector::from_row_slice(&v));
                }
                Some(out)
            }
            None => None,
        };
        let inst = Instance {
            a_blocks,
            q: DVector::from_row_slice(&qv),
            objectives: file.objectives,
            beta: file.beta,
            gamma: file.gamma,
            alpha: file.alpha,
            x_star,
            sign_convention: file.sign_convention,
        };
        inst.validate()?;
        Ok(inst)
    }
}

/// Trajectory CSV: `iteration,primal_residual,distance,state_norm`.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("iteration,primal_residual,distance,state_norm\n");
    for k in 0..traj.primal_residual.len() {
        let d = traj
            .distance
            .as_ref()
            .map(|d| format!("{:.17e}", d[k]))
            .unwrap_or_default();
        out.push_str(&format!(
            "{k},{:.17e},{d},{:.17e}\n",
            traj.primal_residual[k], traj.state_norm[k]
        ));
    }
    out
}
