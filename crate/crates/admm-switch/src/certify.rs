//! Convergence-rate certification: LMI families, feasibility at a fixed
//! rate τ, and bisection for the minimal certified rate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lmi::{
    self, eig, solve_feasibility_opts, Expr, FeasibilityResult, LmiProblem, SolveOptions, VarId,
    VarKind,
};
use crate::system::{LinearSwitchedSystem, SwitchedSystem};

/// Which ordered subsystem pairs (σ(t), σ(t+1)) the LMIs quantify over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSet {
    /// All of 𝓘×𝓘 including (i,i). With hold semantics the (i,i) pair is
    /// never strictly feasible (held states give ΔV = (1−τ²)V > 0), so this
    /// mode surfaces infeasibility for every GS system; it is kept because
    /// it is the literal quantifier of the certification theorems.
    #[default]
    FullProduct,
    /// Ordered pairs with i ≠ j: covers per-sweep permutation switching
    /// without immediate repeats.
    AllDistinct,
    /// Pairs realized by the fixed sweep 1 → 2 → … → N+1 → 1.
    CyclicOnly,
}

/// Sign placement of the sector multiplier Γ in the quadratic blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaConvention {
    /// +ΓF₁ / +Γ on the diagonal blocks, exactly as the theorem statements
    /// print them. The (2,2) corner ĈᵀPĈ + Γ is then positive semidefinite,
    /// so these LMIs are infeasible for every system; the verdict is
    /// surfaced honestly rather than patched.
    #[default]
    AsPrinted,
    /// −ΓF₁ / −Γ: the standard sector-bounded S-procedure, feasible for
    /// contracting systems.
    Lure,
}

/// Certification method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMethod {
    /// Switched quadratic Lyapunov function, direct quadratic form.
    Thm1,
    /// Finsler form with free multipliers U₁ᵢ, U₂ᵢ, U₃ᵢ.
    Thm2,
    /// Common quadratic Lyapunov function (single P).
    Cor1,
    /// Linearized switched system, Finsler form.
    LinC1Finsler,
    /// Linearized, one P per subsystem.
    LinC1Sqlf,
    /// Linearized, common P.
    LinC1Cqlf,
    /// Linearized single-subsystem (PJ) common-P condition.
    LinC2,
}

impl CertMethod {
    pub fn is_linear(self) -> bool {
        matches!(
            self,
            CertMethod::LinC1Finsler
                | CertMethod::LinC1Sqlf
                | CertMethod::LinC1Cqlf
                | CertMethod::LinC2
        )
    }

    pub fn is_cqlf(self) -> bool {
        matches!(
            self,
            CertMethod::Cor1 | CertMethod::LinC1Cqlf | CertMethod::LinC2
        )
    }
}

/// Options threaded through assembly and solving.
#[derive(Clone, Debug, Default)]
pub struct CertOptions {
    pub pair_set: PairSet,
    pub gamma: GammaConvention,
    pub solve: SolveOptions,
}

impl CertOptions {
    pub fn lure(pair_set: PairSet) -> Self {
        CertOptions {
            pair_set,
            gamma: GammaConvention::Lure,
            solve: SolveOptions::default(),
        }
    }
}

/// A certified linear-convergence rate with its Lyapunov data.
#[derive(Clone, Debug)]
pub struct RateCertificate {
    pub tau: f64,
    pub method: CertMethod,
    pub p_family: Vec<DMatrix<f64>>,
    /// Diagonal sector multipliers (sector methods only).
    pub gamma: Option<DVector<f64>>,
    /// Named auxiliary matrices (U₁ᵢ/U₂ᵢ/U₃ᵢ and friends).
    pub aux: Vec<(String, DMatrix<f64>)>,
    pub margin: f64,
    /// Envelope constant: ‖ξᵗ−ξ*‖ ≤ χ·τᵗ·‖ξ⁰−ξ*‖ over covered switching.
    pub chi: f64,
    pub pair_set: PairSet,
    pub gamma_convention: GammaConvention,
}

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("rate tau must lie in (0,1), got {0}")]
    BadTau(f64),
    #[error("method {0:?} needs a {1} system")]
    WrongSystem(CertMethod, &'static str),
    #[error("LMIs infeasible at tau (best slack {best_slack:.3e})")]
    Infeasible { best_slack: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error(transparent)]
    Lmi(#[from] lmi::LmiError),
}

/// Either kind of system a method can certify.
#[derive(Clone, Copy)]
pub enum SystemRef<'a> {
    Sector(&'a SwitchedSystem),
    Linear(&'a LinearSwitchedSystem),
}

impl<'a> From<&'a SwitchedSystem> for SystemRef<'a> {
    fn from(s: &'a SwitchedSystem) -> Self {
        SystemRef::Sector(s)
    }
}

impl<'a> From<&'a LinearSwitchedSystem> for SystemRef<'a> {
    fn from(s: &'a LinearSwitchedSystem) -> Self {
        SystemRef::Linear(s)
    }
}

/// Ordered pairs to assemble for a system with `n_sub` subsystems.
pub fn pairs_for(n_sub: usize, ps: PairSet) -> Vec<(usize, usize)> {
    if n_sub == 1 {
        return vec![(0, 0)];
    }
    match ps {
        PairSet::FullProduct => (0..n_sub)
            .flat_map(|i| (0..n_sub).map(move |j| (i, j)))
            .collect(),
        PairSet::AllDistinct => (0..n_sub)
            .flat_map(|i| (0..n_sub).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect(),
        PairSet::CyclicOnly => (0..n_sub).map(|i| (i, (i + 1) % n_sub)).collect(),
    }
}

fn gamma_sign(g: GammaConvention) -> f64 {
    match g {
        GammaConvention::AsPrinted => 1.0,
        GammaConvention::Lure => -1.0,
    }
}

struct SectorVars {
    p: Vec<VarId>,
    gamma: VarId,
}

fn add_p_family(lp: &mut LmiProblem, count: usize, dim: usize) -> Vec<VarId> {
    (0..count)
        .map(|i| lp.add_var(format!("P{}", i + 1), VarKind::SymmetricPd, dim))
        .collect()
}

/// Theorem-1 pair block:
/// [[ÂᵢᵀP_jÂᵢ − τ²P_i ± ΓF₁,  ÂᵢᵀP_jĈᵢ + ΓF₂], [⋆, ĈᵢᵀP_jĈᵢ ± Γ]].
fn thm1_block(
    lp: &LmiProblem,
    sys: &SwitchedSystem,
    vars: &SectorVars,
    (i, j): (usize, usize),
    tau: f64,
    gconv: GammaConvention,
) -> Expr {
    let (a_i, c_i) = sys.subsystem(i);
    let dim = sys.dim();
    let eye = DMatrix::identity(dim, dim);
    let sgn = gamma_sign(gconv);
    let b11 = Expr::sandwich(a_i.transpose(), vars.p[j], a_i.clone())
        .add(Expr::var(lp, vars.p[i]).scale(-tau * tau))
        .add(Expr::sandwich(eye.clone(), vars.gamma, sys.sector.f1.clone()).scale(sgn));
    let b12 = Expr::sandwich(a_i.transpose(), vars.p[j], c_i.clone())
        .add(Expr::sandwich(eye.clone(), vars.gamma, sys.sector.f2.clone()));
    let b22 = Expr::sandwich(c_i.transpose(), vars.p[j], c_i.clone())
        .add(Expr::var(lp, vars.gamma).scale(sgn));
    Expr::sym_from_upper(vec![vec![Some(b11), Some(b12)], vec![None, Some(b22)]])
}

/// Theorem-1 pair block with explicit (P_i, P_j, Γ) variables; used by the
/// per-pair screens in [`crate::sequences`].
pub fn thm1_pair_block_for_table(
    lp: &LmiProblem,
    sys: &SwitchedSystem,
    p_i: VarId,
    p_j: VarId,
    gamma: VarId,
    pair: (usize, usize),
    tau: f64,
    gconv: GammaConvention,
) -> Expr {
    let n_sub = sys.n_subsystems();
    let mut p = vec![p_i; n_sub];
    p[pair.1] = p_j;
    p[pair.0] = p_i;
    let vars = SectorVars { p, gamma };
    thm1_block(lp, sys, &vars, pair, tau, gconv)
}

/// Theorem-2 pair block with explicit variables; per-pair screen analog.
#[allow(clippy::too_many_arguments)]
pub fn thm2_pair_block_for_table(
    lp: &LmiProblem,
    sys: &SwitchedSystem,
    p_i: VarId,
    p_j: VarId,
    gamma: VarId,
    u1: VarId,
    u2: VarId,
    u3: VarId,
    pair: (usize, usize),
    tau: f64,
    gconv: GammaConvention,
) -> Expr {
    let n_sub = sys.n_subsystems();
    let mut p = vec![p_i; n_sub];
    p[pair.1] = p_j;
    p[pair.0] = p_i;
    let vars = SectorVars { p, gamma };
    thm2_block(lp, sys, &vars, u1, u2, u3, pair, tau, gconv)
}

/// Assemble the Theorem-1 family over the configured pair set.
pub fn assemble_thm1(sys: &SwitchedSystem, tau: f64, opts: &CertOptions) -> LmiProblem {
    let mut lp = LmiProblem::new();
    let n_sub = sys.n_subsystems();
    let dim = sys.dim();
    let p = add_p_family(&mut lp, n_sub, dim);
    let gamma = lp.add_var("Gamma", VarKind::DiagonalNonneg, dim);
    let vars = SectorVars { p, gamma };
    for pr in pairs_for(n_sub, opts.pair_set) {
        let e = thm1_block(&lp, sys, &vars, pr, tau, opts.gamma);
        lp.add_constraint(format!("thm1_{}_{}", pr.0 + 1, pr.1 + 1), e);
    }
    lp
}

/// Theorem-2 (Finsler) pair block, 3(N+1)-dimensional.
#[allow(clippy::too_many_arguments)]
fn thm2_block(
    lp: &LmiProblem,
    sys: &SwitchedSystem,
    vars: &SectorVars,
    u1: VarId,
    u2: VarId,
    u3: VarId,
    (i, j): (usize, usize),
    tau: f64,
    gconv: GammaConvention,
) -> Expr {
    let (a_i, c_i) = sys.subsystem(i);
    let dim = sys.dim();
    let eye = DMatrix::identity(dim, dim);
    let sgn = gamma_sign(gconv);
    let b11 = Expr::sandwich(eye.clone(), u1, a_i.clone())
        .add(Expr::sandwich(eye.clone(), u1, a_i.clone()).t())
        .add(Expr::var(lp, vars.p[i]).scale(-tau * tau))
        .add(Expr::sandwich(eye.clone(), vars.gamma, sys.sector.f1.clone()).scale(sgn));
    let b12 = Expr::sandwich_t(a_i.transpose(), u2, eye.clone())
        .add(Expr::sandwich(eye.clone(), u1, c_i.clone()))
        .add(Expr::sandwich(eye.clone(), vars.gamma, sys.sector.f2.clone()));
    let b13 = Expr::sandwich_t(a_i.transpose(), u3, eye.clone()).sub(Expr::var(lp, u1));
    let b22 = Expr::sandwich(eye.clone(), u2, c_i.clone())
        .add(Expr::sandwich(eye.clone(), u2, c_i.clone()).t())
        .add(Expr::var(lp, vars.gamma).scale(sgn));
    let b23 = Expr::sandwich_t(c_i.transpose(), u3, eye.clone()).sub(Expr::var(lp, u2));
    let b33 = Expr::var(lp, vars.p[j])
        .sub(Expr::var(lp, u3))
        .sub(Expr::sandwich_t(eye.clone(), u3, eye.clone()));
    Expr::sym_from_upper(vec![
        vec![Some(b11), Some(b12), Some(b13)],
        vec![None, Some(b22), Some(b23)],
        vec![None, None, Some(b33)],
    ])
}

pub fn assemble_thm2(sys: &SwitchedSystem, tau: f64, opts: &CertOptions) -> LmiProblem {
    let mut lp = LmiProblem::new();
    let n_sub = sys.n_subsystems();
    let dim = sys.dim();
    let p = add_p_family(&mut lp, n_sub, dim);
    let gamma = lp.add_var("Gamma", VarKind::DiagonalNonneg, dim);
    let us: Vec<(VarId, VarId, VarId)> = (0..n_sub)
        .map(|i| {
            (
                lp.add_var(format!("U1_{}", i + 1), VarKind::Square, dim),
                lp.add_var(format!("U2_{}", i + 1), VarKind::Square, dim),
                lp.add_var(format!("U3_{}", i + 1), VarKind::Square, dim),
            )
        })
        .collect();
    let vars = SectorVars { p, gamma };
    for pr in pairs_for(n_sub, opts.pair_set) {
        let (u1, u2, u3) = us[pr.0];
        let e = thm2_block(&lp, sys, &vars, u1, u2, u3, pr, tau, opts.gamma);
        lp.add_constraint(format!("thm2_{}_{}", pr.0 + 1, pr.1 + 1), e);
    }
    lp
}

/// Corollary-1 family: one shared P, one constraint per subsystem.
pub fn assemble_cor1(sys: &SwitchedSystem, tau: f64, opts: &CertOptions) -> LmiProblem {
    let mut lp = LmiProblem::new();
    let dim = sys.dim();
    let p = lp.add_var("P", VarKind::SymmetricPd, dim);
    let gamma = lp.add_var("Gamma", VarKind::DiagonalNonneg, dim);
    let n_sub = sys.n_subsystems();
    let vars = SectorVars {
        p: vec![p; n_sub],
        gamma,
    };
    for i in 0..n_sub {
        let e = thm1_block(&lp, sys, &vars, (i, i), tau, opts.gamma);
        lp.add_constraint(format!("cor1_{}", i + 1), e);
    }
    lp
}

/// Linearized families on the effective matrices B̄ᵢ.
pub fn assemble_linear(
    lin: &LinearSwitchedSystem,
    tau: f64,
    method: CertMethod,
    opts: &CertOptions,
) -> LmiProblem {
    let mut lp = LmiProblem::new();
    let n_sub = lin.n_subsystems();
    let dim = lin.dim();
    let eye = DMatrix::identity(dim, dim);
    match method {
        CertMethod::LinC1Sqlf => {
            let p = add_p_family(&mut lp, n_sub, dim);
            for (i, j) in pairs_for(n_sub, opts.pair_set) {
                let b = &lin.bbar[i];
                let e = Expr::sandwich(b.transpose(), p[j], b.clone())
                    .add(Expr::var(&lp, p[i]).scale(-tau * tau));
                lp.add_constraint(format!("sqlf_{}_{}", i + 1, j + 1), e);
            }
        }
        CertMethod::LinC1Cqlf | CertMethod::LinC2 => {
            let p = lp.add_var("P", VarKind::SymmetricPd, dim);
            for (i, b) in lin.bbar.iter().enumerate() {
                let e = Expr::sandwich(b.transpose(), p, b.clone())
                    .add(Expr::var(&lp, p).scale(-tau * tau));
                lp.add_constraint(format!("cqlf_{}", i + 1), e);
            }
        }
        CertMethod::LinC1Finsler => {
            let p = add_p_family(&mut lp, n_sub, dim);
            let us: Vec<(VarId, VarId)> = (0..n_sub)
                .map(|i| {
                    (
                        lp.add_var(format!("U1_{}", i + 1), VarKind::Square, dim),
                        lp.add_var(format!("U3_{}", i + 1), VarKind::Square, dim),
                    )
                })
                .collect();
            for (i, j) in pairs_for(n_sub, opts.pair_set) {
                let b = &lin.bbar[i];
                let (u1, u3) = us[i];
                let b11 = Expr::sandwich(eye.clone(), u1, b.clone())
                    .add(Expr::sandwich(eye.clone(), u1, b.clone()).t())
                    .add(Expr::var(&lp, p[i]).scale(-tau * tau));
                let b12 = Expr::sandwich_t(b.transpose(), u3, eye.clone()).sub(Expr::var(&lp, u1));
                let b22 = Expr::var(&lp, p[j])
                    .sub(Expr::var(&lp, u3))
                    .sub(Expr::sandwich_t(eye.clone(), u3, eye.clone()));
                let e = Expr::sym_from_upper(vec![
                    vec![Some(b11), Some(b12)],
                    vec![None, Some(b22)],
                ]);
                lp.add_constraint(format!("finsler_{}_{}", i + 1, j + 1), e);
            }
        }
        _ => unreachable!("sector methods assembled elsewhere"),
    }
    lp
}

/// Envelope constant from the Lyapunov family: the worst realized pair of
/// (starting, current) subsystems gives √(max λmax(P_i) / min λmin(P_j)).
/// For a single P this is √κ(P).
pub fn chi_from_family(ps: &[DMatrix<f64>]) -> f64 {
    let mut top = f64::NEG_INFINITY;
    let mut bot = f64::INFINITY;
    for p in ps {
        let ev = eig::eigvals_sym(p).expect("certified P must be symmetric");
        top = top.max(*ev.last().unwrap());
        bot = bot.min(ev[0]);
    }
    (top / bot).sqrt()
}

/// Assemble the LMIs for (system, method, τ).
pub fn assemble(
    sys: SystemRef<'_>,
    method: CertMethod,
    tau: f64,
    opts: &CertOptions,
) -> Result<LmiProblem, CertifyError> {
    match (sys, method) {
        (SystemRef::Sector(s), CertMethod::Thm1) => Ok(assemble_thm1(s, tau, opts)),
        (SystemRef::Sector(s), CertMethod::Thm2) => Ok(assemble_thm2(s, tau, opts)),
        (SystemRef::Sector(s), CertMethod::Cor1) => Ok(assemble_cor1(s, tau, opts)),
        (SystemRef::Linear(l), m) if m.is_linear() => {
            if m == CertMethod::LinC2 && l.n_subsystems() != 1 {
                return Err(CertifyError::WrongSystem(m, "single-subsystem linear"));
            }
            Ok(assemble_linear(l, tau, m, opts))
        }
        (_, m) if m.is_linear() => Err(CertifyError::WrongSystem(m, "linear(ized)")),
        (_, m) => Err(CertifyError::WrongSystem(m, "sector (switched)")),
    }
}

/// Decide feasibility at τ and package the certificate.
pub fn certify(
    sys: SystemRef<'_>,
    method: CertMethod,
    tau: f64,
    opts: &CertOptions,
) -> Result<RateCertificate, CertifyError> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(CertifyError::BadTau(tau));
    }
    let lp = assemble(sys, method, tau, opts)?;
    match solve_feasibility_opts(&lp, &opts.solve) {
        FeasibilityResult::Feasible { assignment, margin } => {
            let mut p_family = Vec::new();
            let mut gamma = None;
            let mut aux = Vec::new();
            for (vi, m) in assignment.mats.iter().enumerate() {
                let decl = lp.var_decl(VarId(vi));
                let name = decl.name.clone();
                let is_p =
                    name == "P" || (name.starts_with('P') && name[1..].parse::<usize>().is_ok());
                if is_p {
                    p_family.push(m.clone());
                } else if name == "Gamma" {
                    gamma = Some(m.diagonal());
                } else {
                    aux.push((name, m.clone()));
                }
            }
            let chi = chi_from_family(&p_family);
            Ok(RateCertificate {
                tau,
                method,
                p_family,
                gamma,
                aux,
                margin,
                chi,
                pair_set: opts.pair_set,
                gamma_convention: opts.gamma,
            })
        }
        FeasibilityResult::Infeasible { best_slack } => {
            Err(CertifyError::Infeasible { best_slack })
        }
        FeasibilityResult::NumericalFailure { reason } => Err(CertifyError::Numerical(reason)),
    }
}

/// Result of a minimal-rate search.
#[derive(Debug)]
pub struct MinRateResult {
    /// Smallest certified τ (within tolerance), if any.
    pub tau_star: Option<f64>,
    pub certificate: Option<RateCertificate>,
    /// Bisection anomalies (non-monotone feasibility observations).
    pub warnings: Vec<String>,
}

/// Binary search over τ ∈ (0,1) for the smallest certified rate.
///
/// Feasibility is assumed monotone in τ; the search nevertheless watches
/// for non-monotone observations (a success below an earlier failure),
/// records a warning and keeps the certified bracket.
pub fn min_rate(
    sys: SystemRef<'_>,
    method: CertMethod,
    tol: f64,
    opts: &CertOptions,
) -> MinRateResult {
    let mut warnings = Vec::new();
    let mut max_failed: Option<f64> = None;
    let probe = |tau: f64,
                     warnings: &mut Vec<String>,
                     max_failed: &mut Option<f64>|
     -> Option<RateCertificate> {
        match certify(sys, method, tau, opts) {
            Ok(c) => {
                if let Some(mf) = *max_failed {
                    if tau < mf {
                        warnings.push(format!(
                            "non-monotone feasibility: success at {tau:.6} after failure at {mf:.6}"
                        ));
                    }
                }
                Some(c)
            }
            Err(_) => {
                *max_failed = Some(max_failed.map_or(tau, |m: f64| m.max(tau)));
                None
            }
        }
    };

    let hi0 = 1.0 - tol;
    let mut best = match probe(hi0, &mut warnings, &mut max_failed) {
        Some(c) => c,
        None => {
            return MinRateResult {
                tau_star: None,
                certificate: None,
                warnings,
            }
        }
    };
    let mut lo = 0.0;
    let mut hi = hi0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match probe(mid, &mut warnings, &mut max_failed) {
            Some(c) => {
                hi = mid;
                best = c;
            }
            None => lo = mid,
        }
    }
    MinRateResult {
        tau_star: Some(hi),
        certificate: Some(best),
        warnings,
    }
}

/// JSON-serializable mirror of a certificate (matrices row-major).
#[derive(Serialize, Deserialize)]
pub struct CertificateFile {
    pub method: CertMethod,
    pub tau: f64,
    pub chi: f64,
    pub margin: f64,
    pub pair_set: PairSet,
    pub gamma_convention: GammaConvention,
    pub p_family: Vec<MatrixData>,
    pub gamma: Option<Vec<f64>>,
    pub aux: Vec<(String, MatrixData)>,
}

#[derive(Serialize, Deserialize, Clone)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub data: Vec<f64>,
}

impl MatrixData {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push(m[(i, j)]);
            }
        }
        MatrixData {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

impl RateCertificate {
    pub fn to_file(&self) -> CertificateFile {
        CertificateFile {
            method: self.method,
            tau: self.tau,
            chi: self.chi,
            margin: self.margin,
            pair_set: self.pair_set,
            gamma_convention: self.gamma_convention,
            p_family: self.p_family.iter().map(MatrixData::from_matrix).collect(),
            gamma: self.gamma.as_ref().map(|g| g.iter().copied().collect()),
            aux: self
                .aux
                .iter()
                .map(|(n, m)| (n.clone(), MatrixData::from_matrix(m)))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("certificate serialization")
    }

    /// Rebuild the in-memory certificate from its file form.
    pub fn from_file(f: &CertificateFile) -> RateCertificate {
        RateCertificate {
            tau: f.tau,
            method: f.method,
            p_family: f.p_family.iter().map(|m| m.to_matrix()).collect(),
            gamma: f
                .gamma
                .as_ref()
                .map(|g| DVector::from_row_slice(g)),
            aux: f
                .aux
                .iter()
                .map(|(n, m)| (n.clone(), m.to_matrix()))
                .collect(),
            margin: f.margin,
            chi: f.chi,
            pair_set: f.pair_set,
            gamma_convention: f.gamma_convention,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{
        BlockSpec, ObjectiveDesc, ProblemSpec, ProximalVariant, QModel, SignConvention,
    };
    use crate::system::{build_system, spectral_radius, Mode};

    fn pj_spec(n: usize, alpha: f64, beta: f64, gamma: f64) -> ProblemSpec {
        ProblemSpec {
            blocks: (0..n)
                .map(|_| BlockSpec {
                    sigma_max: 1.2,
                    sigma_min: 1.1,
                    objective: ObjectiveDesc::Quadratic { c: 0.5 },
                })
                .collect(),
            beta,
            gamma,
            alpha: vec![alpha; n],
            q: QModel::Zero,
            variant: ProximalVariant::ProxMinusBeta,
            sign_convention: SignConvention::Consistent,
        }
    }

    #[test]
    fn thm1_pair_count_and_dims() {
        let spec = pj_spec(3, 10.0, 0.7, 1.0);
        let sys = build_system(&spec, Mode::GaussSeidel).unwrap();
        let opts = CertOptions::default();
        let lp = assemble_thm1(&sys, 0.9, &opts);
        assert_eq!(lp.n_constraints(), 16); // |I|^2 with I = {1..4}
        for c in lp.constraints() {
            assert_eq!(c.expr.shape(), (8, 8)); // 2(N+1)
        }
        let lp2 = assemble_thm2(&sys, 0.9, &opts);
        assert_eq!(lp2.n_constraints(), 16);
        for c in lp2.constraints() {
            assert_eq!(c.expr.shape(), (12, 12)); // 3(N+1)
        }
        let lp3 = assemble_cor1(&sys, 0.9, &opts);
        assert_eq!(lp3.n_constraints(), 4); // one per subsystem, single P
    }

    #[test]
    fn as_printed_gamma_is_always_infeasible() {
        let spec = pj_spec(2, 10.0, 0.5, 1.0);
        let sys = build_system(&spec, Mode::Jacobi).unwrap();
        let opts = CertOptions::default(); // AsPrinted
        let err = certify(SystemRef::Sector(&sys), CertMethod::Thm1, 0.99, &opts).unwrap_err();
        assert!(matches!(err, CertifyError::Infeasible { .. }));
    }

    #[test]
    fn pj_lure_boundary_matches_spectral_radius() {
        // Point sector (quadratic) ⇒ the only admissible gain is ν/σ², so
        // the Thm1-Lure feasibility boundary sits exactly at ρ(B̄).
        let spec = pj_spec(3, 10.0, 0.7, 1.0);
        let sys = build_system(&spec, Mode::Jacobi).unwrap();
        let gains: Vec<f64> = sys.sector.mu_minus.clone();
        let lin = sys.linearize(&gains).unwrap();
        let rho = spectral_radius(&lin.bbar[0]);
        assert!(rho < 1.0, "test system should be stable, rho = {rho}");
        let opts = CertOptions::lure(PairSet::FullProduct);
        assert!(
            certify(
                SystemRef::Sector(&sys),
                CertMethod::Thm1,
                (rho + 0.02).min(0.999),
                &opts
            )
            .is_ok()
        );
        assert!(certify(SystemRef::Sector(&sys), CertMethod::Thm1, rho - 0.02, &opts).is_err());
    }

    #[test]
    fn finsler_and_cqlf_orderings_on_pj() {
        let spec = pj_spec(2, 8.0, 0.6, 1.0);
        let sys = build_system(&spec, Mode::Jacobi).unwrap();
        let opts = CertOptions::lure(PairSet::FullProduct);
        let tau = 0.99;
        let cor1 = certify(SystemRef::Sector(&sys), CertMethod::Cor1, tau, &opts);
        let thm1 = certify(SystemRef::Sector(&sys), CertMethod::Thm1, tau, &opts);
        let thm2 = certify(SystemRef::Sector(&sys), CertMethod::Thm2, tau, &opts);
        assert!(cor1.is_ok(), "cor1: {:?}", cor1.err());
        assert!(thm1.is_ok(), "thm1 must hold when cor1 does");
        assert!(thm2.is_ok(), "thm2 must hold when thm1 does");
    }

    #[test]
    fn min_rate_cqlf_matches_rho_for_normal_matrix() {
        // Normal matrix with ρ = 0.8: the common-P condition certifies
        // exactly down to the spectral radius.
        let b = DMatrix::from_row_slice(2, 2, &[0.8, 0.0, 0.0, -0.64]);
        let lin = LinearSwitchedSystem::from_matrices(vec![b], None, Mode::Jacobi);
        let tol = 1e-3;
        let res = min_rate(
            SystemRef::Linear(&lin),
            CertMethod::LinC2,
            tol,
            &CertOptions::default(),
        );
        let tau = res.tau_star.expect("stable system certifies");
        assert!(
            (tau - 0.8).abs() <= 2.0 * tol,
            "tau* = {tau}, expected 0.8 ± {}",
            2.0 * tol
        );
    }

    #[test]
    fn min_rate_zero_matrix_hits_lower_bracket() {
        let lin =
            LinearSwitchedSystem::from_matrices(vec![DMatrix::zeros(3, 3)], None, Mode::Jacobi);
        let tol = 1e-3;
        let res = min_rate(
            SystemRef::Linear(&lin),
            CertMethod::LinC2,
            tol,
            &CertOptions::default(),
        );
        let tau = res.tau_star.unwrap();
        assert!(tau <= 2.0 * tol, "expected tol-level bracket, got {tau}");
    }

    #[test]
    fn min_rate_unstable_returns_none() {
        let b = DMatrix::from_row_slice(1, 1, &[1.5]);
        let lin = LinearSwitchedSystem::from_matrices(vec![b], None, Mode::Jacobi);
        let res = min_rate(
            SystemRef::Linear(&lin),
            CertMethod::LinC2,
            1e-3,
            &CertOptions::default(),
        );
        assert!(res.tau_star.is_none());
    }

    #[test]
    fn certificate_serializes_row_major() {
        let b = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.4]);
        let lin = LinearSwitchedSystem::from_matrices(vec![b], None, Mode::Jacobi);
        let cert = certify(
            SystemRef::Linear(&lin),
            CertMethod::LinC2,
            0.9,
            &CertOptions::default(),
        )
        .unwrap();
        let json = cert.to_json();
        let back: CertificateFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.p_family[0].to_matrix(), cert.p_family[0]);
        assert!(back.chi >= 1.0);
        let rebuilt = RateCertificate::from_file(&back);
        assert_eq!(rebuilt.p_family[0], cert.p_family[0]);
    }
}
