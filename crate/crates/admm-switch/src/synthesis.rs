//! Parameter-controller design: gain matrices K that close the loop as
//! B + DK and render divergent instances certifiably convergent, plus the
//! equality-constraint (hyperplane) reading of each gain row.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{
    self, CertMethod, CertOptions, MatrixData, RateCertificate, SystemRef,
};
use crate::lmi::{solve_feasibility_opts, Assignment, Expr, FeasibilityResult, LmiProblem, VarId, VarKind};
use crate::system::{LinearSwitchedSystem, Mode, SwitchedSystem};

/// Which synthesis condition produced a controller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerSource {
    /// Sector GS form with per-subsystem U₃ᵢ and diagonal V.
    Thm3,
    /// Sector PJ form with the equality U₃D = DV.
    Cor2,
    /// Linearized GS, Finsler-style with diagonal V.
    C3,
    /// Linearized GS, Schur form with shared Q.
    C4,
    /// Linearized PJ, Finsler-style with UD = DV.
    C5,
    /// Linearized PJ, Schur form.
    C6,
}

/// A synthesized gain matrix with its (always re-verified) closed-loop
/// certificate.
#[derive(Clone, Debug)]
pub struct Controller {
    pub k: DMatrix<f64>,
    pub source: ControllerSource,
    pub tau_design: f64,
    pub certificate: RateCertificate,
}

/// One gain row read as the equality constraint
/// Σ_j k_ij·(A_j x_j) + k_{i,N+1}·λ = q̂_i.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstraintHyperplane {
    /// Row index in K (0-based).
    pub row: usize,
    /// Coefficients over (A₁x₁, …, A_N x_N, λ).
    pub coefficients: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Error)]
pub enum SynthesisError {
    #[error("synthesis LMIs infeasible at tau (best slack {best_slack:.3e})")]
    Infeasible { best_slack: f64 },
    #[error("recovered matrix '{0}' is numerically singular (cond {1:.3e})")]
    IllConditioned(&'static str, f64),
    #[error("closed-loop re-certification failed: {0}")]
    ReCertify(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("synthesize_{0} needs a {1} system")]
    WrongMode(&'static str, &'static str),
    #[error(transparent)]
    System(#[from] crate::system::SystemError),
}

const COND_CAP: f64 = 1e12;

fn invert_checked(m: &DMatrix<f64>, name: &'static str) -> Result<DMatrix<f64>, SynthesisError> {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !cond.is_finite() || cond > COND_CAP {
        return Err(SynthesisError::IllConditioned(name, cond));
    }
    m.clone()
        .try_inverse()
        .ok_or(SynthesisError::IllConditioned(name, cond))
}

fn run_lmi(lp: &LmiProblem, opts: &CertOptions) -> Result<Assignment, SynthesisError> {
    match solve_feasibility_opts(lp, &opts.solve) {
        FeasibilityResult::Feasible { assignment, .. } => Ok(assignment),
        FeasibilityResult::Infeasible { best_slack } => {
            Err(SynthesisError::Infeasible { best_slack })
        }
        FeasibilityResult::NumericalFailure { reason } => Err(SynthesisError::Numerical(reason)),
    }
}

/// Assemble row i of K from v_i, d_i and U₃ᵢ: row i of (v_i/d_i)·(U₃ᵢ⁻¹𝕀ᵢ)ᵀ
/// is (v_i/d_i) times column i of U₃ᵢ⁻¹, transposed.
fn stack_rows_from_u3(
    u3_list: &[DMatrix<f64>],
    v_diag: &DVector<f64>,
    d: &DMatrix<f64>,
) -> Result<DMatrix<f64>, SynthesisError> {
    let dim = d.nrows();
    let mut k = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        let d_i = d[(i, i)];
        if d_i == 0.0 {
            return Err(SynthesisError::IllConditioned("D diagonal entry", f64::INFINITY));
        }
        let u3_inv = invert_checked(&u3_list[i], "U3_i")?;
        let scale = v_diag[i] / d_i;
        for j in 0..dim {
            k[(i, j)] = scale * u3_inv[(j, i)];
        }
    }
    Ok(k)
}

/// Gains for re-certifying a linearized closed loop: reuse the gains the
/// system was linearized with.
fn recertify_linear(
    lin: &LinearSwitchedSystem,
    k: &DMatrix<f64>,
    tau: f64,
    method: CertMethod,
    opts: &CertOptions,
) -> Result<RateCertificate, SynthesisError> {
    let closed = lin.apply_controller(k)?;
    certify::certify(SystemRef::Linear(&closed), method, tau, opts)
        .map_err(|e| SynthesisError::ReCertify(e.to_string()))
}

fn recertify_sector(
    sys: &SwitchedSystem,
    k: &DMatrix<f64>,
    tau: f64,
    opts: &CertOptions,
) -> Result<RateCertificate, SynthesisError> {
    let closed = sys.apply_controller(k)?;
    certify::certify(SystemRef::Sector(&closed), CertMethod::Thm1, tau, opts)
        .map_err(|e| SynthesisError::ReCertify(e.to_string()))
}

/// Theorem-3 synthesis for GS systems: solves the 3-block family with the
/// 𝕀ᵢV corner, recovers K_i = (v_i/d_i)(U₃ᵢ⁻¹𝕀ᵢ)ᵀ, stacks rows, and
/// re-certifies the closed loop before returning.
pub fn synthesize_gs(
    sys: &SwitchedSystem,
    tau: f64,
    opts: &CertOptions,
) -> Result<Controller, SynthesisError> {
    if sys.mode != Mode::GaussSeidel {
        return Err(SynthesisError::WrongMode("gs", "Gauss-Seidel"));
    }
    let dim = sys.dim();
    let n_sub = sys.n_subsystems();
    let mut lp = LmiProblem::new();
    let p: Vec<VarId> = (0..n_sub)
        .map(|i| lp.add_var(format!("P{}", i + 1), VarKind::SymmetricPd, dim))
        .collect();
    let gamma = lp.add_var("Gamma", VarKind::DiagonalNonneg, dim);
    let u3: Vec<VarId> = (0..n_sub)
        .map(|i| lp.add_var(format!("U3_{}", i + 1), VarKind::Square, dim))
        .collect();
    let v = lp.add_var("V", VarKind::Diagonal, dim);
    let eye = DMatrix::identity(dim, dim);
    let sgn = match opts.gamma {
        certify::GammaConvention::AsPrinted => 1.0,
        certify::GammaConvention::Lure => -1.0,
    };
    for (i, j) in certify::pairs_for(n_sub, opts.pair_set) {
        let (a_i, c_i) = sys.subsystem(i);
        let mut sel = DMatrix::zeros(dim, dim);
        sel[(i, i)] = 1.0;
        let b11 = Expr::var(&lp, p[i]).scale(-tau * tau).add(
            Expr::sandwich(eye.clone(), gamma, sys.sector.f1.clone()).scale(sgn),
        );
        let b12 = Expr::sandwich(eye.clone(), gamma, sys.sector.f2.clone());
        let b13 = Expr::sandwich_t(a_i.transpose(), u3[i], eye.clone())
            .add(Expr::sandwich(sel.clone(), v, eye.clone()));
        let b22 = Expr::var(&lp, gamma).scale(sgn);
        let b23 = Expr::sandwich_t(c_i.transpose(), u3[i], eye.clone());
        let b33 = Expr::var(&lp, p[j])
            .sub(Expr::var(&lp, u3[i]))
            .sub(Expr::sandwich_t(eye.clone(), u3[i], eye.clone()));
        let e = Expr::sym_from_upper(vec![
            vec![Some(b11), Some(b12), Some(b13)],
            vec![None, Some(b22), Some(b23)],
            vec![None, None, Some(b33)],
        ]);
        lp.add_constraint(format!("thm3_{}_{}", i + 1, j + 1), e);
    }
    let asg = run_lmi(&lp, opts)?;
    let u3_mats: Vec<DMatrix<f64>> = u3.iter().map(|id| asg.mats[id.0].clone()).collect();
    let v_diag = asg.mats[v.0].diagonal();
    let k = stack_rows_from_u3(&u3_mats, &v_diag, &sys.d)?;
    let certificate = recertify_sector(sys, &k, tau, opts)?;
    Ok(Controller {
        k,
        source: ControllerSource::Thm3,
        tau_design: tau,
        certificate,
    })
}

/// Corollary-2 synthesis for PJ systems: 3-block sector form plus the
/// change-of-variables equality U₃D = DV; K = V⁻¹H.
pub fn synthesize_pj(
    sys: &SwitchedSystem,
    tau: f64,
    opts: &CertOptions,
) -> Result<Controller, SynthesisError> {
    if sys.mode != Mode::Jacobi {
        return Err(SynthesisError::WrongMode("pj", "Jacobi"));
    }
    let dim = sys.dim();
    let mut lp = LmiProblem::new();
    let p = lp.add_var("P", VarKind::SymmetricPd, dim);
    let gamma = lp.add_var("Gamma", VarKind::DiagonalNonneg, dim);
    let u3 = lp.add_var("U3", VarKind::Square, dim);
    let v = lp.add_var("V", VarKind::Square, dim);
    let h = lp.add_var("H", VarKind::Square, dim);
    let eye = DMatrix::identity(dim, dim);
    let sgn = match opts.gamma {
        certify::GammaConvention::AsPrinted => 1.0,
        certify::GammaConvention::Lure => -1.0,
    };
    let b = &sys.b;
    let c = &sys.c;
    let d = &sys.d;
    let b11 = Expr::var(&lp, p).scale(-tau * tau).add(
        Expr::sandwich(eye.clone(), gamma, sys.sector.f1.clone()).scale(sgn),
    );
    let b12 = Expr::sandwich(eye.clone(), gamma, sys.sector.f2.clone());
    let b13 = Expr::sandwich_t(b.transpose(), u3, eye.clone())
        .add(Expr::sandwich_t(eye.clone(), h, d.transpose()));
    let b22 = Expr::var(&lp, gamma).scale(sgn);
    let b23 = Expr::sandwich_t(c.transpose(), u3, eye.clone());
    let b33 = Expr::var(&lp, p)
        .sub(Expr::var(&lp, u3))
        .sub(Expr::sandwich_t(eye.clone(), u3, eye.clone()));
    let e = Expr::sym_from_upper(vec![
        vec![Some(b11), Some(b12), Some(b13)],
        vec![None, Some(b22), Some(b23)],
        vec![None, None, Some(b33)],
    ]);
    lp.add_constraint("cor2", e);
    lp.add_equality(
        "U3D_eq_DV",
        Expr::sandwich(eye.clone(), u3, d.clone()),
        Expr::sandwich(d.clone(), v, eye.clone()),
    );
    let asg = run_lmi(&lp, opts)?;
    let v_inv = invert_checked(&asg.mats[v.0], "V")?;
    let k = v_inv * &asg.mats[h.0];
    let certificate = recertify_sector(sys, &k, tau, opts)?;
    Ok(Controller {
        k,
        source: ControllerSource::Cor2,
        tau_design: tau,
        certificate,
    })
}

/// Linearized synthesis in one of the four corollary forms.
pub fn synthesize_linear(
    lin: &LinearSwitchedSystem,
    tau: f64,
    source: ControllerSource,
    opts: &CertOptions,
) -> Result<Controller, SynthesisError> {
    let dim = lin.dim();
    let n_sub = lin.n_subsystems();
    let eye = DMatrix::identity(dim, dim);
    match source {
        ControllerSource::C4 | ControllerSource::C6 => {
            // Schur form: [[−Q, B̄ᵢQ + DᵢNᵢ], [⋆, −τ²Q]] ≺ 0, K = NQ⁻¹.
            let mut lp = LmiProblem::new();
            let q = lp.add_var("Q", VarKind::SymmetricPd, dim);
            let n_vars: Vec<VarId> = (0..n_sub)
                .map(|i| lp.add_var(format!("N{}", i + 1), VarKind::Square, dim))
                .collect();
            for (i, bbar) in lin.bbar.iter().enumerate() {
                let d_i = if source == ControllerSource::C6 {
                    lin.d.clone()
                } else {
                    let mut sel = DMatrix::zeros(dim, dim);
                    sel[(i, i)] = lin.d[(i, i)];
                    sel
                };
                let b11 = Expr::var(&lp, q).scale(-1.0);
                let b12 = Expr::sandwich(bbar.clone(), q, eye.clone())
                    .add(Expr::sandwich(d_i, n_vars[i], eye.clone()));
                let b22 = Expr::var(&lp, q).scale(-tau * tau);
                let e = Expr::sym_from_upper(vec![
                    vec![Some(b11), Some(b12)],
                    vec![None, Some(b22)],
                ]);
                lp.add_constraint(format!("schur_{}", i + 1), e);
            }
            let asg = run_lmi(&lp, opts)?;
            let q_inv = invert_checked(&asg.mats[q.0], "Q")?;
            let k = if source == ControllerSource::C6 {
                &asg.mats[n_vars[0].0] * &q_inv
            } else {
                // stack row i of N_i Q⁻¹
                let mut k = DMatrix::zeros(dim, dim);
                for (i, nv) in n_vars.iter().enumerate() {
                    let ki = &asg.mats[nv.0] * &q_inv;
                    for j in 0..dim {
                        k[(i, j)] = ki[(i, j)];
                    }
                }
                k
            };
            let method = CertMethod::LinC1Cqlf;
            let certificate = recertify_linear(lin, &k, tau, method, opts)?;
            Ok(Controller {
                k,
                source,
                tau_design: tau,
                certificate,
            })
        }
        ControllerSource::C3 => {
            // Finsler-style GS form with diagonal V and per-subsystem U₃ᵢ.
            let mut lp = LmiProblem::new();
            let p: Vec<VarId> = (0..n_sub)
                .map(|i| lp.add_var(format!("P{}", i + 1), VarKind::SymmetricPd, dim))
                .collect();
            let u3: Vec<VarId> = (0..n_sub)
                .map(|i| lp.add_var(format!("U3_{}", i + 1), VarKind::Square, dim))
                .collect();
            let v = lp.add_var("V", VarKind::Diagonal, dim);
            for (i, j) in certify::pairs_for(n_sub, opts.pair_set) {
                let bbar = &lin.bbar[i];
                let mut sel = DMatrix::zeros(dim, dim);
                sel[(i, i)] = 1.0;
                let b11 = Expr::var(&lp, p[i]).scale(-tau * tau);
                let b12 = Expr::sandwich_t(bbar.transpose(), u3[i], eye.clone())
                    .add(Expr::sandwich(sel, v, eye.clone()));
                let b22 = Expr::var(&lp, p[j])
                    .sub(Expr::var(&lp, u3[i]))
                    .sub(Expr::sandwich_t(eye.clone(), u3[i], eye.clone()));
                let e = Expr::sym_from_upper(vec![
                    vec![Some(b11), Some(b12)],
                    vec![None, Some(b22)],
                ]);
                lp.add_constraint(format!("c3_{}_{}", i + 1, j + 1), e);
            }
            let asg = run_lmi(&lp, opts)?;
            let u3_mats: Vec<DMatrix<f64>> = u3.iter().map(|id| asg.mats[id.0].clone()).collect();
            let v_diag = asg.mats[v.0].diagonal();
            let k = stack_rows_from_u3(&u3_mats, &v_diag, &lin.d)?;
            let certificate = recertify_linear(lin, &k, tau, CertMethod::LinC1Sqlf, opts)?;
            Ok(Controller {
                k,
                source,
                tau_design: tau,
                certificate,
            })
        }
        ControllerSource::C5 => {
            if n_sub != 1 {
                return Err(SynthesisError::WrongMode("linear(C5)", "single-subsystem"));
            }
            let mut lp = LmiProblem::new();
            let p = lp.add_var("P", VarKind::SymmetricPd, dim);
            let u = lp.add_var("U", VarKind::Square, dim);
            let v = lp.add_var("V", VarKind::Square, dim);
            let h = lp.add_var("H", VarKind::Square, dim);
            let bbar = &lin.bbar[0];
            let b11 = Expr::var(&lp, p).scale(-tau * tau);
            let b12 = Expr::sandwich_t(bbar.transpose(), u, eye.clone())
                .add(Expr::sandwich_t(eye.clone(), h, lin.d.transpose()));
            let b22 = Expr::var(&lp, p)
                .sub(Expr::var(&lp, u))
                .sub(Expr::sandwich_t(eye.clone(), u, eye.clone()));
            let e = Expr::sym_from_upper(vec![
                vec![Some(b11), Some(b12)],
                vec![None, Some(b22)],
            ]);
            lp.add_constraint("c5", e);
            lp.add_equality(
                "UD_eq_DV",
                Expr::sandwich(eye.clone(), u, lin.d.clone()),
                Expr::sandwich(lin.d.clone(), v, eye.clone()),
            );
            let asg = run_lmi(&lp, opts)?;
            let v_inv = invert_checked(&asg.mats[v.0], "V")?;
            let k = v_inv * &asg.mats[h.0];
            let certificate = recertify_linear(lin, &k, tau, CertMethod::LinC2, opts)?;
            Ok(Controller {
                k,
                source,
                tau_design: tau,
                certificate,
            })
        }
        ControllerSource::Thm3 | ControllerSource::Cor2 => Err(SynthesisError::WrongMode(
            "linear",
            "sector (use synthesize_gs / synthesize_pj)",
        )),
    }
}

/// Read the gain rows as equality-constraint hyperplanes anchored at the
/// equilibrium ξ*: Σ_j k_ij ξ_j + k_{i,N+1} λ = q̂_i with
/// q̂_i = (K ξ*)_i. Rows that are identically zero carry no constraint and
/// are dropped.
pub fn controller_constraints(
    k: &DMatrix<f64>,
    equilibrium: &DVector<f64>,
) -> Vec<ConstraintHyperplane> {
    let mut out = Vec::new();
    for i in 0..k.nrows() {
        let coeffs: Vec<f64> = (0..k.ncols()).map(|j| k[(i, j)]).collect();
        if coeffs.iter().all(|&c| c.abs() < 1e-14) {
            continue;
        }
        let rhs: f64 = coeffs
            .iter()
            .zip(equilibrium.iter())
            .map(|(c, x)| c * x)
            .sum();
        out.push(ConstraintHyperplane {
            row: i,
            coefficients: coeffs,
            rhs,
        });
    }
    out
}

/// Serialized controller file: gain matrix, design rate, and the full
/// closed-loop certificate.
#[derive(Serialize, Deserialize)]
pub struct ControllerFile {
    pub source: ControllerSource,
    pub tau_design: f64,
    pub k: MatrixData,
    pub certificate: certify::CertificateFile,
}

impl Controller {
    pub fn to_file(&self) -> ControllerFile {
        ControllerFile {
            source: self.source,
            tau_design: self.tau_design,
            k: MatrixData::from_matrix(&self.k),
            certificate: self.certificate.to_file(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("controller serialization")
    }

    pub fn from_file(f: &ControllerFile) -> Controller {
        Controller {
            k: f.k.to_matrix(),
            source: f.source,
            tau_design: f.tau_design,
            certificate: RateCertificate::from_file(&f.certificate),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::{GammaConvention, PairSet};
    use crate::problem::{
        BlockSpec, ObjectiveDesc, ProblemSpec, ProximalVariant, QModel, SignConvention,
    };
    use crate::system::{build_system, spectral_radius};

    fn counter_example() -> ProblemSpec {
        ProblemSpec {
            blocks: [3.0f64, 6.0, 9.0]
                .iter()
                .map(|&s2| BlockSpec {
                    sigma_max: s2.sqrt(),
                    sigma_min: s2.sqrt(),
                    objective: ObjectiveDesc::Quadratic { c: 0.05 },
                })
                .collect(),
            beta: 1.0,
            gamma: 1.0,
            alpha: vec![1.0; 3],
            q: QModel::Zero,
            variant: ProximalVariant::ProxMinusBeta,
            sign_convention: SignConvention::Consistent,
        }
    }

    #[test]
    fn scalar_c6_lands_in_analytic_interval() {
        // b = 1.2, d = −1, τ = 0.5: |1.2 − k| < 0.5 ⇔ k ∈ (0.7, 1.7).
        let lin = LinearSwitchedSystem::from_matrices(
            vec![DMatrix::from_element(1, 1, 1.2)],
            Some(DMatrix::from_element(1, 1, -1.0)),
            Mode::Jacobi,
        );
        let ctrl = synthesize_linear(&lin, 0.5, ControllerSource::C6, &CertOptions::default())
            .expect("scalar synthesis");
        let k = ctrl.k[(0, 0)];
        assert!(k > 0.7 && k < 1.7, "k = {k}");
        assert!((1.2 - k).abs() < 0.5);
    }

    #[test]
    fn scalar_c5_matches_interval_too() {
        let lin = LinearSwitchedSystem::from_matrices(
            vec![DMatrix::from_element(1, 1, 1.2)],
            Some(DMatrix::from_element(1, 1, -1.0)),
            Mode::Jacobi,
        );
        let ctrl = synthesize_linear(&lin, 0.5, ControllerSource::C5, &CertOptions::default())
            .expect("scalar C5 synthesis");
        let k = ctrl.k[(0, 0)];
        assert!(k > 0.7 && k < 1.7, "k = {k}");
    }

    #[test]
    fn c6_stabilizes_counter_example() {
        let spec = counter_example();
        let sys = build_system(&spec, Mode::Jacobi).unwrap();
        let gains: Vec<f64> = sys.sector.mu_minus.clone();
        let lin = sys.linearize(&gains).unwrap();
        assert!(spectral_radius(&lin.bbar[0]) > 1.0);
        let ctrl = synthesize_linear(&lin, 0.9, ControllerSource::C6, &CertOptions::default())
            .expect("C6 on counter example");
        let closed = lin.apply_controller(&ctrl.k).unwrap();
        let rho = spectral_radius(&closed.bbar[0]);
        assert!(rho < 0.9, "closed-loop rho = {rho}");
        assert!(ctrl.certificate.tau <= 0.9 + 1e-12);
    }

    #[test]
    fn cor2_sector_form_stabilizes_counter_example() {
        let spec = counter_example();
        let sys = build_system(&spec, Mode::Jacobi).unwrap();
        let opts = CertOptions {
            pair_set: PairSet::FullProduct,
            gamma: GammaConvention::Lure,
            ..CertOptions::default()
        };
        let ctrl = synthesize_pj(&sys, 0.9, &opts).expect("Cor2 synthesis");
        // closed loop with the admissible constant gain must contract
        let gains: Vec<f64> = sys.sector.mu_minus.clone();
        let closed = sys.apply_controller(&ctrl.k).unwrap();
        let lin = closed.linearize(&gains).unwrap();
        let rho = spectral_radius(&lin.bbar[0]);
        assert!(rho < 0.9, "closed-loop rho = {rho}");
    }

    #[test]
    fn stable_system_synthesis_returns_verified_controller() {
        // Already-stable linear system: synthesis must hand back a
        // controller whose closed loop re-certifies (the gain itself is
        // whatever the analytic center picks).
        let b = DMatrix::from_row_slice(2, 2, &[0.3, 0.1, 0.0, 0.2]);
        let lin = LinearSwitchedSystem::from_matrices(vec![b], None, Mode::Jacobi);
        let ctrl = synthesize_linear(&lin, 0.9, ControllerSource::C6, &CertOptions::default())
            .expect("stable synthesis");
        let closed = lin.apply_controller(&ctrl.k).unwrap();
        assert!(spectral_radius(&closed.bbar[0]) < 0.9);
    }

    #[test]
    fn thm3_gs_synthesis_on_counter_example_cyclic() {
        let spec = counter_example();
        let sys = build_system(&spec, Mode::GaussSeidel).unwrap();
        let opts = CertOptions {
            pair_set: PairSet::CyclicOnly,
            gamma: GammaConvention::Lure,
            ..CertOptions::default()
        };
        match synthesize_gs(&sys, 0.9, &opts) {
            Ok(ctrl) => {
                assert_eq!(ctrl.certificate.tau, 0.9);
                assert!(ctrl.certificate.margin > 0.0);
            }
            Err(SynthesisError::Infeasible { .. }) => {
                panic!("expected Thm3 synthesis to succeed on cyclic pair set");
            }
            Err(e) => panic!("unexpected synthesis error: {e}"),
        }
    }

    #[test]
    fn hyperplanes_from_k() {
        let k = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, -2.0]);
        let star = DVector::from_row_slice(&[3.0, 1.0]);
        let hp = controller_constraints(&k, &star);
        assert_eq!(hp.len(), 1); // zero row dropped
        assert_eq!(hp[0].row, 1);
        assert_eq!(hp[0].coefficients, vec![1.0, -2.0]);
        assert!((hp[0].rhs - 1.0).abs() < 1e-14);

        // origin equilibrium: all rhs zero
        let hp0 = controller_constraints(&k, &DVector::zeros(2));
        assert_eq!(hp0[0].rhs, 0.0);
    }
}
