//! Small dense LMI feasibility problems and their verification.
//!
//! An [`LmiProblem`] is a dictionary of matrix-valued decision variables, a
//! list of symmetric matrix expressions that must be negative definite, and
//! optional affine matrix equalities. [`solver::solve_feasibility`] decides
//! strict feasibility with a self-contained barrier method;
//! [`verify_assignment`] re-checks any assignment from scratch through the
//! eigensolver so no certificate is ever trusted on the solver's word alone.

pub mod eig;
pub mod sdpa;
pub mod solver;

use nalgebra::DMatrix;
use thiserror::Error;

pub use eig::eigvals_sym;
pub use solver::{solve_feasibility, solve_feasibility_opts, FeasibilityResult, SolveOptions};

#[derive(Debug, Error)]
pub enum LmiError {
    #[error("matrix not symmetric: max asymmetry {0:.3e}")]
    NotSymmetric(f64),
    #[error("constraint '{0}' is not symmetric (asymmetry {1:.3e})")]
    ConstraintNotSymmetric(String, f64),
    #[error("constraint '{name}' dimension {dim} exceeds cap {cap}")]
    DimensionCap {
        name: String,
        dim: usize,
        cap: usize,
    },
    #[error("expression shape mismatch: {0}")]
    Shape(String),
    #[error("unknown variable id {0}")]
    BadVar(usize),
    #[error("eigendecomposition failed reconstruction: error {0:.3e}")]
    Reconstruction(f64),
}

/// Structure tag for a decision variable (all variables are square n×n).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    /// Symmetric, constrained ≻ 0 by the solver's variable domain.
    SymmetricPd,
    /// Symmetric, unconstrained.
    Symmetric,
    /// Diagonal with nonnegative entries.
    DiagonalNonneg,
    /// Diagonal, unconstrained.
    Diagonal,
    /// Fully unstructured square matrix.
    Square,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarId(pub(crate) usize);

#[derive(Clone, Debug)]
pub struct VarDecl {
    pub name: String,
    pub kind: VarKind,
    pub n: usize,
}

impl VarDecl {
    /// Free scalar entries given the structure tag.
    pub(crate) fn entries(&self) -> Vec<(usize, usize)> {
        let n = self.n;
        match self.kind {
            VarKind::SymmetricPd | VarKind::Symmetric => (0..n)
                .flat_map(|i| (i..n).map(move |j| (i, j)))
                .collect(),
            VarKind::DiagonalNonneg | VarKind::Diagonal => (0..n).map(|i| (i, i)).collect(),
            VarKind::Square => (0..n)
                .flat_map(|i| (0..n).map(move |j| (i, j)))
                .collect(),
        }
    }

    /// Basis matrix for one free entry.
    pub(crate) fn basis(&self, entry: (usize, usize)) -> DMatrix<f64> {
        let (i, j) = entry;
        let mut m = DMatrix::zeros(self.n, self.n);
        m[(i, j)] = 1.0;
        if matches!(self.kind, VarKind::SymmetricPd | VarKind::Symmetric) && i != j {
            m[(j, i)] = 1.0;
        }
        m
    }
}

/// One affine term `coeff * L * X * R` (or with Xᵀ).
#[derive(Clone, Debug)]
struct Term {
    coeff: f64,
    left: DMatrix<f64>,
    var: VarId,
    trans: bool,
    right: DMatrix<f64>,
}

/// Affine matrix expression in the problem's variables.
#[derive(Clone, Debug)]
pub struct Expr {
    rows: usize,
    cols: usize,
    konst: DMatrix<f64>,
    terms: Vec<Term>,
}

impl Expr {
    pub fn zeros(rows: usize, cols: usize) -> Expr {
        Expr {
            rows,
            cols,
            konst: DMatrix::zeros(rows, cols),
            terms: Vec::new(),
        }
    }

    pub fn konst(m: DMatrix<f64>) -> Expr {
        Expr {
            rows: m.nrows(),
            cols: m.ncols(),
            konst: m,
            terms: Vec::new(),
        }
    }

    /// The bare variable X.
    pub fn var(p: &LmiProblem, v: VarId) -> Expr {
        let n = p.vars[v.0].n;
        Expr::sandwich(DMatrix::identity(n, n), v, DMatrix::identity(n, n))
    }

    /// L · X · R.
    pub fn sandwich(left: DMatrix<f64>, v: VarId, right: DMatrix<f64>) -> Expr {
        Expr {
            rows: left.nrows(),
            cols: right.ncols(),
            konst: DMatrix::zeros(left.nrows(), right.ncols()),
            terms: vec![Term {
                coeff: 1.0,
                left,
                var: v,
                trans: false,
                right,
            }],
        }
    }

    /// L · Xᵀ · R.
    pub fn sandwich_t(left: DMatrix<f64>, v: VarId, right: DMatrix<f64>) -> Expr {
        Expr {
            rows: left.nrows(),
            cols: right.ncols(),
            konst: DMatrix::zeros(left.nrows(), right.ncols()),
            terms: vec![Term {
                coeff: 1.0,
                left,
                var: v,
                trans: true,
                right,
            }],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn scale(mut self, s: f64) -> Expr {
        self.konst *= s;
        for t in &mut self.terms {
            t.coeff *= s;
        }
        self
    }

    pub fn add(mut self, other: Expr) -> Expr {
        assert_eq!(self.shape(), other.shape(), "expr shape mismatch in add");
        self.konst += other.konst;
        self.terms.extend(other.terms);
        self
    }

    pub fn sub(self, other: Expr) -> Expr {
        self.add(other.scale(-1.0))
    }

    /// Transpose: (L X R)ᵀ = Rᵀ Xᵀ Lᵀ.
    pub fn t(&self) -> Expr {
        Expr {
            rows: self.cols,
            cols: self.rows,
            konst: self.konst.transpose(),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff,
                    left: t.right.transpose(),
                    var: t.var,
                    trans: !t.trans,
                    right: t.left.transpose(),
                })
                .collect(),
        }
    }

    /// Symmetrized block matrix from the upper triangle: entry (i,j) for
    /// i ≤ j comes from `upper`, and (j,i) is its transpose.
    pub fn sym_from_upper(upper: Vec<Vec<Option<Expr>>>) -> Expr {
        let k = upper.len();
        let mut grid: Vec<Vec<Option<Expr>>> = vec![(0..k).map(|_| None).collect(); k];
        for (i, row) in upper.into_iter().enumerate() {
            assert_eq!(row.len(), k, "upper triangle must be a full k×k grid");
            for (j, cell) in row.into_iter().enumerate() {
                if let Some(e) = cell {
                    assert!(j >= i, "entries below the diagonal must be None");
                    if i != j {
                        grid[j][i] = Some(e.t());
                    }
                    grid[i][j] = Some(e);
                }
            }
        }
        let row_dims: Vec<usize> = (0..k)
            .map(|i| {
                grid[i]
                    .iter()
                    .flatten()
                    .map(|e| e.rows)
                    .next()
                    .expect("every block row needs at least one entry")
            })
            .collect();
        let col_dims: Vec<usize> = (0..k)
            .map(|j| {
                (0..k)
                    .filter_map(|i| grid[i][j].as_ref().map(|e| e.cols))
                    .next()
                    .expect("every block column needs at least one entry")
            })
            .collect();
        let total_r: usize = row_dims.iter().sum();
        let total_c: usize = col_dims.iter().sum();
        let mut out = Expr::zeros(total_r, total_c);
        let mut roff = 0;
        for i in 0..k {
            let mut coff = 0;
            for j in 0..k {
                if let Some(e) = &grid[i][j] {
                    assert_eq!(
                        (e.rows, e.cols),
                        (row_dims[i], col_dims[j]),
                        "inconsistent block shapes at ({i},{j})"
                    );
                    out.konst
                        .view_mut((roff, coff), (e.rows, e.cols))
                        .copy_from(&e.konst);
                    for t in &e.terms {
                        // embed L into the tall block row, R into the wide block col
                        let mut left = DMatrix::zeros(total_r, t.left.ncols());
                        left.view_mut((roff, 0), (t.left.nrows(), t.left.ncols()))
                            .copy_from(&t.left);
                        let mut right = DMatrix::zeros(t.right.nrows(), total_c);
                        right
                            .view_mut((0, coff), (t.right.nrows(), t.right.ncols()))
                            .copy_from(&t.right);
                        out.terms.push(Term {
                            coeff: t.coeff,
                            left,
                            var: t.var,
                            trans: t.trans,
                            right,
                        });
                    }
                }
                coff += col_dims[j];
            }
            roff += row_dims[i];
        }
        out
    }

    /// Evaluate at a full assignment.
    pub fn eval(&self, asg: &Assignment) -> DMatrix<f64> {
        let mut out = self.konst.clone();
        for t in &self.terms {
            let x = &asg.mats[t.var.0];
            let xm = if t.trans { x.transpose() } else { x.clone() };
            out += (&t.left * xm * &t.right) * t.coeff;
        }
        out
    }

    /// Coefficient matrix of one scalar entry of one variable, i.e. the
    /// derivative of the expression along that entry's basis matrix.
    pub(crate) fn coeff_for(&self, var: VarId, basis: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for t in &self.terms {
            if t.var != var {
                continue;
            }
            let b = if t.trans { basis.transpose() } else { basis.clone() };
            out += (&t.left * b * &t.right) * t.coeff;
        }
        out
    }

    pub(crate) fn vars_used(&self) -> Vec<VarId> {
        let mut ids: Vec<usize> = self.terms.iter().map(|t| t.var.0).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().map(VarId).collect()
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::add(self, rhs)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(-1.0)
    }
}

/// Named symmetric constraint, required ≺ 0.
#[derive(Clone, Debug)]
pub struct Constraint {
    pub name: String,
    pub expr: Expr,
}

/// Affine matrix equality lhs = rhs (e.g. U₃D = DV).
#[derive(Clone, Debug)]
pub struct Equality {
    pub name: String,
    pub lhs: Expr,
    pub rhs: Expr,
}

/// Variable assignment, indexed like the problem's variable table.
#[derive(Clone, Debug)]
pub struct Assignment {
    pub mats: Vec<DMatrix<f64>>,
}

impl Assignment {
    pub fn get<'a>(&'a self, p: &LmiProblem, name: &str) -> Option<&'a DMatrix<f64>> {
        p.vars
            .iter()
            .position(|v| v.name == name)
            .map(|i| &self.mats[i])
    }

    /// Scale every variable by c (meaningful for homogeneous problems).
    pub fn scaled(&self, c: f64) -> Assignment {
        Assignment {
            mats: self.mats.iter().map(|m| m * c).collect(),
        }
    }
}

/// A list of symmetric negative-definiteness constraints, affine in a
/// dictionary of structured matrix variables.
#[derive(Clone, Debug, Default)]
pub struct LmiProblem {
    pub(crate) vars: Vec<VarDecl>,
    pub(crate) constraints: Vec<Constraint>,
    pub(crate) equalities: Vec<Equality>,
}

impl LmiProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, n: usize) -> VarId {
        self.vars.push(VarDecl {
            name: name.into(),
            kind,
            n,
        });
        VarId(self.vars.len() - 1)
    }

    /// Add a symmetric constraint expr ≺ 0.
    pub fn add_constraint(&mut self, name: impl Into<String>, expr: Expr) {
        assert_eq!(expr.rows, expr.cols, "constraints must be square");
        self.constraints.push(Constraint {
            name: name.into(),
            expr,
        });
    }

    pub fn add_equality(&mut self, name: impl Into<String>, lhs: Expr, rhs: Expr) {
        assert_eq!(lhs.shape(), rhs.shape(), "equality shape mismatch");
        self.equalities.push(Equality {
            name: name.into(),
            lhs,
            rhs,
        });
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_decl(&self, v: VarId) -> &VarDecl {
        &self.vars[v.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Zero assignment with PD variables at identity and nonnegative
    /// diagonals at one; the solver's interior starting guess.
    pub fn default_assignment(&self) -> Assignment {
        Assignment {
            mats: self
                .vars
                .iter()
                .map(|v| match v.kind {
                    VarKind::SymmetricPd => DMatrix::identity(v.n, v.n),
                    VarKind::DiagonalNonneg => DMatrix::identity(v.n, v.n),
                    _ => DMatrix::zeros(v.n, v.n),
                })
                .collect(),
        }
    }
}

/// Per-constraint outcome of a verification pass.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// (name, max eigenvalue) per constraint; pass needs ≤ −eps.
    pub constraint_margins: Vec<(String, f64)>,
    /// (name, min eigenvalue) per PD variable; pass needs ≥ eps.
    pub pd_margins: Vec<(String, f64)>,
    /// (name, max |residual|) per equality; pass needs ≤ 1e−8.
    pub equality_residuals: Vec<(String, f64)>,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// Smallest achieved strictness gap across constraints (−max eig).
    pub fn margin(&self) -> f64 {
        self.constraint_margins
            .iter()
            .map(|(_, m)| -m)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Re-evaluate every constraint numerically and check definiteness margins,
/// PD variable floors, nonnegativity tags and equality residuals.
pub fn verify_assignment(p: &LmiProblem, asg: &Assignment, eps: f64) -> VerifyReport {
    let mut report = VerifyReport {
        constraint_margins: Vec::new(),
        pd_margins: Vec::new(),
        equality_residuals: Vec::new(),
        failures: Vec::new(),
    };
    for c in &p.constraints {
        let m = c.expr.eval(asg);
        match eigvals_sym(&m) {
            Ok(ev) => {
                let top = *ev.last().unwrap();
                if top > -eps {
                    report
                        .failures
                        .push(format!("constraint '{}' max eig {top:.3e} > -eps", c.name));
                }
                report.constraint_margins.push((c.name.clone(), top));
            }
            Err(e) => report
                .failures
                .push(format!("constraint '{}' not checkable: {e}", c.name)),
        }
    }
    for (vi, v) in p.vars.iter().enumerate() {
        match v.kind {
            VarKind::SymmetricPd => {
                let ev = eigvals_sym(&asg.mats[vi]).unwrap_or_else(|_| vec![f64::NEG_INFINITY]);
                let lo = ev[0];
                if lo < eps {
                    report
                        .failures
                        .push(format!("PD variable '{}' min eig {lo:.3e} < eps", v.name));
                }
                report.pd_margins.push((v.name.clone(), lo));
            }
            VarKind::DiagonalNonneg => {
                let lo = (0..v.n).map(|i| asg.mats[vi][(i, i)]).fold(f64::INFINITY, f64::min);
                if lo < -1e-12 {
                    report
                        .failures
                        .push(format!("nonneg diagonal '{}' has entry {lo:.3e}", v.name));
                }
            }
            _ => {}
        }
    }
    for e in &p.equalities {
        let r = e.lhs.eval(asg) - e.rhs.eval(asg);
        let res = r.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if res > 1e-8 {
            report
                .failures
                .push(format!("equality '{}' residual {res:.3e}", e.name));
        }
        report.equality_residuals.push((e.name.clone(), res));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expr_eval_and_transpose() {
        let mut p = LmiProblem::new();
        let x = p.add_var("X", VarKind::Square, 2);
        let l = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0]);
        let r = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let e = Expr::sandwich(l.clone(), x, r.clone());
        let xm = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 2.0, 3.0]);
        let asg = Assignment { mats: vec![xm.clone()] };
        let got = e.eval(&asg);
        assert_eq!(got, &l * &xm * &r);
        assert_eq!(e.t().eval(&asg), (&l * &xm * &r).transpose());
    }

    #[test]
    fn sym_from_upper_builds_symmetric_matrices() {
        let mut p = LmiProblem::new();
        let x = p.add_var("P", VarKind::Symmetric, 2);
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 1.0, -1.0, 2.0]);
        let blocks = vec![
            vec![Some(Expr::var(&p, x)), Some(Expr::sandwich(a.clone(), x, DMatrix::identity(2, 2)))],
            vec![None, Some(Expr::var(&p, x).scale(2.0))],
        ];
        let e = Expr::sym_from_upper(blocks);
        let xm = DMatrix::from_row_slice(2, 2, &[1.0, 0.25, 0.25, 3.0]);
        let m = e.eval(&Assignment { mats: vec![xm.clone()] });
        assert_eq!(m.nrows(), 4);
        let asym = (&m - m.transpose()).iter().fold(0.0f64, |s, &v| s.max(v.abs()));
        assert!(asym < 1e-14);
        assert_eq!(m.view((0, 2), (2, 2)).clone_owned(), &a * &xm);
    }

    #[test]
    fn verify_flags_violations() {
        let mut p = LmiProblem::new();
        let x = p.add_var("P", VarKind::SymmetricPd, 1);
        // require P - 0.81 P < 0, i.e. 0.19 P < 0: impossible for P > 0.
        let e = Expr::var(&p, x).scale(1.0 - 0.81);
        p.add_constraint("stein", e);
        let asg = Assignment {
            mats: vec![DMatrix::from_element(1, 1, 1.0)],
        };
        let rep = verify_assignment(&p, &asg, 1e-7);
        assert!(!rep.passed());
        assert!((rep.constraint_margins[0].1 - 0.19).abs() < 1e-12);
    }
}
