//! Plain-text SDPA sparse export of the slack program, for cross-checking
//! an [`LmiProblem`] against external solvers. Debug aid only; nothing in
//! the crate depends on reading these files back.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use super::{LmiError, LmiProblem, VarId};

/// Serialize the feasibility problem as an SDPA-sparse (`.dat-s`) string:
///
///   min t  s.t.  Σ_k x_k·(−G_{b,k}) + t·I − F_{b,0} ⪰ 0 per block.
///
/// Scalar variables appear in declaration order, the slack t last.
pub fn to_sdpa_sparse(p: &LmiProblem) -> Result<String, LmiError> {
    if !p.equalities.is_empty() {
        return Err(LmiError::Shape(
            "SDPA export does not encode matrix equalities; eliminate them first".into(),
        ));
    }
    let mut offsets = Vec::new();
    let mut x_dim = 0usize;
    for v in &p.vars {
        offsets.push(x_dim);
        x_dim += v.entries().len();
    }
    let zero = super::Assignment {
        mats: p.vars.iter().map(|v| DMatrix::zeros(v.n, v.n)).collect(),
    };

    let mut out = String::new();
    let _ = writeln!(out, "* admm-switch LMI feasibility export");
    for (vi, v) in p.vars.iter().enumerate() {
        let _ = writeln!(
            out,
            "* var {} '{}' kind {:?} dim {} entries {}..{}",
            vi,
            v.name,
            v.kind,
            v.n,
            offsets[vi] + 1,
            offsets[vi] + v.entries().len()
        );
    }
    let m_dim = x_dim + 1;
    let n_block = p.constraints.len();
    let _ = writeln!(out, "{m_dim} = mDIM");
    let _ = writeln!(out, "{n_block} = nBLOCK");
    let sizes: Vec<String> = p
        .constraints
        .iter()
        .map(|c| c.expr.shape().0.to_string())
        .collect();
    let _ = writeln!(out, "{} = bLOCKsTRUCT", sizes.join(" "));
    let mut c_row = DVector::zeros(m_dim);
    c_row[m_dim - 1] = 1.0;
    let _ = writeln!(
        out,
        "{}",
        c_row.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" ")
    );

    let emit = |mat_no: usize, block: usize, m: &DMatrix<f64>, out: &mut String| {
        for i in 0..m.nrows() {
            for j in i..m.ncols() {
                let v = m[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(out, "{mat_no} {block} {} {} {v:.17e}", i + 1, j + 1);
                }
            }
        }
    };

    for (b, c) in p.constraints.iter().enumerate() {
        let block = b + 1;
        let dim = c.expr.shape().0;
        // F0: SDPA subtracts it, our form is t·I − A(x) ⪰ 0 with A = F0 + Σ x G
        let f0 = c.expr.eval(&zero);
        emit(0, block, &f0, &mut out);
        for (vi, v) in p.vars.iter().enumerate() {
            for (k, &entry) in v.entries().iter().enumerate() {
                let g = c.expr.coeff_for(VarId(vi), &v.basis(entry));
                let neg = -g;
                emit(offsets[vi] + k + 1, block, &neg, &mut out);
            }
        }
        let eye = DMatrix::<f64>::identity(dim, dim);
        emit(x_dim + 1, block, &eye, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::{Expr, VarKind};

    #[test]
    fn export_contains_header_and_entries() {
        let mut p = LmiProblem::new();
        let pv = p.add_var("P", VarKind::SymmetricPd, 2);
        p.add_constraint("c0", Expr::var(&p, pv).scale(-0.5));
        let text = to_sdpa_sparse(&p).unwrap();
        assert!(text.contains("= mDIM"));
        assert!(text.contains("= nBLOCK"));
        // 3 scalar entries of P plus slack
        assert!(text.contains("4 = mDIM"));
    }
}
