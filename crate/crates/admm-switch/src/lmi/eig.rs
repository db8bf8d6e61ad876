//! Symmetric eigendecomposition with the checks every definiteness test
//! in the crate relies on.

use nalgebra::DMatrix;

use super::LmiError;

const ASYM_TOL: f64 = 1e-10;
const RECON_TOL: f64 = 1e-8;

/// Eigenvalues of a symmetric matrix, sorted ascending.
///
/// Rejects inputs whose asymmetry exceeds 1e−10 (relative) and cross-checks
/// the decomposition by reconstructing QΛQᵀ.
pub fn eigvals_sym(m: &DMatrix<f64>) -> Result<Vec<f64>, LmiError> {
    if m.nrows() != m.ncols() {
        return Err(LmiError::Shape(format!(
            "eigvals_sym needs square input, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let scale = m.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1.0);
    let asym = (m - m.transpose())
        .iter()
        .fold(0.0f64, |a, &x| a.max(x.abs()));
    if asym > ASYM_TOL * scale {
        return Err(LmiError::NotSymmetric(asym));
    }
    let sym = (m + m.transpose()) * 0.5;
    let se = sym.clone().symmetric_eigen();
    let recon = &se.eigenvectors
        * DMatrix::from_diagonal(&se.eigenvalues)
        * se.eigenvectors.transpose();
    let err = (&recon - &sym).norm();
    if err > RECON_TOL * sym.norm().max(1.0) {
        return Err(LmiError::Reconstruction(err));
    }
    let mut ev: Vec<f64> = se.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(ev)
}

/// Largest eigenvalue of a symmetric matrix.
pub fn max_eig_sym(m: &DMatrix<f64>) -> Result<f64, LmiError> {
    Ok(*eigvals_sym(m)?.last().unwrap())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eig_sym(m: &DMatrix<f64>) -> Result<f64, LmiError> {
    Ok(eigvals_sym(m)?[0])
}
