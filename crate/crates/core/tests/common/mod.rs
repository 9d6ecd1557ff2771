//! Shared oracles for integration tests: dense reference implementations
//! kept independent of the library's computation paths.

use nalgebra::{DMatrix, DVector};

/// Dense classical CCA via the generalized eigenproblem on uncentered
/// covariances: eigenpairs of Sx^{-1/2} Sxy Sy^{-1} Syx Sx^{-1/2}.
///
/// Valid for well-conditioned full-rank data (n >> d). Returns
/// correlations (descending) and unit weight columns for both sides.
pub fn classical_cca(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = x.ncols() as f64;
    let d = x.nrows();
    let sxx = x * x.transpose() / n;
    let syy = y * y.transpose() / n;
    let sxy = x * y.transpose() / n;

    let sx_inv_half = sym_inv_sqrt(&sxx);
    let sy_inv = syy
        .clone()
        .cholesky()
        .expect("S_yy must be positive definite for the dense oracle")
        .inverse();

    let m = &sx_inv_half * &sxy * &sy_inv * sxy.transpose() * &sx_inv_half;
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
    });

    let mut rho = DVector::zeros(d);
    let mut wx = DMatrix::zeros(d, d);
    let mut wy = DMatrix::zeros(d, d);
    for (out, &idx) in order.iter().enumerate() {
        rho[out] = eig.eigenvalues[idx].max(0.0).sqrt().min(1.0);
        let u = eig.eigenvectors.column(idx).into_owned();
        let mut px = &sx_inv_half * u;
        px /= px.norm();
        // Stationarity: psi_y is proportional to Sy^{-1} Syx psi_x.
        let mut py = &sy_inv * sxy.transpose() * &px;
        py /= py.norm();
        wx.set_column(out, &px);
        wy.set_column(out, &py);
    }
    (rho, wx, wy)
}

/// Symmetric inverse square root of a positive definite matrix.
pub fn sym_inv_sqrt(s: &DMatrix<f64>) -> DMatrix<f64> {
    let d = s.nrows();
    let eig = s.clone().symmetric_eigen();
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        let l = eig.eigenvalues[i];
        assert!(l > 0.0, "inverse sqrt needs positive eigenvalues");
        let v = eig.eigenvectors.column(i);
        out += v * v.transpose() / l.sqrt();
    }
    out
}

/// Distance between unit vectors up to a global sign flip.
pub fn sign_invariant_distance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let direct = (a - b).norm();
    let flipped = (a + b).norm();
    direct.min(flipped)
}
