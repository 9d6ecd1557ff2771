//! Sample moments, pseudoinverse whitening, and the CCA fit.
//!
//! The sample covariance of a d x n matrix with n << d is rank-deficient;
//! its positive eigenpairs are exactly the Gram-trick quantities: an
//! eigenvector v of the n x n Gram matrix (1/n) X'X with eigenvalue
//! lambda > 0 maps to the covariance eigenvector X v / sqrt(n lambda).
//! We realize those quantities through a thin SVD of X / sqrt(n) rather
//! than an explicit Gram eigendecomposition: the eigenvalues are squared
//! singular values, so the SVD route keeps the tau^2-scale bulk to high
//! relative accuracy even when the spike eigenvalue is 1e20 times larger,
//! where an explicit Gram matrix would have already lost it to roundoff.
//! No d x d matrix is formed anywhere; the whitened operator lives in the
//! retained bases as an r x r core.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenstructure of both sample covariances plus the compressed
/// cross-covariance.
#[derive(Debug, Clone)]
pub struct SampleMoments<T: Real> {
    basis_x: DMatrix<T>,
    vals_x: DVector<T>,
    basis_y: DMatrix<T>,
    vals_y: DVector<T>,
    /// basis_x' * x, kept so cross cores of any rank are cheap.
    scores_x: DMatrix<T>,
    scores_y: DMatrix<T>,
    sxy_core: DMatrix<T>,
    rank_x: usize,
    rank_y: usize,
    rank: usize,
    n: usize,
    centered: bool,
    rank_tol: T,
}

impl<T: Real> SampleMoments<T> {
    /// Retained eigenvectors of the X sample covariance (d x r).
    pub fn sxx_basis(&self) -> DMatrix<T> {
        self.basis_x.columns(0, self.rank).into_owned()
    }

    /// Retained eigenvalues of the X sample covariance, descending.
    pub fn sxx_vals(&self) -> DVector<T> {
        self.vals_x.rows(0, self.rank).into_owned()
    }

    pub fn syy_basis(&self) -> DMatrix<T> {
        self.basis_y.columns(0, self.rank).into_owned()
    }

    pub fn syy_vals(&self) -> DVector<T> {
        self.vals_y.rows(0, self.rank).into_owned()
    }

    /// Cross-covariance compressed to the retained bases (r x r).
    pub fn sxy_core(&self) -> &DMatrix<T> {
        &self.sxy_core
    }

    /// Joint retained rank: the minimum of the two sides' retained ranks.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Tolerance-retained rank of the X side alone.
    pub fn rank_x(&self) -> usize {
        self.rank_x
    }

    pub fn rank_y(&self) -> usize {
        self.rank_y
    }

    /// All positive eigenvalues of the X side, before tolerance filtering.
    pub fn full_vals_x(&self) -> &DVector<T> {
        &self.vals_x
    }

    pub fn full_vals_y(&self) -> &DVector<T> {
        &self.vals_y
    }

    /// Number of positive eigenpairs available on the weaker side.
    pub fn full_rank(&self) -> usize {
        self.basis_x.ncols().min(self.basis_y.ncols())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn centered(&self) -> bool {
        self.centered
    }

    pub fn rank_tol(&self) -> T {
        self.rank_tol
    }

    /// Singular values of the sample cross-covariance, descending.
    ///
    /// Computed on the full positive-rank bases, which span the column and
    /// row spaces of the cross-covariance, so these are its nonzero
    /// singular values without ever forming a d x d matrix.
    pub fn cross_singular_values(&self) -> DVector<T> {
        let inv_n = T::one() / crate::scalar::conv_usize::<T>(self.n);
        let full = (&self.scores_x * self.scores_y.transpose()) * inv_n;
        let mut sv: Vec<T> = full.svd(false, false).singular_values.iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        DVector::from_vec(sv)
    }
}

fn row_center<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let n = crate::scalar::conv_usize::<T>(m.ncols());
    let mut out = m.clone();
    for i in 0..m.nrows() {
        let mean = m.row(i).sum() / n;
        for j in 0..m.ncols() {
            out[(i, j)] -= mean;
        }
    }
    out
}

/// One side's positive eigenpairs via thin SVD of data / sqrt(n).
fn side_eigen<T: Real>(data: &DMatrix<T>, n: usize) -> Result<(DMatrix<T>, DVector<T>)> {
    let scale = T::one() / crate::scalar::conv_usize::<T>(n).sqrt();
    let svd = (data * scale).svd(true, false);
    let u = svd.u.expect("left singular vectors requested");

    let mut pairs: Vec<(T, usize)> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));

    // Squared singular values are the covariance eigenvalues; they cannot
    // go negative, which is where a Gram-matrix route would need clamping.
    let positive: Vec<(T, usize)> = pairs
        .into_iter()
        .filter(|(s, _)| *s > T::zero())
        .collect();
    if positive.is_empty() {
        return Err(Error::DegenerateData(
            "sample covariance has no positive eigenvalue".into(),
        ));
    }

    let vals = DVector::from_iterator(positive.len(), positive.iter().map(|(s, _)| *s * *s));
    let basis = DMatrix::from_fn(data.nrows(), positive.len(), |r, c| u[(r, positive[c].1)]);
    Ok((basis, vals))
}

/// Computes eigenpairs of both sample covariances and the compressed
/// cross-covariance.
///
/// Eigenvalues below `rank_tol * lambda_max` are discarded on each side;
/// the joint retained rank is the minimum of the two sides, applied to
/// both. With `center`, row means are subtracted first and the retained
/// rank is bounded by n - 1.
pub fn sample_moments<T: Real>(
    x: &DMatrix<T>,
    y: &DMatrix<T>,
    center: bool,
    rank_tol: T,
) -> Result<SampleMoments<T>> {
    assert_eq!(x.ncols(), y.ncols(), "x and y must share the sample count");
    let n = x.ncols();
    assert!(n >= 2, "need at least two samples");

    let (xd, yd) = if center {
        (row_center(x), row_center(y))
    } else {
        (x.clone(), y.clone())
    };

    let (basis_x, vals_x) = side_eigen(&xd, n)?;
    let (basis_y, vals_y) = side_eigen(&yd, n)?;

    let retained = |vals: &DVector<T>| -> usize {
        let cut = rank_tol * vals[0];
        vals.iter().take_while(|&&v| v > cut).count()
    };
    let rank_x = retained(&vals_x);
    let rank_y = retained(&vals_y);
    let rank = rank_x.min(rank_y);

    let inv_n = T::one() / crate::scalar::conv_usize::<T>(n);
    let scores_x = basis_x.transpose() * &xd;
    let scores_y = basis_y.transpose() * &yd;
    let sxy_core =
        (scores_x.rows(0, rank) * scores_y.rows(0, rank).transpose()) * inv_n;

    Ok(SampleMoments {
        basis_x,
        vals_x,
        basis_y,
        vals_y,
        scores_x,
        scores_y,
        sxy_core,
        rank_x,
        rank_y,
        rank,
        n,
        centered: center,
    rank_tol,
    })
}

/// The whitened cross-correlation core K (r x r).
///
/// K is the nonzero part of the pseudoinverse-whitened operator
/// `Sigma_x^{-1/2} Sigma_xy Sigma_y^{-1/2}`: its row and column spaces lie
/// in the retained bases, so no d x d matrix is needed.
pub fn whitened_correlation_core<T: Real>(m: &SampleMoments<T>) -> DMatrix<T> {
    let r = m.rank;
    let mut k = m.sxy_core.clone();
    for i in 0..r {
        let si = m.vals_x[i].sqrt();
        for j in 0..r {
            let sj = m.vals_y[j].sqrt();
            k[(i, j)] /= si * sj;
        }
    }
    k
}

/// Options for [`cca_fit`].
#[derive(Debug, Clone, Copy)]
pub struct FitOptions<T: Real> {
    /// Subtract row means before forming moments. Off by default: the
    /// model is mean zero and the limit theory uses uncentered moments.
    pub center: bool,
    /// Relative eigenvalue cutoff for pseudoinverse whitening.
    pub rank_tol: T,
    /// Number of components to return; `None` means the whitened rank.
    pub components: Option<usize>,
    /// When more components are requested than the whitened rank
    /// supports, append zero-correlation components whose weight vectors
    /// are the next sample PC directions instead of failing. Off by
    /// default; the Monte-Carlo harness turns it on to report a fixed
    /// number of components per replication.
    pub pad_components: bool,
}

impl<T: Real> Default for FitOptions<T> {
    fn default() -> Self {
        Self {
            center: false,
            rank_tol: crate::scalar::conv::<T>(1e-10),
            components: None,
            pad_components: false,
        }
    }
}

/// Fit diagnostics carried alongside the estimate.
#[derive(Debug, Clone, Copy)]
pub struct FitDiagnostics<T: Real> {
    pub rank_x: usize,
    pub rank_y: usize,
    /// Joint whitened rank.
    pub rank: usize,
    /// Number of zero-padded components (0 unless padding was requested).
    pub padded: usize,
    /// Smallest retained eigenvalue over the largest, X side.
    pub min_eigval_ratio_x: T,
    pub min_eigval_ratio_y: T,
}

/// Sample canonical correlations and weight vectors.
#[derive(Debug, Clone)]
pub struct CcaEstimate<T: Real> {
    /// Sample canonical correlations, descending, clamped to [0, 1].
    pub rho_hat: DVector<T>,
    /// Sample weight vectors, unit columns (d x k).
    pub psi_x_hat: DMatrix<T>,
    pub psi_y_hat: DMatrix<T>,
    pub diagnostics: FitDiagnostics<T>,
}

/// Flips a unit column so its largest-magnitude entry is positive.
fn fix_sign<T: Real>(col: &mut DVector<T>) {
    let mut best = 0;
    for i in 1..col.len() {
        if col[i].abs() > col[best].abs() {
            best = i;
        }
    }
    if col[best] < T::zero() {
        for v in col.iter_mut() {
            *v = -*v;
        }
    }
}

/// Runs the CCA fit on precomputed moments.
pub fn cca_fit_from_moments<T: Real>(
    m: &SampleMoments<T>,
    opts: &FitOptions<T>,
) -> Result<CcaEstimate<T>> {
    let r = m.rank;
    let k = opts.components.unwrap_or(r);
    if k > r && !opts.pad_components {
        return Err(Error::InsufficientRank {
            retained: r,
            requested: k,
        });
    }
    if k > m.full_rank() {
        return Err(Error::InsufficientRank {
            retained: m.full_rank(),
            requested: k,
        });
    }

    let kern = whitened_correlation_core(m);
    let svd = kern.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");

    // Order singular triples by descending value; ties keep index order.
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let proper = k.min(r);
    let d = m.basis_x.nrows();
    let mut rho = DVector::zeros(k);
    let mut psi_x = DMatrix::zeros(d, k);
    let mut psi_y = DMatrix::zeros(d, k);

    for out in 0..proper {
        let idx = order[out];
        let sv = svd.singular_values[idx];
        rho[out] = sv.min(T::one()).max(T::zero());

        // Unscale through the pseudoinverse square root, then normalize.
        let mut wx = DVector::zeros(d);
        let mut wy = DVector::zeros(d);
        for i in 0..r {
            let cx = u[(i, idx)] / m.vals_x[i].sqrt();
            let cy = vt[(idx, i)] / m.vals_y[i].sqrt();
            for row in 0..d {
                wx[row] += m.basis_x[(row, i)] * cx;
                wy[row] += m.basis_y[(row, i)] * cy;
            }
        }
        wx /= wx.norm();
        wy /= wy.norm();
        fix_sign(&mut wx);
        fix_sign(&mut wy);
        psi_x.set_column(out, &wx);
        psi_y.set_column(out, &wy);
    }

    // Zero-correlation padding: the whitened operator has rank r, so any
    // further singular value is exactly zero and its weight direction is
    // only determined up to the discarded subspace. Use the next sample
    // PC directions, mirroring how the rank-deficient operator's null
    // space is reported in practice.
    for out in proper..k {
        let mut wx = m.basis_x.column(out).into_owned();
        let mut wy = m.basis_y.column(out).into_owned();
        fix_sign(&mut wx);
        fix_sign(&mut wy);
        psi_x.set_column(out, &wx);
        psi_y.set_column(out, &wy);
    }

    Ok(CcaEstimate {
        rho_hat: rho,
        psi_x_hat: psi_x,
        psi_y_hat: psi_y,
        diagnostics: FitDiagnostics {
            rank_x: m.rank_x,
            rank_y: m.rank_y,
            rank: r,
            padded: k.saturating_sub(proper),
            min_eigval_ratio_x: m.vals_x[m.rank_x - 1] / m.vals_x[0],
            min_eigval_ratio_y: m.vals_y[m.rank_y - 1] / m.vals_y[0],
        },
    })
}

/// Computes sample moments and runs the CCA fit.
pub fn cca_fit<T: Real>(
    x: &DMatrix<T>,
    y: &DMatrix<T>,
    opts: &FitOptions<T>,
) -> Result<CcaEstimate<T>> {
    let m = sample_moments(x, y, opts.center, opts.rank_tol)?;
    cca_fit_from_moments(&m, opts)
}

/// Alignment of two unit vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment<T: Real> {
    pub inner: T,
    pub abs_inner: T,
    /// Sign-invariant angle in degrees, in [0, 90].
    pub angle_deg: T,
}

/// Inner product, absolute inner product, and sign-invariant angle.
pub fn alignment<T: Real>(v: &DVector<T>, w: &DVector<T>) -> Result<Alignment<T>> {
    let tol = crate::scalar::conv::<T>(1e-8);
    for norm in [v.norm(), w.norm()] {
        if (norm - T::one()).abs() > tol {
            return Err(Error::NonUnitVector(crate::scalar::to_f64(norm)));
        }
    }
    let inner = v.dot(w);
    let abs_inner = inner.abs();
    let angle_deg = abs_inner
        .min(T::one())
        .acos()
        * crate::scalar::conv::<T>(180.0)
        / T::pi();
    Ok(Alignment {
        inner,
        abs_inner,
        angle_deg,
    })
}
