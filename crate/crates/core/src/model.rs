//! Population covariance structure of the spiked model.
//!
//! Both random vectors have a diagonal covariance with one spike
//! (`sigma^2 * d^alpha` in the first coordinate, flat `tau^2` elsewhere)
//! and are coupled through a single canonical pair: unit weight vectors
//! supported on the first two coordinates with correlation `rho`. The
//! cross-covariance then has exactly one nonzero 2x2 block, so the joint
//! 2d x 2d covariance is diagonal outside the four coordinates
//! {1, 2, d+1, d+2}. Everything here stores that structure explicitly
//! instead of dense matrices, which keeps model assembly O(d) and its
//! square root O(1).

use nalgebra::{DVector, Matrix2, Matrix4};

use crate::error::{Error, Result};
use crate::linalg::jacobi_symmetric_eigen;
use crate::scalar::Real;

/// Population parameters of the spiked model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpikedParams<T: Real> {
    /// Spike variance scale of the X block.
    pub sigma2_x: T,
    /// Bulk variance of the X block.
    pub tau2_x: T,
    /// Spike variance scale of the Y block.
    pub sigma2_y: T,
    /// Bulk variance of the Y block.
    pub tau2_y: T,
    /// Spike exponent: the leading eigenvalue is `sigma^2 * d^alpha`.
    pub alpha: T,
    /// Population canonical correlation, in [0, 1].
    pub rho: T,
    /// Angle of the X canonical weight vector against the spike axis.
    pub theta_x: T,
    /// Angle of the Y canonical weight vector against the spike axis.
    pub theta_y: T,
    /// Dimension d shared by both blocks.
    pub dim: usize,
}

impl<T: Real> SpikedParams<T> {
    /// Checks every domain constraint, naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: T| -> Result<()> {
            if !(v > T::zero()) {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("must be > 0 (got {})", crate::scalar::to_f64(v)),
                });
            }
            Ok(())
        };
        positive("sigma2_x", self.sigma2_x)?;
        positive("tau2_x", self.tau2_x)?;
        positive("sigma2_y", self.sigma2_y)?;
        positive("tau2_y", self.tau2_y)?;
        if !(self.alpha >= T::zero()) {
            return Err(Error::InvalidParam {
                field: "alpha",
                reason: format!("must be >= 0 (got {})", crate::scalar::to_f64(self.alpha)),
            });
        }
        if !(self.rho >= T::zero() && self.rho <= T::one()) {
            return Err(Error::InvalidParam {
                field: "rho",
                reason: format!("rho out of [0,1] (got {})", crate::scalar::to_f64(self.rho)),
            });
        }
        let pi = T::pi();
        for (field, theta) in [("theta_x", self.theta_x), ("theta_y", self.theta_y)] {
            if !(theta >= T::zero() && theta <= pi) {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("must lie in [0, pi] (got {})", crate::scalar::to_f64(theta)),
                });
            }
        }
        if self.dim < 3 {
            return Err(Error::InvalidParam {
                field: "dim",
                reason: format!("d must be >= 3 (got {})", self.dim),
            });
        }
        Ok(())
    }

    /// The spike eigenvalue `sigma2_x * d^alpha`.
    pub fn spike_x(&self) -> T {
        self.sigma2_x * crate::scalar::conv_usize::<T>(self.dim).powf(self.alpha)
    }

    /// The spike eigenvalue `sigma2_y * d^alpha`.
    pub fn spike_y(&self) -> T {
        self.sigma2_y * crate::scalar::conv_usize::<T>(self.dim).powf(self.alpha)
    }
}

/// Assembled population covariance structure.
#[derive(Debug, Clone)]
pub struct PopulationModel<T: Real> {
    pub params: SpikedParams<T>,
    /// Diagonal of the X covariance: `(sigma2_x d^alpha, tau2_x, ..., tau2_x)`.
    pub sigma_x_diag: DVector<T>,
    /// Diagonal of the Y covariance.
    pub sigma_y_diag: DVector<T>,
    /// The only nonzero block of the cross-covariance (rows/cols 1..2).
    pub cross_block: Matrix2<T>,
    /// X canonical weight vector `cos(theta_x) e1 + sin(theta_x) e2`.
    pub psi_x: DVector<T>,
    /// Y canonical weight vector.
    pub psi_y: DVector<T>,
    /// Standard deviation of the X canonical score, `sqrt(psi_x' Sigma_x psi_x)`.
    pub a_norm: T,
    /// Standard deviation of the Y canonical score.
    pub b_norm: T,
}

impl<T: Real> PopulationModel<T> {
    /// Builds the population covariance structure for validated parameters.
    pub fn build(params: SpikedParams<T>) -> Result<Self> {
        params.validate()?;
        let d = params.dim;
        let spike_x = params.spike_x();
        let spike_y = params.spike_y();

        let (cx, sx) = (params.theta_x.cos(), params.theta_x.sin());
        let (cy, sy) = (params.theta_y.cos(), params.theta_y.sin());

        // Score standard deviations; the canonical variate <psi, X> has
        // variance cos^2 * spike + sin^2 * bulk.
        let a_norm = (spike_x * cx * cx + params.tau2_x * sx * sx).sqrt();
        let b_norm = (spike_y * cy * cy + params.tau2_y * sy * sy).sqrt();

        // Cross-covariance block: (rho / (A B)) * (Sigma_x psi_x)(Sigma_y psi_y)'.
        // Sigma_x psi_x is supported on the first two coordinates.
        let gx = [spike_x * cx, params.tau2_x * sx];
        let gy = [spike_y * cy, params.tau2_y * sy];
        let scale = params.rho / (a_norm * b_norm);
        let cross_block = Matrix2::new(
            scale * gx[0] * gy[0],
            scale * gx[0] * gy[1],
            scale * gx[1] * gy[0],
            scale * gx[1] * gy[1],
        );

        let mut sigma_x_diag = DVector::from_element(d, params.tau2_x);
        sigma_x_diag[0] = spike_x;
        let mut sigma_y_diag = DVector::from_element(d, params.tau2_y);
        sigma_y_diag[0] = spike_y;

        let mut psi_x = DVector::zeros(d);
        psi_x[0] = cx;
        psi_x[1] = sx;
        let mut psi_y = DVector::zeros(d);
        psi_y[0] = cy;
        psi_y[1] = sy;

        Ok(Self {
            params,
            sigma_x_diag,
            sigma_y_diag,
            cross_block,
            psi_x,
            psi_y,
            a_norm,
            b_norm,
        })
    }

    /// The joint-covariance sub-block on coordinates {1, 2, d+1, d+2}.
    ///
    /// This is the only part of the 2d x 2d covariance that is not
    /// diagonal.
    pub fn joint_subblock4(&self) -> Matrix4<T> {
        let p = &self.params;
        let c = &self.cross_block;
        let mut m = Matrix4::zeros();
        m[(0, 0)] = p.spike_x();
        m[(1, 1)] = p.tau2_x;
        m[(2, 2)] = p.spike_y();
        m[(3, 3)] = p.tau2_y;
        m[(0, 2)] = c[(0, 0)];
        m[(0, 3)] = c[(0, 1)];
        m[(1, 2)] = c[(1, 0)];
        m[(1, 3)] = c[(1, 1)];
        m[(2, 0)] = c[(0, 0)];
        m[(3, 0)] = c[(0, 1)];
        m[(2, 1)] = c[(1, 0)];
        m[(3, 1)] = c[(1, 1)];
        m
    }
}

/// Structured square root of the joint covariance.
///
/// A factor S with S * S = Sigma_T: a symmetric 4x4 core on coordinates
/// {1, 2, d+1, d+2} and scalar bulk factors everywhere else.
#[derive(Debug, Clone)]
pub struct StructuredSqrt<T: Real> {
    /// Symmetric PSD square root of the 4x4 joint sub-block.
    pub core4: Matrix4<T>,
    /// `sqrt(tau2_x)`, applied to X coordinates 3..d.
    pub bulk_x: T,
    /// `sqrt(tau2_y)`, applied to Y coordinates 3..d.
    pub bulk_y: T,
}

/// Relative floor for the PSD gate on the 4x4 sub-block.
pub const PSD_GATE: f64 = 1e-10;

impl<T: Real> StructuredSqrt<T> {
    /// Symmetric square root of the joint covariance of `model`.
    ///
    /// Only a 4x4 eigenproblem is solved; the cost does not grow with d.
    /// The eigensolve uses relative-threshold Jacobi so the unit-scale
    /// eigenvalues survive next to `d^alpha`-scale ones. Fails when the
    /// sub-block has an eigenvalue below `-1e-10 * lambda_max`.
    pub fn from_model(model: &PopulationModel<T>) -> Result<Self> {
        let sub = model.joint_subblock4();
        let sub_dyn = nalgebra::DMatrix::from_fn(4, 4, |i, j| sub[(i, j)]);
        let tol = T::default_epsilon() * crate::scalar::conv::<T>(8.0);
        let (values, vectors) = jacobi_symmetric_eigen(&sub_dyn, tol);

        let lambda_max = values[0];
        let gate = -crate::scalar::conv::<T>(PSD_GATE) * lambda_max;
        if let Some(bad) = values.iter().find(|&&v| v < gate) {
            return Err(Error::NotPsd {
                eigenvalue: crate::scalar::to_f64(*bad),
                max_eigenvalue: crate::scalar::to_f64(lambda_max),
            });
        }

        let sqrt_vals: Vec<T> = values
            .iter()
            .map(|&v| if v > T::zero() { v.sqrt() } else { T::zero() })
            .collect();
        let mut core4 = Matrix4::zeros();
        for i in 0..4 {
            for j in 0..=i {
                let mut acc = T::zero();
                for (k, &s) in sqrt_vals.iter().enumerate() {
                    acc += vectors[(i, k)] * s * vectors[(j, k)];
                }
                core4[(i, j)] = acc;
                core4[(j, i)] = acc;
            }
        }

        Ok(Self {
            core4,
            bulk_x: model.params.tau2_x.sqrt(),
            bulk_y: model.params.tau2_y.sqrt(),
        })
    }
}
