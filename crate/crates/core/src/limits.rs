//! Closed-form limits of the sample canonical components as d grows with
//! n fixed, used as theory oracles by the Monte-Carlo harness.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SpikedParams;
use crate::scalar::Real;

/// Constants of the first-coefficient limit law.
///
/// `C1 >= C2 >= 0` are the eigenvalues of the 2x2 score covariance
/// `[[sigma2_x, rho sx sy], [rho sx sy, sigma2_y]]`; `(A1, A2)` and
/// `(B1, B2)` are its unit eigenvectors. The limit of the first sample
/// canonical correlation is the cosine between
/// `m1 = m1_coef_z1 * z1 + m1_coef_z2 * z2` and
/// `m2 = m2_coef_z1 * z1 + m2_coef_z2 * z2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1Constants<T: Real> {
    pub c1: T,
    pub c2: T,
    pub a1: T,
    pub a2: T,
    pub b1: T,
    pub b2: T,
    pub m1_coef_z1: T,
    pub m1_coef_z2: T,
    pub m2_coef_z1: T,
    pub m2_coef_z2: T,
}

/// Computes the first-coefficient limit constants.
///
/// Rejects `rho = 0`: the eigenvector ratios are 0/0 there and no
/// correlated pair exists; callers treat that case upstream.
pub fn theorem1_constants<T: Real>(
    sigma2_x: T,
    sigma2_y: T,
    rho: T,
) -> Result<Theorem1Constants<T>> {
    if !(sigma2_x > T::zero()) || !(sigma2_y > T::zero()) {
        return Err(Error::InvalidParam {
            field: "sigma2",
            reason: "spike variances must be > 0".into(),
        });
    }
    if rho == T::zero() {
        return Err(Error::RhoZero);
    }
    if !(rho > T::zero() && rho <= T::one()) {
        return Err(Error::InvalidParam {
            field: "rho",
            reason: format!("rho out of (0,1] (got {})", crate::scalar::to_f64(rho)),
        });
    }

    let two = crate::scalar::conv::<T>(2.0);
    let four = crate::scalar::conv::<T>(4.0);
    let disc = sigma2_x * sigma2_x - two * sigma2_x * sigma2_y
        + four * sigma2_x * sigma2_y * rho * rho
        + sigma2_y * sigma2_y;
    let root = disc.sqrt();
    let c1 = (sigma2_x + sigma2_y + root) / two;
    let c2 = ((sigma2_x + sigma2_y - root) / two).max(T::zero());

    let cross = rho * (sigma2_x * sigma2_y).sqrt();
    let unit_from = |c: T| -> (T, T) {
        let g = (c - sigma2_y) / cross;
        let norm = (g * g + T::one()).sqrt();
        (g / norm, T::one() / norm)
    };
    let (a1, a2) = unit_from(c1);
    let (b1, b2) = unit_from(c2);

    let m1_coef_z1 = c1.sqrt() * a1 * a1 + c2.sqrt() * b1 * b1;
    let m1_coef_z2 = c1.sqrt() * a1 * a2 + c2.sqrt() * b1 * b2;

    Ok(Theorem1Constants {
        c1,
        c2,
        a1,
        a2,
        b1,
        b2,
        m1_coef_z1,
        m1_coef_z2,
        m2_coef_z1: m1_coef_z2,
        m2_coef_z2: m1_coef_z1,
    })
}

/// The limit of the first sample canonical correlation on a given draw:
/// the cosine similarity of the two latent mixtures.
pub fn limit_rho1<T: Real>(
    z1: &DVector<T>,
    z2: &DVector<T>,
    c: &Theorem1Constants<T>,
) -> Result<T> {
    assert_eq!(z1.len(), z2.len(), "latent rows must share length");
    assert!(z1.len() >= 2, "need at least two samples");
    let m1 = z1 * c.m1_coef_z1 + z2 * c.m1_coef_z2;
    let m2 = z1 * c.m2_coef_z1 + z2 * c.m2_coef_z2;
    let n1 = m1.norm();
    let n2 = m2.norm();
    if n1 == T::zero() {
        return Err(Error::ZeroNormOracle("m1"));
    }
    if n2 == T::zero() {
        return Err(Error::ZeroNormOracle("m2"));
    }
    let cosine = m1.dot(&m2) / (n1 * n2);
    Ok(cosine.max(-T::one()).min(T::one()))
}

/// Which side of the spike-strength boundary the model sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    AlphaAbove1,
    AlphaBelow1,
}

/// Limit law of the first sample PC variance, scaled by max(d^alpha, d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law")]
pub enum PcEigvalLaw<T: Real> {
    /// `sigma^2 * chi^2_n / n` (alpha > 1).
    SpikeChiSquared { sigma2: T, n: usize },
    /// `sigma^2 * chi^2_n / n + tau^2 / n` (alpha = 1 boundary).
    SpikeChiSquaredPlusBulk { sigma2: T, tau2: T, n: usize },
    /// Deterministic `tau^2 / n` (alpha < 1).
    Bulk { tau2: T, n: usize },
}

/// Predicted limits for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitPrediction<T: Real> {
    pub regime: Regime,
    /// Limit of |<psi_x_hat_1, psi_x>|: |cos theta_x| above the boundary,
    /// 0 below it.
    pub abs_inner_x_first: T,
    pub abs_inner_y_first: T,
    /// Limit of |<psi_hat_i, psi>| for i >= 2.
    pub abs_inner_rest: T,
    /// Limit of rho_hat_i for i >= 2 (alpha > 1) or all i (alpha < 1).
    pub rho_rest: T,
    /// Limit of the trailing cross-covariance singular values over d:
    /// `tau_x tau_y / n` below the boundary, 0 above it.
    pub lambda_xy_rest_over_d: T,
    /// Limit law of the first sample PC variance.
    pub pc_eigval_scale: PcEigvalLaw<T>,
}

/// Evaluates every closed-form prediction for `params` at sample size `n`.
///
/// The `alpha = 1` boundary has no established law and is rejected.
pub fn predicted_limits<T: Real>(
    params: &SpikedParams<T>,
    n: usize,
) -> Result<LimitPrediction<T>> {
    params.validate()?;
    if params.alpha == T::one() {
        return Err(Error::AlphaBoundary);
    }

    if params.alpha > T::one() {
        Ok(LimitPrediction {
            regime: Regime::AlphaAbove1,
            abs_inner_x_first: params.theta_x.cos().abs(),
            abs_inner_y_first: params.theta_y.cos().abs(),
            abs_inner_rest: T::zero(),
            rho_rest: T::zero(),
            lambda_xy_rest_over_d: T::zero(),
            pc_eigval_scale: PcEigvalLaw::SpikeChiSquared {
                sigma2: params.sigma2_x,
                n,
            },
        })
    } else {
        Ok(LimitPrediction {
            regime: Regime::AlphaBelow1,
            abs_inner_x_first: T::zero(),
            abs_inner_y_first: T::zero(),
            abs_inner_rest: T::zero(),
            rho_rest: T::one(),
            lambda_xy_rest_over_d: (params.tau2_x * params.tau2_y).sqrt()
                / crate::scalar::conv_usize::<T>(n),
            pc_eigval_scale: PcEigvalLaw::Bulk {
                tau2: params.tau2_x,
                n,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample::{gaussian_matrix, SeedRecord};
    use approx::assert_relative_eq;
    use nalgebra::Matrix2;

    #[test]
    fn unit_variance_constants_match_closed_form() {
        for rho in [0.1f64, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9] {
            let c = theorem1_constants(1.0, 1.0, rho).unwrap();
            let plus = ((1.0 + rho).sqrt() + (1.0 - rho).sqrt()) / 2.0;
            let minus = ((1.0 + rho).sqrt() - (1.0 - rho).sqrt()) / 2.0;
            assert_relative_eq!(c.m1_coef_z1, plus, epsilon = 1e-12);
            assert_relative_eq!(c.m1_coef_z2, minus, epsilon = 1e-12);
        }
    }

    #[test]
    fn spec_point_values() {
        let c = theorem1_constants(1.0, 1.0, 0.7).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(c.c1, 1.7, epsilon = 1e-12);
        assert_relative_eq!(c.c2, 0.3, epsilon = 1e-12);
        assert_relative_eq!(c.a1, inv_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(c.a2, inv_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(c.b1, -inv_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(c.b2, inv_sqrt2, epsilon = 1e-12);
    }

    #[test]
    fn perfect_correlation_collapses_c2() {
        let c = theorem1_constants(1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(c.c1, 2.0, epsilon = 1e-12);
        assert_relative_eq!(c.c2, 0.0, epsilon = 1e-12);
        let half_sqrt2 = std::f64::consts::SQRT_2 / 2.0;
        assert_relative_eq!(c.m1_coef_z1, half_sqrt2, epsilon = 1e-12);
        assert_relative_eq!(c.m1_coef_z2, half_sqrt2, epsilon = 1e-12);
    }

    #[test]
    fn rho_zero_is_rejected() {
        assert!(matches!(
            theorem1_constants(1.0, 1.0, 0.0),
            Err(Error::RhoZero)
        ));
    }

    #[test]
    fn constants_invariants_hold_over_random_draws() {
        use rand::Rng;
        let mut rng = SeedRecord::new(314, 0).rng();
        for _ in 0..1000 {
            let s2x = 0.1 + 5.0 * rng.random::<f64>();
            let s2y = 0.1 + 5.0 * rng.random::<f64>();
            let rho = 0.01 + 0.99 * rng.random::<f64>();
            let c = theorem1_constants(s2x, s2y, rho).unwrap();
            assert!(c.c1 >= c.c2 && c.c2 >= 0.0);
            assert_relative_eq!(c.a1 * c.a1 + c.a2 * c.a2, 1.0, epsilon = 1e-12);
            assert_relative_eq!(c.b1 * c.b1 + c.b2 * c.b2, 1.0, epsilon = 1e-12);
            assert_eq!(c.m1_coef_z1, c.m2_coef_z2);
            assert_eq!(c.m1_coef_z2, c.m2_coef_z1);

            // C1, C2 are the eigenvalues of the 2x2 score covariance.
            let cross = rho * (s2x * s2y).sqrt();
            let m = Matrix2::new(s2x, cross, cross, s2y);
            let mut eig: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
            eig.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert_relative_eq!(c.c1, eig[0], epsilon = 1e-12, max_relative = 1e-12);
            assert_relative_eq!(c.c2, eig[1], epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn limit_rho1_degenerate_directions() {
        let c = theorem1_constants(1.0, 1.0, 0.7).unwrap();
        let z = DVector::from_vec(vec![0.3, -1.2, 0.8]);
        assert_relative_eq!(limit_rho1(&z, &z, &c).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(limit_rho1(&z, &(-&z), &c).unwrap(), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn limit_rho1_stays_in_unit_interval() {
        let c = theorem1_constants(2.0, 0.5, 0.4).unwrap();
        let mut rng = SeedRecord::new(99, 0).rng();
        for _ in 0..200 {
            let z1 = gaussian_matrix::<f64, _>(8, 1, &mut rng).column(0).into_owned();
            let z2 = gaussian_matrix::<f64, _>(8, 1, &mut rng).column(0).into_owned();
            let v = limit_rho1(&z1, &z2, &c).unwrap();
            assert!((-1.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn mean_inner_product_recovers_rho_at_large_n() {
        // E <m1, m2> / n = 2 * coef1 * coef2 = rho; with 1e5 draws of
        // n = 1000 the Monte-Carlo error is far below the 0.02 band.
        let rho = 0.7;
        let c = theorem1_constants(1.0, 1.0, rho).unwrap();
        let n = 1000;
        let draws = 100_000;
        let mut rng = SeedRecord::new(2718, 0).rng();
        let mut acc = 0.0;
        for _ in 0..draws {
            let z1 = gaussian_matrix::<f64, _>(n, 1, &mut rng);
            let z2 = gaussian_matrix::<f64, _>(n, 1, &mut rng);
            let m1 = &z1 * c.m1_coef_z1 + &z2 * c.m1_coef_z2;
            let m2 = &z1 * c.m2_coef_z1 + &z2 * c.m2_coef_z2;
            acc += m1.dot(&m2) / n as f64;
        }
        let mean = acc / draws as f64;
        assert!((mean - rho).abs() < 0.02, "mean {mean}");
    }

    fn base_params(alpha: f64) -> SpikedParams<f64> {
        SpikedParams {
            sigma2_x: 1.0,
            tau2_x: 1.0,
            sigma2_y: 1.0,
            tau2_y: 1.0,
            alpha,
            rho: 0.7,
            theta_x: 0.75 * std::f64::consts::PI,
            theta_y: 0.75 * std::f64::consts::PI,
            dim: 200,
        }
    }

    #[test]
    fn strong_spike_prediction() {
        let p = predicted_limits(&base_params(8.0), 20).unwrap();
        assert_eq!(p.regime, Regime::AlphaAbove1);
        // cos(0.75 pi) = -0.7071...; the prediction reports the magnitude.
        assert_relative_eq!(p.abs_inner_x_first, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_eq!(p.abs_inner_rest, 0.0);
        assert_eq!(p.rho_rest, 0.0);
        assert_eq!(p.lambda_xy_rest_over_d, 0.0);
        assert!(matches!(
            p.pc_eigval_scale,
            PcEigvalLaw::SpikeChiSquared { sigma2, n } if sigma2 == 1.0 && n == 20
        ));
    }

    #[test]
    fn weak_spike_prediction() {
        let p = predicted_limits(&base_params(0.2), 20).unwrap();
        assert_eq!(p.regime, Regime::AlphaBelow1);
        assert_eq!(p.abs_inner_x_first, 0.0);
        assert_eq!(p.rho_rest, 1.0);
        assert_relative_eq!(p.lambda_xy_rest_over_d, 0.05, epsilon = 1e-15);
        assert!(matches!(
            p.pc_eigval_scale,
            PcEigvalLaw::Bulk { tau2, n } if tau2 == 1.0 && n == 20
        ));
    }

    #[test]
    fn boundary_alpha_is_rejected() {
        assert!(matches!(
            predicted_limits(&base_params(1.0), 20),
            Err(Error::AlphaBoundary)
        ));
    }
}
