//! Grid-level behavior across dimensions: the trends the limit theory
//! predicts, at pilot scale.

use hdcca::{run_grid, GridConfig};

fn trend_config() -> GridConfig {
    let mut cfg = GridConfig::section5(424242);
    cfg.n_values = vec![20];
    cfg.reps = 30;
    cfg
}

fn mean_metric(
    out: &hdcca::GridOutput,
    d: usize,
    alpha: f64,
    component: usize,
    f: impl Fn(&hdcca::ComponentMetrics) -> f64,
) -> f64 {
    let vals: Vec<f64> = out
        .records
        .iter()
        .filter(|r| r.d == d && r.alpha == alpha && r.is_ok())
        .map(|r| f(&r.components[component]))
        .collect();
    assert_eq!(vals.len(), 30);
    vals.iter().sum::<f64>() / vals.len() as f64
}

#[test]
fn dimension_trends_match_theory() {
    let out = run_grid(&trend_config()).unwrap();

    // Above the boundary the trailing coefficients sit at their zero
    // limit; padding makes them exactly zero here, so "decreasing in d"
    // degenerates to equality at the limit value.
    let rho2_200 = mean_metric(&out, 200, 8.0, 1, |c| c.rho_hat);
    let rho2_500 = mean_metric(&out, 500, 8.0, 1, |c| c.rho_hat);
    assert!(rho2_500 <= rho2_200, "{rho2_500} vs {rho2_200}");
    assert!(rho2_500 < 0.05, "rho2 should be at its zero limit");

    // Below the boundary the first coefficient approaches one.
    let rho1_200 = mean_metric(&out, 200, 0.2, 0, |c| c.rho_hat);
    let rho1_500 = mean_metric(&out, 500, 0.2, 0, |c| c.rho_hat);
    assert!(rho1_500 >= rho1_200, "{rho1_500} vs {rho1_200}");
    assert!(rho1_500 > 0.99);

    // Per-rep band for the first aligned component above the boundary.
    for r in out.records.iter().filter(|r| r.alpha == 8.0) {
        let v = r.components[0].abs_inner_x;
        assert!((0.45..=0.9).contains(&v), "abs_inner_x_1 = {v}");
    }

    // Oracle tracking tightens with dimension: medians of the per-rep gap.
    let gaps = |d: usize| -> Vec<f64> {
        out.records
            .iter()
            .filter(|r| r.d == d && r.alpha == 8.0 && r.is_ok())
            .map(|r| (r.components[0].rho_hat - r.oracle_rho1.unwrap()).abs())
            .collect()
    };
    let med = |mut v: Vec<f64>| -> f64 {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    assert!(med(gaps(500)) <= med(gaps(200)));
}

#[test]
fn summary_carries_predictions_next_to_observations() {
    let out = run_grid(&trend_config()).unwrap();
    for cellsum in &out.summary {
        if cellsum.alpha > 1.0 {
            assert_eq!(cellsum.components[0].predicted_rho, None);
            assert!(
                (cellsum.components[0].predicted_abs_inner_x
                    - std::f64::consts::FRAC_1_SQRT_2)
                    .abs()
                    < 1e-12
            );
            assert_eq!(cellsum.components[1].predicted_rho, Some(0.0));
        } else {
            assert_eq!(cellsum.components[0].predicted_rho, Some(1.0));
            assert_eq!(cellsum.components[0].predicted_abs_inner_x, 0.0);
            assert!((cellsum.predicted_lambda_xy_rest_over_d - 0.05).abs() < 1e-12);
        }
        assert_eq!(cellsum.failed, 0);
    }
}
