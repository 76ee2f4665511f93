//! Method-of-moments quantile regression (location-scale model).
//!
//! Model: `Y_it = a_i + X'b + (d_i + X'g) U_it`. Estimation:
//! 1. within OLS of Y on X gives the location fit `b`, residuals R;
//! 2. within OLS of |R| on X gives the scale fit `g` with entity intercepts
//!    `d_i`; fitted scales `s_it = d_i + X'g` must be positive;
//! 3. `q(tau)` minimizes the check loss `sum rho_tau(R - s q)`, solved
//!    exactly as the weighted tau-quantile of `R/s` with weights `s`;
//! 4. quantile coefficients are `b(tau) = b + q(tau) g`.
//!
//! Standard errors come from the same entity-block bootstrap as the FE
//! estimator, re-running all four steps per replicate.

use super::bootstrap::{check_health, column_sds, replicate};
use super::frame::{within_ols, RegressionFrame};
use super::{coefficient_rows, EstimatorTag, RegressionResult};
use crate::error::{Error, Result};

/// Scale-regression design: the cited method's default puts the full
/// regressor set in the scale equation; `InterceptOnly` forces `g = 0` so
/// every quantile coefficient collapses onto the location fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    Full,
    InterceptOnly,
}

struct MmqrFit {
    beta: Vec<f64>,
    gamma: Vec<f64>,
    /// Standardized residuals R/s per row.
    ratios: Vec<f64>,
    /// Fitted scales s per row (the check-loss weights).
    weights: Vec<f64>,
}

fn mmqr_fit(frame: &RegressionFrame, mode: ScaleMode) -> Result<MmqrFit> {
    let location = within_ols(frame, &frame.y)?;
    let absr: Vec<f64> = location.residuals.iter().map(|r| r.abs()).collect();

    let (gamma, delta) = match mode {
        ScaleMode::Full => {
            let scale = within_ols(frame, &absr)?;
            // d_i = mean_i|R| - mean_i(x)'g
            let delta: Vec<f64> = (0..frame.n_entities())
                .map(|e| {
                    let dot: f64 = (0..frame.p)
                        .map(|j| scale.mean_x[e * frame.p + j] * scale.beta[j])
                        .sum();
                    scale.mean_y[e] - dot
                })
                .collect();
            (scale.beta, delta)
        }
        ScaleMode::InterceptOnly => {
            let mut sums = vec![0.0; frame.n_entities()];
            let mut counts = vec![0usize; frame.n_entities()];
            for (row, &e) in frame.entity_of.iter().enumerate() {
                sums[e] += absr[row];
                counts[e] += 1;
            }
            let delta: Vec<f64> = sums
                .iter()
                .zip(&counts)
                .map(|(s, c)| s / (*c).max(1) as f64)
                .collect();
            (vec![0.0; frame.p], delta)
        }
    };

    let mut weights = Vec::with_capacity(frame.n());
    let mut bad: Vec<(String, i32)> = Vec::new();
    for (row, &e) in frame.entity_of.iter().enumerate() {
        let xg: f64 = (0..frame.p)
            .map(|j| frame.x[row * frame.p + j] * gamma[j])
            .sum();
        let s = delta[e] + xg;
        if s <= 0.0 {
            bad.push((frame.entity_names[e].clone(), frame.period_of[row]));
        }
        weights.push(s);
    }
    if let Some((entity, period)) = bad.first().cloned() {
        return Err(Error::NonPositiveScale {
            count: bad.len(),
            entity,
            period,
        });
    }

    let ratios: Vec<f64> = location
        .residuals
        .iter()
        .zip(&weights)
        .map(|(r, s)| r / s)
        .collect();

    Ok(MmqrFit {
        beta: location.beta,
        gamma,
        ratios,
        weights,
    })
}

/// Exact minimizer of `sum_i w_i rho_tau(v_i - q)` over scalar `q`: the
/// weighted tau-quantile (smallest value whose cumulative weight reaches
/// `tau * total`). Weights must be positive.
pub fn weighted_quantile(values: &[f64], weights: &[f64], tau: f64) -> f64 {
    assert_eq!(values.len(), weights.len());
    assert!(!values.is_empty(), "weighted quantile of nothing");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let total: f64 = weights.iter().sum();
    let target = tau * total;
    let mut cum = 0.0;
    for &i in &order {
        cum += weights[i];
        if cum >= target {
            return values[i];
        }
    }
    values[*order.last().expect("non-empty")]
}

fn betas_at_taus(fit: &MmqrFit, taus: &[f64]) -> Vec<Vec<f64>> {
    taus.iter()
        .map(|&tau| {
            let q = weighted_quantile(&fit.ratios, &fit.weights, tau);
            fit.beta
                .iter()
                .zip(&fit.gamma)
                .map(|(b, g)| b + q * g)
                .collect()
        })
        .collect()
}

/// Fit the MM-QR estimator at each requested quantile. One result per tau,
/// sharing the location/scale fits and the bootstrap replicates.
pub fn mmqr(
    frame: &RegressionFrame,
    taus: &[f64],
    mode: ScaleMode,
    bootstrap_reps: usize,
    seed: u64,
) -> Result<Vec<RegressionResult>> {
    if taus.is_empty() {
        return Err(Error::Config("no quantiles requested".into()));
    }
    for &tau in taus {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::BadQuantile(tau));
        }
    }

    let fit = mmqr_fit(frame, mode)?;
    let point = betas_at_taus(&fit, taus);
    let q_hats: Vec<f64> = taus
        .iter()
        .map(|&tau| weighted_quantile(&fit.ratios, &fit.weights, tau))
        .collect();

    let p = frame.p;
    let (ses_flat, used) = if bootstrap_reps == 0 {
        (vec![vec![None; p]; taus.len()], 0)
    } else {
        // One resample pass serves every tau: each replicate refits the
        // location-scale model once and evaluates all quantiles.
        let reps = replicate(frame, bootstrap_reps, seed, |rf| {
            let f = mmqr_fit(rf, mode)?;
            Ok(betas_at_taus(&f, taus).concat())
        });
        check_health(bootstrap_reps, reps.len())?;
        let flat = column_sds(&reps, p * taus.len());
        let per_tau: Vec<Vec<Option<f64>>> =
            (0..taus.len()).map(|k| flat[k * p..(k + 1) * p].to_vec()).collect();
        (per_tau, reps.len())
    };

    Ok(taus
        .iter()
        .enumerate()
        .map(|(k, &tau)| RegressionResult {
            coefficients: coefficient_rows(&frame.x_names, &point[k], &ses_flat[k]),
            n_obs: frame.n(),
            n_entities: frame.n_entities(),
            estimator: EstimatorTag::Mmqr { tau },
            location: Some(fit.beta.clone()),
            scale: Some(fit.gamma.clone()),
            q_tau: Some(q_hats[k]),
            bootstrap_reps_used: used,
        })
        .collect())
}
