//! Fixed-effects OLS: the within estimator with entity-block bootstrap
//! standard errors.

use super::bootstrap::{check_health, column_sds, replicate};
use super::frame::{within_ols, RegressionFrame};
use super::{coefficient_rows, EstimatorTag, RegressionResult};
use crate::error::Result;

/// Fit the within estimator on `frame`. Standard errors come from
/// `bootstrap_reps` entity resamples under `seed`; with zero replicates the
/// SE, p and stars columns are left undefined.
pub fn fe_ols(frame: &RegressionFrame, bootstrap_reps: usize, seed: u64) -> Result<RegressionResult> {
    let fit = within_ols(frame, &frame.y)?;

    let (ses, used) = if bootstrap_reps == 0 {
        (vec![None; frame.p], 0)
    } else {
        let betas = replicate(frame, bootstrap_reps, seed, |rf| {
            within_ols(rf, &rf.y).map(|f| f.beta)
        });
        check_health(bootstrap_reps, betas.len())?;
        (column_sds(&betas, frame.p), betas.len())
    };

    Ok(RegressionResult {
        coefficients: coefficient_rows(&frame.x_names, &fit.beta, &ses),
        n_obs: frame.n(),
        n_entities: frame.n_entities(),
        estimator: EstimatorTag::Fe,
        location: None,
        scale: None,
        q_tau: None,
        bootstrap_reps_used: used,
    })
}
