//! Panel econometrics: fixed-effects OLS (within estimator), MM-QR
//! location-scale quantile regression, moderation with centered
//! interactions, and group-split heterogeneity runs. Inference for both
//! estimators is an entity-block bootstrap under one master seed.

mod bootstrap;
mod fe;
mod frame;
mod hetero;
mod mmqr;
mod moderation;

pub use bootstrap::derive_seed;
pub use fe::fe_ols;
pub use frame::RegressionFrame;
pub use hetero::{heterogeneity_run, GroupOutcome, HeteroResult};
pub use mmqr::{mmqr, weighted_quantile, ScaleMode};
pub use moderation::{moderation_fe, moderation_mmqr, moderation_panel};

/// Which estimator produced a result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorTag {
    Fe,
    Mmqr { tau: f64 },
}

/// One coefficient row of a result table.
#[derive(Debug, Clone)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    pub p_value: f64,
    pub stars: &'static str,
}

/// A fitted regression: coefficient table plus fit metadata. For MM-QR the
/// location/scale coefficient vectors and the fitted quantile are carried
/// along.
#[derive(Debug, Clone)]
pub struct RegressionResult {
    pub coefficients: Vec<Coefficient>,
    pub n_obs: usize,
    pub n_entities: usize,
    pub estimator: EstimatorTag,
    pub location: Option<Vec<f64>>,
    pub scale: Option<Vec<f64>>,
    pub q_tau: Option<f64>,
    /// Successful bootstrap replicates behind the standard errors.
    pub bootstrap_reps_used: usize,
}

/// Significance stars: `***` p<0.01, `**` p<0.05, `*` p<0.1.
pub fn stars(p: f64) -> &'static str {
    if !p.is_finite() {
        ""
    } else if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

pub(crate) fn coefficient_rows(
    names: &[String],
    estimates: &[f64],
    ses: &[Option<f64>],
) -> Vec<Coefficient> {
    names
        .iter()
        .zip(estimates)
        .zip(ses)
        .map(|((name, est), se)| {
            let se = se.unwrap_or(f64::NAN);
            let p = if se > 0.0 {
                crate::stats::z_pvalue(est / se)
            } else {
                f64::NAN
            };
            Coefficient {
                name: name.clone(),
                estimate: *est,
                se,
                p_value: p,
                stars: stars(p),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stars_mapping_is_exact() {
        assert_eq!(stars(0.009), "***");
        assert_eq!(stars(0.049), "**");
        assert_eq!(stars(0.099), "*");
        assert_eq!(stars(0.5), "");
        // Boundaries are strict.
        assert_eq!(stars(0.01), "**");
        assert_eq!(stars(0.05), "*");
        assert_eq!(stars(0.1), "");
        assert_eq!(stars(f64::NAN), "");
    }
}
