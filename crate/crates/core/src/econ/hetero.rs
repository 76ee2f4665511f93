//! Heterogeneity runs: the same regression design estimated independently
//! per group label, one row per explanatory index.

use std::collections::BTreeMap;

use super::frame::RegressionFrame;
use super::{fe_ols, RegressionResult};
use crate::error::Result;
use crate::panel::PanelDataset;

/// Outcome for one group label.
#[derive(Debug, Clone)]
pub enum GroupOutcome {
    /// One FE regression per explanatory index, in index order.
    Ran(Vec<(String, RegressionResult)>),
    /// The group could not be estimated (too small, collinear, ...).
    Skipped(String),
}

#[derive(Debug, Clone, Default)]
pub struct HeteroResult {
    /// label -> outcome, ordered by label.
    pub groups: BTreeMap<String, GroupOutcome>,
}

/// For each label of `scheme`, regress `dependent` on each index in
/// `indices` (plus `controls`) over that group's entities only. Groups that
/// fail a precondition are reported as skipped with the reason while the
/// rest proceed.
pub fn heterogeneity_run(
    panel: &PanelDataset,
    dependent: &str,
    indices: &[String],
    controls: &[String],
    scheme: &str,
    bootstrap_reps: usize,
    seed: u64,
) -> Result<HeteroResult> {
    let labels = panel.scheme_labels(scheme)?;
    let mut groups = BTreeMap::new();
    for label in labels {
        let mut rows = Vec::new();
        let mut skip: Option<String> = None;
        for index in indices {
            let mut regressors = vec![index.clone()];
            regressors.extend(controls.iter().cloned());
            let attempt = RegressionFrame::from_panel(
                panel,
                dependent,
                &regressors,
                Some((scheme, label.as_str())),
            )
            .and_then(|frame| fe_ols(&frame, bootstrap_reps, seed));
            match attempt {
                Ok(result) => rows.push((index.clone(), result)),
                Err(e) => {
                    skip = Some(e.to_string());
                    break;
                }
            }
        }
        groups.insert(
            label,
            match skip {
                Some(reason) => GroupOutcome::Skipped(reason),
                None => GroupOutcome::Ran(rows),
            },
        );
    }
    Ok(HeteroResult { groups })
}
