//! Grouping schemes: user-supplied categorical labels and tertile splits of
//! per-entity time averages.

use std::collections::BTreeMap;

use super::PanelDataset;
use crate::error::{Error, Result};

/// Ranking direction for tertile schemes. `Ascending` puts the smallest
/// per-entity averages into the first group; `Descending` the largest
/// (the new-energy rule, where group one is the high-utilization third).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TertileDirection {
    Ascending,
    Descending,
}

/// How to label entities under a scheme.
#[derive(Debug, Clone)]
pub enum GroupingRule {
    /// Copy a user-supplied entity -> label column verbatim. Every entity of
    /// the panel must be covered.
    Categorical {
        scheme: String,
        labels: BTreeMap<String, String>,
    },
    /// Split entities into three groups at the 1/3 and 2/3 empirical
    /// quantiles of the per-entity time averages of `variable`. Boundary
    /// ties go to the lower group.
    Tertile {
        scheme: String,
        variable: String,
        direction: TertileDirection,
        /// Group labels in rank order (first group first).
        labels: [String; 3],
    },
}

impl GroupingRule {
    pub fn scheme(&self) -> &str {
        match self {
            GroupingRule::Categorical { scheme, .. } => scheme,
            GroupingRule::Tertile { scheme, .. } => scheme,
        }
    }
}

/// Assign one label per entity under the rule's scheme, returning the
/// extended dataset.
pub fn assign_groups(panel: &PanelDataset, rule: &GroupingRule) -> Result<PanelDataset> {
    let labels = match rule {
        GroupingRule::Categorical { scheme, labels } => {
            let mut out = Vec::with_capacity(panel.entities().len());
            for entity in panel.entities() {
                match labels.get(entity) {
                    Some(l) => out.push(Some(l.clone())),
                    None => {
                        return Err(Error::MissingGroupLabel {
                            entity: entity.clone(),
                            scheme: scheme.clone(),
                        })
                    }
                }
            }
            out
        }
        GroupingRule::Tertile {
            scheme,
            variable,
            direction,
            labels,
        } => {
            let mut stats = Vec::with_capacity(panel.entities().len());
            for (e_idx, entity) in panel.entities().iter().enumerate() {
                match panel.entity_mean(variable, e_idx)? {
                    Some(avg) => {
                        let stat = match direction {
                            TertileDirection::Ascending => avg,
                            TertileDirection::Descending => -avg,
                        };
                        stats.push(stat);
                    }
                    None => {
                        return Err(Error::MissingGroupLabel {
                            entity: entity.clone(),
                            scheme: scheme.clone(),
                        })
                    }
                }
            }
            let (q1, q2) = tertile_boundaries(&stats);
            stats
                .iter()
                .map(|s| {
                    let group = if *s <= q1 {
                        0
                    } else if *s <= q2 {
                        1
                    } else {
                        2
                    };
                    Some(labels[group].clone())
                })
                .collect()
        }
    };
    Ok(panel.with_scheme(rule.scheme().to_string(), labels))
}

/// Empirical 1/3 and 2/3 quantiles: the ceil(n*p)-th order statistic.
fn tertile_boundaries(stats: &[f64]) -> (f64, f64) {
    let mut sorted = stats.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let n = sorted.len();
    let order = |p: f64| -> f64 {
        let k = ((n as f64 * p).ceil() as usize).max(1);
        sorted[k - 1]
    };
    (order(1.0 / 3.0), order(2.0 / 3.0))
}
