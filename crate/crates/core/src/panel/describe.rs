//! Descriptive statistics per (variable, group).

use super::PanelDataset;
use crate::error::Result;

/// N / mean / min / max of one variable within one group. Moments are
/// `None` when the group has no present cell; they are reported as
/// undefined, never fabricated.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveRow {
    pub variable: String,
    pub group: String,
    pub n: usize,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct DescriptiveTable {
    pub rows: Vec<DescriptiveRow>,
}

/// Describe `variables` over present cells, either per group label of
/// `scheme` or as a single "Summary" group when no scheme is given.
pub fn describe(
    panel: &PanelDataset,
    variables: &[String],
    scheme: Option<&str>,
) -> Result<DescriptiveTable> {
    let groups: Vec<(String, Vec<usize>)> = match scheme {
        None => vec![("Summary".to_string(), (0..panel.entities().len()).collect())],
        Some(s) => panel
            .scheme_labels(s)?
            .into_iter()
            .map(|label| {
                let members = panel.entities_with_label(s, &label)?;
                Ok((label, members))
            })
            .collect::<Result<Vec<_>>>()?,
    };

    let mut rows = Vec::new();
    for var in variables {
        panel.matrix_ref(var)?;
        for (label, members) in &groups {
            let mut n = 0usize;
            let mut sum = 0.0;
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for &e_idx in members {
                for p_idx in 0..panel.periods().len() {
                    if let Some(v) = panel.value_at(var, e_idx, p_idx)? {
                        n += 1;
                        sum += v;
                        min = min.min(v);
                        max = max.max(v);
                    }
                }
            }
            rows.push(if n == 0 {
                DescriptiveRow {
                    variable: var.clone(),
                    group: label.clone(),
                    n: 0,
                    mean: None,
                    min: None,
                    max: None,
                }
            } else {
                DescriptiveRow {
                    variable: var.clone(),
                    group: label.clone(),
                    n,
                    mean: Some(sum / n as f64),
                    min: Some(min),
                    max: Some(max),
                }
            });
        }
    }
    Ok(DescriptiveTable { rows })
}
