//! Regression sample assembly and the within (entity-demeaning) transform.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::panel::PanelDataset;

/// A listwise-deleted regression sample: rows are entity-periods where the
/// dependent and every regressor are present.
#[derive(Debug, Clone)]
pub struct RegressionFrame {
    pub y: Vec<f64>,
    /// Row-major `n x p` design matrix, no intercept (absorbed by the fixed
    /// effects).
    pub x: Vec<f64>,
    pub p: usize,
    /// Dense entity slot per row.
    pub entity_of: Vec<usize>,
    pub period_of: Vec<i32>,
    pub entity_names: Vec<String>,
    pub x_names: Vec<String>,
    pub dependent: String,
}

impl RegressionFrame {
    /// Assemble a frame from the panel, optionally restricted to entities
    /// carrying `label` under `scheme`.
    pub fn from_panel(
        panel: &PanelDataset,
        dependent: &str,
        regressors: &[String],
        group_filter: Option<(&str, &str)>,
    ) -> Result<Self> {
        if regressors.is_empty() {
            return Err(Error::Config("no regressors given".into()));
        }
        let entity_pool: Vec<usize> = match group_filter {
            Some((scheme, label)) => panel.entities_with_label(scheme, label)?,
            None => (0..panel.entities().len()).collect(),
        };

        let mut y = Vec::new();
        let mut x = Vec::new();
        let mut entity_of = Vec::new();
        let mut period_of = Vec::new();
        let mut entity_names = Vec::new();

        for &e_idx in &entity_pool {
            let entity = &panel.entities()[e_idx];
            let mut slot: Option<usize> = None;
            for (p_idx, &period) in panel.periods().iter().enumerate() {
                let Some(yv) = panel.value_at(dependent, e_idx, p_idx)? else {
                    continue;
                };
                let mut row = Vec::with_capacity(regressors.len());
                let mut complete = true;
                for r in regressors {
                    match panel.value_at(r, e_idx, p_idx)? {
                        Some(v) => row.push(v),
                        None => {
                            complete = false;
                            break;
                        }
                    }
                }
                if !complete {
                    continue;
                }
                let s = *slot.get_or_insert_with(|| {
                    entity_names.push(entity.clone());
                    entity_names.len() - 1
                });
                y.push(yv);
                x.extend(row);
                entity_of.push(s);
                period_of.push(period);
            }
        }

        let frame = Self {
            y,
            x,
            p: regressors.len(),
            entity_of,
            period_of,
            entity_names,
            x_names: regressors.to_vec(),
            dependent: dependent.to_string(),
        };
        frame.check_identified()?;
        Ok(frame)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn n_entities(&self) -> usize {
        self.entity_names.len()
    }

    /// Fixed effects need within variation: at least two entities
    /// contributing at least two observations each.
    fn check_identified(&self) -> Result<()> {
        let mut counts = vec![0usize; self.n_entities()];
        for &e in &self.entity_of {
            counts[e] += 1;
        }
        let usable = counts.iter().filter(|c| **c >= 2).count();
        if usable < 2 {
            return Err(Error::TooFewEntities { usable });
        }
        Ok(())
    }

    /// Entity-block resample: each draw becomes a distinct entity in the
    /// new frame (the standard cluster bootstrap).
    pub fn resample(&self, draws: &[usize]) -> Self {
        let mut rows_of: Vec<Vec<usize>> = vec![Vec::new(); self.n_entities()];
        for (row, &e) in self.entity_of.iter().enumerate() {
            rows_of[e].push(row);
        }
        let mut y = Vec::with_capacity(self.n());
        let mut x = Vec::with_capacity(self.x.len());
        let mut entity_of = Vec::with_capacity(self.n());
        let mut period_of = Vec::with_capacity(self.n());
        let mut entity_names = Vec::with_capacity(draws.len());
        for (copy, &orig) in draws.iter().enumerate() {
            entity_names.push(format!("copy{copy}"));
            for &row in &rows_of[orig] {
                y.push(self.y[row]);
                x.extend_from_slice(&self.x[row * self.p..(row + 1) * self.p]);
                entity_of.push(copy);
                period_of.push(self.period_of[row]);
            }
        }
        Self {
            y,
            x,
            p: self.p,
            entity_of,
            period_of,
            entity_names,
            x_names: self.x_names.clone(),
            dependent: self.dependent.clone(),
        }
    }

    /// Per-entity means of the dependent column `values` and of each
    /// regressor column.
    fn entity_means(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let ne = self.n_entities();
        let mut counts = vec![0usize; ne];
        let mut my = vec![0.0; ne];
        let mut mx = vec![0.0; ne * self.p];
        for (row, &e) in self.entity_of.iter().enumerate() {
            counts[e] += 1;
            my[e] += values[row];
            for j in 0..self.p {
                mx[e * self.p + j] += self.x[row * self.p + j];
            }
        }
        for e in 0..ne {
            let c = counts[e].max(1) as f64;
            my[e] /= c;
            for j in 0..self.p {
                mx[e * self.p + j] /= c;
            }
        }
        (my, mx)
    }
}

/// Output of a within regression of `values` on the frame's regressors.
#[derive(Debug, Clone)]
pub struct WithinFit {
    pub beta: Vec<f64>,
    /// Residuals of the demeaned regression, one per row.
    pub residuals: Vec<f64>,
    /// Per-entity means of the dependent values.
    pub mean_y: Vec<f64>,
    /// Per-entity means of the regressors, row-major `n_entities x p`.
    pub mean_x: Vec<f64>,
}

/// Within (entity-demeaned) OLS of `values` on the frame's regressors.
/// Numerically identical to least-squares-with-entity-dummies.
pub fn within_ols(frame: &RegressionFrame, values: &[f64]) -> Result<WithinFit> {
    assert_eq!(values.len(), frame.n(), "dependent length mismatch");
    let n = frame.n();
    let p = frame.p;
    let (mean_y, mean_x) = frame.entity_means(values);

    let mut yd = vec![0.0; n];
    let mut xd = vec![0.0; n * p];
    for (row, &e) in frame.entity_of.iter().enumerate() {
        yd[row] = values[row] - mean_y[e];
        for j in 0..p {
            xd[row * p + j] = frame.x[row * p + j] - mean_x[e * p + j];
        }
    }

    check_rank(&xd, n, p, &frame.x_names)?;

    let xm = DMatrix::from_row_slice(n, p, &xd);
    let yv = DVector::from_column_slice(&yd);
    let xtx = xm.transpose() * &xm;
    let xty = xm.transpose() * &yv;
    let chol = Cholesky::new(xtx).ok_or_else(|| Error::RankDeficient {
        columns: frame.x_names.clone(),
    })?;
    let beta_v = chol.solve(&xty);
    let beta: Vec<f64> = beta_v.iter().copied().collect();

    let fitted = xm * beta_v;
    let residuals: Vec<f64> = yd.iter().zip(fitted.iter()).map(|(y, f)| y - f).collect();

    Ok(WithinFit {
        beta,
        residuals,
        mean_y,
        mean_x,
    })
}

/// Modified Gram-Schmidt rank screen on the demeaned design: a column whose
/// residual norm collapses relative to its own norm is flagged, together
/// with zero columns (regressors constant within every entity).
fn check_rank(xd: &[f64], n: usize, p: usize, names: &[String]) -> Result<()> {
    const REL_TOL: f64 = 1e-8;
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut collinear = Vec::new();
    for j in 0..p {
        let mut col: Vec<f64> = (0..n).map(|r| xd[r * p + j]).collect();
        let orig_norm = norm(&col);
        if orig_norm <= 1e-300 {
            collinear.push(names[j].clone());
            continue;
        }
        for b in &basis {
            let proj: f64 = col.iter().zip(b).map(|(a, c)| a * c).sum();
            for (v, c) in col.iter_mut().zip(b) {
                *v -= proj * c;
            }
        }
        let res_norm = norm(&col);
        if res_norm <= REL_TOL * orig_norm {
            collinear.push(names[j].clone());
        } else {
            for v in &mut col {
                *v /= res_norm;
            }
            basis.push(col);
        }
    }
    if collinear.is_empty() {
        Ok(())
    } else {
        Err(Error::RankDeficient { columns: collinear })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::{PanelDataset, Record};

    fn toy_panel() -> PanelDataset {
        let mut records = Vec::new();
        for (e, alpha) in [("A", 1.0), ("B", -2.0), ("C", 0.5)] {
            for t in 0..4 {
                let x = (t as f64) + if e == "B" { 10.0 } else { 0.0 };
                let y = 2.0 * x + alpha;
                records.push(Record::new(e, 2000 + t, "x", x));
                records.push(Record::new(e, 2000 + t, "y", y));
            }
        }
        PanelDataset::from_records(&records).unwrap()
    }

    #[test]
    fn frame_assembles_complete_rows_only() {
        let mut records = toy_panel().to_records();
        records.retain(|r| !(r.entity == "A" && r.period == 2001 && r.variable == "x"));
        let panel = PanelDataset::from_records(&records).unwrap();
        let frame =
            RegressionFrame::from_panel(&panel, "y", &["x".to_string()], None).unwrap();
        assert_eq!(frame.n(), 11);
        assert_eq!(frame.n_entities(), 3);
    }

    #[test]
    fn exact_dgp_recovered_to_machine_precision() {
        let frame =
            RegressionFrame::from_panel(&toy_panel(), "y", &["x".to_string()], None).unwrap();
        let fit = within_ols(&frame, &frame.y).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-10, "beta = {}", fit.beta[0]);
    }

    #[test]
    fn entity_constant_shift_leaves_beta_unchanged() {
        let panel = toy_panel();
        let frame =
            RegressionFrame::from_panel(&panel, "y", &["x".to_string()], None).unwrap();
        let base = within_ols(&frame, &frame.y).unwrap();

        // Add a different constant to x within each entity.
        let mut shifted = frame.clone();
        for (row, &e) in frame.entity_of.iter().enumerate() {
            shifted.x[row] += [100.0, -7.0, 3.5][e];
        }
        let fit = within_ols(&shifted, &shifted.y).unwrap();
        assert!((fit.beta[0] - base.beta[0]).abs() < 1e-10);
    }

    #[test]
    fn pure_between_variation_is_rank_deficient() {
        // Regressor constant within every entity.
        let mut records = Vec::new();
        for (e, level) in [("A", 1.0), ("B", 2.0)] {
            for t in 0..3 {
                records.push(Record::new(e, 2000 + t, "z", level));
                records.push(Record::new(e, 2000 + t, "y", level * 3.0 + t as f64));
            }
        }
        let panel = PanelDataset::from_records(&records).unwrap();
        let frame = RegressionFrame::from_panel(&panel, "y", &["z".to_string()], None).unwrap();
        match within_ols(&frame, &frame.y).unwrap_err() {
            Error::RankDeficient { columns } => assert_eq!(columns, vec!["z".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_entity_is_unidentified() {
        let mut records = Vec::new();
        for t in 0..5 {
            records.push(Record::new("A", 2000 + t, "x", t as f64));
            records.push(Record::new("A", 2000 + t, "y", 2.0 * t as f64));
        }
        let panel = PanelDataset::from_records(&records).unwrap();
        let err = RegressionFrame::from_panel(&panel, "y", &["x".to_string()], None).unwrap_err();
        assert!(matches!(err, Error::TooFewEntities { usable: 1 }));
    }

    #[test]
    fn resample_renames_entities() {
        let frame =
            RegressionFrame::from_panel(&toy_panel(), "y", &["x".to_string()], None).unwrap();
        let r = frame.resample(&[1, 1, 0]);
        assert_eq!(r.n_entities(), 3);
        assert_eq!(r.n(), 12);
        // Same-entity draws are distinct entities in the resample.
        let fit = within_ols(&r, &r.y).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-10);
    }
}
