//! Moderation: a focal-by-moderator interaction built from mean-centered
//! factors, entering next to the uncentered main effects.

use super::frame::RegressionFrame;
use super::mmqr::{mmqr, ScaleMode};
use super::{fe_ols, RegressionResult};
use crate::error::{Error, Result};
use crate::panel::{PanelDataset, Record};

/// Add the interaction variable `C_<focal>_x_C_<moderator>` to the panel:
/// the product of the two variables after subtracting their grand means
/// (over each variable's present cells). Returns the extended panel and the
/// interaction variable's name.
pub fn moderation_panel(
    panel: &PanelDataset,
    focal: &str,
    moderator: &str,
) -> Result<(PanelDataset, String)> {
    let mean_f = panel
        .grand_mean(focal)?
        .ok_or_else(|| Error::Config(format!("variable `{focal}` has no present cells")))?;
    let mean_m = panel
        .grand_mean(moderator)?
        .ok_or_else(|| Error::Config(format!("variable `{moderator}` has no present cells")))?;

    let name = format!("C_{focal}_x_C_{moderator}");
    let mut records = panel.to_records();
    for entity in panel.entities() {
        for &period in panel.periods() {
            let f = panel.value(focal, entity, period)?;
            let m = panel.value(moderator, entity, period)?;
            if let (Some(f), Some(m)) = (f, m) {
                records.push(Record::new(
                    entity.clone(),
                    period,
                    name.clone(),
                    (f - mean_f) * (m - mean_m),
                ));
            }
        }
    }
    Ok((PanelDataset::from_records(&records)?, name))
}

fn moderation_regressors(
    panel: &PanelDataset,
    focal: &str,
    moderator: &str,
    controls: &[String],
) -> Result<(PanelDataset, Vec<String>)> {
    let (extended, interaction) = moderation_panel(panel, focal, moderator)?;
    let mut regressors = vec![focal.to_string(), moderator.to_string(), interaction];
    regressors.extend(controls.iter().cloned());
    Ok((extended, regressors))
}

/// Fixed-effects moderation regression: dependent on
/// `{focal, moderator, C_focal x C_moderator, controls}`.
pub fn moderation_fe(
    panel: &PanelDataset,
    dependent: &str,
    focal: &str,
    moderator: &str,
    controls: &[String],
    bootstrap_reps: usize,
    seed: u64,
) -> Result<RegressionResult> {
    let (extended, regressors) = moderation_regressors(panel, focal, moderator, controls)?;
    let frame = RegressionFrame::from_panel(&extended, dependent, &regressors, None)?;
    fe_ols(&frame, bootstrap_reps, seed)
}

/// MM-QR moderation regressions, one result per quantile.
#[allow(clippy::too_many_arguments)]
pub fn moderation_mmqr(
    panel: &PanelDataset,
    dependent: &str,
    focal: &str,
    moderator: &str,
    controls: &[String],
    taus: &[f64],
    bootstrap_reps: usize,
    seed: u64,
) -> Result<Vec<RegressionResult>> {
    let (extended, regressors) = moderation_regressors(panel, focal, moderator, controls)?;
    let frame = RegressionFrame::from_panel(&extended, dependent, &regressors, None)?;
    mmqr(&frame, taus, ScaleMode::Full, bootstrap_reps, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn interaction_panel(seed: u64, coef: f64) -> PanelDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut records = Vec::new();
        for i in 0..40 {
            let entity = format!("E{i:02}");
            let alpha: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
            for t in 0..8 {
                let f: f64 = rng.random_range(-1.0..1.0);
                let m: f64 = rng.random_range(-1.0..1.0);
                let eps: f64 = <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
                let y = alpha + 0.8 * f - 0.3 * m + coef * f * m + 0.2 * eps;
                records.push(Record::new(entity.clone(), 2000 + t, "T", f));
                records.push(Record::new(entity.clone(), 2000 + t, "M", m));
                records.push(Record::new(entity.clone(), 2000 + t, "y", y));
            }
        }
        PanelDataset::from_records(&records).unwrap()
    }

    #[test]
    fn interaction_coefficient_recovered() {
        let panel = interaction_panel(41, -0.5);
        let result = moderation_fe(&panel, "y", "T", "M", &[], 150, 8).unwrap();
        let c = result
            .coefficients
            .iter()
            .find(|c| c.name.starts_with("C_"))
            .unwrap();
        assert!(
            (c.estimate + 0.5).abs() < 3.0 * c.se,
            "estimate {} se {}",
            c.estimate,
            c.se
        );
    }

    #[test]
    fn centering_does_not_move_the_interaction_coefficient() {
        let panel = interaction_panel(13, -0.5);
        let centered = moderation_fe(&panel, "y", "T", "M", &[], 0, 0).unwrap();
        let c_centered = centered
            .coefficients
            .iter()
            .find(|c| c.name.starts_with("C_"))
            .unwrap()
            .estimate;

        // Uncentered parameterization: raw product T*M next to the same
        // main effects.
        let mut records = panel.to_records();
        for entity in panel.entities() {
            for &period in panel.periods() {
                let f = panel.value("T", entity, period).unwrap().unwrap();
                let m = panel.value("M", entity, period).unwrap().unwrap();
                records.push(Record::new(entity.clone(), period, "TxM", f * m));
            }
        }
        let raw_panel = PanelDataset::from_records(&records).unwrap();
        let frame = RegressionFrame::from_panel(
            &raw_panel,
            "y",
            &["T".to_string(), "M".to_string(), "TxM".to_string()],
            None,
        )
        .unwrap();
        let raw = fe_ols(&frame, 0, 0).unwrap();
        let c_raw = raw
            .coefficients
            .iter()
            .find(|c| c.name == "TxM")
            .unwrap()
            .estimate;

        assert!(
            (c_centered - c_raw).abs() < 1e-10,
            "centered {c_centered} vs raw {c_raw}"
        );
    }

    #[test]
    fn constant_moderator_is_rank_deficient() {
        let mut records = Vec::new();
        for (e, alpha) in [("A", 0.0), ("B", 1.0)] {
            for t in 0..4 {
                records.push(Record::new(e, 2000 + t, "T", t as f64));
                records.push(Record::new(e, 2000 + t, "M", 2.0));
                records.push(Record::new(e, 2000 + t, "y", alpha + t as f64));
            }
        }
        let panel = PanelDataset::from_records(&records).unwrap();
        let err = moderation_fe(&panel, "y", "T", "M", &[], 0, 0).unwrap_err();
        // C_M is identically zero, so the interaction column vanishes; the
        // constant moderator column itself dies under the within transform
        // too. Either way the collinear set must name the offenders.
        match err {
            Error::RankDeficient { columns } => {
                assert!(columns.iter().any(|c| c == "M" || c.starts_with("C_")));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
