//! Dynamic TFP change and its decomposition, plus the per-period (window
//! width 1) static scores.
//!
//! For each entity and consecutive period pair (t, t+1) the engine evaluates
//! eight distance functions (CRS and VRS, own and cross period) and builds
//!
//! ```text
//! EC  = Dc[t+1](t+1) / Dc[t](t)
//! TC  = sqrt( Dc[t](t+1)/Dc[t+1](t+1) * Dc[t](t)/Dc[t+1](t) )
//! PEC = Dv[t+1](t+1) / Dv[t](t)
//! SEC = ( Dv[t](t)/Dc[t](t) ) * ( Dc[t+1](t+1)/Dv[t+1](t+1) )
//! TFP = EC * TC
//! ```
//!
//! so that TFP = EC x TC and EC = PEC x SEC hold by construction. Frontiers
//! are contemporaneous cross-sections; evaluations the frontier cannot rank
//! fall back to the global pool and are flagged on the record.

use rayon::prelude::*;

use crate::dea::{distance, BundleStore, DmuBundle, FrontierSpec, Rts};
use crate::error::{Error, Result};
use crate::panel::{floor_positive, FlooredCell, PanelDataset};

/// Variable names backing the DEA bundles.
#[derive(Debug, Clone)]
pub struct DeaVariables {
    pub inputs: Vec<String>,
    pub good_outputs: Vec<String>,
    pub bad_outputs: Vec<String>,
}

impl DeaVariables {
    fn all(&self) -> Vec<String> {
        let mut v = self.inputs.clone();
        v.extend(self.good_outputs.clone());
        v.extend(self.bad_outputs.clone());
        v
    }
}

/// The eight distances of one transition. Index meaning: `c`/`v` is the
/// returns-to-scale of the frontier, the first period tag is the frontier
/// period, the argument is the evaluated bundle's period.
#[derive(Debug, Clone, Copy, Default)]
pub struct DistanceGrid {
    pub d_c_t_of_t: f64,
    pub d_c_t_of_t1: f64,
    pub d_c_t1_of_t: f64,
    pub d_c_t1_of_t1: f64,
    pub d_v_t_of_t: f64,
    pub d_v_t_of_t1: f64,
    pub d_v_t1_of_t: f64,
    pub d_v_t1_of_t1: f64,
}

/// One entity-transition TFP record.
#[derive(Debug, Clone)]
pub struct TfpRecord {
    pub entity: String,
    pub period_from: i32,
    pub period_to: i32,
    pub distances: DistanceGrid,
    pub tfp: f64,
    pub ec: f64,
    pub tc: f64,
    pub pec: f64,
    pub sec: f64,
    /// Names of distances that were re-evaluated against the global pool.
    pub fallback_flags: Vec<String>,
}

/// Entity-transition pairs that could not be evaluated, with the reason.
#[derive(Debug, Clone)]
pub struct SkippedPair {
    pub entity: String,
    pub period_from: i32,
    pub period_to: i32,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct TfpOutput {
    pub records: Vec<TfpRecord>,
    pub skipped: Vec<SkippedPair>,
    pub floored: Vec<FlooredCell>,
}

/// Static (window width 1) record: super-SBM CRS score within the period
/// cross-section, decomposed as score = PES x SES.
#[derive(Debug, Clone)]
pub struct StaticTfpRecord {
    pub entity: String,
    pub period: i32,
    pub score: f64,
    /// Pure technical efficiency: the VRS score.
    pub pes: f64,
    /// Scale effect: CRS score / VRS score.
    pub ses: f64,
    pub fallback_flags: Vec<String>,
}

/// Per-period mean of one series.
#[derive(Debug, Clone)]
pub struct TrendPoint {
    pub period: i32,
    pub n: usize,
    pub mean: f64,
}

#[derive(Debug, Clone)]
pub struct TrendSeries {
    pub name: String,
    pub points: Vec<TrendPoint>,
}

/// DEA bundles extracted from a panel, with the flooring and coverage
/// bookkeeping that goes with them.
#[derive(Debug, Clone)]
pub struct ExtractedBundles {
    pub store: BundleStore,
    pub floored: Vec<FlooredCell>,
    /// Entity-periods left out because a DEA variable was absent.
    pub missing: Vec<(String, i32)>,
}

/// Build DEA bundles from the panel: one bundle per entity-period whose DEA
/// variables are all present, with non-positive cells floored first.
pub fn bundles_from_panel(panel: &PanelDataset, vars: &DeaVariables) -> Result<ExtractedBundles> {
    let needed = vars.all();
    for v in &needed {
        if !panel.has_variable(v) {
            return Err(Error::UnknownVariable(v.clone()));
        }
    }
    let (floored_panel, floored) = floor_positive(panel, &needed)?;

    let mut bundles = Vec::new();
    let mut missing = Vec::new();
    for entity in floored_panel.entities() {
        for &period in floored_panel.periods() {
            let mut complete = true;
            let mut fetch = |names: &[String]| -> Result<Vec<f64>> {
                let mut out = Vec::with_capacity(names.len());
                for name in names {
                    match floored_panel.value(name, entity, period)? {
                        Some(v) => out.push(v),
                        None => {
                            complete = false;
                            break;
                        }
                    }
                }
                Ok(out)
            };
            let inputs = fetch(&vars.inputs)?;
            let good = fetch(&vars.good_outputs)?;
            let bad = fetch(&vars.bad_outputs)?;
            if complete {
                bundles.push(DmuBundle::new(entity.clone(), period, inputs, good, bad)?);
            } else {
                missing.push((entity.clone(), period));
            }
        }
    }
    Ok(ExtractedBundles {
        store: BundleStore::new(bundles),
        floored,
        missing,
    })
}

fn checked_ratio(num: f64, den: f64, entity: &str, period: i32) -> Result<f64> {
    let valid = num.is_finite() && den.is_finite() && num > 0.0 && den > 0.0;
    if !valid {
        return Err(Error::DegenerateDistance {
            entity: entity.to_string(),
            period,
        });
    }
    Ok(num / den)
}

/// Compute TFP records for every entity and consecutive observed period
/// pair. Pairs missing a bundle on either side are skipped with a reason.
pub fn compute_tfp(panel: &PanelDataset, vars: &DeaVariables) -> Result<TfpOutput> {
    let extracted = bundles_from_panel(panel, vars)?;
    let (store, floored) = (extracted.store, extracted.floored);
    let periods = store.periods();

    let mut tasks: Vec<(String, i32, i32)> = Vec::new();
    let mut skipped = Vec::new();
    for entity in panel.entities() {
        for w in periods.windows(2) {
            let (t, t1) = (w[0], w[1]);
            let has_t = store.get(entity, t).is_some();
            let has_t1 = store.get(entity, t1).is_some();
            match (has_t, has_t1) {
                (true, true) => tasks.push((entity.clone(), t, t1)),
                (false, false) => {}
                (false, true) => skipped.push(SkippedPair {
                    entity: entity.clone(),
                    period_from: t,
                    period_to: t1,
                    reason: format!("DEA variables incomplete in period {t}"),
                }),
                (true, false) => skipped.push(SkippedPair {
                    entity: entity.clone(),
                    period_from: t,
                    period_to: t1,
                    reason: format!("DEA variables incomplete in period {t1}"),
                }),
            }
        }
    }

    let mut records = tasks
        .par_iter()
        .map(|(entity, t, t1)| transition_record(&store, entity, *t, *t1))
        .collect::<Result<Vec<TfpRecord>>>()?;
    // Parallel evaluation preserves task order, but make the contract
    // explicit: records are sorted by (entity, period).
    records.sort_by(|a, b| {
        (&a.entity, a.period_from).cmp(&(&b.entity, b.period_from))
    });

    Ok(TfpOutput {
        records,
        skipped,
        floored,
    })
}

fn transition_record(store: &BundleStore, entity: &str, t: i32, t1: i32) -> Result<TfpRecord> {
    let bundle_t = store.get(entity, t).expect("bundle checked").clone();
    let bundle_t1 = store.get(entity, t1).expect("bundle checked").clone();

    let mut flags = Vec::new();
    let mut eval = |bundle: &DmuBundle, frontier: i32, rts: Rts, tag: &str| -> Result<f64> {
        let out = distance(store, bundle, FrontierSpec::Period(frontier), rts)?;
        if out.global_fallback {
            flags.push(tag.to_string());
        }
        Ok(out.value())
    };

    let grid = DistanceGrid {
        d_c_t_of_t: eval(&bundle_t, t, Rts::Crs, "Dc_t(t)")?,
        d_c_t_of_t1: eval(&bundle_t1, t, Rts::Crs, "Dc_t(t1)")?,
        d_c_t1_of_t: eval(&bundle_t, t1, Rts::Crs, "Dc_t1(t)")?,
        d_c_t1_of_t1: eval(&bundle_t1, t1, Rts::Crs, "Dc_t1(t1)")?,
        d_v_t_of_t: eval(&bundle_t, t, Rts::Vrs, "Dv_t(t)")?,
        d_v_t_of_t1: eval(&bundle_t1, t, Rts::Vrs, "Dv_t(t1)")?,
        d_v_t1_of_t: eval(&bundle_t, t1, Rts::Vrs, "Dv_t1(t)")?,
        d_v_t1_of_t1: eval(&bundle_t1, t1, Rts::Vrs, "Dv_t1(t1)")?,
    };

    let ec = checked_ratio(grid.d_c_t1_of_t1, grid.d_c_t_of_t, entity, t1)?;
    let tc_inner = checked_ratio(grid.d_c_t_of_t1, grid.d_c_t1_of_t1, entity, t1)?
        * checked_ratio(grid.d_c_t_of_t, grid.d_c_t1_of_t, entity, t)?;
    let tc = tc_inner.sqrt();
    let pec = checked_ratio(grid.d_v_t1_of_t1, grid.d_v_t_of_t, entity, t1)?;
    let sec = checked_ratio(grid.d_v_t_of_t, grid.d_c_t_of_t, entity, t)?
        * checked_ratio(grid.d_c_t1_of_t1, grid.d_v_t1_of_t1, entity, t1)?;
    let tfp = ec * tc;

    Ok(TfpRecord {
        entity: entity.to_string(),
        period_from: t,
        period_to: t1,
        distances: grid,
        tfp,
        ec,
        tc,
        pec,
        sec,
        fallback_flags: flags,
    })
}

/// Static scores for every entity-period with complete DEA variables:
/// `score` under CRS, `PES` under VRS, `SES = score / PES`, all against the
/// period's own cross-section (window width 1).
pub fn compute_static_tfp(panel: &PanelDataset, vars: &DeaVariables) -> Result<Vec<StaticTfpRecord>> {
    let store = bundles_from_panel(panel, vars)?.store;
    let mut tasks: Vec<DmuBundle> = Vec::new();
    for entity in panel.entities() {
        for &period in &store.periods() {
            if let Some(b) = store.get(entity, period) {
                tasks.push(b.clone());
            }
        }
    }
    let mut records = tasks
        .par_iter()
        .map(|bundle| -> Result<StaticTfpRecord> {
            let mut flags = Vec::new();
            let spec = FrontierSpec::Window {
                end: bundle.period,
                width: 1,
            };
            let crs = distance(&store, bundle, spec, Rts::Crs)?;
            if crs.global_fallback {
                flags.push("score".to_string());
            }
            let vrs = distance(&store, bundle, spec, Rts::Vrs)?;
            if vrs.global_fallback {
                flags.push("PES".to_string());
            }
            let score = crs.value();
            let pes = vrs.value();
            let ses = checked_ratio(score, pes, &bundle.entity, bundle.period)?;
            Ok(StaticTfpRecord {
                entity: bundle.entity.clone(),
                period: bundle.period,
                score,
                pes,
                ses,
                fallback_flags: flags,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| (&a.entity, a.period).cmp(&(&b.entity, b.period)));
    Ok(records)
}

/// Per-period arithmetic mean of `(period, value)` observations.
pub fn trend(name: &str, observations: &[(i32, f64)]) -> TrendSeries {
    let mut by_period: std::collections::BTreeMap<i32, (usize, f64)> =
        std::collections::BTreeMap::new();
    for (period, value) in observations {
        let slot = by_period.entry(*period).or_insert((0, 0.0));
        slot.0 += 1;
        slot.1 += value;
    }
    TrendSeries {
        name: name.to_string(),
        points: by_period
            .into_iter()
            .map(|(period, (n, sum))| TrendPoint {
                period,
                n,
                mean: sum / n as f64,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::Record;

    fn dea_vars() -> DeaVariables {
        DeaVariables {
            inputs: vec!["K".into(), "L".into()],
            good_outputs: vec!["GDP".into()],
            bad_outputs: vec!["CO2".into()],
        }
    }

    /// Panel where nothing changes between periods.
    fn identity_panel(n_entities: usize, n_periods: usize) -> PanelDataset {
        let mut records = Vec::new();
        for i in 0..n_entities {
            let entity = format!("E{i:02}");
            // Varied levels so some units are efficient, some not.
            let k = 1.0 + i as f64;
            let l = 2.0 + ((i * 3) % 5) as f64;
            let gdp = 1.0 + ((i * 7) % 4) as f64 * 0.5;
            let co2 = 0.5 + ((i * 2) % 3) as f64 * 0.3;
            for p in 0..n_periods {
                let period = 2000 + p as i32;
                records.push(Record::new(entity.clone(), period, "K", k));
                records.push(Record::new(entity.clone(), period, "L", l));
                records.push(Record::new(entity.clone(), period, "GDP", gdp));
                records.push(Record::new(entity.clone(), period, "CO2", co2));
            }
        }
        PanelDataset::from_records(&records).unwrap()
    }

    #[test]
    fn identity_panel_gives_unit_indices() {
        let panel = identity_panel(5, 3);
        let out = compute_tfp(&panel, &dea_vars()).unwrap();
        assert_eq!(out.records.len(), 10);
        for r in &out.records {
            assert!((r.tfp - 1.0).abs() <= 1e-9, "{}: TFP {}", r.entity, r.tfp);
            assert!((r.ec - 1.0).abs() <= 1e-9);
            assert!((r.tc - 1.0).abs() <= 1e-9);
            assert!((r.pec - 1.0).abs() <= 1e-9);
            assert!((r.sec - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn decomposition_identities_hold() {
        let panel = shifted_panel();
        let out = compute_tfp(&panel, &dea_vars()).unwrap();
        assert!(!out.records.is_empty());
        for r in &out.records {
            assert!((r.tfp - r.ec * r.tc).abs() <= 1e-9);
            assert!((r.ec - r.pec * r.sec).abs() <= 1e-9);
            assert!(r.tfp > 0.0 && r.ec > 0.0 && r.tc > 0.0 && r.pec > 0.0 && r.sec > 0.0);
        }
    }

    /// Two periods with real movement: entity E00 unchanged, the rest lose
    /// half their good output in the second period.
    fn shifted_panel() -> PanelDataset {
        let mut records = Vec::new();
        let data = [
            ("E00", 1.0, 2.0, 2.0, 0.5),
            ("E01", 2.0, 3.0, 1.5, 0.8),
            ("E02", 1.5, 2.5, 1.8, 0.6),
            ("E03", 3.0, 2.0, 1.2, 1.0),
        ];
        for (entity, k, l, gdp, co2) in data {
            for (p, factor) in [(2000, 1.0), (2001, if entity == "E00" { 1.0 } else { 0.5 })] {
                records.push(Record::new(entity, p, "K", k));
                records.push(Record::new(entity, p, "L", l));
                records.push(Record::new(entity, p, "GDP", gdp * factor));
                records.push(Record::new(entity, p, "CO2", co2));
            }
        }
        PanelDataset::from_records(&records).unwrap()
    }

    #[test]
    fn unchanged_entity_gains_when_others_decline() {
        let panel = shifted_panel();
        let out = compute_tfp(&panel, &dea_vars()).unwrap();
        let e00 = out.records.iter().find(|r| r.entity == "E00").unwrap();
        // Everyone else halved output, so E00's relative position improved
        // or the frontier regressed; either way TFP = EC * TC exactly and
        // the improvement shows in the product.
        assert!((e00.tfp - e00.ec * e00.tc).abs() <= 1e-9);
        assert!(e00.tfp >= 1.0 - 1e-9, "E00 TFP = {}", e00.tfp);
    }

    #[test]
    fn time_reversal_inverts_ec_and_tfp() {
        let panel = shifted_panel();
        let forward = compute_tfp(&panel, &dea_vars()).unwrap();

        // Swap the two periods.
        let swapped: Vec<Record> = panel
            .to_records()
            .into_iter()
            .map(|mut r| {
                r.period = if r.period == 2000 { 2001 } else { 2000 };
                r
            })
            .collect();
        let backward =
            compute_tfp(&PanelDataset::from_records(&swapped).unwrap(), &dea_vars()).unwrap();

        for f in &forward.records {
            let b = backward
                .records
                .iter()
                .find(|r| r.entity == f.entity)
                .unwrap();
            assert!(
                (f.ec * b.ec - 1.0).abs() < 1e-7,
                "{}: EC {} backward {}",
                f.entity,
                f.ec,
                b.ec
            );
            assert!((f.tfp * b.tfp - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn strict_improvement_on_fixed_frontier_lifts_ec() {
        // E00 strictly improves (less input, more good output, less bad
        // output) while every other bundle stays put: efficiency change
        // cannot fall below 1.
        let mut records = Vec::new();
        let data = [
            ("E00", 2.0, 2.0, 1.0, 0.8),
            ("E01", 1.0, 1.5, 1.8, 0.5),
            ("E02", 1.5, 2.5, 1.5, 0.6),
            ("E03", 3.0, 2.0, 1.2, 1.0),
        ];
        for (entity, k, l, gdp, co2) in data {
            for p in [2000, 2001] {
                let improve = entity == "E00" && p == 2001;
                let f_in = if improve { 0.8 } else { 1.0 };
                let f_good = if improve { 1.3 } else { 1.0 };
                let f_bad = if improve { 0.7 } else { 1.0 };
                records.push(Record::new(entity, p, "K", k * f_in));
                records.push(Record::new(entity, p, "L", l * f_in));
                records.push(Record::new(entity, p, "GDP", gdp * f_good));
                records.push(Record::new(entity, p, "CO2", co2 * f_bad));
            }
        }
        let panel = PanelDataset::from_records(&records).unwrap();
        let out = compute_tfp(&panel, &dea_vars()).unwrap();
        let e00 = out.records.iter().find(|r| r.entity == "E00").unwrap();
        assert!(e00.ec >= 1.0 - 1e-9, "EC = {}", e00.ec);
        assert!(e00.tfp >= 1.0 - 1e-9, "TFP = {}", e00.tfp);
    }

    #[test]
    fn missing_period_pairs_are_skipped_with_reason() {
        let mut records = identity_panel(3, 3).to_records();
        // Drop E01's GDP in 2001: both transitions touching 2001 skip.
        records.retain(|r| !(r.entity == "E01" && r.period == 2001 && r.variable == "GDP"));
        let panel = PanelDataset::from_records(&records).unwrap();
        let out = compute_tfp(&panel, &dea_vars()).unwrap();
        assert_eq!(out.records.iter().filter(|r| r.entity == "E01").count(), 0);
        assert_eq!(out.skipped.len(), 2);
        assert!(out.skipped.iter().all(|s| s.entity == "E01"));
        assert!(out.skipped[0].reason.contains("2001"));
        // Other entities keep both transitions.
        assert_eq!(out.records.len(), 4);
    }

    #[test]
    fn static_records_decompose_exactly() {
        let panel = shifted_panel();
        let records = compute_static_tfp(&panel, &dea_vars()).unwrap();
        assert_eq!(records.len(), 8);
        for r in &records {
            assert!((r.score - r.pes * r.ses).abs() <= 1e-9, "{}", r.entity);
            // VRS >= CRS, so SES <= 1 up to tolerance.
            assert!(r.ses <= 1.0 + 1e-7);
        }
    }

    #[test]
    fn single_entity_period_scores_one_with_fallback() {
        let records = vec![
            Record::new("A", 2000, "K", 1.0),
            Record::new("A", 2000, "L", 1.0),
            Record::new("A", 2000, "GDP", 1.0),
            Record::new("A", 2000, "CO2", 1.0),
        ];
        let panel = PanelDataset::from_records(&records).unwrap();
        let out = compute_static_tfp(&panel, &dea_vars()).unwrap();
        assert_eq!(out.len(), 1);
        let r = &out[0];
        assert!((r.score - 1.0).abs() < 1e-12);
        assert!((r.pes - 1.0).abs() < 1e-12);
        assert!((r.ses - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trend_means_per_period() {
        let series = trend(
            "TFP",
            &[(2001, 1.0), (2001, 3.0), (2002, 2.0)],
        );
        assert_eq!(series.points.len(), 2);
        assert_eq!(series.points[0].period, 2001);
        assert_eq!(series.points[0].n, 2);
        assert!((series.points[0].mean - 2.0).abs() < 1e-12);
        assert_eq!(series.points[1].n, 1);
    }

    #[test]
    fn trend_of_single_entity_is_its_own_series() {
        let obs = [(2000, 0.5), (2001, 0.7), (2002, 0.9)];
        let series = trend("x", &obs);
        for (point, (p, v)) in series.points.iter().zip(&obs) {
            assert_eq!(point.period, *p);
            assert_eq!(point.n, 1);
            assert_eq!(point.mean, *v);
        }
    }
}
