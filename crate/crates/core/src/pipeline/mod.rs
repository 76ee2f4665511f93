//! Pipeline orchestration: ingest -> transform -> groups -> TFP ->
//! descriptives -> regressions -> trend, with per-stage artifact emission.
//!
//! Re-running with an identical config and seed reproduces byte-identical
//! outputs; a stage failure halts downstream stages and reports what was
//! completed.

mod config;
mod report;

pub use config::{Overrides, RunConfig, Stage, TertileScheme};
pub use report::{rows_from_result, skipped_row, RegRow};

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::econ::{
    fe_ols, heterogeneity_run, mmqr, moderation_fe, moderation_mmqr, GroupOutcome,
    RegressionFrame, ScaleMode,
};
use crate::error::{Error, Result};
use crate::panel::{
    apply_transform, assign_groups, describe, read_groups_csv, read_panel_csv, GroupingRule,
    PanelDataset, Record, Transform, VariableRole, VariableSpec,
};
use crate::productivity::{
    compute_static_tfp, compute_tfp, trend, DeaVariables, StaticTfpRecord, TfpOutput, TrendSeries,
};

/// The computed index names, in emission order.
pub const INDICES: [&str; 5] = ["TFP", "EC", "TC", "PEC", "SEC"];

/// What a run produced.
#[derive(Debug)]
pub struct RunReport {
    /// Files written, in creation order.
    pub artifacts: Vec<PathBuf>,
    /// Human-readable run summary (stdout material, not an artifact).
    pub summary: String,
    /// Stage name and error when the run stopped early.
    pub failure: Option<(String, String)>,
}

impl RunReport {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

struct Ctx {
    config: RunConfig,
    panel: PanelDataset,
    tfp: Option<TfpOutput>,
    statics: Option<Vec<StaticTfpRecord>>,
    summary: String,
}

/// Execute the selected stages in dependency order.
pub fn run_pipeline(config: &RunConfig) -> Result<RunReport> {
    let panel = ingest(config)?;
    std::fs::create_dir_all(&config.out_dir)?;

    let mut ctx = Ctx {
        config: config.clone(),
        panel,
        tfp: None,
        statics: None,
        summary: String::new(),
    };

    let needs_tfp = [
        Stage::Tfp,
        Stage::Regress,
        Stage::Mmqr,
        Stage::Moderate,
        Stage::Hetero,
        Stage::Trend,
    ]
    .iter()
    .any(|s| config.stages.contains(s));

    let mut artifacts = Vec::new();
    let mut failure = None;

    if needs_tfp {
        if let Err(e) = ensure_tfp(&mut ctx) {
            return Ok(RunReport {
                artifacts,
                summary: ctx.summary,
                failure: Some(("tfp".into(), e.to_string())),
            });
        }
    }

    for stage in Stage::ALL {
        if !config.stages.contains(&stage) {
            continue;
        }
        match run_stage(&mut ctx, stage) {
            Ok(mut files) => artifacts.append(&mut files),
            Err(e) => {
                failure = Some((stage.name().to_string(), e.to_string()));
                break;
            }
        }
    }

    Ok(RunReport {
        artifacts,
        summary: ctx.summary,
        failure,
    })
}

fn ingest(config: &RunConfig) -> Result<PanelDataset> {
    let records = read_panel_csv(&config.panel_csv)?;
    let mut panel = PanelDataset::from_records(&records)?;

    // DEA variables must exist before anything else runs.
    for v in config
        .inputs
        .iter()
        .chain(&config.good_outputs)
        .chain(&config.bad_outputs)
    {
        if !panel.has_variable(v) {
            return Err(Error::UnknownVariable(v.clone()));
        }
    }

    for name in &config.log_vars {
        let spec = VariableSpec::new(name.clone(), VariableRole::Regressor, Transform::Log);
        panel = apply_transform(&panel, &spec)?;
    }
    for name in &config.signed_log_vars {
        let spec = VariableSpec::new(name.clone(), VariableRole::Regressor, Transform::SignedLog);
        panel = apply_transform(&panel, &spec)?;
    }

    if let Some(path) = &config.groups_csv {
        let mut by_scheme: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        for row in read_groups_csv(path)? {
            by_scheme
                .entry(row.scheme)
                .or_default()
                .insert(row.entity, row.label);
        }
        for (scheme, labels) in by_scheme {
            panel = assign_groups(&panel, &GroupingRule::Categorical { scheme, labels })?;
        }
    }
    for t in &config.tertile_schemes {
        panel = assign_groups(
            &panel,
            &GroupingRule::Tertile {
                scheme: t.scheme.clone(),
                variable: t.variable.clone(),
                direction: t.direction,
                labels: ["low".into(), "medium".into(), "high".into()],
            },
        )?;
    }

    // Post-transform column checks: everything the regressions reference.
    for v in std::iter::once(&config.dependent)
        .chain(&config.controls)
        .chain(config.moderator.as_ref())
    {
        if !panel.has_variable(v) {
            return Err(Error::UnknownVariable(v.clone()));
        }
    }
    for scheme in &config.hetero_schemes {
        if !panel.schemes().contains(&scheme.as_str()) {
            return Err(Error::UnknownScheme(scheme.clone()));
        }
    }
    if let Some(scheme) = &config.describe_scheme {
        if !panel.schemes().contains(&scheme.as_str()) {
            return Err(Error::UnknownScheme(scheme.clone()));
        }
    }

    Ok(panel)
}

fn dea_variables(config: &RunConfig) -> DeaVariables {
    DeaVariables {
        inputs: config.inputs.clone(),
        good_outputs: config.good_outputs.clone(),
        bad_outputs: config.bad_outputs.clone(),
    }
}

/// Compute the dynamic TFP records once and join the five indices into the
/// panel as variables dated at the transition's later period. The join goes
/// through the long-form record layer, the same path CSV ingestion uses.
fn ensure_tfp(ctx: &mut Ctx) -> Result<()> {
    if ctx.tfp.is_some() {
        return Ok(());
    }
    let output = compute_tfp(&ctx.panel, &dea_variables(&ctx.config))?;

    let mut records = ctx.panel.to_records();
    for r in &output.records {
        records.push(Record::new(r.entity.clone(), r.period_to, "TFP", r.tfp));
        records.push(Record::new(r.entity.clone(), r.period_to, "EC", r.ec));
        records.push(Record::new(r.entity.clone(), r.period_to, "TC", r.tc));
        records.push(Record::new(r.entity.clone(), r.period_to, "PEC", r.pec));
        records.push(Record::new(r.entity.clone(), r.period_to, "SEC", r.sec));
    }
    let mut panel = PanelDataset::from_records(&records)?;
    // Rebuilding drops grouping labels; reattach them.
    for scheme in ctx.panel.schemes() {
        let labels: BTreeMap<String, String> = ctx
            .panel
            .entities()
            .iter()
            .filter_map(|e| {
                ctx.panel
                    .group_label(scheme, e)
                    .ok()
                    .flatten()
                    .map(|l| (e.clone(), l.to_string()))
            })
            .collect();
        panel = assign_groups(
            &panel,
            &GroupingRule::Categorical {
                scheme: scheme.to_string(),
                labels,
            },
        )?;
    }

    writeln!(
        ctx.summary,
        "tfp: {} records, {} pairs skipped, {} cells floored",
        output.records.len(),
        output.skipped.len(),
        output.floored.len()
    )
    .unwrap();
    ctx.panel = panel;
    ctx.tfp = Some(output);
    Ok(())
}

fn run_stage(ctx: &mut Ctx, stage: Stage) -> Result<Vec<PathBuf>> {
    match stage {
        Stage::Tfp => stage_tfp(ctx),
        Stage::StaticTfp => stage_static(ctx),
        Stage::Describe => stage_describe(ctx),
        Stage::Regress => stage_regress(ctx),
        Stage::Mmqr => stage_mmqr(ctx),
        Stage::Moderate => stage_moderate(ctx),
        Stage::Hetero => stage_hetero(ctx),
        Stage::Trend => stage_trend(ctx),
    }
}

fn stage_tfp(ctx: &mut Ctx) -> Result<Vec<PathBuf>> {
    let output = ctx.tfp.as_ref().expect("tfp computed before stages");
    let path = ctx.config.out_dir.join("tfp_records.csv");
    report::write_tfp_csv(&path, &output.records)?;
    Ok(vec![path])
}

fn stage_static(ctx: &mut Ctx) -> Result<Vec<PathBuf>> {
    let records = compute_static_tfp(&ctx.panel, &dea_variables(&ctx.config))?;
    let path = ctx.config.out_dir.join("static_tfp.csv");
    report::write_static_tfp_csv(&path, &records)?;
    writeln!(ctx.summary, "static-tfp: {} records", records.len()).unwrap();
    ctx.statics = Some(records);
    Ok(vec![path])
}

fn stage_describe(ctx: &mut Ctx) -> Result<Vec<PathBuf>> {
    let vars: Vec<String> = match &ctx.config.describe_vars {
        Some(v) => v.clone(),
        None => {
            let mut v: Vec<String> = Vec::new();
            if ctx.tfp.is_some() {
                v.extend(INDICES.iter().map(|s| s.to_string()));
            }
            v.extend(ctx.config.inputs.iter().cloned());
            v.extend(ctx.config.good_outputs.iter().cloned());
            v.extend(ctx.config.bad_outputs.iter().cloned());
            v.push(ctx.config.dependent.clone());
            v.extend(ctx.config.controls.iter().cloned());
            v.extend(ctx.config.moderator.iter().cloned());
            v
        }
    };
    let mut table = describe(&ctx.panel, &vars, None)?;
    if let Some(scheme) = &ctx.config.describe_scheme {
        let grouped = describe(&ctx.panel, &vars, Some(scheme))?;
        table.rows.extend(grouped.rows);
    }
    let path = ctx.config.out_dir.join("descriptives.csv");
    report::write_descriptives_csv(&path, &table)?;
    writeln!(ctx.summary, "describe: {} rows", table.rows.len()).unwrap();
    Ok(vec![path])
}

fn baseline_designs(config: &RunConfig) -> Vec<(String, Vec<String>)> {
    INDICES
        .iter()
        .map(|index| {
            let mut regressors = vec![index.to_string()];
            regressors.extend(config.controls.iter().cloned());
            (index.to_string(), regressors)
        })
        .collect()
}

fn stage_regress(ctx: &mut Ctx) -> Result<Vec<PathBuf>> {
    let mut rows = Vec::new();
    for (index, regressors) in baseline_designs(&ctx.config) {
        let frame =
            RegressionFrame::from_panel(&ctx.panel, &ctx.config.dependent, &regressors, None)?;
        let result = fe_ols(&frame, ctx.config.bootstrap_reps, ctx.config.seed_or_zero())?;
        rows.extend(report::rows_from_result(&result, None));
        let _ = index;
    }
    let csv_path = ctx.config.out_dir.join("regress_fe.csv");
    let txt_path = ctx.config.out_dir.join("regress_fe.txt");
    report::write_regression_csv(&csv_path, &rows)?;
    report::write_regression_txt(
        &txt_path,
        &format!("Fixed-effects regressions of {} on each index", ctx.config.dependent),
        &rows,
    )?;
    writeln!(ctx.summary, "regress: {} coefficient rows", rows.len()).unwrap();
    Ok(vec![csv_path, txt_path])
}

fn stage_mmqr(ctx: &mut Ctx) -> Result<Vec<PathBuf>> {
    let mut rows = Vec::new();
    for (_, regressors) in baseline_designs(&ctx.config) {
        let frame =
            RegressionFrame::from_panel(&ctx.panel, &ctx.config.dependent, &regressors, None)?;
        let results = mmqr(
            &frame,
            &ctx.config.taus,
            ScaleMode::Full,
            ctx.config.bootstrap_reps,
            ctx.config.seed_or_zero(),
        )?;
        for r in &results {
            rows.extend(report::rows_from_result(r, None));
        }
    }
    let csv_path = ctx.config.out_dir.join("mmqr.csv");
    let txt_path = ctx.config.out_dir.join("mmqr.txt");
    report::write_regression_csv(&csv_path, &rows)?;
    report::write_regression_txt(
        &txt_path,
        &format!("MM-QR regressions of {} on each index", ctx.config.dependent),
        &rows,
    )?;
    writeln!(ctx.summary, "mmqr: {} coefficient rows", rows.len()).unwrap();
    Ok(vec![csv_path, txt_path])
}

fn stage_moderate(ctx: &mut Ctx) -> Result<Vec<PathBuf>> {
    let moderator = ctx
        .config
        .moderator
        .clone()
        .ok_or_else(|| Error::Config("moderate stage needs a moderator variable".into()))?;
    let mut rows = Vec::new();
    let fe = moderation_fe(
        &ctx.panel,
        &ctx.config.dependent,
        "TFP",
        &moderator,
        &ctx.config.controls,
        ctx.config.bootstrap_reps,
        ctx.config.seed_or_zero(),
    )?;
    rows.extend(report::rows_from_result(&fe, None));
    let quantile_results = moderation_mmqr(
        &ctx.panel,
        &ctx.config.dependent,
        "TFP",
        &moderator,
        &ctx.config.controls,
        &ctx.config.taus,
        ctx.config.bootstrap_reps,
        ctx.config.seed_or_zero(),
    )?;
    for r in &quantile_results {
        rows.extend(report::rows_from_result(r, None));
    }
    let csv_path = ctx.config.out_dir.join("moderation.csv");
    let txt_path = ctx.config.out_dir.join("moderation.txt");
    report::write_regression_csv(&csv_path, &rows)?;
    report::write_regression_txt(
        &txt_path,
        &format!(
            "Moderation: {} on TFP, {moderator} and centered interaction",
            ctx.config.dependent
        ),
        &rows,
    )?;
    writeln!(ctx.summary, "moderate: {} coefficient rows", rows.len()).unwrap();
    Ok(vec![csv_path, txt_path])
}

fn stage_hetero(ctx: &mut Ctx) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let indices: Vec<String> = INDICES.iter().map(|s| s.to_string()).collect();
    for scheme in &ctx.config.hetero_schemes {
        let result = heterogeneity_run(
            &ctx.panel,
            &ctx.config.dependent,
            &indices,
            &ctx.config.controls,
            scheme,
            ctx.config.bootstrap_reps,
            ctx.config.seed_or_zero(),
        )?;
        let mut rows = Vec::new();
        let mut skipped = 0usize;
        for (label, outcome) in &result.groups {
            match outcome {
                GroupOutcome::Ran(per_index) => {
                    for (_, r) in per_index {
                        rows.extend(report::rows_from_result(r, Some(label)));
                    }
                }
                GroupOutcome::Skipped(reason) => {
                    rows.push(report::skipped_row(label, reason));
                    skipped += 1;
                }
            }
        }
        let csv_path = ctx.config.out_dir.join(format!("hetero_{scheme}.csv"));
        let txt_path = ctx.config.out_dir.join(format!("hetero_{scheme}.txt"));
        report::write_regression_csv(&csv_path, &rows)?;
        report::write_regression_txt(
            &txt_path,
            &format!("Heterogeneity by {scheme}: {} on each index", ctx.config.dependent),
            &rows,
        )?;
        writeln!(
            ctx.summary,
            "hetero/{scheme}: {} groups, {} skipped",
            result.groups.len(),
            skipped
        )
        .unwrap();
        files.push(csv_path);
        files.push(txt_path);
    }
    Ok(files)
}

fn stage_trend(ctx: &mut Ctx) -> Result<Vec<PathBuf>> {
    let output = ctx.tfp.as_ref().expect("tfp computed before stages");
    let mut series: Vec<TrendSeries> = Vec::new();
    for index in INDICES {
        let observations: Vec<(i32, f64)> = output
            .records
            .iter()
            .map(|r| {
                let v = match index {
                    "TFP" => r.tfp,
                    "EC" => r.ec,
                    "TC" => r.tc,
                    "PEC" => r.pec,
                    _ => r.sec,
                };
                (r.period_to, v)
            })
            .collect();
        series.push(trend(index, &observations));
    }
    // The dependent variable gets its own trend line next to the indices.
    let mut dep_obs = Vec::new();
    for entity in ctx.panel.entities() {
        for &period in ctx.panel.periods() {
            if let Some(v) = ctx.panel.value(&ctx.config.dependent, entity, period)? {
                dep_obs.push((period, v));
            }
        }
    }
    series.push(trend(&ctx.config.dependent, &dep_obs));

    let path = ctx.config.out_dir.join("trend.csv");
    report::write_trend_csv(&path, &series)?;
    writeln!(ctx.summary, "trend: {} series", series.len()).unwrap();
    Ok(vec![path])
}
