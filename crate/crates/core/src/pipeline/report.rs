//! Artifact emission: CSV files (stable schemas, deterministic bytes) and
//! aligned-column text tables for the regression outputs.

use std::fmt::Write as _;
use std::path::Path;

use crate::econ::{EstimatorTag, RegressionResult};
use crate::error::Result;
use crate::panel::DescriptiveTable;
use crate::productivity::{StaticTfpRecord, TfpRecord, TrendSeries};

/// One emitted coefficient row of the `term,estimate,se,p,stars,tau,group,N`
/// schema.
#[derive(Debug, Clone)]
pub struct RegRow {
    pub term: String,
    pub estimate: Option<f64>,
    pub se: Option<f64>,
    pub p: Option<f64>,
    pub stars: String,
    pub tau: Option<f64>,
    pub group: Option<String>,
    pub n: usize,
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => x.to_string(),
        _ => String::new(),
    }
}

/// Flatten a regression result into rows, tagging the group when given.
pub fn rows_from_result(result: &RegressionResult, group: Option<&str>) -> Vec<RegRow> {
    let tau = match result.estimator {
        EstimatorTag::Fe => None,
        EstimatorTag::Mmqr { tau } => Some(tau),
    };
    result
        .coefficients
        .iter()
        .map(|c| RegRow {
            term: c.name.clone(),
            estimate: Some(c.estimate),
            se: c.se.is_finite().then_some(c.se),
            p: c.p_value.is_finite().then_some(c.p_value),
            stars: c.stars.to_string(),
            tau,
            group: group.map(String::from),
            n: result.n_obs,
        })
        .collect()
}

/// Marker row for a heterogeneity group that could not be estimated.
pub fn skipped_row(group: &str, reason: &str) -> RegRow {
    RegRow {
        term: format!("(skipped: {reason})"),
        estimate: None,
        se: None,
        p: None,
        stars: String::new(),
        tau: None,
        group: Some(group.to_string()),
        n: 0,
    }
}

pub fn write_regression_csv(path: &Path, rows: &[RegRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["term", "estimate", "se", "p", "stars", "tau", "group", "N"])?;
    for r in rows {
        w.write_record([
            r.term.as_str(),
            &fmt_opt(r.estimate),
            &fmt_opt(r.se),
            &fmt_opt(r.p),
            r.stars.as_str(),
            &fmt_opt(r.tau),
            r.group.as_deref().unwrap_or(""),
            &r.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Aligned-column rendering of the same rows.
pub fn write_regression_txt(path: &Path, title: &str, rows: &[RegRow]) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{title}").unwrap();
    writeln!(out, "{}", "-".repeat(title.len().max(72))).unwrap();
    writeln!(
        out,
        "{:<28} {:>12} {:>12} {:>8} {:<4} {:>5} {:<16} {:>6}",
        "term", "estimate", "se", "p", "sig", "tau", "group", "N"
    )
    .unwrap();
    for r in rows {
        let fnum = |v: Option<f64>| match v {
            Some(x) if x.is_finite() => format!("{x:.4}"),
            _ => String::from("."),
        };
        writeln!(
            out,
            "{:<28} {:>12} {:>12} {:>8} {:<4} {:>5} {:<16} {:>6}",
            r.term,
            fnum(r.estimate),
            fnum(r.se),
            match r.p {
                Some(p) if p.is_finite() => format!("{p:.3}"),
                _ => String::from("."),
            },
            r.stars,
            match r.tau {
                Some(t) => format!("{t}"),
                None => String::from("FE"),
            },
            r.group.as_deref().unwrap_or("-"),
            r.n
        )
        .unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_descriptives_csv(path: &Path, table: &DescriptiveTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["variable", "group", "N", "mean", "min", "max"])?;
    for r in &table.rows {
        w.write_record([
            r.variable.as_str(),
            r.group.as_str(),
            &r.n.to_string(),
            &fmt_opt(r.mean),
            &fmt_opt(r.min),
            &fmt_opt(r.max),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tfp_csv(path: &Path, records: &[TfpRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["entity", "t", "t1", "TFP", "EC", "TC", "PEC", "SEC", "flags"])?;
    for r in records {
        w.write_record([
            r.entity.as_str(),
            &r.period_from.to_string(),
            &r.period_to.to_string(),
            &r.tfp.to_string(),
            &r.ec.to_string(),
            &r.tc.to_string(),
            &r.pec.to_string(),
            &r.sec.to_string(),
            &r.fallback_flags.join("|"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_static_tfp_csv(path: &Path, records: &[StaticTfpRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["entity", "period", "score", "PES", "SES"])?;
    for r in records {
        w.write_record([
            r.entity.as_str(),
            &r.period.to_string(),
            &r.score.to_string(),
            &r.pes.to_string(),
            &r.ses.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trend_csv(path: &Path, series: &[TrendSeries]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["series", "period", "N", "mean"])?;
    for s in series {
        for p in &s.points {
            w.write_record([
                s.name.as_str(),
                &p.period.to_string(),
                &p.n.to_string(),
                &p.mean.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
