//! Slacks-based-measure DEA with undesirable outputs.
//!
//! Implements the non-oriented SBM score, its super-efficiency variant for
//! ranking efficient units above 1, and the composite `efficiency` scoring
//! rule that chains the two. Distance functions evaluate a DMU against a
//! contemporaneous, pooled ("global") or windowed frontier; cross-period
//! evaluations that cannot be ranked fall back to the global pool and carry
//! a flag.
//!
//! Both fractional programs are turned into a single LP each via the
//! Charnes-Cooper transformation; the transformation variable `t` never
//! leaves this module.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lp::{solve_lp, Constraint, LpProblem, LpStatus, Relation};

/// Returns-to-scale assumption. VRS adds the convexity constraint
/// `sum(lambda) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rts {
    Crs,
    Vrs,
}

/// One entity-period observation: inputs, desirable outputs, undesirable
/// outputs. All components must be strictly positive (the panel layer floors
/// non-positive cells before bundles are built).
#[derive(Debug, Clone, PartialEq)]
pub struct DmuBundle {
    pub entity: String,
    pub period: i32,
    pub inputs: Vec<f64>,
    pub good_outputs: Vec<f64>,
    pub bad_outputs: Vec<f64>,
}

impl DmuBundle {
    pub fn new(
        entity: impl Into<String>,
        period: i32,
        inputs: Vec<f64>,
        good_outputs: Vec<f64>,
        bad_outputs: Vec<f64>,
    ) -> Result<Self> {
        let entity = entity.into();
        if inputs.is_empty() || good_outputs.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "bundle ({entity}, {period}) needs at least one input and one desirable output"
            )));
        }
        let all_positive = inputs
            .iter()
            .chain(&good_outputs)
            .chain(&bad_outputs)
            .all(|v| v.is_finite() && *v > 0.0);
        if !all_positive {
            return Err(Error::NonPositiveBundle {
                entity,
                period,
            });
        }
        Ok(Self {
            entity,
            period,
            inputs,
            good_outputs,
            bad_outputs,
        })
    }

    pub fn key(&self) -> (&str, i32) {
        (&self.entity, self.period)
    }

    fn dims(&self) -> (usize, usize, usize) {
        (
            self.inputs.len(),
            self.good_outputs.len(),
            self.bad_outputs.len(),
        )
    }
}

/// Reference technology for one evaluation.
#[derive(Debug, Clone)]
pub struct ReferenceSet {
    pub bundles: Vec<DmuBundle>,
    pub rts: Rts,
    /// Entity-period to leave out (super-efficiency).
    pub exclude: Option<(String, i32)>,
}

impl ReferenceSet {
    pub fn new(bundles: Vec<DmuBundle>, rts: Rts) -> Self {
        Self {
            bundles,
            rts,
            exclude: None,
        }
    }

    pub fn excluding(&self, entity: &str, period: i32) -> Self {
        Self {
            bundles: self.bundles.clone(),
            rts: self.rts,
            exclude: Some((entity.to_string(), period)),
        }
    }

    fn active(&self) -> Vec<&DmuBundle> {
        self.bundles
            .iter()
            .filter(|b| match &self.exclude {
                Some((e, p)) => !(b.entity == *e && b.period == *p),
                None => true,
            })
            .collect()
    }

    fn contains(&self, entity: &str, period: i32) -> bool {
        self.active()
            .iter()
            .any(|b| b.entity == entity && b.period == period)
    }
}

/// Which program produced a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbmModel {
    Sbm,
    SuperSbm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbmStatus {
    Ok,
    Infeasible,
}

/// Optimal slacks per dimension. For the super-efficiency model these are
/// the projection gaps (input expansion, good-output shortfall, bad-output
/// expansion), which play the same role.
#[derive(Debug, Clone, Default)]
pub struct Slacks {
    pub inputs: Vec<f64>,
    pub good_outputs: Vec<f64>,
    pub bad_outputs: Vec<f64>,
}

impl Slacks {
    fn max_abs(&self) -> f64 {
        self.inputs
            .iter()
            .chain(&self.good_outputs)
            .chain(&self.bad_outputs)
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Outcome of one DEA evaluation.
#[derive(Debug, Clone)]
pub struct SbmResult {
    /// Efficiency score rho: in (0, 1] for the SBM model, >= 1 for the
    /// super-efficiency model.
    pub score: f64,
    /// Slacks in the original units of the data.
    pub slacks: Slacks,
    /// Slacks in mean-normalized units; scale-free, used for efficiency
    /// classification.
    pub relative_slacks: Slacks,
    /// Intensity weights over the active (non-excluded) reference bundles.
    pub lambdas: Vec<f64>,
    pub status: SbmStatus,
    pub model: SbmModel,
    /// Set when the composite rule wanted a super-efficiency score but the
    /// model was infeasible (or the reference empty after exclusion) and the
    /// score was pinned at 1.
    pub super_fallback: bool,
}

impl SbmResult {
    fn infeasible(model: SbmModel) -> Self {
        Self {
            score: f64::NAN,
            slacks: Slacks::default(),
            relative_slacks: Slacks::default(),
            lambdas: Vec::new(),
            status: SbmStatus::Infeasible,
            model,
            super_fallback: false,
        }
    }

    /// SBM-efficient: score 1 and every slack zero, up to tolerance.
    pub fn is_efficient(&self) -> bool {
        self.status == SbmStatus::Ok
            && self.score >= 1.0 - EFF_TOL
            && self.relative_slacks.max_abs() < EFF_TOL
    }
}

/// Numerical-equality threshold for routing efficient units to the
/// super-efficiency model.
pub const EFF_TOL: f64 = 1e-7;

fn check_dims(dmu: &DmuBundle, active: &[&DmuBundle]) -> Result<()> {
    if active.is_empty() {
        return Err(Error::EmptyReference);
    }
    let d = dmu.dims();
    for b in active {
        if b.dims() != d {
            return Err(Error::DimensionMismatch(format!(
                "bundle ({}, {}) has dims {:?}, expected {:?}",
                b.entity,
                b.period,
                b.dims(),
                d
            )));
        }
    }
    Ok(())
}

/// Per-dimension means over the reference plus the evaluated DMU. Scaling
/// each dimension by its mean leaves SBM scores unchanged (units invariance)
/// and keeps the LP well conditioned regardless of raw data magnitudes.
struct DimScale {
    inputs: Vec<f64>,
    good: Vec<f64>,
    bad: Vec<f64>,
}

impl DimScale {
    fn from(dmu: &DmuBundle, active: &[&DmuBundle]) -> Self {
        let (m, s1, s2) = dmu.dims();
        let n = active.len() + 1;
        let mut inputs = vec![0.0; m];
        let mut good = vec![0.0; s1];
        let mut bad = vec![0.0; s2];
        let add = |b: &DmuBundle, inputs: &mut [f64], good: &mut [f64], bad: &mut [f64]| {
            for (acc, v) in inputs.iter_mut().zip(&b.inputs) {
                *acc += v;
            }
            for (acc, v) in good.iter_mut().zip(&b.good_outputs) {
                *acc += v;
            }
            for (acc, v) in bad.iter_mut().zip(&b.bad_outputs) {
                *acc += v;
            }
        };
        for b in active {
            add(b, &mut inputs, &mut good, &mut bad);
        }
        add(dmu, &mut inputs, &mut good, &mut bad);
        for v in inputs.iter_mut().chain(&mut good).chain(&mut bad) {
            *v /= n as f64;
        }
        Self { inputs, good, bad }
    }

    fn scale(&self, b: &DmuBundle) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (
            b.inputs.iter().zip(&self.inputs).map(|(v, s)| v / s).collect(),
            b.good_outputs.iter().zip(&self.good).map(|(v, s)| v / s).collect(),
            b.bad_outputs.iter().zip(&self.bad).map(|(v, s)| v / s).collect(),
        )
    }
}

/// Standard non-oriented SBM with undesirable outputs.
///
/// Solves, after Charnes-Cooper linearization,
///
/// ```text
/// min rho = [1 - (1/m) sum_i s_i^-/x_i0]
///         / [1 + (1/(s1+s2)) (sum_r s_r^g/y_r0^g + sum_k s_k^b/y_k0^b)]
/// s.t. x0 = X L + s^-,  y0^g = Y^g L - s^g,  y0^b = Y^b L + s^b,
///      L, s >= 0,  sum(L) = 1 under VRS.
/// ```
///
/// The DMU must itself be a member of the reference set.
pub fn sbm_score(dmu: &DmuBundle, reference: &ReferenceSet) -> Result<SbmResult> {
    let active = reference.active();
    check_dims(dmu, &active)?;
    if !reference.contains(&dmu.entity, dmu.period) {
        return Err(Error::NotAMember {
            entity: dmu.entity.clone(),
            period: dmu.period,
        });
    }
    solve_sbm(dmu, &active, reference.rts)
}

fn solve_sbm(dmu: &DmuBundle, active: &[&DmuBundle], rts: Rts) -> Result<SbmResult> {
    let (m, s1, s2) = dmu.dims();
    let n = active.len();
    let scale = DimScale::from(dmu, active);
    let (x0, yg0, yb0) = scale.scale(dmu);

    // Columns: [lambda_1..n | s^-_1..m | s^g_1..s1 | s^b_1..s2 | t]
    let n_slack = m + s1 + s2;
    let n_cols = n + n_slack + 1;
    let t_col = n_cols - 1;
    let col_lambda = 0;
    let col_sin = n;
    let col_sg = n + m;
    let col_sb = n + m + s1;

    let mut objective = vec![0.0; n_cols];
    for i in 0..m {
        objective[col_sin + i] = -1.0 / (m as f64 * x0[i]);
    }
    objective[t_col] = 1.0;

    let mut constraints = Vec::with_capacity(n_slack + 2);

    // Normalization: t + (1/(s1+s2)) (sum s^g/y0^g + sum s^b/y0^b) = 1
    let denom = (s1 + s2) as f64;
    let mut norm = vec![0.0; n_cols];
    norm[t_col] = 1.0;
    for r in 0..s1 {
        norm[col_sg + r] = 1.0 / (denom * yg0[r]);
    }
    for k in 0..s2 {
        norm[col_sb + k] = 1.0 / (denom * yb0[k]);
    }
    constraints.push(Constraint::new(norm, Relation::Eq, 1.0));

    let scaled: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> =
        active.iter().map(|b| scale.scale(b)).collect();

    for i in 0..m {
        let mut row = vec![0.0; n_cols];
        for (j, (xi, _, _)) in scaled.iter().enumerate() {
            row[col_lambda + j] = xi[i];
        }
        row[col_sin + i] = 1.0;
        row[t_col] = -x0[i];
        constraints.push(Constraint::new(row, Relation::Eq, 0.0));
    }
    for r in 0..s1 {
        let mut row = vec![0.0; n_cols];
        for (j, (_, yg, _)) in scaled.iter().enumerate() {
            row[col_lambda + j] = yg[r];
        }
        row[col_sg + r] = -1.0;
        row[t_col] = -yg0[r];
        constraints.push(Constraint::new(row, Relation::Eq, 0.0));
    }
    for k in 0..s2 {
        let mut row = vec![0.0; n_cols];
        for (j, (_, _, yb)) in scaled.iter().enumerate() {
            row[col_lambda + j] = yb[k];
        }
        row[col_sb + k] = 1.0;
        row[t_col] = -yb0[k];
        constraints.push(Constraint::new(row, Relation::Eq, 0.0));
    }
    if rts == Rts::Vrs {
        let mut row = vec![0.0; n_cols];
        for j in 0..n {
            row[col_lambda + j] = 1.0;
        }
        row[t_col] = -1.0;
        constraints.push(Constraint::new(row, Relation::Eq, 0.0));
    }

    let solution = solve_lp(&LpProblem::new(objective, constraints))?;
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(SbmResult::infeasible(SbmModel::Sbm)),
        LpStatus::Unbounded => {
            return Err(Error::MalformedLp("SBM program reported unbounded".into()))
        }
    }
    let t = solution.primal[t_col];
    if t <= 1e-12 {
        return Err(Error::MalformedLp(
            "SBM normalization variable collapsed to zero".into(),
        ));
    }

    let lambdas: Vec<f64> = (0..n).map(|j| solution.primal[col_lambda + j] / t).collect();
    let rel = Slacks {
        inputs: (0..m).map(|i| solution.primal[col_sin + i] / t).collect(),
        good_outputs: (0..s1).map(|r| solution.primal[col_sg + r] / t).collect(),
        bad_outputs: (0..s2).map(|k| solution.primal[col_sb + k] / t).collect(),
    };
    let slacks = Slacks {
        inputs: rel.inputs.iter().zip(&scale.inputs).map(|(s, c)| s * c).collect(),
        good_outputs: rel.good_outputs.iter().zip(&scale.good).map(|(s, c)| s * c).collect(),
        bad_outputs: rel.bad_outputs.iter().zip(&scale.bad).map(|(s, c)| s * c).collect(),
    };

    Ok(SbmResult {
        score: solution.objective_value,
        slacks,
        relative_slacks: rel,
        lambdas,
        status: SbmStatus::Ok,
        model: SbmModel::Sbm,
        super_fallback: false,
    })
}

/// Super-efficiency SBM with undesirable outputs.
///
/// Finds a projection point `(xbar, ybar^g, ybar^b)` generated by the
/// reference set without the DMU, with `xbar >= x0`, `ybar^g <= y0^g`,
/// `ybar^b >= y0^b`, minimizing the ratio of average input/bad-output
/// expansion to average good-output contraction. Scores are >= 1.
///
/// Callers must only route SBM-efficient DMUs here; the reference must not
/// contain the DMU.
pub fn super_sbm_score(dmu: &DmuBundle, reference: &ReferenceSet) -> Result<SbmResult> {
    let mut reference = reference.clone();
    reference.exclude = Some((dmu.entity.clone(), dmu.period));
    // Contract check: the caller claims the DMU is efficient. Verify against
    // the reference including the DMU before ranking it.
    let mut with_dmu = reference.clone();
    with_dmu.exclude = None;
    if !with_dmu.contains(&dmu.entity, dmu.period) {
        with_dmu.bundles.push(dmu.clone());
    }
    let sbm = sbm_score(dmu, &with_dmu)?;
    if sbm.status == SbmStatus::Ok && !sbm.is_efficient() {
        return Err(Error::NotEfficient {
            entity: dmu.entity.clone(),
            period: dmu.period,
        });
    }
    super_sbm_unchecked(dmu, &reference)
}

fn super_sbm_unchecked(dmu: &DmuBundle, reference: &ReferenceSet) -> Result<SbmResult> {
    let active = reference.active();
    check_dims(dmu, &active)?;

    let (m, s1, s2) = dmu.dims();
    let n = active.len();
    let scale = DimScale::from(dmu, &active);
    let (x0, yg0, yb0) = scale.scale(dmu);

    // Columns: [lambda_1..n | xbar_1..m | ybar^g_1..s1 | ybar^b_1..s2 | t]
    let n_cols = n + m + s1 + s2 + 1;
    let t_col = n_cols - 1;
    let col_lambda = 0;
    let col_x = n;
    let col_yg = n + m;
    let col_yb = n + m + s1;

    // min (1/(m+s2)) (sum xbar_i/x_i0 + sum ybar^b_k/y_k0^b)
    let expand = (m + s2) as f64;
    let mut objective = vec![0.0; n_cols];
    for i in 0..m {
        objective[col_x + i] = 1.0 / (expand * x0[i]);
    }
    for k in 0..s2 {
        objective[col_yb + k] = 1.0 / (expand * yb0[k]);
    }

    let mut constraints = Vec::new();

    // Normalization: (1/s1) sum ybar^g_r / y_r0^g = 1
    let mut norm = vec![0.0; n_cols];
    for r in 0..s1 {
        norm[col_yg + r] = 1.0 / (s1 as f64 * yg0[r]);
    }
    constraints.push(Constraint::new(norm, Relation::Eq, 1.0));

    let scaled: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> =
        active.iter().map(|b| scale.scale(b)).collect();

    // Technology: X L <= xbar, Y^g L >= ybar^g, Y^b L <= ybar^b
    for i in 0..m {
        let mut row = vec![0.0; n_cols];
        for (j, (xi, _, _)) in scaled.iter().enumerate() {
            row[col_lambda + j] = xi[i];
        }
        row[col_x + i] = -1.0;
        constraints.push(Constraint::new(row, Relation::Le, 0.0));
    }
    for r in 0..s1 {
        let mut row = vec![0.0; n_cols];
        for (j, (_, yg, _)) in scaled.iter().enumerate() {
            row[col_lambda + j] = yg[r];
        }
        row[col_yg + r] = -1.0;
        constraints.push(Constraint::new(row, Relation::Ge, 0.0));
    }
    for k in 0..s2 {
        let mut row = vec![0.0; n_cols];
        for (j, (_, _, yb)) in scaled.iter().enumerate() {
            row[col_lambda + j] = yb[k];
        }
        row[col_yb + k] = -1.0;
        constraints.push(Constraint::new(row, Relation::Le, 0.0));
    }

    // Super-efficiency: xbar >= t x0, ybar^g <= t y0^g, ybar^b >= t y0^b
    for i in 0..m {
        let mut row = vec![0.0; n_cols];
        row[col_x + i] = 1.0;
        row[t_col] = -x0[i];
        constraints.push(Constraint::new(row, Relation::Ge, 0.0));
    }
    for r in 0..s1 {
        let mut row = vec![0.0; n_cols];
        row[col_yg + r] = 1.0;
        row[t_col] = -yg0[r];
        constraints.push(Constraint::new(row, Relation::Le, 0.0));
    }
    for k in 0..s2 {
        let mut row = vec![0.0; n_cols];
        row[col_yb + k] = 1.0;
        row[t_col] = -yb0[k];
        constraints.push(Constraint::new(row, Relation::Ge, 0.0));
    }

    if reference.rts == Rts::Vrs {
        let mut row = vec![0.0; n_cols];
        for j in 0..n {
            row[col_lambda + j] = 1.0;
        }
        row[t_col] = -1.0;
        constraints.push(Constraint::new(row, Relation::Eq, 0.0));
    }

    let solution = solve_lp(&LpProblem::new(objective, constraints))?;
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Ok(SbmResult::infeasible(SbmModel::SuperSbm)),
        LpStatus::Unbounded => {
            return Err(Error::MalformedLp("super-SBM program reported unbounded".into()))
        }
    }
    let t = solution.primal[t_col];
    if t <= 1e-12 {
        return Err(Error::MalformedLp(
            "super-SBM normalization variable collapsed to zero".into(),
        ));
    }

    let lambdas: Vec<f64> = (0..n).map(|j| solution.primal[col_lambda + j] / t).collect();
    // Projection gaps in normalized units.
    let rel = Slacks {
        inputs: (0..m)
            .map(|i| (solution.primal[col_x + i] / t - x0[i]).max(0.0))
            .collect(),
        good_outputs: (0..s1)
            .map(|r| (yg0[r] - solution.primal[col_yg + r] / t).max(0.0))
            .collect(),
        bad_outputs: (0..s2)
            .map(|k| (solution.primal[col_yb + k] / t - yb0[k]).max(0.0))
            .collect(),
    };
    let slacks = Slacks {
        inputs: rel.inputs.iter().zip(&scale.inputs).map(|(s, c)| s * c).collect(),
        good_outputs: rel.good_outputs.iter().zip(&scale.good).map(|(s, c)| s * c).collect(),
        bad_outputs: rel.bad_outputs.iter().zip(&scale.bad).map(|(s, c)| s * c).collect(),
    };

    Ok(SbmResult {
        score: solution.objective_value,
        slacks,
        relative_slacks: rel,
        lambdas,
        status: SbmStatus::Ok,
        model: SbmModel::SuperSbm,
        super_fallback: false,
    })
}

/// Composite scoring rule: SBM first; units found efficient are re-scored
/// with the super-efficiency model against the reference without themselves,
/// yielding one continuous ranking where efficient units score above 1.
///
/// When the super model is infeasible (or the reference is empty after the
/// exclusion), the score is reported as 1 with `super_fallback` set.
pub fn efficiency(dmu: &DmuBundle, reference: &ReferenceSet) -> Result<SbmResult> {
    let sbm = sbm_score(dmu, reference)?;
    if sbm.status != SbmStatus::Ok || !sbm.is_efficient() {
        return Ok(sbm);
    }
    let excluded = reference.excluding(&dmu.entity, dmu.period);
    let sup = if excluded.active().is_empty() {
        SbmResult::infeasible(SbmModel::SuperSbm)
    } else {
        super_sbm_unchecked(dmu, &excluded)?
    };
    if sup.status == SbmStatus::Ok {
        return Ok(sup);
    }
    // Unrankable efficient unit: keep the SBM result, pin the score at 1.
    let mut fallback = sbm;
    fallback.score = 1.0;
    fallback.super_fallback = true;
    Ok(fallback)
}

/// Frontier specification for distance evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontierSpec {
    /// Cross-section of a single period.
    Period(i32),
    /// Pool of every period (the global reference set).
    Global,
    /// `width` consecutive observed periods ending at `end`; width 1 is the
    /// per-period window used for static scores.
    Window { end: i32, width: usize },
}

/// All bundles of a panel, indexed by period.
#[derive(Debug, Clone, Default)]
pub struct BundleStore {
    by_period: BTreeMap<i32, Vec<DmuBundle>>,
}

impl BundleStore {
    pub fn new(bundles: Vec<DmuBundle>) -> Self {
        let mut by_period: BTreeMap<i32, Vec<DmuBundle>> = BTreeMap::new();
        for b in bundles {
            by_period.entry(b.period).or_default().push(b);
        }
        Self { by_period }
    }

    pub fn periods(&self) -> Vec<i32> {
        self.by_period.keys().copied().collect()
    }

    pub fn get(&self, entity: &str, period: i32) -> Option<&DmuBundle> {
        self.by_period
            .get(&period)?
            .iter()
            .find(|b| b.entity == entity)
    }

    pub fn len(&self) -> usize {
        self.by_period.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_period.is_empty()
    }

    fn frontier(&self, spec: FrontierSpec) -> Vec<DmuBundle> {
        match spec {
            FrontierSpec::Period(p) => self.by_period.get(&p).cloned().unwrap_or_default(),
            FrontierSpec::Global => self.by_period.values().flatten().cloned().collect(),
            FrontierSpec::Window { end, width } => {
                let periods: Vec<i32> = self
                    .by_period
                    .keys()
                    .copied()
                    .filter(|p| *p <= end)
                    .collect();
                let start = periods.len().saturating_sub(width.max(1));
                let window: Vec<i32> = periods[start..].to_vec();
                self.by_period
                    .iter()
                    .filter(|(p, _)| window.contains(p))
                    .flat_map(|(_, v)| v.iter().cloned())
                    .collect()
            }
        }
    }
}

/// A distance-function evaluation: the composite score plus a marker for
/// evaluations that had to be re-run against the global pool.
#[derive(Debug, Clone)]
pub struct DistanceOutcome {
    pub result: SbmResult,
    pub global_fallback: bool,
}

impl DistanceOutcome {
    pub fn value(&self) -> f64 {
        self.result.score
    }
}

/// Distance of `dmu` to the frontier described by `spec`. The DMU is added
/// to the reference when it is not a member, so cross-period distances can
/// exceed 1 through the super-efficiency form or fall below 1 through the
/// SBM form. Evaluations the frontier cannot rank (infeasible super model)
/// are recomputed against the global pool and flagged.
pub fn distance(
    store: &BundleStore,
    dmu: &DmuBundle,
    spec: FrontierSpec,
    rts: Rts,
) -> Result<DistanceOutcome> {
    let first = evaluate_against(store, dmu, spec, rts)?;
    let unrankable = first.status == SbmStatus::Infeasible || first.super_fallback;
    if unrankable && spec != FrontierSpec::Global {
        let global = evaluate_against(store, dmu, FrontierSpec::Global, rts)?;
        if global.status == SbmStatus::Ok {
            return Ok(DistanceOutcome {
                result: global,
                global_fallback: true,
            });
        }
    }
    if first.status != SbmStatus::Ok {
        return Err(Error::DegenerateDistance {
            entity: dmu.entity.clone(),
            period: dmu.period,
        });
    }
    Ok(DistanceOutcome {
        result: first,
        global_fallback: false,
    })
}

fn evaluate_against(
    store: &BundleStore,
    dmu: &DmuBundle,
    spec: FrontierSpec,
    rts: Rts,
) -> Result<SbmResult> {
    let mut bundles = store.frontier(spec);
    if bundles.is_empty() {
        return Err(Error::EmptyReference);
    }
    if !bundles
        .iter()
        .any(|b| b.entity == dmu.entity && b.period == dmu.period)
    {
        bundles.push(dmu.clone());
    }
    let reference = ReferenceSet::new(bundles, rts);
    efficiency(dmu, &reference)
}
