//! Variable roles and transformations.

use super::{PanelDataset, VarMatrix};
use crate::error::{Error, Result};

/// What a variable is used for downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableRole {
    Input,
    DesirableOutput,
    UndesirableOutput,
    Dependent,
    Regressor,
    Moderator,
    Grouping,
}

/// Cell-wise transformation applied before use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    None,
    /// `v -> sign(v) * ln(1 + |v|)`; defined on the whole line, odd, order
    /// preserving. Used for variables that take both signs (net FDI).
    SignedLog,
    /// `v -> ln(v)`, requires `v > 0`.
    Log,
}

impl Transform {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Transform::None => v,
            Transform::SignedLog => v.signum() * (1.0 + v.abs()).ln(),
            Transform::Log => v.ln(),
        }
    }
}

/// A named variable with its role and transformation.
#[derive(Debug, Clone)]
pub struct VariableSpec {
    pub name: String,
    pub role: VariableRole,
    pub transform: Transform,
}

impl VariableSpec {
    pub fn new(name: impl Into<String>, role: VariableRole, transform: Transform) -> Self {
        Self {
            name: name.into(),
            role,
            transform,
        }
    }

    /// Name the transformed variable is stored under.
    pub fn derived_name(&self) -> String {
        match self.transform {
            Transform::None => self.name.clone(),
            Transform::SignedLog => format!("slog_{}", self.name),
            Transform::Log => format!("ln_{}", self.name),
        }
    }
}

/// Apply a transformation cell-wise over the present cells of
/// `spec.name`, storing the result under [`VariableSpec::derived_name`].
/// `Transform::None` returns the panel unchanged.
pub fn apply_transform(panel: &PanelDataset, spec: &VariableSpec) -> Result<PanelDataset> {
    let source = panel.matrix_ref(&spec.name)?;
    if spec.transform == Transform::None {
        return Ok(panel.clone());
    }
    let mut out = VarMatrix::empty(panel.n_cells());
    let n_periods = panel.periods().len();
    for (idx, (&present, &value)) in source.present.iter().zip(&source.values).enumerate() {
        if !present {
            continue;
        }
        if spec.transform == Transform::Log && value <= 0.0 {
            let e_idx = idx / n_periods;
            let p_idx = idx % n_periods;
            return Err(Error::LogDomain {
                entity: panel.entities()[e_idx].clone(),
                period: panel.periods()[p_idx],
                variable: spec.name.clone(),
                value,
            });
        }
        out.present[idx] = true;
        out.values[idx] = spec.transform.apply(value);
    }
    Ok(panel.with_matrix(spec.derived_name(), out))
}

/// A cell whose value was floored to keep DEA data strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct FlooredCell {
    pub entity: String,
    pub period: i32,
    pub variable: String,
    pub original: f64,
    pub floored_to: f64,
}

/// Replace cells `<= 0` of each listed variable by
/// `1e-6 * (smallest positive value of that variable)` and report the
/// replacements. A variable with no positive value at all is an error.
pub fn floor_positive(
    panel: &PanelDataset,
    variables: &[String],
) -> Result<(PanelDataset, Vec<FlooredCell>)> {
    let mut current = panel.clone();
    let mut flagged = Vec::new();
    let n_periods = panel.periods().len();
    for var in variables {
        let m = current.matrix_ref(var)?;
        let min_positive = m
            .values
            .iter()
            .zip(&m.present)
            .filter(|(v, p)| **p && **v > 0.0)
            .map(|(v, _)| *v)
            .fold(f64::INFINITY, f64::min);
        if !min_positive.is_finite() {
            return Err(Error::NoPositiveFloor {
                variable: var.clone(),
            });
        }
        let floor = 1e-6 * min_positive;
        let needs_floor = m
            .values
            .iter()
            .zip(&m.present)
            .any(|(v, p)| *p && *v <= 0.0);
        if !needs_floor {
            continue;
        }
        let mut next = m.clone();
        for idx in 0..next.values.len() {
            if next.present[idx] && next.values[idx] <= 0.0 {
                let e_idx = idx / n_periods;
                let p_idx = idx % n_periods;
                flagged.push(FlooredCell {
                    entity: current.entities()[e_idx].clone(),
                    period: current.periods()[p_idx],
                    variable: var.clone(),
                    original: next.values[idx],
                    floored_to: floor,
                });
                next.values[idx] = floor;
            }
        }
        current = current.with_matrix(var.clone(), next);
    }
    Ok((current, flagged))
}
