//! Rectangular entity x period x variable panel with a per-cell
//! present/absent mask and per-entity grouping labels.
//!
//! A dataset is immutable once built: transformations and group assignments
//! return a new dataset, so panels can be shared read-only across parallel
//! workers.

mod csv_io;
mod describe;
mod groups;
mod transform;

pub use csv_io::{read_groups_csv, read_panel_csv, write_panel_csv, GroupRecord};
pub use describe::{describe, DescriptiveRow, DescriptiveTable};
pub use groups::{assign_groups, GroupingRule, TertileDirection};
pub use transform::{
    apply_transform, floor_positive, FlooredCell, Transform, VariableRole, VariableSpec,
};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};

/// One long-form observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub entity: String,
    pub period: i32,
    pub variable: String,
    pub value: f64,
}

impl Record {
    pub fn new(entity: impl Into<String>, period: i32, variable: impl Into<String>, value: f64) -> Self {
        Self {
            entity: entity.into(),
            period,
            variable: variable.into(),
            value,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct VarMatrix {
    pub values: Vec<f64>,
    pub present: Vec<bool>,
}

impl VarMatrix {
    fn empty(cells: usize) -> Self {
        Self {
            values: vec![f64::NAN; cells],
            present: vec![false; cells],
        }
    }
}

/// Rectangular panel dataset.
#[derive(Debug, Clone)]
pub struct PanelDataset {
    entities: Vec<String>,
    periods: Vec<i32>,
    entity_index: BTreeMap<String, usize>,
    period_index: BTreeMap<i32, usize>,
    variables: BTreeMap<String, VarMatrix>,
    /// scheme name -> per-entity label
    groups: BTreeMap<String, Vec<Option<String>>>,
}

impl PanelDataset {
    /// Build a rectangular panel from long-form records. Cells not covered
    /// by any record are masked absent. Duplicate (entity, period, variable)
    /// triples and non-finite values are rejected.
    pub fn from_records(records: &[Record]) -> Result<Self> {
        let mut entity_set = BTreeSet::new();
        let mut period_set = BTreeSet::new();
        let mut var_set = BTreeSet::new();
        for r in records {
            if !r.value.is_finite() {
                return Err(Error::NonFiniteValue {
                    entity: r.entity.clone(),
                    period: r.period,
                    variable: r.variable.clone(),
                    value: r.value,
                });
            }
            entity_set.insert(r.entity.clone());
            period_set.insert(r.period);
            var_set.insert(r.variable.clone());
        }
        let entities: Vec<String> = entity_set.into_iter().collect();
        let periods: Vec<i32> = period_set.into_iter().collect();
        let entity_index: BTreeMap<String, usize> = entities
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let period_index: BTreeMap<i32, usize> =
            periods.iter().enumerate().map(|(i, p)| (*p, i)).collect();

        let cells = entities.len() * periods.len();
        let mut variables: BTreeMap<String, VarMatrix> = var_set
            .into_iter()
            .map(|v| (v, VarMatrix::empty(cells)))
            .collect();

        for r in records {
            let e = entity_index[&r.entity];
            let p = period_index[&r.period];
            let idx = e * periods.len() + p;
            let m = variables.get_mut(&r.variable).expect("variable registered");
            if m.present[idx] {
                return Err(Error::DuplicateRecord {
                    entity: r.entity.clone(),
                    period: r.period,
                    variable: r.variable.clone(),
                });
            }
            m.present[idx] = true;
            m.values[idx] = r.value;
        }

        Ok(Self {
            entities,
            periods,
            entity_index,
            period_index,
            variables,
            groups: BTreeMap::new(),
        })
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn periods(&self) -> &[i32] {
        &self.periods
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.variables.keys().map(String::as_str).collect()
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.variables.contains_key(name)
    }

    pub fn entity_position(&self, entity: &str) -> Option<usize> {
        self.entity_index.get(entity).copied()
    }

    pub fn period_position(&self, period: i32) -> Option<usize> {
        self.period_index.get(&period).copied()
    }

    fn matrix(&self, variable: &str) -> Result<&VarMatrix> {
        self.variables
            .get(variable)
            .ok_or_else(|| Error::UnknownVariable(variable.to_string()))
    }

    #[inline]
    fn cell(&self, e_idx: usize, p_idx: usize) -> usize {
        e_idx * self.periods.len() + p_idx
    }

    /// Value of a present cell by positional indices; `None` when masked.
    pub fn value_at(&self, variable: &str, e_idx: usize, p_idx: usize) -> Result<Option<f64>> {
        let m = self.matrix(variable)?;
        let idx = self.cell(e_idx, p_idx);
        Ok(if m.present[idx] { Some(m.values[idx]) } else { None })
    }

    /// Value of a present cell by names; `None` when masked.
    pub fn value(&self, variable: &str, entity: &str, period: i32) -> Result<Option<f64>> {
        let e = self
            .entity_index
            .get(entity)
            .ok_or_else(|| Error::UnknownEntity(entity.to_string()))?;
        let p = self
            .period_index
            .get(&period)
            .ok_or(Error::UnknownPeriod(period))?;
        self.value_at(variable, *e, *p)
    }

    /// Like [`value`](Self::value) but reading an absent cell is an error.
    pub fn require(&self, variable: &str, entity: &str, period: i32) -> Result<f64> {
        self.value(variable, entity, period)?
            .ok_or_else(|| Error::AbsentCell {
                entity: entity.to_string(),
                period,
                variable: variable.to_string(),
            })
    }

    /// All present values of a variable, in (entity, period) order.
    pub fn present_values(&self, variable: &str) -> Result<Vec<f64>> {
        let m = self.matrix(variable)?;
        Ok(m.values
            .iter()
            .zip(&m.present)
            .filter(|(_, p)| **p)
            .map(|(v, _)| *v)
            .collect())
    }

    pub fn absent_cell_count(&self, variable: &str) -> Result<usize> {
        let m = self.matrix(variable)?;
        Ok(m.present.iter().filter(|p| !**p).count())
    }

    /// Time-average of a variable for one entity over its present cells.
    pub fn entity_mean(&self, variable: &str, e_idx: usize) -> Result<Option<f64>> {
        let m = self.matrix(variable)?;
        let mut sum = 0.0;
        let mut n = 0usize;
        for p_idx in 0..self.periods.len() {
            let idx = self.cell(e_idx, p_idx);
            if m.present[idx] {
                sum += m.values[idx];
                n += 1;
            }
        }
        Ok(if n == 0 { None } else { Some(sum / n as f64) })
    }

    /// Grand mean over all present cells of a variable.
    pub fn grand_mean(&self, variable: &str) -> Result<Option<f64>> {
        let vals = self.present_values(variable)?;
        Ok(crate::stats::mean(&vals))
    }

    /// Group label of an entity under a scheme.
    pub fn group_label(&self, scheme: &str, entity: &str) -> Result<Option<&str>> {
        let labels = self
            .groups
            .get(scheme)
            .ok_or_else(|| Error::UnknownScheme(scheme.to_string()))?;
        let e = self
            .entity_index
            .get(entity)
            .ok_or_else(|| Error::UnknownEntity(entity.to_string()))?;
        Ok(labels[*e].as_deref())
    }

    pub fn schemes(&self) -> Vec<&str> {
        self.groups.keys().map(String::as_str).collect()
    }

    /// Distinct labels of a scheme, sorted.
    pub fn scheme_labels(&self, scheme: &str) -> Result<Vec<String>> {
        let labels = self
            .groups
            .get(scheme)
            .ok_or_else(|| Error::UnknownScheme(scheme.to_string()))?;
        let set: BTreeSet<String> = labels.iter().flatten().cloned().collect();
        Ok(set.into_iter().collect())
    }

    /// Entities carrying `label` under `scheme`, in panel order.
    pub fn entities_with_label(&self, scheme: &str, label: &str) -> Result<Vec<usize>> {
        let labels = self
            .groups
            .get(scheme)
            .ok_or_else(|| Error::UnknownScheme(scheme.to_string()))?;
        Ok(labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.as_deref() == Some(label))
            .map(|(i, _)| i)
            .collect())
    }

    /// Dump the panel back to long-form records (present cells only, in
    /// variable/entity/period order). Rebuilding from the dump reproduces
    /// the dataset.
    pub fn to_records(&self) -> Vec<Record> {
        let mut out = Vec::new();
        for (name, m) in &self.variables {
            for (e_idx, entity) in self.entities.iter().enumerate() {
                for (p_idx, period) in self.periods.iter().enumerate() {
                    let idx = e_idx * self.periods.len() + p_idx;
                    if m.present[idx] {
                        out.push(Record::new(entity.clone(), *period, name.clone(), m.values[idx]));
                    }
                }
            }
        }
        out
    }

    /// New dataset with an extra variable. Internal building block for the
    /// transform operations.
    pub(crate) fn with_matrix(&self, name: String, matrix: VarMatrix) -> Self {
        let mut next = self.clone();
        next.variables.insert(name, matrix);
        next
    }

    pub(crate) fn with_scheme(&self, scheme: String, labels: Vec<Option<String>>) -> Self {
        let mut next = self.clone();
        next.groups.insert(scheme, labels);
        next
    }

    pub(crate) fn matrix_ref(&self, variable: &str) -> Result<&VarMatrix> {
        self.matrix(variable)
    }

    pub(crate) fn n_cells(&self) -> usize {
        self.entities.len() * self.periods.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn single_record_panel() {
        let panel = PanelDataset::from_records(&[Record::new("A", 2000, "x", 1.0)]).unwrap();
        assert_eq!(panel.entities(), &["A".to_string()]);
        assert_eq!(panel.periods(), &[2000]);
        assert_eq!(panel.absent_cell_count("x").unwrap(), 0);
        assert_eq!(panel.require("x", "A", 2000).unwrap(), 1.0);
    }

    #[test]
    fn rectangularization_masks_holes() {
        let panel = PanelDataset::from_records(&[
            Record::new("A", 2000, "x", 1.0),
            Record::new("B", 2001, "x", 2.0),
        ])
        .unwrap();
        assert_eq!(panel.entities().len(), 2);
        assert_eq!(panel.periods().len(), 2);
        assert_eq!(panel.absent_cell_count("x").unwrap(), 2);
        assert!(panel.value("x", "A", 2001).unwrap().is_none());
        assert!(matches!(
            panel.require("x", "A", 2001),
            Err(Error::AbsentCell { .. })
        ));
    }

    #[test]
    fn duplicate_triple_rejected() {
        let err = PanelDataset::from_records(&[
            Record::new("A", 2000, "x", 1.0),
            Record::new("A", 2000, "x", 3.0),
        ])
        .unwrap_err();
        match err {
            Error::DuplicateRecord {
                entity,
                period,
                variable,
            } => {
                assert_eq!(entity, "A");
                assert_eq!(period, 2000);
                assert_eq!(variable, "x");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn non_finite_value_rejected() {
        let err =
            PanelDataset::from_records(&[Record::new("A", 2000, "x", f64::INFINITY)]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteValue { .. }));
    }

    #[test]
    fn entities_and_periods_sorted_and_unique() {
        let panel = PanelDataset::from_records(&[
            Record::new("B", 2001, "x", 1.0),
            Record::new("A", 2000, "x", 2.0),
            Record::new("A", 2001, "x", 3.0),
            Record::new("B", 2000, "x", 4.0),
        ])
        .unwrap();
        assert_eq!(panel.entities(), &["A".to_string(), "B".to_string()]);
        assert_eq!(panel.periods(), &[2000, 2001]);
    }

    proptest! {
        /// Rebuilding a panel from its own record dump is the identity.
        #[test]
        fn record_dump_round_trips(
            cells in proptest::collection::btree_set((0u8..5, 0u8..5, 0u8..3), 1..30),
            values in proptest::collection::vec(-1e6f64..1e6, 30),
        ) {
            let records: Vec<Record> = cells
                .iter()
                .zip(&values)
                .map(|((e, p, v), value)| {
                    Record::new(format!("E{e}"), 2000 + *p as i32, format!("V{v}"), *value)
                })
                .collect();
            let panel = PanelDataset::from_records(&records).unwrap();
            let dump = panel.to_records();
            let rebuilt = PanelDataset::from_records(&dump).unwrap();
            prop_assert_eq!(panel.entities(), rebuilt.entities());
            prop_assert_eq!(panel.periods(), rebuilt.periods());
            prop_assert_eq!(dump.len(), records.len());
            for r in &records {
                prop_assert_eq!(
                    rebuilt.require(&r.variable, &r.entity, r.period).unwrap(),
                    r.value
                );
            }
        }
    }
}
