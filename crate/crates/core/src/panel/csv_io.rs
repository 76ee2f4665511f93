//! CSV ingestion and emission.
//!
//! Long-form panel schema: `entity,period,variable,value` with a header row,
//! period an integer year. Grouping schema: `entity,scheme,label`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PanelDataset, Record};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize, Serialize)]
struct RawRow {
    entity: String,
    period: i32,
    variable: String,
    value: f64,
}

/// One row of the grouping CSV.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq, Eq)]
pub struct GroupRecord {
    pub entity: String,
    pub scheme: String,
    pub label: String,
}

/// Read long-form panel records from a CSV file.
pub fn read_panel_csv(path: &Path) -> Result<Vec<Record>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let row: RawRow = row?;
        out.push(Record::new(row.entity, row.period, row.variable, row.value));
    }
    if out.is_empty() {
        return Err(Error::Config(format!(
            "panel CSV `{}` has no data rows",
            path.display()
        )));
    }
    Ok(out)
}

/// Write a panel back out in the ingestion schema.
pub fn write_panel_csv(path: &Path, panel: &PanelDataset) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["entity", "period", "variable", "value"])?;
    for r in panel.to_records() {
        writer.write_record([
            r.entity.as_str(),
            &r.period.to_string(),
            r.variable.as_str(),
            &r.value.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Read grouping labels from a CSV file.
pub fn read_groups_csv(path: &Path) -> Result<Vec<GroupRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in reader.deserialize() {
        let row: GroupRecord = row?;
        out.push(row);
    }
    Ok(out)
}
