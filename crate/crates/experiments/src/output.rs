//! CSV files written by a sweep.
//!
//! `settings.csv` has one row per `(dataset, n, τ, kind, set)` with the
//! columns of [`SettingResult`]; `aggregate.csv` has one row per
//! `(dataset, n, τ, kind)` with the columns of [`AggregateRow`]. Missing
//! values (no converged run) are empty fields.

use std::fs::File;
use std::path::Path;

use crate::{AggregateRow, ExperimentError, SettingResult};

pub fn settings_writer(path: &Path) -> Result<csv::Writer<File>, ExperimentError> {
    let file = File::create(path).map_err(|e| ExperimentError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub fn append_settings<W: std::io::Write>(
    writer: &mut csv::Writer<W>,
    rows: &[SettingResult],
) -> Result<(), ExperimentError> {
    for row in rows {
        writer.serialize(row)?;
    }
    writer
        .flush()
        .map_err(|e| ExperimentError::io("settings.csv", e))?;
    Ok(())
}

pub fn write_aggregate(path: &Path, rows: &[AggregateRow]) -> Result<(), ExperimentError> {
    let mut writer = settings_writer(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| ExperimentError::io(path, e))?;
    Ok(())
}
