//! Headerless CSV exchange of data matrices (rows = dimensions,
//! columns = samples, shortest round-trip float formatting).

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::sample::DataSet;
use crate::scalar::Real;

/// Writes a matrix as headerless CSV, one row per dimension.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a headerless CSV matrix; every row must have the same width.
pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in r.records() {
        let record = record?;
        let row: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| Error::Config(format!("bad number in {}: {e}", path.display())))?);
    }
    if rows.is_empty() {
        return Err(Error::Config(format!("{} is empty", path.display())));
    }
    let ncols = rows[0].len();
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Config(format!("{} has ragged rows", path.display())));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// Exports a data set as `x.csv` and `y.csv` under `dir`.
pub fn export_dataset_csv<T: Real>(ds: &DataSet<T>, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let to64 = |m: &DMatrix<T>| DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| crate::scalar::to_f64(m[(i, j)]));
    write_matrix_csv(&dir.join("x.csv"), &to64(&ds.x))?;
    write_matrix_csv(&dir.join("y.csv"), &to64(&ds.y))?;
    Ok(())
}
