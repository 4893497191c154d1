//! The private input: `n` samples in `d` dimensions, with CSV I/O.
//!
//! File format: one sample per row, `d` float columns, no header.

use ndarray::{Array2, ArrayView1};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    data: Array2<f64>,
}

impl Dataset {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::invalid("dataset needs n >= 1 and d >= 1".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("dataset entries must be finite".into()));
        }
        Ok(Dataset { data })
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn d(&self) -> usize {
        self.data.ncols()
    }

    pub fn rows(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.data.row(i)
    }

    pub fn column_vec(&self, j: usize) -> Vec<f64> {
        self.data.column(j).to_vec()
    }

    /// Replaces row `i`; used by corruption adversaries.
    pub fn set_row(&mut self, i: usize, values: &[f64]) -> Result<()> {
        if values.len() != self.d() {
            return Err(Error::dim(format!("row has {} entries, d={}", values.len(), self.d())));
        }
        for (j, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::invalid("row entries must be finite".into()));
            }
            self.data[[i, j]] = v;
        }
        Ok(())
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.d()).map(|j| self.data.column(j).sum() / n).collect()
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(path)
            .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for record in reader.records() {
            let record =
                record.map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
            let row: Vec<f64> = record
                .iter()
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| {
                        Error::invalid(format!("non-numeric field {f:?} in {}", path.display()))
                    })
                })
                .collect::<Result<_>>()?;
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(Error::invalid(format!(
                        "ragged csv: row {} has {} fields, expected {}",
                        rows.len(),
                        row.len(),
                        first.len()
                    )));
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::invalid(format!("{} contains no samples", path.display())));
        }
        let d = rows[0].len();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let data = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::dim(format!("csv shape: {e}")))?;
        Dataset::new(data)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(path)
            .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
        for i in 0..self.n() {
            let fields: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            writer
                .write_record(&fields)
                .map_err(|e| Error::Csv { path: path.display().to_string(), source: e })?;
        }
        writer.flush().map_err(|e| Error::Io { path: path.display().to_string(), source: e })?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn csv_round_trip() {
        let ds = Dataset::new(array![[1.0, 2.5], [-0.125, 3.0]]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        ds.write_csv(&path).unwrap();
        let back = Dataset::read_csv(&path).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn rejects_nonfinite() {
        assert!(Dataset::new(array![[f64::NAN]]).is_err());
    }
}
