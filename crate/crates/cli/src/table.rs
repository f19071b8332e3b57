//! Fixed-schema numeric CSV tables.

use std::fmt;
use std::path::Path;

/// A table cell. Reals are written with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(usize),
    Real(f64),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Real(v) => write!(f, "{v:.16e}"),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

pub fn write_table<P, R>(path: P, header: &[&str], rows: R) -> Result<(), csv::Error>
where
    P: AsRef<Path>,
    R: IntoIterator<Item = Vec<Cell>>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(Cell::to_string))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a table written by [`write_table`]. Every cell must parse as `f64`.
pub fn read_table(path: impl AsRef<Path>) -> Result<Table, csv::Error> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (k, record) in r.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|v| {
                v.parse::<f64>().map_err(|e| {
                    csv::Error::from(std::io::Error::new(
                        std::io::ErrorKind::InvalidData,
                        format!("row {}: {v:?}: {e}", k + 1),
                    ))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_use_seventeen_digits() {
        assert_eq!(Cell::Real(0.1).to_string(), "1.0000000000000001e-1");
        assert_eq!(Cell::Real(-2.5).to_string(), "-2.5000000000000000e0");
        assert_eq!(Cell::Int(7).to_string(), "7");
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let rows = vec![vec![Cell::Int(0), Cell::Real(1.0 / 3.0)], vec![Cell::Int(1), Cell::Real(f64::NAN)]];
        write_table(&path, &["iter", "error"], rows).unwrap();
        let t = read_table(&path).unwrap();
        assert_eq!(t.header, ["iter", "error"]);
        assert_eq!(t.rows[0], [0.0, 1.0 / 3.0]);
        assert!(t.rows[1][1].is_nan());
        assert_eq!(t.column("iter").unwrap(), [0.0, 1.0]);
        assert!(t.column("nope").is_none());
    }
}
