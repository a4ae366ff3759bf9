//! CSV ingestion.

use std::path::Path;

use gammareg::{Dataset, Matrix};

use crate::error::{CliError, IngestError};

/// Name given to the leading all-ones column.
pub const INTERCEPT: &str = "intercept";

/// A loaded design: `x` carries the optional intercept column first.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub x: Matrix,
    pub y: Vec<f64>,
    /// Coefficient names in column order.
    pub names: Vec<String>,
    pub intercept: bool,
}

impl Table {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn dataset(&self, zeta: f64) -> Result<Dataset, CliError> {
        Dataset::new(self.x.clone(), self.y.clone(), zeta).map_err(|e| CliError::compute("building dataset", e))
    }

    /// Covariate columns only (no intercept), with their names.
    pub fn covariates(&self) -> (Matrix, Vec<String>) {
        let skip = usize::from(self.intercept);
        let p = self.p() - skip;
        let mut data = Vec::with_capacity(self.n() * p);
        for i in 0..self.n() {
            data.extend_from_slice(&self.x.row(i)[skip..]);
        }
        (Matrix::from_row_major(self.n(), p, data).expect("shape"), self.names[skip..].to_vec())
    }

    /// Centres and scales every covariate column to unit sample SD.
    pub fn standardized(&self) -> Result<Table, CliError> {
        let skip = usize::from(self.intercept);
        let n = self.n();
        let mut x = self.x.clone();
        for j in skip..self.p() {
            let col = x.column(j);
            let mean = col.iter().sum::<f64>() / n as f64;
            let sd = (col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0)).sqrt();
            if !(sd > 0.0) {
                return Err(CliError::compute(
                    "standardizing covariates",
                    gammareg::Error::Degenerate(format!("column `{}` is constant", self.names[j])),
                ));
            }
            for i in 0..n {
                x[(i, j)] = (x[(i, j)] - mean) / sd;
            }
        }
        Ok(Table { x, ..self.clone() })
    }
}

/// Reads `path`, taking `response` as y and `covariates` (all other columns
/// when `None`) as X, with a leading intercept column if requested.
pub fn load_csv(path: &Path, response: &str, covariates: Option<&[String]>, intercept: bool) -> Result<Table, CliError> {
    if !path.exists() {
        return Err(IngestError::MissingFile(path.to_path_buf()).into());
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| IngestError::Malformed(e.to_string()))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| IngestError::Malformed(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_owned()))
    };
    let y_col = find(response)?;
    let cov_names: Vec<String> = match covariates {
        Some(c) => c.to_vec(),
        None => header.iter().filter(|h| *h != response).cloned().collect(),
    };
    let cov_cols = cov_names.iter().map(|c| find(c)).collect::<Result<Vec<_>, _>>()?;

    let parse = |rec: &csv::StringRecord, row: usize, col: usize| -> Result<f64, IngestError> {
        let raw = rec.get(col).unwrap_or("");
        raw.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| IngestError::NonNumeric {
                row,
                column: header[col].clone(),
                value: raw.to_owned(),
            })
    };
    let mut y = Vec::new();
    let mut data = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| IngestError::Malformed(e.to_string()))?;
        let v = parse(&rec, row, y_col)?;
        if !(v > 0.0) {
            return Err(IngestError::NonPositiveResponse { row, value: v }.into());
        }
        y.push(v);
        if intercept {
            data.push(1.0);
        }
        for &c in &cov_cols {
            data.push(parse(&rec, row, c)?);
        }
    }
    if y.is_empty() {
        return Err(IngestError::Empty.into());
    }
    let mut names = Vec::with_capacity(cov_names.len() + 1);
    if intercept {
        names.push(INTERCEPT.to_owned());
    }
    names.extend(cov_names);
    let x = Matrix::from_row_major(y.len(), names.len(), data).map_err(|e| IngestError::Malformed(e.to_string()))?;
    Ok(Table { x, y, names, intercept })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn toy_round_trip() {
        let f = write("a,b,y\n0.1,-2.5,3.25\n1e-3,7,0.5\n");
        let t = load_csv(f.path(), "y", None, true).unwrap();
        assert_eq!(t.names, ["intercept", "a", "b"]);
        assert_eq!(t.x.as_slice(), &[1.0, 0.1, -2.5, 1.0, 1e-3, 7.0]);
        assert_eq!(t.y, [3.25, 0.5]);
    }

    #[test]
    fn column_selection_and_order() {
        let f = write("a,b,y\n1,2,3\n4,5,6\n");
        let t = load_csv(f.path(), "y", Some(&["b".into(), "a".into()]), false).unwrap();
        assert_eq!(t.names, ["b", "a"]);
        assert_eq!(t.x.row(1), &[5.0, 4.0]);
    }

    #[test]
    fn typed_errors() {
        let f = write("a,y\n1,2\n2,0\n");
        match load_csv(f.path(), "y", None, true) {
            Err(CliError::Ingest(IngestError::NonPositiveResponse { row: 2, .. })) => {}
            other => panic!("{other:?}"),
        }
        let f = write("a,y\n1,2\nx,3\n");
        match load_csv(f.path(), "y", None, true) {
            Err(CliError::Ingest(IngestError::NonNumeric { row: 2, column, .. })) => assert_eq!(column, "a"),
            other => panic!("{other:?}"),
        }
        let f = write("a,y\n1,2\n");
        assert!(matches!(
            load_csv(f.path(), "z", None, true),
            Err(CliError::Ingest(IngestError::MissingColumn(_)))
        ));
        assert!(matches!(
            load_csv(Path::new("/nonexistent/file.csv"), "y", None, true),
            Err(CliError::Ingest(IngestError::MissingFile(_)))
        ));
    }

    #[test]
    fn standardizing_leaves_the_intercept() {
        let f = write("a,y\n1,2\n2,3\n3,4\n");
        let t = load_csv(f.path(), "y", None, true).unwrap().standardized().unwrap();
        assert_eq!(t.x.column(0), [1.0; 3]);
        assert_eq!(t.x.column(1), [-1.0, 0.0, 1.0]);
    }
}
