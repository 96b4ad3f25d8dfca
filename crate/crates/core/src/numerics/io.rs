use std::path::Path;

use nalgebra::DMatrix;

use super::gmm::BicRow;
use crate::{Error, Result};

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    csv::Writer::from_path(path).map_err(Error::from)
}

/// Write a matrix as CSV with a header row of column names.
pub fn write_matrix_csv(path: &Path, header: &[String], m: &DMatrix<f64>) -> Result<()> {
    if header.len() != m.ncols() {
        return Err(Error::invalid("header width does not match matrix"));
    }
    let mut w = writer(path)?;
    w.write_record(header)?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| format!("{v:.10}")))?;
    }
    w.flush().map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Read a numeric CSV with a header row.
pub fn read_matrix_csv(path: &Path) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut values = Vec::new();
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec?;
        for field in rec.iter() {
            values.push(field.trim().parse::<f64>().map_err(|e| {
                Error::invalid(format!("row {}: {field:?} is not a number: {e}", rows + 1))
            })?);
        }
        rows += 1;
    }
    Ok((header.clone(), DMatrix::from_row_slice(rows, header.len(), &values)))
}

/// BIC table as CSV: `k,model,bic,logL,n_params,converged,regularized`.
pub fn write_bic_table(path: &Path, rows: &[BicRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["k", "model", "bic", "logL", "n_params", "converged", "regularized"])?;
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "NA".into());
    for r in rows {
        w.write_record([
            r.k.to_string(),
            r.model.to_string(),
            fmt(r.bic),
            fmt(r.log_likelihood),
            r.n_params.to_string(),
            r.converged.to_string(),
            r.regularized.to_string(),
        ])?;
    }
    w.flush().map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}
