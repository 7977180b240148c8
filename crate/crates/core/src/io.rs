//! Model files: a JSON document or a `lambda.csv` / `phi.csv` pair.
//!
//! JSON layout:
//!
//! ```json
//! { "lambda": [[0.5, 0.1], ...], "phi": [[1.0, 0.3], [0.3, 1.0]], "psi2": [0.7, ...] }
//! ```
//!
//! `psi2` is optional and defaults to `1 - diag(L Phi L')`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::FactorModel;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub lambda: Vec<Vec<f64>>,
    pub phi: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi2: Option<Vec<f64>>,
}

impl ModelFile {
    pub fn from_model(model: &FactorModel) -> Self {
        Self {
            lambda: rows(model.lambda()),
            phi: rows(model.phi()),
            psi2: Some(model.psi2().iter().copied().collect()),
        }
    }

    pub fn into_model(self) -> Result<FactorModel> {
        let lambda = matrix_from_rows("lambda", &self.lambda)?;
        let phi = matrix_from_rows("phi", &self.phi)?;
        match self.psi2 {
            Some(psi2) => FactorModel::new(lambda, phi, DVector::from_vec(psi2)),
            None => FactorModel::standardized(lambda, phi),
        }
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_from_rows(field: &str, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    if nrows == 0 {
        return Err(Error::Parse(format!("field `{field}` is empty")));
    }
    let ncols = rows[0].len();
    if ncols == 0 {
        return Err(Error::Parse(format!("field `{field}` has an empty first row")));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::Parse(format!("field `{field}` row {i} has {} entries, expected {ncols}", r.len())));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

pub fn parse_model_json(text: &str) -> Result<FactorModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse(format!("model JSON: {e}")))?;
    file.into_model()
}

fn read_csv_matrix(field: &str, path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("field `{field}` row {i} column {j}: `{cell}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    matrix_from_rows(field, &out)
}

/// Reads `lambda.csv` and `phi.csv` from `dir`. Unique variances are derived.
pub fn read_model_csv_pair(dir: &Path) -> Result<FactorModel> {
    let lambda = read_csv_matrix("lambda", &dir.join("lambda.csv"))?;
    let phi = read_csv_matrix("phi", &dir.join("phi.csv"))?;
    FactorModel::standardized(lambda, phi)
}

/// Loads a model from a `.json` file, a directory holding the CSV pair, or a
/// path to `lambda.csv` whose sibling is `phi.csv`.
pub fn read_model(path: &Path) -> Result<FactorModel> {
    if path.is_dir() {
        return read_model_csv_pair(path);
    }
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        return read_model_csv_pair(&dir);
    }
    let text = fs::read_to_string(path)?;
    parse_model_json(&text)
}

/// Writes `contents` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
