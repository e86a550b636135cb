use std::io::Write as _;
use std::path::Path;

use palmfact_core::matcore::io;
use palmfact_core::DenseMatrix;

use crate::error::{CliError, Result, EXIT_OK};
use crate::opdir::read_operator;

/// Reads a vector stored as a single-column or single-row matrix file.
fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = io::read_matrix(path)
        .map_err(|source| CliError::Input {
            path: path.to_path_buf(),
            source,
        })?
        .into_dense();
    if m.cols() != 1 && m.rows() != 1 {
        return Err(CliError::Config(format!(
            "{}: expected a vector, got a {}x{} matrix",
            path.display(),
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.into_data())
}

pub fn apply(op_dir: &Path, vec: &Path, out: Option<&Path>) -> Result<i32> {
    let op = read_operator(op_dir)?;
    let v = read_vector(vec)?;
    if v.len() != op.cols() {
        return Err(CliError::Config(format!(
            "vector has length {}, operator expects {}",
            v.len(),
            op.cols()
        )));
    }
    let y = op.apply(&v)?;
    let text = io::write_dense(&DenseMatrix::new(y.len(), 1, y)?);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.to_path_buf(),
            source,
        })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    Ok(EXIT_OK)
}
