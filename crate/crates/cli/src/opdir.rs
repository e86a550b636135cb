//! Operator directories: `operator.json` holds the scale and the factor file
//! names, each factor is a sparse matrix text file.
//!
//! ```text
//! operator.json
//! factors/factor_00.txt
//! factors/factor_01.txt
//! ...
//! ```

use std::path::Path;

use palmfact_core::matcore::io;
use palmfact_core::MultiLayerOperator;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::output::Staging;

pub const OPERATOR_FORMAT_VERSION: u32 = 1;
pub const OPERATOR_FILE: &str = "operator.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorIndex {
    pub format_version: u32,
    pub scale: f64,
    pub dims: Vec<usize>,
    pub factors: Vec<String>,
}

pub fn write_operator(out: &mut Staging, op: &MultiLayerOperator) -> Result<()> {
    let mut names = Vec::new();
    for (j, f) in op.factors().iter().enumerate() {
        let name = format!("factors/factor_{j:02}.txt");
        out.write(&name, io::write_sparse(f))?;
        names.push(name);
    }
    let index = OperatorIndex {
        format_version: OPERATOR_FORMAT_VERSION,
        scale: op.scale(),
        dims: op.dim_chain().dims().to_vec(),
        factors: names,
    };
    out.write_json(OPERATOR_FILE, &index)
}

pub fn read_operator(dir: &Path) -> Result<MultiLayerOperator> {
    let path = dir.join(OPERATOR_FILE);
    let text = std::fs::read_to_string(&path).map_err(|source| CliError::Read {
        path: path.clone(),
        source,
    })?;
    let index: OperatorIndex = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.clone(),
        source,
    })?;
    if index.format_version != OPERATOR_FORMAT_VERSION {
        return Err(CliError::Config(format!(
            "{}: unsupported format_version {}",
            path.display(),
            index.format_version
        )));
    }
    let mut factors = Vec::with_capacity(index.factors.len());
    for name in &index.factors {
        let fpath = dir.join(name);
        let m = io::read_matrix(&fpath).map_err(|source| CliError::Input {
            path: fpath.clone(),
            source,
        })?;
        factors.push(m.into_sparse());
    }
    let op = MultiLayerOperator::new(index.scale, factors).map_err(|source| CliError::Input {
        path: path.clone(),
        source,
    })?;
    if op.dim_chain().dims() != index.dims.as_slice() {
        return Err(CliError::Config(format!(
            "{}: factor shapes {:?} disagree with recorded dims {:?}",
            path.display(),
            op.dim_chain().dims(),
            index.dims
        )));
    }
    Ok(op)
}
