use std::path::Path;
use std::time::Instant;

use palmfact_core::hierarchy::{hadamard_config, hadamard_schedule};
use palmfact_core::matcore::frobenius_norm;
use palmfact_core::transforms::hadamard;
use palmfact_core::{
    hierarchical_factorize, palm4led, ConstraintSet, MultiLayerOperator, PalmState,
};
use serde::{Deserialize, Serialize};

use super::{to_value, REPORT_FILE};
use crate::error::{CliError, Result, EXIT_OK};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::opdir::write_operator;
use crate::output::Staging;

pub const DEMO_FILE: &str = "demo.json";
pub const MAX_DEMO_N: usize = 1024;
/// Relative error at or below which the factorization counts as exact.
pub const EXACT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoSummary {
    pub format_version: u32,
    pub n: usize,
    pub q: usize,
    pub exact: bool,
    pub relative_error: f64,
    pub rmse: f64,
    pub rc: f64,
    pub factor_nnz: Vec<usize>,
    pub split_traces: Vec<Vec<f64>>,
    pub wall_ms: f64,
}

pub fn hadamard_demo(n: usize, out: &Path) -> Result<i32> {
    if !(2..=MAX_DEMO_N).contains(&n) || !n.is_power_of_two() {
        return Err(CliError::Config(format!(
            "--n must be a power of two between 2 and {MAX_DEMO_N}, got {n}"
        )));
    }
    let mut staging = Staging::new(out)?;
    let h = hadamard(n)?;
    let started = Instant::now();
    let (op, traces, report) = if n == 2 {
        // a single butterfly factor: nothing to split
        let set = ConstraintSet::splincol(2, 2, 2)?;
        let init = PalmState::new(vec![set.project(&h)?], 1.0);
        let state = palm4led(&h, &[set], init, &hadamard_config())?;
        let trace = state.objective_trace.clone();
        (
            MultiLayerOperator::new(state.scale, state.factors)?,
            vec![trace],
            None,
        )
    } else {
        let report = hierarchical_factorize(&h, &hadamard_schedule(n)?, &hadamard_config())?;
        (
            report.operator.clone(),
            report.split_traces.clone(),
            Some(report),
        )
    };
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    let approx = op.to_dense();
    let relative_error = frobenius_norm(&h.sub(&approx)?) / frobenius_norm(&h);
    let q = op.factors().len();
    let summary = DemoSummary {
        format_version: 1,
        n,
        q,
        exact: relative_error <= EXACT_TOL,
        relative_error,
        rmse: palmfact_core::matcore::rmse(&h, &approx)?,
        rc: op.relative_complexity(q)?,
        factor_nnz: op.factors().iter().map(|f| f.nnz()).collect(),
        split_traces: traces,
        wall_ms,
    };

    write_operator(&mut staging, &op)?;
    if let Some(r) = &report {
        staging.write_json(REPORT_FILE, r)?;
    }
    staging.write_json(DEMO_FILE, &summary)?;
    let argv = vec![
        "hadamard-demo".into(),
        "--n".into(),
        n.to_string(),
        "--out".into(),
        out.to_string_lossy().into_owned(),
    ];
    let config = serde_json::json!({ "n": n, "palm": to_value(&hadamard_config()) });
    let mut manifest = RunManifest::new("hadamard-demo", argv, Vec::new(), config);
    manifest.outputs = staging.outputs().to_vec();
    manifest.outputs.push(MANIFEST_FILE.into());
    staging.write_json(MANIFEST_FILE, &manifest)?;
    staging.commit()?;
    println!(
        "{}",
        serde_json::json!({ "n": n, "exact": summary.exact, "relative_error": relative_error, "rc": summary.rc, "wall_ms": wall_ms })
    );
    Ok(EXIT_OK)
}
