//! Repeated synthetic learning trials over a parameter grid.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::learn::{oracle_baseline_rmse, proposed_learn, LearnParams};
use super::synth::{synth_dictionary, synth_training_data, SynthSpec};
use crate::error::{Error, Result};
use crate::hierarchy::build_experiment_schedule_with;
use crate::palm::PalmConfig;
use crate::rng::trial_seed;

pub const EXPERIMENT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Grid {
    pub q: Vec<usize>,
    pub p: Vec<usize>,
    pub big_p_base: usize,
    pub big_p_multipliers: Vec<f64>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            q: vec![3, 4, 5, 6],
            p: vec![2, 3, 4],
            big_p_base: 512,
            big_p_multipliers: vec![1.0, 1.2, 1.4, 1.6],
        }
    }
}

/// One parameter combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    #[serde(rename = "Q")]
    pub q: usize,
    pub p: usize,
    #[serde(rename = "P")]
    pub big_p: usize,
}

impl Grid {
    /// Residual budgets, `base × multiplier` rounded to the nearest integer.
    pub fn big_p_values(&self) -> Vec<usize> {
        self.big_p_multipliers
            .iter()
            .map(|m| (self.big_p_base as f64 * m).round() as usize)
            .collect()
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &q in &self.q {
            for &p in &self.p {
                for big_p in self.big_p_values() {
                    out.push(Cell { q, p, big_p });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub format_version: u32,
    #[serde(default)]
    pub spec: SynthSpec,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub palm: PalmConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            format_version: EXPERIMENT_FORMAT_VERSION,
            spec: SynthSpec::default(),
            grid: Grid::default(),
            palm: PalmConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.format_version != EXPERIMENT_FORMAT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported experiment format_version {}",
                self.format_version
            )));
        }
        self.spec.validate()?;
        self.palm.validate()?;
        if self
            .grid
            .big_p_multipliers
            .iter()
            .any(|m| !m.is_finite() || *m <= 0.0)
        {
            return Err(Error::InvalidArgument(
                "P multipliers must be positive".into(),
            ));
        }
        let cells = self.grid.cells();
        if cells.is_empty() {
            return Err(Error::InvalidArgument("empty parameter grid".into()));
        }
        for c in cells {
            build_experiment_schedule_with(
                self.spec.d,
                self.spec.n,
                c.q,
                c.p,
                c.big_p,
                self.spec.atoms_per_sample,
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Failed,
}

/// One JSONL line of experiment output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    #[serde(flatten)]
    pub cell: Cell,
    pub rmse: Option<f64>,
    pub rc: Option<f64>,
    pub rc_bound: f64,
    pub baseline_rmse: Option<f64>,
    pub wall_ms: f64,
    pub status: TrialStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn is_numerical_failure(&self) -> bool {
        self.status == TrialStatus::Failed
    }
}

fn run_trial_inner(config: &ExperimentConfig, cell: Cell, seed: u64) -> Result<(f64, f64, f64)> {
    let spec = SynthSpec {
        seed,
        ..config.spec
    };
    let dict = synth_dictionary(&spec)?;
    let (x, _) = synth_training_data(&dict.dense, spec.n, spec.atoms_per_sample, seed)?;
    let baseline = oracle_baseline_rmse(&dict.dense, &x, spec.atoms_per_sample)?;
    let params = LearnParams {
        q: cell.q,
        p: cell.p,
        big_p: cell.big_p,
        coeff_sparsity: spec.atoms_per_sample,
    };
    let report = proposed_learn(&x, params, &config.palm, seed)?;
    Ok((report.rmse, report.rc, baseline))
}

/// Runs trial `trial` of `cell`. The data seed depends only on `base_seed`
/// and `trial`, so all cells of one trial see the same data.
pub fn run_trial(
    config: &ExperimentConfig,
    cell: Cell,
    base_seed: u64,
    trial: u64,
) -> Result<TrialRecord> {
    let seed = trial_seed(base_seed, trial);
    let spec = &config.spec;
    let rc_bound = build_experiment_schedule_with(
        spec.d,
        spec.n,
        cell.q,
        cell.p,
        cell.big_p,
        spec.atoms_per_sample,
    )?
    .rc_bound(cell.q - 1);
    let started = Instant::now();
    let outcome = run_trial_inner(config, cell, seed);
    let wall_ms = started.elapsed().as_secs_f64() * 1e3;
    Ok(match outcome {
        Ok((rmse, rc, baseline)) => TrialRecord {
            trial,
            seed,
            cell,
            rmse: Some(rmse),
            rc: Some(rc),
            rc_bound,
            baseline_rmse: Some(baseline),
            wall_ms,
            status: TrialStatus::Ok,
            error: None,
        },
        Err(Error::InvalidArgument(m)) | Err(Error::DimensionMismatch(m)) => {
            return Err(Error::InvalidArgument(m))
        }
        Err(e) => TrialRecord {
            trial,
            seed,
            cell,
            rmse: None,
            rc: None,
            rc_bound,
            baseline_rmse: None,
            wall_ms,
            status: TrialStatus::Failed,
            error: Some(e.to_string()),
        },
    })
}

/// Per-cell means over successful trials, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: Cell,
    pub rc_bound: f64,
    pub mean_rc: f64,
    pub mean_rmse: f64,
    pub mean_baseline_rmse: f64,
    pub ok_trials: usize,
    pub failed_trials: usize,
}

/// Summaries in the order cells first appear in `records`.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut order: Vec<Cell> = Vec::new();
    for r in records {
        if !order.contains(&r.cell) {
            order.push(r.cell);
        }
    }
    order
        .into_iter()
        .map(|cell| {
            let rs: Vec<&TrialRecord> = records.iter().filter(|r| r.cell == cell).collect();
            let ok: Vec<&&TrialRecord> =
                rs.iter().filter(|r| r.status == TrialStatus::Ok).collect();
            let mean = |f: &dyn Fn(&TrialRecord) -> Option<f64>| {
                if ok.is_empty() {
                    f64::NAN
                } else {
                    ok.iter().filter_map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            CellSummary {
                cell,
                rc_bound: rs[0].rc_bound,
                mean_rc: mean(&|r| r.rc),
                mean_rmse: mean(&|r| r.rmse),
                mean_baseline_rmse: mean(&|r| r.baseline_rmse),
                ok_trials: ok.len(),
                failed_trials: rs.len() - ok.len(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_p_grid() {
        assert_eq!(Grid::default().big_p_values(), vec![512, 614, 717, 819]);
        assert_eq!(Grid::default().cells().len(), 48);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = ExperimentConfig::default();
        let json = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
        let minimal: ExperimentConfig = serde_json::from_str(r#"{"format_version":1}"#).unwrap();
        assert_eq!(minimal, cfg);
        assert!(
            serde_json::from_str::<ExperimentConfig>(r#"{"format_version":2}"#)
                .unwrap()
                .validate()
                .is_err()
        );
    }

    #[test]
    fn record_field_names() {
        let r = TrialRecord {
            trial: 0,
            seed: 7,
            cell: Cell {
                q: 4,
                p: 2,
                big_p: 512,
            },
            rmse: Some(0.5),
            rc: Some(0.25),
            rc_bound: 0.25,
            baseline_rmse: Some(0.1),
            wall_ms: 1.0,
            status: TrialStatus::Ok,
            error: None,
        };
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["seed", "Q", "p", "P", "rmse", "rc", "wall_ms", "status"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["status"], "ok");
    }
}
