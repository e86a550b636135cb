use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc;

use palmfact_core::dictlearn::{run_trial, summarize, CellSummary, ExperimentConfig, TrialRecord};
use rayon::prelude::*;

use super::{read_json, to_value};
use crate::error::{CliError, Result, EXIT_NUMERICAL, EXIT_OK};
use crate::manifest::{absolute, RunManifest, MANIFEST_FILE};
use crate::output::Staging;

pub const RESULTS_FILE: &str = "results.jsonl";
pub const PLOT_DATA_FILE: &str = "plot_data.csv";
pub const CONFIG_ECHO_FILE: &str = "config.json";

type Job = (usize, palmfact_core::dictlearn::Cell, u64);

/// `None` marks a job skipped after another one hit a configuration error.
type Message = (usize, Option<Result<TrialRecord>>);

/// Writes records in job order as they arrive, buffering any that finish
/// early.
fn write_ordered(path: &Path, rx: mpsc::Receiver<Message>) -> Result<Vec<TrialRecord>> {
    let werr = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(werr)?);
    let mut pending = BTreeMap::new();
    let mut next = 0;
    let mut records = Vec::new();
    let mut first_err = None;
    for (idx, rec) in rx {
        pending.insert(idx, rec);
        while let Some(rec) = pending.remove(&next) {
            next += 1;
            match rec {
                Some(Ok(r)) if first_err.is_none() => {
                    let line = serde_json::to_string(&r).expect("serializable record");
                    writeln!(out, "{line}").map_err(werr)?;
                    records.push(r);
                }
                Some(Err(e)) => {
                    first_err.get_or_insert(e);
                }
                _ => {}
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    out.flush().map_err(werr)?;
    Ok(records)
}

fn plot_csv(summaries: &[CellSummary]) -> String {
    let mut s = String::from(
        "Q,p,P,rc_bound,mean_rc,mean_rmse,mean_baseline_rmse,ok_trials,failed_trials\n",
    );
    for c in summaries {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.cell.q,
            c.cell.p,
            c.cell.big_p,
            c.rc_bound,
            c.mean_rc,
            c.mean_rmse,
            c.mean_baseline_rmse,
            c.ok_trials,
            c.failed_trials
        ));
    }
    s
}

pub fn experiment(config_path: &Path, trials: u64, seed: u64, out: &Path) -> Result<i32> {
    let config: ExperimentConfig = read_json(config_path)?;
    config.validate()?;
    if trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let mut staging = Staging::new(out)?;
    let jobs: Vec<Job> = config
        .grid
        .cells()
        .into_iter()
        .flat_map(|cell| (0..trials).map(move |t| (cell, t)))
        .enumerate()
        .map(|(i, (cell, t))| (i, cell, t))
        .collect();

    let results_path: PathBuf = staging.file(RESULTS_FILE)?;
    let (tx, rx) = mpsc::channel();
    let abort = AtomicBool::new(false);
    let records = std::thread::scope(|s| {
        let writer = s.spawn(|| write_ordered(&results_path, rx));
        jobs.par_iter()
            .for_each_with(tx, |tx, &(idx, cell, trial)| {
                let rec = (!abort.load(Ordering::Relaxed))
                    .then(|| run_trial(&config, cell, seed, trial).map_err(CliError::from));
                if matches!(rec, Some(Err(_))) {
                    abort.store(true, Ordering::Relaxed);
                }
                let _ = tx.send((idx, rec));
            });
        writer.join().expect("writer thread")
    })?;

    let failed = records.iter().filter(|r| r.is_numerical_failure()).count();
    staging.write(PLOT_DATA_FILE, plot_csv(&summarize(&records)))?;
    staging.write_json(CONFIG_ECHO_FILE, &config)?;
    let argv = vec![
        "experiment".into(),
        "--config".into(),
        absolute(config_path),
        "--trials".into(),
        trials.to_string(),
        "--seed".into(),
        seed.to_string(),
        "--out".into(),
        out.to_string_lossy().into_owned(),
    ];
    let mut manifest = RunManifest::new(
        "experiment",
        argv,
        vec![absolute(config_path)],
        to_value(&config),
    );
    manifest.seed = Some(seed);
    manifest.outputs = staging.outputs().to_vec();
    manifest.outputs.push(MANIFEST_FILE.into());
    staging.write_json(MANIFEST_FILE, &manifest)?;
    staging.commit()?;
    if failed > 0 {
        eprintln!("palmfact: {failed} of {} trials failed", records.len());
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}
