mod apply;
mod experiment;
mod factorize;
mod hadamard;

use std::path::Path;

use clap::Parser;

pub use apply::apply;
pub use experiment::{experiment, PLOT_DATA_FILE, RESULTS_FILE};
pub use factorize::{factorize, ScheduleFile, SCHEDULE_FORMAT_VERSION};
pub use hadamard::{hadamard_demo, DemoSummary, DEMO_FILE};

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::{run, Cli};

pub const REPORT_FILE: &str = "report.json";

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("serializable value")
}

/// Replays `manifest.argv` with the output directory swapped for `out`.
pub fn rerun(manifest: &Path, out: &Path) -> Result<i32> {
    let m = RunManifest::read(manifest)?;
    let mut argv = vec!["palmfact".to_string()];
    let mut args = m.argv.iter();
    while let Some(a) = args.next() {
        argv.push(a.clone());
        if a == "--out" {
            args.next();
            argv.push(out.to_string_lossy().into_owned());
        }
    }
    let cli = Cli::try_parse_from(&argv)
        .map_err(|e| CliError::Config(format!("manifest arguments do not parse: {e}")))?;
    if matches!(cli.command, crate::Command::Rerun { .. }) {
        return Err(CliError::Config("manifest records a rerun".into()));
    }
    run(cli)
}
