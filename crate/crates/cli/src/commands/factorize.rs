use std::path::Path;

use palmfact_core::matcore::io;
use palmfact_core::{hierarchical_factorize, PalmConfig, Side, SplitSchedule, SplitSets};
use serde::{Deserialize, Serialize};

use super::{read_json, to_value, REPORT_FILE};
use crate::error::{CliError, Result, EXIT_OK};
use crate::manifest::{absolute, RunManifest, MANIFEST_FILE};
use crate::opdir::write_operator;
use crate::output::Staging;

pub const SCHEDULE_FORMAT_VERSION: u32 = 1;

/// Schedule file: the split sets plus optional solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub format_version: u32,
    pub side: Side,
    pub splits: Vec<SplitSets>,
    #[serde(default)]
    pub palm: PalmConfig,
}

impl ScheduleFile {
    pub fn new(schedule: &SplitSchedule, palm: PalmConfig) -> Self {
        Self {
            format_version: SCHEDULE_FORMAT_VERSION,
            side: schedule.side,
            splits: schedule.splits.clone(),
            palm,
        }
    }

    fn into_parts(self) -> Result<(SplitSchedule, PalmConfig)> {
        if self.format_version != SCHEDULE_FORMAT_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schedule format_version {}",
                self.format_version
            )));
        }
        self.palm.validate()?;
        Ok((SplitSchedule::new(self.side, self.splits)?, self.palm))
    }
}

pub fn factorize(input: &Path, schedule: &Path, out: &Path) -> Result<i32> {
    let x = io::read_matrix(input)
        .map_err(|source| CliError::Input {
            path: input.to_path_buf(),
            source,
        })?
        .into_dense();
    let file: ScheduleFile = read_json(schedule)?;
    let echo = to_value(&file);
    let (sched, palm) = file.into_parts()?;
    let mut staging = Staging::new(out)?;
    let report = hierarchical_factorize(&x, &sched, &palm)?;

    write_operator(&mut staging, &report.operator)?;
    staging.write_json(REPORT_FILE, &report)?;
    let argv = vec![
        "factorize".into(),
        "--input".into(),
        absolute(input),
        "--schedule".into(),
        absolute(schedule),
        "--out".into(),
        out.to_string_lossy().into_owned(),
    ];
    let mut manifest = RunManifest::new(
        "factorize",
        argv,
        vec![absolute(input), absolute(schedule)],
        echo,
    );
    manifest.outputs = staging.outputs().to_vec();
    manifest.outputs.push(MANIFEST_FILE.into());
    staging.write_json(MANIFEST_FILE, &manifest)?;
    staging.commit()?;
    println!(
        "{}",
        serde_json::json!({ "rmse": report.rmse, "rc": report.rc })
    );
    Ok(EXIT_OK)
}
