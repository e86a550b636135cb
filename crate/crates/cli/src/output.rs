//! Output directories are assembled in a hidden sibling directory and moved
//! into place only when the command succeeds.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

pub struct Staging {
    dir: PathBuf,
    target: PathBuf,
    files: Vec<String>,
    committed: bool,
}

fn write_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    }
}

impl Staging {
    /// Fails if `target` exists and is anything but an empty directory.
    pub fn new(target: &Path) -> Result<Self> {
        if target.exists() {
            let empty = target.is_dir()
                && fs::read_dir(target)
                    .map_err(write_err(target))?
                    .next()
                    .is_none();
            if !empty {
                return Err(CliError::Config(format!(
                    "output directory {} exists and is not empty",
                    target.display()
                )));
            }
        }
        let name = target
            .file_name()
            .ok_or_else(|| {
                CliError::Config(format!("invalid output directory {}", target.display()))
            })?
            .to_string_lossy()
            .into_owned();
        let parent = match target.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(write_err(&parent))?;
        let dir = parent.join(format!(".{name}.partial-{}", std::process::id()));
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(write_err(&dir))?;
        }
        fs::create_dir_all(&dir).map_err(write_err(&dir))?;
        Ok(Self {
            dir,
            target: target.to_path_buf(),
            files: Vec::new(),
            committed: false,
        })
    }

    /// Path of `rel` inside the staging directory, recorded as an output.
    pub fn file(&mut self, rel: &str) -> Result<PathBuf> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(write_err(parent))?;
        }
        self.files.push(rel.to_string());
        Ok(path)
    }

    pub fn write(&mut self, rel: &str, contents: impl AsRef<[u8]>) -> Result<()> {
        let path = self.file(rel)?;
        fs::write(&path, contents).map_err(write_err(&path))
    }

    pub fn write_json<T: serde::Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable value");
        text.push('\n');
        self.write(rel, text)
    }

    pub fn outputs(&self) -> &[String] {
        &self.files
    }

    pub fn commit(mut self) -> Result<PathBuf> {
        if self.target.exists() {
            fs::remove_dir(&self.target).map_err(write_err(&self.target))?;
        }
        fs::rename(&self.dir, &self.target).map_err(write_err(&self.target))?;
        self.committed = true;
        Ok(self.target.clone())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.committed {
            let _ = fs::remove_dir_all(&self.dir);
        }
    }
}
