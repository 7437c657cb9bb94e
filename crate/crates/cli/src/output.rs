use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::Failure;

#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub version: &'static str,
    pub config: &'a RunConfig,
    #[serde(flatten)]
    pub body: T,
}

pub fn report<T: Serialize>(config: &RunConfig, body: T) -> Report<'_, T> {
    Report { version: env!("CARGO_PKG_VERSION"), config, body }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf, Failure> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_failure(&path, e))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| io_failure(&path, e))?;
    Ok(path)
}

pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, Failure> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_failure(&path, e))?;
    w.write_record(header).map_err(|e| io_failure(&path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| io_failure(&path, e))?;
    }
    w.flush().map_err(|e| io_failure(&path, e))?;
    Ok(path)
}

pub fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `1/64` becomes `1_64`, for file names.
pub fn file_tag(r: &treedyn_core::Rational) -> String {
    treedyn_core::rational::format(r).replace('/', "_")
}
