use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::{CliError, CliResult, GlobalArgs};

pub fn require_out(g: &GlobalArgs) -> CliResult<PathBuf> {
    let dir = g.out.clone().ok_or_else(|| CliError::Invalid("this command needs --out <DIR>".into()))?;
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

pub fn out_dir(g: &GlobalArgs) -> CliResult<Option<PathBuf>> {
    g.out.as_ref().map(|_| require_out(g)).transpose()
}

pub fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

/// Prints the summary and, with `--out`, stores it as `name`.
pub fn report<T: Serialize>(g: &GlobalArgs, name: &str, value: &T) -> CliResult {
    let text = to_json(value)?;
    print!("{text}");
    if let Some(dir) = out_dir(g)? {
        fs::write(dir.join(name), text)?;
    }
    Ok(())
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> CliResult
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn num(x: f64) -> String {
    format!("{x}")
}
