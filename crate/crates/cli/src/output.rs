//! CSV writing and run metadata.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::CliError;

/// Fixed-format float with 17 significant digits, so values round-trip.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `<out>` with `suffix` appended to the file name, e.g. `run.csv.meta.toml`.
pub fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    out.with_file_name(name)
}

#[derive(Serialize)]
struct Metadata<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a C,
}

/// Writes `<out>.meta.toml` with the command, crate version, seed and the
/// effective configuration.
pub fn write_metadata<C: Serialize>(out: &Path, command: &str, seed: u64, config: &C) -> Result<(), CliError> {
    let meta = Metadata {
        command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config,
    };
    let text = toml::to_string(&meta).map_err(|e| CliError::Runtime(format!("cannot serialise metadata: {e}")))?;
    std::fs::write(sidecar_path(out, ".meta.toml"), text)?;
    Ok(())
}
