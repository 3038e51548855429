//! Report emission. JSON carries full-precision numbers with the
//! manifest embedded; CSV prints percentages at three decimals (matching
//! the published tables) and writes the manifest as a sidecar when the
//! report goes to a file. Outputs are byte-deterministic for identical
//! inputs and flags.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};
use crate::manifest::RunManifest;

/// Environment variable naming the default output directory for
/// relative `--out` paths.
pub const OUT_DIR_ENV: &str = "SYNDSE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Where and how a command writes its report.
#[derive(Debug, Clone)]
pub struct Output {
    pub format: OutputFormat,
    pub path: Option<PathBuf>,
}

impl Output {
    /// Resolve a relative `--out` against `SYNDSE_OUT_DIR` when set.
    pub fn resolve(format: OutputFormat, path: Option<PathBuf>) -> Self {
        let path = path.map(|p| {
            if p.is_relative() {
                match std::env::var_os(OUT_DIR_ENV) {
                    Some(dir) => Path::new(&dir).join(p),
                    None => p,
                }
            } else {
                p
            }
        });
        Self { format, path }
    }
}

/// Full-precision number formatting (shortest round-trip form).
pub fn fmt_full(v: f64) -> String {
    format!("{v}")
}

/// Three-decimal percentage formatting.
pub fn fmt_pct(v: f64) -> String {
    format!("{v:.3}")
}

/// Text form of a p-value; values below 1e-300 (including underflow to
/// zero) print as an inequality, exact values stay in numeric output.
pub fn fmt_p(p: f64) -> String {
    if p < 1e-300 {
        "<1e-300".to_string()
    } else {
        format!("{p:.6e}")
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn manifest_sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

/// Emit one report in the requested format.
///
/// CSV reports write `csv_text` verbatim (sidecar manifest only when
/// writing to a file); JSON reports wrap the data as
/// `{"manifest": ..., "data": ...}`.
pub fn emit<T: Serialize>(
    output: &Output,
    manifest: &RunManifest,
    csv_text: &str,
    data: &T,
) -> Result<()> {
    match output.format {
        OutputFormat::Csv => match &output.path {
            Some(path) => {
                write_text(path, csv_text)?;
                let manifest_json =
                    serde_json::to_string_pretty(manifest).expect("manifest serializes");
                write_text(&manifest_sidecar(path), &(manifest_json + "\n"))?;
            }
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(csv_text.as_bytes())
                    .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
            }
        },
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Wrapped<'a, T> {
                manifest: &'a RunManifest,
                data: &'a T,
            }
            let text = serde_json::to_string_pretty(&Wrapped { manifest, data })
                .expect("report serializes")
                + "\n";
            match &output.path {
                Some(path) => write_text(path, &text)?,
                None => {
                    let mut stdout = std::io::stdout().lock();
                    stdout
                        .write_all(text.as_bytes())
                        .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
                }
            }
        }
    }
    Ok(())
}

/// Minimal CSV field quoting: wrap fields holding the delimiter, quotes,
/// or newlines.
pub fn csv_field(value: &str) -> String {
    if value.contains([',', '"', '\n']) {
        format!("\"{}\"", value.replace('"', "\"\""))
    } else {
        value.to_string()
    }
}

/// Build one CSV line from already formatted fields.
pub fn csv_line(fields: &[String]) -> String {
    let quoted: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
    quoted.join(",") + "\n"
}
