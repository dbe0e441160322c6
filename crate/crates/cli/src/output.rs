use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::SCHEMA_VERSION;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    command: &'a str,
    manifest: &'a RunManifest,
    result: &'a T,
}

/// Wraps a result with its manifest.
pub fn envelope<T: Serialize>(manifest: &RunManifest, result: &T) -> Value {
    serde_json::to_value(Envelope {
        schema_version: SCHEMA_VERSION,
        command: &manifest.command,
        manifest,
        result,
    })
    .expect("results serialize")
}

/// Text view generated from the JSON: one `path = value` line per leaf.
pub fn to_text(v: &Value) -> String {
    let mut out = String::new();
    flatten(v, String::new(), &mut out);
    out
}

fn flatten(v: &Value, prefix: String, out: &mut String) {
    let join = |k: &str| if prefix.is_empty() { k.to_owned() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                flatten(x, join(k), out);
            }
        }
        Value::Array(a) if !a.is_empty() && a.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in a.iter().enumerate() {
                flatten(x, format!("{prefix}[{i}]"), out);
            }
        }
        Value::String(s) => out.push_str(&format!("{prefix} = {s}\n")),
        _ => out.push_str(&format!("{prefix} = {v}\n")),
    }
}

pub fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
            s.push('\n');
            s
        }
        Format::Text => to_text(v),
    }
}

/// Writes to `path`, or to stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("stdout", e))
        }
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path.display(), e))
}

/// Manifest sidecar for a non-JSON output file: `<path>.manifest.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_sidecar<T: Serialize>(path: &Path, manifest: &RunManifest, result: &T) -> Result<PathBuf, CliError> {
    let side = sidecar_path(path);
    write_file(&side, render(&envelope(manifest, result), Format::Json).as_bytes())?;
    Ok(side)
}
