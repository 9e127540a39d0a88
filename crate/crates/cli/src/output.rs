//! Report emission: JSON to stdout or `--out`, diagnostics to stderr.

use std::path::{Path, PathBuf};

use serde::Serialize;

#[derive(Serialize)]
struct ErrorEnvelope<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

/// Emit a machine-readable report. Failures to write are diagnostics, not
/// reports, so they land on stderr with a runtime exit code.
pub fn emit<T: Serialize>(out: Option<&PathBuf>, report: &T) -> Result<(), String> {
    let json = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    match out {
        None => {
            println!("{json}");
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, json.as_bytes()).map_err(|e| format!("{}: {e}", path.display()))
        }
    }
}

/// Machine-readable error envelope on stdout plus a human line on stderr.
pub fn fail(kind: &str, message: impl std::fmt::Display, code: i32) -> i32 {
    let message = message.to_string();
    eprintln!("pixelproof: {message}");
    let envelope = ErrorEnvelope {
        error: ErrorBody { kind, message },
    };
    if let Ok(json) = serde_json::to_string_pretty(&envelope) {
        println!("{json}");
    }
    code
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, String> {
    std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn read_text(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}
