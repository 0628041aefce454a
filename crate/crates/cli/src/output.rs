use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use fria_core::canonical::to_canonical_bytes;
use fria_core::WorkflowError;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or unreadable input file. Exit code 2.
    Usage(String),
    /// The input was read but the engine refused it. Exit code 1.
    Failed { code: String, message: String, details: Vec<Value> },
}

impl CliError {
    pub fn failed(code: &str, message: impl Into<String>) -> Self {
        CliError::Failed {
            code: code.to_string(),
            message: message.into(),
            details: Vec::new(),
        }
    }
}

impl From<WorkflowError> for CliError {
    fn from(e: WorkflowError) -> Self {
        CliError::Failed {
            code: e.code().to_string(),
            message: e.to_string(),
            details: e.details(),
        }
    }
}

pub fn print_error(format: Format, e: &CliError) {
    let (code, message, details) = match e {
        CliError::Usage(m) => ("usage", m.as_str(), &[][..]),
        CliError::Failed { code, message, details } => (code.as_str(), message.as_str(), details.as_slice()),
    };
    match format {
        Format::Json => {
            let body = json!({ "code": code, "message": message, "details": details });
            eprintln!("{}", String::from_utf8_lossy(&to_canonical_bytes(&body).unwrap_or_default()));
        }
        Format::Text => {
            eprintln!("error[{code}]: {message}");
            for d in details {
                eprintln!("  - {}", describe(d));
            }
        }
    }
}

fn describe(d: &Value) -> String {
    match (d.get("path"), d.get("message")) {
        (Some(Value::String(p)), Some(Value::String(m))) => format!("{p}: {m}"),
        _ => d.to_string(),
    }
}

pub fn canonical<T: Serialize + ?Sized>(v: &T) -> Vec<u8> {
    to_canonical_bytes(v).expect("output values serialize")
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Prints the result: canonical JSON, or the text rendering.
pub fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce(&mut String)) {
    match format {
        Format::Json => println!("{}", String::from_utf8_lossy(&canonical(value))),
        Format::Text => {
            let mut s = String::new();
            text(&mut s);
            print!("{s}");
        }
    }
}

pub fn line(s: &mut String, args: std::fmt::Arguments<'_>) {
    let _ = s.write_fmt(args);
    s.push('\n');
}
