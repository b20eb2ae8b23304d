//! One-line error reports: `error kind=<kind> message="<text>"`.

use std::fmt;
use std::io;

/// Error raised by the front end itself rather than the simulator.
#[derive(Debug)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub fn fail(kind: &'static str, message: impl Into<String>) -> anyhow::Error {
    Failure {
        kind,
        message: message.into(),
    }
    .into()
}

fn io_kind(e: &io::Error) -> &'static str {
    if e.kind() == io::ErrorKind::NotFound {
        "missing-file"
    } else {
        "io"
    }
}

/// Stable identifier of the innermost recognised cause.
pub fn kind_of(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.kind;
        }
        if let Some(b) = cause.downcast_ref::<bbfm::Error>() {
            return match b {
                bbfm::Error::Io(io) => io_kind(io),
                other => other.kind(),
            };
        }
        if let Some(io) = cause.downcast_ref::<io::Error>() {
            return io_kind(io);
        }
        if cause.downcast_ref::<toml::de::Error>().is_some() {
            return "config";
        }
    }
    "error"
}

pub fn error_line(e: &anyhow::Error) -> String {
    let message = e
        .chain()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(": ");
    let escaped = message
        .replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', " ");
    format!("error kind={} message=\"{}\"", kind_of(e), escaped)
}
