//! Report envelope: a run manifest plus the analysis payload.
//!
//! The `analysis` section depends only on inputs, configuration and seeds, so
//! two runs with the same manifest (timestamp aside) produce byte-identical
//! analysis sections.

use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use time::format_description::well_known::Rfc3339;
use time::OffsetDateTime;

pub const SCHEMA_VERSION: &str = "1.0.0";
/// JSON Schema for every report written by the CLI.
pub const REPORT_SCHEMA: &str = include_str!("../schemas/report-v1.schema.json");
/// JSON Schema for the error object written to stderr.
pub const ERROR_SCHEMA: &str = include_str!("../schemas/error-v1.schema.json");

#[derive(Debug, Clone, Serialize)]
pub struct InputRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

impl InputRecord {
    pub fn new(path: &Path, contents: &[u8]) -> Self {
        Self { path: path.display().to_string(), bytes: contents.len() as u64, sha256: crate::io::sha256_hex(contents) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub inputs: Vec<InputRecord>,
    /// Every option that influenced the run, as parsed.
    pub config: Value,
    pub seeds: Value,
    pub timestamp: String,
}

impl Manifest {
    pub fn new(subcommand: &'static str, inputs: Vec<InputRecord>, config: Value, seeds: Value) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            inputs,
            config,
            seeds,
            timestamp: timestamp(),
        }
    }
}

/// Current UTC time, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|s| OffsetDateTime::from_unix_timestamp(s).ok())
        .unwrap_or_else(OffsetDateTime::now_utc);
    now.format(&Rfc3339).unwrap_or_else(|_| now.unix_timestamp().to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema_version: &'static str,
    pub manifest: Manifest,
    pub analysis: Value,
}

impl Report {
    pub fn new(manifest: Manifest, analysis: Value) -> Self {
        Self { schema_version: SCHEMA_VERSION, manifest, analysis }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are JSON-serializable");
        s.push('\n');
        s
    }
}

/// Serializes an analysis payload. Non-finite floats become `null`.
pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("analysis types serialize to JSON with string keys")
}
