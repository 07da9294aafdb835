use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const MANIFEST_FILE: &str = "manifest.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryStatus {
    Ok,
    Failed,
}

/// One line of `manifest.jsonl`: a single (image, exposure) output pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Source image relative to the input root, `/`-separated.
    pub src: String,
    pub alpha: f32,
    pub seed: u64,
    pub threshold_c: f32,
    pub dt: f32,
    pub count_cap: u16,
    pub flow_mode: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theta: Option<f64>,
    pub out_exposed: Option<String>,
    pub out_event: Option<String>,
    /// Truncated SHA-256 of the EVTF bytes, 16 hex digits.
    pub checksum: Option<String>,
    pub events_on: u64,
    pub events_off: u64,
    pub status: EntryStatus,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for e in entries {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for line in BufReader::new(File::open(path)?).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            entries.push(serde_json::from_str(&line)?);
        }
    }
    Ok(entries)
}
