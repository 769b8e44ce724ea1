//! Structured JSONL run log.
//!
//! The main log holds only deterministic content so that runs can be
//! diffed byte for byte. Wall-clock times go to a sidecar file keyed by
//! sequence number.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const LOG_FILE: &str = "run.jsonl";
pub const TIMING_FILE: &str = "timing.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    RunStart,
    Optimize,
    Evolve,
    Transfer,
    PairedGeneration,
    Checkpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunLogRecord {
    pub seq: u64,
    #[serde(rename = "loop")]
    pub loop_idx: u64,
    pub kind: EventKind,
    pub payload: serde_json::Value,
}

/// Payload of the first record of every log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStart {
    pub schema_version: u32,
    pub config_digest: String,
    pub algorithm: String,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub seq: u64,
    pub wall_time_s: f64,
    pub workers: usize,
}

struct Files {
    log: BufWriter<File>,
    timing: BufWriter<File>,
    log_path: PathBuf,
}

/// Append-only event sink. Records are kept in memory and, when backed by
/// a directory, written through to disk one flushed line at a time.
pub struct RunLog {
    next_seq: u64,
    workers: usize,
    records: Vec<RunLogRecord>,
    files: Option<Files>,
    started: Instant,
}

impl std::fmt::Debug for RunLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RunLog")
            .field("next_seq", &self.next_seq)
            .field("records", &self.records.len())
            .field("path", &self.files.as_ref().map(|f| &f.log_path))
            .finish()
    }
}

impl RunLog {
    pub fn in_memory() -> Self {
        RunLog {
            next_seq: 0,
            workers: 1,
            records: Vec::new(),
            files: None,
            started: Instant::now(),
        }
    }

    /// Fresh log in `dir`, replacing any existing one. `workers` is only
    /// written to the timing sidecar.
    pub fn create(dir: &Path, workers: usize) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let log_path = dir.join(LOG_FILE);
        let timing_path = dir.join(TIMING_FILE);
        let log = File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
        let timing = File::create(&timing_path).map_err(|e| Error::io(&timing_path, e))?;
        Ok(RunLog {
            next_seq: 0,
            workers,
            records: Vec::new(),
            files: Some(Files {
                log: BufWriter::new(log),
                timing: BufWriter::new(timing),
                log_path,
            }),
            started: Instant::now(),
        })
    }

    /// Reopens the log in `dir`, dropping every record from `next_seq` on
    /// (events written after the checkpoint being resumed).
    pub fn resume(dir: &Path, next_seq: u64, workers: usize) -> Result<Self> {
        let log_path = dir.join(LOG_FILE);
        let kept: Vec<RunLogRecord> = read_records(&log_path)?
            .into_iter()
            .filter(|r| r.seq < next_seq)
            .collect();
        if kept.len() as u64 != next_seq {
            return Err(Error::Integrity(format!(
                "{} has {} records before sequence {next_seq}",
                log_path.display(),
                kept.len()
            )));
        }
        let mut text = String::new();
        for r in &kept {
            text.push_str(&serde_json::to_string(r)?);
            text.push('\n');
        }
        fs::write(&log_path, text).map_err(|e| Error::io(&log_path, e))?;
        let open = |p: &Path| {
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(p)
                .map_err(|e| Error::io(p, e))
        };
        let log = open(&log_path)?;
        let timing = open(&dir.join(TIMING_FILE))?;
        Ok(RunLog {
            next_seq,
            workers,
            records: kept,
            files: Some(Files {
                log: BufWriter::new(log),
                timing: BufWriter::new(timing),
                log_path,
            }),
            started: Instant::now(),
        })
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn records(&self) -> &[RunLogRecord] {
        &self.records
    }

    pub fn path(&self) -> Option<&Path> {
        self.files.as_ref().map(|f| f.log_path.as_path())
    }

    pub fn record<P: Serialize>(&mut self, loop_idx: u64, kind: EventKind, payload: &P) -> Result<()> {
        let record = RunLogRecord {
            seq: self.next_seq,
            loop_idx,
            kind,
            payload: serde_json::to_value(payload)?,
        };
        if let Some(files) = &mut self.files {
            let io = |e| Error::io(&files.log_path, e);
            let line = serde_json::to_string(&record)?;
            writeln!(files.log, "{line}").map_err(io)?;
            files.log.flush().map_err(io)?;
            let timing = TimingRecord {
                seq: record.seq,
                wall_time_s: self.started.elapsed().as_secs_f64(),
                workers: self.workers,
            };
            writeln!(files.timing, "{}", serde_json::to_string(&timing)?).map_err(io)?;
            files.timing.flush().map_err(io)?;
        }
        self.records.push(record);
        self.next_seq += 1;
        Ok(())
    }
}

fn read_records(path: &Path) -> Result<Vec<RunLogRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: RunLogRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), n + 1)))?;
        out.push(r);
    }
    Ok(out)
}

/// Reads a log and checks its framing: a leading run_start record with a
/// known schema version, and strictly increasing sequence numbers.
pub fn read_log(path: &Path) -> Result<(RunStart, Vec<RunLogRecord>)> {
    let records = read_records(path)?;
    let first = records
        .first()
        .ok_or_else(|| Error::Schema(format!("{} is empty", path.display())))?;
    if first.kind != EventKind::RunStart {
        return Err(Error::Schema("log does not begin with run_start".into()));
    }
    let version = first.payload.get("schema_version").and_then(|v| v.as_u64());
    if version != Some(SCHEMA_VERSION as u64) {
        return Err(Error::Schema(format!(
            "unsupported log schema version {version:?} (expected {SCHEMA_VERSION})"
        )));
    }
    let start: RunStart = serde_json::from_value(first.payload.clone())?;
    if records.windows(2).any(|w| w[1].seq <= w[0].seq) {
        return Err(Error::Schema("sequence numbers are not strictly increasing".into()));
    }
    Ok((start, records))
}

/// Wall times keyed by sequence number; missing sidecars give an empty list.
pub fn read_timing(path: &Path) -> Result<Vec<TimingRecord>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn start() -> RunStart {
        RunStart {
            schema_version: SCHEMA_VERSION,
            config_digest: "abc".into(),
            algorithm: "poet".into(),
            seed: 1,
        }
    }

    #[test]
    fn written_log_reads_back() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = RunLog::create(dir.path(), 1).unwrap();
        log.record(0, EventKind::RunStart, &start()).unwrap();
        log.record(1, EventKind::Optimize, &json!({"pair_id": 0, "eval_return": 0.5})).unwrap();
        let (s, records) = read_log(&dir.path().join(LOG_FILE)).unwrap();
        assert_eq!(s, start());
        assert_eq!(records, log.records());
        assert_eq!(read_timing(&dir.path().join(TIMING_FILE)).unwrap().len(), 2);
    }

    #[test]
    fn resume_truncates_later_records() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = RunLog::create(dir.path(), 1).unwrap();
        log.record(0, EventKind::RunStart, &start()).unwrap();
        for l in 1..5 {
            log.record(l, EventKind::Optimize, &json!({ "l": l })).unwrap();
        }
        drop(log);
        let mut log = RunLog::resume(dir.path(), 3, 1).unwrap();
        log.record(3, EventKind::Optimize, &json!({ "l": 30 })).unwrap();
        let (_, records) = read_log(&dir.path().join(LOG_FILE)).unwrap();
        assert_eq!(records.len(), 4);
        assert_eq!(records[3].payload, json!({ "l": 30 }));
        assert!(RunLog::resume(dir.path(), 10, 1).is_err());
    }

    #[test]
    fn foreign_schema_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        let mut log = RunLog::create(dir.path(), 1).unwrap();
        log.record(0, EventKind::RunStart, &RunStart { schema_version: 99, ..start() }).unwrap();
        assert!(matches!(read_log(&dir.path().join(LOG_FILE)), Err(Error::Schema(_))));
        let mut log = RunLog::create(dir.path(), 1).unwrap();
        log.record(0, EventKind::Optimize, &json!({})).unwrap();
        assert!(matches!(read_log(&dir.path().join(LOG_FILE)), Err(Error::Schema(_))));
    }
}
