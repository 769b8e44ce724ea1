//! Summary statistics recomputed from run logs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::log::{read_log, read_timing, EventKind, RunLogRecord, RunStart, TimingRecord, TIMING_FILE};
use crate::error::{Error, Result};

/// One row per loop (or generation) of plot-ready data.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LoopRow {
    #[serde(rename = "loop")]
    pub loop_idx: u64,
    pub pairs: Option<usize>,
    pub mean_return: Option<f64>,
    pub max_return: Option<f64>,
    pub proposed: Option<usize>,
    pub accepted: Option<usize>,
    pub cumulative_acceptance: Option<f64>,
    pub regret: Option<f64>,
    pub antagonist_return: Option<f64>,
    pub protagonist_return: Option<f64>,
    pub level_valid: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    pub wall_seconds: f64,
    pub workers: usize,
    pub loops_per_hour: f64,
    /// Loops per hour of one core: wall time multiplied by the worker count.
    pub loops_per_core_hour: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSummary {
    pub start: RunStart,
    pub loops: u64,
    pub proposed: usize,
    pub accepted: usize,
    pub acceptance_rate: Option<f64>,
    pub rejected_by_reason: BTreeMap<String, usize>,
    pub transfers: usize,
    pub transfer_changes: usize,
    pub final_population: usize,
    /// Per pair returns of the last logged loop (regrets for paired runs).
    pub final_returns: Vec<f64>,
    pub rows: Vec<LoopRow>,
    pub throughput: Option<Throughput>,
}

fn field<'a>(r: &'a RunLogRecord, key: &str) -> Result<&'a serde_json::Value> {
    r.payload
        .get(key)
        .ok_or_else(|| Error::Format(format!("record {} ({:?}) lacks `{key}`", r.seq, r.kind)))
}

fn num(r: &RunLogRecord, key: &str) -> Result<f64> {
    field(r, key)?
        .as_f64()
        .ok_or_else(|| Error::Format(format!("record {}: `{key}` is not a number", r.seq)))
}

fn count(r: &RunLogRecord, key: &str) -> Result<usize> {
    field(r, key)?
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| Error::Format(format!("record {}: `{key}` is not a count", r.seq)))
}

/// Builds the summary from parsed records.
pub fn summarize(start: RunStart, records: &[RunLogRecord], timing: &[TimingRecord]) -> Result<LogSummary> {
    let mut rows: BTreeMap<u64, LoopRow> = BTreeMap::new();
    let mut returns: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut s = LogSummary {
        start,
        loops: 0,
        proposed: 0,
        accepted: 0,
        acceptance_rate: None,
        rejected_by_reason: BTreeMap::new(),
        transfers: 0,
        transfer_changes: 0,
        final_population: 0,
        final_returns: Vec::new(),
        rows: Vec::new(),
        throughput: None,
    };
    for r in records {
        let row = || LoopRow {
            loop_idx: r.loop_idx,
            ..LoopRow::default()
        };
        match r.kind {
            EventKind::RunStart | EventKind::Checkpoint => continue,
            EventKind::Optimize => {
                returns.entry(r.loop_idx).or_default().push(num(r, "eval_return")?);
                rows.entry(r.loop_idx).or_insert_with(row);
            }
            EventKind::Evolve => {
                let (p, a) = (count(r, "proposed")?, count(r, "accepted")?);
                s.proposed += p;
                s.accepted += a;
                let reasons = field(r, "rejected_by_reason")?
                    .as_object()
                    .ok_or_else(|| Error::Format(format!("record {}: bad rejected_by_reason", r.seq)))?;
                for (reason, n) in reasons {
                    let n = n.as_u64().ok_or_else(|| Error::Format(format!("record {}: bad count", r.seq)))?;
                    *s.rejected_by_reason.entry(reason.clone()).or_default() += n as usize;
                }
                let e = rows.entry(r.loop_idx).or_insert_with(row);
                e.proposed = Some(p);
                e.accepted = Some(a);
                e.cumulative_acceptance = Some(s.accepted as f64 / s.proposed.max(1) as f64);
            }
            EventKind::Transfer => {
                s.transfers += 1;
                s.transfer_changes += field(r, "changed")?.as_array().map_or(0, Vec::len);
            }
            EventKind::PairedGeneration => {
                let e = rows.entry(r.loop_idx).or_insert_with(row);
                e.regret = Some(num(r, "regret")?);
                e.antagonist_return = Some(num(r, "antagonist_return")?);
                e.protagonist_return = Some(num(r, "protagonist_return")?);
                e.level_valid = field(r, "level_valid")?.as_bool();
                returns.entry(r.loop_idx).or_default().push(num(r, "regret")?);
            }
        }
        s.loops = s.loops.max(r.loop_idx);
    }
    let paired = records.iter().any(|r| r.kind == EventKind::PairedGeneration);
    for (l, vals) in &returns {
        let e = rows.get_mut(l).expect("row exists for every loop with returns");
        if !paired {
            e.pairs = Some(vals.len());
            e.mean_return = Some(vals.iter().sum::<f64>() / vals.len() as f64);
            e.max_return = vals.iter().copied().reduce(f64::max);
        }
    }
    if let Some((_, vals)) = returns.last_key_value() {
        s.final_returns = vals.clone();
        s.final_population = if paired { 1 } else { vals.len() };
    }
    if s.proposed > 0 {
        s.acceptance_rate = Some(s.accepted as f64 / s.proposed as f64);
    }
    s.rows = rows.into_values().collect();
    s.throughput = throughput(timing, s.loops);
    Ok(s)
}

/// Wall time summed over resumed segments (the clock restarts on resume).
fn throughput(timing: &[TimingRecord], loops: u64) -> Option<Throughput> {
    let first = timing.first()?;
    let mut total = 0.0;
    let mut prev = 0.0;
    for t in timing {
        if t.wall_time_s < prev {
            total += prev;
        }
        prev = t.wall_time_s;
    }
    total += prev;
    if total <= 0.0 || loops == 0 {
        return None;
    }
    let hours = total / 3600.0;
    let workers = timing.iter().map(|t| t.workers).max().unwrap_or(first.workers).max(1);
    Some(Throughput {
        wall_seconds: total,
        workers,
        loops_per_hour: loops as f64 / hours,
        loops_per_core_hour: loops as f64 / (hours * workers as f64),
    })
}

/// Reads `path` (and its timing sidecar, when present) and summarizes it.
pub fn replay(path: &Path) -> Result<LogSummary> {
    let (start, records) = read_log(path)?;
    let timing = read_timing(&path.with_file_name(TIMING_FILE))?;
    summarize(start, &records, &timing)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

pub fn rows_csv(rows: &[LoopRow]) -> String {
    let mut out = String::from(
        "loop,pairs,mean_return,max_return,proposed,accepted,cumulative_acceptance,regret,antagonist_return,protagonist_return,level_valid\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.loop_idx,
            opt(r.pairs),
            opt(r.mean_return),
            opt(r.max_return),
            opt(r.proposed),
            opt(r.accepted),
            opt(r.cumulative_acceptance),
            opt(r.regret),
            opt(r.antagonist_return),
            opt(r.protagonist_return),
            opt(r.level_valid),
        );
    }
    out
}

/// Linear-interpolated quantile of an unsorted sample.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    Some(v[lo] + (v[hi] - v[lo]) * (pos - lo as f64))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.4}"))
}

/// Human-readable report of one summary.
pub fn render_summary(s: &LogSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "algorithm        {}", s.start.algorithm);
    let _ = writeln!(out, "seed             {}", s.start.seed);
    let _ = writeln!(out, "config digest    {}", s.start.config_digest);
    let _ = writeln!(out, "loops            {}", s.loops);
    if s.proposed > 0 {
        let _ = writeln!(
            out,
            "accepted/proposed {}/{} = {}",
            s.accepted,
            s.proposed,
            fmt_opt(s.acceptance_rate)
        );
        let rejected: usize = s.rejected_by_reason.values().sum();
        for (reason, n) in &s.rejected_by_reason {
            let _ = writeln!(
                out,
                "  rejected {reason:<13} {n:>7}  ({:.1}% of rejections)",
                100.0 * *n as f64 / rejected.max(1) as f64
            );
        }
    }
    if s.transfers > 0 {
        let _ = writeln!(out, "transfers        {} ({} agent replacements)", s.transfers, s.transfer_changes);
    }
    let _ = writeln!(out, "final population {}", s.final_population);
    let _ = writeln!(
        out,
        "final returns    p10 {}  p50 {}  p90 {}",
        fmt_opt(quantile(&s.final_returns, 0.1)),
        fmt_opt(quantile(&s.final_returns, 0.5)),
        fmt_opt(quantile(&s.final_returns, 0.9))
    );
    if let Some(t) = s.throughput {
        let _ = writeln!(
            out,
            "throughput       {:.1} loops/hour wall, {:.1} loops/core-hour ({} workers, {:.1}s)",
            t.loops_per_hour, t.loops_per_core_hour, t.workers, t.wall_seconds
        );
    }
    out
}

/// Side-by-side table of two summaries.
pub fn render_comparison(a: &LogSummary, b: &LogSummary, names: (&str, &str)) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<24} {:>14} {:>14}", "", names.0, names.1);
    let mut line = |label: &str, x: String, y: String| {
        let _ = writeln!(out, "{label:<24} {x:>14} {y:>14}");
    };
    line("algorithm", a.start.algorithm.clone(), b.start.algorithm.clone());
    line("loops", a.loops.to_string(), b.loops.to_string());
    line("proposed", a.proposed.to_string(), b.proposed.to_string());
    line("accepted", a.accepted.to_string(), b.accepted.to_string());
    line("acceptance rate", fmt_opt(a.acceptance_rate), fmt_opt(b.acceptance_rate));
    let reasons: std::collections::BTreeSet<&String> =
        a.rejected_by_reason.keys().chain(b.rejected_by_reason.keys()).collect();
    for reason in reasons {
        let frac = |s: &LogSummary| {
            let total: usize = s.rejected_by_reason.values().sum();
            let n = s.rejected_by_reason.get(reason).copied().unwrap_or(0);
            (total > 0).then(|| n as f64 / total as f64)
        };
        line(&format!("share {reason}"), fmt_opt(frac(a)), fmt_opt(frac(b)));
    }
    line("final population", a.final_population.to_string(), b.final_population.to_string());
    for q in [0.1, 0.5, 0.9] {
        line(
            &format!("final return p{:.0}", q * 100.0),
            fmt_opt(quantile(&a.final_returns, q)),
            fmt_opt(quantile(&b.final_returns, q)),
        );
    }
    let tp = |s: &LogSummary| s.throughput.map(|t| t.loops_per_hour);
    line("loops/hour (wall)", fmt_opt(tp(a)), fmt_opt(tp(b)));
    let tpc = |s: &LogSummary| s.throughput.map(|t| t.loops_per_core_hour);
    line("loops/core-hour", fmt_opt(tpc(a)), fmt_opt(tpc(b)));
    out
}
