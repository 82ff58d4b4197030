//! File formats at the pipeline boundary.
//!
//! - **Traces**: newline-delimited JSON records
//!   `{"unit_id": ..., "t": ..., "dist": {"kind": ..., ...}}`, one prediction
//!   per line so arbitrarily large fleets stream.
//! - **Truths**: CSV with header `unit_id,failure_time`.
//! - **Simulator configs**: a flat JSON object.
//! - **Reports**: a JSON document with the evaluation scalars and per-unit
//!   outcome rows; sweep results additionally flatten to CSV for plotting.
//!
//! All writes go through a temp file in the target directory and are renamed
//! into place. Numbers use the shortest representation that round-trips, so
//! every scalar survives a write/read cycle bit-exactly. Non-finite numbers
//! are rejected on both sides.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PdmError, Result};
use crate::evaluation::FleetEvaluation;
use crate::simulator::SimulatorConfig;
use crate::types::{CostModel, PredictionTrace, TimeGrid, TracePoint, UnitTruth};
use crate::RulDistribution;

#[derive(Debug, Serialize, Deserialize)]
struct TraceRecord {
    unit_id: String,
    t: f64,
    dist: RulDistribution,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> PdmError {
    PdmError::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Writes `contents` via a sibling temp file renamed into place.
fn atomic_write(path: &Path, write_fn: impl FnOnce(&mut BufWriter<&mut File>) -> Result<()>) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut writer = BufWriter::new(tmp.as_file_mut());
        write_fn(&mut writer)?;
        writer.flush()?;
    }
    tmp.persist(path).map_err(|e| PdmError::Io(e.error))?;
    Ok(())
}

/// Reads a newline-delimited trace file into per-unit traces, grouped by
/// unit id and sorted by time. Malformed records and duplicate
/// `(unit_id, t)` pairs are reported with their line number.
pub fn read_traces(path: impl AsRef<Path>) -> Result<Vec<PredictionTrace>> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let mut by_unit: BTreeMap<String, Vec<TracePoint>> = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TraceRecord = serde_json::from_str(&line)
            .map_err(|e| parse_err(path, line_no, e.to_string()))?;
        if !record.t.is_finite() {
            return Err(parse_err(path, line_no, format!("non-finite time {}", record.t)));
        }
        record
            .dist
            .validate()
            .map_err(|e| parse_err(path, line_no, e.to_string()))?;
        let entries = by_unit.entry(record.unit_id.clone()).or_default();
        if entries.iter().any(|p| p.t == record.t) {
            return Err(parse_err(
                path,
                line_no,
                format!("duplicate prediction for unit {} at t={}", record.unit_id, record.t),
            ));
        }
        entries.push(TracePoint { t: record.t, dist: record.dist });
    }
    by_unit
        .into_iter()
        .map(|(unit_id, mut entries)| {
            entries.sort_by(|a, b| a.t.total_cmp(&b.t));
            PredictionTrace::new(unit_id, entries)
        })
        .collect()
}

/// Writes traces as newline-delimited records, one prediction per line.
pub fn write_traces(traces: &[PredictionTrace], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    for trace in traces {
        for p in trace.entries() {
            if !p.t.is_finite() {
                return Err(PdmError::input(format!(
                    "cannot serialize non-finite time for unit {}",
                    trace.unit_id()
                )));
            }
        }
    }
    atomic_write(path, |w| {
        for trace in traces {
            for p in trace.entries() {
                let record = TraceRecord {
                    unit_id: trace.unit_id().to_string(),
                    t: p.t,
                    dist: p.dist.clone(),
                };
                serde_json::to_writer(&mut *w, &record)
                    .map_err(|e| PdmError::input(e.to_string()))?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    })
}

/// Reads the truth table: CSV with header `unit_id,failure_time`.
pub fn read_truths(path: impl AsRef<Path>) -> Result<Vec<UnitTruth>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => PdmError::input(format!("{}: {e}", path.display())),
        _ => parse_err(path, 1, e.to_string()),
    })?;
    let mut truths = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for result in reader.deserialize::<UnitTruth>() {
        let record = result.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        if !(record.failure_time.is_finite() && record.failure_time > 0.0) {
            return Err(PdmError::input(format!(
                "unit {} has invalid failure time {}",
                record.unit_id, record.failure_time
            )));
        }
        if !seen.insert(record.unit_id.clone()) {
            return Err(PdmError::input(format!("duplicate unit id {}", record.unit_id)));
        }
        truths.push(record);
    }
    Ok(truths)
}

/// Writes the truth table.
pub fn write_truths(truths: &[UnitTruth], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    for t in truths {
        if !t.failure_time.is_finite() {
            return Err(PdmError::input(format!(
                "cannot serialize non-finite failure time for unit {}",
                t.unit_id
            )));
        }
    }
    atomic_write(path, |w| {
        let mut csv_writer = csv::Writer::from_writer(w);
        for t in truths {
            csv_writer.serialize(t).map_err(|e| PdmError::input(e.to_string()))?;
        }
        csv_writer.flush()?;
        Ok(())
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulatorConfig {
    mu_tf: f64,
    sigma_tf: f64,
    delta_t: f64,
    max_steps: u32,
    sigma_ln_eps: f64,
    corr_length: f64,
    n_units: u32,
    seed: u64,
}

/// Reads and validates a simulator configuration.
pub fn read_simulator_config(path: impl AsRef<Path>) -> Result<SimulatorConfig> {
    let path = path.as_ref();
    let raw: RawSimulatorConfig = serde_json::from_reader(BufReader::new(File::open(path)?))
        .map_err(|e| PdmError::config(format!("{}: {e}", path.display())))?;
    let grid = TimeGrid::new(raw.delta_t, raw.max_steps)?;
    SimulatorConfig::new(
        raw.mu_tf,
        raw.sigma_tf,
        grid,
        raw.sigma_ln_eps,
        raw.corr_length,
        raw.n_units,
        raw.seed,
    )
}

/// Evaluation report: context plus the full fleet evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    /// Decision setting: `"replacement"` or `"ordering"`.
    pub setting: String,
    /// Human-readable policy description, e.g. `"policy1(p_thres=0.1)"`.
    pub policy: String,
    pub costs: CostModel,
    pub evaluation: FleetEvaluation,
    /// Percentile-bootstrap 95% interval on the metric, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_ci95_m: Option<(f64, f64)>,
}

/// Writes any serializable document as pretty-printed JSON, atomically.
pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    atomic_write(path.as_ref(), |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(|e| PdmError::input(e.to_string()))?;
        w.write_all(b"\n")?;
        Ok(())
    })
}

/// Writes a report as pretty-printed JSON.
pub fn write_report(report: &Report, path: impl AsRef<Path>) -> Result<()> {
    write_json(report, path)
}

/// Reads a report back; scalars round-trip bit-exactly.
pub fn read_report(path: impl AsRef<Path>) -> Result<Report> {
    let path = path.as_ref();
    serde_json::from_reader(BufReader::new(File::open(path)?))
        .map_err(|e| parse_err(path, e.line(), e.to_string()))
}

/// One row of a cost-ratio sweep, flattened for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub cost_ratio: f64,
    pub policy: String,
    pub m_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

/// Writes sweep rows as CSV with header `cost_ratio,policy,m_hat,ci_lo,ci_hi`.
pub fn write_sweep_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    atomic_write(path, |w| {
        let mut csv_writer = csv::Writer::from_writer(w);
        for row in rows {
            csv_writer.serialize(row).map_err(|e| PdmError::input(e.to_string()))?;
        }
        csv_writer.flush()?;
        Ok(())
    })
}

/// Reads sweep rows back.
pub fn read_sweep_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| PdmError::input(e.to_string()))?;
    reader
        .deserialize::<SweepRow>()
        .map(|r| r.map_err(|e| PdmError::input(e.to_string())))
        .collect()
}
