//! Trajectory logs.
//!
//! A log is JSON Lines: a header object naming the run, then one
//! [`Snapshot`] per line in iteration order.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use sbs_core::optimizers::{Snapshot, Trajectory};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub function: String,
    pub dim: usize,
    pub method: String,
    pub seed: u64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub header: LogHeader,
    pub snapshots: Vec<Snapshot>,
}

impl TrajectoryLog {
    pub fn new(function: &str, dim: usize, method: &str, seed: u64, trajectory: Trajectory) -> Self {
        Self {
            header: LogHeader {
                function: function.to_string(),
                dim,
                method: method.to_string(),
                seed,
                kappa: trajectory.kappa,
            },
            snapshots: trajectory.snapshots,
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header).expect("header serializes");
        out.push('\n');
        for s in &self.snapshots {
            out.push_str(&serde_json::to_string(s).expect("snapshot serializes"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
        file.write_all(self.to_jsonl().as_bytes())
            .map_err(|e| HarnessError::io(path, e))
    }

    pub fn parse(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines().enumerate().filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));
        let bad = |line: usize, what: String| HarnessError::BadLog(format!("line {}: {what}", line + 1));
        let (_, first) = lines.next().ok_or_else(|| HarnessError::BadLog("is empty".into()))?;
        let first = first.map_err(|e| bad(0, e.to_string()))?;
        let header: LogHeader = serde_json::from_str(&first).map_err(|e| bad(0, e.to_string()))?;
        let mut snapshots = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| bad(i, e.to_string()))?;
            let s: Snapshot = serde_json::from_str(&line).map_err(|e| bad(i, e.to_string()))?;
            if s.ids.len() != s.positions.len() || s.positions.iter().any(|x| x.len() != header.dim) {
                return Err(bad(i, "snapshot shape does not match the header".into()));
            }
            snapshots.push(s);
        }
        Ok(Self { header, snapshots })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| HarnessError::io(path, e))?;
        Self::parse(BufReader::new(file))
    }
}
