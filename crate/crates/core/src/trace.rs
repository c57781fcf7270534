//! Schedule traces: the per-slot symbol matrix produced by the simulator and
//! consumed by the entropy and spectral metrics.
//!
//! A trace holds `K` observed hyperperiods of `L` slots each. Symbols are
//! task ids, with 0 marking an idle slot. The on-disk format is CSV with the
//! header `hyperperiod,slot,task_id`, one row per slot, in row-major order.

use crate::task::TaskId;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleTrace {
    hyperperiods: usize,
    period_len: usize,
    slots: Vec<TaskId>,
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("slot count {got} does not fill {k} hyperperiods of length {l}")]
    Ragged { got: usize, k: usize, l: usize },
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl ScheduleTrace {
    pub fn new(hyperperiods: usize, period_len: usize, slots: Vec<TaskId>) -> Result<Self, TraceError> {
        if slots.len() != hyperperiods * period_len {
            return Err(TraceError::Ragged {
                got: slots.len(),
                k: hyperperiods,
                l: period_len,
            });
        }
        Ok(ScheduleTrace { hyperperiods, period_len, slots })
    }

    /// Build a trace from one vector per hyperperiod. All rows must share
    /// the same length.
    pub fn from_rows(rows: Vec<Vec<TaskId>>) -> Result<Self, TraceError> {
        let k = rows.len();
        let l = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != l) {
            return Err(TraceError::Ragged { got: bad.len(), k, l });
        }
        Ok(ScheduleTrace {
            hyperperiods: k,
            period_len: l,
            slots: rows.into_iter().flatten().collect(),
        })
    }

    /// Number of observed hyperperiods `K`.
    pub fn hyperperiods(&self) -> usize {
        self.hyperperiods
    }

    /// Hyperperiod length `L` in slots.
    pub fn period_len(&self) -> usize {
        self.period_len
    }

    /// Row `k` (0-based hyperperiod index).
    pub fn row(&self, k: usize) -> &[TaskId] {
        &self.slots[k * self.period_len..(k + 1) * self.period_len]
    }

    /// Symbol at hyperperiod `k`, slot `t`.
    pub fn symbol(&self, k: usize, t: usize) -> TaskId {
        self.slots[k * self.period_len + t]
    }

    /// The whole trace flattened row-major.
    pub fn flat(&self) -> &[TaskId] {
        &self.slots
    }

    /// Reinterpret the trace with a different row length. Used to observe
    /// tasksets whose hyperperiod divides a common window length over that
    /// common window, so entropy parameters stay comparable across tasksets.
    pub fn rechunk(&self, period_len: usize) -> Result<Self, TraceError> {
        if period_len == 0 || !self.slots.len().is_multiple_of(period_len) {
            return Err(TraceError::Ragged {
                got: self.slots.len(),
                k: self.slots.len() / period_len.max(1),
                l: period_len,
            });
        }
        Ok(ScheduleTrace {
            hyperperiods: self.slots.len() / period_len,
            period_len,
            slots: self.slots.clone(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("hyperperiod,slot,task_id\n");
        for k in 0..self.hyperperiods {
            for t in 0..self.period_len {
                out.push_str(&format!("{},{},{}\n", k, t, self.symbol(k, t)));
            }
        }
        out
    }

    /// Parse the CSV trace format. Rows must appear in row-major order with
    /// 0-based hyperperiod and slot indices.
    pub fn from_csv(text: &str) -> Result<Self, TraceError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "hyperperiod,slot,task_id" => {}
            _ => {
                return Err(TraceError::Csv {
                    line: 1,
                    message: "expected header 'hyperperiod,slot,task_id'".into(),
                })
            }
        }
        let mut rows: Vec<Vec<TaskId>> = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| TraceError::Csv { line: idx + 1, message };
            let mut fields = line.split(',');
            let mut next = |name: &str| {
                fields
                    .next()
                    .ok_or_else(|| err(format!("missing field '{name}'")))?
                    .trim()
                    .parse::<u64>()
                    .map_err(|e| err(format!("bad {name}: {e}")))
            };
            let k = next("hyperperiod")? as usize;
            let t = next("slot")? as usize;
            let sym = next("task_id")? as TaskId;
            if k == rows.len() && t == 0 {
                rows.push(Vec::new());
            }
            let row = rows
                .get_mut(k)
                .filter(|r| r.len() == t)
                .ok_or_else(|| err(format!("row ({k},{t}) out of order")))?;
            row.push(sym);
        }
        Self::from_rows(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_roundtrip() {
        let trace = ScheduleTrace::from_rows(vec![vec![3, 3, 1, 0], vec![2, 3, 0, 0]]).unwrap();
        let csv = trace.to_csv();
        assert!(csv.starts_with("hyperperiod,slot,task_id\n0,0,3\n"));
        let back = ScheduleTrace::from_csv(&csv).unwrap();
        assert_eq!(trace, back);
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(ScheduleTrace::from_rows(vec![vec![1, 2], vec![1]]).is_err());
    }

    #[test]
    fn csv_header_required() {
        assert!(ScheduleTrace::from_csv("nope\n0,0,1\n").is_err());
    }

    #[test]
    fn csv_out_of_order_rejected() {
        let text = "hyperperiod,slot,task_id\n0,1,3\n";
        assert!(ScheduleTrace::from_csv(text).is_err());
    }
}
