//! Offline EDF schedulability analysis: interference bound, response-time
//! upper bound, busy-period fixed point, and the per-task worst-case
//! inversion budget enforced by the randomizing scheduler.
//!
//! The response-time bound is computed per release offset `a` as
//! `R_i(a) = max(C_i, W_i(a) - a)` where the workload folds in the
//! interference from shorter-relative-deadline tasks, including one extra
//! instance per interfering task to cover back-to-back hits. The worst case
//! is the maximum over all integer offsets below the busy-period bound;
//! under the discrete time model the maximand only changes at integer
//! points, so the integer scan is exhaustive.

use crate::task::{TaskId, Taskset, Time};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cap on busy-period fixed-point iterations. Convergence is guaranteed for
/// utilization <= 1, so hitting the cap indicates a bug or a pathological
/// input and is reported instead of looping.
pub const FIXED_POINT_ITERATION_CAP: u32 = 1_000_000;

/// Per-taskset analysis output consumed by the scheduler.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisResult {
    /// Upper bound on the worst-case response time of each task.
    pub response_time: Vec<Time>,
    /// Worst-case inversion budget `deadline - response_time` of each task.
    /// May be negative; a negative budget only disables randomization for
    /// that task, it does not mean the taskset is unschedulable.
    pub wcib: Vec<i64>,
    /// Upper bound on the length of any busy period.
    pub busy_period_bound: Time,
    /// Number of fixed-point steps taken to reach the busy-period bound.
    pub iterations: u32,
}

impl AnalysisResult {
    pub fn wcib_of(&self, id: TaskId) -> i64 {
        self.wcib[id as usize - 1]
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("busy-period fixed point did not converge after {cap} steps (last iterate {last})")]
    FixedPointDiverged { cap: u32, last: Time },
    #[error("task index {index} out of range for a {len}-task set")]
    TaskIndex { index: usize, len: usize },
}

fn ceil_div(a: Time, b: Time) -> Time {
    a.div_ceil(b)
}

/// Upper bound on the interference task `i` (0-based index) can suffer from
/// other tasks when released at offset `a` inside a busy period.
///
/// Only tasks whose relative deadline fits before `a + D_i` contribute; each
/// contributes `min(ceil(D_i/T_j) + 1, floor((a + D_i - D_j)/T_j) + 2)` jobs.
pub fn interference(ts: &Taskset, i: usize, a: Time) -> Time {
    let di = ts.tasks()[i].deadline;
    ts.tasks()
        .iter()
        .enumerate()
        .filter(|&(j, tj)| j != i && tj.deadline <= a + di)
        .map(|(_, tj)| {
            let first = ceil_div(di, tj.period) + 1;
            let second = (a + di - tj.deadline) / tj.period + 2;
            first.min(second) * tj.wcet
        })
        .sum()
}

/// Workload bound for task `i` released at offset `a`: its own jobs released
/// in `[0, a]` plus the interference bound.
pub fn workload(ts: &Taskset, i: usize, a: Time) -> Time {
    let task = &ts.tasks()[i];
    (a / task.period + 1) * task.wcet + interference(ts, i, a)
}

/// Upper bound on any busy-period length: the least fixed point of
/// `r -> sum(ceil(r/T_i) * C_i)` started from `sum(C_i)`.
pub fn busy_period_bound(ts: &Taskset) -> Result<(Time, u32), AnalysisError> {
    if ts.is_empty() {
        return Ok((0, 0));
    }
    let mut r: Time = ts.tasks().iter().map(|t| t.wcet).sum();
    for iter in 0..FIXED_POINT_ITERATION_CAP {
        let next: Time = ts.tasks().iter().map(|t| ceil_div(r, t.period) * t.wcet).sum();
        if next == r {
            return Ok((r, iter));
        }
        r = next;
    }
    Err(AnalysisError::FixedPointDiverged {
        cap: FIXED_POINT_ITERATION_CAP,
        last: r,
    })
}

/// Response-time bound for task `i` released at offset `a`:
/// `max(C_i, W_i(a) - a)`.
pub fn response_time_at(ts: &Taskset, i: usize, a: Time) -> Time {
    let wcet = ts.tasks()[i].wcet;
    let w = workload(ts, i, a);
    wcet.max(w.saturating_sub(a))
}

/// Worst-case response-time bound for task `i`: the maximum of
/// `response_time_at` over offsets `0 <= a < busy_period_bound - C_i`.
/// An empty scan range collapses to the WCET.
pub fn wcrt(ts: &Taskset, i: usize) -> Result<Time, AnalysisError> {
    let len = ts.len();
    if i >= len {
        return Err(AnalysisError::TaskIndex { index: i, len });
    }
    let (bound, _) = busy_period_bound(ts)?;
    let wcet = ts.tasks()[i].wcet;
    let upper = bound.saturating_sub(wcet);
    Ok((0..upper)
        .map(|a| response_time_at(ts, i, a))
        .max()
        .unwrap_or(wcet))
}

/// Run the full analysis: response-time bounds, inversion budgets
/// `V_i = D_i - R_i`, and the busy-period bound.
pub fn analyze(ts: &Taskset) -> Result<AnalysisResult, AnalysisError> {
    let (busy, iterations) = busy_period_bound(ts)?;
    let mut response_time = Vec::with_capacity(ts.len());
    let mut wcib = Vec::with_capacity(ts.len());
    for (i, task) in ts.tasks().iter().enumerate() {
        let upper = busy.saturating_sub(task.wcet);
        let r = (0..upper)
            .map(|a| response_time_at(ts, i, a))
            .max()
            .unwrap_or(task.wcet);
        response_time.push(r);
        wcib.push(task.deadline as i64 - r as i64);
    }
    Ok(AnalysisResult {
        response_time,
        wcib,
        busy_period_bound: busy,
        iterations,
    })
}
