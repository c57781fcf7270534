//! Periodic task model and the discrete-time conventions shared by all
//! other modules.
//!
//! Time is a count of indivisible unit slots, held in a `u64`. All task
//! parameters are integers; one slot is the simulation quantum. Task ids
//! start at 1; id 0 is reserved for the idle task, whose deadline and
//! execution time are represented by [`INFINITE_TIME`] and compare larger
//! than any real value.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A count of unit time slots (instant or duration).
pub type Time = u64;

/// Task identifier; 0 is reserved for the idle task.
pub type TaskId = u32;

/// Id of the synthetic idle task.
pub const IDLE_TASK_ID: TaskId = 0;

/// Sentinel standing in for an infinite deadline or execution time.
/// Every comparison treats it as strictly larger than any real value.
pub const INFINITE_TIME: Time = Time::MAX;

/// Static parameters of one periodic task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    /// 1-based index within the taskset.
    pub id: TaskId,
    /// Worst-case execution time in slots.
    pub wcet: Time,
    /// Minimum inter-arrival time in slots.
    pub period: Time,
    /// Relative deadline in slots; constrained (`deadline <= period`).
    pub deadline: Time,
}

impl Task {
    /// Exact utilization `wcet / period` of this task.
    pub fn utilization(&self) -> Ratio<u128> {
        Ratio::new(self.wcet as u128, self.period as u128)
    }
}

/// An ordered collection of periodic tasks. Ids follow declaration order,
/// starting at 1; the declaration index is the deterministic tie-breaker
/// wherever two absolute deadlines are equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Taskset {
    tasks: Vec<Task>,
}

/// One invariant violation found by [`Taskset::validate`]. Violations are
/// data, not errors: `validate` returns every one it finds.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// `wcet >= 1` failed.
    ZeroWcet { task: TaskId },
    /// `period >= 1` failed.
    ZeroPeriod { task: TaskId },
    /// `deadline >= 1` failed.
    ZeroDeadline { task: TaskId },
    /// Constrained deadline `deadline <= period` failed.
    DeadlineExceedsPeriod { task: TaskId },
    /// EDF utilization bound `sum(wcet/period) <= 1` failed.
    UtilizationBound { utilization: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::ZeroWcet { task } => write!(f, "task {task}: wcet must be >= 1"),
            Violation::ZeroPeriod { task } => write!(f, "task {task}: period must be >= 1"),
            Violation::ZeroDeadline { task } => write!(f, "task {task}: deadline must be >= 1"),
            Violation::DeadlineExceedsPeriod { task } => {
                write!(f, "task {task}: constrained deadline requires deadline <= period")
            }
            Violation::UtilizationBound { utilization } => {
                write!(f, "EDF utilization bound exceeded: {utilization} > 1")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TaskError {
    #[error("hyperperiod overflows 64-bit time while folding period {period}")]
    HyperperiodOverflow { period: Time },
}

impl Taskset {
    /// Build a taskset from `(wcet, period, deadline)` triples, assigning
    /// ids 1..=n in declaration order.
    pub fn new(params: impl IntoIterator<Item = (Time, Time, Time)>) -> Self {
        let tasks = params
            .into_iter()
            .enumerate()
            .map(|(i, (wcet, period, deadline))| Task {
                id: (i + 1) as TaskId,
                wcet,
                period,
                deadline,
            })
            .collect();
        Taskset { tasks }
    }

    /// Build an implicit-deadline taskset (`deadline = period`).
    pub fn implicit(params: impl IntoIterator<Item = (Time, Time)>) -> Self {
        Self::new(params.into_iter().map(|(c, t)| (c, t, t)))
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Task with the given 1-based id.
    pub fn task(&self, id: TaskId) -> Option<&Task> {
        if id == IDLE_TASK_ID {
            return None;
        }
        self.tasks.get(id as usize - 1)
    }

    /// Least common multiple of all periods. Overflow of the 64-bit time
    /// width is an explicit error, never silent wraparound.
    pub fn hyperperiod(&self) -> Result<Time, TaskError> {
        let mut lcm: Time = 1;
        for task in &self.tasks {
            let g = num_integer::gcd(lcm, task.period);
            lcm = (lcm / g)
                .checked_mul(task.period)
                .ok_or(TaskError::HyperperiodOverflow { period: task.period })?;
        }
        Ok(lcm)
    }

    /// Exact total utilization `sum(wcet/period)`. Rational arithmetic keeps
    /// the schedulability test free of floating-point drift. Panics on a
    /// zero period; run [`Taskset::validate`] first on untrusted input.
    pub fn utilization(&self) -> Ratio<u128> {
        self.tasks
            .iter()
            .map(Task::utilization)
            .fold(Ratio::new(0, 1), |acc, u| acc + u)
    }

    /// Total utilization as a float, for display only.
    pub fn utilization_f64(&self) -> f64 {
        let u = self.utilization();
        *u.numer() as f64 / *u.denom() as f64
    }

    /// Check every task and taskset invariant, returning all violations.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for t in &self.tasks {
            if t.wcet == 0 {
                out.push(Violation::ZeroWcet { task: t.id });
            }
            if t.period == 0 {
                out.push(Violation::ZeroPeriod { task: t.id });
            }
            if t.deadline == 0 {
                out.push(Violation::ZeroDeadline { task: t.id });
            }
            if t.period > 0 && t.deadline > t.period {
                out.push(Violation::DeadlineExceedsPeriod { task: t.id });
            }
        }
        if self.tasks.iter().all(|t| t.period > 0) {
            let u = self.utilization();
            if u > Ratio::new(1, 1) {
                out.push(Violation::UtilizationBound {
                    utilization: *u.numer() as f64 / *u.denom() as f64,
                });
            }
        }
        out
    }
}

/// On-disk task entry; `deadline` defaults to the period when omitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TaskEntry {
    wcet: Time,
    period: Time,
    #[serde(skip_serializing_if = "Option::is_none")]
    deadline: Option<Time>,
}

/// On-disk taskset format: `{"tasks": [{"wcet": .., "period": .., "deadline"?: ..}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct TasksetFile {
    tasks: Vec<TaskEntry>,
}

impl Taskset {
    pub fn from_json(json: &str) -> Result<Self, serde_json::Error> {
        let file: TasksetFile = serde_json::from_str(json)?;
        Ok(Taskset::new(file.tasks.into_iter().map(|t| {
            let deadline = t.deadline.unwrap_or(t.period);
            (t.wcet, t.period, deadline)
        })))
    }

    pub fn to_json(&self) -> String {
        let file = TasksetFile {
            tasks: self
                .tasks
                .iter()
                .map(|t| TaskEntry {
                    wcet: t.wcet,
                    period: t.period,
                    deadline: if t.deadline == t.period { None } else { Some(t.deadline) },
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("taskset serialization cannot fail")
    }
}
