//! Shared test oracles, independent of the engine under test.

// Compiled once per test binary; not every binary uses every helper.
#![allow(dead_code)]

use edfrand::task::{TaskId, Taskset, Time};

/// What a slot-by-slot reference EDF run observed.
pub struct EdfReference {
    /// Maximum observed response time per task (0 when no job completed).
    pub max_response: Vec<Time>,
    /// Longest busy period: a maximal interval with positive backlog in its
    /// interior. An instant where the backlog empties splits busy periods,
    /// even when an arrival at that same instant keeps the processor
    /// occupied.
    pub longest_busy_run: Time,
    /// Per-slot symbols, 0 for idle.
    pub trace: Vec<TaskId>,
    /// Whether any job was unfinished at its deadline.
    pub missed: bool,
}

/// Brute-force slot-at-a-time EDF simulation from synchronous release with
/// every job at WCET. Deliberately structured nothing like the engine: one
/// loop, one slot per iteration, smallest `(deadline, task)` wins.
pub fn edf_slot_reference(ts: &Taskset, slots: Time) -> EdfReference {
    struct Active {
        release: Time,
        deadline: Time,
        remaining: Time,
    }
    let n = ts.len();
    let mut next_release: Vec<Time> = vec![0; n];
    let mut active: Vec<Option<Active>> = (0..n).map(|_| None).collect();
    let mut max_response = vec![0; n];
    let mut trace = Vec::with_capacity(slots as usize);
    let mut longest_busy_run = 0;
    let mut run = 0;
    let mut missed = false;

    for t in 0..slots {
        if active.iter().all(Option::is_none) {
            run = 0;
        }
        for (i, task) in ts.tasks().iter().enumerate() {
            if next_release[i] == t {
                if active[i].is_some() {
                    missed = true;
                }
                active[i] = Some(Active {
                    release: t,
                    deadline: t + task.deadline,
                    remaining: task.wcet,
                });
                next_release[i] += task.period;
            }
        }
        let pick = active
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.as_ref().map(|a| (a.deadline, i)))
            .min()
            .map(|(_, i)| i);
        match pick {
            Some(i) => {
                trace.push((i + 1) as TaskId);
                run += 1;
                longest_busy_run = longest_busy_run.max(run);
                let job = active[i].as_mut().unwrap();
                job.remaining -= 1;
                if job.remaining == 0 {
                    let response = t + 1 - job.release;
                    max_response[i] = max_response[i].max(response);
                    if t + 1 > job.deadline {
                        missed = true;
                    }
                    active[i] = None;
                }
            }
            None => {
                trace.push(0);
                run = 0;
            }
        }
        for job in active.iter().flatten() {
            if job.remaining > 0 && job.deadline <= t + 1 {
                missed = true;
            }
        }
    }

    EdfReference { max_response, longest_busy_run, trace, missed }
}

pub fn ex1() -> Taskset {
    Taskset::implicit([(4, 10), (1, 20), (1, 5), (2, 12)])
}

pub fn ex2() -> Taskset {
    Taskset::implicit([(1, 10), (2, 20), (2, 5)])
}

pub fn ex3() -> Taskset {
    Taskset::implicit([(1, 5), (3, 8), (2, 9), (4, 20)])
}
