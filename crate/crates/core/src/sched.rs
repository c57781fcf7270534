//! Discrete-time scheduling engine: vanilla EDF plus the randomizing
//! protocol built on bounded priority inversions.
//!
//! Every task carries an offline inversion budget (`wcib`, from the analysis
//! module). At run time each job holds a remaining inversion budget (`rib`)
//! that is debited for every slot the job spends blocked behind a
//! longer-deadline job. A job whose budget is exhausted may no longer be
//! blocked, which caps how far the scheduler can stray from EDF order while
//! still meeting every deadline.
//!
//! Scheme features are cumulative: `Base` randomizes among candidate jobs,
//! `IdleTime` additionally schedules idle slots as a lowest-priority job,
//! `FineGrained` yields the chosen job after a random fraction of its
//! allowed interval, and `UnusedTimeReclamation` transfers a finished job's
//! unused worst-case time to longer-deadline ready jobs as extra budget.

use crate::analysis::AnalysisResult;
use crate::rng::{derive_seed, SimRng};
use crate::task::{TaskId, Taskset, Time, Violation, IDLE_TASK_ID, INFINITE_TIME};
use crate::trace::ScheduleTrace;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Scheduling scheme. Later variants include all features of earlier ones,
/// so the derived ordering doubles as a feature lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    VanillaEdf,
    Base,
    IdleTime,
    FineGrained,
    UnusedTimeReclamation,
}

impl Scheme {
    /// All randomizing schemes, in cumulative feature order.
    pub const RANDOMIZED: [Scheme; 4] = [
        Scheme::Base,
        Scheme::IdleTime,
        Scheme::FineGrained,
        Scheme::UnusedTimeReclamation,
    ];

    pub fn randomized(self) -> bool {
        self != Scheme::VanillaEdf
    }

    pub fn schedules_idle(self) -> bool {
        self >= Scheme::IdleTime
    }

    pub fn fine_grained(self) -> bool {
        self >= Scheme::FineGrained
    }

    pub fn reclaims_unused(self) -> bool {
        self >= Scheme::UnusedTimeReclamation
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::VanillaEdf => "edf",
            Scheme::Base => "base",
            Scheme::IdleTime => "it",
            Scheme::FineGrained => "fg",
            Scheme::UnusedTimeReclamation => "utr",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "edf" => Ok(Scheme::VanillaEdf),
            "base" => Ok(Scheme::Base),
            "it" => Ok(Scheme::IdleTime),
            "fg" => Ok(Scheme::FineGrained),
            "utr" => Ok(Scheme::UnusedTimeReclamation),
            other => Err(format!("unknown scheme '{other}' (expected edf|base|it|fg|utr)")),
        }
    }
}

/// Rule producing each job's actual execution demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExecPolicy {
    /// Every job runs for its full WCET.
    Wcet,
    /// Uniform integer in `[ceil(min_scale * wcet), wcet]`, redrawn per job.
    UniformScaled { min_scale: f64 },
    /// Fixed `max(1, floor(scale * wcet))` for every job.
    FixedScaled { scale: f64 },
}

impl ExecPolicy {
    /// The synthetic-workload default: uniform in `[ceil(0.5 C), C]`.
    pub fn uniform_half() -> Self {
        ExecPolicy::UniformScaled { min_scale: 0.5 }
    }

    fn draw(&self, wcet: Time, src: &mut dyn DecisionSource) -> Time {
        match *self {
            ExecPolicy::Wcet => wcet,
            ExecPolicy::UniformScaled { min_scale } => {
                let lo = ((min_scale * wcet as f64).ceil() as Time).clamp(1, wcet);
                if lo == wcet {
                    wcet
                } else {
                    src.pick_range(lo, wcet)
                }
            }
            ExecPolicy::FixedScaled { scale } => {
                ((scale * wcet as f64).floor() as Time).clamp(1, wcet)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub scheme: Scheme,
    pub seed: u64,
    pub exec_policy: ExecPolicy,
    /// Number of hyperperiods to simulate from synchronous release at t=0.
    pub hyperperiods: u32,
}

impl SchedulerConfig {
    pub fn new(scheme: Scheme, seed: u64, exec_policy: ExecPolicy, hyperperiods: u32) -> Self {
        SchedulerConfig { scheme, seed, exec_policy, hyperperiods }
    }
}

/// One released task instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    pub task_id: TaskId,
    pub release: Time,
    pub abs_deadline: Time,
    /// Relative deadline of the owning task; blocking is judged on both
    /// deadline forms (see [`blocks`]).
    pub rel_deadline: Time,
    pub wcet: Time,
    /// Remaining execution demand of this instance.
    pub remaining: Time,
    /// True demand of this instance (`<= wcet`).
    pub actual_exec: Time,
    /// Remaining inversion budget; negative budgets never ran out, they
    /// were born that way.
    pub rib: i64,
}

/// Whether `run` executing consumes `other`'s inversion budget.
///
/// The response-time bound behind each budget counts, for every
/// interfering task, one carried-over job plus the releases that fit in
/// the pending job's window, and it only counts tasks whose relative
/// deadline fits in that window. Execution is therefore covered by the
/// bound (free of charge) only when the runner precedes the pending job in
/// both absolute and relative deadline; anything else, the idle job
/// included, eats into the pending job's slack and must be debited. Plain
/// shorter-deadline-first scheduling never triggers a debit for
/// synchronously released jobs, where absolute order equals relative
/// order.
pub fn blocks(run: &Job, other: &Job) -> bool {
    run.abs_deadline > other.abs_deadline || run.rel_deadline > other.rel_deadline
}

/// The synthetic lowest-priority job whose execution is intentional idling.
/// Its deadline, demand, and budget are infinite sentinels; it is never
/// debited and never completes.
pub fn idle_job() -> Job {
    Job {
        task_id: IDLE_TASK_ID,
        release: 0,
        abs_deadline: INFINITE_TIME,
        rel_deadline: INFINITE_TIME,
        wcet: INFINITE_TIME,
        remaining: INFINITE_TIME,
        actual_exec: INFINITE_TIME,
        rib: i64::MAX,
    }
}

/// Ready jobs ordered by `(abs_deadline, rel_deadline, task_id)`; the head
/// is the highest-priority job. Breaking absolute-deadline ties toward the
/// shorter relative deadline keeps head runs debit-free among tied jobs.
#[derive(Debug, Clone, Default)]
pub struct ReadyQueue {
    jobs: Vec<Job>,
}

impl ReadyQueue {
    pub fn new() -> Self {
        ReadyQueue { jobs: Vec::new() }
    }

    pub fn from_jobs(jobs: impl IntoIterator<Item = Job>) -> Self {
        let mut q = ReadyQueue::new();
        for j in jobs {
            q.insert(j);
        }
        q
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    pub fn highest_priority(&self) -> Option<&Job> {
        self.jobs.first()
    }

    pub fn insert(&mut self, job: Job) {
        debug_assert!(
            self.jobs.iter().all(|j| j.task_id != job.task_id),
            "constrained deadlines admit at most one active job per task"
        );
        let key = (job.abs_deadline, job.rel_deadline, job.task_id);
        let pos = self
            .jobs
            .partition_point(|j| (j.abs_deadline, j.rel_deadline, j.task_id) < key);
        self.jobs.insert(pos, job);
    }

    fn remove(&mut self, index: usize) -> Job {
        self.jobs.remove(index)
    }

    /// Minimum inversion deadline of `job`: the smallest absolute deadline
    /// among ready jobs with a larger deadline and strictly negative budget,
    /// or [`INFINITE_TIME`] when no such job exists. No job with a deadline
    /// beyond this value may run while `job` is unfinished.
    pub fn min_inversion_deadline(&self, job: &Job) -> Time {
        self.jobs
            .iter()
            .filter(|j| j.abs_deadline > job.abs_deadline && j.rib < 0)
            .map(|j| j.abs_deadline)
            .min()
            .unwrap_or(INFINITE_TIME)
    }

    /// Indices of the jobs eligible for selection at this decision point,
    /// in priority order.
    ///
    /// The head job is always eligible. If its budget is exhausted the head
    /// is the only candidate. Otherwise a job is eligible exactly when
    /// running it would not debit any ready job whose budget is already
    /// gone (`rib <= 0`); depleted jobs pin every blocker out of the list,
    /// which in particular enforces the minimum-inversion-deadline policy
    /// of the head.
    pub fn candidates(&self) -> Vec<usize> {
        if self.jobs.is_empty() {
            return Vec::new();
        }
        if self.jobs[0].rib <= 0 {
            return vec![0];
        }
        (0..self.jobs.len())
            .filter(|&p| {
                p == 0
                    || self.jobs.iter().enumerate().all(|(i, other)| {
                        i == p || other.rib > 0 || !blocks(&self.jobs[p], other)
                    })
            })
            .collect()
    }

    /// Smallest budget among the ready jobs the job at `pick` would debit,
    /// or `None` when it debits nobody.
    pub fn min_blocked_budget(&self, pick: usize) -> Option<i64> {
        let chosen = &self.jobs[pick];
        self.jobs
            .iter()
            .enumerate()
            .filter(|&(i, job)| i != pick && job.task_id != IDLE_TASK_ID && blocks(chosen, job))
            .map(|(_, job)| job.rib)
            .min()
    }

    /// Debit the budgets of every ready job blocked by the running job and
    /// consume the running job's execution. The idle job is never debited
    /// and never consumes.
    pub fn tick_budgets(&mut self, running: usize, elapsed: Time) {
        let run = self.jobs[running];
        for (i, j) in self.jobs.iter_mut().enumerate() {
            if i != running && j.task_id != IDLE_TASK_ID && blocks(&run, j) {
                j.rib -= elapsed as i64;
            }
        }
        let run = &mut self.jobs[running];
        if run.task_id != IDLE_TASK_ID {
            run.remaining -= elapsed;
        }
    }

    /// Transfer a finished job's unused worst-case time to the ready jobs
    /// with larger deadlines as extra inversion budget. Only jobs whose
    /// response-time bound accounted for the finished task's full demand
    /// (no shorter relative deadline) may receive the transfer.
    pub fn reclaim_unused(&mut self, finished: &Job) {
        let unused = finished.wcet - finished.actual_exec;
        if unused == 0 {
            return;
        }
        for j in &mut self.jobs {
            if j.task_id != IDLE_TASK_ID
                && j.abs_deadline > finished.abs_deadline
                && j.rel_deadline >= finished.rel_deadline
            {
                j.rib += unused as i64;
            }
        }
    }
}

/// Source of scheduling randomness. The production implementation is the
/// seeded [`SimRng`]; tests may script exact choices.
pub trait DecisionSource {
    /// Uniform index into `len` candidates.
    fn pick_index(&mut self, len: usize) -> usize;
    /// Uniform value in the inclusive range `[lo, hi]`.
    fn pick_range(&mut self, lo: Time, hi: Time) -> Time;
}

impl DecisionSource for SimRng {
    fn pick_index(&mut self, len: usize) -> usize {
        self.gen_index(len)
    }

    fn pick_range(&mut self, lo: Time, hi: Time) -> Time {
        self.gen_range(lo, hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecisionReason {
    Arrival,
    Completion,
    BudgetExpiry,
    RandomYield,
}

/// One scheduling decision: job `chosen` occupies `[time, until)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub time: Time,
    pub chosen: TaskId,
    pub until: Time,
    pub reason: DecisionReason,
}

/// Full context of a missed deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MissReport {
    pub task_id: TaskId,
    pub release: Time,
    pub deadline: Time,
    pub detected_at: Time,
    pub remaining: Time,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("taskset failed validation: {0:?}")]
    InvalidTaskset(Vec<Violation>),
    #[error(transparent)]
    Task(#[from] crate::task::TaskError),
    #[error("analysis covers {analysis} tasks but the taskset has {tasks}")]
    AnalysisMismatch { analysis: usize, tasks: usize },
    #[error("{hyperperiods} hyperperiods of {period_len} slots overflow the time scale")]
    HorizonOverflow { period_len: Time, hyperperiods: u32 },
    #[error(
        "deadline miss: task {} released at {} missed deadline {} with {} slots left \
         (protocol violation for an EDF-schedulable taskset)",
        .0.task_id, .0.release, .0.deadline, .0.remaining
    )]
    DeadlineMiss(MissReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub trace: ScheduleTrace,
    pub decisions: Vec<DecisionRecord>,
}

/// Simulate `config.hyperperiods` hyperperiods from synchronous release.
///
/// Execution-time draws and scheduling decisions use two independent
/// streams derived from the seed, so different schemes run with the same
/// seed see identical per-job demands. Identical inputs reproduce
/// bit-identical traces and decision records.
pub fn simulate(
    ts: &Taskset,
    analysis: &AnalysisResult,
    config: &SchedulerConfig,
) -> Result<SimOutput, SimError> {
    let mut exec_src = SimRng::new(derive_seed(config.seed, 0));
    let mut decision_src = SimRng::new(derive_seed(config.seed, 1));
    run_with_sources(ts, analysis, config, &mut exec_src, &mut decision_src)
}

/// [`simulate`] with caller-supplied randomness, for scripted replays.
pub fn run_with_sources(
    ts: &Taskset,
    analysis: &AnalysisResult,
    config: &SchedulerConfig,
    exec_src: &mut dyn DecisionSource,
    decision_src: &mut dyn DecisionSource,
) -> Result<SimOutput, SimError> {
    let violations = ts.validate();
    if !violations.is_empty() {
        return Err(SimError::InvalidTaskset(violations));
    }
    if analysis.wcib.len() != ts.len() {
        return Err(SimError::AnalysisMismatch {
            analysis: analysis.wcib.len(),
            tasks: ts.len(),
        });
    }

    let period_len = ts.hyperperiod()?;
    let end = period_len
        .checked_mul(config.hyperperiods as Time)
        .ok_or(SimError::HorizonOverflow { period_len, hyperperiods: config.hyperperiods })?;
    let mut slots = vec![IDLE_TASK_ID; end as usize];
    let mut decisions = Vec::new();

    let mut queue = ReadyQueue::new();
    if config.scheme.schedules_idle() {
        queue.insert(idle_job());
    }
    let mut next_release: Vec<Time> = vec![0; ts.len()];
    let mut t: Time = 0;

    while t < end {
        for (i, task) in ts.tasks().iter().enumerate() {
            if next_release[i] == t {
                let actual = config.exec_policy.draw(task.wcet, exec_src);
                queue.insert(Job {
                    task_id: task.id,
                    release: t,
                    abs_deadline: t + task.deadline,
                    rel_deadline: task.deadline,
                    wcet: task.wcet,
                    remaining: actual,
                    actual_exec: actual,
                    rib: analysis.wcib[i],
                });
                next_release[i] += task.period;
            }
        }
        let horizon = next_release.iter().copied().min().unwrap_or(end).min(end);

        if queue.is_empty() {
            // Nothing ready and no idle job scheduled: the processor idles
            // until the next arrival (vanilla EDF and Base only).
            t = horizon;
            continue;
        }

        // Selection. Vanilla EDF runs the head to completion or arrival and
        // ignores budgets entirely; randomized schemes cap every interval so
        // that no debited budget can cross below zero.
        let (pick, natural_until, fg_shortened) = if !config.scheme.randomized() {
            (0, t.saturating_add(queue.jobs()[0].remaining), false)
        } else {
            let candidates = queue.candidates();
            let pick = if candidates.len() == 1 {
                candidates[0]
            } else {
                candidates[decision_src.pick_index(candidates.len())]
            };
            let vhat = queue.min_blocked_budget(pick);
            let base = match vhat {
                None => queue.jobs()[pick].remaining,
                // max(1) keeps the forced head making progress even in the
                // degenerate state where it blocks an exhausted job.
                Some(v) => queue.jobs()[pick].remaining.min(v.max(1) as Time),
            };
            if pick == 0 {
                (0, t.saturating_add(base), false)
            } else {
                debug_assert!(
                    vhat.is_none_or(|v| v > 0),
                    "selected an inversion against an exhausted budget"
                );
                let delta = if config.scheme.fine_grained() && base > 1 {
                    decision_src.pick_range(1, base)
                } else {
                    base
                };
                (pick, t + delta, delta < base)
            }
        };

        let until = natural_until.min(horizon);
        let elapsed = until - t;
        let chosen_id = queue.jobs()[pick].task_id;
        for slot in &mut slots[t as usize..until as usize] {
            *slot = chosen_id;
        }

        queue.tick_budgets(pick, elapsed);
        let completed = chosen_id != IDLE_TASK_ID && queue.jobs()[pick].remaining == 0;

        // A job misses when it is unfinished at its deadline instant: it
        // either sat in the queue while the deadline passed, or it is the
        // running job and completed strictly after the deadline.
        let missed = queue.jobs().iter().enumerate().find_map(|(i, j)| {
            if j.task_id == IDLE_TASK_ID {
                return None;
            }
            let late = (j.remaining > 0 && j.abs_deadline <= until)
                || (j.remaining == 0 && j.abs_deadline < until);
            late.then(|| MissReport {
                task_id: j.task_id,
                release: j.release,
                deadline: j.abs_deadline,
                detected_at: until,
                // Demand that was still outstanding when the deadline hit.
                remaining: if i == pick {
                    j.remaining + (until - j.abs_deadline.max(t))
                } else {
                    j.remaining
                },
            })
        });
        if let Some(report) = missed {
            return Err(SimError::DeadlineMiss(report));
        }

        if completed {
            let finished = queue.remove(pick);
            if config.scheme.reclaims_unused() {
                queue.reclaim_unused(&finished);
            }
        }

        let reason = if completed {
            DecisionReason::Completion
        } else if natural_until > until {
            DecisionReason::Arrival
        } else if fg_shortened {
            DecisionReason::RandomYield
        } else {
            DecisionReason::BudgetExpiry
        };
        decisions.push(DecisionRecord { time: t, chosen: chosen_id, until, reason });
        t = until;
    }

    let trace = ScheduleTrace::new(config.hyperperiods as usize, period_len as usize, slots)
        .expect("engine fills exactly K*L slots");
    Ok(SimOutput { trace, decisions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use std::collections::VecDeque;

    fn ex1() -> Taskset {
        Taskset::implicit([(4, 10), (1, 20), (1, 5), (2, 12)])
    }

    fn ex2() -> Taskset {
        Taskset::implicit([(1, 10), (2, 20), (2, 5)])
    }

    fn ex3() -> Taskset {
        Taskset::implicit([(1, 5), (3, 8), (2, 9), (4, 20)])
    }

    /// Replays a fixed list of candidate picks, then falls back to the
    /// highest-priority job (index 0) once exhausted.
    struct Script {
        picks: VecDeque<usize>,
    }

    impl Script {
        fn new(picks: &[usize]) -> Self {
            Script { picks: picks.iter().copied().collect() }
        }
    }

    impl DecisionSource for Script {
        fn pick_index(&mut self, len: usize) -> usize {
            let pick = self.picks.pop_front().unwrap_or(0);
            assert!(pick < len, "scripted pick {pick} out of {len} candidates");
            pick
        }

        fn pick_range(&mut self, _lo: Time, _hi: Time) -> Time {
            panic!("no interval draws expected in this script");
        }
    }

    /// Panics on any draw; for runs that must not consume randomness.
    struct NoDraws;

    impl DecisionSource for NoDraws {
        fn pick_index(&mut self, _len: usize) -> usize {
            panic!("unexpected candidate draw");
        }

        fn pick_range(&mut self, _lo: Time, _hi: Time) -> Time {
            panic!("unexpected range draw");
        }
    }

    fn wcet_config(scheme: Scheme, k: u32) -> SchedulerConfig {
        SchedulerConfig::new(scheme, 0, ExecPolicy::Wcet, k)
    }

    fn queue_at_zero(ts: &Taskset) -> ReadyQueue {
        let analysis = analyze(ts).unwrap();
        ReadyQueue::from_jobs(ts.tasks().iter().enumerate().map(|(i, task)| Job {
            task_id: task.id,
            release: 0,
            abs_deadline: task.deadline,
            rel_deadline: task.deadline,
            wcet: task.wcet,
            remaining: task.wcet,
            actual_exec: task.wcet,
            rib: analysis.wcib[i],
        }))
    }

    #[test]
    fn min_inversion_deadlines_at_release() {
        let ts = ex1();
        let queue = queue_at_zero(&ts);
        let m: Vec<Time> = ts
            .tasks()
            .iter()
            .map(|task| {
                let job = queue.jobs().iter().find(|j| j.task_id == task.id).unwrap();
                queue.min_inversion_deadline(job)
            })
            .collect();
        assert_eq!(m, vec![12, INFINITE_TIME, 12, 20]);
    }

    #[test]
    fn exhausted_head_budget_pins_the_candidate_list() {
        // Head of ex1 at t=0 is task 3 with budget -2: no inversion allowed.
        let queue = queue_at_zero(&ex1());
        let ids: Vec<TaskId> = queue.candidates().iter().map(|&i| queue.jobs()[i].task_id).collect();
        assert_eq!(ids, vec![3]);
    }

    #[test]
    fn all_positive_budgets_admit_every_job() {
        let queue = queue_at_zero(&ex2());
        let ids: Vec<TaskId> = queue.candidates().iter().map(|&i| queue.jobs()[i].task_id).collect();
        assert_eq!(ids, vec![3, 1, 2]);
    }

    #[test]
    fn zero_budget_head_is_sole_candidate() {
        let mut queue = queue_at_zero(&ex2());
        queue.jobs[0].rib = 0;
        assert_eq!(queue.candidates().len(), 1);
    }

    #[test]
    fn depleted_mid_queue_budget_caps_candidates() {
        // Budgets (by deadline order): 2, 0, 3. The zero-budget job at
        // deadline 10 caps the list; the deadline-20 job would block it.
        let queue = ReadyQueue::from_jobs([
            Job { task_id: 1, release: 0, abs_deadline: 5, rel_deadline: 5, wcet: 2, remaining: 2, actual_exec: 2, rib: 2 },
            Job { task_id: 2, release: 0, abs_deadline: 10, rel_deadline: 10, wcet: 1, remaining: 1, actual_exec: 1, rib: 0 },
            Job { task_id: 3, release: 0, abs_deadline: 20, rel_deadline: 20, wcet: 1, remaining: 1, actual_exec: 1, rib: 3 },
        ]);
        let ids: Vec<TaskId> = queue.candidates().iter().map(|&i| queue.jobs()[i].task_id).collect();
        assert_eq!(ids, vec![1, 2]);
    }

    #[test]
    fn budgets_debited_only_below_running_deadline() {
        let mut queue = queue_at_zero(&ex2());
        // Run task 2 (deadline 20, last in queue) for 2 slots.
        queue.tick_budgets(2, 2);
        let rib = |id: TaskId| queue.jobs().iter().find(|j| j.task_id == id).unwrap().rib;
        assert_eq!(rib(1), 1);
        assert_eq!(rib(3), 1);
        assert_eq!(rib(2), 5);
        assert_eq!(queue.jobs().iter().find(|j| j.task_id == 2).unwrap().remaining, 0);
    }

    #[test]
    fn head_run_debits_nobody() {
        let mut queue = queue_at_zero(&ex2());
        let before: Vec<i64> = queue.jobs().iter().map(|j| j.rib).collect();
        queue.tick_budgets(0, 1);
        let after: Vec<i64> = queue.jobs().iter().map(|j| j.rib).collect();
        assert_eq!(before, after);
    }

    #[test]
    fn idle_run_debits_every_real_job() {
        let mut queue = queue_at_zero(&ex2());
        queue.insert(idle_job());
        let idle_idx = queue.jobs().len() - 1;
        queue.tick_budgets(idle_idx, 1);
        for j in queue.jobs() {
            if j.task_id != IDLE_TASK_ID {
                assert_eq!(j.rib, analyze(&ex2()).unwrap().wcib_of(j.task_id) - 1);
            }
        }
    }

    #[test]
    fn reclamation_feeds_longer_deadlines() {
        let mut queue = ReadyQueue::from_jobs([Job {
            task_id: 2,
            release: 0,
            abs_deadline: 20,
            rel_deadline: 20,
            wcet: 3,
            remaining: 3,
            actual_exec: 3,
            rib: 1,
        }]);
        let finished = Job {
            task_id: 1,
            release: 0,
            abs_deadline: 10,
            rel_deadline: 10,
            wcet: 5,
            remaining: 0,
            actual_exec: 3,
            rib: 0,
        };
        queue.reclaim_unused(&finished);
        assert_eq!(queue.jobs()[0].rib, 3);

        // Full-WCET completion transfers nothing.
        let full = Job { actual_exec: 5, ..finished };
        queue.reclaim_unused(&full);
        assert_eq!(queue.jobs()[0].rib, 3);

        // No lower-priority jobs: nothing changes.
        let mut shorter = ReadyQueue::from_jobs([Job {
            task_id: 3,
            release: 0,
            abs_deadline: 5,
            rel_deadline: 5,
            wcet: 1,
            remaining: 1,
            actual_exec: 1,
            rib: 2,
        }]);
        shorter.reclaim_unused(&finished);
        assert_eq!(shorter.jobs()[0].rib, 2);
    }

    #[test]
    fn vanilla_trace_of_ex2_is_the_unique_edf_schedule() {
        let ts = ex2();
        let analysis = analyze(&ts).unwrap();
        let out = simulate(&ts, &analysis, &wcet_config(Scheme::VanillaEdf, 1)).unwrap();
        assert_eq!(
            out.trace.row(0),
            &[3, 3, 1, 2, 2, 3, 3, 0, 0, 0, 3, 3, 1, 0, 0, 3, 3, 0, 0, 0]
        );
    }

    #[test]
    fn vanilla_consumes_no_decision_randomness() {
        let ts = ex2();
        let analysis = analyze(&ts).unwrap();
        let cfg = wcet_config(Scheme::VanillaEdf, 2);
        run_with_sources(&ts, &analysis, &cfg, &mut NoDraws, &mut NoDraws).unwrap();
    }

    #[test]
    fn scripted_base_run_reproduces_the_narrated_schedule() {
        // Base scheme on ex2, all jobs at WCET. Candidate picks: task 2 at
        // t=0 (index 2 of [3,1,2]), task 3 at t=2 (index 0 of [3,1]), task 1
        // at t=10 (index 1 of [3,1]).
        let ts = ex2();
        let analysis = analyze(&ts).unwrap();
        let cfg = wcet_config(Scheme::Base, 1);
        let mut script = Script::new(&[2, 0, 1]);
        let out = run_with_sources(&ts, &analysis, &cfg, &mut NoDraws, &mut script).unwrap();
        assert_eq!(
            out.trace.row(0),
            &[2, 2, 3, 3, 1, 3, 3, 0, 0, 0, 1, 3, 3, 0, 0, 3, 3, 0, 0, 0]
        );
        // The inversion interval at t=0 is min(C=2, vhat=3) = 2 slots.
        assert_eq!(out.decisions[0], DecisionRecord {
            time: 0,
            chosen: 2,
            until: 2,
            reason: DecisionReason::Completion,
        });
        // At t=10 picking task 1 runs one slot: next decision at 11.
        let d10 = out.decisions.iter().find(|d| d.time == 10).unwrap();
        assert_eq!((d10.chosen, d10.until), (1, 11));
    }

    #[test]
    fn budget_expiry_cuts_an_inversion_short() {
        // One long low-priority job behind a head with a small budget.
        let ts = Taskset::implicit([(1, 4), (6, 20)]);
        let analysis = analyze(&ts).unwrap();
        assert!(analysis.wcib[0] > 0 && (analysis.wcib[0] as Time) < 6);
        let cfg = wcet_config(Scheme::Base, 1);
        let mut script = Script::new(&[1]);
        let out = run_with_sources(&ts, &analysis, &cfg, &mut NoDraws, &mut script).unwrap();
        let first = out.decisions[0];
        assert_eq!(first.chosen, 2);
        assert_eq!(first.until, analysis.wcib[0] as Time);
        assert_eq!(first.reason, DecisionReason::BudgetExpiry);
    }

    #[test]
    fn degenerate_taskset_randomizes_nothing() {
        let ts = ex3();
        let analysis = analyze(&ts).unwrap();
        let vanilla = simulate(&ts, &analysis, &wcet_config(Scheme::VanillaEdf, 1)).unwrap();
        for scheme in Scheme::RANDOMIZED {
            let out = simulate(&ts, &analysis, &wcet_config(scheme, 1)).unwrap();
            assert_eq!(out.trace, vanilla.trace, "{scheme:?} must degenerate to EDF");
        }
    }

    #[test]
    fn identical_config_replays_identically() {
        let ts = ex2();
        let analysis = analyze(&ts).unwrap();
        let cfg = SchedulerConfig::new(
            Scheme::UnusedTimeReclamation,
            0xfeed,
            ExecPolicy::uniform_half(),
            50,
        );
        let a = simulate(&ts, &analysis, &cfg).unwrap();
        let b = simulate(&ts, &analysis, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.decisions, b.decisions);
    }

    #[test]
    fn exec_draws_are_scheme_independent() {
        // Same seed, different schemes: identical total demand per trace.
        let ts = ex2();
        let analysis = analyze(&ts).unwrap();
        let busy = |scheme| {
            let cfg = SchedulerConfig::new(scheme, 7, ExecPolicy::uniform_half(), 20);
            let out = simulate(&ts, &analysis, &cfg).unwrap();
            out.trace.flat().iter().filter(|&&s| s != IDLE_TASK_ID).count()
        };
        assert_eq!(busy(Scheme::VanillaEdf), busy(Scheme::UnusedTimeReclamation));
    }

    #[test]
    fn base_scheme_is_work_conserving() {
        let ts = ex2();
        let analysis = analyze(&ts).unwrap();
        let idle = |scheme| {
            let cfg = wcet_config(scheme, 4);
            let out = simulate(&ts, &analysis, &cfg).unwrap();
            out.trace.flat().iter().filter(|&&s| s == IDLE_TASK_ID).count()
        };
        // At WCET the slack per hyperperiod is fixed; Base may move idle
        // slots nowhere since it never idles while a job is ready.
        assert_eq!(idle(Scheme::VanillaEdf), idle(Scheme::Base));
        for seed in 0..20 {
            let cfg = SchedulerConfig::new(Scheme::Base, seed, ExecPolicy::Wcet, 2);
            let out = simulate(&ts, &analysis, &cfg).unwrap();
            assert_eq!(
                out.trace.flat().iter().filter(|&&s| s == IDLE_TASK_ID).count(),
                2 * 8,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn idle_scheme_produces_valid_no_miss_traces() {
        let ts = ex2();
        let analysis = analyze(&ts).unwrap();
        for seed in 0..50 {
            let cfg = SchedulerConfig::new(Scheme::IdleTime, seed, ExecPolicy::Wcet, 5);
            simulate(&ts, &analysis, &cfg).unwrap();
        }
    }

    #[test]
    fn unschedulable_job_reports_a_miss() {
        // Valid taskset (utilization 0.5) whose deadline is below its WCET.
        let ts = Taskset::new([(5, 10, 2)]);
        let analysis = analyze(&ts).unwrap();
        let err = simulate(&ts, &analysis, &wcet_config(Scheme::VanillaEdf, 1)).unwrap_err();
        match err {
            SimError::DeadlineMiss(report) => {
                assert_eq!(report.task_id, 1);
                assert_eq!(report.deadline, 2);
            }
            other => panic!("expected a deadline miss, got {other}"),
        }
    }

    #[test]
    fn invalid_taskset_rejected() {
        let ts = Taskset::implicit([(11, 10)]);
        let analysis = AnalysisResult {
            response_time: vec![11],
            wcib: vec![-1],
            busy_period_bound: 11,
            iterations: 0,
        };
        assert!(matches!(
            simulate(&ts, &analysis, &wcet_config(Scheme::VanillaEdf, 1)),
            Err(SimError::InvalidTaskset(_))
        ));
    }

    #[test]
    fn empty_taskset_idles_forever() {
        let ts = Taskset::implicit([]);
        let analysis = analyze(&ts).unwrap();
        for scheme in [Scheme::VanillaEdf, Scheme::IdleTime] {
            let out = simulate(&ts, &analysis, &wcet_config(scheme, 3)).unwrap();
            assert!(out.trace.flat().iter().all(|&s| s == IDLE_TASK_ID));
        }
    }

    #[test]
    fn decision_intervals_are_nonempty_and_contiguous() {
        let ts = ex1();
        let analysis = analyze(&ts).unwrap();
        let cfg = SchedulerConfig::new(
            Scheme::UnusedTimeReclamation,
            3,
            ExecPolicy::uniform_half(),
            10,
        );
        let out = simulate(&ts, &analysis, &cfg).unwrap();
        for d in &out.decisions {
            assert!(d.time < d.until);
        }
        for w in out.decisions.windows(2) {
            assert!(w[0].until <= w[1].time);
        }
    }
}
