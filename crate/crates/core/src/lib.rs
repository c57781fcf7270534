//! Discrete-time uniprocessor EDF scheduling toolkit with randomized
//! schedule obfuscation.
//!
//! The crate simulates periodic constrained-deadline tasksets under vanilla
//! EDF and under a family of randomizing schemes that shuffle execution
//! order within offline-computed priority-inversion budgets, guaranteeing
//! that no deadline is ever missed for an EDF-schedulable taskset. On top of
//! the simulator sit the offline response-time analysis that produces those
//! budgets, entropy metrics quantifying how unpredictable the resulting
//! schedules are, spectral analysis of execution traces from an observer's
//! viewpoint, a synthetic workload generator, and reproducible experiment
//! grids.

pub mod analysis;
pub mod entropy;
pub mod experiment;
pub mod rng;
pub mod sched;
pub mod spectral;
pub mod task;
pub mod taskgen;
pub mod trace;

pub use analysis::{analyze, AnalysisResult};
pub use sched::{simulate, ExecPolicy, Scheme, SchedulerConfig, SimOutput};
pub use task::{Task, TaskId, Taskset, Time, IDLE_TASK_ID, INFINITE_TIME};
pub use trace::ScheduleTrace;
