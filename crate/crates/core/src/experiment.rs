//! Reproducible experiment grids wiring generation, simulation, and the
//! randomness metrics together.
//!
//! Every grid cell derives its own RNG streams from the experiment seed, so
//! cells can run in parallel (or be re-run in isolation) and still produce
//! bit-identical outputs. Within a cell, every scheme simulates with the
//! same seed; execution-time draws come from a stream separate from
//! scheduling decisions, so schemes are compared on identical per-job
//! demands.

use crate::analysis::{analyze, AnalysisError};
use crate::entropy::{approx_entropy, empirical_true_entropy, EntropyError, EntropyParams};
use crate::rng::{derive_seed, SimRng};
use crate::sched::{simulate, ExecPolicy, Scheme, SchedulerConfig, SimError};
use crate::spectral::{
    detect_peaks, dft_spectrum, execution_range, geometric_mean, occupancy_signal, SpectralError,
};
use crate::task::{TaskId, Taskset, Time};
use crate::taskgen::{generate_taskset, short_periods, util_bucket, GenConfig, GenError};
use crate::trace::ScheduleTrace;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExperimentId {
    EntropyVsUtil,
    RangeRatio,
    Spectrum,
    Correlation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub id: ExperimentId,
    pub schemes: Vec<Scheme>,
    /// Utilization bucket indices of the grid.
    pub buckets: Vec<usize>,
    pub tasksets_per_bucket: usize,
    /// Observed hyperperiods per simulation.
    pub hyperperiods: u32,
    pub seed: u64,
    pub exec_policy: ExecPolicy,
}

impl ExperimentSpec {
    /// Desk-scale defaults: the full bucket grid at 25 tasksets per bucket
    /// and 100 observed hyperperiods.
    pub fn desk_scale(id: ExperimentId, seed: u64) -> Self {
        ExperimentSpec {
            id,
            schemes: vec![Scheme::VanillaEdf, Scheme::Base, Scheme::IdleTime,
                          Scheme::FineGrained, Scheme::UnusedTimeReclamation],
            buckets: (0..crate::taskgen::BUCKET_COUNT).collect(),
            tasksets_per_bucket: 25,
            hyperperiods: 100,
            seed,
            exec_policy: ExecPolicy::uniform_half(),
        }
    }

    /// Full-scale variant with 250 tasksets per bucket.
    pub fn full_scale(id: ExperimentId, seed: u64) -> Self {
        ExperimentSpec { tasksets_per_bucket: 250, ..Self::desk_scale(id, seed) }
    }

    /// Manifest embedding the spec so that any output row is replayable.
    pub fn manifest_json(&self) -> String {
        serde_json::to_string_pretty(&serde_json::json!({
            "spec": self,
            "version": env!("CARGO_PKG_VERSION"),
        }))
        .expect("manifest serialization cannot fail")
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("bucket {bucket}: {source}")]
    Gen { bucket: usize, source: GenError },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Trace(#[from] crate::trace::TraceError),
    #[error("only {got} valid tasksets, need at least {need}")]
    TooFewTasksets { got: usize, need: usize },
}

/// Mean approximate entropy of one (bucket, scheme) grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRow {
    pub bucket: usize,
    pub util_lo: f64,
    pub util_hi: f64,
    pub scheme: Scheme,
    pub mean: f64,
    pub stddev: f64,
    pub n: usize,
    /// Mean divided by the maximum mean across all cells of the experiment.
    pub normalized: f64,
}

/// Pooled geometric-mean execution-range ratio of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeRow {
    pub bucket: usize,
    pub util_lo: f64,
    pub util_hi: f64,
    pub scheme: Scheme,
    pub geomean_ratio: f64,
    pub n_ratios: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    /// Pearson correlation between true and approximate entropy, or null
    /// when either series has no variance.
    pub pearson: Option<f64>,
    pub n: usize,
    /// `(approx_entropy, empirical_true_entropy)` per taskset.
    pub points: Vec<(f64, f64)>,
}

/// Peak-recovery report for one (scheme, seed, task) of a spectrum run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub scheme: Scheme,
    pub seed_index: usize,
    pub task_id: TaskId,
    /// The task's true execution frequency `1/period`.
    pub fundamental: f64,
    /// Whether the fundamental ranks among the detected peaks.
    pub recovered: bool,
    pub peak_frequencies: Vec<f64>,
}

fn cell_tag(bucket: usize, index: usize) -> u64 {
    (bucket as u64) << 32 | index as u64
}

struct Cell {
    taskset: Taskset,
    sim_seed: u64,
}

/// Generate the per-bucket tasksets with their per-cell simulation seeds.
fn generate_cells(spec: &ExperimentSpec, bucket: usize) -> Result<Vec<Cell>, ExperimentError> {
    (0..spec.tasksets_per_bucket)
        .into_par_iter()
        .map(|i| {
            let tag = cell_tag(bucket, i);
            let mut rng = SimRng::new(derive_seed(spec.seed, 2 * tag));
            let taskset = generate_taskset(&GenConfig::bucket(bucket), &mut rng)
                .map_err(|source| ExperimentError::Gen { bucket, source })?;
            Ok(Cell { taskset, sim_seed: derive_seed(spec.seed, 2 * tag + 1) })
        })
        .collect()
}

fn sim_trace(
    cell: &Cell,
    scheme: Scheme,
    spec: &ExperimentSpec,
    common_len: Time,
) -> Result<ScheduleTrace, ExperimentError> {
    let analysis = analyze(&cell.taskset)?;
    let own_len = cell.taskset.hyperperiod().map_err(SimError::Task)?;
    debug_assert_eq!(common_len % own_len, 0);
    let reps = (common_len / own_len) as u32;
    let config = SchedulerConfig::new(
        scheme,
        cell.sim_seed,
        spec.exec_policy,
        spec.hyperperiods * reps,
    );
    let out = simulate(&cell.taskset, &analysis, &config)?;
    Ok(out.trace.rechunk(common_len as usize)?)
}

/// Mean approximate entropy per bucket and scheme over generated tasksets,
/// observed over a common hyperperiod window.
pub fn run_entropy_experiment(spec: &ExperimentSpec) -> Result<Vec<EntropyRow>, ExperimentError> {
    let common_len: Time = 100;
    let params = EntropyParams::for_period_len(common_len as usize);
    let mut rows = Vec::new();
    for &bucket in &spec.buckets {
        let cells = generate_cells(spec, bucket)?;
        for &scheme in &spec.schemes {
            let entropies: Vec<f64> = cells
                .par_iter()
                .map(|cell| {
                    let trace = sim_trace(cell, scheme, spec, common_len)?;
                    Ok(approx_entropy(&trace, &params)?)
                })
                .collect::<Result<_, ExperimentError>>()?;
            let n = entropies.len();
            let mean = entropies.iter().sum::<f64>() / n as f64;
            let var = entropies.iter().map(|h| (h - mean) * (h - mean)).sum::<f64>() / n as f64;
            let (util_lo, util_hi) = util_bucket(bucket);
            rows.push(EntropyRow {
                bucket,
                util_lo,
                util_hi,
                scheme,
                mean,
                stddev: var.sqrt(),
                n,
                normalized: f64::NAN,
            });
        }
    }
    let max_mean = rows.iter().map(|r| r.mean).fold(0.0f64, f64::max);
    for row in &mut rows {
        row.normalized = if max_mean > 0.0 { row.mean / max_mean } else { 0.0 };
    }
    Ok(rows)
}

/// Pooled geometric mean of per-task execution-range-to-deadline ratios per
/// bucket and scheme.
pub fn run_range_experiment(spec: &ExperimentSpec) -> Result<Vec<RangeRow>, ExperimentError> {
    let mut rows = Vec::new();
    for &bucket in &spec.buckets {
        let cells = generate_cells(spec, bucket)?;
        for &scheme in &spec.schemes {
            let ratios: Vec<Vec<f64>> = cells
                .par_iter()
                .map(|cell| {
                    let analysis = analyze(&cell.taskset)?;
                    let config = SchedulerConfig::new(
                        scheme,
                        cell.sim_seed,
                        spec.exec_policy,
                        spec.hyperperiods,
                    );
                    let out = simulate(&cell.taskset, &analysis, &config)?;
                    cell.taskset
                        .tasks()
                        .iter()
                        .map(|task| Ok(execution_range(&out.trace, task)?.ratio))
                        .collect::<Result<Vec<f64>, ExperimentError>>()
                })
                .collect::<Result<_, _>>()?;
            let pooled: Vec<f64> = ratios.into_iter().flatten().collect();
            let (util_lo, util_hi) = util_bucket(bucket);
            rows.push(RangeRow {
                bucket,
                util_lo,
                util_hi,
                scheme,
                geomean_ratio: geometric_mean(&pooled).unwrap_or(0.0),
                n_ratios: pooled.len(),
            });
        }
    }
    Ok(rows)
}

/// Pearson correlation between empirical true entropy and approximate
/// entropy over small-hyperperiod tasksets (short periods, forced L=20,
/// 3 to 5 tasks), simulated under the first scheme of the spec.
pub fn run_correlation_experiment(
    spec: &ExperimentSpec,
) -> Result<CorrelationResult, ExperimentError> {
    const REGIME_LEN: Time = 20;
    let scheme = spec.schemes.first().copied().unwrap_or(Scheme::UnusedTimeReclamation);
    let params = EntropyParams::for_period_len(REGIME_LEN as usize);
    let mut jobs = Vec::new();
    for &bucket in &spec.buckets {
        for i in 0..spec.tasksets_per_bucket {
            jobs.push((bucket, i));
        }
    }
    let points: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(bucket, i)| {
            let (util_lo, util_hi) = util_bucket(bucket);
            let config = GenConfig {
                n_tasks: (3, 5),
                util_lo,
                util_hi,
                periods: short_periods(),
                require_hyperperiod: Some(REGIME_LEN),
                max_attempts: 10_000,
            };
            let tag = cell_tag(bucket, i);
            let mut rng = SimRng::new(derive_seed(spec.seed, 2 * tag));
            let taskset = generate_taskset(&config, &mut rng)
                .map_err(|source| ExperimentError::Gen { bucket, source })?;
            let analysis = analyze(&taskset)?;
            let sim_config = SchedulerConfig::new(
                scheme,
                derive_seed(spec.seed, 2 * tag + 1),
                spec.exec_policy,
                spec.hyperperiods,
            );
            let out = simulate(&taskset, &analysis, &sim_config)?;
            let approx = approx_entropy(&out.trace, &params)?;
            let truth = empirical_true_entropy(&out.trace)?;
            Ok((approx, truth))
        })
        .collect::<Result<_, ExperimentError>>()?;
    if points.len() < 10 {
        return Err(ExperimentError::TooFewTasksets { got: points.len(), need: 10 });
    }
    Ok(CorrelationResult {
        pearson: pearson(&points),
        n: points.len(),
        points,
    })
}

/// Per-task spectral peak recovery for one concrete taskset: simulate each
/// scheme over `tasksets_per_bucket` seed replicates, detect the top peaks
/// of every task's occupancy spectrum, and check whether the task's
/// `1/period` line survived.
pub fn run_spectrum_experiment(
    spec: &ExperimentSpec,
    taskset: &Taskset,
    peak_count: usize,
) -> Result<Vec<SpectrumRow>, ExperimentError> {
    let analysis = analyze(taskset)?;
    let mut rows = Vec::new();
    for &scheme in &spec.schemes {
        for seed_index in 0..spec.tasksets_per_bucket.max(1) {
            let config = SchedulerConfig::new(
                scheme,
                derive_seed(spec.seed, seed_index as u64),
                spec.exec_policy,
                spec.hyperperiods,
            );
            let out = simulate(taskset, &analysis, &config)?;
            let bin_width = 1.0 / out.trace.flat().len() as f64;
            for task in taskset.tasks() {
                let spectrum = dft_spectrum(&occupancy_signal(&out.trace, task.id))?;
                let peaks = detect_peaks(&spectrum, peak_count);
                let fundamental = 1.0 / task.period as f64;
                let recovered = peaks
                    .iter()
                    .any(|p| (p.frequency - fundamental).abs() < bin_width / 2.0);
                rows.push(SpectrumRow {
                    scheme,
                    seed_index,
                    task_id: task.id,
                    fundamental,
                    recovered,
                    peak_frequencies: peaks.iter().map(|p| p.frequency).collect(),
                });
            }
        }
    }
    Ok(rows)
}

/// Pearson product-moment correlation; `None` when either series is
/// degenerate (fewer than two points or zero variance).
pub fn pearson(points: &[(f64, f64)]) -> Option<f64> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for &(x, y) in points {
        cov += (x - mean_x) * (y - mean_y);
        var_x += (x - mean_x) * (x - mean_x);
        var_y += (y - mean_y) * (y - mean_y);
    }
    if var_x <= 0.0 || var_y <= 0.0 {
        return None;
    }
    Some(cov / (var_x * var_y).sqrt())
}

pub fn entropy_rows_csv(rows: &[EntropyRow]) -> String {
    let mut out = String::from("bucket,util_lo,util_hi,scheme,mean_entropy,stddev,n,normalized\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.bucket, r.util_lo, r.util_hi, r.scheme.name(), r.mean, r.stddev, r.n, r.normalized
        ));
    }
    out
}

pub fn range_rows_csv(rows: &[RangeRow]) -> String {
    let mut out = String::from("bucket,util_lo,util_hi,scheme,geomean_ratio,n_ratios\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.bucket, r.util_lo, r.util_hi, r.scheme.name(), r.geomean_ratio, r.n_ratios
        ));
    }
    out
}

pub fn correlation_csv(result: &CorrelationResult) -> String {
    let mut out = String::from("approx_entropy,true_entropy\n");
    for (a, t) in &result.points {
        out.push_str(&format!("{a},{t}\n"));
    }
    out
}
