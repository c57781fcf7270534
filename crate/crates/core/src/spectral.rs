//! Attacker-side trace analysis: occupancy extraction, magnitude spectra of
//! execution signals, peak detection, and the execution-range metric.
//!
//! A task's occupancy signal is the flattened 0/1 indicator of the slots it
//! occupies. Its spectrum is the one-sided magnitude spectrum of the
//! mean-removed signal, scaled so that the squared magnitudes sum to
//! `N * variance` (Parseval). A periodic task leaves a spectral line at
//! `1/period`, which is exactly what schedule obfuscation tries to bury.

use crate::task::{Task, TaskId, Time};
use crate::trace::ScheduleTrace;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Bin frequencies in cycles per slot, spanning `(0, 0.5]`.
    pub frequencies: Vec<f64>,
    /// Nonnegative magnitudes, one per frequency bin.
    pub magnitudes: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub frequency: f64,
    pub magnitude: f64,
}

/// Widest observed execution envelope of one task, relative to its releases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRange {
    /// Earliest slot offset (from release) at which the task appeared.
    pub first_offset: Time,
    /// Latest slot offset at which the task appeared.
    pub last_offset: Time,
    /// Range width `last_offset - first_offset`.
    pub width: Time,
    /// `width / deadline`, in `[0, 1]` for any deadline-respecting trace.
    pub ratio: f64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpectralError {
    #[error("signal too short for a spectrum ({len} samples)")]
    SignalTooShort { len: usize },
    #[error("task {task} never appears in the trace")]
    TaskAbsent { task: TaskId },
}

/// Flatten the trace row-major into a 0/1 occupancy signal for one task.
pub fn occupancy_signal(trace: &ScheduleTrace, task_id: TaskId) -> Vec<f64> {
    trace
        .flat()
        .iter()
        .map(|&s| if s == task_id { 1.0 } else { 0.0 })
        .collect()
}

/// One-sided magnitude spectrum of the mean-removed signal.
///
/// Bin `k` sits at `k/N` cycles per slot for `k = 1..=N/2`; removing the
/// mean removes the DC bin. Magnitudes fold in the conjugate half, so
/// `sum(magnitude^2) == N * variance(signal)` exactly.
pub fn dft_spectrum(signal: &[f64]) -> Result<Spectrum, SpectralError> {
    let n = signal.len();
    if n < 2 {
        return Err(SpectralError::SignalTooShort { len: n });
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&x| Complex::new(x - mean, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let mut frequencies = Vec::with_capacity(half);
    let mut magnitudes = Vec::with_capacity(half);
    for (k, bin) in buf.iter().enumerate().take(half + 1).skip(1) {
        // The Nyquist bin of an even-length signal has no conjugate twin.
        let fold = if n.is_multiple_of(2) && k == half { 1.0 } else { 2.0 };
        frequencies.push(k as f64 / n as f64);
        magnitudes.push((fold / n as f64).sqrt() * bin.norm());
    }
    Ok(Spectrum { frequencies, magnitudes })
}

/// The `count` largest strict local maxima, descending by magnitude with
/// ties broken toward lower frequency.
pub fn detect_peaks(spectrum: &Spectrum, count: usize) -> Vec<Peak> {
    let mags = &spectrum.magnitudes;
    let mut peaks: Vec<Peak> = (0..mags.len())
        .filter(|&i| {
            (i == 0 || mags[i] > mags[i - 1]) && (i + 1 == mags.len() || mags[i] > mags[i + 1])
        })
        .map(|i| Peak { frequency: spectrum.frequencies[i], magnitude: mags[i] })
        .collect();
    peaks.sort_by(|a, b| {
        b.magnitude
            .partial_cmp(&a.magnitude)
            .unwrap()
            .then(a.frequency.partial_cmp(&b.frequency).unwrap())
    });
    peaks.truncate(count);
    peaks
}

/// Execution range of `task` across every job window in the trace: the
/// envelope of first and last appearance offsets relative to each release.
pub fn execution_range(trace: &ScheduleTrace, task: &Task) -> Result<ExecutionRange, SpectralError> {
    let flat = trace.flat();
    let total = flat.len() as Time;
    let mut first: Option<Time> = None;
    let mut last: Option<Time> = None;
    let mut release: Time = 0;
    while release < total {
        let window_end = (release + task.deadline).min(total);
        for slot in release..window_end {
            if flat[slot as usize] == task.id {
                let offset = slot - release;
                first = Some(first.map_or(offset, |f| f.min(offset)));
                last = Some(last.map_or(offset, |l| l.max(offset)));
            }
        }
        release += task.period;
    }
    match (first, last) {
        (Some(first_offset), Some(last_offset)) => {
            let width = last_offset - first_offset;
            Ok(ExecutionRange {
                first_offset,
                last_offset,
                width,
                ratio: width as f64 / task.deadline as f64,
            })
        }
        _ => Err(SpectralError::TaskAbsent { task: task.id }),
    }
}

/// Geometric mean; zero whenever any factor is zero, `None` on empty input.
pub fn geometric_mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    if values.contains(&0.0) {
        return Some(0.0);
    }
    let log_mean = values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64;
    Some(log_mean.exp())
}
