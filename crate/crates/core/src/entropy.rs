//! Schedule-randomness metrics over hyperperiod traces.
//!
//! The headline metric is an approximate entropy over fixed-length slot
//! intervals: two intervals match when their Hamming dissimilarity is within
//! a threshold, per-slot match frequencies across the observed hyperperiods
//! turn into log-counts, and the average over all interval start slots
//! (scaled by the interval length) is the schedule entropy. The slot-wise
//! Shannon sum and the empirical full-row entropy are also provided; the
//! former equals the approximate entropy at `m = 1, pi = 0`, and the latter
//! is only meaningful for short hyperperiods observed many times.
//!
//! All logarithms are base 2; entropies are in bits.

use crate::task::TaskId;
use crate::trace::ScheduleTrace;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyParams {
    /// Interval length `m`, `1 <= m <= L`.
    pub m: usize,
    /// Dissimilarity threshold: intervals within this Hamming distance match.
    pub pi: usize,
}

impl EntropyParams {
    pub fn new(m: usize, pi: usize) -> Self {
        EntropyParams { m, pi }
    }

    /// Defaults for a hyperperiod of length `l`: `m = ceil(0.35 L)`,
    /// `pi = floor(0.1 L)`.
    pub fn for_period_len(l: usize) -> Self {
        EntropyParams {
            m: (0.35 * l as f64).ceil() as usize,
            pi: (0.1 * l as f64).floor() as usize,
        }
    }

    fn check(&self, l: usize) -> Result<(), EntropyError> {
        if self.m == 0 || self.m > l || self.pi > self.m {
            return Err(EntropyError::BadParams { m: self.m, pi: self.pi, l });
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EntropyError {
    #[error("vectors differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("interval (k={k}, t={t}, m={m}) out of range for a {kmax}x{l} trace")]
    IntervalOutOfRange { k: usize, t: usize, m: usize, kmax: usize, l: usize },
    #[error("invalid parameters m={m}, pi={pi} for hyperperiod length {l}")]
    BadParams { m: usize, pi: usize, l: usize },
    #[error("trace is empty")]
    EmptyTrace,
}

/// Hamming dissimilarity: the number of differing positions.
pub fn hamming(u: &[TaskId], v: &[TaskId]) -> Result<usize, EntropyError> {
    if u.len() != v.len() {
        return Err(EntropyError::LengthMismatch { left: u.len(), right: v.len() });
    }
    Ok(u.iter().zip(v).filter(|(a, b)| a != b).count())
}

/// The length-`m` interval starting at slot `t` of hyperperiod `k`
/// (0-based), wrapping modulo the hyperperiod length.
pub fn extract_interval(
    trace: &ScheduleTrace,
    k: usize,
    t: usize,
    m: usize,
) -> Result<Vec<TaskId>, EntropyError> {
    let l = trace.period_len();
    if k >= trace.hyperperiods() || t >= l || m == 0 || m > l {
        return Err(EntropyError::IntervalOutOfRange {
            k,
            t,
            m,
            kmax: trace.hyperperiods(),
            l,
        });
    }
    let row = trace.row(k);
    Ok((0..m).map(|j| row[(t + j) % l]).collect())
}

/// True when the two intervals starting at `t` differ in more than `pi`
/// positions. Bails out as soon as the threshold is crossed.
fn dissimilar(a: &[TaskId], b: &[TaskId], t: usize, m: usize, pi: usize) -> bool {
    let l = a.len();
    let mut mismatches = 0usize;
    for j in 0..m {
        let idx = (t + j) % l;
        if a[idx] != b[idx] {
            mismatches += 1;
            if mismatches > pi {
                return true;
            }
        }
    }
    false
}

/// Approximate schedule entropy over `K` observed hyperperiods.
///
/// For every start slot `t` and hyperperiod `k`, the match frequency
/// `C_t^k` is the fraction of hyperperiods (self included, so the logarithm
/// is always defined) whose interval at `t` lies within dissimilarity `pi`.
/// Slot estimates `eta_t = -(1/K) sum_k log2 C_t^k` are summed over all `L`
/// start slots and scaled by `1/m`.
pub fn approx_entropy(trace: &ScheduleTrace, params: &EntropyParams) -> Result<f64, EntropyError> {
    let k = trace.hyperperiods();
    let l = trace.period_len();
    if k == 0 || l == 0 {
        return Err(EntropyError::EmptyTrace);
    }
    params.check(l)?;
    let (m, pi) = (params.m, params.pi);

    // Collect per-slot estimates in index order and reduce sequentially:
    // float addition is not associative, and the result must not depend on
    // how the parallel work was split.
    let etas: Vec<f64> = (0..l)
        .into_par_iter()
        .map(|t| {
            let mut counts = vec![1u32; k];
            for a in 0..k {
                for b in a + 1..k {
                    if !dissimilar(trace.row(a), trace.row(b), t, m, pi) {
                        counts[a] += 1;
                        counts[b] += 1;
                    }
                }
            }
            let sum_log: f64 = counts.iter().map(|&c| (c as f64 / k as f64).log2()).sum();
            -sum_log / k as f64
        })
        .collect();
    let h = etas.iter().sum::<f64>() / m as f64;
    // Fully regular traces accumulate a negative zero (or rounding dust
    // just below it); the metric itself is nonnegative.
    Ok(if h <= 0.0 && h > -1e-9 { 0.0 } else { h })
}

/// Slot-wise Shannon upper approximation: the sum over slots of the plug-in
/// Shannon entropy of the empirical symbol distribution at that slot.
/// Ignores cross-slot structure entirely, which is why it only upper-bounds
/// the schedule's true entropy.
pub fn slot_shannon_entropy(trace: &ScheduleTrace) -> Result<f64, EntropyError> {
    let k = trace.hyperperiods();
    let l = trace.period_len();
    if k == 0 || l == 0 {
        return Err(EntropyError::EmptyTrace);
    }
    let mut total = 0.0;
    let mut counts: HashMap<TaskId, u32> = HashMap::new();
    for t in 0..l {
        counts.clear();
        for row in 0..k {
            *counts.entry(trace.symbol(row, t)).or_insert(0) += 1;
        }
        total += counts
            .values()
            .map(|&c| {
                let p = c as f64 / k as f64;
                -p * p.log2()
            })
            .sum::<f64>();
    }
    Ok(total)
}

/// Plug-in Shannon entropy of the empirical distribution over whole
/// hyperperiod rows. Only meaningful when the row space is small relative
/// to the number of observations.
pub fn empirical_true_entropy(trace: &ScheduleTrace) -> Result<f64, EntropyError> {
    let k = trace.hyperperiods();
    if k == 0 || trace.period_len() == 0 {
        return Err(EntropyError::EmptyTrace);
    }
    let mut counts: HashMap<&[TaskId], u32> = HashMap::new();
    for row in 0..k {
        *counts.entry(trace.row(row)).or_insert(0) += 1;
    }
    Ok(counts
        .values()
        .map(|&c| {
            let p = c as f64 / k as f64;
            -p * p.log2()
        })
        .sum())
}
