//! Synthetic workload generation: utilization splitting over a simplex and
//! period/WCET construction with a common hyperperiod.
//!
//! Task utilizations come from the UUniFast recurrence, which draws a
//! utilization vector uniformly from the simplex summing to the requested
//! total. Periods are drawn from a fixed set of divisors of a common
//! hyperperiod, WCETs are the rounded-up product of utilization and period,
//! and tasksets whose rounded utilization breaks the EDF bound are rejected
//! and redrawn.

use crate::rng::SimRng;
use crate::task::{Taskset, Time};
use num_rational::Ratio;
use thiserror::Error;

/// Utilization bucket `i` of the synthetic grid: `[0.01 + 0.1 i, 0.1 + 0.1 i]`.
pub const BUCKET_COUNT: usize = 9;

pub fn util_bucket(i: usize) -> (f64, f64) {
    assert!(i < BUCKET_COUNT, "bucket index {i} out of range");
    (0.01 + 0.1 * i as f64, 0.1 + 0.1 * i as f64)
}

/// Periods above 10 dividing the common hyperperiod of 100.
pub fn default_periods() -> Vec<Time> {
    vec![20, 25, 50, 100]
}

/// Short periods dividing 20, for regimes where the full row distribution
/// of a hyperperiod must stay estimable.
pub fn short_periods() -> Vec<Time> {
    vec![2, 4, 5, 10, 20]
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    /// Inclusive range for the task count, drawn uniformly per taskset.
    pub n_tasks: (u32, u32),
    /// Total utilization is drawn uniformly from `[util_lo, util_hi]`.
    pub util_lo: f64,
    pub util_hi: f64,
    /// Candidate periods, drawn uniformly per task.
    pub periods: Vec<Time>,
    /// Require this exact hyperperiod (rejecting draws that land short).
    pub require_hyperperiod: Option<Time>,
    /// Rejection budget before generation fails.
    pub max_attempts: u32,
}

impl GenConfig {
    pub fn bucket(i: usize) -> Self {
        let (lo, hi) = util_bucket(i);
        GenConfig {
            n_tasks: (3, 10),
            util_lo: lo,
            util_hi: hi,
            periods: default_periods(),
            require_hyperperiod: None,
            max_attempts: 10_000,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error(
        "no schedulable taskset found in bucket [{util_lo}, {util_hi}] after {attempts} attempts"
    )]
    RejectionBudgetExhausted { util_lo: f64, util_hi: f64, attempts: u32 },
    #[error("invalid generation config: {0}")]
    BadConfig(String),
}

/// Split `total_util` across `n` tasks, uniformly over the simplex.
///
/// The running sum shrinks by a factor `r^(1/(n-i))` with `r` uniform on
/// `(0,1)` at each step; the differences are the per-task utilizations.
pub fn uunifast(n: usize, total_util: f64, rng: &mut SimRng) -> Vec<f64> {
    assert!(n >= 1 && total_util > 0.0);
    let mut utils = Vec::with_capacity(n);
    let mut sum = total_util;
    for i in 1..n {
        // r must stay off 0 or the tail utilizations collapse.
        let r = loop {
            let r = rng.next_f64();
            if r > 0.0 {
                break r;
            }
        };
        let next = sum * r.powf(1.0 / (n - i) as f64);
        utils.push(sum - next);
        sum = next;
    }
    utils.push(sum);
    utils
}

/// Draw one EDF-schedulable implicit-deadline taskset under `config`.
pub fn generate_taskset(config: &GenConfig, rng: &mut SimRng) -> Result<Taskset, GenError> {
    let (n_lo, n_hi) = config.n_tasks;
    if n_lo == 0 || n_lo > n_hi {
        return Err(GenError::BadConfig(format!("bad task count range [{n_lo}, {n_hi}]")));
    }
    if config.periods.is_empty() {
        return Err(GenError::BadConfig("empty period set".into()));
    }
    if !(config.util_lo > 0.0 && config.util_lo <= config.util_hi && config.util_hi <= 1.0) {
        return Err(GenError::BadConfig(format!(
            "bad utilization interval [{}, {}]",
            config.util_lo, config.util_hi
        )));
    }
    for _ in 0..config.max_attempts {
        let n = rng.gen_range(n_lo as u64, n_hi as u64) as usize;
        let total = config.util_lo + rng.next_f64() * (config.util_hi - config.util_lo);
        let utils = uunifast(n, total, rng);
        let ts = Taskset::implicit(utils.iter().map(|&u| {
            let period = config.periods[rng.gen_index(config.periods.len())];
            let wcet = ((u * period as f64).ceil() as Time).max(1);
            (wcet, period)
        }));
        if ts.utilization() > Ratio::new(1, 1) {
            continue;
        }
        if let Some(required) = config.require_hyperperiod {
            if ts.hyperperiod() != Ok(required) {
                continue;
            }
        }
        return Ok(ts);
    }
    Err(GenError::RejectionBudgetExhausted {
        util_lo: config.util_lo,
        util_hi: config.util_hi,
        attempts: config.max_attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uunifast_single_task_gets_everything() {
        let mut rng = SimRng::new(1);
        assert_eq!(uunifast(1, 0.6, &mut rng), vec![0.6]);
    }

    #[test]
    fn uunifast_sums_to_total_with_positive_entries() {
        let mut rng = SimRng::new(2);
        for n in [2usize, 3, 7, 10] {
            for _ in 0..200 {
                let utils = uunifast(n, 0.75, &mut rng);
                assert_eq!(utils.len(), n);
                assert!(utils.iter().all(|&u| u > 0.0));
                let sum: f64 = utils.iter().sum();
                assert!((sum - 0.75).abs() < 1e-12);
            }
        }
    }

    /// Compare the first coordinate of n=3 draws against uniform simplex
    /// sampling by rejection (draw two uniforms, keep when they fit).
    #[test]
    fn uunifast_matches_rejection_sampled_simplex() {
        const DRAWS: usize = 100_000;
        const BINS: usize = 10;
        let mut rng = SimRng::new(0xABCD);
        let mut uuni = [0u32; BINS];
        for _ in 0..DRAWS {
            let u = uunifast(3, 0.6, &mut rng);
            uuni[((u[0] / 0.6) * BINS as f64) as usize % BINS] += 1;
        }
        let mut oracle = [0u32; BINS];
        let mut accepted = 0;
        while accepted < DRAWS {
            let a = rng.next_f64();
            let b = rng.next_f64();
            if a + b <= 1.0 {
                oracle[(a * BINS as f64) as usize % BINS] += 1;
                accepted += 1;
            }
        }
        // Two-sample chi-square on the binned first coordinate.
        let mut chi2 = 0.0f64;
        for i in 0..BINS {
            let (o, e) = (uuni[i] as f64, oracle[i] as f64);
            let expected = (o + e) / 2.0;
            chi2 += (o - expected) * (o - expected) / expected;
            chi2 += (e - expected) * (e - expected) / expected;
        }
        // 9 degrees of freedom; 27.9 is the 0.999 quantile.
        assert!(chi2 < 27.9, "chi2 = {chi2}, uuni {uuni:?} vs oracle {oracle:?}");
    }

    #[test]
    fn generated_tasksets_fit_the_grid() {
        let mut rng = SimRng::new(42);
        for bucket in 0..BUCKET_COUNT {
            let config = GenConfig::bucket(bucket);
            for _ in 0..20 {
                let ts = generate_taskset(&config, &mut rng).unwrap();
                assert!(ts.utilization() <= Ratio::new(1, 1));
                assert!(100 % ts.hyperperiod().unwrap() == 0);
                let n = ts.len() as u32;
                assert!((3..=10).contains(&n));
                assert!(ts.validate().is_empty());
            }
        }
    }

    #[test]
    fn generation_is_reproducible() {
        let config = GenConfig { n_tasks: (3, 3), ..GenConfig::bucket(4) };
        let a = generate_taskset(&config, &mut SimRng::new(9)).unwrap();
        let b = generate_taskset(&config, &mut SimRng::new(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn impossible_bucket_exhausts_its_budget() {
        let config = GenConfig {
            n_tasks: (10, 10),
            util_lo: 0.999,
            util_hi: 1.0,
            periods: vec![2],
            require_hyperperiod: None,
            max_attempts: 50,
        };
        // Ten tasks on period 2 need ceil-inflated utilization > 1.
        let err = generate_taskset(&config, &mut SimRng::new(3)).unwrap_err();
        assert!(matches!(err, GenError::RejectionBudgetExhausted { .. }));
    }

    #[test]
    fn required_hyperperiod_is_enforced() {
        let config = GenConfig {
            n_tasks: (3, 5),
            util_lo: 0.3,
            util_hi: 0.5,
            periods: short_periods(),
            require_hyperperiod: Some(20),
            max_attempts: 10_000,
        };
        let mut rng = SimRng::new(77);
        for _ in 0..30 {
            let ts = generate_taskset(&config, &mut rng).unwrap();
            assert_eq!(ts.hyperperiod().unwrap(), 20);
        }
    }
}
