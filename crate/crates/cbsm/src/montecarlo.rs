//! Monte Carlo trial engine.
//!
//! Each trial draws an initial logical Bell state uniformly, samples a full
//! outcome matrix, decides it with the hardware-efficient scheme, and tallies
//! the classification and cost. Trials are indexed; trial i derives its own
//! ChaCha stream from (seed, i), so results are independent of how trials are
//! partitioned across workers. Tallies hold integer counts and cost sums in
//! exact half/quarter units, making the parallel reduction exact and
//! order-independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::decision::{classify_outcome, decide_hardware_efficient, Category};
use crate::error::Result;
use crate::povm::build_povm_table;
use crate::sampler::{SamplerConsts, SamplerState};
use crate::types::{BellState, CodeParams, LossParams, OutcomePair};

/// Trials per work item; fixed so that partitioning cannot depend on the
/// worker count.
const CHUNK: u64 = 4096;

/// Raw counts from a batch of trials. Merging is exact integer addition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TrialTally {
    pub success: u64,
    pub x_err: u64,
    pub y_err: u64,
    pub z_err: u64,
    pub fail: u64,
    /// Sum of per-trial costs in half units (cost = this / 2).
    pub cost_half_sum: u64,
    /// Sum of squared per-trial costs in quarter units.
    pub cost_sq_quarter_sum: u64,
    pub n_trials: u64,
}

impl TrialTally {
    pub fn merge(mut self, other: TrialTally) -> TrialTally {
        self.success += other.success;
        self.x_err += other.x_err;
        self.y_err += other.y_err;
        self.z_err += other.z_err;
        self.fail += other.fail;
        self.cost_half_sum += other.cost_half_sum;
        self.cost_sq_quarter_sum += other.cost_sq_quarter_sum;
        self.n_trials += other.n_trials;
        self
    }

    fn record(&mut self, category: Category, cost_half: u64) {
        match category {
            Category::Success => self.success += 1,
            Category::XError => self.x_err += 1,
            Category::YError => self.y_err += 1,
            Category::ZError => self.z_err += 1,
            Category::Failure => self.fail += 1,
        }
        self.cost_half_sum += cost_half;
        self.cost_sq_quarter_sum += cost_half * cost_half;
        self.n_trials += 1;
    }
}

fn run_chunk(
    consts: &SamplerConsts,
    trials: std::ops::Range<u64>,
    seed: u64,
) -> Result<TrialTally> {
    let params = consts.params;
    let mut tally = TrialTally::default();
    let mut buf: Vec<OutcomePair> = Vec::with_capacity(params.n * params.m);
    for trial in trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let initial = BellState::from_index(rng.random_range(0..4));
        buf.clear();
        let mut state = SamplerState::new(consts, initial);
        while !state.finished() {
            let (pair, _) = state.step(&mut rng)?;
            buf.push(pair);
        }
        let (outcome, n_full, n_signonly) =
            decide_hardware_efficient(&buf, params.m, params.j);
        let cost_half = 2 * n_full as u64 + n_signonly as u64;
        tally.record(classify_outcome(initial, outcome), cost_half);
    }
    Ok(tally)
}

/// Runs trials with indices in `range`, deriving one RNG stream per trial.
/// Two runs over complementary ranges merge into exactly the tally of the
/// full range.
pub fn run_trial_range(
    params: &CodeParams,
    loss: LossParams,
    range: std::ops::Range<u64>,
    seed: u64,
) -> Result<TrialTally> {
    let table = build_povm_table(params.alpha, loss)?;
    let consts = SamplerConsts::new(params, &table);
    let start = range.start;
    let end = range.end;
    let n_chunks = (end - start).div_ceil(CHUNK);
    (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = start + c * CHUNK;
            let hi = (lo + CHUNK).min(end);
            run_chunk(&consts, lo..hi, seed)
        })
        .try_reduce(TrialTally::default, |a, b| Ok(a.merge(b)))
}

/// Runs `n_trials` Monte Carlo trials. Deterministic for fixed
/// (seed, n_trials, params), independent of the worker count.
pub fn run_trials(
    params: &CodeParams,
    loss: LossParams,
    n_trials: u64,
    seed: u64,
) -> Result<TrialTally> {
    run_trial_range(params, loss, 0..n_trials, seed)
}

/// Point estimate with a 95% confidence half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub ci95: f64,
}

/// Derived statistics of a tally.
///
/// Proportion intervals use the normal approximation; zero-count categories
/// fall back to the rule of three (3/n as the upper bound).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateSet {
    pub p_i: Estimate,
    pub p_x: Estimate,
    pub p_y: Estimate,
    pub p_z: Estimate,
    pub p_fail: Estimate,
    pub c_exp: Estimate,
    pub n_trials: u64,
    /// Set when fewer than 100 trials back these numbers.
    pub undersampled: bool,
}

fn proportion(count: u64, n: u64) -> Estimate {
    let nf = n as f64;
    let p = count as f64 / nf;
    let ci95 = if count == 0 || count == n {
        3.0 / nf
    } else {
        1.96 * (p * (1.0 - p) / nf).sqrt()
    };
    Estimate { value: p, ci95 }
}

/// Turns counts into estimates with confidence intervals.
pub fn estimate(tally: &TrialTally) -> EstimateSet {
    let n = tally.n_trials.max(1);
    let nf = n as f64;
    let cost_mean = tally.cost_half_sum as f64 / (2.0 * nf);
    let cost_sq_mean = tally.cost_sq_quarter_sum as f64 / (4.0 * nf);
    let var = if n > 1 {
        ((cost_sq_mean - cost_mean * cost_mean) * nf / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    EstimateSet {
        p_i: proportion(tally.success, n),
        p_x: proportion(tally.x_err, n),
        p_y: proportion(tally.y_err, n),
        p_z: proportion(tally.z_err, n),
        p_fail: proportion(tally.fail, n),
        c_exp: Estimate { value: cost_mean, ci95: 1.96 * (var / nf).sqrt() },
        n_trials: tally.n_trials,
        undersampled: tally.n_trials < 100,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: usize, alpha: f64, j: usize) -> CodeParams {
        CodeParams::new(n, m, alpha, j).unwrap()
    }

    #[test]
    fn lossless_trials_have_no_errors() {
        let t = run_trials(&params(3, 3, 1.0, 1), LossParams::LOSSLESS, 20_000, 7).unwrap();
        assert_eq!(t.x_err + t.y_err + t.z_err, 0);
        assert_eq!(t.n_trials, 20_000);
        assert_eq!(t.success + t.fail, 20_000);
    }

    #[test]
    fn equal_rates_forbid_letter_errors() {
        let t = run_trials(
            &params(3, 3, 1.2, 1),
            LossParams::symmetric(0.95).unwrap(),
            20_000,
            11,
        )
        .unwrap();
        assert_eq!(t.x_err, 0);
        assert_eq!(t.y_err, 0);
    }

    #[test]
    fn range_merge_equals_full_run() {
        let p = params(3, 3, 1.3, 2);
        let loss = LossParams::new(0.92, 0.97).unwrap();
        let full = run_trials(&p, loss, 9000, 123).unwrap();
        let a = run_trial_range(&p, loss, 0..4000, 123).unwrap();
        let b = run_trial_range(&p, loss, 4000..9000, 123).unwrap();
        assert_eq!(a.merge(b), full);
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let p = params(3, 5, 1.4, 1);
        let loss = LossParams::new(0.9, 0.99).unwrap();
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let t1 = pool1.install(|| run_trials(&p, loss, 12_000, 5)).unwrap();
        let t8 = pool8.install(|| run_trials(&p, loss, 12_000, 5)).unwrap();
        assert_eq!(t1, t8);
    }

    #[test]
    fn estimates_against_exact_single_bsm() {
        // n = m = 1: the tally must reproduce the exact physical rates.
        let alpha = 1.0;
        let loss = LossParams::new(0.99, 0.99 * (-1.0f64 / 22.0).exp()).unwrap();
        let table = build_povm_table(alpha, loss).unwrap();
        let exact = crate::physbsm::exact_physical_rates(&table);
        let t = run_trials(&params(1, 1, alpha, 1), loss, 1_000_000, 99).unwrap();
        let est = estimate(&t);
        let n = est.n_trials as f64;
        for (got, want) in [
            (est.p_i, exact.p_i),
            (est.p_x, exact.p_x),
            (est.p_y, exact.p_y),
            (est.p_z, exact.p_z),
            (est.p_fail, exact.p_fail),
        ] {
            let se = (want * (1.0 - want) / n).sqrt();
            assert!(
                (got.value - want).abs() <= 4.0 * se + 3.0 / n,
                "estimate {} vs exact {want}",
                got.value
            );
        }
    }

    #[test]
    fn zero_count_uses_rule_of_three() {
        let tally = TrialTally {
            success: 1000,
            x_err: 0,
            y_err: 0,
            z_err: 0,
            fail: 0,
            cost_half_sum: 2000,
            cost_sq_quarter_sum: 4000,
            n_trials: 1000,
        };
        let est = estimate(&tally);
        assert_eq!(est.p_i.value, 1.0);
        assert_eq!(est.p_x.ci95, 3.0 / 1000.0);
        assert_eq!(est.p_i.ci95, 3.0 / 1000.0);
        assert!(!est.undersampled);
        assert_eq!(est.c_exp.value, 1.0);
    }

    #[test]
    fn undersampled_flag() {
        let t = run_trials(&params(1, 1, 1.0, 1), LossParams::LOSSLESS, 50, 1).unwrap();
        assert!(estimate(&t).undersampled);
    }
}
