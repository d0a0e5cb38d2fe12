//! Monte Carlo simulation of the nested testing procedure and an exact
//! enumeration oracle; both are independent checks of the closed forms.
//!
//! Reproducibility contract: every replication derives its generator from
//! `(seed, replication_index)` through a 64-bit mixing function, and all
//! replication statistics are accumulated as exact integers, so reports are
//! bit-identical across runs and across any number of worker threads.

use rayon::prelude::*;

use crate::dd::CompensatedSum;
use crate::error::{Error, Result};
use crate::strategies::{NestedStrategy, Prevalence};

/// Largest first pool accepted by [`enumerate_exact`] (2^20 patterns).
pub const MAX_ENUMERATION_POOL: i64 = 20;

/// Infection statuses of one initial pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Population {
    statuses: Vec<bool>,
}

impl Population {
    pub fn new(statuses: Vec<bool>) -> Self {
        Self { statuses }
    }

    /// Decode the low `len` bits of `pattern` (bit `i` = individual `i`).
    pub fn from_pattern(pattern: u64, len: usize) -> Self {
        Self { statuses: (0..len).map(|i| pattern >> i & 1 == 1).collect() }
    }

    pub fn len(&self) -> usize {
        self.statuses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statuses.is_empty()
    }

    fn any_infected(&self, range: std::ops::Range<usize>) -> bool {
        self.statuses[range].iter().any(|&x| x)
    }
}

/// Summary statistics of a seeded Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationReport {
    pub replications: u64,
    pub mean_tests_per_pool: f64,
    pub mean_tests_per_individual: f64,
    /// Unbiased sample variance of the per-pool test count.
    pub variance_tests_per_pool: f64,
    /// Mean tests in each stage, per pool; sums to `mean_tests_per_pool`.
    pub stage_counts: Vec<f64>,
    pub std_error_mean: f64,
    pub seed: u64,
}

/// Run the procedure on one population: stage 1 tests the whole pool, each
/// positive pool at stage `j` spawns `m_j / m_{j+1}` tests at stage `j + 1`,
/// and stage `k + 1` tests the individuals of positive stage-`k` pools.
///
/// Returns the total test count and the per-stage counts (length `k + 1`).
pub fn run_procedure(s: &NestedStrategy, pop: &Population) -> Result<(u64, Vec<u64>)> {
    let expected = s.first_pool();
    if pop.len() as i64 != expected {
        return Err(Error::LengthMismatch { got: pop.len(), expected });
    }
    let pools = s.pools();
    let k = pools.len();
    let mut per_stage = vec![0u64; k + 1];

    if k == 0 {
        // Individual testing of a population of one.
        per_stage[0] = 1;
        return Ok((1, per_stage));
    }

    per_stage[0] = 1;
    let mut positives: Vec<usize> = if pop.any_infected(0..pools[0] as usize) {
        vec![0]
    } else {
        Vec::new()
    };
    // Positive pools of stage j+1 are split into children of size m_{j+2}.
    for j in 1..k {
        let parent = pools[j - 1] as usize;
        let child = pools[j] as usize;
        let mut next = Vec::new();
        for &start in &positives {
            for c in 0..parent / child {
                let begin = start + c * child;
                per_stage[j] += 1;
                if pop.any_infected(begin..begin + child) {
                    next.push(begin);
                }
            }
        }
        positives = next;
    }
    // Stage k + 1: retest each individual of positive stage-k pools.
    per_stage[k] = positives.len() as u64 * pools[k - 1] as u64;

    Ok((per_stage.iter().sum(), per_stage))
}

/// SplitMix64: increment by the 64-bit golden ratio, then finalize with the
/// Stafford mix. Streams for distinct replications start at mixed offsets.
#[derive(Debug, Clone)]
struct SplitMix64 {
    state: u64,
}

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl SplitMix64 {
    fn for_replication(seed: u64, replication: u64) -> Self {
        let state = mix64(seed ^ 0xa0761d6478bd642f)
            .wrapping_add(mix64(replication.wrapping_mul(0xe7037ed1a0b428db)));
        Self { state }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 random bits.
    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[derive(Clone)]
struct Accumulator {
    sum_t: u128,
    sum_t2: u128,
    stage_sums: Vec<u128>,
}

impl Accumulator {
    fn new(stages: usize) -> Self {
        Self { sum_t: 0, sum_t2: 0, stage_sums: vec![0; stages] }
    }

    fn record(&mut self, total: u64, per_stage: &[u64]) {
        self.sum_t += total as u128;
        self.sum_t2 += (total as u128) * (total as u128);
        for (acc, &c) in self.stage_sums.iter_mut().zip(per_stage) {
            *acc += c as u128;
        }
    }

    fn merge(mut self, other: Accumulator) -> Accumulator {
        self.sum_t += other.sum_t;
        self.sum_t2 += other.sum_t2;
        for (a, b) in self.stage_sums.iter_mut().zip(other.stage_sums) {
            *a += b;
        }
        self
    }
}

/// Seeded Monte Carlo estimate of the per-pool test count distribution.
///
/// Replications are independent (counter-based generators) and integer
/// statistics merge exactly, so the report does not depend on how rayon
/// splits the work.
pub fn monte_carlo(
    s: &NestedStrategy,
    p: &Prevalence,
    replications: u64,
    seed: u64,
) -> SimulationReport {
    assert!(replications >= 1, "at least one replication required");
    let m1 = s.first_pool() as usize;
    let stages = s.stages() + 1;
    let pf = p.p();

    let acc = (0..replications)
        .into_par_iter()
        .fold(
            || Accumulator::new(stages),
            |mut acc, r| {
                let mut rng = SplitMix64::for_replication(seed, r);
                let statuses: Vec<bool> = (0..m1).map(|_| rng.next_f64() < pf).collect();
                let pop = Population::new(statuses);
                let (total, per_stage) =
                    run_procedure(s, &pop).expect("population length matches by construction");
                acc.record(total, &per_stage);
                acc
            },
        )
        .reduce(|| Accumulator::new(stages), Accumulator::merge);

    let n = replications as f64;
    let mean_tests_per_pool = acc.sum_t as f64 / n;
    let variance_tests_per_pool = if replications > 1 {
        // n * sum(T^2) - (sum T)^2 is exact in u128, and nonnegative.
        let numer = replications as u128 * acc.sum_t2 - acc.sum_t * acc.sum_t;
        numer as f64 / (n * (n - 1.0))
    } else {
        0.0
    };
    SimulationReport {
        replications,
        mean_tests_per_pool,
        mean_tests_per_individual: mean_tests_per_pool / s.first_pool() as f64,
        variance_tests_per_pool,
        stage_counts: acc.stage_sums.iter().map(|&x| x as f64 / n).collect(),
        std_error_mean: (variance_tests_per_pool / n).sqrt(),
        seed,
    }
}

/// Exact per-pool moments of the test count by full enumeration of all
/// `2^{m_1}` infection patterns, weighted by `p^infected * q^healthy`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMoments {
    /// `E T_k` per initial pool.
    pub mean: f64,
    /// `Var T_k` per initial pool.
    pub variance: f64,
    /// `E T_k^l` per initial pool for each stage (length `k + 1`).
    pub stage_means: Vec<f64>,
}

pub fn enumerate_exact(s: &NestedStrategy, p: &Prevalence) -> Result<ExactMoments> {
    let m1 = s.first_pool();
    if m1 > MAX_ENUMERATION_POOL {
        return Err(Error::TooLarge { got: m1, max: MAX_ENUMERATION_POOL });
    }
    let m1 = m1 as usize;
    let stages = s.stages() + 1;
    let pf = p.p();
    let ln_p = pf.ln();
    let neg_ln_q = p.neg_log_q();

    let mut mean = CompensatedSum::new();
    let mut second = CompensatedSum::new();
    let mut stage_sums = vec![CompensatedSum::new(); stages];

    for pattern in 0..1u64 << m1 {
        let infected = pattern.count_ones() as f64;
        // Log-space weight; p = 0 and p = 1 degenerate to point masses.
        let weight = if pf == 0.0 {
            if pattern == 0 { 1.0 } else { 0.0 }
        } else if pf == 1.0 {
            if pattern == (1u64 << m1) - 1 { 1.0 } else { 0.0 }
        } else {
            (infected * ln_p - (m1 as f64 - infected) * neg_ln_q).exp()
        };
        if weight == 0.0 {
            continue;
        }
        let pop = Population::from_pattern(pattern, m1);
        let (total, per_stage) = run_procedure(s, &pop)?;
        let t = total as f64;
        mean.add(weight * t);
        second.add(weight * t * t);
        for (acc, &c) in stage_sums.iter_mut().zip(&per_stage) {
            acc.add(weight * c as f64);
        }
    }

    let mean = mean.total();
    Ok(ExactMoments {
        mean,
        variance: second.total() - mean * mean,
        stage_means: stage_sums.iter().map(|a| a.total()).collect(),
    })
}
