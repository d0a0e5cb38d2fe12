//! Procedure-structure identities and reproducibility of the Monte Carlo.

mod common;

use common::TestRng;
use pooltest::cost::cost;
use pooltest::simulate::{monte_carlo, run_procedure, Population};
use pooltest::{NestedStrategy, Prevalence};

fn prev(p: f64) -> Prevalence {
    Prevalence::new(p).unwrap()
}

/// Per-stage counts equal the indicator products computed directly from the
/// infection bits: stage l runs m_{l-1}/m_l tests per infected stage-(l-1)
/// pool, and a sub-pool is never tested unless its parent tested positive.
#[test]
fn stage_counts_match_indicator_products() {
    let mut rng = TestRng::new(0xbead);
    let strategies = [
        vec![27, 9, 3],
        vec![12, 6, 2],
        vec![16, 4, 2],
        vec![8, 2],
        vec![5],
    ];
    for pools in &strategies {
        let s = NestedStrategy::new(pools.clone()).unwrap();
        let m1 = s.first_pool() as usize;
        let k = s.stages();
        for _ in 0..200 {
            let bits: Vec<bool> = (0..m1).map(|_| rng.uniform() < 0.25).collect();
            let pop = Population::new(bits.clone());
            let (total, per_stage) = run_procedure(&s, &pop).unwrap();

            assert_eq!(per_stage[0], 1);
            for l in 2..=k + 1 {
                let m_prev = pools[l - 2] as usize;
                let m_l = if l <= k { pools[l - 1] as usize } else { 1 };
                let infected_chunks = bits
                    .chunks(m_prev)
                    .filter(|chunk| chunk.iter().any(|&x| x))
                    .count() as u64;
                let expected = infected_chunks * (m_prev / m_l) as u64;
                assert_eq!(
                    per_stage[l - 1],
                    expected,
                    "stage {l} of {s} disagrees with the indicator form"
                );
            }
            assert_eq!(total, per_stage.iter().sum::<u64>());
        }
    }
}

/// Equal seeds give bit-identical reports; so do different rayon pool sizes.
#[test]
fn reports_are_bit_identical_across_thread_counts() {
    let s = NestedStrategy::new(vec![9, 3]).unwrap();
    let p = prev(0.05);
    let serial = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| monte_carlo(&s, &p, 100_000, 99));
    let wide = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| monte_carlo(&s, &p, 100_000, 99));
    assert_eq!(serial, wide);
    let again = monte_carlo(&s, &p, 100_000, 99);
    assert_eq!(serial, again);
}

/// With 1e6 replications the empirical mean lands within 4 standard errors
/// of the closed form in at least 99 of 100 seeded trials.
#[test]
fn monte_carlo_consistency_over_seeds() {
    let s = NestedStrategy::new(vec![9, 3]).unwrap();
    let p = prev(0.05);
    let expected = cost(&s, &p).cost * 9.0;
    let mut hits = 0;
    for seed in 0..100u64 {
        let r = monte_carlo(&s, &p, 1_000_000, seed);
        if (r.mean_tests_per_pool - expected).abs() <= 4.0 * r.std_error_mean {
            hits += 1;
        }
    }
    assert!(hits >= 99, "only {hits}/100 trials within 4 standard errors");
}

/// Stage counts always sum to the per-pool mean.
#[test]
fn stage_counts_sum_to_mean() {
    let s = NestedStrategy::new(vec![12, 6, 2]).unwrap();
    for (pp, seed) in [(0.02, 3u64), (0.2, 4), (0.7, 5)] {
        let r = monte_carlo(&s, &prev(pp), 50_000, seed);
        let sum: f64 = r.stage_counts.iter().sum();
        assert!((sum - r.mean_tests_per_pool).abs() < 1e-9);
        assert_eq!(
            r.mean_tests_per_individual,
            r.mean_tests_per_pool / 12.0
        );
    }
}
