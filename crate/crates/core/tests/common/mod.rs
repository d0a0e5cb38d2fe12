#![allow(dead_code)]

//! Shared helpers for the integration suites: a small deterministic RNG and
//! random nested-strategy generation.

use pooltest::NestedStrategy;

/// SplitMix64, enough randomness for seeded test sampling.
pub struct TestRng {
    state: u64,
}

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn int(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.next_u64() % (hi - lo + 1)
    }

    /// Random valid strategy built from multipliers in {2..=5}, k in 1..=max_k.
    pub fn strategy(&mut self, max_k: u64) -> NestedStrategy {
        let k = self.int(1, max_k) as usize;
        let mut pools = vec![0i64; k];
        let mut acc = 1i64;
        for j in 0..k {
            acc *= self.int(2, 5) as i64;
            pools[k - 1 - j] = acc;
        }
        NestedStrategy::new(pools).expect("multiplier products are valid chains")
    }
}

/// Every nested strategy with first pool at most `max_m1`, including k = 0.
pub fn all_strategies_up_to(max_m1: i64) -> Vec<NestedStrategy> {
    fn descend(out: &mut Vec<Vec<i64>>, chain: &mut Vec<i64>) {
        out.push(chain.clone());
        let last = *chain.last().unwrap();
        for d in 2..last {
            if last % d == 0 {
                chain.push(d);
                descend(out, chain);
                chain.pop();
            }
        }
    }
    let mut chains = vec![Vec::new()];
    for m1 in 2..=max_m1 {
        descend(&mut chains, &mut vec![m1]);
    }
    chains
        .into_iter()
        .map(|c| NestedStrategy::new(c).unwrap())
        .collect()
}
