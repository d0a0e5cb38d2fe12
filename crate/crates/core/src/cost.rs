//! Expected cost and closed-form variances of nested strategies.
//!
//! The cost of a strategy `(k, m)` at prevalence `p` is the expected number
//! of tests per individual,
//!
//! ```text
//! D_k(m, p) = 1/m_1 + (1 - q^{m_k}) + sum_{j=2..k} (1/m_j) (1 - q^{m_{j-1}})
//! ```
//!
//! with `q = 1 - p`. Stage 1 always runs one test per initial pool; every
//! later stage `l` runs `m_{l-1}/m_l` tests for each positive pool of stage
//! `l - 1`, and stage `k + 1` tests individuals (`m_{k+1} = 1`). Every
//! `1 - q^m` below goes through [`Prevalence::pool_infected`], which is
//! cancellation-free down to `p = 2^-51` and beyond.

use crate::error::{Error, Result};
use crate::strategies::{NestedStrategy, Prevalence};

/// Cost decomposition of a strategy at a fixed prevalence.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    /// Expected tests per individual, `D_k(m, p)`.
    pub cost: f64,
    /// Expected tests per individual in each stage `1..k+1`; sums to `cost`.
    pub stage_means: Vec<f64>,
    /// `Var T_k` per initial pool. Available in closed form for `k <= 2` and
    /// for geometric chains (constant pool-size ratio); `None` otherwise.
    pub variance_per_pool: Option<f64>,
}

impl CostReport {
    /// `Var T_k / m_1^2`, the variance of tests per individual.
    pub fn variance_per_individual(&self, s: &NestedStrategy) -> Option<f64> {
        let m1 = s.first_pool() as f64;
        self.variance_per_pool.map(|v| v / (m1 * m1))
    }
}

/// Dorfman's two-stage cost `(1 + n(1 - q^n)) / n`.
pub fn dorfman_cost(n: i64, p: &Prevalence) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidPoolSize(n));
    }
    Ok(1.0 / n as f64 + p.pool_infected(n as f64))
}

/// Expected cost and per-stage means of `s` at prevalence `p`.
///
/// Individual testing (`k = 0`) costs exactly 1 test per individual.
pub fn cost(s: &NestedStrategy, p: &Prevalence) -> CostReport {
    let k = s.stages();
    if k == 0 {
        return CostReport {
            cost: 1.0,
            stage_means: vec![1.0],
            variance_per_pool: Some(0.0),
        };
    }
    let pools = s.pools();
    let mut stage_means = Vec::with_capacity(k + 1);
    stage_means.push(1.0 / pools[0] as f64);
    for l in 2..=k + 1 {
        let m_l = if l <= k { pools[l - 1] as f64 } else { 1.0 };
        let m_prev = pools[l - 2] as f64;
        stage_means.push(p.pool_infected(m_prev) / m_l);
    }
    let cost = stage_means.iter().sum();

    let variance_per_pool = match k {
        1 => {
            // T_1 = 1 + m_1 (1 - phi_1): a scaled Bernoulli.
            let m1 = pools[0] as f64;
            Some(m1 * m1 * p.q_pow(m1) * p.pool_infected(m1))
        }
        2 => Some(variance_two_stage_unchecked(pools[0], pools[1], p)),
        _ if s.is_geometric() => {
            Some(variance_geometric(k as u32, s.last_pool(), p).expect("validated chain"))
        }
        _ => None,
    };

    CostReport { cost, stage_means, variance_per_pool }
}

/// `D_k` written as `1 + sum_i (1/m_i - q^{m_i}/m_{i+1})` with `m_{k+1} = 1`.
///
/// Algebraically identical to [`cost`]; kept as an independent evaluation
/// route for consistency checks.
pub fn cost_increment_form(s: &NestedStrategy, p: &Prevalence) -> f64 {
    let pools = s.pools();
    let k = pools.len();
    let mut total = 1.0;
    for i in 0..k {
        let m_i = pools[i] as f64;
        let m_next = if i + 1 < k { pools[i + 1] as f64 } else { 1.0 };
        total += 1.0 / m_i - p.q_pow(m_i) / m_next;
    }
    total
}

/// `D_k` in certified double-double arithmetic: the returned value carries
/// an absolute rounding-error bound valid for the whole evaluation.
///
/// `q = 1 - p` is formed exactly and powered by binary exponentiation, so
/// this route shares no code or identities with [`cost`]'s
/// `expm1`/`log1p`-based evaluation.
pub fn cost_compensated(pools: &[i64], p: f64) -> crate::dd::Certified {
    use crate::dd::Certified;
    let one = Certified::exact(1.0);
    if pools.is_empty() {
        return one;
    }
    let q = Certified::one_minus_exact(p);
    let k = pools.len();
    let infected = |m: i64| one - q.powi(m as u64);
    let mut total = one / Certified::from_i64(pools[0]);
    total = total + infected(pools[k - 1]);
    for j in 1..k {
        total = total + infected(pools[j - 1]) / Certified::from_i64(pools[j]);
    }
    total
}

/// Cost without the stage decomposition; used by enumeration-heavy callers.
pub(crate) fn cost_value(pools: &[i64], p: &Prevalence) -> f64 {
    let k = pools.len();
    if k == 0 {
        return 1.0;
    }
    let mut c = 1.0 / pools[0] as f64 + p.pool_infected(pools[k - 1] as f64);
    for j in 1..k {
        c += p.pool_infected(pools[j - 1] as f64) / pools[j] as f64;
    }
    c
}

/// Closed-form `Var T_2` for a two-stage chain `(m_1, m_2)`.
pub fn variance_two_stage(m1: i64, m2: i64, p: &Prevalence) -> Result<f64> {
    if m2 < 2 {
        return Err(Error::PoolTooSmall { stage: 2, size: m2 });
    }
    if m1 <= m2 {
        return Err(Error::NotDecreasing { prev: m1, next: m2 });
    }
    if m1 % m2 != 0 {
        return Err(Error::NonDivisible { larger: m1, smaller: m2 });
    }
    Ok(variance_two_stage_unchecked(m1, m2, p))
}

fn variance_two_stage_unchecked(m1: i64, m2: i64, p: &Prevalence) -> f64 {
    let (m1, m2) = (m1 as f64, m2 as f64);
    let q_m1 = p.q_pow(m1);
    let q_m2 = p.q_pow(m2);
    let i_m1 = p.pool_infected(m1);
    let i_m2 = p.pool_infected(m2);
    (m1 * m1) / (m2 * m2) * q_m1 * i_m1
        + m2 * m1 * q_m2 * i_m2
        + 2.0 * (m1 * m1) / m2 * q_m1 * i_m2
}

/// Closed-form `Var T_k` for the geometric chain `m_j = mu^{k-j+1}`.
///
/// ```text
/// Var T_k = mu^2 sum_{i=1..k} mu^{i-1} (1 - q^{m_i}) [ q^{m_i} + 2 sum_{j<i} q^{m_j} ]
/// ```
///
/// For `k = 1` this is the two-stage (Dorfman) variance, and for `k = 2` it
/// agrees with [`variance_two_stage`] on `(mu^2, mu)`.
pub fn variance_geometric(k: u32, mu: i64, p: &Prevalence) -> Result<f64> {
    if mu < 2 {
        return Err(Error::PoolTooSmall { stage: k as usize, size: mu });
    }
    if k == 0 {
        return Ok(0.0);
    }
    // m_1 = mu^k must stay in range.
    mu.checked_pow(k).ok_or(Error::Overflow(k))?;

    let muf = mu as f64;
    let q_pows: Vec<f64> = (1..=k)
        .map(|i| p.q_pow(muf.powi((k - i + 1) as i32)))
        .collect();
    let infected: Vec<f64> = (1..=k)
        .map(|i| p.pool_infected(muf.powi((k - i + 1) as i32)))
        .collect();

    let mut total = 0.0;
    let mut prefix = 0.0; // sum_{j < i} q^{m_j}
    let mut mu_pow = 1.0; // mu^{i-1}
    for i in 0..k as usize {
        total += mu_pow * infected[i] * (q_pows[i] + 2.0 * prefix);
        prefix += q_pows[i];
        mu_pow *= muf;
    }
    Ok(muf * muf * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategies::Prevalence;

    fn prev(p: f64) -> Prevalence {
        Prevalence::new(p).unwrap()
    }

    #[test]
    fn dorfman_examples() {
        assert!((dorfman_cost(3, &prev(0.0)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        // Frozen from exact enumeration over the 2^3 infection patterns.
        assert!((dorfman_cost(3, &prev(0.1)).unwrap() - 0.604333333333333).abs() < 1e-12);
        // Pooling threshold: D(3, 1 - 3^{-1/3}) = 1.
        let rho0 = 1.0 - 3f64.powf(-1.0 / 3.0);
        assert!((dorfman_cost(3, &prev(rho0)).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(dorfman_cost(1, &prev(0.1)), Err(Error::InvalidPoolSize(1)));
    }

    #[test]
    fn cost_examples() {
        let s = NestedStrategy::new(vec![27, 9, 3]).unwrap();
        let r = cost(&s, &prev(0.02));
        assert!((r.cost - 0.20).abs() < 5e-3);
        // Frozen from 50-digit evaluation of the defining formula.
        assert!((r.cost - 0.197977168940359).abs() < 1e-12);

        let s = NestedStrategy::new(vec![9, 3]).unwrap();
        assert!((cost(&s, &prev(0.0)).cost - 1.0 / 9.0).abs() < 1e-15);
        // Frozen from exact enumeration over the 2^9 infection patterns.
        let r = cost(&s, &prev(0.05));
        assert!((r.cost - 0.376986307869575).abs() < 1e-12);
        assert!((r.cost - 0.376986).abs() < 1e-6);
    }

    #[test]
    fn stage_means_sum_to_cost() {
        for pools in [vec![27, 9, 3], vec![12, 3], vec![8, 2], vec![5]] {
            let s = NestedStrategy::new(pools).unwrap();
            for pp in [0.0, 0.01, 0.3, 0.9, 1.0] {
                let r = cost(&s, &prev(pp));
                let sum: f64 = r.stage_means.iter().sum();
                assert!((r.cost - sum).abs() < 1e-12);
                assert_eq!(r.stage_means.len(), s.stages() + 1);
            }
        }
    }

    #[test]
    fn individual_testing_costs_one() {
        let r = cost(&NestedStrategy::individual(), &prev(0.37));
        assert_eq!(r.cost, 1.0);
        assert_eq!(r.stage_means, vec![1.0]);
        assert_eq!(r.variance_per_pool, Some(0.0));
    }

    #[test]
    fn cost_bounds_hold() {
        let s = NestedStrategy::new(vec![12, 6, 2]).unwrap();
        for pp in [0.0, 0.05, 0.5, 1.0] {
            let r = cost(&s, &prev(pp));
            let lower = 1.0 / 12.0;
            let upper = 1.0 + s.pools().iter().map(|&m| 1.0 / m as f64).sum::<f64>();
            assert!(r.cost >= lower - 1e-15 && r.cost <= upper + 1e-15);
        }
    }

    #[test]
    fn variance_two_stage_examples() {
        assert_eq!(variance_two_stage(4, 2, &prev(0.0)).unwrap(), 0.0);
        // Frozen from exact enumeration over the 2^4 patterns (E T^2 - (E T)^2).
        assert!((variance_two_stage(4, 2, &prev(0.5)).unwrap() - 2.484375).abs() < 1e-12);
        assert_eq!(variance_two_stage(4, 2, &prev(1.0)).unwrap(), 0.0);
        assert_eq!(
            variance_two_stage(6, 4, &prev(0.5)),
            Err(Error::NonDivisible { larger: 6, smaller: 4 })
        );
    }

    #[test]
    fn variance_geometric_examples() {
        assert_eq!(variance_geometric(3, 3, &prev(0.0)).unwrap(), 0.0);
        let v2 = variance_two_stage(4, 2, &prev(0.5)).unwrap();
        let vg = variance_geometric(2, 2, &prev(0.5)).unwrap();
        assert!((vg - v2).abs() < 1e-10);
        assert!((vg - 2.484375).abs() < 1e-12);
        // Frozen from exact enumeration of the (8,4,2) chain over 2^8 patterns.
        let v = variance_geometric(3, 2, &prev(0.3)).unwrap();
        assert!((v - 11.2354698757562).abs() < 1e-10);
        assert_eq!(variance_geometric(40, 3, &prev(0.3)), Err(Error::Overflow(40)));
    }

    #[test]
    fn variance_geometric_k1_is_dorfman_variance() {
        for mu in [3i64, 4, 7] {
            for pp in [0.05, 0.3, 0.8] {
                let p = prev(pp);
                let direct = {
                    let m = mu as f64;
                    m * m * p.q_pow(m) * p.pool_infected(m)
                };
                let v = variance_geometric(1, mu, &p).unwrap();
                assert!((v - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn k1_cost_is_dorfman() {
        for n in 2..=50i64 {
            for pp in [0.0, 0.01, 0.1, 0.5, 0.99, 1.0] {
                let p = prev(pp);
                let s = NestedStrategy::new(vec![n]).unwrap();
                assert_eq!(cost(&s, &p).cost, dorfman_cost(n, &p).unwrap());
            }
        }
    }
}
