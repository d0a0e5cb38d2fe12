//! Nested strategies and the four canonical strategy families.
//!
//! A nested strategy is a chain of pool sizes `(m_1, ..., m_k)`, each a
//! multiple of the next, with the convention `m_{k+1} = 1`. Positive pools
//! at stage `j` are split into pools of size `m_{j+1}`; stage `k + 1` tests
//! the individuals of positive stage-`k` pools. The empty chain (`k = 0`)
//! is individual testing.

use crate::error::{Error, Result};

/// Largest supported number of pooled stages: `3^k` must fit in `i64`.
pub const MAX_STAGES: u32 = 39;

/// An infection probability together with cancellation-safe derived values.
///
/// `neg_log_q = -ln(1 - p)` is computed through `ln_1p`, so it stays accurate
/// (relative error `O(eps)`) even for `p` far below `1e-8`, where `1 - p`
/// rounds to `1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prevalence {
    p: f64,
    q: f64,
    ln_q: f64,
}

impl Prevalence {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::OutOfRange {
                value: p,
                context: "prevalence must lie in [0, 1]",
            });
        }
        Ok(Self {
            p,
            q: 1.0 - p,
            ln_q: (-p).ln_1p(),
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `q = 1 - p`.
    pub fn q(&self) -> f64 {
        self.q
    }

    /// `|ln q|`, evaluated without cancellation.
    pub fn neg_log_q(&self) -> f64 {
        -self.ln_q
    }

    /// `q^m = exp(m ln q)`.
    pub fn q_pow(&self, m: f64) -> f64 {
        debug_assert!(m > 0.0);
        (m * self.ln_q).exp()
    }

    /// `1 - q^m = -expm1(m ln q)`, the probability that a pool of `m` is infected.
    ///
    /// Direct powering of `q` loses every significant digit once `p` drops
    /// below ~1e-8; this form keeps full relative accuracy.
    pub fn pool_infected(&self, m: f64) -> f64 {
        debug_assert!(m > 0.0);
        -(m * self.ln_q).exp_m1()
    }
}

/// A validated nested strategy. `k = 0` (empty chain) is individual testing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct NestedStrategy {
    pools: Vec<i64>,
}

impl NestedStrategy {
    /// Validate a pool-size chain: every entry at least 2, strictly
    /// decreasing, and each entry an integer multiple of the next
    /// (the last entry must be a multiple of `m_{k+1} = 1`, which is free).
    pub fn new(pools: impl Into<Vec<i64>>) -> Result<Self> {
        let pools = pools.into();
        for (j, &m) in pools.iter().enumerate() {
            if m < 2 {
                return Err(Error::PoolTooSmall { stage: j + 1, size: m });
            }
        }
        for w in pools.windows(2) {
            let (prev, next) = (w[0], w[1]);
            if prev <= next {
                return Err(Error::NotDecreasing { prev, next });
            }
            if prev % next != 0 {
                return Err(Error::NonDivisible { larger: prev, smaller: next });
            }
        }
        Ok(Self { pools })
    }

    /// The `k = 0` strategy: no pooling, every individual tested once.
    pub fn individual() -> Self {
        Self { pools: Vec::new() }
    }

    /// Number of pooled stages `k`.
    pub fn stages(&self) -> usize {
        self.pools.len()
    }

    pub fn pools(&self) -> &[i64] {
        &self.pools
    }

    /// `m_1`, or 1 for individual testing.
    pub fn first_pool(&self) -> i64 {
        self.pools.first().copied().unwrap_or(1)
    }

    /// `m_k`, or 1 for individual testing.
    pub fn last_pool(&self) -> i64 {
        self.pools.last().copied().unwrap_or(1)
    }

    /// The multipliers `pi_j = m_{k-j+1} / m_{k-j+2}`, indexed from the last
    /// stage backwards, so `pi_1 = m_k` and `pi_k = m_1 / m_2`.
    pub fn multipliers(&self) -> Result<Multipliers> {
        if self.pools.is_empty() {
            return Err(Error::EmptyStrategy);
        }
        let k = self.pools.len();
        let mut pi = Vec::with_capacity(k);
        for j in 0..k {
            let num = self.pools[k - 1 - j];
            let den = if j == 0 { 1 } else { self.pools[k - j] };
            pi.push(num / den);
        }
        Ok(Multipliers { pi })
    }

    /// True when every ratio of consecutive pool sizes (including
    /// `m_k / m_{k+1} = m_k`) equals the last pool size.
    pub fn is_geometric(&self) -> bool {
        if self.pools.is_empty() {
            return false;
        }
        let mu = self.last_pool();
        let mut expected = 1i64;
        for &m in self.pools.iter().rev() {
            expected = match expected.checked_mul(mu) {
                Some(v) => v,
                None => return false,
            };
            if m != expected {
                return false;
            }
        }
        true
    }
}

impl std::fmt::Display for NestedStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, m) in self.pools.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}

/// Multiplier sequence of a strategy; reconstructs the pool chain exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Multipliers {
    pi: Vec<i64>,
}

impl Multipliers {
    /// `(pi_1, ..., pi_k)`.
    pub fn values(&self) -> &[i64] {
        &self.pi
    }

    /// `pi_k = m_1 / m_2`, the first-stage ratio.
    pub fn last(&self) -> i64 {
        *self.pi.last().expect("multipliers are never empty")
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.pi.windows(2).all(|w| w[0] <= w[1])
    }

    /// Rebuild `m = (pi_k ... pi_1, ..., pi_2 pi_1, pi_1)`.
    pub fn reconstruct(&self) -> Result<NestedStrategy> {
        let k = self.pi.len();
        let mut pools = vec![0i64; k];
        let mut acc = 1i64;
        for j in 0..k {
            acc = acc
                .checked_mul(self.pi[j])
                .ok_or(Error::Overflow(k as u32))?;
            pools[k - 1 - j] = acc;
        }
        NestedStrategy::new(pools)
    }
}

/// The four families of candidate-optimal chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `(3^k, 3^{k-1}, ..., 3)`; multipliers `(3, ..., 3)`.
    M33,
    /// `(4 * 3^{k-1}, 3^{k-1}, ..., 3)`; multipliers `(3, ..., 3, 4)`.
    M34,
    /// `(2 * 3^{k-1}, ..., 2 * 3, 2)`; multipliers `(2, 3, ..., 3)`.
    M23,
    /// `(8 * 3^{k-2}, 2 * 3^{k-2}, ..., 2)`; multipliers `(2, 3, ..., 3, 4)`.
    M24,
}

impl Family {
    /// Canonical chain with `k` pooled stages. For `k = 1` the conventions
    /// `(1, m23) = (1, m33) = (3)` and `(1, m24) = (1, m34) = (4)` apply.
    pub fn strategy(self, k: u32) -> Result<NestedStrategy> {
        if k == 0 || k > MAX_STAGES {
            return Err(Error::Overflow(k));
        }
        if k == 1 {
            let m1 = match self {
                Family::M33 | Family::M23 => 3,
                Family::M34 | Family::M24 => 4,
            };
            return NestedStrategy::new(vec![m1]);
        }
        let k = k as usize;
        let overflow = Error::Overflow(k as u32);
        let head_factor: i64 = match self {
            Family::M33 | Family::M23 => 3,
            Family::M34 | Family::M24 => 4,
        };
        // Tail m_2..m_k: powers of 3 for m33/m34, twice a power of 3 for
        // m23/m24. The head is m_1 = head_factor * m_2.
        let mut pools = Vec::with_capacity(k);
        for j in 2..=k {
            let m = match self {
                Family::M33 | Family::M34 => pow3((k - j + 1) as u32),
                Family::M23 | Family::M24 => {
                    pow3((k - j) as u32).and_then(|b| b.checked_mul(2))
                }
            }
            .ok_or(overflow.clone())?;
            pools.push(m);
        }
        let m1 = pools[0].checked_mul(head_factor).ok_or(overflow)?;
        pools.insert(0, m1);
        NestedStrategy::new(pools)
    }

    /// Identify which family, if any, a chain belongs to.
    pub fn classify(s: &NestedStrategy) -> Option<Family> {
        let pi = s.multipliers().ok()?;
        let v = pi.values();
        let k = v.len();
        if k == 1 {
            return match v[0] {
                3 => Some(Family::M33),
                4 => Some(Family::M34),
                _ => None,
            };
        }
        let middle_all_3 = v[1..k - 1].iter().all(|&x| x == 3);
        if !middle_all_3 {
            return None;
        }
        match (v[0], v[k - 1]) {
            (3, 3) => Some(Family::M33),
            (3, 4) => Some(Family::M34),
            (2, 3) => Some(Family::M23),
            (2, 4) => Some(Family::M24),
            _ => None,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::M33 => "m33",
            Family::M34 => "m34",
            Family::M23 => "m23",
            Family::M24 => "m24",
        };
        f.write_str(s)
    }
}

fn pow3(exp: u32) -> Option<i64> {
    3i64.checked_pow(exp)
}
