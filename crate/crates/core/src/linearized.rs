//! First-order cost model, its real-valued optimizers, and error bounds.
//!
//! Linearizing `1 - q^m ~= m p` in the exact cost gives
//!
//! ```text
//! L_k(m, p) = 1/m_1 + m_k p + p sum_{j=2..k} m_{j-1}/m_j,
//! ```
//!
//! which upper-bounds the exact cost for `p <= 1/2` and admits closed-form
//! minimizers: pool sizes must form the geometric ladder
//! `m_j = p^{-(k-j+1)/(k+1)}`, yielding `L_k = (k+1) p^{k/(k+1)}`, and over
//! real stage counts the optimum is `k = log(1/p) - 1` with value
//! `e p log(1/p)`. Pool sizes here are real-valued: integrality and
//! divisibility are deliberately relaxed.

use crate::cost::cost;
use crate::error::{Error, Result};
use crate::strategies::{NestedStrategy, Prevalence};

/// Real-valued optimum of the linearized cost.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedPlan {
    /// Stage count the plan was built for (integral for fixed-`k` plans,
    /// the real optimum `k_sharp` otherwise).
    pub k: f64,
    /// Optimal real pool sizes; empty when no integral ladder applies.
    pub m_sharp: Vec<f64>,
    /// The plan's linearized cost (`L_k` at `m_sharp`, or `L_sharp`).
    pub l_value: f64,
    /// `log(1/p) - 1`, the real-valued optimal stage count.
    pub k_sharp: f64,
    /// `e p log(1/p)`, the linearized cost at `k_sharp`.
    pub l_sharp: f64,
}

/// Exact-vs-linear comparison with the proved error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizationBound {
    pub exact: f64,
    pub linear: f64,
    pub bound: f64,
}

fn validate_real_pools(m: &[f64]) -> Result<()> {
    if m.is_empty() {
        return Err(Error::InvalidPools("pool vector is empty"));
    }
    if m.iter().any(|&x| !x.is_finite() || x < 1.0) {
        return Err(Error::InvalidPools("every pool size must be a finite real >= 1"));
    }
    if m.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidPools("pool sizes must be strictly decreasing"));
    }
    Ok(())
}

/// `L_k(m, p) = 1/m_1 + m_k p + p sum m_{j-1}/m_j` for a real pool vector.
pub fn linear_cost(m: &[f64], p: &Prevalence) -> Result<f64> {
    validate_real_pools(m)?;
    let k = m.len();
    let mut l = 1.0 / m[0] + m[k - 1] * p.p();
    for j in 1..k {
        l += p.p() * m[j - 1] / m[j];
    }
    Ok(l)
}

/// Minimizer of `L_k` over real pool vectors for a fixed stage count:
/// `m_j = p^{-(k-j+1)/(k+1)}` with value `(k+1) p^{k/(k+1)}`.
pub fn optimal_linear_pools(k: u32, p: &Prevalence) -> Result<LinearizedPlan> {
    if k < 2 {
        return Err(Error::OutOfRange {
            value: k as f64,
            context: "fixed-k pool optimization needs k >= 2",
        });
    }
    if !(p.p() > 0.0 && p.p() < 1.0) {
        return Err(Error::OutOfRange { value: p.p(), context: "requires 0 < p < 1" });
    }
    let ln_p = p.p().ln();
    let kf = k as f64;
    let m_sharp: Vec<f64> = (1..=k)
        .map(|j| (-ln_p * (kf - j as f64 + 1.0) / (kf + 1.0)).exp())
        .collect();
    let l_value = (kf + 1.0) * (ln_p * kf / (kf + 1.0)).exp();
    Ok(LinearizedPlan {
        k: kf,
        m_sharp,
        l_value,
        k_sharp: -ln_p - 1.0,
        l_sharp: std::f64::consts::E * p.p() * -ln_p,
    })
}

/// Minimizer of `L_k` over real stage counts: `k = log(1/p) - 1` with value
/// `e p log(1/p)`. When `p = e^{-u}` for an integer `u >= 2` the optimal
/// ladder `(e^{u-1}, ..., e)` is integral in `k` and is filled in.
pub fn optimal_linear_stages(p: &Prevalence) -> Result<LinearizedPlan> {
    let e_m2 = (-2.0f64).exp();
    if !(p.p() > 0.0 && p.p() < e_m2) {
        return Err(Error::OutOfRange {
            value: p.p(),
            context: "stage-count optimization needs 0 < p < e^-2",
        });
    }
    let u = -p.p().ln();
    let k_sharp = u - 1.0;
    let l_sharp = std::f64::consts::E * p.p() * u;
    let m_sharp = if (u - u.round()).abs() <= 1e-5 && u.round() >= 2.0 {
        let ui = u.round() as i32;
        (1..ui).map(|j| ((ui - j) as f64).exp()).collect()
    } else {
        Vec::new()
    };
    Ok(LinearizedPlan { k: k_sharp, m_sharp, l_value: l_sharp, k_sharp, l_sharp })
}

/// Exact cost, linearized cost, and the bound
/// `|D_k - L_k| <= l m_1 log^2 q + l k p^2` with
/// `l = max_{2<=i<=k+1} m_{i-1}/m_i` (`m_{k+1} = 1`). The linearized cost
/// dominates the exact cost on `p <= 1/2`.
pub fn linearization_error_bound(
    s: &NestedStrategy,
    p: &Prevalence,
) -> Result<LinearizationBound> {
    if p.p() > 0.5 {
        return Err(Error::OutOfRange { value: p.p(), context: "error bound requires p <= 1/2" });
    }
    let exact = cost(s, p).cost;
    if s.stages() == 0 {
        // No pooled stages: the linearization is the cost itself.
        return Ok(LinearizationBound { exact, linear: exact, bound: 0.0 });
    }
    let m: Vec<f64> = s.pools().iter().map(|&x| x as f64).collect();
    let linear = linear_cost(&m, p)?;
    let mut ratio_max: f64 = *m.last().unwrap(); // m_k / m_{k+1} with m_{k+1} = 1
    for w in m.windows(2) {
        ratio_max = ratio_max.max(w[0] / w[1]);
    }
    let log_q = p.neg_log_q();
    let bound = ratio_max * m[0] * log_q * log_q
        + ratio_max * s.stages() as f64 * p.p() * p.p();
    Ok(LinearizationBound { exact, linear, bound })
}

/// Hessian of `L_k` at a real pool vector: tridiagonal with
/// `H_11 = 2/m_1^3`, `H_ii = 2 p m_{i-1}/m_i^3`, `H_{i,i+1} = -p/m_{i+1}^2`.
/// Returns true iff it is positive definite (all leading principal minors
/// positive, evaluated on the symmetrically scaled matrix for stability).
pub fn hessian_positive_definite(m: &[f64], p: &Prevalence) -> Result<bool> {
    validate_real_pools(m)?;
    let k = m.len();
    if k < 2 {
        return Err(Error::OutOfRange {
            value: k as f64,
            context: "Hessian check needs k >= 2",
        });
    }
    if !(p.p() > 0.0 && p.p() < 1.0) {
        return Err(Error::OutOfRange { value: p.p(), context: "requires 0 < p < 1" });
    }
    let pf = p.p();
    let diag: Vec<f64> = (0..k)
        .map(|i| {
            if i == 0 {
                2.0 / (m[0] * m[0] * m[0])
            } else {
                2.0 * pf * m[i - 1] / (m[i] * m[i] * m[i])
            }
        })
        .collect();
    if diag.iter().any(|&d| d <= 0.0) {
        return Ok(false);
    }
    // Scale to unit diagonal: minors of D H D keep their signs.
    let mut t_prev2 = 1.0f64;
    let mut t_prev1 = 1.0f64;
    for i in 1..k {
        let off = -pf / (m[i] * m[i]); // H_{i-1, i} in 0-based indexing
        let c2 = off * off / (diag[i - 1] * diag[i]);
        let t = t_prev1 - c2 * t_prev2;
        if t <= 0.0 {
            return Ok(false);
        }
        t_prev2 = t_prev1;
        t_prev1 = t;
    }
    Ok(true)
}

/// Positive definiteness of the Hessian at the critical ladder `m_sharp(k)`.
pub fn hessian_check(k: u32, p: &Prevalence) -> Result<bool> {
    let plan = optimal_linear_pools(k, p)?;
    hessian_positive_definite(&plan.m_sharp, p)
}
