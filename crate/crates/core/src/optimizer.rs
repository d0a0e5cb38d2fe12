//! Optimal-strategy selection: closed-form stage counts, transition points,
//! the four-candidate comparison with certified cost gaps, and an exhaustive
//! brute-force oracle.
//!
//! For `p >= 1 - 3^{-1/3}` individual testing is optimal. Below that, the
//! optimal chain has multipliers `(2 or 3, 3, ..., 3, 3 or 4)`, which leaves
//! four candidate families (`m33`, `m34`, `m23`, `m24`). The selectors here
//! evaluate each family at its closed-form optimal stage count and compare.
//! The gap `Phi(p) = min(D33, D34) - min(D23, D24)` is evaluated in
//! double-double arithmetic with a running rounding bound so its sign is
//! certified, not guessed.

use std::sync::OnceLock;

use crate::cost::{cost, cost_compensated, cost_value, CostReport};
use crate::dd::Certified;
use crate::error::{Error, Result};
use crate::strategies::{Family, NestedStrategy, Prevalence, MAX_STAGES};

const LN_3: f64 = 1.0986122886681098;
/// log_3(2)
const LOG3_2: f64 = std::f64::consts::LN_2 / LN_3;

/// `rho_0 = 1 - 3^{-1/3}`, the largest prevalence where pooling can pay.
pub fn pooling_threshold() -> f64 {
    -(-LN_3 / 3.0).exp_m1()
}

/// Roots controlling the strategy transitions.
///
/// `F(a) = 1/12 - e^{-3a} + e^{-4a}` has roots `alpha1 < alpha2`;
/// `G(a) = -7/36 - e^{-4a} + e^{-9a}/3 + e^{-3a}` has the unique root `beta`.
/// `a1` and `a2` are the crossovers of `h_a(x) = 1/x - e^{-ax}` between
/// x = 5,4 and x = 4,3 respectively (`a2` coincides with `alpha1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionConstants {
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta: f64,
    pub a1: f64,
    pub a2: f64,
    pub rho0: f64,
}

fn f_gap(a: f64) -> f64 {
    1.0 / 12.0 - (-3.0 * a).exp() + (-4.0 * a).exp()
}

fn g_gap(a: f64) -> f64 {
    -7.0 / 36.0 - (-4.0 * a).exp() + (-9.0 * a).exp() / 3.0 + (-3.0 * a).exp()
}

/// Bisection on a guaranteed bracket; runs to f64 resolution (at most 200
/// halvings) and reports the midpoint.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::BracketFailure { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval is one ulp wide
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Find all five constants by bisection on fixed brackets.
///
/// `tol` bounds the accepted residual `|f(root)|`; the roots themselves are
/// always refined to f64 resolution.
pub fn transition_constants(tol: f64) -> Result<TransitionConstants> {
    if !(tol > 0.0 && tol <= 1e-8) {
        return Err(Error::OutOfRange { value: tol, context: "tol must lie in (0, 1e-8]" });
    }
    let h_cross = |lhs: f64, rhs: f64| move |a: f64| {
        (1.0 / lhs - (-lhs * a).exp()) - (1.0 / rhs - (-rhs * a).exp())
    };
    let alpha1 = bisect(f_gap, 0.05, 0.3)?;
    let alpha2 = bisect(f_gap, 0.3, 1.0)?;
    let beta = bisect(g_gap, 0.01, 1.0)?;
    let a1 = bisect(h_cross(5.0, 4.0), 0.01, 0.12)?;
    let a2 = bisect(h_cross(4.0, 3.0), 0.06, 0.3)?;
    for (root, f) in [
        (alpha1, f_gap as fn(f64) -> f64),
        (alpha2, f_gap),
        (beta, g_gap),
    ] {
        let r = f(root).abs();
        if r > tol {
            return Err(Error::OutOfRange { value: r, context: "bisection residual exceeds tol" });
        }
    }
    Ok(TransitionConstants { alpha1, alpha2, beta, a1, a2, rho0: pooling_threshold() })
}

fn constants() -> &'static TransitionConstants {
    static CONSTS: OnceLock<TransitionConstants> = OnceLock::new();
    CONSTS.get_or_init(|| transition_constants(1e-10).expect("fixed brackets are valid"))
}

/// `lambda_k = 1 - e^{-alpha1 / 3^{k-1}}`: below it, `(k, m34)` beats `(k, m33)`.
pub fn lambda_k(k: u32) -> f64 {
    debug_assert!(k >= 1);
    -(-constants().alpha1 / 3f64.powi(k as i32 - 1)).exp_m1()
}

/// `rho_k = 1 - e^{-beta / 3^{k-1}}` for `k >= 1`; `rho_0` is the pooling
/// threshold. Below `rho_k`, `(k+1, m33)` beats `(k, m34)`.
pub fn rho_k(k: u32) -> f64 {
    if k == 0 {
        return pooling_threshold();
    }
    -(-constants().beta / 3f64.powi(k as i32 - 1)).exp_m1()
}

/// One row of the transition table: the prevalence window
/// `[lambda_k, rho_{k-1}]` where `(k, m33)` is conjectured optimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionRow {
    pub k: u32,
    pub lambda: f64,
    pub rho_prev: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    pub rows: Vec<TransitionRow>,
}

/// Rows `k = 1..=k_max` of the transition table (`k_max <= 40`).
pub fn transition_table(k_max: u32) -> TransitionTable {
    assert!((1..=40).contains(&k_max), "k_max must lie in 1..=40");
    let rows = (1..=k_max)
        .map(|k| TransitionRow { k, lambda: lambda_k(k), rho_prev: rho_k(k - 1) })
        .collect();
    TransitionTable { rows }
}

/// Families whose optimal stage count is a single floor expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FloorCode {
    /// Multipliers `(3, ..., 3)`: `k_3 = floor(log_3(1 / |log_3 q|))`.
    M3,
    /// Multipliers `(2, 3, ..., 3)`: `k_23 = floor(log_3(1 / |log_3 q|) - log_3 2 + 1)`.
    M23,
}

/// Families whose optimal stage count lies in a half-open interval that may
/// hold zero, one, or two integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntervalCode {
    /// Multipliers `(3, ..., 3, 4)`.
    M34,
    /// Multipliers `(2, 3, ..., 3, 4)`.
    M24,
}

/// `log_3(1 / |log_3 q|)`, the master quantity of all stage-count formulas.
fn stage_scale(p: &Prevalence) -> Result<f64> {
    if !(p.p() > 0.0 && p.p() < pooling_threshold()) {
        return Err(Error::OutOfRange {
            value: p.p(),
            context: "stage counts require 0 < p < 1 - 3^(-1/3)",
        });
    }
    let log3_q_abs = p.neg_log_q() / LN_3;
    Ok(-log3_q_abs.ln() / LN_3)
}

/// Closed-form optimal stage count for the `m33` / `m23` families.
pub fn stage_count(code: FloorCode, p: &Prevalence) -> Result<u32> {
    let x = stage_scale(p)?;
    let raw = match code {
        FloorCode::M3 => x.floor(),
        FloorCode::M23 => (x - LOG3_2 + 1.0).floor(),
    };
    // x > 1 strictly on the domain, so the true count is >= 1; clamp guards
    // against the boundary rounding to 0.999... in f64.
    let k = raw.max(1.0);
    if k > MAX_STAGES as f64 {
        return Err(Error::Overflow(MAX_STAGES + 1));
    }
    Ok(k as u32)
}

/// All admissible stage counts for the `m34` / `m24` families; possibly empty,
/// possibly two integers (the interval has length `1 + log_3 log_3 4 > 1`).
pub fn stage_count_interval(code: IntervalCode, p: &Prevalence) -> Result<Vec<u32>> {
    let x = stage_scale(p)?;
    let log3_4 = 2.0 * LOG3_2;
    let width = 1.0 + (log3_4.ln() / LN_3);
    let lo = match code {
        IntervalCode::M34 => x - log3_4,
        IntervalCode::M24 => x - 3.0 * LOG3_2 + 1.0,
    };
    let hi = lo + width;
    let mut ks = Vec::new();
    let mut k = lo.floor() as i64 + 1;
    while (k as f64) <= hi {
        if k >= 1 {
            if k > MAX_STAGES as i64 {
                return Err(Error::Overflow(MAX_STAGES + 1));
            }
            ks.push(k as u32);
        }
        k += 1;
    }
    Ok(ks)
}

/// Record of the four-candidate comparison at one prevalence.
///
/// Costs are `f64::INFINITY` when the family's stage-count interval is
/// empty. `phi = min(d33, d34) - min(d23, d24)`; `sign_certified` is set
/// only when `|phi|` provably exceeds the accumulated rounding error of the
/// double-double evaluation plus the storage rounding of the four costs.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjectureRecord {
    pub p: f64,
    pub k23: Option<u32>,
    pub k24: Option<u32>,
    pub k3: Option<u32>,
    pub k34: Option<u32>,
    pub d23: f64,
    pub d24: f64,
    pub d33: f64,
    pub d34: f64,
    pub phi: f64,
    pub sign_certified: bool,
}

impl ConjectureRecord {
    /// The cheaper of the two conjectured-optimal families.
    pub fn winner(&self) -> Family {
        if self.d33 <= self.d34 {
            Family::M33
        } else {
            Family::M34
        }
    }
}

/// The chain compared as the `m23` candidate: the natural two-tail chain
/// `(2 * 3^{k-1}, ..., 2)`, which for `k = 1` is `(2)`.
///
/// This deliberately differs from the `(1, m23) = (3)` naming convention of
/// [`Family::strategy`]: the comparison needs the best strategy whose last
/// pool is 2, and substituting `(3)` would collapse the gap to zero wherever
/// `k_23 = 1`.
fn two_tail_chain(k: u32) -> Result<NestedStrategy> {
    if k == 1 {
        return NestedStrategy::new(vec![2]);
    }
    Family::M23.strategy(k)
}

struct Candidate {
    strategy: NestedStrategy,
    cost: Certified,
    k: u32,
}

fn best_over_interval(code: IntervalCode, p: &Prevalence) -> Result<Option<Candidate>> {
    let family = match code {
        IntervalCode::M34 => Family::M34,
        IntervalCode::M24 => Family::M24,
    };
    let mut best: Option<Candidate> = None;
    for k in stage_count_interval(code, p)? {
        let strategy = family.strategy(k)?;
        let c = cost_compensated(strategy.pools(), p.p());
        let better = match &best {
            None => true,
            Some(b) => c.value.to_f64() < b.cost.value.to_f64(),
        };
        if better {
            best = Some(Candidate { strategy, cost: c, k });
        }
    }
    Ok(best)
}

struct FourCandidates {
    record: ConjectureRecord,
    winner: NestedStrategy,
}

fn evaluate_candidates(p: &Prevalence) -> Result<FourCandidates> {
    let pf = p.p();

    let k3 = stage_count(FloorCode::M3, p)?;
    let s33 = Family::M33.strategy(k3)?;
    let d33 = cost_compensated(s33.pools(), pf);

    let k23 = stage_count(FloorCode::M23, p)?;
    let s23 = two_tail_chain(k23)?;
    let d23 = cost_compensated(s23.pools(), pf);

    let c34 = best_over_interval(IntervalCode::M34, p)?;
    let c24 = best_over_interval(IntervalCode::M24, p)?;

    let k34 = c34.as_ref().map(|c| c.k);
    let k24 = c24.as_ref().map(|c| c.k);
    let d34_f = c34.as_ref().map_or(f64::INFINITY, |c| c.cost.to_f64());
    let d24_f = c24.as_ref().map_or(f64::INFINITY, |c| c.cost.to_f64());
    let d33_f = d33.to_f64();
    let d23_f = d23.to_f64();

    let min33_34 = c34.as_ref().map_or(d33, |c| d33.min(c.cost));
    let min23_24 = c24.as_ref().map_or(d23, |c| d23.min(c.cost));
    let phi_cert = min33_34 - min23_24;

    // phi recomputes exactly from the stored f64 costs; certification must
    // therefore also absorb the rounding of those stores.
    let phi = d33_f.min(d34_f) - d23_f.min(d24_f);
    let storage_slop =
        f64::EPSILON * (min33_34.to_f64().abs() + min23_24.to_f64().abs()) * 1.25;
    let sign_certified = phi_cert.value.abs().to_f64() > phi_cert.err + storage_slop;

    // Winner across all four, ties resolved towards m33 then m34.
    let mut winner = Candidate { strategy: s33, cost: d33, k: k3 };
    for cand in [c34, Some(Candidate { strategy: s23, cost: d23, k: k23 }), c24]
        .into_iter()
        .flatten()
    {
        if cand.cost.value.to_f64() < winner.cost.value.to_f64() {
            winner = cand;
        }
    }

    let record = ConjectureRecord {
        p: pf,
        k23: Some(k23),
        k24,
        k3: Some(k3),
        k34,
        d23: d23_f,
        d24: d24_f,
        d33: d33_f,
        d34: d34_f,
        phi,
        sign_certified,
    };
    Ok(FourCandidates { record, winner: winner.strategy })
}

/// Conjectured-optimal strategy via the transition-point intervals:
/// `(k, m33)` on `[lambda_k, rho_{k-1}]`, `(k, m34)` on `(rho_k, lambda_k)`,
/// individual testing for `p >= rho_0`. Ties at the boundaries resolve to
/// the `m33` variant.
pub fn conjectured_optimal(p: &Prevalence) -> Result<(NestedStrategy, CostReport)> {
    if p.p() >= pooling_threshold() {
        let s = NestedStrategy::individual();
        let r = cost(&s, p);
        return Ok((s, r));
    }
    for k in 1..=MAX_STAGES {
        let family = if p.p() >= lambda_k(k) {
            Some(Family::M33)
        } else if p.p() > rho_k(k) {
            Some(Family::M34)
        } else {
            None
        };
        if let Some(f) = family {
            let s = f.strategy(k)?;
            let r = cost(&s, p);
            return Ok((s, r));
        }
    }
    // p below lambda_39: the optimal chain no longer fits in 64-bit pools.
    Err(Error::Overflow(MAX_STAGES + 1))
}

/// Minimum over the four candidate families evaluated at their closed-form
/// stage counts, with the filled [`ConjectureRecord`].
pub fn four_candidate_optimal(
    p: &Prevalence,
) -> Result<(NestedStrategy, CostReport, ConjectureRecord)> {
    let four = evaluate_candidates(p)?;
    let report = cost(&four.winner, p);
    Ok((four.winner, report, four.record))
}

/// Conjecture records for `p = 2^-j`, `j = j_min..=j_max`, plus any extra
/// prevalences, each with a certified sign for `phi`.
pub fn conjecture_sweep(
    j_min: u32,
    j_max: u32,
    extra_points: &[f64],
) -> Result<Vec<ConjectureRecord>> {
    if !(2 <= j_min && j_min <= j_max && j_max <= 51) {
        return Err(Error::OutOfRange {
            value: j_min as f64,
            context: "sweep exponents must satisfy 2 <= j_min <= j_max <= 51",
        });
    }
    let mut records = Vec::with_capacity((j_max - j_min + 1) as usize + extra_points.len());
    for j in j_min..=j_max {
        let p = Prevalence::new(2f64.powi(-(j as i32)))?;
        records.push(evaluate_candidates(&p)?.record);
    }
    for &x in extra_points {
        let p = Prevalence::new(x)?;
        records.push(evaluate_candidates(&p)?.record);
    }
    Ok(records)
}

/// Brute-force oracle: enumerate every divisor chain with `m_1 <= max_m1`
/// (plus individual testing) and return the cheapest. Ties break towards
/// fewer stages, then the lexicographically smaller chain.
pub fn exhaustive_optimal(p: &Prevalence, max_m1: i64) -> (NestedStrategy, CostReport) {
    assert!((2..=2000).contains(&max_m1), "max_m1 must lie in 2..=2000");

    struct Best {
        cost: f64,
        pools: Vec<i64>,
    }
    let mut best = Best { cost: 1.0, pools: Vec::new() };

    fn consider(best: &mut Best, chain: &[i64], c: f64) {
        let better = c < best.cost
            || (c == best.cost
                && (chain.len() < best.pools.len()
                    || (chain.len() == best.pools.len() && chain < best.pools.as_slice())));
        if better {
            best.cost = c;
            best.pools = chain.to_vec();
        }
    }

    fn descend(best: &mut Best, chain: &mut Vec<i64>, p: &Prevalence) {
        consider(best, chain, cost_value(chain, p));
        let last = *chain.last().expect("descend starts from a non-empty chain");
        for d in 2..last {
            if last % d == 0 {
                chain.push(d);
                descend(best, chain, p);
                chain.pop();
            }
        }
    }

    let mut chain = Vec::new();
    for m1 in 2..=max_m1 {
        chain.clear();
        chain.push(m1);
        descend(&mut best, &mut chain, p);
    }

    let s = NestedStrategy::new(best.pools).expect("enumerated chains are valid");
    let r = cost(&s, p);
    (s, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prev(p: f64) -> Prevalence {
        Prevalence::new(p).unwrap()
    }

    #[test]
    fn constants_match_tabulated_roots() {
        let c = transition_constants(1e-12).unwrap();
        assert!((c.alpha1 - 0.1323).abs() < 5e-5);
        assert!((c.alpha2 - 0.5343).abs() < 5e-5);
        assert!((c.beta - 0.1164).abs() < 5e-5);
        assert!((c.a1 - 0.067836).abs() < 5e-7);
        assert!((c.a2 - 0.1323239).abs() < 5e-8);
        assert!((0.132..0.133).contains(&c.alpha1));
        assert!((0.534..0.535).contains(&c.alpha2));
        assert!((0.116..0.117).contains(&c.beta));
        // a2 solves the same equation as alpha1.
        assert!((c.a2 - c.alpha1).abs() < 1e-12);
        assert!(f_gap(c.alpha1).abs() <= 1e-12);
        assert!(f_gap(c.alpha2).abs() <= 1e-12);
        assert!(g_gap(c.beta).abs() <= 1e-12);
        assert!(0.0 < c.alpha1 && c.alpha1 < c.alpha2 && c.alpha2 < 1.0);
    }

    #[test]
    fn bisect_rejects_signless_bracket() {
        assert_eq!(
            bisect(|x| x * x + 1.0, -1.0, 1.0),
            Err(Error::BracketFailure { lo: -1.0, hi: 1.0 })
        );
    }

    #[test]
    fn transition_table_matches_published_values() {
        // (k, lambda_k, rho_{k-1}); the source table truncates to 4 decimals.
        let expected = [
            (1, 0.1239, 0.3066),
            (2, 0.0431, 0.1098),
            (3, 0.0145, 0.0380),
            (4, 0.0048, 0.0128),
            (5, 0.0016, 0.0043),
            (6, 0.0005, 0.0014),
        ];
        let table = transition_table(6);
        for (row, (k, lam, rho)) in table.rows.iter().zip(expected) {
            assert_eq!(row.k, k);
            assert!((row.lambda - lam).abs() < 1e-4, "lambda_{k}: {}", row.lambda);
            assert!((row.rho_prev - rho).abs() < 1e-4, "rho_{}: {}", k - 1, row.rho_prev);
        }
        assert_eq!(transition_table(1).rows.len(), 1);
    }

    #[test]
    fn transition_points_interleave_and_decrease() {
        for k in 1..=12 {
            assert!(rho_k(k) < lambda_k(k), "k={k}");
            assert!(lambda_k(k) < rho_k(k - 1), "k={k}");
            if k > 1 {
                assert!(lambda_k(k) < lambda_k(k - 1));
            }
        }
    }

    #[test]
    fn stage_count_examples() {
        assert_eq!(stage_count(FloorCode::M3, &prev(0.02)).unwrap(), 3);
        // Boundary of the pooling regime.
        let near_rho0 = pooling_threshold() * (1.0 - 1e-12);
        assert_eq!(stage_count(FloorCode::M3, &prev(near_rho0)).unwrap(), 1);
        assert_eq!(stage_count(FloorCode::M23, &prev(0.1)).unwrap(), 2);
        assert!(stage_count(FloorCode::M3, &prev(0.5)).is_err());
        assert!(stage_count(FloorCode::M3, &prev(0.0)).is_err());
    }

    #[test]
    fn stage_count_m23_confirmed_by_cost_comparison() {
        // k_23(0.1) = 2 must beat the k = 1 and k = 3 two-tail chains.
        let p = prev(0.1);
        let at = |k: u32| cost_value(two_tail_chain(k).unwrap().pools(), &p);
        assert!(at(2) < at(1));
        assert!(at(2) < at(3));
    }

    #[test]
    fn interval_examples() {
        let p = prev(0.02);
        let ks = stage_count_interval(IntervalCode::M34, &p).unwrap();
        assert!(!ks.is_empty());
        // Re-substitute each k into the defining bracket.
        let x = stage_scale(&p).unwrap();
        let log3_4 = 2.0 * LOG3_2;
        let width = 1.0 + log3_4.ln() / LN_3;
        for &k in &ks {
            assert!(x - log3_4 < k as f64 && k as f64 <= x - log3_4 + width);
        }

        // Empty interval: no admissible m34 stage count near the threshold.
        let ks = stage_count_interval(IntervalCode::M34, &prev(0.3)).unwrap();
        assert!(ks.is_empty());

        // m24 at p = 0.1: single admissible count k = 2.
        let ks = stage_count_interval(IntervalCode::M24, &prev(0.1)).unwrap();
        assert_eq!(ks, vec![2]);
        // Cost at the admissible k is at least the best neighbouring count
        // (the k-1 neighbour is the (4) convention chain, which wins here).
        let p = prev(0.1);
        let d2 = cost_value(Family::M24.strategy(2).unwrap().pools(), &p);
        let d1 = cost_value(Family::M24.strategy(1).unwrap().pools(), &p);
        let d3 = cost_value(Family::M24.strategy(3).unwrap().pools(), &p);
        assert!(d2 >= d1.min(d3));
    }

    #[test]
    fn conjectured_optimal_examples() {
        let (s, r) = conjectured_optimal(&prev(0.02)).unwrap();
        assert_eq!(s.pools(), &[27, 9, 3]);
        assert!((r.cost - 0.20).abs() < 5e-3);

        let (s, r) = conjectured_optimal(&prev(0.5)).unwrap();
        assert_eq!(s.stages(), 0);
        assert_eq!(r.cost, 1.0);

        // Cost equals the direct minimum over nearby family candidates.
        let p = prev(0.08);
        let (_, r) = conjectured_optimal(&p).unwrap();
        let direct = (1..=5u32)
            .flat_map(|k| {
                [
                    cost_value(Family::M33.strategy(k).unwrap().pools(), &p),
                    cost_value(Family::M34.strategy(k).unwrap().pools(), &p),
                ]
            })
            .fold(f64::INFINITY, f64::min);
        assert!((r.cost - direct).abs() < 1e-12);
    }

    #[test]
    fn four_candidate_examples() {
        let (s, _, record) = four_candidate_optimal(&prev(0.02)).unwrap();
        assert_eq!(s.pools(), &[27, 9, 3]);
        assert_eq!(record.k3, Some(3));
        assert_eq!(record.winner(), Family::M33);

        let (_, _, record) = four_candidate_optimal(&prev(2f64.powi(-10))).unwrap();
        assert!(record.phi < 0.0);
        assert!(record.sign_certified);

        let (s, r, _) = four_candidate_optimal(&prev(0.3)).unwrap();
        assert_eq!(s.stages(), 1);
        assert!(s.pools()[0] == 3 || s.pools()[0] == 4);
        assert!(r.cost < 1.0);
        let (es, er) = exhaustive_optimal(&prev(0.3), 81);
        assert_eq!(es, s);
        assert!((er.cost - r.cost).abs() < 1e-14);
    }

    #[test]
    fn sweep_endpoints_are_certified_negative() {
        let records = conjecture_sweep(2, 2, &[]).unwrap();
        assert!(records[0].phi < 0.0 && records[0].sign_certified);
        let records = conjecture_sweep(51, 51, &[]).unwrap();
        assert!(records[0].phi < 0.0 && records[0].sign_certified);

        // Internal consistency: min(d33, d34) equals the four-candidate cost.
        let records = conjecture_sweep(10, 10, &[]).unwrap();
        let (_, r, _) = four_candidate_optimal(&prev(2f64.powi(-10))).unwrap();
        assert!((records[0].d33.min(records[0].d34) - r.cost).abs() < 1e-12);

        assert!(conjecture_sweep(5, 4, &[]).is_err());
        assert!(conjecture_sweep(2, 52, &[]).is_err());
    }

    #[test]
    fn sweep_extra_points_and_phi_recomputation() {
        let records = conjecture_sweep(8, 10, &[0.1, 0.2]).unwrap();
        assert_eq!(records.len(), 5);
        assert_eq!(records[3].p, 0.1);
        assert_eq!(records[4].p, 0.2);
        for r in &records {
            // phi is exactly the recomputation from the stored costs.
            assert_eq!(r.phi, r.d33.min(r.d34) - r.d23.min(r.d24));
            assert!(r.phi < 0.0 && r.sign_certified, "p={}", r.p);
        }
    }

    #[test]
    fn exhaustive_examples() {
        let (s, r) = exhaustive_optimal(&prev(0.5), 81);
        assert_eq!(s.stages(), 0);
        assert_eq!(r.cost, 1.0);

        let (s, _) = exhaustive_optimal(&prev(0.02), 81);
        assert_eq!(s.pools(), &[27, 9, 3]);

        // Multiplier pattern (2|3, 3, ..., 3, 3|4); k = 1 optima are (3) or (4).
        let (s, _) = exhaustive_optimal(&prev(0.15), 81);
        let pi = s.multipliers().unwrap();
        let v = pi.values();
        if v.len() == 1 {
            assert!(v[0] == 3 || v[0] == 4);
        } else {
            assert!(v[0] == 2 || v[0] == 3);
            assert!(*v.last().unwrap() == 3 || *v.last().unwrap() == 4);
            assert!(v[1..v.len() - 1].iter().all(|&x| x == 3));
        }
    }

    #[test]
    fn conjectured_optimal_rejects_unrepresentable_depths() {
        // Below lambda_39 the chain would need more than 39 stages.
        assert!(conjectured_optimal(&prev(1e-25)).is_err());
        assert!(conjectured_optimal(&prev(0.0)).is_err());
    }
}
