//! Arrival-order distributions for the segments released in one round.
//!
//! Within a round of `C` segments every arrival order is taken to be
//! equally likely. Two quantities matter to the receiver:
//!
//! * `m`: given segment 1 arrives first, the length of the in-order run
//!   1, 2, …, m before the first out-of-order arrival ([`m_distribution`]).
//! * `q`: given segment 1 does not arrive first, one plus the length of the
//!   run 2, 3, … that is already buffered when segment 1 fills the gap
//!   ([`q_distribution`]).
//!
//! The closed forms are evaluated as products of ratios, never as
//! factorials, so they stay finite for batches of any size. The
//! `brute_force_*` functions enumerate permutations and exist to check the
//! closed forms.

use itertools::Itertools;
use thiserror::Error;

/// Largest batch the permutation oracles will enumerate.
pub const BRUTE_FORCE_MAX_BATCH: usize = 9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbError {
    #[error("batch size must be at least {min} (got {got})")]
    BatchTooSmall { got: usize, min: usize },
    #[error("m_ack must be at least 1")]
    ZeroMAck,
    #[error("brute-force enumeration limited to batches of {max} (got {got})")]
    TooLarge { got: usize, max: usize },
}

/// Probability that segment 1 of a `c`-segment batch is the first to
/// arrive.
pub fn p_first(c: usize) -> f64 {
    assert!(c >= 1, "batch size must be at least 1");
    1.0 / c as f64
}

/// Distribution of the in-order run length `m` given segment 1 arrived
/// first.
///
/// The ACK point is `a = min(m_ack, C)`: runs shorter than `a` are kept
/// individually, runs of `a` or more share the saturated bucket. When the
/// batch has no more than `m_ack` segments the saturated bucket means the
/// whole batch arrived in order.
#[derive(Debug, Clone, PartialEq)]
pub struct MDistribution {
    batch: usize,
    ack_point: usize,
    /// `below[k - 1] = p(m = k)` for `k < ack_point`.
    below: Vec<f64>,
    saturated: f64,
}

impl MDistribution {
    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn ack_point(&self) -> usize {
        self.ack_point
    }

    /// `p(m = k)` for `1 ≤ k < ack_point`.
    pub fn p_eq(&self, k: usize) -> f64 {
        self.below[k - 1]
    }

    /// `p(m ≥ ack_point)`.
    pub fn p_saturated(&self) -> f64 {
        self.saturated
    }

    pub fn below(&self) -> &[f64] {
        &self.below
    }

    pub fn total(&self) -> f64 {
        self.below.iter().sum::<f64>() + self.saturated
    }

    /// Expectation of `f(min(m, ack_point))`.
    pub fn expect(&self, f: impl Fn(usize) -> f64) -> f64 {
        self.below
            .iter()
            .enumerate()
            .map(|(i, p)| f(i + 1) * p)
            .sum::<f64>()
            + f(self.ack_point) * self.saturated
    }

    /// Largest entrywise difference. Panics if the shapes differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.ack_point, other.ack_point);
        self.below
            .iter()
            .zip(&other.below)
            .map(|(a, b)| (a - b).abs())
            .fold((self.saturated - other.saturated).abs(), f64::max)
    }
}

/// Distribution of `q` given segment 1 did not arrive first.
#[derive(Debug, Clone, PartialEq)]
pub struct QDistribution {
    /// `probs[k - 1] = p(q = k)` for `k = 1..=C`.
    probs: Vec<f64>,
}

impl QDistribution {
    pub fn batch(&self) -> usize {
        self.probs.len()
    }

    pub fn p(&self, k: usize) -> f64 {
        self.probs[k - 1]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.probs.len(), other.probs.len());
        self.probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn check_m_args(c: usize, m_ack: usize) -> Result<(), ProbError> {
    if c < 2 {
        return Err(ProbError::BatchTooSmall { got: c, min: 2 });
    }
    if m_ack == 0 {
        return Err(ProbError::ZeroMAck);
    }
    Ok(())
}

/// Closed-form distribution of `m`.
///
/// `p(m = k) = (C−k−1)·(C−k−1)!/(C−1)!` for `k ≤ C−2`, which is
/// `(C−k−1) / ∏_{j=1..k} (C−j)`. The saturated bucket is the probability
/// that the first `a` arrivals are `1..=a`, i.e. `1 / ∏_{j=1..a−1} (C−j)`.
pub fn m_distribution(c: usize, m_ack: usize) -> Result<MDistribution, ProbError> {
    check_m_args(c, m_ack)?;
    let ack_point = m_ack.min(c);
    let mut below = Vec::with_capacity(ack_point - 1);
    // falling = ∏_{j=1..k} (C − j)
    let mut falling = 1.0;
    for k in 1..ack_point {
        falling *= (c - k) as f64;
        let p = if k + 2 <= c {
            (c - k - 1) as f64 / falling
        } else {
            // m = C − 1 is impossible: if 1..C−1 arrived in order, C is next.
            0.0
        };
        below.push(p);
    }
    let saturated = (1..ack_point).fold(1.0, |acc, j| acc / (c - j) as f64);
    Ok(MDistribution {
        batch: c,
        ack_point,
        below,
        saturated,
    })
}

/// Closed-form distribution of `q`.
///
/// Over all `C!` orders, segments 2..=k all precede segment 1 with
/// probability `1/k`. Conditioning on segment 1 not being first gives
/// `p(q ≥ k) = C / (k (C−1))` for `k ≥ 2`, hence
/// `p(q=1) = (C−2)/(2(C−1))`, `p(q=k) = C/(k(k+1)(C−1))` for `1 < k < C`
/// and `p(q=C) = 1/(C−1)`.
pub fn q_distribution(c: usize) -> Result<QDistribution, ProbError> {
    if c < 2 {
        return Err(ProbError::BatchTooSmall { got: c, min: 2 });
    }
    let cf = c as f64;
    let mut probs = Vec::with_capacity(c);
    probs.push((cf - 2.0) / (2.0 * (cf - 1.0)));
    for k in 2..c {
        let kf = k as f64;
        probs.push(cf / (kf * (kf + 1.0) * (cf - 1.0)));
    }
    probs.push(1.0 / (cf - 1.0));
    Ok(QDistribution { probs })
}

/// `ln(n!)` for `n = 0..=max`.
fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for n in 1..=max {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

/// The `q` table from the three-case factorial formula, transcribed term
/// by term, with `C! − (C−1)! = (C−1)·(C−1)!` in every denominator.
///
/// The middle case carries a leading factor `(C−k−1)`, which forces
/// `p(q = C−1) = 0` where enumeration gives `1/(C−1)²`. For `C ≤ 5` that
/// is the only disagreement, so the table falls short of one by exactly
/// that amount; from `C = 6` on the other middle entries drift too (at
/// `C = 6, k = 2` the table gives 1/10, enumeration 1/5). Kept for
/// comparison only; the model uses [`q_distribution`].
pub fn q_table_literal(c: usize) -> Result<Vec<f64>, ProbError> {
    if c < 2 {
        return Err(ProbError::BatchTooSmall { got: c, min: 2 });
    }
    let cf = c as f64;
    let lf = ln_factorials(c);
    // ln((C−1)!·(C−1))
    let ln_denom = lf[c - 1] + (cf - 1.0).ln();
    let mut table = Vec::with_capacity(c);
    table.push((cf - 2.0) / (2.0 * (cf - 1.0)));
    for k in 2..c {
        let lead = (c - k - 1) as f64;
        let inner: f64 = (k + 1..=c)
            .map(|l| {
                // (l−2)!/(l−k−1)! · (C−l+1) / ((C−1)!(C−1))
                ((lf[l - 2] - lf[l - k - 1] - ln_denom).exp()) * (c - l + 1) as f64
            })
            .sum();
        table.push(lead * inner);
    }
    table.push(1.0 / (cf - 1.0));
    Ok(table)
}

fn check_brute_force(c: usize) -> Result<(), ProbError> {
    if c > BRUTE_FORCE_MAX_BATCH {
        return Err(ProbError::TooLarge {
            got: c,
            max: BRUTE_FORCE_MAX_BATCH,
        });
    }
    Ok(())
}

/// `m` distribution by enumerating every order of segments 2..=C behind
/// segment 1.
pub fn brute_force_m_distribution(c: usize, m_ack: usize) -> Result<MDistribution, ProbError> {
    check_m_args(c, m_ack)?;
    check_brute_force(c)?;
    let ack_point = m_ack.min(c);
    let mut counts = vec![0u64; ack_point + 1];
    let mut total = 0u64;
    for order in (2..=c).permutations(c - 1) {
        let run = 1 + order
            .iter()
            .enumerate()
            .take_while(|&(i, &seg)| seg == i + 2)
            .count();
        counts[run.min(ack_point)] += 1;
        total += 1;
    }
    let t = total as f64;
    Ok(MDistribution {
        batch: c,
        ack_point,
        below: counts[1..ack_point].iter().map(|&n| n as f64 / t).collect(),
        saturated: counts[ack_point] as f64 / t,
    })
}

/// `q` distribution by enumerating every order of 1..=C in which
/// segment 1 is not first.
pub fn brute_force_q_distribution(c: usize) -> Result<QDistribution, ProbError> {
    if c < 2 {
        return Err(ProbError::BatchTooSmall { got: c, min: 2 });
    }
    check_brute_force(c)?;
    let mut counts = vec![0u64; c + 1];
    let mut total = 0u64;
    for order in (1..=c).permutations(c) {
        if order[0] == 1 {
            continue;
        }
        let pos_one = order.iter().position(|&s| s == 1).unwrap();
        let before = &order[..pos_one];
        let run = (2..=c).take_while(|seg| before.contains(seg)).count();
        counts[1 + run] += 1;
        total += 1;
    }
    let t = total as f64;
    Ok(QDistribution {
        probs: counts[1..].iter().map(|&n| n as f64 / t).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= TOL
    }

    #[test]
    fn p_first_values() {
        assert_eq!(p_first(1), 1.0);
        assert_eq!(p_first(2), 0.5);
        assert_eq!(p_first(4), 0.25);
    }

    #[test]
    fn m_distribution_examples() {
        let d = m_distribution(4, 2).unwrap();
        assert!(close(d.p_eq(1), 2.0 / 3.0));
        assert!(close(d.p_saturated(), 1.0 / 3.0));

        let d = m_distribution(2, 2).unwrap();
        assert!(close(d.p_saturated(), 1.0));
        assert!(close(d.p_eq(1), 0.0));

        let d = m_distribution(3, 2).unwrap();
        assert!(close(d.p_eq(1), 0.5));
        assert!(close(d.p_saturated(), 0.5));
    }

    #[test]
    fn m_distribution_small_batches_saturate_at_batch() {
        let d = m_distribution(2, 3).unwrap();
        assert_eq!(d.ack_point(), 2);
        assert!(close(d.p_saturated(), 1.0));

        let d = m_distribution(5, 1).unwrap();
        assert_eq!(d.ack_point(), 1);
        assert!(d.below().is_empty());
        assert!(close(d.p_saturated(), 1.0));
    }

    #[test]
    fn m_distribution_rejects_bad_args() {
        assert_eq!(
            m_distribution(1, 2),
            Err(ProbError::BatchTooSmall { got: 1, min: 2 })
        );
        assert_eq!(m_distribution(3, 0), Err(ProbError::ZeroMAck));
    }

    #[test]
    fn saturated_bucket_matches_summed_form() {
        // 1/(C−1)! + Σ_{k=m_ack}^{C−2} (C−k−1)(C−k−1)!/(C−1)!
        let fact = |n: usize| (1..=n).map(|x| x as f64).product::<f64>();
        for c in 2..=12 {
            for m_ack in 1..c {
                let literal = 1.0 / fact(c - 1)
                    + (m_ack..=c.saturating_sub(2))
                        .map(|k| (c - k - 1) as f64 * fact(c - k - 1) / fact(c - 1))
                        .sum::<f64>();
                let d = m_distribution(c, m_ack).unwrap();
                assert!(
                    (d.p_saturated() - literal).abs() < 1e-13,
                    "C={c} m_ack={m_ack}"
                );
            }
        }
    }

    #[test]
    fn q_distribution_examples() {
        let q = q_distribution(3).unwrap();
        for (got, want) in q.probs().iter().zip([0.25, 0.25, 0.5]) {
            assert!(close(*got, want));
        }
        let q = q_distribution(4).unwrap();
        for (got, want) in q
            .probs()
            .iter()
            .zip([1.0 / 3.0, 2.0 / 9.0, 1.0 / 9.0, 1.0 / 3.0])
        {
            assert!(close(*got, want));
        }
        let q = q_distribution(2).unwrap();
        assert_eq!(q.probs(), &[0.0, 1.0]);
        assert!(q_distribution(1).is_err());
    }

    #[test]
    fn literal_table_at_three() {
        let t = q_table_literal(3).unwrap();
        assert!(close(t[0], 0.25));
        assert!(close(t[1], 0.0));
        assert!(close(t[2], 0.5));
        assert!(close(t.iter().sum::<f64>(), 0.75));
    }

    #[test]
    fn brute_force_examples() {
        let q = brute_force_q_distribution(3).unwrap();
        assert_eq!(q.probs(), &[0.25, 0.25, 0.5]);
        let q = brute_force_q_distribution(4).unwrap();
        assert!(close(q.p(4), 1.0 / 3.0));

        let m = brute_force_m_distribution(3, 2).unwrap();
        assert_eq!((m.p_eq(1), m.p_saturated()), (0.5, 0.5));
        let m = brute_force_m_distribution(2, 3).unwrap();
        assert_eq!(m.p_saturated(), 1.0);
        assert_eq!(m.ack_point(), 2);
    }

    #[test]
    fn brute_force_size_guard() {
        assert_eq!(
            brute_force_q_distribution(10),
            Err(ProbError::TooLarge { got: 10, max: 9 })
        );
        assert!(brute_force_m_distribution(10, 2).is_err());
    }

    #[test]
    fn closed_forms_match_enumeration() {
        for c in 2..=8 {
            let q = q_distribution(c).unwrap();
            let qb = brute_force_q_distribution(c).unwrap();
            assert!(q.max_abs_diff(&qb) <= TOL, "q C={c}");
            for m_ack in 1..=4 {
                let m = m_distribution(c, m_ack).unwrap();
                let mb = brute_force_m_distribution(c, m_ack).unwrap();
                assert!(m.max_abs_diff(&mb) <= TOL, "m C={c} m_ack={m_ack}");
            }
        }
    }

    #[test]
    fn literal_table_agrees_except_at_c_minus_one() {
        // Only holds for small batches; see the divergence test below.
        for c in 3..=5 {
            let q = q_distribution(c).unwrap();
            let t = q_table_literal(c).unwrap();
            for k in 1..=c {
                if k == c - 1 {
                    assert_eq!(t[k - 1], 0.0);
                } else {
                    assert!((t[k - 1] - q.p(k)).abs() < 1e-12, "C={c} k={k}");
                }
            }
            let deficit = 1.0 - t.iter().sum::<f64>();
            assert!((deficit - q.p(c - 1)).abs() < 1e-12, "C={c}");
        }
    }

    #[test]
    fn literal_table_diverges_from_six_segments() {
        // exact values of the printed middle case at C = 6, k = 2 and C = 8, k = 2
        let t6 = q_table_literal(6).unwrap();
        assert!(close(t6[1], 1.0 / 10.0));
        assert!(close(q_distribution(6).unwrap().p(2), 1.0 / 5.0));
        let t8 = q_table_literal(8).unwrap();
        assert!(close(t8[1], 1.0 / 126.0));
        assert!(close(t8.iter().sum::<f64>(), 1013.0 / 1470.0));
    }

    #[test]
    fn large_batches_stay_finite() {
        for c in [100, 1_000, 10_000] {
            let m = m_distribution(c, 4).unwrap();
            assert!((m.total() - 1.0).abs() < 1e-12);
            assert!(m.below().iter().all(|p| p.is_finite()));
            let q = q_distribution(c).unwrap();
            assert!((q.total() - 1.0).abs() < 1e-9);
            assert!(q.probs().iter().all(|p| p.is_finite() && *p >= 0.0));
        }
        let t = q_table_literal(500).unwrap();
        assert!(t.iter().all(|p| p.is_finite()));
    }
}
