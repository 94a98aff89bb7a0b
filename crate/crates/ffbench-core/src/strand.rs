//! Outer-strand height sequences and stop detection.
//!
//! A gap-reducing attempt with parameters (r, θ, δ) lays out boxes whose
//! heights obey
//!
//! ```text
//! u_0 = u_1 = 1,   u_2 = θ + δ,
//! u_n = (r − θ) u_{n−1} − (r − 2θ) u_{n−2} − θ u_{n−3}
//! ```
//!
//! The construction closes when the sequence stops climbing:
//! `u_0 = u_1 <= u_2 < ... < u_N >= u_{N+1}` for some `N > 1`. That pattern
//! is the whole certificate — it is exact, and everything downstream
//! re-derives geometry from it.
//!
//! Internally the scan runs on scaled integers: with `d` a common
//! denominator of the coefficients and of `u_2`, the values `w_n = d^n u_n`
//! satisfy an integer recurrence, and `u_{n+1} <= u_n` becomes
//! `w_{n+1} <= d w_n`. No gcd normalization ever happens, which keeps long
//! scans cheap.

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrandParams {
    pub r: Rational,
    pub theta: Rational,
    pub delta: Rational,
}

impl StrandParams {
    pub fn new(r: Rational, theta: Rational, delta: Rational) -> Self {
        StrandParams { r, theta, delta }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum StopResult {
    /// `u_0 = u_1 <= u_2 < ... < u_N >= u_{N+1}` with `N > 1`.
    Stopped(usize),
    /// Strictly increasing through the cutoff index (or past the digit
    /// budget); divergence at a finite cutoff is a heuristic verdict.
    Diverged(usize),
    /// The head of the sequence already violates the pattern (`u_2 < u_1`).
    PatternBroken(usize),
}

/// Default bit budget for a single scaled term; beyond this the scan gives
/// up and reports divergence.
pub const DEFAULT_MAX_BITS: u64 = 1 << 21;

/// First `limit` terms of the height sequence, exactly.
pub fn strand_sequence(p: &StrandParams, limit: usize) -> Vec<Rational> {
    let mut u: Vec<Rational> = Vec::with_capacity(limit);
    let c1 = &p.r - &p.theta;
    let c2 = &p.r - &(Rational::from_int(2) * p.theta.clone());
    for n in 0..limit {
        let next = match n {
            0 | 1 => Rational::one(),
            2 => &p.theta + &p.delta,
            _ => &(&c1 * &u[n - 1]) - &(&c2 * &u[n - 2]) - (&p.theta * &u[n - 3]),
        };
        u.push(next);
    }
    u
}

pub fn find_stop(p: &StrandParams, cutoff: usize) -> StopResult {
    find_stop_with(p, cutoff, DEFAULT_MAX_BITS)
}

/// Scans for the first stop `N` in `2..cutoff`. Evaluates terms up to
/// index `cutoff`; a term whose scaled magnitude exceeds `max_bits` bits
/// ends the scan with `Diverged` at that index.
pub fn find_stop_with(p: &StrandParams, cutoff: usize, max_bits: u64) -> StopResult {
    assert!(cutoff >= 4, "cutoff must be at least 4");
    let u2 = &p.theta + &p.delta;
    if u2 < Rational::one() {
        return StopResult::PatternBroken(2);
    }

    // Common denominator for the ladder.
    let c1 = &p.r - &p.theta;
    let c2 = &p.r - &(Rational::from_int(2) * p.theta.clone());
    let mut d = BigInt::one();
    for v in [&c1, &c2, &p.theta, &u2] {
        d = v.lcm_denom(&d);
    }

    // Integer coefficients: a = (r−θ)d, b = (r−2θ)d², c = θd³.
    let frac_to_int = |v: &Rational, scale: &BigInt| -> BigInt {
        let scaled = Rational::from_bigint(scale.clone()) * v.clone();
        debug_assert!(scaled.is_integer());
        scaled.numer().clone()
    };
    let d2 = &d * &d;
    let d3 = &d2 * &d;
    let a = frac_to_int(&c1, &d);
    let b = frac_to_int(&c2, &d2);
    let c = frac_to_int(&p.theta, &d3);

    // w_n = d^n u_n.
    let mut w0 = BigInt::one();
    let mut w1 = d.clone();
    let mut w2 = frac_to_int(&u2, &d2);

    for n in 2..cutoff {
        let w3 = &a * &w2 - &b * &w1 - &c * &w0;
        // u_{n+1} <= u_n  <=>  w_{n+1} <= d * w_n
        if w3 <= &d * &w2 {
            return StopResult::Stopped(n);
        }
        if w3.bits() > max_bits {
            return StopResult::Diverged(n + 1);
        }
        w0 = w1;
        w1 = w2;
        w2 = w3;
    }
    StopResult::Diverged(cutoff)
}

/// CSV dump: `index,numerator,denominator`, one term per line.
pub fn sequence_csv(seq: &[Rational]) -> String {
    let mut out = String::from("index,numerator,denominator\n");
    for (i, u) in seq.iter().enumerate() {
        out.push_str(&format!("{i},{},{}\n", u.numer(), u.denom()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn params(r: Rational, theta: Rational, delta: Rational) -> StrandParams {
        StrandParams::new(r, theta, delta)
    }

    fn rats(values: &[&str]) -> Vec<Rational> {
        values.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn classic_ratio_four_strand() {
        let p = params(rat(4, 1), rat(1, 1), rat(1, 1));
        let seq = strand_sequence(&p, 6);
        assert_eq!(seq, rats(&["1", "1", "2", "3", "4", "4"]));
        assert_eq!(find_stop(&p, 50), StopResult::Stopped(4));
    }

    #[test]
    fn ratio_five_first_attempt_diverges() {
        let p = params(rat(5, 1), rat(1, 1), rat(2, 1));
        let seq = strand_sequence(&p, 12);
        assert_eq!(
            seq[1..],
            rats(&[
                "1", "3", "8", "22", "61", "170", "475", "1329", "3721", "10422", "29196"
            ])[..]
        );
        assert_eq!(find_stop(&p, 11), StopResult::Diverged(11));
    }

    #[test]
    fn nine_halves_chains_digit_for_digit() {
        let p = params(rat(9, 2), rat(1, 1), rat(4, 5));
        let seq = strand_sequence(&p, 9);
        assert_eq!(
            seq,
            rats(&["1", "1", "9/5", "14/5", "43/10", "25/4", "333/40", "737/80", "829/160"])
        );
        assert_eq!(find_stop(&p, 50), StopResult::Stopped(7));

        let p2 = params(rat(9, 2), rat(9, 5), rat(7, 10));
        let seq2 = strand_sequence(&p2, 9);
        assert_eq!(
            seq2,
            rats(&[
                "1",
                "1",
                "5/2",
                "81/20",
                "1377/200",
                "20889/2000",
                "294273/20000",
                "3586761/200000",
                "32757777/2000000"
            ])
        );
        assert_eq!(find_stop(&p2, 50), StopResult::Stopped(7));
    }

    #[test]
    fn boundary_point_is_fibonacci() {
        let p = params(rat(5, 1), rat(2, 1), rat(0, 1));
        let seq = strand_sequence(&p, 20);
        let mut fib = vec![Rational::one(), Rational::one()];
        for i in 2..20 {
            let next = &fib[i - 1] + &fib[i - 2];
            fib.push(next);
        }
        assert_eq!(seq, fib);
    }

    #[test]
    fn broken_head_is_reported() {
        let p = params(rat(4, 1), rat(1, 1), rat(-1, 2));
        assert_eq!(find_stop(&p, 10), StopResult::PatternBroken(2));
    }

    #[test]
    fn digit_budget_reports_divergence() {
        let p = params(rat(5, 1), rat(1, 1), rat(2, 1));
        assert!(matches!(find_stop_with(&p, 10_000, 64), StopResult::Diverged(_)));
    }

    /// Where the discriminant is negative the difference sequence
    /// oscillates, so the scan finds a stop even for generous step sizes.
    #[test]
    fn oscillating_region_always_stops() {
        for r in [rat(4999, 1000), rat(5, 1), rat(49, 10)] {
            for theta in [rat(215, 100), rat(22, 10)] {
                assert!(crate::roots::discriminant(&r, &theta).is_negative());
                let gap = &(&r - &rat(2, 1)) - &theta;
                if !gap.is_positive() {
                    continue;
                }
                let delta = rat(1, 2).min(gap);
                let p = params(r.clone(), theta.clone(), delta.clone());
                assert!(
                    matches!(find_stop(&p, 2_000), StopResult::Stopped(_)),
                    "no stop at r={r}, θ={theta}, δ={delta}"
                );
            }
        }
    }

    /// The difference sequence is governed by the characteristic cubic:
    /// convolving it with the cubic's coefficients reproduces
    /// `x[(θ+δ)(1−x) − 1]` exactly.
    #[test]
    fn generating_function_identity() {
        for (r, theta, delta) in [
            (rat(9, 2), rat(1, 1), rat(4, 5)),
            (rat(9, 2), rat(9, 5), rat(7, 10)),
            (rat(5, 1), rat(2, 1), rat(0, 1)),
            (rat(4, 1), rat(1, 1), rat(1, 1)),
        ] {
            let p = params(r.clone(), theta.clone(), delta.clone());
            let u = strand_sequence(&p, 29);
            let diffs: Vec<Rational> = u.windows(2).map(|w| &w[1] - &w[0]).collect();
            let q = crate::roots::char_poly(&r, &theta).coeffs;
            let s = &theta + &delta;
            // p(x) = (θ+δ−1) x − (θ+δ) x²
            let expect = [
                Rational::zero(),
                &s - &Rational::one(),
                -s.clone(),
                Rational::zero(),
            ];
            for k in 0..24 {
                let mut acc = Rational::zero();
                for i in 0..4.min(k + 1) {
                    acc = acc + &q[i] * &diffs[k - i];
                }
                let want = expect.get(k).cloned().unwrap_or_else(Rational::zero);
                assert_eq!(acc, want, "coefficient {k} for r={r}, θ={theta}, δ={delta}");
            }
        }
    }
}
