//! Exact analysis of the characteristic cubic
//! `q(x) = 1 − (r−θ)x + (r−2θ)x² + θx³`.
//!
//! The sign of its discriminant decides whether the two small roots are
//! real (monotone strand tails) or complex (oscillating tails), and the
//! middle root γ yields the feasibility threshold `1/(1−γ)`: a step size δ
//! with `θ+δ < 1/(1−γ)` sends the difference sequence to −∞, so the strand
//! stops. Everything here is exact rational arithmetic; real roots are
//! isolated by Sturm counting plus bisection, with rational roots detected
//! exactly.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Dense cubic, coefficients ascending: `coeffs[k]` multiplies `x^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cubic {
    pub coeffs: [Rational; 4],
}

impl Cubic {
    pub fn eval(&self, x: &Rational) -> Rational {
        // Horner.
        let mut acc = self.coeffs[3].clone();
        for k in (0..3).rev() {
            acc = acc * x.clone() + self.coeffs[k].clone();
        }
        acc
    }
}

/// Builds the characteristic cubic and checks the two published forms agree:
/// `1 − (r−θ)x + (r−2θ)x² + θx³  ==  1 + r·x(x−1) + θ·x(x−1)²`.
pub fn char_poly(r: &Rational, theta: &Rational) -> Cubic {
    assert!(theta.is_positive(), "leading coefficient θ must be positive");
    let two = Rational::from_int(2);
    let q = Cubic {
        coeffs: [
            Rational::one(),
            -(r - theta),
            r - &(&two * theta),
            theta.clone(),
        ],
    };
    // Expansion of the product form: 1 + (θ−r)x + (r−2θ)x² + θx³.
    let alt = [
        Rational::one(),
        theta - r,
        r - &(&two * theta),
        theta.clone(),
    ];
    assert_eq!(q.coeffs, alt, "the two cubic forms must expand identically");
    q
}

/// Discriminant of the characteristic cubic as a polynomial in (r, θ):
/// `−27θ² − 4θ³ + 6θ²r + 6θr² + θ²r² − 4r³ − 2θr³ + r⁴`.
pub fn discriminant(r: &Rational, theta: &Rational) -> Rational {
    let t2 = theta * theta;
    let t3 = &t2 * theta;
    let r2 = r * r;
    let r3 = &r2 * r;
    let r4 = &r3 * r;
    let c = |n: i64| Rational::from_int(n);
    -(&c(27) * &t2) - &(&c(4) * &t3)
        + &(&c(6) * &(&t2 * r))
        + &(&c(6) * &(theta * &r2))
        + &(&t2 * &r2)
        - &(&c(4) * &r3)
        - &(&c(2) * &(theta * &r3))
        + r4
}

/// The θ = 1 specialization `−31 + 6r + 7r² − 6r³ + r⁴`.
pub fn discriminant_theta1(r: &Rational) -> Rational {
    let c = |n: i64| Rational::from_int(n);
    let r2 = r * r;
    let r3 = &r2 * r;
    let r4 = &r3 * r;
    c(-31) + &(&c(6) * r) + &(&c(7) * &r2) - &(&c(6) * &r3) + r4
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootEnclosure {
    pub lo: Rational,
    pub hi: Rational,
    /// Set when the root is a rational number found exactly.
    pub exact: Option<Rational>,
}

impl RootEnclosure {
    fn exact(x: Rational) -> Self {
        RootEnclosure { lo: x.clone(), hi: x.clone(), exact: Some(x) }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

// --- small dense polynomial helpers (internal) ------------------------------

#[derive(Clone, Debug, PartialEq)]
struct Poly(Vec<Rational>);

impl Poly {
    fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x.clone() + c.clone();
        }
        acc
    }

    fn derivative(&self) -> Poly {
        if self.0.len() <= 1 {
            return Poly(Vec::new());
        }
        Poly::new(
            self.0[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| Rational::from_int(i as i64 + 1) * c.clone())
                .collect(),
        )
    }

    /// Remainder of `self / divisor` (euclidean, exact rationals).
    fn rem(&self, divisor: &Poly) -> Poly {
        assert!(!divisor.is_zero());
        let mut rem = self.0.clone();
        let dlead = divisor.0.last().unwrap();
        let ddeg = divisor.degree();
        while rem.len() > ddeg && !rem.is_empty() {
            let k = rem.len() - 1;
            let factor = rem[k].clone() / dlead.clone();
            if !factor.is_zero() {
                for (i, dc) in divisor.0.iter().enumerate() {
                    let idx = k - ddeg + i;
                    rem[idx] = &rem[idx] - &(&factor * dc);
                }
            }
            rem.pop();
            while rem.last().is_some_and(|c| c.is_zero()) {
                rem.pop();
            }
        }
        Poly::new(rem)
    }
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        if chain[n - 1].is_zero() {
            chain.pop();
            break;
        }
        let r = chain[n - 2].rem(&chain[n - 1]);
        if r.is_zero() {
            break;
        }
        let neg = Poly::new(r.0.into_iter().map(|c| -c).collect());
        chain.push(neg);
    }
    chain
}

fn sign_changes(chain: &[Poly], x: &Rational) -> usize {
    let signs: Vec<i8> = chain
        .iter()
        .map(|p| {
            let v = p.eval(x);
            if v.is_zero() {
                0
            } else if v.is_positive() {
                1
            } else {
                -1
            }
        })
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Number of distinct real roots in `(a, b]`.
fn roots_in(chain: &[Poly], a: &Rational, b: &Rational) -> usize {
    sign_changes(chain, a) - sign_changes(chain, b)
}

/// Tries to find a rational root of the cubic by the rational root theorem,
/// bounded so pathological coefficients just skip exact detection.
fn rational_root(q: &Cubic) -> Option<Rational> {
    // Clear denominators to an integer cubic.
    let mut l = BigInt::from(1);
    for c in &q.coeffs {
        l = c.lcm_denom(&l);
    }
    let ints: Vec<BigInt> = q
        .coeffs
        .iter()
        .map(|c| (Rational::from_bigint(l.clone()) * c.clone()).numer().clone())
        .collect();
    let a0 = ints[0].magnitude().clone();
    let a3 = ints[3].magnitude().clone();
    const LIMIT: u64 = 1_000_000;
    if a0.is_zero() {
        return Some(Rational::zero());
    }
    if a0 > LIMIT.into() || a3 > LIMIT.into() {
        return None;
    }
    let divisors = |n: u64| -> Vec<u64> {
        let mut d = Vec::new();
        let mut i = 1;
        while i * i <= n {
            if n.is_multiple_of(i) {
                d.push(i);
                d.push(n / i);
            }
            i += 1;
        }
        d
    };
    let a0: u64 = a0.try_into().ok()?;
    let a3: u64 = a3.try_into().ok()?;
    for p in divisors(a0) {
        for qd in divisors(a3) {
            for sign in [1i64, -1] {
                let cand = Rational::ratio(BigInt::from(sign * p as i64), BigInt::from(qd))
                    .expect("nonzero denominator");
                if q.eval(&cand).is_zero() {
                    return Some(cand);
                }
            }
        }
    }
    None
}

/// Floor square root as an exact-square test.
fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let s = n.sqrt();
    if &(&s * &s) == n {
        Some(s)
    } else {
        None
    }
}

/// Isolates all real roots of a squarefree cubic (discriminant nonzero) to
/// width at most `eps`, sorted ascending. Three enclosures when the
/// discriminant is positive, one when negative.
pub fn isolate_real_roots(q: &Cubic, eps: &Rational) -> Result<Vec<RootEnclosure>> {
    assert!(eps.is_positive());
    let disc = cubic_disc(q);
    if disc.is_zero() {
        return Err(Error::DiscriminantZero);
    }

    // Exact path: a rational root lets us finish the quadratic factor
    // exactly or with plain sign bisection.
    if let Some(rho) = rational_root(q) {
        let mut roots = vec![RootEnclosure::exact(rho.clone())];
        // q = (x − ρ)(c3 x² + bx + c) with b = c2 + ρ c3, c = −c0/ρ ... do
        // synthetic division explicitly.
        let c3 = q.coeffs[3].clone();
        let b = &q.coeffs[2] + &(&rho * &c3);
        let c = &q.coeffs[1] + &(&rho * &b);
        debug_assert!((&q.coeffs[0] + &(&rho * &c)).is_zero());
        // Quadratic c3 x² + b x + c.
        let quad_disc = &(&b * &b) - &(Rational::from_int(4) * &c3 * c.clone());
        if quad_disc.is_positive() {
            let num_sq = quad_disc.numer().clone();
            let den_sq = quad_disc.denom().clone();
            let exact = match (exact_sqrt(&num_sq), exact_sqrt(&den_sq)) {
                (Some(sn), Some(sd)) => Some(Rational::ratio(sn, sd).unwrap()),
                _ => None,
            };
            let two_c3 = Rational::from_int(2) * c3.clone();
            if let Some(s) = exact {
                for sign in [-1i64, 1] {
                    let root = (&(-&b) + &(Rational::from_int(sign) * s.clone())) / two_c3.clone();
                    roots.push(RootEnclosure::exact(root));
                }
            } else {
                let quad = Poly::new(vec![c.clone(), b.clone(), c3.clone()]);
                let vertex = -&b / two_c3;
                let m = quad_root_bound(&c3, &b, &c);
                roots.push(bisect_to(&quad, &(-&m), &vertex, eps));
                roots.push(bisect_to(&quad, &vertex, &m, eps));
            }
        } else if quad_disc.is_zero() {
            return Err(Error::DiscriminantZero);
        }
        roots.sort_by(|a, b| a.lo.cmp(&b.lo));
        return Ok(roots);
    }

    // General path: Sturm isolation, then sign bisection.
    let p = Poly::new(q.coeffs.to_vec());
    let chain = sturm_chain(&p);
    let m = cauchy_bound(q);
    let total = roots_in(&chain, &(-&m), &m);
    debug_assert!(total == 1 || total == 3);

    let mut isolated: Vec<(Rational, Rational)> = Vec::new();
    let mut stack = vec![(-&m, m.clone())];
    while let Some((a, b)) = stack.pop() {
        match roots_in(&chain, &a, &b) {
            0 => {}
            1 => isolated.push((a, b)),
            _ => {
                let mid = (&a + &b) / Rational::from_int(2);
                stack.push((a, mid.clone()));
                stack.push((mid, b));
            }
        }
    }
    let mut roots: Vec<RootEnclosure> = isolated
        .into_iter()
        .map(|(a, b)| bisect_to(&p, &a, &b, eps))
        .collect();
    roots.sort_by(|a, b| a.lo.cmp(&b.lo));
    Ok(roots)
}

/// Cubic discriminant from coefficients (used internally so callers can
/// pass any cubic, not only the characteristic one).
fn cubic_disc(q: &Cubic) -> Rational {
    let [d, c, b, a] = &q.coeffs; // a x³ + b x² + c x + d
    let c18 = Rational::from_int(18);
    let c4 = Rational::from_int(4);
    let c27 = Rational::from_int(27);
    &(&(&(&c18 * a) * b) * c) * d - &(&c4 * &(&(b * b) * &(b * d)))
        + &(&(b * b) * &(c * c))
        - &(&c4 * &(a * &(&(c * c) * c)))
        - &(&c27 * &(&(a * a) * &(d * d)))
}

fn cauchy_bound(q: &Cubic) -> Rational {
    let lead = q.coeffs[3].abs();
    let mut m = Rational::zero();
    for c in &q.coeffs[..3] {
        let ratio = c.abs() / lead.clone();
        if ratio > m {
            m = ratio;
        }
    }
    m + Rational::one()
}

fn quad_root_bound(a: &Rational, b: &Rational, c: &Rational) -> Rational {
    let lead = a.abs();
    let m1 = b.abs() / lead.clone();
    let m2 = c.abs() / lead;
    m1.max(m2) + Rational::one()
}

/// Sign bisection on `[lo, hi]` known to bracket exactly one simple root.
fn bisect_to(p: &Poly, lo: &Rational, hi: &Rational, eps: &Rational) -> RootEnclosure {
    let mut lo = lo.clone();
    let mut hi = hi.clone();
    let mut flo = p.eval(&lo);
    if flo.is_zero() {
        return RootEnclosure::exact(lo);
    }
    let fhi = p.eval(&hi);
    if fhi.is_zero() {
        return RootEnclosure::exact(hi);
    }
    debug_assert!(flo.is_positive() != fhi.is_positive());
    let two = Rational::from_int(2);
    while (&hi - &lo) > *eps {
        let mid = (&lo + &hi) / two.clone();
        let fmid = p.eval(&mid);
        if fmid.is_zero() {
            return RootEnclosure::exact(mid);
        }
        if fmid.is_positive() == flo.is_positive() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    RootEnclosure { lo, hi, exact: None }
}

/// Certified enclosure of the feasibility margin `1/(1−γ) − θ`, where γ is
/// the middle real root. A positive lower bound certifies that some δ > 0
/// makes the strand's difference sequence head to −∞.
pub fn feasibility_margin(
    r: &Rational,
    theta: &Rational,
    eps: &Rational,
) -> Result<(Rational, Rational)> {
    let d = discriminant(r, theta);
    if d.is_zero() {
        return Err(Error::DiscriminantZero);
    }
    if d.is_negative() {
        return Err(Error::ComplexRoots);
    }
    let q = char_poly(r, theta);
    let mut eps = eps.clone();
    loop {
        let roots = isolate_real_roots(&q, &eps)?;
        let gamma = &roots[1];
        if gamma.hi >= Rational::one() {
            if gamma.lo > Rational::one() {
                return Err(Error::OutOfDomain(format!(
                    "middle root of q at r={r}, θ={theta} is not below 1"
                )));
            }
            eps = eps / Rational::from_int(2);
            continue;
        }
        // The margin is increasing in γ below 1, so the enclosure endpoints
        // map straight through.
        let lo = (Rational::one() - gamma.lo.clone()).recip() - theta.clone();
        let hi = (Rational::one() - gamma.hi.clone()).recip() - theta.clone();
        return Ok((lo, hi));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

/// Sign of the leading partial-fraction coefficient over the middle root,
/// decided by the sign of `(θ+δ)(1−γ) − 1`; negative means the difference
/// sequence tends to −∞ and the strand must stop.
pub fn c_sign(r: &Rational, theta: &Rational, delta: &Rational) -> Result<Sign> {
    let d = discriminant(r, theta);
    if d.is_zero() {
        return Err(Error::DiscriminantZero);
    }
    if d.is_negative() {
        return Err(Error::ComplexRoots);
    }
    let q = char_poly(r, theta);
    let s = theta + delta;
    if s.is_positive() {
        // Exact boundary: γ = 1 − 1/(θ+δ) is a root exactly when the
        // expression vanishes; confirm it is the middle root.
        let candidate = Rational::one() - s.recip();
        if q.eval(&candidate).is_zero() {
            let roots = isolate_real_roots(&q, &Rational::new(1, 1 << 20))?;
            if roots[1].contains(&candidate) {
                return Ok(Sign::Zero);
            }
        }
    }
    let mut eps = Rational::new(1, 1 << 10);
    loop {
        let roots = isolate_real_roots(&q, &eps)?;
        let gamma = &roots[1];
        let at_lo = &(&s * &(Rational::one() - gamma.lo.clone())) - &Rational::one();
        let at_hi = &(&s * &(Rational::one() - gamma.hi.clone())) - &Rational::one();
        if at_lo.is_negative() && at_hi.is_negative() {
            return Ok(Sign::Negative);
        }
        if at_lo.is_positive() && at_hi.is_positive() {
            return Ok(Sign::Positive);
        }
        eps = eps / Rational::from_int(2);
    }
}

/// The ratio on the feasibility boundary curve `1/(1−γ) = θ`, namely
/// `r = 1 + θ²/(θ−1)`, defined for θ > 1.
pub fn boundary_curve_r(theta: &Rational) -> Result<Rational> {
    if theta <= &Rational::one() {
        return Err(Error::OutOfDomain(format!("boundary curve needs θ > 1, got {theta}")));
    }
    Ok(Rational::one() + &(theta * theta) / &(theta - &Rational::one()))
}

/// Assembled analysis for one (r, θ) point.
#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub r: Rational,
    pub theta: Rational,
    pub discriminant: Rational,
    /// 3 when all roots are real, 1 when two are complex, 0 on the
    /// degenerate boundary (repeated root).
    pub real_root_count: usize,
    pub repeated_root: bool,
    pub alpha: Option<RootEnclosure>,
    pub gamma: Option<RootEnclosure>,
    pub beta: Option<RootEnclosure>,
    pub margin: Option<(Rational, Rational)>,
    pub c_sign: Option<Sign>,
}

pub fn analyze(
    r: &Rational,
    theta: &Rational,
    eps: &Rational,
    delta: Option<&Rational>,
) -> AnalysisReport {
    let d = discriminant(r, theta);
    let mut report = AnalysisReport {
        r: r.clone(),
        theta: theta.clone(),
        discriminant: d.clone(),
        real_root_count: 0,
        repeated_root: d.is_zero(),
        alpha: None,
        gamma: None,
        beta: None,
        margin: None,
        c_sign: None,
    };
    if d.is_zero() {
        return report;
    }
    let q = char_poly(r, theta);
    let roots = isolate_real_roots(&q, eps).expect("nonzero discriminant isolates");
    if d.is_positive() {
        report.real_root_count = 3;
        report.alpha = Some(roots[0].clone());
        report.gamma = Some(roots[1].clone());
        report.beta = Some(roots[2].clone());
        report.margin = feasibility_margin(r, theta, eps).ok();
        if let Some(delta) = delta {
            report.c_sign = c_sign(r, theta, delta).ok();
        }
    } else {
        report.real_root_count = 1;
        report.alpha = Some(roots[0].clone());
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn char_poly_examples() {
        let q = char_poly(&rat(4, 1), &rat(1, 1));
        assert_eq!(q.coeffs, [rat(1, 1), rat(-3, 1), rat(2, 1), rat(1, 1)]);
        let q = char_poly(&rat(5, 1), &rat(2, 1));
        assert_eq!(q.coeffs, [rat(1, 1), rat(-3, 1), rat(1, 1), rat(2, 1)]);
        let q = char_poly(&rat(5, 1), &rat(1, 1));
        assert_eq!(q.coeffs, [rat(1, 1), rat(-4, 1), rat(3, 1), rat(1, 1)]);
    }

    #[test]
    fn discriminant_values() {
        assert_eq!(discriminant(&rat(4, 1), &rat(1, 1)), rat(-23, 1));
        assert_eq!(discriminant(&rat(5, 1), &rat(1, 1)), rat(49, 1));
        assert_eq!(discriminant(&rat(5, 1), &rat(2, 1)), rat(5, 1));
    }

    #[test]
    fn theta1_forms_agree() {
        for i in 0..=100 {
            let r = rat(400 + i, 100);
            assert_eq!(discriminant(&r, &rat(1, 1)), discriminant_theta1(&r));
        }
    }

    #[test]
    fn fibonacci_point_roots_are_exact() {
        let q = char_poly(&rat(5, 1), &rat(2, 1));
        let roots = isolate_real_roots(&q, &rat(1, 1_000_000)).unwrap();
        assert_eq!(roots.len(), 3);
        assert_eq!(roots[1].exact, Some(rat(1, 2)));
        // β in (0.61, 0.62), α in (−1.62, −1.61): the golden-ratio pair.
        assert!(roots[2].lo > rat(61, 100) && roots[2].hi < rat(62, 100));
        assert!(roots[0].lo > rat(-162, 100) && roots[0].hi < rat(-161, 100));
    }

    #[test]
    fn gamma_at_five_one() {
        let q = char_poly(&rat(5, 1), &rat(1, 1));
        let roots = isolate_real_roots(&q, &rat(1, 10_000)).unwrap();
        let gamma = &roots[1];
        assert!(gamma.lo >= rat(35, 100) && gamma.hi <= rat(36, 100));
    }

    #[test]
    fn single_real_root_when_discriminant_negative() {
        let q = char_poly(&rat(4, 1), &rat(1, 1));
        let roots = isolate_real_roots(&q, &rat(1, 1000)).unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots[0].lo >= rat(-7, 2) && roots[0].hi <= rat(-3, 1));
    }

    #[test]
    fn margin_examples() {
        // Exactly zero at the boundary point.
        let (lo, hi) = feasibility_margin(&rat(5, 1), &rat(2, 1), &rat(1, 1000)).unwrap();
        assert_eq!(lo, rat(0, 1));
        assert_eq!(hi, rat(0, 1));

        // Positive with a certified floor above 1/25.
        let (lo, _) = feasibility_margin(&rat(5, 1), &rat(213, 100), &rat(1, 1 << 20)).unwrap();
        assert!(lo > rat(1, 25), "margin lower bound {lo}");

        // Around 0.55 at θ = 1.
        let (lo, hi) = feasibility_margin(&rat(5, 1), &rat(1, 1), &rat(1, 1 << 16)).unwrap();
        assert!(lo > rat(53, 100) && hi < rat(57, 100));
    }

    #[test]
    fn repeated_roots_are_reported_not_guessed() {
        // (x−1)²(x+1) = 1 − x − x² + x³ has a vanishing discriminant.
        let q = Cubic { coeffs: [rat(1, 1), rat(-1, 1), rat(-1, 1), rat(1, 1)] };
        assert!(matches!(
            isolate_real_roots(&q, &rat(1, 100)),
            Err(Error::DiscriminantZero)
        ));
    }

    #[test]
    fn margin_requires_real_roots() {
        assert!(matches!(
            feasibility_margin(&rat(4, 1), &rat(1, 1), &rat(1, 1000)),
            Err(Error::ComplexRoots)
        ));
    }

    #[test]
    fn c_sign_examples() {
        assert_eq!(c_sign(&rat(5, 1), &rat(2, 1), &rat(0, 1)).unwrap(), Sign::Zero);
        assert_eq!(c_sign(&rat(5, 1), &rat(1, 1), &rat(1, 2)).unwrap(), Sign::Negative);
        assert_eq!(c_sign(&rat(5, 1), &rat(1, 1), &rat(1, 1)).unwrap(), Sign::Positive);
    }

    #[test]
    fn boundary_curve_examples() {
        assert_eq!(boundary_curve_r(&rat(2, 1)).unwrap(), rat(5, 1));
        assert_eq!(boundary_curve_r(&rat(3, 2)).unwrap(), rat(11, 2));
        assert_eq!(boundary_curve_r(&rat(3, 1)).unwrap(), rat(11, 2));
        assert!(matches!(boundary_curve_r(&rat(1, 1)), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn assembled_report_at_landmark_points() {
        let report = analyze(&rat(5, 1), &rat(2, 1), &rat(1, 1 << 16), Some(&rat(0, 1)));
        assert_eq!(report.real_root_count, 3);
        assert!(!report.repeated_root);
        assert_eq!(report.gamma.as_ref().unwrap().exact, Some(rat(1, 2)));
        assert_eq!(report.margin, Some((rat(0, 1), rat(0, 1))));
        assert_eq!(report.c_sign, Some(Sign::Zero));
        // α < −1 < 0 < γ < β < 1 on the real side.
        assert!(report.alpha.as_ref().unwrap().hi < rat(-1, 1));
        assert!(report.beta.as_ref().unwrap().hi < rat(1, 1));

        let report = analyze(&rat(4, 1), &rat(1, 1), &rat(1, 1 << 16), None);
        assert_eq!(report.real_root_count, 1);
        assert!(report.discriminant.is_negative());
        assert!(report.margin.is_none());
        assert!(report.gamma.is_none());
    }

    #[test]
    fn root_count_matches_discriminant_on_grid() {
        for i in 0..=20 {
            for j in 0..=24 {
                let r = rat(4, 1) + rat(i, 20);
                let theta = rat(1, 1) + rat(j, 20);
                let d = discriminant(&r, &theta);
                if d.is_zero() {
                    continue;
                }
                let roots = isolate_real_roots(&char_poly(&r, &theta), &rat(1, 1024)).unwrap();
                let expect = if d.is_positive() { 3 } else { 1 };
                assert_eq!(roots.len(), expect, "at r={r}, θ={theta}");
            }
        }
    }

    #[test]
    fn product_of_roots_within_enclosures() {
        // For positive discriminant the enclosures must certify
        // α·β·γ = −1/θ.
        for (r, theta) in [(rat(5, 1), rat(1, 1)), (rat(5, 1), rat(2, 1)), (rat(499, 100), rat(3, 2))] {
            let d = discriminant(&r, &theta);
            if !d.is_positive() {
                continue;
            }
            let roots = isolate_real_roots(&char_poly(&r, &theta), &rat(1, 1 << 16)).unwrap();
            let lo = |e: &RootEnclosure| e.lo.clone();
            let hi = |e: &RootEnclosure| e.hi.clone();
            // α < 0 < γ < β: the product is monotone enough to bound crudely
            // by taking all corner products.
            let mut corners = Vec::new();
            for a in [lo(&roots[0]), hi(&roots[0])] {
                for g in [lo(&roots[1]), hi(&roots[1])] {
                    for b in [lo(&roots[2]), hi(&roots[2])] {
                        corners.push(&(&a * &g) * &b);
                    }
                }
            }
            let min = corners.iter().cloned().reduce(|a, b| a.min(b)).unwrap();
            let max = corners.iter().cloned().reduce(|a, b| a.max(b)).unwrap();
            let target = -theta.recip();
            assert!(min <= target && target <= max, "αβγ enclosure misses −1/θ at r={r}, θ={theta}");
        }
    }

    #[test]
    fn bracket_of_small_roots() {
        // q(0) = q(1) = 1 > 0 and q(0.56) < 0 across the strip, so
        // 0 < γ < 0.56 < β < 1 whenever both are real.
        for r in [rat(4999, 1000), rat(5, 1)] {
            for j in 0..=11 {
                let theta = rat(1, 1) + rat(j, 10).min(rat(113, 100));
                let q = char_poly(&r, &theta);
                assert!(q.eval(&rat(0, 1)).is_positive());
                assert!(q.eval(&rat(1, 1)).is_positive());
                assert!(q.eval(&rat(56, 100)).is_negative(), "q(0.56) at r={r}, θ={theta}");
            }
        }
    }

    #[test]
    fn square_witness_at_five() {
        // q(1 − 1/θ) = (1 − 2/θ)² at r = 5, exactly.
        for theta in [rat(3, 2), rat(2, 1), rat(213, 100), rat(9, 5)] {
            let q = char_poly(&rat(5, 1), &theta);
            let x = Rational::one() - theta.recip();
            let w = Rational::one() - rat(2, 1) / theta.clone();
            assert_eq!(q.eval(&x), &w * &w);
        }
    }

    #[test]
    fn gamma_decreases_in_r() {
        for j in [0i64, 5, 9, 11] {
            let theta = rat(1, 1) + rat(j, 10).min(rat(113, 100));
            let q_lo = char_poly(&rat(4999, 1000), &theta);
            let q_hi = char_poly(&rat(5, 1), &theta);
            let eps = rat(1, 1 << 18);
            let g_lo = isolate_real_roots(&q_lo, &eps).unwrap()[1].clone();
            let g_hi = isolate_real_roots(&q_hi, &eps).unwrap()[1].clone();
            assert!(g_hi.hi < g_lo.lo, "γ must drop as r grows at θ={theta}");
        }
    }

    #[test]
    fn discriminant_negative_at_wide_theta() {
        for r in [rat(4999, 1000), rat(5, 1)] {
            assert!(discriminant(&r, &rat(215, 100)).is_negative());
        }
        // dD/dr > 0 spot checks in the same strip.
        let d_dr = |r: &Rational, t: &Rational| {
            let c = |n: i64| rat(n, 1);
            let r2 = r * r;
            let r3 = &r2 * r;
            let t2 = t * t;
            &(&c(6) * &t2) + &(&c(12) * &(t * r)) + &(&c(2) * &(&t2 * r))
                - &(&c(12) * &r2)
                - &(&c(6) * &(t * &r2))
                + &(&c(4) * &r3)
        };
        for r in [rat(4999, 1000), rat(5, 1)] {
            assert!(d_dr(&r, &rat(215, 100)).is_positive());
            assert!(d_dr(&r, &rat(21, 10)).is_positive());
        }
    }
}
