//! Quasicaps and the gap-reducing step.
//!
//! A quasicap is a normal cap (twin 1-tall boxes on top, mirror-symmetric
//! sides, at most one supporter under the lower twin) whose key box spans
//! depths `[r−θ, r]` but may fall short of the lower twin, leaving a gap.
//! The gap-reducing step turns a θ-quasicap into a (θ+δ)-quasicap whenever
//! the strand sequence for (r, θ, δ) stops: it lays a strand of boxes of
//! heights `u_2, ..., u_{N+1}` down each side and pastes in N affine copies
//! of the old cap's side, squeezed vertically by `u_{n+1} − u_n` and shifted
//! so each copy's key-box image lands exactly under the next strand box.
//!
//! Nothing from the construction is trusted: every output is re-verified
//! geometrically (with the twin gaps waived while θ < r−2).

use crate::boxcap::{
    verify_box_cap_relaxed, BoxCap, BoxId, CapBox, CapCondition, CapReport, CapViolation, Side,
    Subject, SupportGapExemption,
};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::Rational;
use crate::strand::{find_stop_with, strand_sequence, StopResult, StrandParams, DEFAULT_MAX_BITS};

#[derive(Clone, Debug)]
pub struct Quasicap {
    pub cap: BoxCap,
    /// The right side's key box (sole supporter of the lower twin).
    pub key_box: BoxId,
    /// (upper, lower) twin ids.
    pub twins: (BoxId, BoxId),
    /// Key box height; the cap is a genuine r-cap once θ = r − 2.
    pub theta: Rational,
}

impl Quasicap {
    pub fn gap_is_closed(&self) -> bool {
        self.theta == &self.cap.r - &Rational::from_int(2)
    }

    /// Verifies the cap conditions (twin support gaps waived while the gap
    /// is open) plus the shape conditions: twin geometry, key box span,
    /// a single supporter under the lower twin, no box top above the key
    /// box top except the twins, and mirror symmetry of the sides.
    pub fn verify(&self) -> CapReport {
        let r = &self.cap.r;
        let gap = (Rational::from_int(2), r - &self.theta);
        let exemptions = [
            SupportGapExemption { box_id: self.twins.0, gap: gap.clone() },
            SupportGapExemption { box_id: self.twins.1, gap },
        ];
        let mut report = verify_box_cap_relaxed(&self.cap, &exemptions);
        let mut extra = Vec::new();
        let mut shape = |ok: bool, witness: String| {
            if !ok {
                extra.push(CapViolation {
                    subject: Subject::Cap,
                    condition: CapCondition::Geometry,
                    witness,
                });
            }
        };

        let upper = self.cap.box_by_id(self.twins.0);
        let lower = self.cap.box_by_id(self.twins.1);
        let key = self.cap.box_by_id(self.key_box);
        match (upper, lower, key) {
            (Some(u), Some(d), Some(k)) => {
                shape(
                    u.top.is_zero() && u.height == Rational::one(),
                    "upper twin must be 1-tall at the cap top".into(),
                );
                shape(
                    d.top == Rational::one() && d.height == Rational::one(),
                    "lower twin must be 1-tall at depth [1, 2]".into(),
                );
                shape(
                    k.height == self.theta && k.bottom() == *r,
                    format!("key box must span [r−θ, r] with θ = {}", self.theta),
                );
                shape(k.supports == Some(self.twins.1), "key box must support the lower twin".into());

                let lower_supporters: Vec<BoxId> = self
                    .cap
                    .boxes
                    .iter()
                    .filter(|b| b.supports == Some(self.twins.1))
                    .map(|b| b.id)
                    .collect();
                shape(
                    lower_supporters == vec![self.key_box],
                    format!("lower twin must have exactly the key box as supporter, found {lower_supporters:?}"),
                );

                let key_top = &k.top;
                for b in &self.cap.boxes {
                    if b.id != self.twins.0 && b.id != self.twins.1 && &b.top < key_top {
                        shape(false, format!("box {} tops out above the key box", b.id));
                    }
                }
            }
            _ => shape(false, "twin or key box ids do not resolve".into()),
        }

        // Mirror symmetry of the sides (the twins themselves are offset).
        let reflect = |iv: &Interval| Interval::new(-iv.hi(), -iv.lo());
        let mut left: Vec<_> = self
            .cap
            .boxes
            .iter()
            .filter(|b| b.side == Side::Left)
            .map(|b| (b.x.clone(), b.top.clone(), b.height.clone(), b.cone_depth.clone(), b.cone_x.clone()))
            .collect();
        let mut right: Vec<_> = self
            .cap
            .boxes
            .iter()
            .filter(|b| b.side == Side::Right)
            .map(|b| (reflect(&b.x), b.top.clone(), b.height.clone(), b.cone_depth.clone(), reflect(&b.cone_x)))
            .collect();
        left.sort();
        right.sort();
        shape(left == right, "sides are not mirror images".into());

        if !extra.is_empty() {
            report.violations.extend(extra);
            report.violations.sort_by(|a, b| {
                (&a.subject, a.condition, &a.witness).cmp(&(&b.subject, b.condition, &b.witness))
            });
            report.ok = false;
        }
        report
    }
}

/// The 1-quasicap: twins plus a 1-tall key box per side, cones at depth r.
pub fn initial_quasicap(r: &Rational) -> Result<Quasicap> {
    if r <= &Rational::from_int(3) {
        return Err(Error::InvalidParam(format!(
            "initial quasicap needs r > 3, got {r}"
        )));
    }
    let one = Rational::one();
    let strip = |a: i64, b: i64| Interval::of_ints(a, b).middle_third();
    let boxes = vec![
        CapBox {
            id: 0,
            x: Interval::of_ints(-2, 1),
            top: Rational::zero(),
            height: one.clone(),
            cone_depth: r.clone(),
            cone_x: strip(-2, -1),
            supports: None,
            side: Side::Center,
        },
        CapBox {
            id: 1,
            x: Interval::of_ints(0, 2),
            top: one.clone(),
            height: one.clone(),
            cone_depth: r.clone(),
            cone_x: strip(1, 2),
            supports: Some(0),
            side: Side::Center,
        },
        CapBox {
            id: 2,
            x: Interval::of_ints(2, 4),
            top: r - &one,
            height: one.clone(),
            cone_depth: r.clone(),
            cone_x: strip(2, 3),
            supports: Some(1),
            side: Side::Right,
        },
        CapBox {
            id: 3,
            x: Interval::of_ints(-4, -2),
            top: r - &one,
            height: one.clone(),
            cone_depth: r.clone(),
            cone_x: strip(-3, -2),
            supports: Some(0),
            side: Side::Left,
        },
    ];
    let qc = Quasicap {
        cap: BoxCap { r: r.clone(), boxes },
        key_box: 2,
        twins: (0, 1),
        theta: one,
    };
    let report = qc.verify();
    if !report.ok {
        return Err(Error::InvalidCap(format!(
            "initial quasicap failed verification: {:?}",
            report.violations[0]
        )));
    }
    Ok(qc)
}

/// One gap-reducing step. Needs `find_stop` to certify a stop for
/// (r, θ, δ); the output is a verified (θ+δ)-quasicap.
pub fn gap_step(qc: &Quasicap, delta: &Rational, cutoff: usize, budget: usize) -> Result<Quasicap> {
    gap_step_with(qc, delta, cutoff, DEFAULT_MAX_BITS, budget)
}

pub fn gap_step_with(
    qc: &Quasicap,
    delta: &Rational,
    cutoff: usize,
    max_bits: u64,
    budget: usize,
) -> Result<Quasicap> {
    let r = qc.cap.r.clone();
    let theta = qc.theta.clone();
    if !delta.is_positive() {
        return Err(Error::InvalidParam(format!("step size must be positive, got {delta}")));
    }
    if theta < Rational::one() || theta >= &r - &Rational::from_int(2) {
        return Err(Error::InvalidParam(format!(
            "gap step needs 1 <= θ < r − 2, got θ = {theta}, r = {r}"
        )));
    }

    let params = StrandParams::new(r.clone(), theta.clone(), delta.clone());
    let n_stop = match find_stop_with(&params, cutoff, max_bits) {
        StopResult::Stopped(n) => n,
        other => {
            return Err(Error::NotStopped(format!(
                "(r, θ, δ) = ({r}, {theta}, {delta}): {other:?}"
            )))
        }
    };
    let u = strand_sequence(&params, n_stop + 2);

    let old_right: Vec<&CapBox> = qc.cap.boxes.iter().filter(|b| b.side == Side::Right).collect();
    let m = old_right.len();
    let total = 2 + 2 * (n_stop + n_stop * m);
    if total > budget {
        return Err(Error::BudgetExceeded(format!(
            "gap step would build {total} boxes, budget {budget}"
        )));
    }

    // Horizontal frame of the old side: its hull and the key-contact point
    // (the lower twin's right end, which meets the old key box).
    let old_lower = qc.cap.box_by_id(qc.twins.1).expect("twin resolves");
    let contact = old_lower.x.hi().clone();
    let mut hull_lo = contact.clone();
    let mut hull_hi = contact.clone();
    for b in &old_right {
        if b.x.lo() < &hull_lo {
            hull_lo = b.x.lo().clone();
        }
        if b.x.hi() > &hull_hi {
            hull_hi = b.x.hi().clone();
        }
    }
    let hull_len = &hull_hi - &hull_lo;
    debug_assert!(hull_len.is_positive());

    // Right-side zones: [0,1] center, [1,2] lower twin strip, then slots
    // and strips alternating; the last strand box and its copy sit outside.
    let slot = |n: usize| -> Interval {
        if n < n_stop {
            Interval::of_ints(2 * n as i64, 2 * n as i64 + 1)
        } else {
            Interval::of_ints(2 * n as i64 + 1, 2 * n as i64 + 2)
        }
    };
    let strip_zone = |n: usize| -> Interval {
        // Strip of strand box u_n (n in 2..=N+1): [1,2] belongs to the
        // lower twin, then strips at [2n−1, 2n] interleaved with slots.
        if n <= n_stop {
            Interval::of_ints(2 * n as i64 - 1, 2 * n as i64)
        } else {
            Interval::of_ints(2 * n_stop as i64, 2 * n_stop as i64 + 1)
        }
    };

    // Copy maps: horizontal μ_n (reversed for n < N, forward for n = N) and
    // vertical φ_n(y) = (u_{n+1} − u_n) y + r u_n, with φ_N = φ_{N−1}.
    let mu = |n: usize, y: &Rational| -> Rational {
        let s = slot(n);
        let t = (y - &hull_lo) / hull_len.clone();
        if n < n_stop {
            s.hi() - &t
        } else {
            s.lo() + &t
        }
    };
    let phi_scale = |n: usize| -> Rational {
        let k = if n < n_stop { n } else { n_stop - 1 };
        &u[k + 1] - &u[k]
    };
    let phi_offset = |n: usize| -> Rational {
        let k = if n < n_stop { n } else { n_stop - 1 };
        &r * &u[k]
    };

    let b_point = |n: usize| mu(n, &contact);

    let mut boxes: Vec<CapBox> = Vec::with_capacity(total);
    // Twins.
    boxes.push(CapBox {
        id: 0,
        x: Interval::new(-b_point(1), Rational::one()),
        top: Rational::zero(),
        height: Rational::one(),
        cone_depth: r.clone(),
        cone_x: Interval::of_ints(-2, -1).middle_third(),
        supports: None,
        side: Side::Center,
    });
    boxes.push(CapBox {
        id: 1,
        x: Interval::new(Rational::zero(), b_point(1)),
        top: Rational::one(),
        height: Rational::one(),
        cone_depth: r.clone(),
        cone_x: Interval::of_ints(1, 2).middle_third(),
        supports: Some(0),
        side: Side::Center,
    });

    // Strand boxes u_2 ..= u_{N+1}; ids 2 ..= N+1.
    let mut depth_sum = r.clone(); // r + u_3 + ... + u_n as we walk.
    for n in 2..=n_stop + 1 {
        if n > 2 {
            depth_sum = &depth_sum + &u[n];
        }
        let bottom = depth_sum.clone();
        let x = if n < n_stop {
            Interval::new(b_point(n - 1), b_point(n))
        } else if n == n_stop {
            Interval::new(b_point(n - 1), strip_zone(n).hi().clone())
        } else {
            Interval::new(strip_zone(n).lo().clone(), b_point(n_stop))
        };
        let cone = if n <= n_stop { &r * &u[n] } else { &r * &u[n_stop] };
        boxes.push(CapBox {
            id: n as BoxId,
            x,
            top: &bottom - &u[n],
            height: u[n].clone(),
            cone_depth: cone,
            cone_x: strip_zone(n).middle_third(),
            supports: Some(if n == 2 { 1 } else { n as BoxId - 1 }),
            side: Side::Right,
        });
    }

    // Copies 1..=N of the old right side.
    let copy_base = |n: usize| (n_stop + 2 + (n - 1) * m) as BoxId;
    let old_index: std::collections::BTreeMap<BoxId, usize> =
        old_right.iter().enumerate().map(|(i, b)| (b.id, i)).collect();
    for n in 1..=n_stop {
        let scale = phi_scale(n);
        let offset = phi_offset(n);
        debug_assert!(scale.is_positive());
        for (i, old) in old_right.iter().enumerate() {
            let id = copy_base(n) + i as BoxId;
            let map_iv = |iv: &Interval| {
                let a = mu(n, iv.lo());
                let b = mu(n, iv.hi());
                if a <= b {
                    Interval::new(a, b)
                } else {
                    Interval::new(b, a)
                }
            };
            let supports = if old.id == qc.key_box {
                // The key-box image holds up the next strand box.
                Some(n as BoxId + 1)
            } else {
                let target = old.supports.expect("side boxes support something");
                Some(copy_base(n) + old_index[&target] as BoxId)
            };
            boxes.push(CapBox {
                id,
                x: map_iv(&old.x),
                top: &(&scale * &old.top) + &offset,
                height: &scale * &old.height,
                cone_depth: &(&scale * &old.cone_depth) + &offset,
                cone_x: map_iv(&old.cone_x),
                supports,
                side: Side::Right,
            });
        }
    }

    // Left side: mirror everything built for the right.
    let right_count = (boxes.len() - 2) as BoxId;
    let mirrored: Vec<CapBox> = boxes[2..]
        .iter()
        .map(|b| CapBox {
            id: b.id + right_count,
            x: Interval::new(-b.x.hi(), -b.x.lo()),
            top: b.top.clone(),
            height: b.height.clone(),
            cone_depth: b.cone_depth.clone(),
            cone_x: Interval::new(-b.cone_x.hi(), -b.cone_x.lo()),
            supports: match b.supports {
                Some(1) => Some(0),
                Some(t) => Some(t + right_count),
                None => None,
            },
            side: Side::Left,
        })
        .collect();
    boxes.extend(mirrored);

    let out = Quasicap {
        cap: BoxCap { r, boxes },
        key_box: 2,
        twins: (0, 1),
        theta: &theta + delta,
    };
    let report = out.verify();
    if !report.ok {
        return Err(Error::InvalidCap(format!(
            "gap step output failed verification: {:?} (+{} more)",
            report.violations[0],
            report.violations.len() - 1
        )));
    }
    Ok(out)
}
