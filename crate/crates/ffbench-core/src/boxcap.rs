//! Box-level caps: bundles of identical intervals stacked in depth.
//!
//! Depths grow downward from the cap top at 0. A box occupies the depth
//! range `[top, top+height]` over a horizontal interval `x`, and reserves a
//! void below `cone_depth` across the strip `cone_x`. The verifier checks
//! the four cap conditions independently of any builder:
//!
//! * emptiness — nothing over a cone strip reaches below the cone top;
//! * sparseness — above each cone top, at most a `1/r` fraction of every
//!   vertical segment from the cap top is covered by boxes (`d >= r*w`);
//! * support — each box is held by at most two declared supporters that
//!   cover the range from its bottom to its cone top;
//! * area — distinct boxes meet pairwise in sets of area 0.
//!
//! Weight is measured as the length of the union of covered depth ranges,
//! which matches counting distinct colors after lowering to vertices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::interval::Interval;
use crate::rational::Rational;

pub type BoxId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
    #[serde(rename = "C")]
    Center,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapBox {
    pub id: BoxId,
    pub x: Interval,
    pub top: Rational,
    pub height: Rational,
    pub cone_depth: Rational,
    pub cone_x: Interval,
    /// The box this box supports; absent exactly for the top box.
    pub supports: Option<BoxId>,
    pub side: Side,
}

impl CapBox {
    pub fn bottom(&self) -> Rational {
        &self.top + &self.height
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxCap {
    pub r: Rational,
    pub boxes: Vec<CapBox>,
}

impl BoxCap {
    pub fn box_by_id(&self, id: BoxId) -> Option<&CapBox> {
        self.boxes.iter().find(|b| b.id == id)
    }

    pub fn total_height(&self) -> Rational {
        self.boxes
            .iter()
            .fold(Rational::zero(), |acc, b| acc + b.height.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum Subject {
    Cap,
    Box(BoxId),
    Run(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapCondition {
    Geometry,
    TopLevel,
    Emptiness,
    Sparseness,
    Support,
    Overlap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CapViolation {
    pub subject: Subject,
    pub condition: CapCondition,
    pub witness: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CapReport {
    pub ok: bool,
    pub violations: Vec<CapViolation>,
}

impl CapReport {
    fn from_violations(mut violations: Vec<CapViolation>) -> Self {
        violations.sort_by(|a, b| {
            (&a.subject, a.condition, &a.witness).cmp(&(&b.subject, b.condition, &b.witness))
        });
        CapReport { ok: violations.is_empty(), violations }
    }

    pub fn has(&self, subject: &Subject, condition: CapCondition) -> bool {
        self.violations
            .iter()
            .any(|v| &v.subject == subject && v.condition == condition)
    }
}

/// A depth range over which a box's support requirement is waived. Used by
/// the quasicap verifier for the gap above a short key box.
#[derive(Clone, Debug)]
pub(crate) struct SupportGapExemption {
    pub box_id: BoxId,
    /// Open depth interval `(from, to)` that supporters need not cover.
    pub gap: (Rational, Rational),
}

pub fn verify_box_cap(cap: &BoxCap) -> CapReport {
    verify_box_cap_relaxed(cap, &[])
}

pub(crate) fn verify_box_cap_relaxed(cap: &BoxCap, exemptions: &[SupportGapExemption]) -> CapReport {
    let mut out = Vec::new();

    if cap.boxes.is_empty() {
        out.push(CapViolation {
            subject: Subject::Cap,
            condition: CapCondition::TopLevel,
            witness: "cap has no boxes".into(),
        });
        return CapReport::from_violations(out);
    }

    let mut ids = BTreeMap::new();
    for b in &cap.boxes {
        if ids.insert(b.id, b).is_some() {
            out.push(CapViolation {
                subject: Subject::Box(b.id),
                condition: CapCondition::Geometry,
                witness: "duplicate box id".into(),
            });
        }
    }

    for b in &cap.boxes {
        if !b.height.is_positive() {
            out.push(geom(b.id, format!("height {} is not positive", b.height)));
        }
        if b.top.is_negative() {
            out.push(geom(b.id, format!("top {} is above the cap top", b.top)));
        }
        if b.cone_depth < b.bottom() {
            out.push(geom(
                b.id,
                format!("cone depth {} is above the box bottom {}", b.cone_depth, b.bottom()),
            ));
        }
        if !b.x.contains(&b.cone_x) {
            out.push(geom(b.id, "cone strip is not contained in the box interval".into()));
        }
        if !b.cone_x.length().is_positive() {
            out.push(geom(b.id, "cone strip has zero width".into()));
        }
        if let Some(target) = b.supports {
            if target == b.id || !ids.contains_key(&target) {
                out.push(geom(b.id, format!("supports unknown box {target}")));
            }
        }
    }

    if !cap.boxes.iter().any(|b| b.top.is_zero()) {
        out.push(CapViolation {
            subject: Subject::Cap,
            condition: CapCondition::TopLevel,
            witness: "no box touches the cap top (depth 0)".into(),
        });
    }

    // Pairwise area-0: no two boxes overlap in both x and depth interiors.
    // Sweep by left end so only pairs with positive horizontal overlap are
    // ever compared.
    let depth_range = |b: &CapBox| {
        let bottom = b.bottom();
        if b.top <= bottom {
            Interval::new(b.top.clone(), bottom)
        } else {
            Interval::new(bottom, b.top.clone())
        }
    };
    let depth_ranges: Vec<Interval> = cap.boxes.iter().map(depth_range).collect();
    let mut order: Vec<usize> = (0..cap.boxes.len()).collect();
    order.sort_by(|&i, &j| {
        (cap.boxes[i].x.lo(), cap.boxes[i].id).cmp(&(cap.boxes[j].x.lo(), cap.boxes[j].id))
    });
    let mut active: Vec<usize> = Vec::new();
    for &i in &order {
        let bi = &cap.boxes[i];
        active.retain(|&j| cap.boxes[j].x.hi() > bi.x.lo());
        for &j in &active {
            if depth_ranges[i].overlap_length(&depth_ranges[j]).is_positive() {
                let (lo_id, hi_id) = if bi.id < cap.boxes[j].id {
                    (bi.id, cap.boxes[j].id)
                } else {
                    (cap.boxes[j].id, bi.id)
                };
                out.push(CapViolation {
                    subject: Subject::Box(lo_id),
                    condition: CapCondition::Overlap,
                    witness: format!("boxes {lo_id} and {hi_id} overlap with positive area"),
                });
            }
        }
        active.push(i);
    }

    // Emptiness and sparseness, cone by cone. A widened float bound per
    // interval skips the definitely-disjoint box/strip pairs; every
    // surviving pair is decided exactly.
    let xf: Vec<(f64, f64)> = cap
        .boxes
        .iter()
        .map(|b| (b.x.lo().approx_f64_down(), b.x.hi().approx_f64_up()))
        .collect();
    for b in &cap.boxes {
        let d = &b.cone_depth;
        let strip_lo = b.cone_x.lo().approx_f64_down();
        let strip_hi = b.cone_x.hi().approx_f64_up();
        let over_strip: Vec<&CapBox> = cap
            .boxes
            .iter()
            .zip(&xf)
            .filter(|(other, &(lo, hi))| {
                !(hi < strip_lo || lo > strip_hi) && other.x.intersects(&b.cone_x)
            })
            .map(|(other, _)| other)
            .collect();

        for other in &over_strip {
            if &other.bottom() > d {
                out.push(CapViolation {
                    subject: Subject::Box(b.id),
                    condition: CapCondition::Emptiness,
                    witness: format!(
                        "box {} reaches depth {} below the cone top {} over strip {:?}",
                        other.id,
                        other.bottom(),
                        d,
                        b.cone_x
                    ),
                });
            }
        }

        for p in sample_points(&over_strip, &b.cone_x) {
            let w = weight_above(&over_strip, &p, d);
            if d < &(&cap.r * &w) {
                out.push(CapViolation {
                    subject: Subject::Box(b.id),
                    condition: CapCondition::Sparseness,
                    witness: format!("at x = {p}: depth {d} < r * weight = {} * {w}", cap.r),
                });
            }
        }
    }

    // Support coverage.
    let mut supporters_of: BTreeMap<BoxId, Vec<&CapBox>> = BTreeMap::new();
    for s in &cap.boxes {
        if let Some(target) = s.supports {
            supporters_of.entry(target).or_default().push(s);
        }
    }
    for b in &cap.boxes {
        let supporters = supporters_of.remove(&b.id).unwrap_or_default();
        if supporters.len() > 2 {
            out.push(CapViolation {
                subject: Subject::Box(b.id),
                condition: CapCondition::Support,
                witness: format!("supported by {} boxes, at most two allowed", supporters.len()),
            });
        }
        for s in &supporters {
            if !s.x.intersects(&b.x) {
                out.push(CapViolation {
                    subject: Subject::Box(b.id),
                    condition: CapCondition::Support,
                    witness: format!("supporter {} does not meet the box horizontally", s.id),
                });
            }
        }

        let mut required = vec![(b.bottom(), b.cone_depth.clone())];
        for ex in exemptions.iter().filter(|e| e.box_id == b.id) {
            required = subtract_gap(required, &ex.gap);
        }
        let mut cover: Vec<(Rational, Rational)> = supporters
            .iter()
            .map(|s| (s.top.clone(), s.bottom()))
            .collect();
        cover.sort();
        let merged = merge_segments(cover);
        for (lo, hi) in required {
            if lo >= hi {
                continue;
            }
            if let Some(point) = first_uncovered(&lo, &hi, &merged) {
                out.push(CapViolation {
                    subject: Subject::Box(b.id),
                    condition: CapCondition::Support,
                    witness: format!("support gap opens at depth {point} (needs [{lo}, {hi}])"),
                });
            }
        }
    }

    CapReport::from_violations(out)
}

fn geom(id: BoxId, witness: String) -> CapViolation {
    CapViolation { subject: Subject::Box(id), condition: CapCondition::Geometry, witness }
}

/// Points of the strip where the weight function can change, plus cell
/// midpoints: box endpoints falling inside the strip, the strip ends, and
/// the midpoint of every consecutive pair. Only boxes meeting the strip
/// matter, so the caller passes that set.
fn sample_points(over_strip: &[&CapBox], strip: &Interval) -> Vec<Rational> {
    let mut pts = vec![strip.lo().clone(), strip.hi().clone()];
    for b in over_strip {
        for e in [b.x.lo(), b.x.hi()] {
            if strip.contains_point(e) {
                pts.push(e.clone());
            }
        }
    }
    pts.sort();
    pts.dedup();
    let mut all = pts.clone();
    for pair in pts.windows(2) {
        all.push((&pair[0] + &pair[1]) / Rational::from_int(2));
    }
    all.sort();
    all.dedup();
    all
}

/// Length of the union of box depth ranges over `p`, clipped to `[0, d]`.
fn weight_above(over_strip: &[&CapBox], p: &Rational, d: &Rational) -> Rational {
    let mut segs: Vec<(Rational, Rational)> = Vec::new();
    for b in over_strip {
        if b.x.contains_point(p) {
            let lo = b.top.clone().max(Rational::zero());
            let hi = b.bottom().min(d.clone());
            if lo < hi {
                segs.push((lo, hi));
            }
        }
    }
    segs.sort();
    merge_segments(segs)
        .into_iter()
        .fold(Rational::zero(), |acc, (lo, hi)| acc + (hi - lo))
}

fn merge_segments(sorted: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    let mut merged: Vec<(Rational, Rational)> = Vec::new();
    for (lo, hi) in sorted {
        match merged.last_mut() {
            Some((_, last_hi)) if &lo <= last_hi => {
                if hi > *last_hi {
                    *last_hi = hi;
                }
            }
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

/// Removes the open interval `gap` from every segment.
fn subtract_gap(
    segments: Vec<(Rational, Rational)>,
    gap: &(Rational, Rational),
) -> Vec<(Rational, Rational)> {
    let mut out = Vec::new();
    for (lo, hi) in segments {
        if hi <= gap.0 || lo >= gap.1 {
            out.push((lo, hi));
            continue;
        }
        if lo < gap.0 {
            out.push((lo.clone(), gap.0.clone()));
        }
        if hi > gap.1 {
            out.push((gap.1.clone(), hi));
        }
    }
    out
}

/// First depth in `[lo, hi]` missed by the merged cover, if any.
fn first_uncovered(
    lo: &Rational,
    hi: &Rational,
    merged: &[(Rational, Rational)],
) -> Option<Rational> {
    let mut at = lo.clone();
    for (clo, chi) in merged {
        if chi < &at {
            continue;
        }
        if clo > &at {
            return Some(at);
        }
        at = chi.clone();
        if &at >= hi {
            return None;
        }
    }
    if &at >= hi {
        None
    } else {
        Some(at)
    }
}

/// Multiplies all depths and heights by the least common multiple of their
/// denominators. The ratio is untouched: `d >= r*w` is homogeneous in the
/// vertical scale, so every verifier verdict is preserved.
pub fn scale_to_integers(cap: &BoxCap) -> BoxCap {
    use num_bigint::BigInt;
    let mut l = BigInt::from(1);
    for b in &cap.boxes {
        l = b.top.lcm_denom(&l);
        l = b.height.lcm_denom(&l);
        l = b.cone_depth.lcm_denom(&l);
    }
    let factor = Rational::from_bigint(l);
    BoxCap {
        r: cap.r.clone(),
        boxes: cap
            .boxes
            .iter()
            .map(|b| CapBox {
                id: b.id,
                x: b.x.clone(),
                top: &b.top * &factor,
                height: &b.height * &factor,
                cone_depth: &b.cone_depth * &factor,
                cone_x: b.cone_x.clone(),
                supports: b.supports,
                side: b.side,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    pub(crate) fn single_box_cap(r: Rational) -> BoxCap {
        BoxCap {
            r,
            boxes: vec![CapBox {
                id: 0,
                x: Interval::of_ints(0, 1),
                top: rat(0, 1),
                height: rat(1, 1),
                cone_depth: rat(1, 1),
                cone_x: Interval::of_ints(0, 1).middle_third(),
                supports: None,
                side: Side::Center,
            }],
        }
    }

    #[test]
    fn single_box_is_a_one_cap() {
        let report = verify_box_cap(&single_box_cap(rat(1, 1)));
        assert!(report.ok, "{:?}", report.violations);
    }

    #[test]
    fn single_box_fails_above_ratio_one() {
        let report = verify_box_cap(&single_box_cap(rat(3, 2)));
        assert!(report.has(&Subject::Box(0), CapCondition::Sparseness));
    }

    #[test]
    fn sparseness_catches_partial_overhang() {
        // A supporter reaching under only the left half of the strip
        // doubles the weight there; the cell sampling must find it even
        // though the strip's right half stays legal.
        let mut cap = single_box_cap(rat(3, 2));
        cap.boxes[0].cone_depth = rat(2, 1);
        cap.boxes.push(CapBox {
            id: 1,
            x: Interval::new(rat(0, 1), rat(1, 2)),
            top: rat(1, 1),
            height: rat(1, 1),
            cone_depth: rat(2, 1),
            cone_x: Interval::new(rat(0, 1), rat(1, 2)).middle_third(),
            supports: Some(0),
            side: Side::Center,
        });
        let report = verify_box_cap(&cap);
        assert!(report.has(&Subject::Box(0), CapCondition::Sparseness));
        // Weight on the uncovered right half is within bounds: the witness
        // points all sit in the covered half.
        for v in report.violations.iter().filter(|v| v.subject == Subject::Box(0)) {
            assert!(!v.witness.contains("7/12"), "right half wrongly flagged: {}", v.witness);
        }
    }

    #[test]
    fn dangling_support_pointer_is_flagged() {
        let mut cap = single_box_cap(rat(1, 1));
        cap.boxes[0].supports = Some(7);
        let report = verify_box_cap(&cap);
        assert!(report.has(&Subject::Box(0), CapCondition::Geometry));
    }

    #[test]
    fn emptiness_catches_deep_intruder() {
        let mut cap = single_box_cap(rat(1, 1));
        cap.boxes.push(CapBox {
            id: 1,
            x: Interval::of_ints(0, 1),
            top: rat(2, 1),
            height: rat(1, 1),
            cone_depth: rat(3, 1),
            cone_x: Interval::of_ints(0, 1).middle_third(),
            supports: Some(0),
            side: Side::Center,
        });
        let report = verify_box_cap(&cap);
        assert!(report.has(&Subject::Box(0), CapCondition::Emptiness));
    }

    #[test]
    fn scaling_clears_denominators() {
        let mut cap = BoxCap { r: rat(1, 1), boxes: Vec::new() };
        for (i, h) in [rat(1, 1), rat(9, 5), rat(14, 5)].into_iter().enumerate() {
            let x = Interval::of_ints(2 * i as i64, 2 * i as i64 + 1);
            cap.boxes.push(CapBox {
                id: i as BoxId,
                x: x.clone(),
                top: rat(0, 1),
                height: h.clone(),
                cone_depth: h,
                cone_x: x.middle_third(),
                supports: None,
                side: Side::Center,
            });
        }
        assert!(verify_box_cap(&cap).ok);
        let scaled = scale_to_integers(&cap);
        let heights: Vec<Rational> = scaled.boxes.iter().map(|b| b.height.clone()).collect();
        assert_eq!(heights, vec![rat(5, 1), rat(9, 1), rat(14, 1)]);
        assert!(verify_box_cap(&scaled).ok);

        // Already integral: identity.
        let again = scale_to_integers(&scaled);
        assert_eq!(again, scaled);
    }

    #[test]
    fn json_round_trip() {
        let cap = single_box_cap(rat(1, 1));
        let s = serde_json::to_string(&cap).unwrap();
        assert!(s.contains("\"side\":\"C\""));
        let back: BoxCap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cap);
    }

    mod affine_facts {
        use super::*;
        use proptest::prelude::*;

        #[derive(Clone, Debug)]
        struct RawBox {
            x: Interval,
            depth: Interval,
        }

        fn boxes() -> impl Strategy<Value = RawBox> {
            ((0i64..10, 1i64..5), (0i64..10, 1i64..5)).prop_map(|((xa, xw), (da, dw))| RawBox {
                x: Interval::of_ints(xa, xa + xw),
                depth: Interval::of_ints(da, da + dw),
            })
        }

        fn overlap_area(a: &RawBox, b: &RawBox) -> Rational {
            a.x.overlap_length(&b.x) * a.depth.overlap_length(&b.depth)
        }

        proptest! {
            /// An invertible affine map per axis sends boxes to boxes and
            /// preserves area-0 meetings exactly.
            #[test]
            fn affine_images_preserve_area_zero_meetings(
                a in boxes(),
                b in boxes(),
                mu in (-5i64..5, -10i64..10),
                phi in (-5i64..5, -10i64..10),
            ) {
                prop_assume!(mu.0 != 0 && phi.0 != 0);
                let map = |bx: &RawBox| RawBox {
                    x: bx.x.affine(&rat(mu.0, 1), &rat(mu.1, 1)),
                    depth: bx.depth.affine(&rat(phi.0, 1), &rat(phi.1, 1)),
                };
                let (ia, ib) = (map(&a), map(&b));
                // Images are genuine boxes: positive extents survive.
                prop_assert_eq!(a.x.length().is_positive(), ia.x.length().is_positive());
                prop_assert_eq!(a.depth.length().is_positive(), ia.depth.length().is_positive());
                // Meeting in area zero is invariant.
                prop_assert_eq!(
                    overlap_area(&a, &b).is_zero(),
                    overlap_area(&ia, &ib).is_zero()
                );
            }
        }
    }
}
