//! Vertex-level caps: the object the wall expansion consumes.
//!
//! A cap vertex carries an interval `I`, a reserved strip `J ⊆ I`, a
//! nonpositive color `f`, and a negative cone color `c`. Lowering a box cap
//! turns an `h`-tall box into `h` unit vertices with consecutive colors
//! `-top, -top-1, ...` sharing the box interval and cone strip.
//!
//! Vertices are stored as runs (one per box, a contiguous color range).
//! Scaled caps from the gap-reducing pipeline have more unit vertices than
//! could ever be materialized, but all three cap conditions only depend on
//! color ranges, so the verifier works on runs with big-integer arithmetic
//! and never expands anything.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::boxcap::{BoxCap, CapCondition, CapReport, CapViolation, Subject};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::Rational;

/// A maximal group of cap vertices sharing interval, strip, and cone:
/// colors `top_color, top_color - 1, ..., top_color - count + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexRun {
    pub interval: Interval,
    pub strip: Interval,
    pub top_color: BigInt,
    pub count: BigInt,
    pub cone_color: BigInt,
}

impl VertexRun {
    pub fn bottom_color(&self) -> BigInt {
        &self.top_color - &self.count + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexCap {
    pub r: Rational,
    pub runs: Vec<VertexRun>,
}

/// One materialized cap vertex; only available for desk-sized caps.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitVertex {
    pub id: usize,
    pub interval: Interval,
    pub strip: Interval,
    pub color: BigInt,
    pub cone_color: BigInt,
}

impl VertexCap {
    pub fn vertex_count(&self) -> BigInt {
        self.runs.iter().fold(BigInt::zero(), |acc, r| acc + &r.count)
    }

    /// Expands runs to unit vertices, refusing blowups past `limit`.
    pub fn unit_vertices(&self, limit: usize) -> Result<Vec<UnitVertex>> {
        let total = self.vertex_count();
        if total > BigInt::from(limit) {
            return Err(Error::BudgetExceeded(format!(
                "cap has {total} unit vertices, limit {limit}"
            )));
        }
        let mut out = Vec::new();
        for run in &self.runs {
            let mut color = run.top_color.clone();
            let mut left = run.count.clone();
            while left.is_positive() {
                out.push(UnitVertex {
                    id: out.len(),
                    interval: run.interval.clone(),
                    strip: run.strip.clone(),
                    color: color.clone(),
                    cone_color: run.cone_color.clone(),
                });
                color -= 1;
                left -= 1;
            }
        }
        Ok(out)
    }
}

/// Lowers an integral box cap to unit vertices (run-compressed). The caller
/// is expected to have verified the box cap; this only requires
/// integrality of the vertical data.
pub fn lower_to_vertex_cap(cap: &BoxCap) -> Result<VertexCap> {
    let mut runs = Vec::new();
    for b in &cap.boxes {
        for (what, v) in [("top", &b.top), ("height", &b.height), ("cone depth", &b.cone_depth)] {
            if !v.is_integer() {
                return Err(Error::NonIntegral(format!("box {}: {what} = {v}", b.id)));
            }
        }
        runs.push(VertexRun {
            interval: b.x.clone(),
            strip: b.cone_x.clone(),
            top_color: -b.top.numer(),
            count: b.height.numer().clone(),
            cone_color: -b.cone_depth.numer(),
        });
    }
    Ok(VertexCap { r: cap.r.clone(), runs })
}

/// Checks the cap conditions on the vertex model: emptiness, sparseness,
/// support, a zero-colored vertex, and strip compatibility.
pub fn verify_vertex_cap(cap: &VertexCap) -> CapReport {
    let mut out = Vec::new();
    let mut push = |subject: Subject, condition: CapCondition, witness: String| {
        out.push(CapViolation { subject, condition, witness });
    };

    if cap.runs.is_empty() {
        push(Subject::Cap, CapCondition::TopLevel, "cap has no vertices".into());
        return report(out);
    }

    for (i, run) in cap.runs.iter().enumerate() {
        if !run.count.is_positive() {
            push(Subject::Run(i), CapCondition::Geometry, "empty run".into());
        }
        if run.top_color.is_positive() {
            push(
                Subject::Run(i),
                CapCondition::Geometry,
                format!("color {} is positive", run.top_color),
            );
        }
        if !run.cone_color.is_negative() {
            push(
                Subject::Run(i),
                CapCondition::Geometry,
                format!("cone color {} is not negative", run.cone_color),
            );
        }
        if !run.interval.contains(&run.strip) || !run.strip.length().is_positive() {
            push(
                Subject::Run(i),
                CapCondition::Geometry,
                "strip must sit inside the interval with positive length".into(),
            );
        }
    }

    if !cap.runs.iter().any(|r| r.top_color.is_zero()) {
        push(Subject::Cap, CapCondition::TopLevel, "no vertex has color 0".into());
    }

    // Strips are either identical or disjoint, and the coloring is proper:
    // runs on intersecting intervals may not share a color.
    for (i, a) in cap.runs.iter().enumerate() {
        for (j, b) in cap.runs.iter().enumerate().skip(i + 1) {
            if a.strip.intersects(&b.strip) && a.strip != b.strip {
                push(
                    Subject::Run(i),
                    CapCondition::Geometry,
                    format!("strips of runs {i} and {j} overlap without being equal"),
                );
            }
            if a.interval.intersects(&b.interval)
                && a.bottom_color() <= b.top_color
                && b.bottom_color() <= a.top_color
            {
                push(
                    Subject::Run(i),
                    CapCondition::Geometry,
                    format!("runs {i} and {j} are adjacent but share a color"),
                );
            }
        }
    }

    for (i, run) in cap.runs.iter().enumerate() {
        let c = &run.cone_color;

        // Colors visible over the reserved strip.
        let over_strip: Vec<&VertexRun> = cap
            .runs
            .iter()
            .filter(|o| o.interval.intersects(&run.strip))
            .collect();

        for o in &over_strip {
            if &o.bottom_color() <= c {
                push(
                    Subject::Run(i),
                    CapCondition::Emptiness,
                    format!(
                        "color {} appears over the strip at or below the cone color {}",
                        o.bottom_color(),
                        c
                    ),
                );
            }
        }

        // Sparseness: distinct colors in (c, 0] over the strip, at most -c/r.
        let window_lo = c + BigInt::one();
        let window_hi = BigInt::zero();
        let ranges: Vec<(BigInt, BigInt)> = over_strip
            .iter()
            .map(|o| (o.bottom_color(), o.top_color.clone()))
            .collect();
        let seen = union_size_within(&ranges, &window_lo, &window_hi);
        // seen <= -c/r  <=>  seen * r <= -c
        let lhs = Rational::from_bigint(seen.clone()) * cap.r.clone();
        let rhs = Rational::from_bigint(-c.clone());
        if lhs > rhs {
            push(
                Subject::Run(i),
                CapCondition::Sparseness,
                format!("{seen} distinct colors over the strip, allowed -c/r = {rhs}/{}", cap.r),
            );
        }

        // Support: every color in (c, f] on the closed neighborhood. The
        // topmost vertex of the run has the widest window; lower vertices
        // are covered a fortiori.
        let neighbor_ranges: Vec<(BigInt, BigInt)> = cap
            .runs
            .iter()
            .filter(|o| o.interval.intersects(&run.interval))
            .map(|o| (o.bottom_color(), o.top_color.clone()))
            .collect();
        if let Some(missing) =
            first_uncovered_int(&window_lo, &run.top_color, &neighbor_ranges)
        {
            push(
                Subject::Run(i),
                CapCondition::Support,
                format!("no neighbor has color {missing}"),
            );
        }
    }

    report(out)
}

fn report(mut violations: Vec<CapViolation>) -> CapReport {
    violations.sort_by(|a, b| {
        (&a.subject, a.condition, &a.witness).cmp(&(&b.subject, b.condition, &b.witness))
    });
    CapReport { ok: violations.is_empty(), violations }
}

/// Number of integers in `[lo, hi]` covered by the union of the ranges.
fn union_size_within(ranges: &[(BigInt, BigInt)], lo: &BigInt, hi: &BigInt) -> BigInt {
    let mut clipped: Vec<(BigInt, BigInt)> = ranges
        .iter()
        .filter_map(|(a, b)| {
            let a = a.clone().max(lo.clone());
            let b = b.clone().min(hi.clone());
            if a <= b {
                Some((a, b))
            } else {
                None
            }
        })
        .collect();
    clipped.sort();
    let mut total = BigInt::zero();
    let mut cur: Option<(BigInt, BigInt)> = None;
    for (a, b) in clipped {
        match cur {
            Some((clo, chi)) if a <= &chi + 1 => {
                cur = Some((clo, chi.max(b)));
            }
            Some((clo, chi)) => {
                total += &chi - &clo + 1;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    if let Some((clo, chi)) = cur {
        total += &chi - &clo + 1;
    }
    total
}

/// First integer in `[lo, hi]` missed by the union of the ranges.
fn first_uncovered_int(
    lo: &BigInt,
    hi: &BigInt,
    ranges: &[(BigInt, BigInt)],
) -> Option<BigInt> {
    if lo > hi {
        return None;
    }
    let mut sorted: Vec<&(BigInt, BigInt)> = ranges.iter().collect();
    sorted.sort();
    let mut at = lo.clone();
    for (a, b) in sorted {
        if b < &at {
            continue;
        }
        if a > &at {
            return Some(at);
        }
        at = b + 1;
        if &at > hi {
            return None;
        }
    }
    Some(at)
}

// ---------------------------------------------------------------------------
// File format: one record per unit vertex.

mod bigint_str {
    use super::BigInt;
    use serde::{de, Deserialize, Deserializer, Serializer};
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(&s).map_err(de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct VertexFileEntry {
    id: usize,
    i: Interval,
    j: Interval,
    #[serde(with = "bigint_str")]
    f: BigInt,
    #[serde(with = "bigint_str")]
    c: BigInt,
}

#[derive(Serialize, Deserialize)]
struct VertexCapFile {
    r: Rational,
    vertices: Vec<VertexFileEntry>,
}

impl VertexCap {
    /// Serializes as one record per unit vertex; errors when the expansion
    /// would exceed `limit`.
    pub fn to_unit_json(&self, limit: usize) -> Result<String> {
        let vertices = self
            .unit_vertices(limit)?
            .into_iter()
            .map(|u| VertexFileEntry {
                id: u.id,
                i: u.interval,
                j: u.strip,
                f: u.color,
                c: u.cone_color,
            })
            .collect();
        let file = VertexCapFile { r: self.r.clone(), vertices };
        Ok(serde_json::to_string_pretty(&file).expect("serializable") + "\n")
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        let file: VertexCapFile = serde_json::from_str(text)?;
        Ok(VertexCap {
            r: file.r,
            runs: file
                .vertices
                .into_iter()
                .map(|v| VertexRun {
                    interval: v.i,
                    strip: v.j,
                    top_color: v.f,
                    count: BigInt::one(),
                    cone_color: v.c,
                })
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxcap::verify_box_cap;
    use crate::layout::{build_cs_4cap, build_two_box_cap};
    use crate::rational::rat;

    fn single_box_cap() -> BoxCap {
        use crate::boxcap::CapBox;
        BoxCap {
            r: rat(1, 1),
            boxes: vec![CapBox {
                id: 0,
                x: Interval::of_ints(0, 1),
                top: rat(0, 1),
                height: rat(1, 1),
                cone_depth: rat(1, 1),
                cone_x: Interval::of_ints(0, 1).middle_third(),
                supports: None,
                side: crate::boxcap::Side::Center,
            }],
        }
    }

    #[test]
    fn single_box_lowering() {
        let vc = lower_to_vertex_cap(&single_box_cap()).unwrap();
        assert_eq!(vc.vertex_count(), BigInt::from(1));
        let unit = &vc.unit_vertices(10).unwrap()[0];
        assert_eq!(unit.color, BigInt::zero());
        assert_eq!(unit.cone_color, BigInt::from(-1));
        assert!(verify_vertex_cap(&vc).ok);
    }

    #[test]
    fn cs_4cap_lowers_to_36_clean_vertices() {
        let vc = lower_to_vertex_cap(&build_cs_4cap()).unwrap();
        assert_eq!(vc.vertex_count(), BigInt::from(36));
        let report = verify_vertex_cap(&vc);
        assert!(report.ok, "{:#?}", report.violations);
    }

    #[test]
    fn deleting_a_support_vertex_breaks_support() {
        let vc = lower_to_vertex_cap(&build_cs_4cap()).unwrap();
        let units = vc.unit_vertices(100).unwrap();
        // Remove one vertex of the right key box (color -3).
        let victim = units
            .iter()
            .position(|u| u.color == BigInt::from(-3))
            .unwrap();
        let runs: Vec<VertexRun> = units
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != victim)
            .map(|(_, u)| VertexRun {
                interval: u.interval.clone(),
                strip: u.strip.clone(),
                top_color: u.color.clone(),
                count: BigInt::one(),
                cone_color: u.cone_color.clone(),
            })
            .collect();
        let broken = VertexCap { r: vc.r.clone(), runs };
        let report = verify_vertex_cap(&broken);
        assert!(!report.ok);
        assert!(report
            .violations
            .iter()
            .any(|v| v.condition == CapCondition::Support && v.witness.contains("-3")));
    }

    #[test]
    fn improper_coloring_is_rejected() {
        // Two zero-colored vertices on one interval: every cap condition
        // that counts distinct colors is satisfied, but the coloring is
        // not proper.
        let strip = Interval::of_ints(0, 1).middle_third();
        let run = VertexRun {
            interval: Interval::of_ints(0, 1),
            strip,
            top_color: BigInt::zero(),
            count: BigInt::one(),
            cone_color: BigInt::from(-2),
        };
        let cap = VertexCap { r: rat(1, 1), runs: vec![run.clone(), run] };
        let report = verify_vertex_cap(&cap);
        assert!(report
            .violations
            .iter()
            .any(|v| v.condition == CapCondition::Geometry && v.witness.contains("share a color")));
    }

    #[test]
    fn non_integral_cap_is_rejected() {
        let mut cap = single_box_cap();
        cap.boxes[0].height = rat(1, 2);
        cap.boxes[0].cone_depth = rat(1, 2);
        assert!(matches!(lower_to_vertex_cap(&cap), Err(Error::NonIntegral(_))));
    }

    #[test]
    fn two_box_cap_lowers_clean() {
        let vc = lower_to_vertex_cap(&build_two_box_cap()).unwrap();
        assert_eq!(vc.vertex_count(), BigInt::from(2));
        assert!(verify_vertex_cap(&vc).ok);
    }

    #[test]
    fn verifier_agreement_on_small_corpus() {
        use crate::boxcap::scale_to_integers;
        let mut corpus = vec![
            (build_cs_4cap(), true),
            (build_two_box_cap(), true),
            (single_box_cap(), true),
        ];
        // Ratio bumped past tightness: both levels must reject.
        let mut hot = build_cs_4cap();
        hot.r = rat(401, 100);
        corpus.push((hot, false));

        for (cap, expect) in &mut corpus {
            let box_ok = verify_box_cap(cap).ok;
            assert_eq!(box_ok, *expect);
            let vc = lower_to_vertex_cap(&scale_to_integers(cap)).unwrap();
            assert_eq!(verify_vertex_cap(&vc).ok, box_ok);
        }
    }

    #[test]
    fn unit_json_round_trip() {
        let vc = lower_to_vertex_cap(&build_two_box_cap()).unwrap();
        let s = vc.to_unit_json(100).unwrap();
        let back = VertexCap::from_json(&s).unwrap();
        assert_eq!(back.vertex_count(), vc.vertex_count());
        assert!(verify_vertex_cap(&back).ok);
    }
}
