//! Horizontal embedding of cap skeletons.
//!
//! A skeleton fixes everything vertical (tops, heights, cone depths, support
//! links) and declares, per box, which boxes its cone strip must see above
//! the cone (its weight set). The embedder realizes the declaration by
//! nested subdivision: the plan lists unit-width zones left to right, a
//! box's interval is the hull of the zones that mention it, and every cone
//! strip is the middle third of its own zone so zone-edge contacts never
//! leak into a strip. The result is checked, not trusted: any strip seeing
//! the wrong set, any support link left without horizontal contact, or any
//! verifier failure is reported as `Unembeddable`.

use std::collections::{BTreeMap, BTreeSet};

use crate::boxcap::{BoxCap, BoxId, CapBox, Side};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::Rational;

#[derive(Clone, Debug)]
pub struct SkeletonBox {
    pub id: BoxId,
    pub top: Rational,
    pub height: Rational,
    pub cone_depth: Rational,
    pub supports: Option<BoxId>,
    pub side: Side,
    /// Boxes this box's cone strip must see above the cone, itself included.
    pub sees: BTreeSet<BoxId>,
}

#[derive(Clone, Debug)]
pub enum PlanZone {
    /// The cone-strip zone of a box; covered by exactly its weight set.
    Strip(BoxId),
    /// A free contact zone covered by exactly the listed boxes.
    Contact(Vec<BoxId>),
}

#[derive(Clone, Debug)]
pub struct Skeleton {
    pub r: Rational,
    pub boxes: Vec<SkeletonBox>,
    pub plan: Vec<PlanZone>,
}

/// Assigns rational x-intervals realizing the skeleton's declarations.
pub fn assign_layout(sk: &Skeleton) -> Result<BoxCap> {
    let cap = embed(sk)?;
    let report = crate::boxcap::verify_box_cap(&cap);
    if !report.ok {
        return Err(Error::Unembeddable(format!(
            "embedded cap fails verification: {} (+{} more)",
            report.violations[0].witness,
            report.violations.len() - 1
        )));
    }
    Ok(cap)
}

/// The embedding itself, checked for declaration consistency but not yet
/// run through the cap verifier.
fn embed(sk: &Skeleton) -> Result<BoxCap> {
    let by_id: BTreeMap<BoxId, &SkeletonBox> = sk.boxes.iter().map(|b| (b.id, b)).collect();
    if by_id.len() != sk.boxes.len() {
        return Err(Error::Unembeddable("duplicate box ids".into()));
    }
    for b in &sk.boxes {
        if !b.sees.contains(&b.id) {
            return Err(Error::Unembeddable(format!(
                "box {} does not list itself in its weight set",
                b.id
            )));
        }
    }

    // Which zone indices mention each box.
    let mut strip_zone: BTreeMap<BoxId, usize> = BTreeMap::new();
    let mut mentions: BTreeMap<BoxId, Vec<usize>> = BTreeMap::new();
    for (i, zone) in sk.plan.iter().enumerate() {
        match zone {
            PlanZone::Strip(owner) => {
                let owner_box = by_id.get(owner).ok_or_else(|| {
                    Error::Unembeddable(format!("plan mentions unknown box {owner}"))
                })?;
                if strip_zone.insert(*owner, i).is_some() {
                    return Err(Error::Unembeddable(format!("box {owner} has two strip zones")));
                }
                for seen in &owner_box.sees {
                    if !by_id.contains_key(seen) {
                        return Err(Error::Unembeddable(format!(
                            "weight set of box {owner} mentions unknown box {seen}"
                        )));
                    }
                    mentions.entry(*seen).or_default().push(i);
                }
            }
            PlanZone::Contact(members) => {
                for m in members {
                    if !by_id.contains_key(m) {
                        return Err(Error::Unembeddable(format!(
                            "plan mentions unknown box {m}"
                        )));
                    }
                    mentions.entry(*m).or_default().push(i);
                }
            }
        }
    }

    // Hull of mentioned zones, as an index range per box.
    let mut hull: BTreeMap<BoxId, (usize, usize)> = BTreeMap::new();
    for b in &sk.boxes {
        if !strip_zone.contains_key(&b.id) {
            return Err(Error::Unembeddable(format!("box {} has no strip zone", b.id)));
        }
        let zones = &mentions[&b.id];
        let lo = *zones.iter().min().unwrap();
        let hi = *zones.iter().max().unwrap();
        hull.insert(b.id, (lo, hi));
    }

    // The declaration must survive taking hulls: a strip zone is covered by
    // exactly the boxes whose hull spans it.
    for b in &sk.boxes {
        let z = strip_zone[&b.id];
        let actual: BTreeSet<BoxId> = sk
            .boxes
            .iter()
            .filter(|other| {
                let (lo, hi) = hull[&other.id];
                lo <= z && z <= hi
            })
            .map(|other| other.id)
            .collect();
        if actual != b.sees {
            return Err(Error::Unembeddable(format!(
                "cone strip of box {} would see {:?}, declared {:?}",
                b.id, actual, b.sees
            )));
        }
    }

    // Every support link needs horizontal contact.
    for b in &sk.boxes {
        if let Some(target) = b.supports {
            let (alo, ahi) = hull[&b.id];
            let (blo, bhi) = hull
                .get(&target)
                .copied()
                .ok_or_else(|| Error::Unembeddable(format!("box {} supports unknown box", b.id)))?;
            if ahi + 1 < blo || bhi + 1 < alo {
                return Err(Error::Unembeddable(format!(
                    "box {} has no horizontal contact with the box {} it supports",
                    b.id, target
                )));
            }
        }
    }

    let zone = |i: usize| Interval::of_ints(i as i64, i as i64 + 1);
    Ok(BoxCap {
        r: sk.r.clone(),
        boxes: sk
            .boxes
            .iter()
            .map(|b| {
                let (lo, hi) = hull[&b.id];
                CapBox {
                    id: b.id,
                    x: Interval::new(zone(lo).lo().clone(), zone(hi).hi().clone()),
                    top: b.top.clone(),
                    height: b.height.clone(),
                    cone_depth: b.cone_depth.clone(),
                    cone_x: zone(strip_zone[&b.id]).middle_third(),
                    supports: b.supports,
                    side: b.side,
                }
            })
            .collect(),
    })
}

/// The classical hand-built cap at ratio 4. Twins of height 1 in the
/// center, then per mirrored side an outer strand of heights 2, 3, 4, 4
/// interleaved with four inner 1-tall boxes, cones at four times the
/// supported weight. The vertical table is fixed; the horizontal extents
/// come from `assign_layout`.
pub fn build_cs_4cap() -> BoxCap {
    assign_layout(&cs_4cap_skeleton()).expect("the fixed table embeds")
}

pub fn cs_4cap_skeleton() -> Skeleton {
    let r = Rational::from_int(4);
    let int = Rational::from_int;
    let mut boxes = Vec::new();
    let mut add = |id: BoxId, top: i64, h: i64, cone: i64, supports: Option<BoxId>, side: Side, sees: &[BoxId]| {
        boxes.push(SkeletonBox {
            id,
            top: int(top),
            height: int(h),
            cone_depth: int(cone),
            supports,
            side,
            sees: sees.iter().copied().collect(),
        });
    };

    // Twins.
    add(0, 0, 1, 4, None, Side::Center, &[0]);
    add(1, 1, 1, 4, Some(0), Side::Center, &[1]);
    // Right side: key box, inner boxes, outer strand.
    add(2, 2, 2, 8, Some(1), Side::Right, &[2]); // key box
    add(3, 7, 1, 8, Some(2), Side::Right, &[1, 3]); // inner, under the lower twin
    add(4, 4, 3, 12, Some(2), Side::Right, &[4]);
    add(5, 11, 1, 12, Some(4), Side::Right, &[2, 5]); // inner, under the key box
    add(6, 7, 4, 16, Some(4), Side::Right, &[6]);
    add(7, 15, 1, 16, Some(6), Side::Right, &[4, 7]); // inner, under the 3-tall box
    add(8, 11, 4, 16, Some(6), Side::Right, &[8]);
    add(9, 15, 1, 16, Some(8), Side::Right, &[9]); // outer finisher
    // Left side, mirrored; its key box supports the upper twin.
    add(10, 2, 2, 8, Some(0), Side::Left, &[10]);
    add(11, 7, 1, 8, Some(10), Side::Left, &[0, 11]);
    add(12, 4, 3, 12, Some(10), Side::Left, &[12]);
    add(13, 11, 1, 12, Some(12), Side::Left, &[10, 13]);
    add(14, 7, 4, 16, Some(12), Side::Left, &[14]);
    add(15, 15, 1, 16, Some(14), Side::Left, &[12, 15]);
    add(16, 11, 4, 16, Some(14), Side::Left, &[16]);
    add(17, 15, 1, 16, Some(16), Side::Left, &[17]);

    use PlanZone::{Contact, Strip};
    let plan = vec![
        // Left side, outermost first.
        Strip(17),
        Contact(vec![16, 17]),
        Strip(16),
        Contact(vec![14, 16]),
        Strip(14),
        Contact(vec![15, 14, 12]),
        Strip(15),
        Strip(12),
        Contact(vec![13, 12, 10]),
        Strip(13),
        Strip(10),
        Contact(vec![11, 10, 0]),
        Strip(11),
        Strip(0),
        // Center.
        Contact(vec![0, 1]),
        // Right side, innermost first.
        Strip(1),
        Strip(3),
        Contact(vec![3, 2, 1]),
        Strip(2),
        Strip(5),
        Contact(vec![5, 4, 2]),
        Strip(4),
        Strip(7),
        Contact(vec![7, 6, 4]),
        Strip(6),
        Contact(vec![6, 8]),
        Strip(8),
        Contact(vec![8, 9]),
        Strip(9),
    ];

    Skeleton { r, boxes, plan }
}

/// The smallest nontrivial cap: two 1-tall boxes at ratio 2, the second
/// supporting the first, strips kept apart. Handy as an expansion seed.
pub fn build_two_box_cap() -> BoxCap {
    let r = Rational::from_int(2);
    let boxes = vec![
        SkeletonBox {
            id: 0,
            top: Rational::zero(),
            height: Rational::one(),
            cone_depth: Rational::from_int(2),
            supports: None,
            side: Side::Center,
            sees: [0].into_iter().collect(),
        },
        SkeletonBox {
            id: 1,
            top: Rational::one(),
            height: Rational::one(),
            cone_depth: Rational::from_int(2),
            supports: Some(0),
            side: Side::Center,
            sees: [1].into_iter().collect(),
        },
    ];
    let plan = vec![
        PlanZone::Strip(0),
        PlanZone::Contact(vec![0, 1]),
        PlanZone::Strip(1),
    ];
    assign_layout(&Skeleton { r, boxes, plan }).expect("two-box table embeds")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxcap::{verify_box_cap, CapCondition, Subject};
    use crate::rational::rat;

    #[test]
    fn single_box_layout() {
        let sk = Skeleton {
            r: rat(1, 1),
            boxes: vec![SkeletonBox {
                id: 0,
                top: rat(0, 1),
                height: rat(1, 1),
                cone_depth: rat(1, 1),
                supports: None,
                side: Side::Center,
                sees: [0].into_iter().collect(),
            }],
            plan: vec![PlanZone::Strip(0)],
        };
        let cap = assign_layout(&sk).unwrap();
        assert_eq!(cap.boxes[0].x, Interval::of_ints(0, 1));
        assert_eq!(cap.boxes[0].cone_x, Interval::of_ints(0, 1).middle_third());
    }

    #[test]
    fn cs_4cap_embeds_clean() {
        let cap = build_cs_4cap();
        assert_eq!(cap.boxes.len(), 18);
        let report = verify_box_cap(&cap);
        assert!(report.ok, "{:#?}", report.violations);
    }

    #[test]
    fn cyclic_weight_sets_are_unembeddable() {
        // Three strips, each demanding two of three boxes: whatever the
        // order, the middle strip is spanned by the third box.
        let mk = |id: BoxId, sees: &[BoxId]| SkeletonBox {
            id,
            top: rat(0, 1),
            height: rat(1, 1),
            cone_depth: rat(10, 1),
            supports: None,
            side: Side::Center,
            sees: sees.iter().copied().collect(),
        };
        let sk = Skeleton {
            r: rat(1, 1),
            boxes: vec![mk(0, &[0, 1]), mk(1, &[1, 2]), mk(2, &[2, 0])],
            plan: vec![PlanZone::Strip(0), PlanZone::Strip(1), PlanZone::Strip(2)],
        };
        assert!(matches!(assign_layout(&sk), Err(Error::Unembeddable(_))));
    }

    #[test]
    fn strip_inside_fully_spanning_parent_is_unembeddable() {
        // The child's strip must avoid its parent, but the parent also has
        // to reach across the child's only possible position.
        let parent = SkeletonBox {
            id: 0,
            top: rat(0, 1),
            height: rat(1, 1),
            cone_depth: rat(4, 1),
            supports: None,
            side: Side::Center,
            sees: [0].into_iter().collect(),
        };
        let child = SkeletonBox {
            id: 1,
            top: rat(1, 1),
            height: rat(3, 1),
            cone_depth: rat(4, 1),
            supports: Some(0),
            side: Side::Center,
            sees: [1].into_iter().collect(),
        };
        // Plan forces the child's strip inside the parent's span.
        let sk = Skeleton {
            r: rat(1, 1),
            boxes: vec![parent, child],
            plan: vec![
                PlanZone::Contact(vec![0, 1]),
                PlanZone::Strip(1),
                PlanZone::Strip(0),
                PlanZone::Contact(vec![0, 1]),
            ],
        };
        assert!(matches!(assign_layout(&sk), Err(Error::Unembeddable(_))));
    }

    #[test]
    fn two_box_cap_is_a_two_cap() {
        let cap = build_two_box_cap();
        let report = verify_box_cap(&cap);
        assert!(report.ok, "{:#?}", report.violations);
        let mut hot = cap.clone();
        hot.r = rat(201, 100);
        assert!(verify_box_cap(&hot)
            .violations
            .iter()
            .any(|v| v.condition == CapCondition::Sparseness));
    }

    #[test]
    fn cs_4cap_strand_heights() {
        let cap = build_cs_4cap();
        // Walk the high-supporter chain from the lower twin: supporter whose
        // top sits level with the supported box's bottom. The strand is the
        // first five links; the chain ends with the 1-tall finisher.
        let mut heights = Vec::new();
        let mut cur = cap.box_by_id(1).unwrap();
        heights.push(cur.height.clone());
        loop {
            let next = cap
                .boxes
                .iter()
                .find(|b| b.supports == Some(cur.id) && b.top == cur.bottom());
            match next {
                Some(b) => {
                    heights.push(b.height.clone());
                    cur = b;
                }
                None => break,
            }
        }
        let expect: Vec<Rational> = [1, 2, 3, 4, 4].iter().map(|&h| rat(h, 1)).collect();
        assert_eq!(heights[..5], expect);
        assert_eq!(heights.len(), 6);
    }

    #[test]
    fn cs_4cap_total_height_is_36() {
        assert_eq!(build_cs_4cap().total_height(), rat(36, 1));
    }

    #[test]
    fn cs_4cap_key_cone_is_tight() {
        // The key box cone satisfies d = r*w exactly, so any larger ratio fails
        // with a sparseness witness at the key box.
        let mut cap = build_cs_4cap();
        cap.r = rat(401, 100);
        let report = verify_box_cap(&cap);
        assert!(!report.ok);
        assert!(report.has(&Subject::Box(2), CapCondition::Sparseness));
    }
}
