//! Closed intervals with rational endpoints and interval families.
//!
//! A family is the interval representation of a graph: vertices are dense
//! indices `0..n`, and two vertices are adjacent exactly when their closed
//! intervals meet. Endpoint sharing counts as intersection, which is what
//! makes the junction constructions (paths of intervals meeting at single
//! points) expressible with small integer coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Closed interval `[lo, hi]`, `lo <= hi`. Serialized as `["p/q", "p/q"]`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(try_from = "(Rational, Rational)", into = "(Rational, Rational)")]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(p: Rational) -> Self {
        Interval { lo: p.clone(), hi: p }
    }

    pub fn of_ints(lo: i64, hi: i64) -> Self {
        Interval::new(Rational::from_int(lo), Rational::from_int(hi))
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// Closed-set intersection test: `[a,b] ∩ [c,d] ≠ ∅` iff `max(a,c) <= min(b,d)`.
    pub fn intersects(&self, other: &Interval) -> bool {
        let lo = if self.lo >= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi <= other.hi { &self.hi } else { &other.hi };
        lo <= hi
    }

    pub fn contains_point(&self, p: &Rational) -> bool {
        &self.lo <= p && p <= &self.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Length of the overlap with `other` (zero when they only touch or miss).
    pub fn overlap_length(&self, other: &Interval) -> Rational {
        let lo = if self.lo >= other.lo { &self.lo } else { &other.lo };
        let hi = if self.hi <= other.hi { &self.hi } else { &other.hi };
        if lo < hi {
            hi - lo
        } else {
            Rational::zero()
        }
    }

    /// Middle third, used for cone strips so they stay clear of zone edges.
    pub fn middle_third(&self) -> Interval {
        let third = self.length() / Rational::from_int(3);
        Interval::new(&self.lo + &third, &self.hi - &third)
    }

    /// Image under the affine map `x -> a*x + b`; flips endpoints when `a < 0`.
    pub fn affine(&self, a: &Rational, b: &Rational) -> Interval {
        let p = a * &self.lo + b;
        let q = a * &self.hi + b;
        if p <= q {
            Interval::new(p, q)
        } else {
            Interval::new(q, p)
        }
    }
}

impl TryFrom<(Rational, Rational)> for Interval {
    type Error = String;
    fn try_from((lo, hi): (Rational, Rational)) -> std::result::Result<Self, String> {
        if lo > hi {
            return Err(format!("interval endpoints out of order: [{lo}, {hi}]"));
        }
        Ok(Interval { lo, hi })
    }
}

impl From<Interval> for (Rational, Rational) {
    fn from(iv: Interval) -> Self {
        (iv.lo, iv.hi)
    }
}

impl std::fmt::Debug for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

pub type VertexId = usize;

/// Interval representation of a graph; vertex `v` owns `intervals[v]`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct IntervalFamily {
    intervals: Vec<Interval>,
}

impl IntervalFamily {
    pub fn new(intervals: Vec<Interval>) -> Self {
        IntervalFamily { intervals }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn interval(&self, v: VertexId) -> &Interval {
        &self.intervals[v]
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, &Interval)> {
        self.intervals.iter().enumerate()
    }

    pub fn push(&mut self, iv: Interval) -> VertexId {
        self.intervals.push(iv);
        self.intervals.len() - 1
    }

    /// Smallest interval containing the whole family.
    pub fn bounding(&self) -> Option<Interval> {
        let mut it = self.intervals.iter();
        let first = it.next()?;
        let mut lo = first.lo().clone();
        let mut hi = first.hi().clone();
        for iv in it {
            if iv.lo() < &lo {
                lo = iv.lo().clone();
            }
            if iv.hi() > &hi {
                hi = iv.hi().clone();
            }
        }
        Some(Interval::new(lo, hi))
    }

    /// Adjacency lists computed by an endpoint sweep. At a shared coordinate
    /// openings are processed before closings so touching closed intervals
    /// are adjacent. Runs in O(n log n + m).
    pub fn adjacency(&self) -> Vec<Vec<VertexId>> {
        let mut adj = vec![Vec::new(); self.len()];
        let mut events: Vec<(&Rational, u8, VertexId)> = Vec::with_capacity(2 * self.len());
        for (v, iv) in self.iter() {
            events.push((iv.lo(), 0, v));
            events.push((iv.hi(), 1, v));
        }
        events.sort();
        let mut active: Vec<VertexId> = Vec::new();
        for (_, kind, v) in events {
            if kind == 0 {
                for &u in &active {
                    adj[u].push(v);
                    adj[v].push(u);
                }
                active.push(v);
            } else {
                let pos = active.iter().position(|&u| u == v).expect("open before close");
                active.swap_remove(pos);
            }
        }
        adj
    }

    /// Maximum number of intervals sharing a point, which for an interval
    /// graph is the clique size. Same sweep tie rule as `adjacency`.
    pub fn clique_size(&self) -> Result<usize> {
        if self.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(self.clique_size_allow_empty())
    }

    /// Sweep clique size with the empty family mapped to 0.
    pub fn clique_size_allow_empty(&self) -> usize {
        let mut events: Vec<(&Rational, u8)> = Vec::with_capacity(2 * self.len());
        for (_, iv) in self.iter() {
            events.push((iv.lo(), 0));
            events.push((iv.hi(), 1));
        }
        events.sort();
        let mut depth = 0usize;
        let mut best = 0usize;
        for (_, kind) in events {
            if kind == 0 {
                depth += 1;
                best = best.max(depth);
            } else {
                depth -= 1;
            }
        }
        best
    }

    /// Squeezes the family into `target` by the increasing affine map that
    /// sends its bounding interval onto `target`. A point-sized bounding
    /// interval is translated instead. Pairwise intersection relations are
    /// preserved exactly.
    pub fn squeeze(&self, target: &Interval) -> Result<IntervalFamily> {
        if target.length().is_zero() {
            return Err(Error::DegenerateTarget);
        }
        let Some(bound) = self.bounding() else {
            return Ok(IntervalFamily::default());
        };
        let (scale, offset) = if bound.length().is_zero() {
            (Rational::one(), target.lo() - bound.lo())
        } else {
            let scale = target.length() / bound.length();
            let offset = target.lo() - &(&scale * bound.lo());
            (scale, offset)
        };
        Ok(IntervalFamily::new(
            self.intervals.iter().map(|iv| iv.affine(&scale, &offset)).collect(),
        ))
    }
}
