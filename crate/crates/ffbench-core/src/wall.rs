//! Walls: colored interval families that certify first-fit lower bounds.
//!
//! A wall pairs an interval family with a proper positive coloring that
//! satisfies the support condition: every vertex sees all colors below its
//! own on its closed neighborhood. Presenting the vertices to first-fit in
//! color order then reproduces the coloring exactly, so the number of colors
//! divided by the clique size is a certified lower bound on the worst-case
//! first-fit ratio. `verify_wall` checks all of that, including the replay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalFamily, VertexId};
use crate::rational::Rational;

/// Dense vertex-indexed coloring.
pub type Coloring = Vec<i64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub family: IntervalFamily,
    pub colors: Coloring,
    pub declared_ratio: Rational,
}

/// First-fit: each vertex, in the given presentation order, receives the
/// least positive integer not used on an already-colored neighbor.
pub fn first_fit(family: &IntervalFamily, order: &[VertexId]) -> Result<Coloring> {
    let n = family.len();
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::BadOrder(format!(
            "expected {} vertices, order lists {}",
            n,
            order.len()
        )));
    }
    for &v in order {
        if v >= n || seen[v] {
            return Err(Error::BadOrder(format!("vertex {v} repeated or out of range")));
        }
        seen[v] = true;
    }

    let adj = family.adjacency();
    let mut colors: Vec<i64> = vec![0; n];
    let mut colored = vec![false; n];
    let mut used = Vec::new();
    for &v in order {
        used.clear();
        used.resize(adj[v].len() + 2, false);
        for &u in &adj[v] {
            if colored[u] {
                let c = colors[u] as usize;
                if c < used.len() {
                    used[c] = true;
                }
            }
        }
        let c = (1..used.len()).find(|&c| !used[c]).expect("mex exists");
        colors[v] = c as i64;
        colored[v] = true;
    }
    Ok(colors)
}

/// Vertex ids sorted ascending by color, ties broken by id. Same-color
/// classes are independent sets in a proper coloring, so any tie order
/// replays identically; fixing one makes the op deterministic.
pub fn color_sorted_order(wall: &Wall) -> Vec<VertexId> {
    let mut order: Vec<VertexId> = (0..wall.family.len()).collect();
    order.sort_by_key(|&v| (wall.colors[v], v));
    order
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WallViolation {
    /// Adjacent vertices share a color.
    ImproperEdge { u: VertexId, v: VertexId, color: i64 },
    /// Wall colors must be positive integers.
    NonPositiveColor { v: VertexId, color: i64 },
    /// `N[v]` misses a color in `1..=f(v)`.
    SupportGap { v: VertexId, missing_color: i64 },
    /// Fewer colors than the declared ratio requires.
    RatioShortfall { required: Rational, color_count: usize },
    /// The first-fit replay on the color-sorted order diverged.
    ReplayMismatch { v: VertexId, expected: i64, replayed: i64 },
}

impl WallViolation {
    pub fn vertex(&self) -> Option<VertexId> {
        match self {
            WallViolation::ImproperEdge { v, .. }
            | WallViolation::NonPositiveColor { v, .. }
            | WallViolation::SupportGap { v, .. }
            | WallViolation::ReplayMismatch { v, .. } => Some(*v),
            WallViolation::RatioShortfall { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WallReport {
    pub clique_size: usize,
    pub color_count: usize,
    pub ratio: Rational,
    pub violations: Vec<WallViolation>,
}

impl WallReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Full wall verification. Violations are reported, never thrown.
pub fn verify_wall(wall: &Wall) -> WallReport {
    let n = wall.family.len();
    let mut violations = Vec::new();

    let clique_size = wall.family.clique_size_allow_empty();
    let mut palette: Vec<i64> = wall.colors.clone();
    palette.sort_unstable();
    palette.dedup();
    let color_count = palette.len();

    for v in 0..n {
        if wall.colors[v] < 1 {
            violations.push(WallViolation::NonPositiveColor { v, color: wall.colors[v] });
        }
    }

    let adj = wall.family.adjacency();
    for (v, neighbors) in adj.iter().enumerate() {
        for &u in neighbors {
            if u < v && wall.colors[u] == wall.colors[v] {
                violations.push(WallViolation::ImproperEdge { u, v, color: wall.colors[v] });
            }
        }
    }

    // Support: N[v] carries every color in 1..=f(v).
    for (v, neighbors) in adj.iter().enumerate() {
        let fv = wall.colors[v];
        if fv < 1 {
            continue;
        }
        let mut present = vec![false; fv as usize + 1];
        present[fv as usize] = true;
        for &u in neighbors {
            let c = wall.colors[u];
            if c >= 1 && c <= fv {
                present[c as usize] = true;
            }
        }
        for c in 1..=fv {
            if !present[c as usize] {
                violations.push(WallViolation::SupportGap { v, missing_color: c });
            }
        }
    }

    // Color count must reach declared_ratio * clique size (exact comparison).
    let required = &wall.declared_ratio * &Rational::from_int(clique_size as i64);
    if Rational::from_int(color_count as i64) < required {
        violations.push(WallViolation::RatioShortfall { required, color_count });
    }

    // Replay: first-fit on the color-sorted order must reproduce the wall.
    if let Ok(replayed) = first_fit(&wall.family, &color_sorted_order(wall)) {
        for (v, (&got, &expected)) in replayed.iter().zip(&wall.colors).enumerate() {
            if got != expected {
                violations.push(WallViolation::ReplayMismatch { v, expected, replayed: got });
            }
        }
    }

    let ratio = if clique_size == 0 {
        Rational::zero()
    } else {
        Rational::new(color_count as i64, clique_size as i64)
    };
    WallReport { clique_size, color_count, ratio, violations }
}

// ---------------------------------------------------------------------------
// File format

#[derive(Serialize, Deserialize)]
struct WallFileVertex {
    id: usize,
    lo: Rational,
    hi: Rational,
    color: i64,
}

#[derive(Serialize, Deserialize)]
struct WallFile {
    declared_ratio: Rational,
    vertices: Vec<WallFileVertex>,
}

impl Serialize for Wall {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let vertices = self
            .family
            .iter()
            .map(|(id, iv)| WallFileVertex {
                id,
                lo: iv.lo().clone(),
                hi: iv.hi().clone(),
                color: self.colors[id],
            })
            .collect();
        WallFile { declared_ratio: self.declared_ratio.clone(), vertices }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Wall {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let file = WallFile::deserialize(deserializer)?;
        let n = file.vertices.len();
        let mut intervals: Vec<Option<Interval>> = vec![None; n];
        let mut colors = vec![0i64; n];
        for v in &file.vertices {
            if v.id >= n || intervals[v.id].is_some() {
                return Err(serde::de::Error::custom(format!(
                    "vertex ids must be distinct and dense, bad id {}",
                    v.id
                )));
            }
            if v.lo > v.hi {
                return Err(serde::de::Error::custom(format!(
                    "vertex {}: endpoints out of order",
                    v.id
                )));
            }
            intervals[v.id] = Some(Interval::new(v.lo.clone(), v.hi.clone()));
            colors[v.id] = v.color;
        }
        let intervals: Vec<Interval> = intervals.into_iter().map(|iv| iv.unwrap()).collect();
        Ok(Wall {
            family: IntervalFamily::new(intervals),
            colors,
            declared_ratio: file.declared_ratio,
        })
    }
}

/// Parses a family from wall-shaped JSON; colors and the declared ratio
/// are optional and ignored.
pub fn parse_family_json(text: &str) -> Result<IntervalFamily> {
    #[derive(Deserialize)]
    struct FamilyVertex {
        id: usize,
        lo: Rational,
        hi: Rational,
        #[serde(default)]
        #[allow(dead_code)]
        color: Option<i64>,
    }
    #[derive(Deserialize)]
    struct FamilyFile {
        #[serde(default)]
        #[allow(dead_code)]
        declared_ratio: Option<Rational>,
        vertices: Vec<FamilyVertex>,
    }
    let file: FamilyFile = serde_json::from_str(text)
        .map_err(|e| Error::InvalidParam(format!("bad family JSON: {e}")))?;
    let n = file.vertices.len();
    let mut intervals: Vec<Option<Interval>> = vec![None; n];
    for v in &file.vertices {
        if v.id >= n || intervals[v.id].is_some() {
            return Err(Error::InvalidParam(format!(
                "vertex ids must be distinct and dense, bad id {}",
                v.id
            )));
        }
        if v.lo > v.hi {
            return Err(Error::InvalidParam(format!("vertex {}: endpoints out of order", v.id)));
        }
        intervals[v.id] = Some(Interval::new(v.lo.clone(), v.hi.clone()));
    }
    Ok(IntervalFamily::new(intervals.into_iter().map(|iv| iv.unwrap()).collect()))
}

/// Parses an order file: one vertex id per line, blank lines ignored.
pub fn parse_order(text: &str) -> Result<Vec<VertexId>> {
    let mut order = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        order.push(
            line.parse::<usize>()
                .map_err(|e| Error::BadOrder(format!("bad vertex id {line:?}: {e}")))?,
        );
    }
    Ok(order)
}
