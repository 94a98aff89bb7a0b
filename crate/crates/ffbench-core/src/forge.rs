//! Wall builders: cliques, the tower family, color dropping, and the
//! expansion of a cap into walls of arbitrary clique size.
//!
//! The expansion works by induction on the clique parameter k. Below the
//! deepest cone depth c a plain clique wall suffices. Otherwise every
//! reserved strip receives a recursively built wall squeezed into its
//! middle third and recolored from its top down so the support chain
//! continues seamlessly below the cone; colors at or below b − rk
//! (b = r·c) are dropped, the palette is translated up by ⌈rk − b⌉, and a
//! clique wall placed strictly to the right restores clique size exactly k.
//! Walls of equal parameter are built once and instantiated per strip.

use std::collections::HashMap;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalFamily};
use crate::rational::Rational;
use crate::vertexcap::{verify_vertex_cap, UnitVertex, VertexCap};
use crate::wall::{Coloring, Wall};

#[derive(Clone, Debug)]
pub struct ExpansionBudget {
    pub max_vertices: usize,
    pub parallel_fill: bool,
}

impl Default for ExpansionBudget {
    fn default() -> Self {
        ExpansionBudget { max_vertices: 1_000_000, parallel_fill: false }
    }
}

/// The constants of the expansion: c is the deepest cone depth of the cap,
/// b = r·c the color offset its walls are guaranteed to beat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionConstants {
    pub c: Rational,
    pub b: Rational,
}

impl ExpansionConstants {
    pub fn from_cap(cap: &VertexCap) -> Self {
        let mut deepest = BigInt::from(0);
        for run in &cap.runs {
            let depth = -run.cone_color.clone();
            if depth > deepest {
                deepest = depth;
            }
        }
        let c = Rational::from_bigint(deepest);
        let b = &cap.r * &c;
        ExpansionConstants { c, b }
    }
}

/// k vertices sharing [0, 1], colors 1..=k: a wall on k colors with clique
/// size k. k = 0 gives the empty wall.
pub fn clique_wall(k: usize) -> Wall {
    let family = IntervalFamily::new(vec![Interval::of_ints(0, 1); k]);
    let colors: Coloring = (1..=k as i64).collect();
    Wall { family, colors, declared_ratio: Rational::one() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColorEnd {
    Highest,
    Lowest,
}

/// Deletes the extreme color class; dropping the lowest renumbers the rest
/// down by one. The declared ratio is recomputed from what remains.
pub fn drop_color(wall: &Wall, end: ColorEnd) -> Result<Wall> {
    if wall.family.is_empty() {
        return Err(Error::EmptyInput);
    }
    let target = match end {
        ColorEnd::Highest => *wall.colors.iter().max().unwrap(),
        ColorEnd::Lowest => *wall.colors.iter().min().unwrap(),
    };
    let shift = if end == ColorEnd::Lowest { 1 } else { 0 };
    let mut family = IntervalFamily::default();
    let mut colors = Vec::new();
    for (v, iv) in wall.family.iter() {
        if wall.colors[v] != target {
            family.push(iv.clone());
            colors.push(wall.colors[v] - shift);
        }
    }
    let mut palette = colors.clone();
    palette.sort_unstable();
    palette.dedup();
    let omega = family.clique_size_allow_empty();
    let declared_ratio = if omega == 0 {
        Rational::zero()
    } else {
        Rational::new(palette.len() as i64, omega as i64)
    };
    Ok(Wall { family, colors, declared_ratio })
}

const TOWER_BUDGET: usize = 1_000_000;

/// The tower family: level i stacks four new intervals, joined end to end
/// like the four-vertex path, over four narrow copies of level i−1. Each
/// new interval covers exactly one copy, so the clique grows by one while
/// three new colors appear: 3i+1 colors at clique size i+1.
pub fn tower_wall(i: u32) -> Result<Wall> {
    let mut count: usize = 1;
    for _ in 0..i {
        count = count
            .checked_mul(4)
            .and_then(|c| c.checked_add(4))
            .filter(|&c| c <= TOWER_BUDGET)
            .ok_or_else(|| {
                Error::BudgetExceeded(format!("tower level {i} exceeds {TOWER_BUDGET} vertices"))
            })?;
    }

    let mut wall = Wall {
        family: IntervalFamily::new(vec![Interval::of_ints(0, 1)]),
        colors: vec![1],
        declared_ratio: Rational::one(),
    };
    for level in 1..=i as i64 {
        let top = 3 * (level - 1) + 1;
        let slots = [(1, 2), (4, 5), (7, 8), (10, 11)];
        let mut family = IntervalFamily::default();
        let mut colors = Vec::new();
        for (lo, hi) in slots {
            let copy = wall.family.squeeze(&Interval::of_ints(lo, hi))?;
            for (v, iv) in copy.iter() {
                family.push(iv.clone());
                colors.push(wall.colors[v]);
            }
        }
        // The four new intervals: a path of junctions, levels L+1, L+2,
        // L+3, L+1, each containing one slot.
        for (lo, hi, color) in [(0, 3, top + 1), (3, 6, top + 2), (6, 9, top + 3), (9, 12, top + 1)]
        {
            family.push(Interval::of_ints(lo, hi));
            colors.push(color);
        }
        wall = Wall { family, colors, declared_ratio: Rational::one() };
    }
    wall.declared_ratio = Rational::new(3 * i as i64 + 1, i as i64 + 1);
    Ok(wall)
}

// ---------------------------------------------------------------------------
// Cap expansion

struct Expander {
    r: Rational,
    units: Vec<UnitVertex>,
    /// Strips in first-occurrence order: (strip, cone color, member indices).
    groups: Vec<(Interval, BigInt, Vec<usize>)>,
    constants: ExpansionConstants,
    budget: ExpansionBudget,
    built: usize,
    templates: HashMap<usize, Wall>,
}

/// Expands a verified cap into a wall of clique size exactly k with at
/// least ⌈rk − b⌉ colors.
pub fn cap_to_wall(cap: &VertexCap, k: usize, budget: &ExpansionBudget) -> Result<Wall> {
    let report = verify_vertex_cap(cap);
    if !report.ok {
        return Err(Error::InvalidCap(format!(
            "expansion needs a verified cap: {:?}",
            report.violations[0]
        )));
    }
    if cap.r < Rational::one() {
        return Err(Error::InvalidCap(format!("expansion needs r >= 1, got {}", cap.r)));
    }
    let units = cap.unit_vertices(budget.max_vertices)?;

    let mut groups: Vec<(Interval, BigInt, Vec<usize>)> = Vec::new();
    for (i, u) in units.iter().enumerate() {
        match groups.iter_mut().find(|(strip, _, _)| strip == &u.strip) {
            Some((_, cone, members)) => {
                if cone != &u.cone_color {
                    return Err(Error::InvalidCap(format!(
                        "vertices sharing strip {:?} declare different cones {} and {}",
                        u.strip, cone, u.cone_color
                    )));
                }
                members.push(i);
            }
            None => groups.push((u.strip.clone(), u.cone_color.clone(), vec![i])),
        }
    }

    let constants = ExpansionConstants::from_cap(cap);
    let mut ex = Expander {
        r: cap.r.clone(),
        units,
        groups,
        constants,
        budget: budget.clone(),
        built: 0,
        templates: HashMap::new(),
    };
    ex.build(k)?;
    Ok(ex.templates.remove(&k).expect("just built"))
}

impl Expander {
    fn build(&mut self, k: usize) -> Result<()> {
        if self.templates.contains_key(&k) {
            return Ok(());
        }
        // Base case: below the deepest cone depth a clique wall already
        // meets the (negative) color bound.
        if Rational::from_int(k as i64) < self.constants.c {
            self.charge(k)?;
            self.templates.insert(k, clique_wall(k));
            return Ok(());
        }

        // Clique parameters of the sub-walls, one per strip.
        let sub_params: Vec<usize> = self
            .groups
            .iter()
            .map(|(_, cone, _)| {
                let depth = Rational::from_bigint(-cone.clone());
                let d: BigInt = (depth / self.r.clone()).floor_int();
                let d = usize::try_from(d).expect("cone depth fits usize at desk scale");
                debug_assert!(d >= 1 && d <= k);
                k - d
            })
            .collect();
        for &sub in &sub_params {
            self.build(sub)?;
        }

        let size_estimate: usize = sub_params
            .iter()
            .map(|s| self.templates[s].family.len())
            .sum::<usize>()
            + self.units.len()
            + k;
        self.charge(size_estimate)?;

        // Fill every strip with its recolored sub-wall instance.
        let fills: Vec<Vec<(Interval, i64)>> = if self.budget.parallel_fill {
            std::thread::scope(|scope| {
                let handles: Vec<_> = self
                    .groups
                    .iter()
                    .zip(&sub_params)
                    .map(|((strip, cone, _), &sub)| {
                        let template = &self.templates[&sub];
                        scope.spawn(move || instantiate(template, strip, cone))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("fill thread")).collect()
            })
        } else {
            self.groups
                .iter()
                .zip(&sub_params)
                .map(|((strip, cone, _), &sub)| instantiate(&self.templates[&sub], strip, cone))
                .collect::<Vec<_>>()
        };

        let mut vertices: Vec<(Interval, i64)> = Vec::new();
        for fill in fills {
            vertices.extend(fill);
        }
        for u in &self.units {
            let color = i64::try_from(&u.color).map_err(|_| {
                Error::InvalidCap("cap colors too large for expansion".into())
            })?;
            vertices.push((u.interval.clone(), color));
        }

        // Truncate at b − rk and translate by ⌈rk − b⌉.
        let t_big = (&(&self.r * &Rational::from_int(k as i64)) - &self.constants.b).ceil_int();
        let t = i64::try_from(&t_big.max(BigInt::from(0)))
            .map_err(|_| Error::BudgetExceeded("palette translation overflows".into()))?;
        let mut family = IntervalFamily::default();
        let mut colors: Coloring = Vec::new();
        let mut right_edge = Rational::zero();
        for (iv, color) in vertices {
            if color >= 1 - t {
                if iv.hi() > &right_edge {
                    right_edge = iv.hi().clone();
                }
                family.push(iv);
                colors.push(color + t);
            }
        }

        // Side clique wall restores clique size exactly k.
        let side_lo = &right_edge + &Rational::one();
        let side = Interval::new(side_lo.clone(), &side_lo + &Rational::one());
        for c in 1..=k as i64 {
            family.push(side.clone());
            colors.push(c);
        }

        let omega = family.clique_size_allow_empty();
        let mut palette = colors.clone();
        palette.sort_unstable();
        palette.dedup();
        let declared_ratio = if omega == 0 {
            Rational::zero()
        } else {
            Rational::new(palette.len() as i64, omega as i64)
        };
        self.templates.insert(k, Wall { family, colors, declared_ratio });
        Ok(())
    }

    fn charge(&mut self, vertices: usize) -> Result<()> {
        self.built += vertices;
        if self.built > self.budget.max_vertices {
            return Err(Error::BudgetExceeded(format!(
                "expansion constructed {} vertices, budget {}",
                self.built, self.budget.max_vertices
            )));
        }
        Ok(())
    }
}

/// Squeezes a template into the middle third of the strip and recolors it
/// from its top down so its top color is the strip's cone color.
fn instantiate(template: &Wall, strip: &Interval, cone: &BigInt) -> Vec<(Interval, i64)> {
    if template.family.is_empty() {
        return Vec::new();
    }
    let squeezed = template
        .family
        .squeeze(&strip.middle_third())
        .expect("strips have positive length");
    let top = *template.colors.iter().max().unwrap();
    let cone: i64 = cone.try_into().expect("cone color fits i64 at desk scale");
    squeezed
        .iter()
        .map(|(v, iv)| (iv.clone(), template.colors[v] + (cone - top)))
        .collect()
}
