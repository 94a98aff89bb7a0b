//! Binary caps and the executable impossibility argument at ratio 5.
//!
//! A binary cap abstracts a cap whose support structure is an ordered
//! binary tree: each box has at most one high supporter (top level with the
//! parent's bottom) and at most one low supporter. Boxes are addressed by
//! words over {H, L}; κ_w is the box height (0 encodes absence) and τ_w its
//! top depth. The derived weights β, π obey simple descent relations, and
//! the two κ inequalities tie the tree to the sparseness geometry.
//!
//! `refute_five` runs the impossibility argument as an algorithm: starting
//! from the top box it keeps certifying "hard" boxes whose κ must grow
//! along a Fibonacci-bounded chain; since the cap is finite, some required
//! box is missing or too small, and that is the returned witness. Every
//! inequality in the chain is recorded with exact values so a witness can
//! be re-verified independently.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::boxcap::BoxCap;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    H,
    L,
}

/// Address of a box in the support tree; the empty word is the top box.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn child(&self, letter: Letter) -> Word {
        let mut w = self.0.clone();
        w.push(letter);
        Word(w)
    }

    pub fn parent(&self) -> Option<Word> {
        if self.0.is_empty() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.0.len(), &self.0).cmp(&(other.0.len(), &other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", if *l == Letter::H { 'H' } else { 'L' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "λ")
        } else {
            fmt::Display::fmt(self, f)
        }
    }
}

impl FromStr for Word {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "λ" {
            return Ok(Word::empty());
        }
        let mut letters = Vec::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                'H' => letters.push(Letter::H),
                'L' => letters.push(Letter::L),
                _ => return Err(format!("bad letter {ch:?} in word {s:?}")),
            }
        }
        Ok(Word(letters))
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryCapNode {
    /// Box height; zero encodes absence.
    pub kappa: Rational,
    /// Depth of the box top.
    pub tau: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCap {
    pub r: Rational,
    pub nodes: BTreeMap<Word, BinaryCapNode>,
}

impl BinaryCap {
    pub fn kappa(&self, w: &Word) -> Rational {
        self.nodes.get(w).map(|n| n.kappa.clone()).unwrap_or_else(Rational::zero)
    }

    pub fn present(&self, w: &Word) -> bool {
        self.kappa(w).is_positive()
    }

    pub fn tau(&self, w: &Word) -> Option<Rational> {
        self.nodes.get(w).filter(|n| n.kappa.is_positive()).map(|n| n.tau.clone())
    }

    pub fn present_words(&self) -> impl Iterator<Item = &Word> {
        self.nodes.iter().filter(|(_, n)| n.kappa.is_positive()).map(|(w, _)| w)
    }
}

/// Weights derived from the descent relations: β is the weight above a
/// box's cone minus its own height, π the penalty β_parent + κ_parent − β,
/// and α = β + π the weight above the parent's cone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Quantities {
    pub beta: Rational,
    pub pi: Rational,
}

impl Quantities {
    pub fn alpha(&self) -> Rational {
        &self.beta + &self.pi
    }
}

pub type DerivedQuantities = BTreeMap<Word, Quantities>;

/// Computes β and π for every present word, top-down:
/// β_λ = π_λ = 0; β_{vL} = β_v + π_v, π_{vL} = κ_v − π_v;
/// β_{vH} = β_v, π_{vH} = κ_v.
pub fn derive_quantities(cap: &BinaryCap) -> Result<DerivedQuantities> {
    let mut out: DerivedQuantities = BTreeMap::new();
    if !cap.present(&Word::empty()) {
        return Err(Error::MissingParent("λ (caps are nonempty)".to_string()));
    }
    for w in cap.present_words() {
        if w.is_empty() {
            out.insert(w.clone(), Quantities { beta: Rational::zero(), pi: Rational::zero() });
            continue;
        }
        let parent = w.parent().unwrap();
        if !cap.present(&parent) {
            return Err(Error::MissingParent(format!("{w:?}")));
        }
        // Parents precede children in the (length, lex) order.
        let pq = out.get(&parent).expect("parent already derived").clone();
        let kappa_p = cap.kappa(&parent);
        let q = match w.0.last().unwrap() {
            Letter::L => Quantities { beta: pq.alpha(), pi: &kappa_p - &pq.pi },
            Letter::H => Quantities { beta: pq.beta.clone(), pi: kappa_p },
        };
        out.insert(w.clone(), q);
    }
    Ok(out)
}

/// Effective top depth of the low child: the declared one when the box
/// exists, otherwise the cone depth r(β_v + κ_v) — an absent low supporter
/// means the high child must reach the cone alone.
fn tau_low(cap: &BinaryCap, q: &DerivedQuantities, v: &Word) -> Rational {
    let vl = v.child(Letter::L);
    cap.tau(&vl).unwrap_or_else(|| {
        let qv = &q[v];
        &cap.r * &(&qv.beta + &cap.kappa(v))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct RelationViolation {
    pub word: Word,
    pub relation: String,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub ok: bool,
    pub violations: Vec<RelationViolation>,
}

/// Verifies the κ inequalities and the forced equalities at every present
/// node, with absent low children defaulted to the cone depth.
pub fn check_relations(cap: &BinaryCap) -> Result<RelationReport> {
    let q = derive_quantities(cap)?;
    let mut violations = Vec::new();

    if let Some(tau) = cap.tau(&Word::empty()) {
        if !tau.is_zero() {
            violations.push(RelationViolation {
                word: Word::empty(),
                relation: "Cap-λ".into(),
                detail: format!("top box must start at depth 0, has τ = {tau}"),
            });
        }
    }

    // The inequalities constrain declared data, so each is checked where
    // the children it mentions are present; an absent low child defaults
    // to the cone depth, and requirements forced onto absent boxes are the
    // refuter's business, not a malformed-input report.
    for v in cap.present_words() {
        let qv = &q[v];
        let kappa_v = cap.kappa(v);
        let tau_v = cap.tau(v).expect("present");
        let cone = &cap.r * &(&qv.beta + &kappa_v);
        let parent_bottom = &tau_v + &kappa_v;
        let vl = v.child(Letter::L);
        let vh = v.child(Letter::H);

        if let Some(t_low) = cap.tau(&vl) {
            // (L-κ): κ_{vL} ≥ r(β_v + κ_v) − τ_{vL} ≥ 0.
            if t_low > cone {
                violations.push(RelationViolation {
                    word: v.clone(),
                    relation: "L-κ".into(),
                    detail: format!("low child top {t_low} is below the cone depth {cone}"),
                });
            }
            let kappa_l = cap.kappa(&vl);
            if &kappa_l + &t_low < cone {
                violations.push(RelationViolation {
                    word: v.clone(),
                    relation: "L-κ".into(),
                    detail: format!(
                        "κ_vL + τ_vL = {} + {t_low} = {} falls short of r(β+κ) = {cone}",
                        kappa_l,
                        &kappa_l + &t_low
                    ),
                });
            }
            // (H-κ), lower part: the low child may not start above the
            // parent's bottom.
            if t_low < parent_bottom {
                violations.push(RelationViolation {
                    word: v.clone(),
                    relation: "H-κ".into(),
                    detail: format!(
                        "low child top {t_low} is above the parent bottom {parent_bottom}"
                    ),
                });
            }
        }

        if cap.present(&vh) {
            // (H-κ): κ_{vH} ≥ τ_{vL} − τ_v − κ_v, with the default τ_{vL}
            // this reads "the high child reaches the cone alone".
            let t_low = tau_low(cap, &q, v);
            let kappa_h = cap.kappa(&vh);
            if kappa_h < &t_low - &parent_bottom {
                violations.push(RelationViolation {
                    word: v.clone(),
                    relation: "H-κ".into(),
                    detail: format!(
                        "κ_vH = {kappa_h} cannot bridge from {parent_bottom} to the low child top {t_low}"
                    ),
                });
            }
            // (H-τ): the high child's top is the parent's bottom.
            let tau_h = cap.tau(&vh).expect("present");
            if tau_h != parent_bottom {
                violations.push(RelationViolation {
                    word: v.clone(),
                    relation: "H-τ".into(),
                    detail: format!("high child top {tau_h}, parent bottom {parent_bottom}"),
                });
            }
        }
    }

    violations.sort();
    Ok(RelationReport { ok: violations.is_empty(), violations })
}

fn fib(n: usize) -> BigInt {
    let mut a = BigInt::from(0);
    let mut b = BigInt::from(1);
    for _ in 0..n {
        let next = &a + &b;
        a = b;
        b = next;
    }
    a
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Cmp {
    Ge,
    Le,
    Gt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IneqCheck {
    pub label: String,
    pub lhs: Rational,
    pub cmp: Cmp,
    pub rhs: Rational,
    pub holds: bool,
}

fn check(label: impl Into<String>, lhs: Rational, cmp: Cmp, rhs: Rational) -> IneqCheck {
    let holds = match cmp {
        Cmp::Ge => lhs >= rhs,
        Cmp::Le => lhs <= rhs,
        Cmp::Gt => lhs > rhs,
    };
    IneqCheck { label: label.into(), lhs, cmp, rhs, holds }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainStep {
    pub word: Word,
    pub hardness: usize,
    pub checks: Vec<IneqCheck>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainFailure {
    pub word: Word,
    /// Lower bound on κ the box would need to carry.
    pub required_kappa: Rational,
    pub strict: bool,
    pub actual_kappa: Rational,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainWitness {
    pub chain: Vec<ChainStep>,
    pub failure: ChainFailure,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Refutation {
    /// The cap already violates the descent relations.
    Relations(RelationReport),
    /// The hardness chain reached a box that cannot exist.
    Chain(ChainWitness),
}

/// Hardness bookkeeping for w = u·H^m: H0, H1, H2 for every i ≤ m, plus
/// the Fibonacci growth bound κ ≥ π_u f_{m+3}.
fn hardness_checks(
    cap: &BinaryCap,
    q: &DerivedQuantities,
    u: &Word,
    m: usize,
) -> Vec<IneqCheck> {
    let pi_u = q[u].pi.clone();
    let mut checks = Vec::new();
    let mut w = u.clone();
    for i in 0..=m {
        let qi = &q[&w];
        let kappa = cap.kappa(&w);
        let tau = cap.tau(&w).expect("chain nodes are present");
        checks.push(check(format!("H0[i={i}]"), qi.pi.clone(), Cmp::Ge, Rational::zero()));
        checks.push(check(
            format!("H1[i={i}]"),
            kappa.clone(),
            Cmp::Ge,
            &(&Rational::from_int(2) * &qi.pi) - &(&pi_u * &Rational::from_bigint(fib(i))),
        ));
        checks.push(check(
            format!("H2[i={i}]"),
            tau,
            Cmp::Le,
            &(&(&Rational::from_int(5) * &qi.beta) + &(&Rational::from_int(2) * &qi.pi))
                + &(&pi_u * &Rational::from_bigint(fib(i + 1))),
        ));
        if i == m {
            checks.push(check(
                "growth",
                kappa,
                Cmp::Ge,
                &pi_u * &Rational::from_bigint(fib(m + 3)),
            ));
        }
        if i < m {
            w = w.child(Letter::H);
        }
    }
    checks
}

/// Runs the impossibility argument against a cap claimed at r = 5. The cap
/// must already pass `check_relations`; otherwise that report is returned
/// as the refutation.
pub fn refute_five(cap: &BinaryCap) -> Result<Refutation> {
    if cap.r != Rational::from_int(5) {
        return Err(Error::InvalidParam(format!(
            "the refuter is specific to ratio 5, cap declares {}",
            cap.r
        )));
    }
    let relations = check_relations(cap)?;
    if !relations.ok {
        return Ok(Refutation::Relations(relations));
    }
    let q = derive_quantities(cap)?;
    let five = Rational::from_int(5);
    let two = Rational::from_int(2);
    let three = Rational::from_int(3);

    let node_bound = cap.present_words().count() + 1;
    let mut u = Word::empty();
    let mut m = 0usize;
    let mut chain: Vec<ChainStep> = Vec::new();

    for _ in 0..node_bound {
        let w = (0..m).fold(u.clone(), |w, _| w.child(Letter::H));
        chain.push(ChainStep { word: w.clone(), hardness: m, checks: hardness_checks(cap, &q, &u, m) });

        let qw = &q[&w];
        let kappa_w = cap.kappa(&w);
        let pi_u = q[&u].pi.clone();
        let t_low = tau_low(cap, &q, &w);
        let branch_cut =
            &(&(&five * &qw.beta) + &(&three * &kappa_w)) + &(&two * &qw.pi);

        let (next, required, strict, new_u, new_m) = if t_low < branch_cut {
            // Low branch: the low child must exist and be 0-hard, with
            // κ strictly above twice its penalty.
            let wl = w.child(Letter::L);
            let pi_wl = &kappa_w - &qw.pi;
            let required = (&two * &pi_wl).max(Rational::zero());
            (wl.clone(), required, true, wl, 0)
        } else {
            // High branch: the high child must be (m+1)-hard; its κ is
            // Fibonacci-forced to be positive.
            let wh = w.child(Letter::H);
            let pi_wh = kappa_w.clone();
            let h1_bound = &(&two * &pi_wh) - &(&pi_u * &Rational::from_bigint(fib(m + 1)));
            let growth = &pi_u * &Rational::from_bigint(fib(m + 4));
            (wh, h1_bound.max(growth).max(Rational::zero()), false, u.clone(), m + 1)
        };

        let actual = cap.kappa(&next);
        let satisfied = if strict { actual > required } else { actual >= required };
        if !satisfied || !actual.is_positive() {
            return Ok(Refutation::Chain(ChainWitness {
                chain,
                failure: ChainFailure {
                    word: next,
                    required_kappa: required,
                    strict,
                    actual_kappa: actual,
                    reason: "box is absent or its height is below the forced bound".into(),
                },
            }));
        }

        // The child is present and meets its bound; its remaining hardness
        // indices follow from the relations, so a failure here means the
        // implementation itself is wrong.
        u = new_u;
        m = new_m;
        if hardness_checks(cap, &q, &u, m).iter().any(|c| !c.holds) {
            return Err(Error::Inconsistent);
        }
    }
    Err(Error::Inconsistent)
}

/// Re-verifies a chain witness from scratch: every recorded inequality is
/// recomputed from the cap and must match, and the failure bound must
/// really exclude the failing box.
pub fn verify_witness(cap: &BinaryCap, witness: &ChainWitness) -> bool {
    let Ok(q) = derive_quantities(cap) else { return false };
    for step in &witness.chain {
        let m = step.hardness;
        if step.word.len() < m {
            return false;
        }
        let u = Word(step.word.0[..step.word.len() - m].to_vec());
        if step.word.0[step.word.len() - m..].iter().any(|&l| l != Letter::H) {
            return false;
        }
        let fresh = hardness_checks(cap, &q, &u, m);
        if fresh != step.checks || fresh.iter().any(|c| !c.holds) {
            return false;
        }
    }
    let f = &witness.failure;
    let actual = cap.kappa(&f.word);
    if actual != f.actual_kappa {
        return false;
    }
    let bound_violated = if f.strict {
        actual <= f.required_kappa
    } else {
        actual < f.required_kappa
    };
    bound_violated || !actual.is_positive()
}

/// Encodes a box cap whose support structure is binary: per box at most
/// one supporter starting at its bottom (the high child) and one deeper
/// (the low child).
pub fn encode_box_cap(cap: &BoxCap) -> Result<BinaryCap> {
    let tops: Vec<_> = cap.boxes.iter().filter(|b| b.supports.is_none()).collect();
    if tops.len() != 1 {
        return Err(Error::InvalidCap(format!(
            "binary encoding needs a unique top box, found {}",
            tops.len()
        )));
    }
    let mut nodes = BTreeMap::new();
    let mut queue = vec![(Word::empty(), tops[0])];
    while let Some((word, b)) = queue.pop() {
        nodes.insert(word.clone(), BinaryCapNode { kappa: b.height.clone(), tau: b.top.clone() });
        let supporters: Vec<_> = cap.boxes.iter().filter(|s| s.supports == Some(b.id)).collect();
        if supporters.len() > 2 {
            return Err(Error::InvalidCap(format!("box {} has more than two supporters", b.id)));
        }
        let mut high = None;
        let mut low = None;
        for s in supporters {
            if s.top == b.bottom() && high.is_none() {
                high = Some(s);
            } else if low.is_none() {
                low = Some(s);
            } else {
                return Err(Error::InvalidCap(format!(
                    "supporters of box {} do not split into high and low",
                    b.id
                )));
            }
        }
        if let Some(s) = high {
            queue.push((word.child(Letter::H), s));
        }
        if let Some(s) = low {
            queue.push((word.child(Letter::L), s));
        }
    }
    Ok(BinaryCap { r: cap.r.clone(), nodes })
}

// ---------------------------------------------------------------------------
// File format

#[derive(Serialize, Deserialize)]
struct BinaryCapFileNode {
    word: Word,
    kappa: Rational,
    tau: Rational,
}

#[derive(Serialize, Deserialize)]
struct BinaryCapFile {
    r: Rational,
    nodes: Vec<BinaryCapFileNode>,
}

impl Serialize for BinaryCap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BinaryCapFile {
            r: self.r.clone(),
            nodes: self
                .nodes
                .iter()
                .map(|(w, n)| BinaryCapFileNode {
                    word: w.clone(),
                    kappa: n.kappa.clone(),
                    tau: n.tau.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for BinaryCap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let file = BinaryCapFile::deserialize(d)?;
        let mut nodes = BTreeMap::new();
        for n in file.nodes {
            if nodes
                .insert(n.word.clone(), BinaryCapNode { kappa: n.kappa, tau: n.tau })
                .is_some()
            {
                return Err(serde::de::Error::custom(format!("duplicate word {:?}", n.word)));
            }
        }
        Ok(BinaryCap { r: file.r, nodes })
    }
}
