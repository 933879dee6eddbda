//! CL- and ConStR-bisimulations within one model.
//!
//! Relations between two models are handled by checking them inside the
//! disjoint union (see [`GameModel::disjoint_union`]).

mod clauses;
mod distinguish;

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::model::{GameModel, ParseError, StateSet};

use clauses::{pair_violation, Tables, View};
pub use clauses::{disjoint_pairs, Family};
pub use distinguish::{distinguishing_formula, Refinement, RefinementError};

/// A set of ordered state pairs over one model.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateRelation {
    pairs: BTreeSet<(usize, usize)>,
}

impl StateRelation {
    pub fn new() -> Self {
        StateRelation::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, usize)>>(pairs: I) -> Self {
        StateRelation {
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn identity(n: usize) -> Self {
        StateRelation::from_pairs((0..n).map(|s| (s, s)))
    }

    pub fn insert(&mut self, x: usize, y: usize) -> bool {
        self.pairs.insert((x, y))
    }

    pub fn remove(&mut self, x: usize, y: usize) -> bool {
        self.pairs.remove(&(x, y))
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.pairs.contains(&(x, y))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn inverse(&self) -> StateRelation {
        StateRelation::from_pairs(self.pairs().map(|(x, y)| (y, x)))
    }

    pub fn is_subset(&self, other: &StateRelation) -> bool {
        self.pairs.is_subset(&other.pairs)
    }

    pub fn union(&self, other: &StateRelation) -> StateRelation {
        StateRelation::from_pairs(self.pairs().chain(other.pairs()))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(x, y)| self.contains(y, x))
    }

    pub(crate) fn view(&self, n: usize) -> View {
        let mut fwd = vec![StateSet::with_capacity(n); n];
        let mut bwd = vec![StateSet::with_capacity(n); n];
        for (x, y) in self.pairs() {
            fwd[x].insert(y);
            bwd[y].insert(x);
        }
        View { fwd, bwd }
    }

    /// Reads `s ~ t` lines; `#` starts a comment.
    pub fn parse(model: &GameModel, text: &str) -> Result<StateRelation, ParseError> {
        let mut rel = StateRelation::new();
        for (i, full) in text.lines().enumerate() {
            let line = full.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let err = |column: usize, message: String| ParseError {
                line: i + 1,
                column,
                message,
            };
            let (left, right) = line
                .split_once('~')
                .ok_or_else(|| err(1, "expected `<state> ~ <state>`".into()))?;
            let mut ends = Vec::new();
            for (offset, part) in [(0, left), (left.len() + 1, right)] {
                let name = part.trim();
                let column = offset + part.len() - part.trim_start().len() + 1;
                let ix = model
                    .state_index(name)
                    .map_err(|_| err(column, format!("unknown state `{name}`")))?;
                ends.push(ix);
            }
            rel.insert(ends[0], ends[1]);
        }
        Ok(rel)
    }

    /// One `s ~ t` line per pair, in index order.
    pub fn render(&self, model: &GameModel) -> String {
        let mut out = String::new();
        for (x, y) in self.pairs() {
            let _ = writeln!(out, "{} ~ {}", model.state_name(x), model.state_name(y));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClauseTag {
    AtomEq,
    ClForth,
    ClBack,
    AForthC,
    ABackC,
    BForthAlpha,
    BBackAlpha,
    AForthBeta,
    ABackBeta,
}

impl ClauseTag {
    fn of(family: Family, back: bool) -> ClauseTag {
        match (family, back) {
            (Family::Cl, false) => ClauseTag::ClForth,
            (Family::Cl, true) => ClauseTag::ClBack,
            (Family::Cooperation, false) => ClauseTag::AForthC,
            (Family::Cooperation, true) => ClauseTag::ABackC,
            (Family::Proactive, false) => ClauseTag::BForthAlpha,
            (Family::Proactive, true) => ClauseTag::BBackAlpha,
            (Family::Reactive, false) => ClauseTag::AForthBeta,
            (Family::Reactive, true) => ClauseTag::ABackBeta,
        }
    }

    pub fn family(self) -> Option<Family> {
        match self {
            ClauseTag::AtomEq => None,
            ClauseTag::ClForth | ClauseTag::ClBack => Some(Family::Cl),
            ClauseTag::AForthC | ClauseTag::ABackC => Some(Family::Cooperation),
            ClauseTag::BForthAlpha | ClauseTag::BBackAlpha => Some(Family::Proactive),
            ClauseTag::AForthBeta | ClauseTag::ABackBeta => Some(Family::Reactive),
        }
    }
}

impl fmt::Display for ClauseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClauseTag::AtomEq => "AtomEq",
            ClauseTag::ClForth => "Forth",
            ClauseTag::ClBack => "Back",
            ClauseTag::AForthC => "A-Forth_c",
            ClauseTag::ABackC => "A-Back_c",
            ClauseTag::BForthAlpha => "B-Forth_alpha",
            ClauseTag::BBackAlpha => "B-Back_alpha",
            ClauseTag::AForthBeta => "A-Forth_beta",
            ClauseTag::ABackBeta => "A-Back_beta",
        })
    }
}

impl Serialize for ClauseTag {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The first violated clause of a relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClauseFailure {
    pub pair: (String, String),
    pub tag: ClauseTag,
    /// Coalition A (the single coalition for CL clauses).
    pub a: Vec<String>,
    /// Coalition B, given as its part outside A.
    pub b: Vec<String>,
    /// The outermost joint action that has no matching counterpart.
    pub witness: Option<String>,
    /// State the witness is played at.
    pub witness_state: Option<String>,
}

impl fmt::Display for ClauseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} fails at ({}, {})",
            self.tag, self.pair.0, self.pair.1
        )?;
        if self.tag != ClauseTag::AtomEq {
            write!(f, " for A = {{{}}}", self.a.join(","))?;
            if !matches!(self.tag, ClauseTag::ClForth | ClauseTag::ClBack) {
                write!(f, ", B = {{{}}}", self.b.join(","))?;
            }
        }
        if let (Some(w), Some(s)) = (&self.witness, &self.witness_state) {
            write!(f, ": {w} at {s} has no counterpart")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BisimVerdict {
    pub ok: bool,
    pub failure: Option<ClauseFailure>,
}

impl BisimVerdict {
    fn pass() -> Self {
        BisimVerdict { ok: true, failure: None }
    }

    fn fail(failure: ClauseFailure) -> Self {
        BisimVerdict {
            ok: false,
            failure: Some(failure),
        }
    }
}

pub(crate) fn atom_equivalent(model: &GameModel, x: usize, y: usize) -> bool {
    model.labels(x) == model.labels(y)
}

fn describe_violation(model: &GameModel, x: usize, y: usize, v: &clauses::Violation) -> ClauseFailure {
    let at = if v.back { y } else { x };
    let played_by = if v.family == Family::Proactive { v.d } else { v.a };
    let witness = model
        .joint_actions(played_by, at)
        .ok()
        .and_then(|jas| jas.get(v.witness).map(|ja| ja.describe(model)));
    ClauseFailure {
        pair: (model.state_name(x).to_string(), model.state_name(y).to_string()),
        tag: ClauseTag::of(v.family, v.back),
        a: model.coalition_names(v.a),
        b: model.coalition_names(v.d),
        witness,
        witness_state: Some(model.state_name(at).to_string()),
    }
}

/// Checks `relation` against atom equivalence and the given families, in
/// order, reporting the first violation found (pairs in index order).
pub fn check_families(model: &GameModel, relation: &StateRelation, families: &[Family]) -> BisimVerdict {
    let n = model.state_count();
    let view = relation.view(n);
    let flipped = view.flipped();
    let mut tables = Tables::new(model);
    for (x, y) in relation.pairs() {
        if !atom_equivalent(model, x, y) {
            return BisimVerdict::fail(ClauseFailure {
                pair: (model.state_name(x).to_string(), model.state_name(y).to_string()),
                tag: ClauseTag::AtomEq,
                a: Vec::new(),
                b: Vec::new(),
                witness: None,
                witness_state: None,
            });
        }
    }
    for &family in families {
        for (x, y) in relation.pairs() {
            if let Some(v) = pair_violation(&mut tables, &[family], model.agent_count(), x, y, &view, &flipped) {
                return BisimVerdict::fail(describe_violation(model, x, y, &v));
            }
        }
    }
    BisimVerdict::pass()
}

pub fn check_cl_bisim(model: &GameModel, relation: &StateRelation) -> BisimVerdict {
    check_families(model, relation, &[Family::Cl])
}

/// Checks all three ConStR families, reporting failures of the `Oc`
/// family first, then `Oa`, then `Ob`.
pub fn check_constr_bisim(model: &GameModel, relation: &StateRelation) -> BisimVerdict {
    check_families(model, relation, &Family::CONSTR)
}

/// Greatest relation satisfying the given families: start from all
/// atom-equivalent pairs and delete violating pairs in index order,
/// re-checking against the current relation, until nothing changes.
pub fn greatest_for(model: &GameModel, families: &[Family]) -> StateRelation {
    let n = model.state_count();
    let mut rel = StateRelation::from_pairs(
        (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| atom_equivalent(model, x, y)),
    );
    let mut tables = Tables::new(model);
    loop {
        let mut changed = false;
        let candidates: Vec<(usize, usize)> = rel.pairs().collect();
        for (x, y) in candidates {
            let view = rel.view(n);
            let flipped = view.flipped();
            if pair_violation(&mut tables, families, model.agent_count(), x, y, &view, &flipped).is_some() {
                rel.remove(x, y);
                changed = true;
            }
        }
        if !changed {
            return rel;
        }
    }
}

pub fn greatest_cl_bisim(model: &GameModel) -> StateRelation {
    greatest_for(model, &[Family::Cl])
}

pub fn greatest_constr_bisim(model: &GameModel) -> StateRelation {
    greatest_for(model, &Family::CONSTR)
}
