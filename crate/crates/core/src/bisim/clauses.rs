//! The local Forth conditions, evaluated on outcome tables.
//!
//! Every Back condition at `(s1, s2)` is the matching Forth condition at
//! `(s2, s1)` read through the inverse relation, so only Forth is coded.
//! Conditions are checked for disjoint pairs `(A, D)`: the outcome of
//! `σ_A ⊎ σ_B` only depends on σ_B through its `B \ A` part, so the
//! condition for `(A, B)` coincides with the one for `(A, B \ A)`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::model::{Coalition, GameModel, StateSet};
use crate::semantics::{outcome_table, OutcomeTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Family {
    /// Coalition Logic Forth/Back, one coalition.
    Cl,
    Cooperation,
    Proactive,
    Reactive,
}

impl Family {
    pub const CONSTR: [Family; 3] = [Family::Cooperation, Family::Proactive, Family::Reactive];
}

/// A relation seen from both ends: `fwd[x] = {y | x R y}`, `bwd[y] = {x | x R y}`.
#[derive(Clone, Debug)]
pub(crate) struct View {
    pub fwd: Vec<StateSet>,
    pub bwd: Vec<StateSet>,
}

impl View {
    pub fn flipped(&self) -> View {
        View {
            fwd: self.bwd.clone(),
            bwd: self.fwd.clone(),
        }
    }

    fn spread(sets: &[StateSet], x: &StateSet) -> StateSet {
        let mut out = StateSet::with_capacity(sets.len());
        for u in x.ones() {
            out.union_with(&sets[u]);
        }
        out
    }

    pub fn image(&self, x: &StateSet) -> StateSet {
        View::spread(&self.fwd, x)
    }

    pub fn preimage(&self, y: &StateSet) -> StateSet {
        View::spread(&self.bwd, y)
    }
}

/// Lazily built outcome tables for disjoint coalition pairs.
pub(crate) struct Tables<'m> {
    model: &'m GameModel,
    cache: HashMap<(Coalition, Coalition), Arc<Vec<OutcomeTable>>>,
}

impl<'m> Tables<'m> {
    pub fn new(model: &'m GameModel) -> Self {
        Tables {
            model,
            cache: HashMap::new(),
        }
    }

    pub fn get(&mut self, a: Coalition, d: Coalition) -> Arc<Vec<OutcomeTable>> {
        let model = self.model;
        self.cache
            .entry((a, d))
            .or_insert_with(|| {
                Arc::new(
                    (0..model.state_count())
                        .map(|s| outcome_table(model, s, a, d))
                        .collect(),
                )
            })
            .clone()
    }
}

/// Every disjoint `(A, D)` over `n` agents, A outer, both by bitmask.
pub fn disjoint_pairs(n: usize) -> Vec<(Coalition, Coalition)> {
    let all = Coalition::full(n);
    let mut out = Vec::new();
    for a in all.subsets() {
        for d in all.difference(a).subsets() {
            out.push((a, d));
        }
    }
    out
}

/// The coalition pairs a family quantifies over.
pub fn family_pairs(family: Family, n: usize) -> Vec<(Coalition, Coalition)> {
    match family {
        Family::Cl => Coalition::full(n)
            .subsets()
            .map(|c| (c, Coalition::EMPTY))
            .collect(),
        _ => disjoint_pairs(n),
    }
}

/// Forth of `family` from `t1` (at s1) to `t2` (at s2). Returns the index
/// of an outermost universally chosen joint action at s1 with no match,
/// or `None` when the condition holds.
pub(crate) fn forth(family: Family, t1: &OutcomeTable, t2: &OutcomeTable, view: &View) -> Option<usize> {
    // LB(X1, X2) iff X2 ⊆ img(X1); LF(X1, X2) iff X1 ⊆ pre(X2)
    let img_a: Vec<StateSet> = t1.by_a.iter().map(|x| view.image(x)).collect();
    let lb_a = |i1: usize, i2: usize| t2.by_a[i2].is_subset(&img_a[i1]);
    let n1 = t1.by_a.len();
    let n2 = t2.by_a.len();
    match family {
        Family::Cl => (0..n1).find(|&i1| !(0..n2).any(|i2| lb_a(i1, i2))),
        Family::Cooperation => {
            let img_ab: Vec<Vec<StateSet>> = t1
                .by_ab
                .iter()
                .map(|row| row.iter().map(|x| view.image(x)).collect())
                .collect();
            (0..n1).find(|&i1| {
                !(0..n2).any(|i2| {
                    lb_a(i1, i2)
                        && img_ab[i1].iter().all(|img| {
                            t2.by_ab[i2].iter().any(|y| y.is_subset(img))
                        })
                })
            })
        }
        Family::Proactive => {
            let pre_a: Vec<StateSet> = t2.by_a.iter().map(|y| view.preimage(y)).collect();
            let img_ab: Vec<Vec<StateSet>> = t1
                .by_ab
                .iter()
                .map(|row| row.iter().map(|x| view.image(x)).collect())
                .collect();
            let m1 = t1.by_ab.first().map_or(0, Vec::len);
            let m2 = t2.by_ab.first().map_or(0, Vec::len);
            (0..m1).find(|&j1| {
                !(0..m2).any(|j2| {
                    (0..n2).all(|i2| {
                        (0..n1).any(|i1| {
                            t1.by_a[i1].is_subset(&pre_a[i2])
                                && t2.by_ab[i2][j2].is_subset(&img_ab[i1][j1])
                        })
                    })
                })
            })
        }
        Family::Reactive => {
            let pre_ab: Vec<Vec<StateSet>> = t2
                .by_ab
                .iter()
                .map(|row| row.iter().map(|y| view.preimage(y)).collect())
                .collect();
            (0..n1).find(|&i1| {
                !(0..n2).any(|i2| {
                    lb_a(i1, i2)
                        && pre_ab[i2]
                            .iter()
                            .all(|pre| t1.by_ab[i1].iter().any(|x| x.is_subset(pre)))
                })
            })
        }
    }
}

/// A violated condition at one pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Violation {
    pub family: Family,
    pub a: Coalition,
    pub d: Coalition,
    /// The Back half failed (checked at the swapped pair).
    pub back: bool,
    /// Index of the unmatched outermost joint action, at s1 for Forth and
    /// at s2 for Back.
    pub witness: usize,
}

pub(crate) fn pair_violation(
    tables: &mut Tables<'_>,
    families: &[Family],
    n_agents: usize,
    x: usize,
    y: usize,
    view: &View,
    flipped: &View,
) -> Option<Violation> {
    for &family in families {
        for (a, d) in family_pairs(family, n_agents) {
            let t = tables.get(a, d);
            if let Some(w) = forth(family, &t[x], &t[y], view) {
                return Some(Violation { family, a, d, back: false, witness: w });
            }
            if let Some(w) = forth(family, &t[y], &t[x], flipped) {
                return Some(Violation { family, a, d, back: true, witness: w });
            }
        }
    }
    None
}
