//! Bottom-up model checking.
//!
//! Extensions are computed on the subformula structure: the argument sets
//! ⟦φ⟧ and ⟦ψ⟧ first, then one sweep over the joint actions at each state.
//! Outcome sets for a coalition pair are tabulated once per state and
//! reused across formulas.

mod explain;

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{AgentSet, Formula, StrategicOp};
use crate::model::{Coalition, GameModel, StateSet};

pub use explain::Explanation;

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum EvalError {
    #[error("unknown agent `{0}` in coalition")]
    UnknownAgent(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
}

/// ⟦φ⟧ for one formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    pub formula: Formula,
    pub states: StateSet,
}

/// Which joint actions of the second coalition the operators range over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantification {
    /// σ_B over all of B, merged as σ_A ⊎ σ_B.
    FullB,
    /// σ_{B\A}, the restated form.
    BMinusA,
}

/// Outcome sets of one coalition pair at one state.
#[derive(Clone, Debug)]
pub struct OutcomeTable {
    /// `by_a[i]` = Out[s, σ_A^i], in `joint_actions` order.
    pub by_a: Vec<StateSet>,
    /// `by_ab[i][j]` = Out[s, σ_A^i ⊎ σ_B^j].
    pub by_ab: Vec<Vec<StateSet>>,
}

fn radices(model: &GameModel, state: usize, c: Coalition) -> Vec<(usize, usize)> {
    c.members().map(|a| (a, model.action_count(state, a))).collect()
}

fn index_of(profile: &[usize], radix: &[(usize, usize)]) -> usize {
    radix.iter().fold(0, |acc, &(a, r)| acc * r + profile[a])
}

/// Tabulates Out[s, σ_A] and Out[s, σ_A ⊎ σ_B] for every σ_A, σ_B.
pub fn outcome_table(model: &GameModel, state: usize, a: Coalition, b: Coalition) -> OutcomeTable {
    let d = b.difference(a);
    let ra = radices(model, state, a);
    let rb = radices(model, state, b);
    let rd = radices(model, state, d);
    let na: usize = ra.iter().map(|x| x.1).product();
    let nb: usize = rb.iter().map(|x| x.1).product();
    let nd: usize = rd.iter().map(|x| x.1).product();
    let mut by_a = vec![model.empty_set(); na];
    let mut by_ad = vec![vec![model.empty_set(); nd]; na];
    for p in 0..model.profile_count(state) {
        let profile = model.decode_profile(state, p);
        let target = model.outcome(state, p);
        let ia = index_of(&profile, &ra);
        by_a[ia].insert(target);
        by_ad[ia][index_of(&profile, &rd)].insert(target);
    }
    // σ_A ⊎ σ_B depends on σ_B only through its B\A part
    let projection: Vec<usize> = (0..nb)
        .map(|mut j| {
            let mut choice = vec![0; model.agent_count()];
            for &(agent, r) in rb.iter().rev() {
                choice[agent] = j % r;
                j /= r;
            }
            index_of(&choice, &rd)
        })
        .collect();
    let by_ab = by_ad
        .into_iter()
        .map(|row| projection.iter().map(|&k| row[k].clone()).collect())
        .collect();
    OutcomeTable { by_a, by_ab }
}

/// Evaluates one operator at one state from its outcome table.
pub fn operator_holds(op: StrategicOp, table: &OutcomeTable, phi: &StateSet, psi: &StateSet) -> bool {
    let ok_a = |i: usize| table.by_a[i].is_subset(phi);
    let ok_ab = |i: usize, j: usize| table.by_ab[i][j].is_subset(psi);
    let na = table.by_a.len();
    let nb = table.by_ab.first().map_or(0, Vec::len);
    match op {
        StrategicOp::Cooperation => (0..na).any(|i| ok_a(i) && (0..nb).any(|j| ok_ab(i, j))),
        StrategicOp::Proactive => (0..nb).any(|j| (0..na).all(|i| !ok_a(i) || ok_ab(i, j))),
        StrategicOp::Reactive => (0..na).all(|i| !ok_a(i) || (0..nb).any(|j| ok_ab(i, j))),
    }
}

type TableKey = (Coalition, Coalition);
type OpKey = (StrategicOp, Coalition, Coalition, StateSet, StateSet);

/// Memoizing model checker for one model.
pub struct Evaluator<'m> {
    model: &'m GameModel,
    mode: Quantification,
    tables: HashMap<TableKey, Arc<Vec<OutcomeTable>>>,
    formulas: HashMap<Formula, StateSet>,
    operators: HashMap<OpKey, StateSet>,
}

impl<'m> Evaluator<'m> {
    pub fn new(model: &'m GameModel) -> Self {
        Evaluator::with_quantification(model, Quantification::FullB)
    }

    pub fn with_quantification(model: &'m GameModel, mode: Quantification) -> Self {
        Evaluator {
            model,
            mode,
            tables: HashMap::new(),
            formulas: HashMap::new(),
            operators: HashMap::new(),
        }
    }

    pub fn model(&self) -> &'m GameModel {
        self.model
    }

    pub fn resolve(&self, set: &AgentSet) -> Result<Coalition, EvalError> {
        let mut c = Coalition::EMPTY;
        for name in set.iter() {
            let i = self
                .model
                .agent_index(name)
                .map_err(|_| EvalError::UnknownAgent(name.to_string()))?;
            c = c.union(Coalition::singleton(i));
        }
        Ok(c)
    }

    /// Outcome tables for `(a, b)` at every state, under this evaluator's
    /// quantification mode.
    pub fn tables(&mut self, a: Coalition, b: Coalition) -> Arc<Vec<OutcomeTable>> {
        let b = match self.mode {
            Quantification::FullB => b,
            Quantification::BMinusA => b.difference(a),
        };
        let model = self.model;
        self.tables
            .entry((a, b))
            .or_insert_with(|| {
                Arc::new(
                    (0..model.state_count())
                        .map(|s| outcome_table(model, s, a, b))
                        .collect(),
                )
            })
            .clone()
    }

    /// States where `op(a, b)` holds given argument extensions.
    pub fn operator_extension(
        &mut self,
        op: StrategicOp,
        a: Coalition,
        b: Coalition,
        phi: &StateSet,
        psi: &StateSet,
    ) -> StateSet {
        let key = (op, a, b, phi.clone(), psi.clone());
        if let Some(hit) = self.operators.get(&key) {
            return hit.clone();
        }
        let tables = self.tables(a, b);
        let mut out = self.model.empty_set();
        for (s, table) in tables.iter().enumerate() {
            if operator_holds(op, table, phi, psi) {
                out.insert(s);
            }
        }
        self.operators.insert(key, out.clone());
        out
    }

    /// `[A]φ` evaluated directly: some σ_A forces φ.
    pub fn coalition_box(&mut self, a: Coalition, phi: &StateSet) -> StateSet {
        let tables = self.tables(a, Coalition::EMPTY);
        let mut out = self.model.empty_set();
        for (s, t) in tables.iter().enumerate() {
            if t.by_a.iter().any(|o| o.is_subset(phi)) {
                out.insert(s);
            }
        }
        out
    }

    pub fn extension(&mut self, f: &Formula) -> Result<StateSet, EvalError> {
        if let Some(hit) = self.formulas.get(f) {
            return Ok(hit.clone());
        }
        let set = match f {
            Formula::Atom(p) => self.model.atom_extension(p),
            Formula::Top => self.model.full_set(),
            Formula::Not(g) => {
                let mut s = self.extension(g)?;
                s.toggle_range(..);
                s
            }
            Formula::And(l, r) => {
                let mut s = self.extension(l)?;
                s.intersect_with(&self.extension(r)?);
                s
            }
            Formula::Strategic { op, a, b, phi, psi } => {
                let a = self.resolve(a)?;
                let b = self.resolve(b)?;
                let phi = self.extension(phi)?;
                let psi = self.extension(psi)?;
                self.operator_extension(*op, a, b, &phi, &psi)
            }
        };
        self.formulas.insert(f.clone(), set.clone());
        Ok(set)
    }

    pub fn holds_at(&mut self, state: usize, f: &Formula) -> Result<bool, EvalError> {
        if state >= self.model.state_count() {
            return Err(EvalError::UnknownState(format!("#{state}")));
        }
        Ok(self.extension(f)?.contains(state))
    }

    /// Witnesses for the outermost strategic operator of `f` at `state`.
    pub fn explain(&mut self, state: usize, f: &Formula) -> Result<Option<Explanation>, EvalError> {
        explain::explain(self, state, f)
    }
}

fn state_index(model: &GameModel, state: &str) -> Result<usize, EvalError> {
    model
        .state_index(state)
        .map_err(|_| EvalError::UnknownState(state.to_string()))
}

/// Whether `f` holds at the named state.
pub fn holds(model: &GameModel, state: &str, f: &Formula) -> Result<bool, EvalError> {
    let s = state_index(model, state)?;
    Evaluator::new(model).holds_at(s, f)
}

/// Same as [`holds`], with every operator quantifying over joint actions of
/// `B \ A` instead of `B`.
pub fn holds_via_b_minus_a(model: &GameModel, state: &str, f: &Formula) -> Result<bool, EvalError> {
    let s = state_index(model, state)?;
    Evaluator::with_quantification(model, Quantification::BMinusA).holds_at(s, f)
}

pub fn extension(model: &GameModel, f: &Formula) -> Result<Extension, EvalError> {
    let states = Evaluator::new(model).extension(f)?;
    Ok(Extension {
        formula: f.clone(),
        states,
    })
}
