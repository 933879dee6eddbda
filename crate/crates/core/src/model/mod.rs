//! Finite concurrent game models.
//!
//! A [`GameModel`] stores, for every state, the actions available to each
//! agent and a total local outcome function over the product of those
//! action sets. Action profiles are indexed in mixed radix following the
//! agent declaration order, with the last agent varying fastest.
//!
//! Models are immutable once built. They come either from the text format
//! (see [`parse_model`]) through [`RawModel`] validation, or directly from
//! index tables via [`GameModel::from_tables`].

mod raw;
mod text;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

pub use raw::{validate_model, ActionDecl, RawModel, Transition, ValidationReport, Violation};
pub use text::{parse_model, parse_raw, render_model, ParseError};
pub(crate) use text::is_ident_char as text_ident_char;

/// Set of state indices of one model.
pub type StateSet = FixedBitSet;

/// Coalitions are bitmasks over agent indices, so models are limited to
/// this many agents.
pub const MAX_AGENTS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown action `{action}` for agent `{agent}` at state `{state}`")]
    UnknownAction {
        state: String,
        agent: String,
        action: String,
    },
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("joint actions belong to different states (`{left}` and `{right}`)")]
    StateMismatch { left: String, right: String },
    #[error("joint action is not available at state `{state}`")]
    Unavailable { state: String },
    #[error("at most {MAX_AGENTS} agents are supported, got {0}")]
    TooManyAgents(usize),
    #[error("models have different agent lists")]
    AgentMismatch,
    #[error("invalid model:\n{0}")]
    Invalid(ValidationReport),
    #[error("parse error: {0}")]
    Parse(ParseError),
}

/// A set of agents, stored as a bitmask over agent indices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub fn from_bits(bits: u64) -> Self {
        Coalition(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// The grand coalition of a model with `agents` agents.
    pub fn full(agents: usize) -> Self {
        if agents >= 64 {
            Coalition(u64::MAX)
        } else {
            Coalition((1u64 << agents) - 1)
        }
    }

    pub fn singleton(agent: usize) -> Self {
        Coalition(1 << agent)
    }

    pub fn from_members<I: IntoIterator<Item = usize>>(members: I) -> Self {
        Coalition(members.into_iter().fold(0, |acc, a| acc | (1 << a)))
    }

    pub fn contains(self, agent: usize) -> bool {
        agent < 64 && self.0 & (1 << agent) != 0
    }

    pub fn union(self, other: Coalition) -> Coalition {
        Coalition(self.0 | other.0)
    }

    pub fn intersection(self, other: Coalition) -> Coalition {
        Coalition(self.0 & other.0)
    }

    pub fn difference(self, other: Coalition) -> Coalition {
        Coalition(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Coalition) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Member agent indices in increasing order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..64).filter(move |i| bits & (1u64 << i) != 0)
    }

    /// Every subset of this coalition, starting with the empty one.
    pub fn subsets(self) -> impl Iterator<Item = Coalition> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let current = next?;
            next = if current == full {
                None
            } else {
                Some((current.wrapping_sub(full)) & full)
            };
            Some(Coalition(current))
        })
    }
}

/// A choice of one available action for every member of a coalition, at a
/// given state. The empty coalition has exactly one joint action, the empty
/// assignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JointAction {
    state: usize,
    coalition: Coalition,
    /// Action indices aligned with `coalition.members()`.
    choices: Vec<usize>,
}

impl JointAction {
    /// The unique joint action of the empty coalition.
    pub fn empty(state: usize) -> Self {
        JointAction {
            state,
            coalition: Coalition::EMPTY,
            choices: Vec::new(),
        }
    }

    /// Builds a joint action from `(agent, action)` index pairs, checking
    /// availability at `state`.
    pub fn new(
        model: &GameModel,
        state: usize,
        assignment: &[(usize, usize)],
    ) -> Result<Self, ModelError> {
        model.check_state(state)?;
        let mut sorted: BTreeMap<usize, usize> = BTreeMap::new();
        for &(agent, action) in assignment {
            if agent >= model.agents.len() {
                return Err(ModelError::UnknownAgent(format!("#{agent}")));
            }
            if action >= model.actions[state][agent].len() {
                return Err(ModelError::Unavailable {
                    state: model.states[state].clone(),
                });
            }
            sorted.insert(agent, action);
        }
        Ok(JointAction {
            state,
            coalition: Coalition::from_members(sorted.keys().copied()),
            choices: sorted.into_values().collect(),
        })
    }

    /// Builds a joint action from agent and action names.
    pub fn from_names(
        model: &GameModel,
        state: &str,
        assignment: &[(&str, &str)],
    ) -> Result<Self, ModelError> {
        let s = model.state_index(state)?;
        let mut pairs = Vec::with_capacity(assignment.len());
        for (agent, action) in assignment {
            let a = model.agent_index(agent)?;
            let act = model.actions[s][a]
                .iter()
                .position(|x| x == action)
                .ok_or_else(|| ModelError::UnknownAction {
                    state: state.to_string(),
                    agent: agent.to_string(),
                    action: action.to_string(),
                })?;
            pairs.push((a, act));
        }
        JointAction::new(model, s, &pairs)
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn coalition(&self) -> Coalition {
        self.coalition
    }

    /// `(agent, action)` pairs in agent order.
    pub fn assignments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.coalition.members().zip(self.choices.iter().copied())
    }

    pub fn action_of(&self, agent: usize) -> Option<usize> {
        self.assignments().find(|&(a, _)| a == agent).map(|(_, x)| x)
    }

    /// Restriction to the members of `coalition` that this joint action covers.
    pub fn restrict(&self, coalition: Coalition) -> JointAction {
        let (members, choices): (Vec<usize>, Vec<usize>) = self
            .assignments()
            .filter(|&(a, _)| coalition.contains(a))
            .unzip();
        JointAction {
            state: self.state,
            coalition: Coalition::from_members(members),
            choices,
        }
    }

    /// True if this joint action agrees with `other` on all of `other`'s agents.
    pub fn extends(&self, other: &JointAction) -> bool {
        self.state == other.state
            && other.coalition.is_subset(self.coalition)
            && other
                .assignments()
                .all(|(a, x)| self.action_of(a) == Some(x))
    }

    pub fn describe(&self, model: &GameModel) -> String {
        let parts: Vec<String> = self
            .assignments()
            .map(|(a, x)| format!("{}:{}", model.agents[a], model.actions[self.state][a][x]))
            .collect();
        format!("{{{}}}", parts.join(", "))
    }
}

/// `sigma_a ⊎ sigma_b`: the joint action of `A ∪ B` that follows `sigma_a` on
/// `A` and `sigma_b` on `B \ A`.
pub fn merge(sigma_a: &JointAction, sigma_b: &JointAction) -> Result<JointAction, ModelError> {
    if sigma_a.state != sigma_b.state {
        return Err(ModelError::StateMismatch {
            left: format!("#{}", sigma_a.state),
            right: format!("#{}", sigma_b.state),
        });
    }
    let mut assignment: BTreeMap<usize, usize> = sigma_b.assignments().collect();
    assignment.extend(sigma_a.assignments());
    Ok(JointAction {
        state: sigma_a.state,
        coalition: sigma_a.coalition.union(sigma_b.coalition),
        choices: assignment.into_values().collect(),
    })
}

/// A validated finite concurrent game model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameModel {
    agents: Vec<String>,
    states: Vec<String>,
    /// `actions[state][agent]`: names of the available actions.
    actions: Vec<Vec<Vec<String>>>,
    /// `outcomes[state][profile]`: successor state index.
    outcomes: Vec<Vec<usize>>,
    /// Atoms with a nonempty extension.
    valuation: BTreeMap<String, StateSet>,
}

impl GameModel {
    /// Builds a model from index tables. `actions[s][a]` lists the action
    /// names of agent `a` at state `s`; `outcomes[s]` is indexed by profile
    /// (see [`GameModel::encode_profile`]); `valuation` maps atoms to the
    /// states where they hold.
    pub fn from_tables(
        agents: Vec<String>,
        states: Vec<String>,
        actions: Vec<Vec<Vec<String>>>,
        outcomes: Vec<Vec<usize>>,
        valuation: BTreeMap<String, BTreeSet<usize>>,
    ) -> Result<Self, ModelError> {
        if agents.len() > MAX_AGENTS {
            return Err(ModelError::TooManyAgents(agents.len()));
        }
        let mut report = ValidationReport::default();
        if agents.is_empty() {
            report.violations.push(Violation::NoAgents);
        }
        if states.is_empty() {
            report.violations.push(Violation::NoStates);
        }
        raw::push_duplicates(&agents, &mut report, |agent| Violation::DuplicateAgent { agent });
        raw::push_duplicates(&states, &mut report, |state| Violation::DuplicateState { state });
        if actions.len() != states.len() || outcomes.len() != states.len() {
            report.violations.push(Violation::Shape(
                "action and outcome tables must have one entry per state".into(),
            ));
            return Err(ModelError::Invalid(report));
        }
        for (s, per_agent) in actions.iter().enumerate() {
            if per_agent.len() != agents.len() {
                report.violations.push(Violation::Shape(format!(
                    "state `{}` lists actions for {} agents, expected {}",
                    states[s],
                    per_agent.len(),
                    agents.len()
                )));
                continue;
            }
            for (a, acts) in per_agent.iter().enumerate() {
                if acts.is_empty() {
                    report.violations.push(Violation::EmptyActionSet {
                        state: states[s].clone(),
                        agent: agents[a].clone(),
                    });
                }
                raw::push_duplicates(acts, &mut report, |action| Violation::DuplicateAction {
                    state: states[s].clone(),
                    agent: agents[a].clone(),
                    action,
                });
            }
            let expected: usize = per_agent.iter().map(Vec::len).product();
            if outcomes[s].len() != expected {
                report.violations.push(Violation::Shape(format!(
                    "state `{}` has {} outcome entries, expected {}",
                    states[s],
                    outcomes[s].len(),
                    expected
                )));
            }
            if let Some(&bad) = outcomes[s].iter().find(|&&t| t >= states.len()) {
                report.violations.push(Violation::Shape(format!(
                    "state `{}` has an outcome to unknown state index {bad}",
                    states[s]
                )));
            }
        }
        let mut val = BTreeMap::new();
        for (atom, members) in valuation {
            let mut set = StateSet::with_capacity(states.len());
            for s in members {
                if s >= states.len() {
                    report.violations.push(Violation::Shape(format!(
                        "atom `{atom}` holds at unknown state index {s}"
                    )));
                } else {
                    set.insert(s);
                }
            }
            if !set.is_clear() {
                val.insert(atom, set);
            }
        }
        if !report.is_valid() {
            return Err(ModelError::Invalid(report));
        }
        Ok(GameModel {
            agents,
            states,
            actions,
            outcomes,
            valuation: val,
        })
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn state_name(&self, state: usize) -> &str {
        &self.states[state]
    }

    pub fn agent_name(&self, agent: usize) -> &str {
        &self.agents[agent]
    }

    pub fn state_index(&self, name: &str) -> Result<usize, ModelError> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| ModelError::UnknownState(name.to_string()))
    }

    pub fn agent_index(&self, name: &str) -> Result<usize, ModelError> {
        self.agents
            .iter()
            .position(|a| a == name)
            .ok_or_else(|| ModelError::UnknownAgent(name.to_string()))
    }

    /// Resolves agent names to a coalition.
    pub fn coalition<S: AsRef<str>>(&self, names: &[S]) -> Result<Coalition, ModelError> {
        let mut c = Coalition::EMPTY;
        for n in names {
            c = c.union(Coalition::singleton(self.agent_index(n.as_ref())?));
        }
        Ok(c)
    }

    pub fn grand_coalition(&self) -> Coalition {
        Coalition::full(self.agents.len())
    }

    pub fn coalition_names(&self, coalition: Coalition) -> Vec<String> {
        coalition
            .members()
            .map(|a| self.agents[a].clone())
            .collect()
    }

    pub fn actions(&self, state: usize, agent: usize) -> &[String] {
        &self.actions[state][agent]
    }

    pub fn action_count(&self, state: usize, agent: usize) -> usize {
        self.actions[state][agent].len()
    }

    pub fn profile_count(&self, state: usize) -> usize {
        self.outcomes[state].len()
    }

    pub fn outcomes(&self, state: usize) -> &[usize] {
        &self.outcomes[state]
    }

    /// Outcome of the full profile with index `profile` at `state`.
    pub fn outcome(&self, state: usize, profile: usize) -> usize {
        self.outcomes[state][profile]
    }

    /// Per-agent action indices of a profile index.
    pub fn decode_profile(&self, state: usize, mut profile: usize) -> Vec<usize> {
        let mut out = vec![0; self.agents.len()];
        for a in (0..self.agents.len()).rev() {
            let r = self.actions[state][a].len();
            out[a] = profile % r;
            profile /= r;
        }
        out
    }

    pub fn encode_profile(&self, state: usize, actions: &[usize]) -> usize {
        actions
            .iter()
            .enumerate()
            .fold(0, |acc, (a, &x)| acc * self.actions[state][a].len() + x)
    }

    pub fn empty_set(&self) -> StateSet {
        StateSet::with_capacity(self.states.len())
    }

    pub fn full_set(&self) -> StateSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    pub fn atoms(&self) -> impl Iterator<Item = &str> {
        self.valuation.keys().map(String::as_str)
    }

    /// States where `atom` holds; unknown atoms hold nowhere.
    pub fn atom_extension(&self, atom: &str) -> StateSet {
        self.valuation
            .get(atom)
            .cloned()
            .unwrap_or_else(|| self.empty_set())
    }

    /// Atoms true at `state`, sorted.
    pub fn labels(&self, state: usize) -> Vec<&str> {
        self.valuation
            .iter()
            .filter(|(_, set)| set.contains(state))
            .map(|(a, _)| a.as_str())
            .collect()
    }

    pub fn successors(&self, state: usize) -> StateSet {
        let mut set = self.empty_set();
        set.extend(self.outcomes[state].iter().copied());
        set
    }

    pub(crate) fn check_state(&self, state: usize) -> Result<(), ModelError> {
        if state < self.states.len() {
            Ok(())
        } else {
            Err(ModelError::StateOutOfRange(state))
        }
    }

    /// All joint actions of `coalition` at `state`: the product of the
    /// members' available actions, last member varying fastest.
    pub fn joint_actions(
        &self,
        coalition: Coalition,
        state: usize,
    ) -> Result<Vec<JointAction>, ModelError> {
        self.check_state(state)?;
        if let Some(bad) = coalition.members().find(|&a| a >= self.agents.len()) {
            return Err(ModelError::UnknownAgent(format!("#{bad}")));
        }
        let members: Vec<usize> = coalition.members().collect();
        let mut result = vec![JointAction {
            state,
            coalition,
            choices: Vec::new(),
        }];
        for &a in &members {
            let count = self.actions[state][a].len();
            result = result
                .into_iter()
                .flat_map(|ja| {
                    (0..count).map(move |x| {
                        let mut next = ja.clone();
                        next.choices.push(x);
                        next
                    })
                })
                .collect();
        }
        Ok(result)
    }

    /// `Out[state, sigma]`: outcomes of every full profile extending `sigma`.
    pub fn outcome_set(&self, state: usize, sigma: &JointAction) -> Result<StateSet, ModelError> {
        self.check_state(state)?;
        if sigma.state != state {
            return Err(ModelError::StateMismatch {
                left: self.states[state].clone(),
                right: self
                    .states
                    .get(sigma.state)
                    .cloned()
                    .unwrap_or_else(|| format!("#{}", sigma.state)),
            });
        }
        for (a, x) in sigma.assignments() {
            if a >= self.agents.len() || x >= self.actions[state][a].len() {
                return Err(ModelError::Unavailable {
                    state: self.states[state].clone(),
                });
            }
        }
        let mut out = self.empty_set();
        for profile in 0..self.profile_count(state) {
            let decoded = self.decode_profile(state, profile);
            if sigma.assignments().all(|(a, x)| decoded[a] == x) {
                out.insert(self.outcomes[state][profile]);
            }
        }
        Ok(out)
    }

    /// Places `self` and `other` side by side in one model, renaming states
    /// with the given prefixes. Both models must have the same agent list.
    pub fn disjoint_union(
        &self,
        left_prefix: &str,
        other: &GameModel,
        right_prefix: &str,
    ) -> Result<GameModel, ModelError> {
        if self.agents != other.agents {
            return Err(ModelError::AgentMismatch);
        }
        let offset = self.states.len();
        let states = self
            .states
            .iter()
            .map(|s| format!("{left_prefix}{s}"))
            .chain(other.states.iter().map(|s| format!("{right_prefix}{s}")))
            .collect();
        let actions = self
            .actions
            .iter()
            .chain(other.actions.iter())
            .cloned()
            .collect();
        let outcomes = self
            .outcomes
            .iter()
            .cloned()
            .chain(
                other
                    .outcomes
                    .iter()
                    .map(|row| row.iter().map(|t| t + offset).collect()),
            )
            .collect();
        let mut valuation: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        for (atom, set) in &self.valuation {
            valuation.entry(atom.clone()).or_default().extend(set.ones());
        }
        for (atom, set) in &other.valuation {
            valuation
                .entry(atom.clone())
                .or_default()
                .extend(set.ones().map(|s| s + offset));
        }
        GameModel::from_tables(self.agents.clone(), states, actions, outcomes, valuation)
    }

    /// Returns a copy with the outcomes of two profiles at `state` exchanged.
    pub fn with_swapped_outcomes(
        &self,
        state: usize,
        first: &[usize],
        second: &[usize],
    ) -> GameModel {
        let mut m = self.clone();
        let i = self.encode_profile(state, first);
        let j = self.encode_profile(state, second);
        m.outcomes[state].swap(i, j);
        m
    }

    pub fn format_set(&self, set: &StateSet) -> String {
        let names: Vec<&str> = set.ones().map(|s| self.states[s].as_str()).collect();
        format!("{{{}}}", names.join(", "))
    }
}

impl fmt::Display for GameModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_model(self))
    }
}
