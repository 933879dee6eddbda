//! Unvalidated model structure and invariant checking.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use super::{GameModel, ModelError, MAX_AGENTS};

/// One `actions <state> <agent>: ...` declaration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionDecl {
    pub state: String,
    pub agent: String,
    pub actions: Vec<String>,
    pub line: Option<usize>,
}

/// One `go <state> (<profile>) -> <target>` line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub state: String,
    pub profile: Vec<String>,
    pub target: String,
    pub line: Option<usize>,
}

/// Model structure exactly as written, names unresolved.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawModel {
    pub agents: Vec<String>,
    pub states: Vec<String>,
    /// `(state, atoms, line)` per `labels` line.
    pub labels: Vec<(String, Vec<String>, Option<usize>)>,
    pub actions: Vec<ActionDecl>,
    pub transitions: Vec<Transition>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NoAgents,
    NoStates,
    TooManyAgents { count: usize },
    DuplicateAgent { agent: String },
    DuplicateState { state: String },
    UnknownState { state: String, line: Option<usize> },
    UnknownAgent { agent: String, line: Option<usize> },
    MissingActions { state: String, agent: String },
    RepeatedActionsLine { state: String, agent: String, line: Option<usize> },
    EmptyActionSet { state: String, agent: String },
    DuplicateAction { state: String, agent: String, action: String },
    ProfileArity { state: String, profile: Vec<String>, expected: usize, line: Option<usize> },
    ProfileOutsideAvailability { state: String, profile: Vec<String>, line: Option<usize> },
    RepeatedOutcome { state: String, profile: Vec<String>, line: Option<usize> },
    UnknownTarget { state: String, profile: Vec<String>, target: String, line: Option<usize> },
    OutcomeNotTotal { state: String, profile: Vec<String> },
    Shape(String),
}

fn at(line: &Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

fn tuple(profile: &[String]) -> String {
    format!("({})", profile.join(","))
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoAgents => write!(f, "no agents declared"),
            Violation::NoStates => write!(f, "no states declared"),
            Violation::TooManyAgents { count } => {
                write!(f, "{count} agents declared, at most {MAX_AGENTS} supported")
            }
            Violation::DuplicateAgent { agent } => write!(f, "duplicate agent `{agent}`"),
            Violation::DuplicateState { state } => write!(f, "duplicate state `{state}`"),
            Violation::UnknownState { state, line } => {
                write!(f, "unknown state `{state}`{}", at(line))
            }
            Violation::UnknownAgent { agent, line } => {
                write!(f, "unknown agent `{agent}`{}", at(line))
            }
            Violation::MissingActions { state, agent } => {
                write!(f, "empty action set for agent `{agent}` at state `{state}`: no actions line")
            }
            Violation::RepeatedActionsLine { state, agent, line } => write!(
                f,
                "actions for agent `{agent}` at state `{state}` declared twice{}",
                at(line)
            ),
            Violation::EmptyActionSet { state, agent } => {
                write!(f, "empty action set for agent `{agent}` at state `{state}`")
            }
            Violation::DuplicateAction { state, agent, action } => write!(
                f,
                "action `{action}` listed twice for agent `{agent}` at state `{state}`"
            ),
            Violation::ProfileArity { state, profile, expected, line } => write!(
                f,
                "profile {} at state `{state}` has {} actions, expected {expected}{}",
                tuple(profile),
                profile.len(),
                at(line)
            ),
            Violation::ProfileOutsideAvailability { state, profile, line } => write!(
                f,
                "profile {} is not available at state `{state}`{}",
                tuple(profile),
                at(line)
            ),
            Violation::RepeatedOutcome { state, profile, line } => write!(
                f,
                "outcome of {} at state `{state}` given twice{}",
                tuple(profile),
                at(line)
            ),
            Violation::UnknownTarget { state, profile, target, line } => write!(
                f,
                "outcome of {} at state `{state}` is unknown state `{target}`{}",
                tuple(profile),
                at(line)
            ),
            Violation::OutcomeNotTotal { state, profile } => write!(
                f,
                "outcome not total at state `{state}`: no outcome for {}",
                tuple(profile)
            ),
            Violation::Shape(msg) => f.write_str(msg),
        }
    }
}

/// Every invariant violation found in a model; empty means valid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {v}")?;
        }
        Ok(())
    }
}

pub(crate) fn push_duplicates<F>(names: &[String], report: &mut ValidationReport, make: F)
where
    F: Fn(String) -> Violation,
{
    let mut seen = HashSet::new();
    let mut reported = HashSet::new();
    for n in names {
        if !seen.insert(n) && reported.insert(n) {
            report.violations.push(make(n.clone()));
        }
    }
}

/// Checks a raw model against every structural invariant and lists all
/// violations. Never fails: an invalid model yields a nonempty report.
pub fn validate_model(raw: &RawModel) -> ValidationReport {
    analyse(raw).0
}

struct Resolved {
    actions: Vec<Vec<Vec<String>>>,
    outcomes: Vec<Vec<usize>>,
    valuation: BTreeMap<String, BTreeSet<usize>>,
}

fn analyse(raw: &RawModel) -> (ValidationReport, Option<Resolved>) {
    let mut report = ValidationReport::default();
    let v = &mut report.violations;
    if raw.agents.is_empty() {
        v.push(Violation::NoAgents);
    }
    if raw.agents.len() > MAX_AGENTS {
        v.push(Violation::TooManyAgents { count: raw.agents.len() });
    }
    if raw.states.is_empty() {
        v.push(Violation::NoStates);
    }
    push_duplicates(&raw.agents, &mut report, |agent| Violation::DuplicateAgent { agent });
    push_duplicates(&raw.states, &mut report, |state| Violation::DuplicateState { state });
    let v = &mut report.violations;

    let state_ix: BTreeMap<&str, usize> = raw
        .states
        .iter()
        .enumerate()
        .rev()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let agent_ix: BTreeMap<&str, usize> = raw
        .agents
        .iter()
        .enumerate()
        .rev()
        .map(|(i, a)| (a.as_str(), i))
        .collect();
    let n_states = raw.states.len();
    let n_agents = raw.agents.len();

    let mut valuation: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    for (state, atoms, line) in &raw.labels {
        match state_ix.get(state.as_str()) {
            Some(&s) => {
                for atom in atoms {
                    valuation.entry(atom.clone()).or_default().insert(s);
                }
            }
            None => v.push(Violation::UnknownState { state: state.clone(), line: *line }),
        }
    }

    let mut actions: Vec<Vec<Option<Vec<String>>>> = vec![vec![None; n_agents]; n_states];
    for decl in &raw.actions {
        let s = state_ix.get(decl.state.as_str()).copied();
        let a = agent_ix.get(decl.agent.as_str()).copied();
        if s.is_none() {
            v.push(Violation::UnknownState { state: decl.state.clone(), line: decl.line });
        }
        if a.is_none() {
            v.push(Violation::UnknownAgent { agent: decl.agent.clone(), line: decl.line });
        }
        let (Some(s), Some(a)) = (s, a) else { continue };
        if actions[s][a].is_some() {
            v.push(Violation::RepeatedActionsLine {
                state: decl.state.clone(),
                agent: decl.agent.clone(),
                line: decl.line,
            });
            continue;
        }
        if decl.actions.is_empty() {
            v.push(Violation::EmptyActionSet {
                state: decl.state.clone(),
                agent: decl.agent.clone(),
            });
        }
        let mut seen = HashSet::new();
        for act in &decl.actions {
            if !seen.insert(act) {
                v.push(Violation::DuplicateAction {
                    state: decl.state.clone(),
                    agent: decl.agent.clone(),
                    action: act.clone(),
                });
            }
        }
        actions[s][a] = Some(decl.actions.clone());
    }
    for (s, per_agent) in actions.iter().enumerate() {
        for (a, acts) in per_agent.iter().enumerate() {
            if acts.is_none() {
                v.push(Violation::MissingActions {
                    state: raw.states[s].clone(),
                    agent: raw.agents[a].clone(),
                });
            }
        }
    }

    // profile index -> target, per state
    let mut outcomes: Vec<Vec<Option<usize>>> = actions
        .iter()
        .map(|per_agent| {
            let size = per_agent
                .iter()
                .map(|a| a.as_ref().map_or(0, Vec::len))
                .product::<usize>();
            vec![None; size]
        })
        .collect();
    for tr in &raw.transitions {
        let Some(&s) = state_ix.get(tr.state.as_str()) else {
            v.push(Violation::UnknownState { state: tr.state.clone(), line: tr.line });
            continue;
        };
        if tr.profile.len() != n_agents {
            v.push(Violation::ProfileArity {
                state: tr.state.clone(),
                profile: tr.profile.clone(),
                expected: n_agents,
                line: tr.line,
            });
            continue;
        }
        let mut index = Some(0usize);
        for (a, act) in tr.profile.iter().enumerate() {
            index = match (&actions[s][a], index) {
                (Some(avail), Some(ix)) => avail
                    .iter()
                    .position(|x| x == act)
                    .map(|pos| ix * avail.len() + pos),
                _ => None,
            };
        }
        let Some(index) = index else {
            v.push(Violation::ProfileOutsideAvailability {
                state: tr.state.clone(),
                profile: tr.profile.clone(),
                line: tr.line,
            });
            continue;
        };
        let Some(&target) = state_ix.get(tr.target.as_str()) else {
            v.push(Violation::UnknownTarget {
                state: tr.state.clone(),
                profile: tr.profile.clone(),
                target: tr.target.clone(),
                line: tr.line,
            });
            // the entry exists, so totality is not reported again; the
            // placeholder is never built because the report is non-empty
            outcomes[s][index].get_or_insert(usize::MAX);
            continue;
        };
        if outcomes[s][index].is_some() {
            v.push(Violation::RepeatedOutcome {
                state: tr.state.clone(),
                profile: tr.profile.clone(),
                line: tr.line,
            });
        } else {
            outcomes[s][index] = Some(target);
        }
    }
    for (s, row) in outcomes.iter().enumerate() {
        for (ix, entry) in row.iter().enumerate() {
            if entry.is_none() {
                let mut rest = ix;
                let mut profile = vec![String::new(); n_agents];
                for a in (0..n_agents).rev() {
                    let avail = actions[s][a].as_ref().expect("nonempty row implies declared");
                    profile[a] = avail[rest % avail.len()].clone();
                    rest /= avail.len();
                }
                v.push(Violation::OutcomeNotTotal {
                    state: raw.states[s].clone(),
                    profile,
                });
            }
        }
    }

    if !report.is_valid() {
        return (report, None);
    }
    let resolved = Resolved {
        actions: actions
            .into_iter()
            .map(|row| row.into_iter().map(Option::unwrap).collect())
            .collect(),
        outcomes: outcomes
            .into_iter()
            .map(|row| row.into_iter().map(Option::unwrap).collect())
            .collect(),
        valuation,
    };
    (report, Some(resolved))
}

impl RawModel {
    /// Validates and converts to a [`GameModel`].
    pub fn build(&self) -> Result<GameModel, ModelError> {
        match analyse(self) {
            (_, Some(r)) => GameModel::from_tables(
                self.agents.clone(),
                self.states.clone(),
                r.actions,
                r.outcomes,
                r.valuation,
            ),
            (report, None) => Err(ModelError::Invalid(report)),
        }
    }
}

impl From<&GameModel> for RawModel {
    fn from(m: &GameModel) -> Self {
        let mut raw = RawModel {
            agents: m.agents().to_vec(),
            states: m.states().to_vec(),
            ..RawModel::default()
        };
        for s in 0..m.state_count() {
            let labels: Vec<String> = m.labels(s).into_iter().map(str::to_string).collect();
            if !labels.is_empty() {
                raw.labels.push((m.state_name(s).to_string(), labels, None));
            }
            for a in 0..m.agent_count() {
                raw.actions.push(ActionDecl {
                    state: m.state_name(s).to_string(),
                    agent: m.agent_name(a).to_string(),
                    actions: m.actions(s, a).to_vec(),
                    line: None,
                });
            }
            for p in 0..m.profile_count(s) {
                let profile = m
                    .decode_profile(s, p)
                    .iter()
                    .enumerate()
                    .map(|(a, &x)| m.actions(s, a)[x].clone())
                    .collect();
                raw.transitions.push(Transition {
                    state: m.state_name(s).to_string(),
                    profile,
                    target: m.state_name(m.outcome(s, p)).to_string(),
                    line: None,
                });
            }
        }
        raw
    }
}
