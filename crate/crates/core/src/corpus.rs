//! Reference models with their expected verdicts.
//!
//! Models live in `fixtures/` in the public `.cgm` format; the two-model
//! examples are stored pre-merged as one model with `s*` and `t*` states
//! plus an `s ~ t` relation file.

use serde::Serialize;

use crate::bisim::{check_cl_bisim, check_constr_bisim, check_families, Family, StateRelation};
use crate::formula::parse_formula;
use crate::model::{parse_model, GameModel, ParseError};
use crate::semantics::Evaluator;

/// Exchange the outcomes of two full profiles (given by action names).
#[derive(Clone, Copy, Debug)]
pub struct Swap {
    pub state: &'static str,
    pub first: &'static [&'static str],
    pub second: &'static [&'static str],
}

#[derive(Clone, Copy, Debug)]
pub struct Check {
    pub state: &'static str,
    pub formula: &'static str,
    pub expected: bool,
    /// Evaluate on the model with this swap applied.
    pub swap: Option<Swap>,
    pub note: &'static str,
}

#[derive(Clone, Copy, Debug)]
pub struct RelationExpectation {
    pub cl: bool,
    pub constr: bool,
    /// A family that must fail on its own.
    pub failing_family: Option<Family>,
    pub note: &'static str,
}

#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub source: &'static str,
    pub relation: Option<&'static str>,
    pub note: &'static str,
    pub checks: &'static [Check],
    pub expectation: Option<RelationExpectation>,
}

impl Fixture {
    /// Fixtures are checked in by hand and parsed in tests, so a failure
    /// here is a bug in the fixture.
    pub fn model(&self) -> GameModel {
        parse_model(self.source).unwrap_or_else(|e| panic!("fixture {}: {e}", self.name))
    }

    pub fn relation(&self, model: &GameModel) -> Option<StateRelation> {
        self.relation.map(|text| {
            StateRelation::parse(model, text).unwrap_or_else(|e| panic!("fixture {}: {e}", self.name))
        })
    }
}

const fn check(state: &'static str, formula: &'static str, expected: bool, note: &'static str) -> Check {
    Check {
        state,
        formula,
        expected,
        swap: None,
        note,
    }
}

const SPLIT: &str = "same CL powers at s0 and t0; the operator formula tells them apart";

static FIXTURES: [Fixture; 6] = [
    Fixture {
        name: "cooperation",
        source: include_str!("../fixtures/cooperation.cgm"),
        relation: None,
        note: "a can force p while leaving b able to force q, yet b alone cannot force q",
        checks: &[
            check("s0", "Oc[{a},{b}](p, q)", true, "a1 keeps p and lets b pick b2 for q"),
            check("s0", "[{b}] q", false, "each action of b leaves a p-only outcome open"),
        ],
        expectation: None,
    },
    Fixture {
        name: "proactive_vs_reactive",
        source: include_str!("../fixtures/proactive_vs_reactive.cgm"),
        relation: None,
        note: "b can respond to each p-forcing action of a but has no single answer",
        checks: &[
            check("s0", "Ob[{a},{b}](p, q)", true, "b answers a1 with b2 and a2 with b1"),
            check("s0", "Oa[{a},{b}](p, q)", false, "no one action of b works against both a1 and a2"),
            Check {
                state: "s0",
                formula: "Oa[{a},{b}](p, q)",
                expected: true,
                swap: Some(Swap {
                    state: "s0",
                    first: &["a2", "b1"],
                    second: &["a2", "b2"],
                }),
                note: "after swapping the outcomes of (a2,b1) and (a2,b2), b2 works for both",
            },
        ],
        expectation: None,
    },
    Fixture {
        name: "oc_not_cl",
        source: include_str!("../fixtures/oc_not_cl.cgm"),
        relation: Some(include_str!("../fixtures/oc_not_cl.rel")),
        note: SPLIT,
        checks: &[
            check("s0", "Oc[{a},{b}](p, q)", true, "a3 forces p and b2 then forces q"),
            check("t0", "Oc[{a},{b}](p, q)", false, "no p-forcing action of a exists at t0"),
        ],
        expectation: Some(RelationExpectation {
            cl: true,
            constr: false,
            failing_family: Some(Family::Cooperation),
            note: "the Oc family fails at (s0, t0)",
        }),
    },
    Fixture {
        name: "conditional_box_not_cl",
        source: include_str!("../fixtures/conditional_box_not_cl.cgm"),
        relation: Some(include_str!("../fixtures/conditional_box_not_cl.rel")),
        note: SPLIT,
        checks: &[
            check("s0", "Cb[{a}](p, q)", true, "a1 is the only p-forcing action and it also forces q"),
            check("t0", "Cb[{a}](p, q)", false, "a2 forces p at t0 without forcing q"),
        ],
        expectation: Some(RelationExpectation {
            cl: true,
            constr: false,
            failing_family: Some(Family::Reactive),
            note: "the Ob family fails at (s0, t0)",
        }),
    },
    Fixture {
        name: "alpha_not_cl",
        source: include_str!("../fixtures/alpha_not_cl.cgm"),
        relation: Some(include_str!("../fixtures/alpha_not_cl.rel")),
        note: SPLIT,
        checks: &[
            check("s0", "Oa[{b},{a}](q, p)", true, "a has one action securing p whenever b forces q"),
            check("t0", "Oa[{b},{a}](q, p)", false, "at t0 every action of a is defeated by some q-forcing b"),
        ],
        expectation: Some(RelationExpectation {
            cl: true,
            constr: false,
            failing_family: Some(Family::Proactive),
            note: "the Oa family fails at (s0, t0)",
        }),
    },
    Fixture {
        name: "beta_anti_monotonicity",
        source: include_str!("../fixtures/beta_anti_monotonicity.cgm"),
        relation: None,
        note: "Ob is not anti-monotone in its first coalition",
        checks: &[
            check("s0", "Ob[{a,c},{b}](p, q)", true, "b answers c1 with b1 and c2 with b2"),
            check("s0", "Ob[{a},{b}](p, q)", false, "a alone forces p but b cannot then force q"),
        ],
        expectation: None,
    },
];

pub fn fixtures() -> &'static [Fixture] {
    &FIXTURES
}

pub fn fixture(name: &str) -> Option<&'static Fixture> {
    FIXTURES.iter().find(|f| f.name == name)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckOutcome {
    pub fixture: String,
    pub description: String,
    pub expected: bool,
    /// `Err` carries an evaluation or input error. Serialized as the bare
    /// boolean, or as `{"error": ...}`.
    #[serde(serialize_with = "actual_json")]
    pub actual: Result<bool, String>,
    pub passed: bool,
}

fn actual_json<S: serde::Serializer>(actual: &Result<bool, String>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    match actual {
        Ok(b) => s.serialize_bool(*b),
        Err(e) => {
            let mut map = s.serialize_map(Some(1))?;
            map.serialize_entry("error", e)?;
            map.end()
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CorpusReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl CorpusReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.outcomes.iter().filter(|o| !o.passed)
    }
}

fn apply_swap(model: &GameModel, swap: &Swap) -> Result<GameModel, String> {
    let state = model.state_index(swap.state).map_err(|e| e.to_string())?;
    let indices = |names: &[&str]| -> Result<Vec<usize>, String> {
        if names.len() != model.agent_count() {
            return Err(format!("swap profile {names:?} has the wrong arity"));
        }
        names
            .iter()
            .enumerate()
            .map(|(agent, name)| {
                model
                    .actions(state, agent)
                    .iter()
                    .position(|a| a == name)
                    .ok_or_else(|| format!("unknown action `{name}` at {}", swap.state))
            })
            .collect()
    };
    Ok(model.with_swapped_outcomes(state, &indices(swap.first)?, &indices(swap.second)?))
}

fn evaluate(model: &GameModel, c: &Check) -> Result<bool, String> {
    let swapped;
    let model = match &c.swap {
        Some(swap) => {
            swapped = apply_swap(model, swap)?;
            &swapped
        }
        None => model,
    };
    let f = parse_formula(c.formula).map_err(|e| e.to_string())?;
    let s = model.state_index(c.state).map_err(|e| e.to_string())?;
    Evaluator::new(model).holds_at(s, &f).map_err(|e| e.to_string())
}

fn outcome(fixture: &Fixture, description: String, expected: bool, actual: Result<bool, String>) -> CheckOutcome {
    let passed = actual.as_ref() == Ok(&expected);
    CheckOutcome {
        fixture: fixture.name.to_string(),
        description,
        expected,
        actual,
        passed,
    }
}

/// Runs one fixture: validity, every formula check, and the relation
/// verdicts.
pub fn run_fixture(fixture: &Fixture) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let model = match parse_model(fixture.source) {
        Ok(m) => m,
        Err(e) => {
            out.push(outcome(fixture, "model is valid".into(), true, Err(e.to_string())));
            return out;
        }
    };
    out.push(outcome(fixture, "model is valid".into(), true, Ok(true)));
    for c in fixture.checks {
        let mut description = format!("{} at {}", c.formula, c.state);
        if c.swap.is_some() {
            description.push_str(" (swapped)");
        }
        out.push(outcome(fixture, description, c.expected, evaluate(&model, c)));
    }
    if let (Some(text), Some(exp)) = (fixture.relation, fixture.expectation) {
        let rel = match StateRelation::parse(&model, text) {
            Ok(r) => r,
            Err(e) => {
                let e: ParseError = e;
                out.push(outcome(fixture, "relation parses".into(), true, Err(e.to_string())));
                return out;
            }
        };
        out.push(outcome(fixture, "relation is a CL-bisimulation".into(), exp.cl, Ok(check_cl_bisim(&model, &rel).ok)));
        out.push(outcome(
            fixture,
            "relation is a ConStR-bisimulation".into(),
            exp.constr,
            Ok(check_constr_bisim(&model, &rel).ok),
        ));
        if let Some(family) = exp.failing_family {
            out.push(outcome(
                fixture,
                format!("{family:?} family fails"),
                false,
                Ok(check_families(&model, &rel, &[family]).ok),
            ));
        }
    }
    out
}

pub fn run_corpus() -> CorpusReport {
    CorpusReport {
        outcomes: FIXTURES.iter().flat_map(run_fixture).collect(),
    }
}
