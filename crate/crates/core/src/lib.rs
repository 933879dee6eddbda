//! Conditional strategic reasoning over concurrent game models.
//!
//! The crate is organised around five engines:
//!
//! * [`model`]: finite concurrent game models, coalitions, joint actions and
//!   outcome sets, plus the line-oriented `.cgm` text format.
//! * [`formula`]: the formula language with the three two-coalition
//!   operators `Oc`, `Oa` and `Ob`, its concrete syntax and derived forms.
//! * [`semantics`]: bottom-up model checking (extensions of formulas).
//! * [`bisim`]: CL- and ConStR-bisimulation checking, greatest
//!   bisimulations, and distinguishing-formula synthesis.
//! * [`validity`]: model generators and the axiom-scheme test suite.
//!
//! [`corpus`] bundles the reference models with their expected verdicts.

pub mod bisim;
pub mod corpus;
pub mod formula;
pub mod model;
pub mod semantics;
pub mod validity;

pub use bisim::{BisimVerdict, ClauseTag, StateRelation};
pub use formula::{parse_formula, AgentSet, Formula, StrategicOp};
pub use model::{
    merge, parse_model, render_model, validate_model, Coalition, GameModel, JointAction,
    ModelError, RawModel, StateSet,
};
pub use semantics::{extension, holds, holds_via_b_minus_a, EvalError, Evaluator, Extension};
