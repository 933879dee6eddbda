//! Formulas with the conditional strategic operators.
//!
//! The core language has atoms, `true`, negation, conjunction and three
//! two-coalition operators:
//!
//! | token | operator | reading |
//! |-------|----------|---------|
//! | `Oc`  | O_c      | conditional cooperation |
//! | `Oa`  | O_α      | proactive ability |
//! | `Ob`  | O_β      | reactive ability |
//!
//! Everything else ([`Derived`]) is sugar with a single fixed desugaring.

mod parser;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

pub use parser::{parse_formula, FormulaError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum StrategicOp {
    /// `Oc`: some σ_A guarantees φ and lets B add σ_B guaranteeing ψ.
    Cooperation,
    /// `Oa`: one σ_B secures ψ against every φ-guaranteeing σ_A.
    Proactive,
    /// `Ob`: every φ-guaranteeing σ_A has some σ_B response securing ψ.
    Reactive,
}

impl StrategicOp {
    pub const ALL: [StrategicOp; 3] = [
        StrategicOp::Cooperation,
        StrategicOp::Proactive,
        StrategicOp::Reactive,
    ];

    pub fn token(self) -> &'static str {
        match self {
            StrategicOp::Cooperation => "Oc",
            StrategicOp::Proactive => "Oa",
            StrategicOp::Reactive => "Ob",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "Oc" => Some(StrategicOp::Cooperation),
            "Oa" => Some(StrategicOp::Proactive),
            "Ob" => Some(StrategicOp::Reactive),
            _ => None,
        }
    }
}

impl fmt::Display for StrategicOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// A set of agent names, resolved against a model only at evaluation time.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct AgentSet(pub BTreeSet<String>);

impl AgentSet {
    pub fn empty() -> Self {
        AgentSet::default()
    }

    pub fn of<S: AsRef<str>>(names: &[S]) -> Self {
        AgentSet(names.iter().map(|n| n.as_ref().to_string()).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl fmt::Display for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.iter().collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Top,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Strategic {
        op: StrategicOp,
        a: AgentSet,
        b: AgentSet,
        phi: Box<Formula>,
        psi: Box<Formula>,
    },
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(name.to_string())
    }

    pub fn bottom() -> Formula {
        Derived::Bottom.desugar()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Derived::Or(l, r).desugar()
    }

    pub fn implies(l: Formula, r: Formula) -> Formula {
        Derived::Implies(l, r).desugar()
    }

    pub fn iff(l: Formula, r: Formula) -> Formula {
        Derived::Iff(l, r).desugar()
    }

    pub fn strategic(op: StrategicOp, a: AgentSet, b: AgentSet, phi: Formula, psi: Formula) -> Formula {
        Formula::Strategic {
            op,
            a,
            b,
            phi: Box::new(phi),
            psi: Box::new(psi),
        }
    }

    pub fn oc(a: AgentSet, b: AgentSet, phi: Formula, psi: Formula) -> Formula {
        Formula::strategic(StrategicOp::Cooperation, a, b, phi, psi)
    }

    pub fn oa(a: AgentSet, b: AgentSet, phi: Formula, psi: Formula) -> Formula {
        Formula::strategic(StrategicOp::Proactive, a, b, phi, psi)
    }

    pub fn ob(a: AgentSet, b: AgentSet, phi: Formula, psi: Formula) -> Formula {
        Formula::strategic(StrategicOp::Reactive, a, b, phi, psi)
    }

    /// Conjunction of a list; `true` when empty.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::Top)
    }

    /// Disjunction of a list; `false` when empty.
    pub fn disjunction<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or_else(Formula::bottom)
    }

    /// Nesting depth of strategic operators.
    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top => 0,
            Formula::Not(f) => f.modal_depth(),
            Formula::And(l, r) => l.modal_depth().max(r.modal_depth()),
            Formula::Strategic { phi, psi, .. } => 1 + phi.modal_depth().max(psi.modal_depth()),
        }
    }

    /// Height of the syntax tree; atoms and `true` have height 0.
    pub fn height(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top => 0,
            Formula::Not(f) => 1 + f.height(),
            Formula::And(l, r) => 1 + l.height().max(r.height()),
            Formula::Strategic { phi, psi, .. } => 1 + phi.height().max(psi.height()),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top => 1,
            Formula::Not(f) => 1 + f.size(),
            Formula::And(l, r) => 1 + l.size() + r.size(),
            Formula::Strategic { phi, psi, .. } => 1 + phi.size() + psi.size(),
        }
    }

    /// Every agent name mentioned in a coalition.
    pub fn agents(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Strategic { a, b, .. } = f {
                out.extend(a.0.iter().cloned());
                out.extend(b.0.iter().cloned());
            }
        });
        out
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    fn visit<F: FnMut(&Formula)>(&self, f: &mut F) {
        f(self);
        match self {
            Formula::Atom(_) | Formula::Top => {}
            Formula::Not(g) => g.visit(f),
            Formula::And(l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Formula::Strategic { phi, psi, .. } => {
                phi.visit(f);
                psi.visit(f);
            }
        }
    }

    /// Canonical concrete syntax; `parse_formula(&f.render()) == Ok(f)`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out);
        out
    }

    fn render_into(&self, out: &mut String) {
        match self {
            Formula::Atom(p) => out.push_str(p),
            Formula::Top => out.push_str("true"),
            Formula::Not(f) => {
                out.push('~');
                f.render_operand(out);
            }
            Formula::And(l, r) => {
                if matches!(**l, Formula::And(..)) {
                    l.render_into(out);
                } else {
                    l.render_operand(out);
                }
                out.push_str(" & ");
                r.render_operand(out);
            }
            Formula::Strategic { op, a, b, phi, psi } => {
                out.push_str(&format!("{op}[{a},{b}]("));
                phi.render_into(out);
                out.push_str(", ");
                psi.render_into(out);
                out.push(')');
            }
        }
    }

    fn render_operand(&self, out: &mut String) {
        if matches!(self, Formula::And(..)) {
            out.push('(');
            self.render_into(out);
            out.push(')');
        } else {
            self.render_into(out);
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Definable operators. Each has exactly one desugaring into the core.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Derived {
    Or(Formula, Formula),
    Implies(Formula, Formula),
    Iff(Formula, Formula),
    Bottom,
    /// `[A]φ`, the Coalition Logic modality.
    CoalitionBox(AgentSet, Formula),
    /// `⟨⟨A⟩⟩^b(φ;ψ)`
    ConditionalBox(AgentSet, Formula, Formula),
    /// `⟨⟨A⟩⟩^d(φ;ψ)`
    ConditionalDiamond(AgentSet, Formula, Formula),
}

impl Derived {
    pub fn desugar(self) -> Formula {
        use Formula as F;
        match self {
            Derived::Or(l, r) => F::not(F::and(F::not(l), F::not(r))),
            Derived::Implies(l, r) => F::not(F::and(l, F::not(r))),
            Derived::Iff(l, r) => F::and(
                Derived::Implies(l.clone(), r.clone()).desugar(),
                Derived::Implies(r, l).desugar(),
            ),
            Derived::Bottom => F::not(F::Top),
            Derived::CoalitionBox(a, phi) => F::oa(AgentSet::empty(), a, F::Top, phi),
            Derived::ConditionalBox(a, phi, psi) => F::ob(a, AgentSet::empty(), phi, psi),
            Derived::ConditionalDiamond(a, phi, psi) => F::not(
                Derived::ConditionalBox(a, phi, F::not(psi)).desugar(),
            ),
        }
    }
}

/// Alternative definitions of `[A]φ` listed alongside the canonical one.
/// `agents` is the full agent list of the model the formula will be
/// evaluated on, needed for the complement-based variant.
pub fn coalition_box_variants(a: &AgentSet, phi: &Formula, agents: &[String]) -> Vec<(&'static str, Formula)> {
    use Formula as F;
    let complement = AgentSet(
        agents
            .iter()
            .filter(|x| !a.0.contains(*x))
            .cloned()
            .collect(),
    );
    vec![
        ("Oc(A,A,phi,phi)", F::oc(a.clone(), a.clone(), phi.clone(), phi.clone())),
        ("Oc(A,A,phi,true)", F::oc(a.clone(), a.clone(), phi.clone(), F::Top)),
        ("Oa({},A,true,phi)", F::oa(AgentSet::empty(), a.clone(), F::Top, phi.clone())),
        ("Ob({},A,true,phi)", F::ob(AgentSet::empty(), a.clone(), F::Top, phi.clone())),
        ("Ob(Agt\\A,A,true,phi)", F::ob(complement, a.clone(), F::Top, phi.clone())),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::atom("p")
    }

    fn q() -> Formula {
        Formula::atom("q")
    }

    #[test]
    fn renders_core_syntax() {
        let f = Formula::oc(AgentSet::of(&["a"]), AgentSet::of(&["b"]), p(), q());
        assert_eq!(f.render(), "Oc[{a},{b}](p, q)");
        assert_eq!(Formula::not(Formula::not(p())).render(), "~~p");
        assert_eq!(Formula::bottom().render(), "~true");
        let boxed = Derived::CoalitionBox(AgentSet::of(&["b"]), q()).desugar();
        assert_eq!(boxed.render(), "Oa[{},{b}](true, q)");
    }

    #[test]
    fn right_nested_conjunction_keeps_parentheses() {
        let f = Formula::and(p(), Formula::and(q(), p()));
        assert_eq!(f.render(), "p & (q & p)");
        let g = Formula::and(Formula::and(p(), q()), p());
        assert_eq!(g.render(), "p & q & p");
        assert_eq!(Formula::not(g).render(), "~(p & q & p)");
    }

    #[test]
    fn conditional_diamond_desugaring() {
        let a = AgentSet::of(&["a"]);
        let d = Derived::ConditionalDiamond(a.clone(), p(), q()).desugar();
        assert_eq!(
            d,
            Formula::not(Formula::ob(a, AgentSet::empty(), p(), Formula::not(q())))
        );
    }

    #[test]
    fn measures() {
        let f = Formula::oa(
            AgentSet::empty(),
            AgentSet::of(&["a", "b"]),
            Formula::Top,
            Formula::ob(AgentSet::of(&["c"]), AgentSet::empty(), p(), Formula::not(q())),
        );
        assert_eq!(f.modal_depth(), 2);
        assert_eq!(f.height(), 3);
        assert_eq!(f.size(), 6);
        assert_eq!(f.agents().len(), 3);
        assert_eq!(f.atoms().len(), 2);
    }

    #[test]
    fn box_variants_use_the_complement() {
        let vars = coalition_box_variants(&AgentSet::of(&["b"]), &q(), &["a".into(), "b".into()]);
        assert_eq!(vars.len(), 5);
        assert_eq!(vars[4].1.render(), "Ob[{a},{b}](true, q)");
    }
}
