//! Axiom-scheme templates and their evaluation on bitmasks.

use std::collections::HashMap;

use serde::Serialize;

use crate::formula::{AgentSet, Formula, StrategicOp};
use crate::model::{Coalition, GameModel};
use crate::semantics::outcome_table;

/// A coalition expression over the metavariables A, B, C.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CExpr {
    Var(usize),
    Empty,
    Union(Box<CExpr>, Box<CExpr>),
    Minus(Box<CExpr>, Box<CExpr>),
}

impl CExpr {
    fn eval(&self, env: &[Coalition]) -> Coalition {
        match self {
            CExpr::Var(i) => env[*i],
            CExpr::Empty => Coalition::EMPTY,
            CExpr::Union(l, r) => l.eval(env).union(r.eval(env)),
            CExpr::Minus(l, r) => l.eval(env).difference(r.eval(env)),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            CExpr::Var(i) => Some(*i),
            CExpr::Empty => None,
            CExpr::Union(l, r) | CExpr::Minus(l, r) => l.max_var().max(r.max_var()),
        }
    }
}

/// A formula template; `Meta(i)` is a formula metavariable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Template {
    Meta(usize),
    Top,
    Bottom,
    Not(Box<Template>),
    And(Box<Template>, Box<Template>),
    Implies(Box<Template>, Box<Template>),
    Iff(Box<Template>, Box<Template>),
    Op(StrategicOp, CExpr, CExpr, Box<Template>, Box<Template>),
}

impl Template {
    fn max_meta(&self) -> Option<usize> {
        match self {
            Template::Meta(i) => Some(*i),
            Template::Top | Template::Bottom => None,
            Template::Not(f) => f.max_meta(),
            Template::And(l, r) | Template::Implies(l, r) | Template::Iff(l, r) => l.max_meta().max(r.max_meta()),
            Template::Op(_, _, _, l, r) => l.max_meta().max(r.max_meta()),
        }
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Template::Meta(_) | Template::Top | Template::Bottom => None,
            Template::Not(f) => f.max_var(),
            Template::And(l, r) | Template::Implies(l, r) | Template::Iff(l, r) => l.max_var().max(r.max_var()),
            Template::Op(_, a, b, l, r) => a.max_var().max(b.max_var()).max(l.max_var()).max(r.max_var()),
        }
    }

    /// The concrete coalition pairs of every operator occurrence.
    fn coalitions(&self, env: &[Coalition], out: &mut Vec<(Coalition, Coalition)>) {
        match self {
            Template::Meta(_) | Template::Top | Template::Bottom => {}
            Template::Not(f) => f.coalitions(env, out),
            Template::And(l, r) | Template::Implies(l, r) | Template::Iff(l, r) => {
                l.coalitions(env, out);
                r.coalitions(env, out);
            }
            Template::Op(_, a, b, l, r) => {
                out.push((a.eval(env), b.eval(env)));
                l.coalitions(env, out);
                r.coalitions(env, out);
            }
        }
    }

    pub fn instantiate(&self, model: &GameModel, metas: &[Formula], env: &[Coalition]) -> Formula {
        let names = |c: &CExpr| AgentSet::of(&model.coalition_names(c.eval(env)));
        match self {
            Template::Meta(i) => metas[*i].clone(),
            Template::Top => Formula::Top,
            Template::Bottom => Formula::bottom(),
            Template::Not(f) => Formula::not(f.instantiate(model, metas, env)),
            Template::And(l, r) => Formula::and(l.instantiate(model, metas, env), r.instantiate(model, metas, env)),
            Template::Implies(l, r) => Formula::implies(l.instantiate(model, metas, env), r.instantiate(model, metas, env)),
            Template::Iff(l, r) => Formula::iff(l.instantiate(model, metas, env), r.instantiate(model, metas, env)),
            Template::Op(op, a, b, l, r) => Formula::strategic(
                *op,
                names(a),
                names(b),
                l.instantiate(model, metas, env),
                r.instantiate(model, metas, env),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    Axiom(Template),
    /// Model-global rule: if every premise holds at every state, so does
    /// the conclusion.
    Rule { premises: Vec<Template>, conclusion: Template },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scheme {
    pub id: &'static str,
    pub description: &'static str,
    pub kind: SchemeKind,
    pub expected_valid: bool,
}

impl Scheme {
    pub fn meta_count(&self) -> usize {
        let m = match &self.kind {
            SchemeKind::Axiom(t) => t.max_meta(),
            SchemeKind::Rule { premises, conclusion } => premises.iter().map(Template::max_meta).fold(conclusion.max_meta(), Option::max),
        };
        m.map_or(0, |i| i + 1)
    }

    pub fn coalition_var_count(&self) -> usize {
        let m = match &self.kind {
            SchemeKind::Axiom(t) => t.max_var(),
            SchemeKind::Rule { conclusion, .. } => conclusion.max_var(),
        };
        m.map_or(0, |i| i + 1)
    }

    fn body(&self) -> &Template {
        match &self.kind {
            SchemeKind::Axiom(t) => t,
            SchemeKind::Rule { conclusion, .. } => conclusion,
        }
    }

    /// Coalition assignments to try, deduplicated by the concrete
    /// coalitions they put into operators.
    pub(crate) fn environments(&self, agents: usize) -> Vec<Vec<Coalition>> {
        let vars = self.coalition_var_count();
        let all: Vec<Coalition> = Coalition::full(agents).subsets().collect();
        let mut envs: Vec<Vec<Coalition>> = vec![Vec::new()];
        for _ in 0..vars {
            envs = envs
                .into_iter()
                .flat_map(|e| {
                    all.iter().map(move |&c| {
                        let mut next = e.clone();
                        next.push(c);
                        next
                    })
                })
                .collect();
        }
        let mut seen = std::collections::HashSet::new();
        envs.retain(|env| {
            let mut key = Vec::new();
            self.body().coalitions(env, &mut key);
            seen.insert(key)
        });
        envs
    }
}

// template builders
pub(crate) fn var(i: usize) -> CExpr {
    CExpr::Var(i)
}
pub(crate) fn union(l: CExpr, r: CExpr) -> CExpr {
    CExpr::Union(Box::new(l), Box::new(r))
}
pub(crate) fn minus(l: CExpr, r: CExpr) -> CExpr {
    CExpr::Minus(Box::new(l), Box::new(r))
}
pub(crate) fn meta(i: usize) -> Template {
    Template::Meta(i)
}
pub(crate) fn not(f: Template) -> Template {
    Template::Not(Box::new(f))
}
pub(crate) fn and(l: Template, r: Template) -> Template {
    Template::And(Box::new(l), Box::new(r))
}
pub(crate) fn implies(l: Template, r: Template) -> Template {
    Template::Implies(Box::new(l), Box::new(r))
}
pub(crate) fn iff(l: Template, r: Template) -> Template {
    Template::Iff(Box::new(l), Box::new(r))
}
pub(crate) fn op(o: StrategicOp, a: CExpr, b: CExpr, phi: Template, psi: Template) -> Template {
    Template::Op(o, a, b, Box::new(phi), Box::new(psi))
}

/// Per-model evaluation context: outcome tables as bitmasks and a memo of
/// operator extensions keyed by coalitions and argument sets.
pub(crate) struct MaskModel {
    pub full: u64,
    agents: usize,
    /// Indexed by `a.bits() << agents | b.bits()`, then by state.
    tables: Vec<Option<Vec<MaskTable>>>,
    memo: HashMap<(StrategicOp, u64, u64, u64, u64), u64>,
    model: GameModel,
}

struct MaskTable {
    by_a: Vec<u64>,
    by_ab: Vec<Vec<u64>>,
}

fn mask(set: &crate::model::StateSet) -> u64 {
    set.ones().fold(0, |m, s| m | 1 << s)
}

impl MaskModel {
    pub fn new(model: &GameModel) -> Self {
        assert!(model.state_count() <= 64, "validity checks support at most 64 states");
        let n = model.state_count();
        let agents = model.agent_count();
        MaskModel {
            full: if n == 64 { u64::MAX } else { (1 << n) - 1 },
            agents,
            tables: (0..1usize << (2 * agents)).map(|_| None).collect(),
            memo: HashMap::new(),
            model: model.clone(),
        }
    }

    pub fn model(&self) -> &GameModel {
        &self.model
    }

    pub fn atom(&self, name: &str) -> u64 {
        mask(&self.model.atom_extension(name))
    }

    fn table(&mut self, a: Coalition, b: Coalition) -> &Vec<MaskTable> {
        let key = (a.bits() << self.agents | b.bits()) as usize;
        let model = &self.model;
        self.tables[key].get_or_insert_with(|| {
            (0..model.state_count())
                .map(|s| {
                    let t = outcome_table(model, s, a, b);
                    MaskTable {
                        by_a: t.by_a.iter().map(mask).collect(),
                        by_ab: t.by_ab.iter().map(|row| row.iter().map(mask).collect()).collect(),
                    }
                })
                .collect()
        })
    }

    pub fn operator(&mut self, o: StrategicOp, a: Coalition, b: Coalition, phi: u64, psi: u64) -> u64 {
        let key = (o, a.bits(), b.bits(), phi, psi);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let sub = |x: u64, y: u64| x & !y == 0;
        let mut ext = 0u64;
        for (s, t) in self.table(a, b).iter().enumerate() {
            let na = t.by_a.len();
            let nb = t.by_ab[0].len();
            let ok_a = |i: usize| sub(t.by_a[i], phi);
            let ok_ab = |i: usize, j: usize| sub(t.by_ab[i][j], psi);
            let holds = match o {
                StrategicOp::Cooperation => (0..na).any(|i| ok_a(i) && (0..nb).any(|j| ok_ab(i, j))),
                StrategicOp::Proactive => (0..nb).any(|j| (0..na).all(|i| !ok_a(i) || ok_ab(i, j))),
                StrategicOp::Reactive => (0..na).all(|i| !ok_a(i) || (0..nb).any(|j| ok_ab(i, j))),
            };
            if holds {
                ext |= 1 << s;
            }
        }
        self.memo.insert(key, ext);
        ext
    }

    pub fn eval(&mut self, t: &Template, metas: &[u64], env: &[Coalition]) -> u64 {
        let full = self.full;
        match t {
            Template::Meta(i) => metas[*i],
            Template::Top => full,
            Template::Bottom => 0,
            Template::Not(f) => full & !self.eval(f, metas, env),
            Template::And(l, r) => self.eval(l, metas, env) & self.eval(r, metas, env),
            Template::Implies(l, r) => full & (!self.eval(l, metas, env) | self.eval(r, metas, env)),
            Template::Iff(l, r) => full & !(self.eval(l, metas, env) ^ self.eval(r, metas, env)),
            Template::Op(o, a, b, l, r) => {
                let (phi, psi) = (self.eval(l, metas, env), self.eval(r, metas, env));
                self.operator(*o, a.eval(env), b.eval(env), phi, psi)
            }
        }
    }
}

/// Tags the registry must contain, in order.
pub const SCHEME_TAGS: [&str; 26] = [
    "Oc1", "Oc2", "Oc3", "Oc4", "Oc5", "Oc6", "Oc7", "Ob1", "Ob2", "Ob3", "Ob4", "Ob5", "Ob6", "Oa1", "Oa2", "Oa3",
    "Oa4", "Oa5", "Oa6", "OaStar", "ConStR1", "ConStR2", "RuleOcMon", "RuleObMon", "RuleOaMon", "ObAntiMon",
];

/// Every registered scheme. Metavariables: φ = 0, ψ = 1, φ' = 2, ψ' = 3;
/// coalitions A = 0, B = 1, C = 2.
pub fn registry() -> Vec<Scheme> {
    use StrategicOp::{Cooperation as C, Proactive as A, Reactive as B};
    let (a, b, c) = (|| var(0), || var(1), || var(2));
    let (phi, psi) = (|| meta(0), || meta(1));
    let (phi2, psi2) = (|| meta(2), || meta(3));
    let e = || CExpr::Empty;
    let base = |o: StrategicOp| op(o, a(), b(), phi(), psi());
    let axiom = |id, description, t| Scheme {
        id,
        description,
        kind: SchemeKind::Axiom(t),
        expected_valid: true,
    };
    let mut out = vec![
        axiom("Oc1", "monotone in A", implies(base(C), op(C, union(a(), c()), b(), phi(), psi()))),
        axiom("Oc2", "monotone in B", implies(base(C), op(C, a(), union(b(), c()), phi(), psi()))),
        axiom(
            "Oc3",
            "A and B together force both",
            implies(base(C), op(C, union(a(), b()), e(), and(phi(), psi()), Template::Top)),
        ),
        axiom(
            "Oc4",
            "empty B folds psi into phi",
            iff(op(C, a(), e(), phi(), psi()), op(C, a(), e(), and(phi(), psi()), Template::Top)),
        ),
        axiom("Oc5", "nothing forces falsum", not(op(C, a(), b(), Template::Bottom, psi()))),
        axiom("Oc6", "only B outside A matters", iff(base(C), op(C, a(), minus(b(), a()), phi(), psi()))),
        axiom("Oc7", "psi may absorb phi", iff(base(C), op(C, a(), b(), phi(), and(phi(), psi())))),
    ];
    let ob_ids = ["Ob1", "Ob2", "Ob3", "Ob4", "Ob5", "Ob6"];
    let oa_ids = ["Oa1", "Oa2", "Oa3", "Oa4", "Oa5", "Oa6"];
    for (o, ids) in [(B, ob_ids), (A, oa_ids)] {
        let id = |n: usize| ids[n - 1];
        out.extend([
            axiom(id(1), "monotone in B", implies(base(o), op(o, a(), union(b(), c()), phi(), psi()))),
            axiom(id(2), "phi answers itself", op(o, a(), e(), phi(), phi())),
            axiom(id(3), "vacuous for falsum", op(o, a(), e(), Template::Bottom, psi())),
            axiom(
                id(4),
                "forcing phi rules out answering with falsum",
                implies(op(o, e(), a(), Template::Top, phi()), not(op(o, a(), b(), phi(), Template::Bottom))),
            ),
            axiom(id(5), "only B outside A matters", iff(base(o), op(o, a(), minus(b(), a()), phi(), psi()))),
            axiom(id(6), "psi may absorb phi", iff(base(o), op(o, a(), b(), phi(), and(phi(), psi())))),
        ]);
    }
    out.push(axiom("OaStar", "anti-monotone in A", implies(op(A, union(a(), c()), b(), phi(), psi()), base(A))));
    out.push(axiom("ConStR1", "proactive implies reactive", implies(base(A), base(B))));
    out.push(axiom(
        "ConStR2",
        "ability to force phi plus a reactive answer gives cooperation",
        implies(and(op(B, e(), a(), Template::Top, phi()), base(B)), base(C)),
    ));
    let rule = |id, o: StrategicOp, covariant_phi: bool| Scheme {
        id,
        description: "monotonicity rule, model-global form",
        kind: SchemeKind::Rule {
            premises: vec![
                if covariant_phi { implies(phi(), phi2()) } else { implies(phi2(), phi()) },
                implies(psi(), psi2()),
            ],
            conclusion: implies(base(o), op(o, a(), b(), phi2(), psi2())),
        },
        expected_valid: true,
    };
    out.push(rule("RuleOcMon", C, true));
    out.push(rule("RuleObMon", B, false));
    out.push(rule("RuleOaMon", A, false));
    out.push(Scheme {
        id: "ObAntiMon",
        description: "anti-monotonicity in A for the reactive operator (known invalid)",
        kind: SchemeKind::Axiom(implies(op(B, union(a(), c()), b(), phi(), psi()), base(B))),
        expected_valid: false,
    });
    out
}

pub fn scheme(id: &str) -> Option<Scheme> {
    registry().into_iter().find(|s| s.id == id)
}

/// One falsified instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub scheme: String,
    pub source: String,
    pub model_index: usize,
    /// The model in the `.cgm` format.
    pub model: String,
    pub state: String,
    /// The falsified formula (the conclusion, for rules).
    pub instance: String,
    /// Rule premises, each true at every state of the model.
    pub premises: Vec<String>,
}

impl Counterexample {
    /// Re-checks the instance with the model checker.
    pub fn verify(&self) -> bool {
        let Ok(model) = crate::model::parse_model(&self.model) else {
            return false;
        };
        let Ok(state) = model.state_index(&self.state) else {
            return false;
        };
        let mut ev = crate::semantics::Evaluator::new(&model);
        let Ok(f) = crate::formula::parse_formula(&self.instance) else {
            return false;
        };
        let premises_hold = self.premises.iter().all(|p| {
            crate::formula::parse_formula(p)
                .ok()
                .and_then(|p| ev.extension(&p).ok())
                .is_some_and(|ext| ext.count_ones(..) == model.state_count())
        });
        premises_hold && ev.holds_at(state, &f) == Ok(false)
    }
}

/// Searches one model for a falsified instance of `scheme`, with
/// metavariables ranging over `pool` (formulas over the model's atoms).
pub(crate) fn falsify(scheme: &Scheme, ctx: &mut MaskModel, pool_sets: &[u64]) -> Option<(usize, Vec<usize>, Vec<Coalition>)> {
    let metas = scheme.meta_count();
    let envs = scheme.environments(ctx.model().agent_count());
    let mut choice = vec![0usize; metas];
    loop {
        let bound: Vec<u64> = choice.iter().map(|&i| pool_sets[i]).collect();
        let premises_ok = match &scheme.kind {
            SchemeKind::Axiom(_) => true,
            SchemeKind::Rule { premises, .. } => premises.iter().all(|p| ctx.eval(p, &bound, &[]) == ctx.full),
        };
        if premises_ok {
            for env in &envs {
                let ext = ctx.eval(scheme.body(), &bound, env);
                if ext != ctx.full {
                    let state = (!ext & ctx.full).trailing_zeros() as usize;
                    return Some((state, choice.clone(), env.clone()));
                }
            }
        }
        let mut i = metas;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            choice[i] += 1;
            if choice[i] < pool_sets.len() {
                break;
            }
            choice[i] = 0;
        }
    }
}

pub(crate) fn counterexample(
    scheme: &Scheme,
    model: &GameModel,
    source: &str,
    model_index: usize,
    pool: &[Formula],
    found: (usize, Vec<usize>, Vec<Coalition>),
) -> Counterexample {
    let (state, choice, env) = found;
    let metas: Vec<Formula> = choice.iter().map(|&i| pool[i].clone()).collect();
    let premises = match &scheme.kind {
        SchemeKind::Axiom(_) => Vec::new(),
        SchemeKind::Rule { premises, .. } => premises.iter().map(|p| p.instantiate(model, &metas, &env).render()).collect(),
    };
    Counterexample {
        scheme: scheme.id.to_string(),
        source: source.to_string(),
        model_index,
        model: crate::model::render_model(model),
        state: model.state_name(state).to_string(),
        instance: scheme.body().instantiate(model, &metas, &env).render(),
        premises,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_matches_tag_list() {
        let ids: Vec<&str> = registry().iter().map(|s| s.id).collect();
        assert_eq!(ids, SCHEME_TAGS);
    }

    #[test]
    fn arities() {
        let oc1 = scheme("Oc1").unwrap();
        assert_eq!((oc1.meta_count(), oc1.coalition_var_count()), (2, 3));
        let rule = scheme("RuleObMon").unwrap();
        assert_eq!((rule.meta_count(), rule.coalition_var_count()), (4, 2));
        assert!(!scheme("ObAntiMon").unwrap().expected_valid);
    }

    #[test]
    fn environments_are_deduplicated() {
        // Oc6 only sees (A, B) and (A, B \ A)
        assert_eq!(scheme("Oc6").unwrap().environments(2).len(), 16);
        // Ob2 only sees (A, {})
        assert_eq!(scheme("Ob2").unwrap().environments(3).len(), 8);
        // Oc1 sees (A, B) and (A u C, B): pairs A <= A' times B
        assert_eq!(scheme("Oc1").unwrap().environments(2).len(), 9 * 4);
    }
}
