//! Empirical validity of axiom schemes over generated model families.
//!
//! A scheme is tested by instantiating its coalition metavariables with
//! every coalition of a model's agents and its formula metavariables with
//! formulas from a small pool (atoms `p`, `q` by default), then searching
//! for a state where the instance is false. Rules are tested in their
//! model-global form. The known-invalid scheme passes when a counterexample
//! is found.

mod generate;
mod schemes;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::model::GameModel;

pub use generate::{
    count_bounded, count_models, enumerate_bounded, enumerate_models, random_model, GenerateError, GeneratorBounds,
    RandomFamily, DEFAULT_CAP,
};
pub use schemes::{registry, scheme, CExpr, Counterexample, Scheme, SchemeKind, Template, SCHEME_TAGS};

use schemes::{counterexample, falsify, MaskModel};

/// Formulas the formula metavariables range over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pool {
    /// The atoms `p` and `q`.
    #[default]
    Atoms,
    /// Literals, conjunction, disjunction and constants over `p`, `q`.
    Stress,
}

impl Pool {
    pub fn formulas(self) -> Vec<Formula> {
        let (p, q) = (Formula::atom("p"), Formula::atom("q"));
        match self {
            Pool::Atoms => vec![p, q],
            Pool::Stress => vec![
                p.clone(),
                q.clone(),
                Formula::not(p.clone()),
                Formula::not(q.clone()),
                Formula::and(p.clone(), q.clone()),
                Formula::or(p, q),
                Formula::Top,
                Formula::bottom(),
            ],
        }
    }
}

/// Where a batch of models comes from.
#[derive(Clone, Debug)]
pub enum ModelSource {
    /// The reference models.
    Corpus,
    /// All models counted by [`count_bounded`].
    Exhaustive { bounds: GeneratorBounds, cap: u128 },
    Random(RandomFamily),
    Fixed { name: String, models: Vec<GameModel> },
}

impl ModelSource {
    pub fn name(&self) -> String {
        match self {
            ModelSource::Corpus => "corpus".to_string(),
            ModelSource::Exhaustive { bounds, .. } => format!(
                "exhaustive({} agents, <={} states, <={} actions)",
                bounds.agents, bounds.states, bounds.actions
            ),
            ModelSource::Random(f) => format!("random(seed {}, {} models)", f.seed, f.count),
            ModelSource::Fixed { name, .. } => name.clone(),
        }
    }

    /// The first `budget` models of the source.
    pub fn models(&self, budget: usize) -> Result<Vec<GameModel>, GenerateError> {
        Ok(match self {
            ModelSource::Corpus => crate::corpus::fixtures().iter().map(|f| f.model()).take(budget).collect(),
            ModelSource::Exhaustive { bounds, cap } => enumerate_bounded(bounds, *cap)?.take(budget).collect(),
            ModelSource::Random(f) => {
                f.check()?;
                (0..f.count.min(budget)).map(|i| f.model(i)).collect()
            }
            ModelSource::Fixed { models, .. } => models.iter().take(budget).cloned().collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SchemeVerdict {
    pub scheme: String,
    pub expected_valid: bool,
    pub source: String,
    pub models_tried: usize,
    pub counterexample: Option<Counterexample>,
    /// Whether the counterexample re-verifies with the model checker.
    pub verified: Option<bool>,
    pub passed: bool,
}

/// Evaluates every scheme on every model; for each scheme the first model
/// (in order) with a falsified instance.
type Found = Option<(usize, Vec<usize>, Vec<crate::model::Coalition>)>;

fn scan(schemes: &[Scheme], models: &[GameModel], source: &str, pool: &[Formula]) -> Vec<Option<Counterexample>> {
    let per_model: Vec<Vec<Found>> = models
        .par_iter()
        .map(|m| {
            let mut ctx = MaskModel::new(m);
            let sets = pool_sets_for(&ctx, pool);
            schemes.iter().map(|s| falsify(s, &mut ctx, &sets)).collect()
        })
        .collect();
    schemes
        .iter()
        .enumerate()
        .map(|(k, s)| {
            per_model.iter().enumerate().find_map(|(i, row)| {
                row[k]
                    .clone()
                    .map(|found| counterexample(s, &models[i], source, i, pool, found))
            })
        })
        .collect()
}

fn pool_sets_for(ctx: &MaskModel, pool: &[Formula]) -> Vec<u64> {
    let (p, q) = (ctx.atom("p"), ctx.atom("q"));
    pool.iter().map(|f| eval_boolean(f, ctx.full, p, q)).collect()
}

fn eval_boolean(f: &Formula, full: u64, p: u64, q: u64) -> u64 {
    match f {
        Formula::Top => full,
        Formula::Atom(a) if a == "p" => p,
        Formula::Atom(a) if a == "q" => q,
        Formula::Atom(_) => 0,
        Formula::Not(g) => full & !eval_boolean(g, full, p, q),
        Formula::And(l, r) => eval_boolean(l, full, p, q) & eval_boolean(r, full, p, q),
        Formula::Strategic { .. } => unreachable!("pool formulas are boolean"),
    }
}

fn verdict(scheme: &Scheme, source: &str, tried: usize, cex: Option<Counterexample>) -> SchemeVerdict {
    let verified = cex.as_ref().map(Counterexample::verify);
    let passed = match (&cex, scheme.expected_valid) {
        (None, true) => true,
        (Some(_), false) => verified == Some(true),
        _ => false,
    };
    SchemeVerdict {
        scheme: scheme.id.to_string(),
        expected_valid: scheme.expected_valid,
        source: source.to_string(),
        models_tried: tried,
        counterexample: cex,
        verified,
        passed,
    }
}

/// Checks one scheme on a list of models.
pub fn check_scheme(scheme: &Scheme, source: &str, models: &[GameModel], pool: Pool) -> SchemeVerdict {
    let pool = pool.formulas();
    let cex = scan(std::slice::from_ref(scheme), models, source, &pool).pop().flatten();
    verdict(scheme, source, models.len(), cex)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SuiteError {
    #[error("unknown scheme tag `{0}`")]
    UnknownScheme(String),
    #[error(transparent)]
    Generate(#[from] GenerateError),
}

fn default_true() -> bool {
    true
}

fn default_exhaustive() -> Option<GeneratorBounds> {
    Some(GeneratorBounds::new(2, 2, 2, &["p", "q"]))
}

fn default_random() -> Option<RandomConfig> {
    Some(RandomConfig::default())
}

fn default_cap() -> u64 {
    DEFAULT_CAP as u64
}

/// Seeded random families, one per seed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomConfig {
    pub agents: (usize, usize),
    pub states: (usize, usize),
    pub actions: (usize, usize),
    pub atoms: Vec<String>,
    pub count: usize,
    pub seeds: Vec<u64>,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            agents: (2, 3),
            states: (2, 3),
            actions: (2, 2),
            atoms: vec!["p".into(), "q".into()],
            count: 10_000,
            seeds: vec![DEFAULT_SEED],
        }
    }
}

pub const DEFAULT_SEED: u64 = 20_240_617;

/// Suite configuration, readable from TOML.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "default_true")]
    pub corpus: bool,
    #[serde(default = "default_exhaustive")]
    pub exhaustive: Option<GeneratorBounds>,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default = "default_random")]
    pub random: Option<RandomConfig>,
    /// Scheme tags to run; empty means all.
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    /// Maximum number of models per source.
    pub budget: Option<usize>,
    pub pool: Pool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            corpus: true,
            exhaustive: default_exhaustive(),
            cap: default_cap(),
            random: default_random(),
            include: Vec::new(),
            exclude: Vec::new(),
            budget: None,
            pool: Pool::Atoms,
        }
    }
}

impl SuiteConfig {
    pub fn schemes(&self) -> Result<Vec<Scheme>, SuiteError> {
        for tag in self.include.iter().chain(&self.exclude) {
            if !SCHEME_TAGS.contains(&tag.as_str()) {
                return Err(SuiteError::UnknownScheme(tag.clone()));
            }
        }
        Ok(registry()
            .into_iter()
            .filter(|s| self.include.is_empty() || self.include.iter().any(|t| t == s.id))
            .filter(|s| !self.exclude.iter().any(|t| t == s.id))
            .collect())
    }

    pub fn sources(&self) -> Vec<ModelSource> {
        let mut out = Vec::new();
        if self.corpus {
            out.push(ModelSource::Corpus);
        }
        if let Some(bounds) = &self.exhaustive {
            out.push(ModelSource::Exhaustive {
                bounds: bounds.clone(),
                cap: self.cap as u128,
            });
        }
        if let Some(r) = &self.random {
            for &seed in &r.seeds {
                out.push(ModelSource::Random(RandomFamily {
                    agents: r.agents,
                    states: r.states,
                    actions: r.actions,
                    atoms: r.atoms.clone(),
                    count: r.count,
                    seed,
                }));
            }
        }
        out
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteReport {
    pub verdicts: Vec<SchemeVerdict>,
}

impl SuiteReport {
    /// Every selected scheme passed (see [`SuiteReport::scheme_passed`]).
    pub fn passed(&self) -> bool {
        let mut ids: Vec<&str> = self.verdicts.iter().map(|v| v.scheme.as_str()).collect();
        ids.dedup();
        ids.iter().all(|id| self.scheme_passed(id))
    }

    /// Overall verdict of one scheme across all sources. A valid scheme
    /// passes when no source falsifies it; the invalid one when some
    /// source does (with a re-verified counterexample).
    pub fn scheme_passed(&self, id: &str) -> bool {
        let rows: Vec<&SchemeVerdict> = self.verdicts.iter().filter(|v| v.scheme == id).collect();
        match rows.first() {
            None => false,
            Some(v) if v.expected_valid => rows.iter().all(|v| v.passed),
            Some(_) => rows.iter().any(|v| v.passed),
        }
    }
}

/// Runs the configured schemes over every configured source.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    let schemes = config.schemes()?;
    let pool = config.pool.formulas();
    let budget = config.budget.unwrap_or(usize::MAX);
    let mut rows: Vec<Vec<SchemeVerdict>> = vec![Vec::new(); schemes.len()];
    for source in config.sources() {
        let models = source.models(budget)?;
        let name = source.name();
        let found = scan(&schemes, &models, &name, &pool);
        for (k, cex) in found.into_iter().enumerate() {
            rows[k].push(verdict(&schemes[k], &name, models.len(), cex));
        }
    }
    Ok(SuiteReport {
        verdicts: rows.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn only(tags: &[&str]) -> SuiteConfig {
        SuiteConfig {
            include: tags.iter().map(|t| t.to_string()).collect(),
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn anti_monotonicity_fails_on_the_reference_model() {
        let m = corpus::fixture("beta_anti_monotonicity").unwrap().model();
        let v = check_scheme(&scheme("ObAntiMon").unwrap(), "fixture", std::slice::from_ref(&m), Pool::Atoms);
        assert!(v.passed);
        let cex = v.counterexample.unwrap();
        assert_eq!(cex.state, "s0");
        assert!(cex.verify());
        let oa = check_scheme(&scheme("OaStar").unwrap(), "fixture", &[m], Pool::Atoms);
        assert!(oa.passed);
    }

    #[test]
    fn zero_budget_finds_nothing() {
        let mut cfg = only(&["ObAntiMon"]);
        cfg.budget = Some(0);
        let report = run_suite(&cfg).unwrap();
        assert!(!report.passed());
        assert!(report.verdicts.iter().all(|v| v.models_tried == 0));
    }

    #[test]
    fn falsum_premise_on_small_family() {
        let mut cfg = only(&["Oc5"]);
        cfg.random = None;
        assert!(run_suite(&cfg).unwrap().passed());
    }

    #[test]
    fn unknown_tag_is_an_error() {
        assert_eq!(only(&["Oc9"]).schemes().unwrap_err(), SuiteError::UnknownScheme("Oc9".into()));
    }

    #[test]
    fn stress_pool_on_corpus() {
        let cfg = SuiteConfig {
            exhaustive: None,
            random: None,
            pool: Pool::Stress,
            exclude: vec!["ObAntiMon".into()],
            ..SuiteConfig::default()
        };
        let report = run_suite(&cfg).unwrap();
        assert!(report.passed(), "{:#?}", report.verdicts.iter().find(|v| !v.passed));
    }

    #[test]
    fn rule_counterexamples_carry_premises() {
        // a rule made invalid on purpose: anti-monotone in psi
        let mut s = scheme("RuleOcMon").unwrap();
        if let SchemeKind::Rule { premises, .. } = &mut s.kind {
            premises[1] = Template::Implies(Box::new(Template::Meta(3)), Box::new(Template::Meta(1)));
        }
        s.expected_valid = false;
        let models: Vec<_> = corpus::fixtures().iter().map(|f| f.model()).collect();
        let v = check_scheme(&s, "corpus", &models, Pool::Atoms);
        let cex = v.counterexample.expect("the broken rule has a counterexample");
        assert_eq!(cex.premises.len(), 2);
        assert!(cex.verify());
    }
}
