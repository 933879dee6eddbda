//! `constr`: command-line front end.
//!
//! Exit codes: 0 when every check holds, 1 when one fails, 2 on input
//! errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use constr_core::bisim::{
    check_cl_bisim, check_constr_bisim, distinguishing_formula, greatest_cl_bisim, greatest_constr_bisim,
    BisimVerdict, StateRelation,
};
use constr_core::corpus::run_corpus;
use constr_core::formula::parse_formula;
use constr_core::model::{parse_model, render_model, GameModel};
use constr_core::semantics::Evaluator;
use constr_core::validity::{run_suite, GeneratorBounds, Pool, SuiteConfig, SuiteReport};

#[derive(Parser)]
#[command(name = "constr", version, about = "Model checking and bisimulation for conditional strategic operators")]
struct Cli {
    /// Print structured JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Logic {
    Cl,
    Constr,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula at one state.
    Check {
        model: PathBuf,
        state: String,
        formula: String,
        /// Show witness or counter joint actions of the outermost operator.
        #[arg(long)]
        explain: bool,
    },
    /// Print the states where a formula holds.
    Extension { model: PathBuf, formula: String },
    /// Check a relation, or compute the greatest bisimulation.
    Bisim {
        model: PathBuf,
        relation: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "constr")]
        logic: Logic,
        #[arg(long)]
        greatest: bool,
    },
    /// Find a formula true at the first state and false at the second.
    Distinguish { model: PathBuf, s: String, t: String },
    /// Run the axiom-scheme suite.
    Validate {
        /// TOML suite configuration; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated scheme tags to run.
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<String>,
        /// Comma-separated scheme tags to skip.
        #[arg(long, value_delimiter = ',')]
        exclude: Vec<String>,
        /// Maximum number of models per source.
        #[arg(long)]
        budget: Option<usize>,
        /// Comma-separated seeds, one random family each.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Exhaustive family bounds as `agents,states,actions`.
        #[arg(long)]
        bounds: Option<String>,
        /// Models per random family.
        #[arg(long)]
        random_count: Option<usize>,
        #[arg(long)]
        no_corpus: bool,
        #[arg(long)]
        no_exhaustive: bool,
        #[arg(long)]
        no_random: bool,
        /// Instantiate metavariables with depth-1 boolean formulas too.
        #[arg(long)]
        stress: bool,
    },
    /// Re-run every reference verdict.
    Corpus,
    /// Print a model file in canonical form.
    Fmt { model: PathBuf },
}

/// An input problem: reported on stderr with exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

type Outcome = Result<bool, InputError>;

fn load_model(path: &Path) -> Result<GameModel, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn state(model: &GameModel, name: &str) -> Result<usize, InputError> {
    model.state_index(name).map_err(InputError::from)
}

/// Writes the result; a closed stdout (say, piped into `head`) is not an
/// error worth reporting.
fn emit<T: Serialize>(json: bool, value: &T, text: impl FnOnce() -> String) {
    let body = if json {
        serde_json::to_string_pretty(value).expect("serializable output")
    } else {
        text()
    };
    if !body.is_empty() {
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{body}");
    }
}

fn check(json: bool, model: &Path, state_name: &str, formula: &str, explain: bool) -> Outcome {
    let m = load_model(model)?;
    let s = state(&m, state_name)?;
    let f = parse_formula(formula)?;
    let mut ev = Evaluator::new(&m);
    let holds = ev.holds_at(s, &f)?;
    let explanation = if explain { ev.explain(s, &f)? } else { None };
    #[derive(Serialize)]
    struct Out<'a> {
        state: &'a str,
        formula: String,
        holds: bool,
        explanation: Option<constr_core::semantics::Explanation>,
    }
    let out = Out {
        state: state_name,
        formula: f.render(),
        holds,
        explanation,
    };
    emit(json, &out, || {
        let mut text = holds.to_string();
        if let Some(e) = &out.explanation {
            text.push_str(&format!("\n{} at {}:", e.operator, e.state));
            for line in &e.lines {
                text.push_str(&format!("\n  {line}"));
            }
        }
        text
    });
    Ok(holds)
}

fn extension(json: bool, model: &Path, formula: &str) -> Outcome {
    let m = load_model(model)?;
    let f = parse_formula(formula)?;
    let ext = Evaluator::new(&m).extension(&f)?;
    let states: Vec<&str> = ext.ones().map(|s| m.state_name(s)).collect();
    emit(json, &serde_json::json!({ "formula": f.render(), "states": states }), || {
        m.format_set(&ext)
    });
    Ok(true)
}

fn bisim(json: bool, model: &Path, relation: Option<&Path>, logic: Logic, greatest: bool) -> Outcome {
    let m = load_model(model)?;
    if greatest {
        let rel = match logic {
            Logic::Cl => greatest_cl_bisim(&m),
            Logic::Constr => greatest_constr_bisim(&m),
        };
        let pairs: Vec<(&str, &str)> = rel.pairs().map(|(x, y)| (m.state_name(x), m.state_name(y))).collect();
        emit(json, &serde_json::json!({ "pairs": pairs }), || rel.render(&m).trim_end().to_string());
        return Ok(true);
    }
    let Some(path) = relation else {
        return Err(InputError("a relation file is required unless --greatest is given".into()));
    };
    let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let rel = StateRelation::parse(&m, &text).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    let verdict: BisimVerdict = match logic {
        Logic::Cl => check_cl_bisim(&m, &rel),
        Logic::Constr => check_constr_bisim(&m, &rel),
    };
    emit(json, &verdict, || match &verdict.failure {
        None => "ok".to_string(),
        Some(f) => format!("fail: {f}"),
    });
    Ok(verdict.ok)
}

fn distinguish(json: bool, model: &Path, s: &str, t: &str) -> Outcome {
    let m = load_model(model)?;
    let (si, ti) = (state(&m, s)?, state(&m, t)?);
    match distinguishing_formula(&m, si, ti) {
        Ok(found) => {
            let text = found.as_ref().map(|f| f.render());
            emit(json, &serde_json::json!({ "s": s, "t": t, "formula": text }), || {
                text.clone().unwrap_or_else(|| format!("{s} and {t} are bisimilar"))
            });
            Ok(found.is_some())
        }
        Err(e) => {
            emit(json, &serde_json::json!({ "s": s, "t": t, "error": e.to_string() }), || e.to_string());
            Ok(false)
        }
    }
}

fn parse_bounds(text: &str) -> Result<GeneratorBounds, InputError> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| InputError(format!("bad --bounds `{text}`: {e}")))?;
    let [agents, states, actions] = parts[..] else {
        return Err(InputError(format!("--bounds expects agents,states,actions, got `{text}`")));
    };
    let bounds = GeneratorBounds::new(agents, states, actions, &["p", "q"]);
    bounds.check()?;
    Ok(bounds)
}

fn env_seed() -> Result<Option<u64>, InputError> {
    match std::env::var("CONSTR_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|e| InputError(format!("CONSTR_SEED `{v}`: {e}"))),
        Err(_) => Ok(None),
    }
}

#[allow(clippy::too_many_arguments)]
fn validate(
    json: bool,
    config: Option<&Path>,
    schemes: Vec<String>,
    exclude: Vec<String>,
    budget: Option<usize>,
    seeds: Vec<u64>,
    bounds: Option<&str>,
    random_count: Option<usize>,
    (no_corpus, no_exhaustive, no_random, stress): (bool, bool, bool, bool),
) -> Outcome {
    let mut cfg: SuiteConfig = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))?
        }
        None => SuiteConfig::default(),
    };
    if let Some(seed) = env_seed()? {
        if let Some(r) = cfg.random.as_mut() {
            r.seeds = vec![seed];
        }
    }
    if !schemes.is_empty() {
        cfg.include = schemes;
    }
    cfg.exclude.extend(exclude);
    if budget.is_some() {
        cfg.budget = budget;
    }
    if let Some(b) = bounds {
        cfg.exhaustive = Some(parse_bounds(b)?);
    }
    if let Some(r) = cfg.random.as_mut() {
        if !seeds.is_empty() {
            r.seeds = seeds;
        }
        if let Some(n) = random_count {
            r.count = n;
        }
    }
    if no_corpus {
        cfg.corpus = false;
    }
    if no_exhaustive {
        cfg.exhaustive = None;
    }
    if no_random {
        cfg.random = None;
    }
    if stress {
        cfg.pool = Pool::Stress;
    }
    let report: SuiteReport = run_suite(&cfg)?;
    let passed = report.passed();
    emit(json, &serde_json::json!({ "passed": passed, "verdicts": report.verdicts }), || {
        let mut lines = Vec::new();
        for v in &report.verdicts {
            let mark = if v.passed { "PASS" } else { "FAIL" };
            let kind = if v.expected_valid { "" } else { " (expected invalid)" };
            lines.push(format!("{mark} {}{kind} on {}: {} models", v.scheme, v.source, v.models_tried));
            if let Some(c) = &v.counterexample {
                lines.push(format!("  counterexample at {} (model #{}): {}", c.state, c.model_index, c.instance));
                for p in &c.premises {
                    lines.push(format!("  premise valid in the model: {p}"));
                }
                for l in c.model.lines() {
                    lines.push(format!("    {l}"));
                }
            }
        }
        lines.push(if passed { "suite: PASS".into() } else { "suite: FAIL".into() });
        lines.join("\n")
    });
    Ok(passed)
}

fn corpus(json: bool) -> Outcome {
    let report = run_corpus();
    let passed = report.all_passed();
    emit(json, &report, || {
        report
            .outcomes
            .iter()
            .map(|o| {
                let mark = if o.passed { "PASS" } else { "FAIL" };
                let actual = match &o.actual {
                    Ok(b) => b.to_string(),
                    Err(e) => format!("error: {e}"),
                };
                format!("{mark} {}: {} (expected {}, got {actual})", o.fixture, o.description, o.expected)
            })
            .collect::<Vec<_>>()
            .join("\n")
    });
    Ok(passed)
}

fn fmt(json: bool, model: &Path) -> Outcome {
    let m = load_model(model)?;
    let text = render_model(&m);
    emit(json, &serde_json::json!({ "model": text }), || text.trim_end().to_string());
    Ok(true)
}

fn run(cli: Cli) -> Outcome {
    let json = cli.json;
    match cli.command {
        Command::Check {
            model,
            state,
            formula,
            explain,
        } => check(json, &model, &state, &formula, explain),
        Command::Extension { model, formula } => extension(json, &model, &formula),
        Command::Bisim {
            model,
            relation,
            logic,
            greatest,
        } => bisim(json, &model, relation.as_deref(), logic, greatest),
        Command::Distinguish { model, s, t } => distinguish(json, &model, &s, &t),
        Command::Validate {
            config,
            schemes,
            exclude,
            budget,
            seeds,
            bounds,
            random_count,
            no_corpus,
            no_exhaustive,
            no_random,
            stress,
        } => validate(
            json,
            config.as_deref(),
            schemes,
            exclude,
            budget,
            seeds,
            bounds.as_deref(),
            random_count,
            (no_corpus, no_exhaustive, no_random, stress),
        ),
        Command::Corpus => corpus(json),
        Command::Fmt { model } => fmt(json, &model),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
