//! The line-oriented `.cgm` model format.
//!
//! ```text
//! # comment
//! agents: a b
//! states: s0 s1
//! labels s0: p q
//! actions s0 a: a1 a2
//! go s0 (a1,b1) -> s1
//! ```
//!
//! Identifiers are nonempty runs of ASCII letters, digits, `_` and `'`.
//! Directives may appear in any order. Structural checks (totality,
//! availability, unknown names) happen in [`validate_model`], so a file with
//! several problems reports all of them at once; the parser itself only
//! rejects malformed lines and repeated directives.
//!
//! [`validate_model`]: super::validate_model

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use super::raw::{ActionDecl, RawModel, Transition};
use super::{GameModel, ModelError};

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

struct Line<'a> {
    number: usize,
    /// Full line without the comment, for column computation.
    raw: &'a str,
}

impl<'a> Line<'a> {
    fn error(&self, at: &str, message: impl Into<String>) -> ParseError {
        let offset = at.as_ptr() as usize - self.raw.as_ptr() as usize;
        ParseError {
            line: self.number,
            column: self.raw[..offset.min(self.raw.len())].chars().count() + 1,
            message: message.into(),
        }
    }

    fn ident(&self, token: &'a str, what: &str) -> Result<String, ParseError> {
        if token.is_empty() {
            return Err(self.error(token, format!("expected {what}")));
        }
        if let Some((i, c)) = token.char_indices().find(|&(_, c)| !is_ident_char(c)) {
            return Err(self.error(&token[i..], format!("unexpected `{c}` in {what}")));
        }
        Ok(token.to_string())
    }

    fn ident_list(&self, text: &'a str, what: &str) -> Result<Vec<String>, ParseError> {
        text.split_whitespace().map(|t| self.ident(t, what)).collect()
    }
}

/// Parses the text format into an unvalidated [`RawModel`].
pub fn parse_raw(src: &str) -> Result<RawModel, ParseError> {
    let mut raw = RawModel::default();
    let mut agents_line: Option<usize> = None;
    let mut states_line: Option<usize> = None;
    let mut label_lines: BTreeMap<String, usize> = BTreeMap::new();
    let mut action_lines: BTreeMap<(String, String), usize> = BTreeMap::new();
    let mut go_lines: BTreeMap<(String, Vec<String>), usize> = BTreeMap::new();

    for (i, full) in src.lines().enumerate() {
        let number = i + 1;
        let content = match full.find('#') {
            Some(pos) => &full[..pos],
            None => full,
        };
        let line = Line { number, raw: full };
        let body = content.trim();
        if body.is_empty() {
            continue;
        }
        let keyword_end = body.find(|c: char| c.is_whitespace() || c == ':').unwrap_or(body.len());
        let (keyword, rest) = body.split_at(keyword_end);
        match keyword {
            "agents" | "states" => {
                let rest = rest
                    .trim_start()
                    .strip_prefix(':')
                    .ok_or_else(|| line.error(rest, format!("expected `:` after `{keyword}`")))?;
                let names = line.ident_list(rest, if keyword == "agents" { "agent name" } else { "state name" })?;
                let slot = if keyword == "agents" { &mut agents_line } else { &mut states_line };
                if let Some(first) = *slot {
                    return Err(line.error(body, format!("`{keyword}` already declared on line {first}")));
                }
                *slot = Some(number);
                if keyword == "agents" {
                    raw.agents = names;
                } else {
                    raw.states = names;
                }
            }
            "labels" => {
                let (head, atoms) = rest
                    .split_once(':')
                    .ok_or_else(|| line.error(rest, "expected `labels <state>: <atoms>`"))?;
                let mut parts = head.split_whitespace();
                let state = line.ident(parts.next().unwrap_or(head.trim()), "state name")?;
                if let Some(extra) = parts.next() {
                    return Err(line.error(extra, "expected `:` after the state name"));
                }
                if let Some(first) = label_lines.insert(state.clone(), number) {
                    return Err(line.error(body, format!("labels of `{state}` already given on line {first}")));
                }
                let atoms = line.ident_list(atoms, "atom")?;
                raw.labels.push((state, atoms, Some(number)));
            }
            "actions" => {
                let (head, acts) = rest
                    .split_once(':')
                    .ok_or_else(|| line.error(rest, "expected `actions <state> <agent>: <actions>`"))?;
                let parts: Vec<&str> = head.split_whitespace().collect();
                if parts.len() != 2 {
                    return Err(line.error(head, "expected a state and an agent before `:`"));
                }
                let state = line.ident(parts[0], "state name")?;
                let agent = line.ident(parts[1], "agent name")?;
                if let Some(first) = action_lines.insert((state.clone(), agent.clone()), number) {
                    return Err(line.error(
                        body,
                        format!("actions of `{agent}` at `{state}` already given on line {first}"),
                    ));
                }
                let actions = line.ident_list(acts, "action name")?;
                raw.actions.push(ActionDecl { state, agent, actions, line: Some(number) });
            }
            "go" => {
                let open = rest
                    .find('(')
                    .ok_or_else(|| line.error(rest, "expected `(` starting the action profile"))?;
                let close = rest
                    .find(')')
                    .ok_or_else(|| line.error(rest, "expected `)` closing the action profile"))?;
                if close < open {
                    return Err(line.error(&rest[close..], "unexpected `)`"));
                }
                let state = line.ident(rest[..open].trim(), "state name")?;
                let inner = &rest[open + 1..close];
                let profile = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(|t| line.ident(t.trim(), "action name"))
                        .collect::<Result<Vec<_>, _>>()?
                };
                let after = rest[close + 1..].trim_start();
                let target = after
                    .strip_prefix("->")
                    .ok_or_else(|| line.error(after, "expected `->` after the action profile"))?
                    .trim();
                let target = line.ident(target, "target state")?;
                if let Some(first) = go_lines.insert((state.clone(), profile.clone()), number) {
                    return Err(line.error(
                        body,
                        format!(
                            "duplicate outcome for ({}) at `{state}`, first given on line {first}",
                            profile.join(",")
                        ),
                    ));
                }
                raw.transitions.push(Transition { state, profile, target, line: Some(number) });
            }
            other => {
                return Err(line.error(body, format!("unknown directive `{other}`")));
            }
        }
    }
    Ok(raw)
}

/// Parses and validates a model in the text format.
pub fn parse_model(src: &str) -> Result<GameModel, ModelError> {
    parse_raw(src).map_err(ModelError::Parse)?.build()
}

/// Canonical text rendering: header, labels, then one block per state with
/// its action lines and every profile in index order.
pub fn render_model(model: &GameModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "agents: {}", model.agents().join(" "));
    let _ = writeln!(out, "states: {}", model.states().join(" "));
    let labelled: Vec<usize> = (0..model.state_count())
        .filter(|&s| !model.labels(s).is_empty())
        .collect();
    if !labelled.is_empty() {
        out.push('\n');
        for s in labelled {
            let _ = writeln!(out, "labels {}: {}", model.state_name(s), model.labels(s).join(" "));
        }
    }
    for s in 0..model.state_count() {
        out.push('\n');
        let name = model.state_name(s);
        for a in 0..model.agent_count() {
            let _ = writeln!(
                out,
                "actions {name} {}: {}",
                model.agent_name(a),
                model.actions(s, a).join(" ")
            );
        }
        for p in 0..model.profile_count(s) {
            let profile: Vec<&str> = model
                .decode_profile(s, p)
                .iter()
                .enumerate()
                .map(|(a, &x)| model.actions(s, a)[x].as_str())
                .collect();
            let _ = writeln!(
                out,
                "go {name} ({}) -> {}",
                profile.join(","),
                model.state_name(model.outcome(s, p))
            );
        }
    }
    out
}
