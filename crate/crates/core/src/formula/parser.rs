//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! iff     := implies ("<->" implies)*
//! implies := or ("->" implies)?
//! or      := and ("|" and)*
//! and     := unary ("&" unary)*
//! unary   := "~" unary | "[" coalition "]" unary | primary
//! primary := "true" | "false" | atom | "(" iff ")"
//!          | ("Oc" | "Oa" | "Ob") "[" coalition "," coalition "]" "(" iff "," iff ")"
//!          | ("Cb" | "Cd") "[" coalition "]" "(" iff "," iff ")"
//! coalition := "{" (name ("," name)*)? "}"
//! ```
//!
//! `Cb` and `Cd` are the conditional box and diamond.

use serde::Serialize;
use thiserror::Error;

use super::{AgentSet, Derived, Formula, StrategicOp};
use crate::model::text_ident_char;

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum FormulaError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown operator `{name}` at line {line}, column {column}")]
    UnknownOperator {
        name: String,
        line: usize,
        column: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Tilde,
    Amp,
    Bar,
    Arrow,
    DoubleArrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DoubleArrow => "`<->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, FormulaError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l, col) = (line, column);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: l, column: col });
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let simple = match c {
            '{' => Some(Tok::LBrace),
            '}' => Some(Tok::RBrace),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '~' => Some(Tok::Tilde),
            '&' => Some(Tok::Amp),
            '|' => Some(Tok::Bar),
            _ => None,
        };
        if let Some(tok) = simple {
            push(&mut out, tok);
            i += 1;
            column += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            push(&mut out, Tok::Arrow);
            i += 2;
            column += 2;
        } else if c == '<' && chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
            push(&mut out, Tok::DoubleArrow);
            i += 3;
            column += 3;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && text_ident_char(chars[i]) {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            column += i - start;
            push(&mut out, Tok::Ident(word));
        } else {
            return Err(FormulaError::Syntax {
                line,
                column,
                message: format!("unexpected character `{c}`"),
            });
        }
    }
    out.push(Token { tok: Tok::Eof, line, column });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: String) -> FormulaError {
        let t = self.peek();
        FormulaError::Syntax {
            line: t.line,
            column: t.column,
            message,
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), FormulaError> {
        if self.peek().tok == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error_here(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().tok.describe()
            )))
        }
    }

    fn eat(&mut self, tok: Tok) -> bool {
        if self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn iff(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.implies()?;
        while self.eat(Tok::DoubleArrow) {
            let right = self.implies()?;
            left = Derived::Iff(left, right).desugar();
        }
        Ok(left)
    }

    fn implies(&mut self) -> Result<Formula, FormulaError> {
        let left = self.or()?;
        if self.eat(Tok::Arrow) {
            let right = self.implies()?;
            return Ok(Derived::Implies(left, right).desugar());
        }
        Ok(left)
    }

    fn or(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.and()?;
        while self.eat(Tok::Bar) {
            let right = self.and()?;
            left = Derived::Or(left, right).desugar();
        }
        Ok(left)
    }

    fn and(&mut self) -> Result<Formula, FormulaError> {
        let mut left = self.unary()?;
        while self.eat(Tok::Amp) {
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        if self.eat(Tok::Tilde) {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat(Tok::LBrack) {
            let a = self.coalition()?;
            self.expect(Tok::RBrack)?;
            let phi = self.unary()?;
            return Ok(Derived::CoalitionBox(a, phi).desugar());
        }
        self.primary()
    }

    fn coalition(&mut self) -> Result<AgentSet, FormulaError> {
        self.expect(Tok::LBrace)?;
        let mut set = AgentSet::empty();
        if self.eat(Tok::RBrace) {
            return Ok(set);
        }
        loop {
            match self.bump().tok {
                Tok::Ident(name) => {
                    set.0.insert(name);
                }
                other => {
                    self.pos -= 1;
                    return Err(self.error_here(format!("expected an agent name, found {}", other.describe())));
                }
            }
            if self.eat(Tok::RBrace) {
                return Ok(set);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn arguments(&mut self) -> Result<(Formula, Formula), FormulaError> {
        self.expect(Tok::LParen)?;
        let phi = self.iff()?;
        self.expect(Tok::Comma)?;
        let psi = self.iff()?;
        self.expect(Tok::RParen)?;
        Ok((phi, psi))
    }

    fn primary(&mut self) -> Result<Formula, FormulaError> {
        let token = self.peek().clone();
        match token.tok {
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(ref word) if *self.peek_at(1) == Tok::LBrack => {
                self.bump();
                self.bump();
                if let Some(op) = StrategicOp::from_token(word) {
                    let a = self.coalition()?;
                    self.expect(Tok::Comma)?;
                    let b = self.coalition()?;
                    self.expect(Tok::RBrack)?;
                    let (phi, psi) = self.arguments()?;
                    return Ok(Formula::strategic(op, a, b, phi, psi));
                }
                let conditional = match word.as_str() {
                    "Cb" => true,
                    "Cd" => false,
                    _ => {
                        return Err(FormulaError::UnknownOperator {
                            name: word.clone(),
                            line: token.line,
                            column: token.column,
                        })
                    }
                };
                let a = self.coalition()?;
                self.expect(Tok::RBrack)?;
                let (phi, psi) = self.arguments()?;
                Ok(if conditional {
                    Derived::ConditionalBox(a, phi, psi).desugar()
                } else {
                    Derived::ConditionalDiamond(a, phi, psi).desugar()
                })
            }
            Tok::Ident(ref word) => {
                self.bump();
                Ok(match word.as_str() {
                    "true" => Formula::Top,
                    "false" => Derived::Bottom.desugar(),
                    _ => Formula::Atom(word.clone()),
                })
            }
            ref other => Err(self.error_here(format!("expected a formula, found {}", other.describe()))),
        }
    }
}

/// Parses concrete syntax into a core formula, desugaring derived forms.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let mut p = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let f = p.iff()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.error_here(format!("unexpected {}", p.peek().tok.describe())));
    }
    Ok(f)
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
    fn strategic_constructor() {
        assert_eq!(
            parse_formula("Oc[{a},{b}](p, q)").unwrap(),
            Formula::oc(AgentSet::of(&["a"]), AgentSet::of(&["b"]), p(), q())
        );
    }

    #[test]
    fn coalition_box_sugar() {
        assert_eq!(
            parse_formula("[{b}] q").unwrap(),
            Formula::oa(AgentSet::empty(), AgentSet::of(&["b"]), Formula::Top, q())
        );
    }

    #[test]
    fn implication_sugar() {
        assert_eq!(
            parse_formula("p -> q").unwrap(),
            Formula::not(Formula::and(p(), Formula::not(q())))
        );
    }

    #[test]
    fn precedence_and_associativity() {
        // ~ > & > | > ->, with -> associating to the right
        let f = parse_formula("~p & q | p -> q -> p").unwrap();
        let expected = Formula::implies(
            Formula::or(Formula::and(Formula::not(p()), q()), p()),
            Formula::implies(q(), p()),
        );
        assert_eq!(f, expected);
        assert_eq!(
            parse_formula("p & q & p").unwrap(),
            Formula::and(Formula::and(p(), q()), p())
        );
    }

    #[test]
    fn constants_and_empty_coalition() {
        assert_eq!(parse_formula("false").unwrap(), Formula::not(Formula::Top));
        assert_eq!(
            parse_formula("Ob[{}, {a, b}](true, false)").unwrap(),
            Formula::ob(
                AgentSet::empty(),
                AgentSet::of(&["a", "b"]),
                Formula::Top,
                Formula::bottom()
            )
        );
    }

    #[test]
    fn conditional_forms() {
        let a = AgentSet::of(&["a"]);
        assert_eq!(
            parse_formula("Cb[{a}](p, q)").unwrap(),
            Formula::ob(a.clone(), AgentSet::empty(), p(), q())
        );
        assert_eq!(
            parse_formula("Cd[{a}](p, q)").unwrap(),
            Derived::ConditionalDiamond(a, p(), q()).desugar()
        );
    }

    #[test]
    fn unknown_operator_name() {
        assert_eq!(
            parse_formula("p & Ox[{a},{b}](p, q)").unwrap_err(),
            FormulaError::UnknownOperator {
                name: "Ox".into(),
                line: 1,
                column: 5
            }
        );
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse_formula("Oc[{a},{b}](p q)") {
            Err(FormulaError::Syntax { line: 1, column: 15, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_formula("p &\n  $") {
            Err(FormulaError::Syntax { line: 2, column: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("(p").is_err());
        assert!(parse_formula("p q").is_err());
        assert!(parse_formula("").is_err());
    }

    #[test]
    fn render_parses_back() {
        for text in [
            "Oc[{a},{b}](p, q)",
            "~~p",
            "~true",
            "p & (q & ~p)",
            "Oa[{a,b},{}](~(p & q), Ob[{c},{a}](true, p))",
        ] {
            let f = parse_formula(text).unwrap();
            assert_eq!(f.render(), text);
            assert_eq!(parse_formula(&f.render()).unwrap(), f);
        }
    }
}
