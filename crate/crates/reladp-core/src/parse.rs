//! Parser and canonical printer for TPDB-style `.trs` files with relative
//! rules.
//!
//! The input is a sequence of parenthesized blocks.  `(VAR x y ...)`
//! declares variables, `(RULES ...)` holds the rules; any other block (such
//! as `(COMMENT ...)`) is skipped.  Inside the rules block, `l -> r` is a
//! main rule and `l ->= r` a base rule.  Identifiers consist of
//! alphanumerics plus `_` and `'`; only identifiers declared in `(VAR ...)`
//! are variables, every other identifier of arity 0 is a constant.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::term::{Symbol, Term};
use crate::trs::{RelativeTrs, Rule, RuleError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("symbol `{name}` used with arities {first} and {second}")]
    ArityConflict {
        name: String,
        first: usize,
        second: usize,
    },
    #[error("rule `{rule}`: {source}")]
    InvalidRule {
        rule: String,
        #[source]
        source: RuleError,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    Comma,
    Arrow,
    ArrowEq,
    Ident(String),
}

#[derive(Debug, Clone)]
struct Spanned {
    token: Token,
    line: usize,
    column: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn tokenize(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut tokens = Vec::new();
    let mut line = 1usize;
    let mut column = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcolumn) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        let token = match c {
            '(' => {
                bump(&mut chars);
                Token::LParen
            }
            ')' => {
                bump(&mut chars);
                Token::RParen
            }
            ',' => {
                bump(&mut chars);
                Token::Comma
            }
            '-' => {
                bump(&mut chars);
                if chars.peek() != Some(&'>') {
                    Token::Ident("-".into())
                } else {
                    bump(&mut chars);
                    if chars.peek() == Some(&'=') {
                        bump(&mut chars);
                        Token::ArrowEq
                    } else {
                        Token::Arrow
                    }
                }
            }
            c if is_ident_char(c) => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if is_ident_char(c) {
                        name.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                Token::Ident(name)
            }
            // Anything else (punctuation in COMMENT blocks and the like)
            // passes through as an opaque token; it only errors if it shows
            // up where a rule is expected.
            other => {
                bump(&mut chars);
                Token::Ident(other.to_string())
            }
        };
        tokens.push(Spanned {
            token,
            line: tline,
            column: tcolumn,
        });
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Spanned>,
    index: usize,
    variables: Vec<String>,
    arities: BTreeMap<String, usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.tokens.get(self.index)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.tokens.get(self.index).cloned();
        if t.is_some() {
            self.index += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>) -> ParseError {
        let (line, column) = self
            .peek()
            .map(|s| (s.line, s.column))
            .unwrap_or_else(|| match self.tokens.last() {
                Some(s) => (s.line, s.column + 1),
                None => (1, 1),
            });
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(s) if s.token == token => {
                self.index += 1;
                Ok(())
            }
            _ => Err(self.error_here(format!("expected {what}"))),
        }
    }

    fn record_arity(&mut self, name: &str, arity: usize) -> Result<(), ParseError> {
        match self.arities.get(name) {
            Some(&known) if known != arity => Err(ParseError::ArityConflict {
                name: name.to_string(),
                first: known,
                second: arity,
            }),
            _ => {
                self.arities.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    fn parse_term(&mut self) -> Result<Term, ParseError> {
        let name = match self.peek() {
            Some(Spanned {
                token: Token::Ident(name),
                ..
            }) if name.chars().all(is_ident_char) => {
                let name = name.clone();
                self.index += 1;
                name
            }
            _ => return Err(self.error_here("expected a term")),
        };
        let mut args = Vec::new();
        if matches!(
            self.peek(),
            Some(Spanned {
                token: Token::LParen,
                ..
            })
        ) {
            self.next();
            loop {
                args.push(self.parse_term()?);
                match self.peek().map(|s| s.token.clone()) {
                    Some(Token::Comma) => {
                        self.next();
                    }
                    Some(Token::RParen) => {
                        self.next();
                        break;
                    }
                    _ => return Err(self.error_here("expected `,` or `)` in argument list")),
                }
            }
        }
        if self.variables.contains(&name) {
            if !args.is_empty() {
                return Err(self.error_here(format!("variable `{name}` applied to arguments")));
            }
            return Ok(Term::Var(name));
        }
        self.record_arity(&name, args.len())?;
        Ok(Term::App(Symbol::new(name, args.len()), args))
    }
}

/// Parses a relative TRS from TPDB-style text.
pub fn parse_relative_trs(text: &str) -> Result<RelativeTrs, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        index: 0,
        variables: Vec::new(),
        arities: BTreeMap::new(),
    };

    // First pass over the blocks collects the variable declarations so that
    // rules may precede the VAR block.
    let mut idx = 0;
    while idx < parser.tokens.len() {
        if parser.tokens[idx].token == Token::LParen {
            if let Some(Spanned {
                token: Token::Ident(name),
                ..
            }) = parser.tokens.get(idx + 1)
            {
                if name == "VAR" {
                    let mut j = idx + 2;
                    while let Some(spanned) = parser.tokens.get(j) {
                        match &spanned.token {
                            Token::Ident(v) if v.chars().all(is_ident_char) => {
                                parser.variables.push(v.clone())
                            }
                            Token::RParen => break,
                            _ => {
                                return Err(ParseError::Syntax {
                                    line: spanned.line,
                                    column: spanned.column,
                                    message: "expected identifier in VAR block".into(),
                                })
                            }
                        }
                        j += 1;
                    }
                }
            }
        }
        idx += 1;
    }

    let mut main = Vec::new();
    let mut base = Vec::new();
    let mut saw_rules = false;
    while parser.peek().is_some() {
        parser.expect(Token::LParen, "`(` starting a block")?;
        let block = match parser.next() {
            Some(Spanned {
                token: Token::Ident(name),
                ..
            }) => name,
            _ => {
                parser.index = parser.index.saturating_sub(1);
                return Err(parser.error_here("expected block name"));
            }
        };
        match block.as_str() {
            "VAR" => {
                // Already collected; skip to the closing paren.
                while let Some(s) = parser.peek() {
                    if s.token == Token::RParen {
                        break;
                    }
                    parser.next();
                }
                parser.expect(Token::RParen, "`)` closing VAR block")?;
            }
            "RULES" => {
                saw_rules = true;
                loop {
                    match parser.peek().map(|s| s.token.clone()) {
                        Some(Token::RParen) => {
                            parser.next();
                            break;
                        }
                        None => return Err(parser.error_here("unterminated RULES block")),
                        _ => {}
                    }
                    let lhs = parser.parse_term()?;
                    let is_base = match parser.peek().map(|s| s.token.clone()) {
                        Some(Token::Arrow) => {
                            parser.next();
                            false
                        }
                        Some(Token::ArrowEq) => {
                            parser.next();
                            true
                        }
                        _ => return Err(parser.error_here("expected `->` or `->=`")),
                    };
                    let rhs = parser.parse_term()?;
                    let rule =
                        Rule::new(lhs.clone(), rhs.clone()).map_err(|source| {
                            ParseError::InvalidRule {
                                rule: format!("{lhs} -> {rhs}"),
                                source,
                            }
                        })?;
                    if is_base {
                        base.push(rule);
                    } else {
                        main.push(rule);
                    }
                }
            }
            _ => {
                // Unknown block (COMMENT etc.): skip balanced parens.
                let mut depth = 1usize;
                while depth > 0 {
                    match parser.next().map(|s| s.token) {
                        Some(Token::LParen) => depth += 1,
                        Some(Token::RParen) => depth -= 1,
                        Some(_) => {}
                        None => return Err(parser.error_here("unterminated block")),
                    }
                }
            }
        }
    }
    if !saw_rules {
        return Err(ParseError::Syntax {
            line: 1,
            column: 1,
            message: "missing (RULES ...) block".into(),
        });
    }
    Ok(RelativeTrs::new(main, base))
}

/// Canonical printer: variables first, then one rule per line.
/// `parse(print(trs))` reproduces `trs` exactly.
pub fn print_relative_trs(trs: &RelativeTrs) -> String {
    let mut vars = std::collections::BTreeSet::new();
    for (rule, _) in trs.all_rules() {
        vars.extend(rule.lhs.variables());
        vars.extend(rule.rhs.variables());
    }
    let mut out = String::new();
    if !vars.is_empty() {
        out.push_str("(VAR");
        for v in &vars {
            out.push(' ');
            out.push_str(v);
        }
        out.push_str(")\n");
    }
    out.push_str("(RULES\n");
    for rule in &trs.main {
        out.push_str(&format!("  {} -> {}\n", PlainTerm(&rule.lhs), PlainTerm(&rule.rhs)));
    }
    for rule in &trs.base {
        out.push_str(&format!("  {} ->= {}\n", PlainTerm(&rule.lhs), PlainTerm(&rule.rhs)));
    }
    out.push_str(")\n");
    out
}

/// Prints a term with raw symbol names (no uppercase convention), so that
/// the output parses back to the identical term.
struct PlainTerm<'a>(&'a Term);

impl fmt::Display for PlainTerm<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Term::Var(x) => f.write_str(x),
            Term::App(sym, args) => {
                f.write_str(&sym.name)?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, arg) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{}", PlainTerm(arg))?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// Small fixtures shared by the unit and integration test suites: the
/// standard example systems and a term parser with test-friendly
/// conventions.
pub mod fixtures {
    use super::*;

    /// Division of a number by every element of a list.
    pub const DIVL: &str = "(VAR x y xs)\n(RULES\n  minus(x,0) -> x\n  minus(s(x),s(y)) -> minus(x,y)\n  div(x,s(0)) -> x\n  div(s(x),s(y)) -> s(div(minus(x,y),s(y)))\n  divL(x,nil) -> x\n  divL(x,cons(y,xs)) -> divL(div(x,y),xs)\n)";

    /// `DIVL` with a base rule that swaps adjacent list elements.
    pub const DIVL_MSET: &str = "(VAR x y xs zs)\n(RULES\n  minus(x,0) -> x\n  minus(s(x),s(y)) -> minus(x,y)\n  div(x,s(0)) -> x\n  div(s(x),s(y)) -> s(div(minus(x,y),s(y)))\n  divL(x,nil) -> x\n  divL(x,cons(y,xs)) -> divL(div(x,y),xs)\n  cons(x,cons(y,zs)) ->= cons(y,cons(x,zs))\n)";

    /// `DIVL` with the swap guarded under `divL`, so the main TRS no longer
    /// dominates the base TRS.
    pub const DIVL_MSET2: &str = "(VAR x y z xs zs)\n(RULES\n  minus(x,0) -> x\n  minus(s(x),s(y)) -> minus(x,y)\n  div(x,s(0)) -> x\n  div(s(x),s(y)) -> s(div(minus(x,y),s(y)))\n  divL(x,nil) -> x\n  divL(x,cons(y,xs)) -> divL(div(x,y),xs)\n  divL(z,cons(x,cons(y,zs))) ->= divL(z,cons(y,cons(x,zs)))\n)";

    /// Redex-duplicating base rule; not relatively terminating.
    pub const R1: &str = "(VAR x)(RULES a -> b f(x) ->= d(f(x),x))";

    /// Redex-creating base rule, created redex on a parallel position.
    pub const R2: &str = "(RULES a -> b f ->= d(f,a))";

    /// Redex-creating base rule, created redex above the base redex.
    pub const R3: &str = "(VAR x)(RULES a(x) -> b(x) f ->= a(f))";

    /// Ordinary infinite interplay between main and base.
    pub const R4: &str = "(RULES a -> b b ->= a)";

    /// Redex-creating but terminating variant of `R2`.
    pub const CREATING_TERMINATING: &str = "(VAR y)(RULES a -> b f(s(y)) ->= d(f(y),a))";

    /// Parses a single term.  Identifiers in `x y z w v u xs ys zs`
    /// (optionally primed) are variables; everything else is a function
    /// symbol with the arity it is used at.  Uppercase single letters parse
    /// as sharped symbols, matching the display convention.
    pub fn term(text: &str) -> Term {
        fn is_test_var(name: &str) -> bool {
            let base = name.trim_end_matches('\'');
            matches!(base, "x" | "y" | "z" | "w" | "v" | "u" | "xs" | "ys" | "zs")
        }
        fn convert(t: Term) -> Term {
            match t {
                Term::Var(x) => Term::Var(x),
                Term::App(sym, args) => {
                    let name = &sym.name;
                    let sym = if name.len() == 1 && name.chars().all(|c| c.is_ascii_uppercase()) {
                        Symbol::new(format!("{}#", name.to_ascii_lowercase()), sym.arity)
                    } else {
                        sym
                    };
                    Term::App(sym, args.into_iter().map(convert).collect())
                }
            }
        }
        let tokens = tokenize(text).expect("tokenize test term");
        let mut parser = Parser {
            tokens,
            index: 0,
            variables: Vec::new(),
            arities: BTreeMap::new(),
        };
        for tok in &parser.tokens {
            if let Token::Ident(name) = &tok.token {
                if is_test_var(name) && !parser.variables.contains(name) {
                    parser.variables.push(name.clone());
                }
            }
        }
        let term = parser.parse_term().expect("parse test term");
        assert!(parser.peek().is_none(), "trailing input in test term");
        convert(term)
    }
}
