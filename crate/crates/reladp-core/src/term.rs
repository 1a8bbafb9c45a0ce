//! First-order terms over a signature, positions, substitutions, matching
//! and unification.
//!
//! Terms are immutable values with structural equality.  Positions are
//! sequences of 1-based child indices; the empty sequence is the root.  The
//! derived `Ord` on positions is the lexicographic order with shorter
//! prefixes first, which is the order every position-sorted collection in
//! this crate relies on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// A function symbol: a name together with a fixed arity.
///
/// Sharped (annotated) symbols are ordinary symbols whose name carries a
/// trailing `#`.  The input grammar forbids `#` in identifiers, so sharping
/// can never collide with a parsed symbol.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: impl Into<String>, arity: usize) -> Self {
        Symbol {
            name: name.into(),
            arity,
        }
    }

    /// The sharped variant `f#` of this symbol (same arity).
    pub fn sharped(&self) -> Symbol {
        Symbol {
            name: format!("{}#", self.name),
            arity: self.arity,
        }
    }

    pub fn is_sharped(&self) -> bool {
        self.name.ends_with('#')
    }

    /// Removes a trailing `#`, if any.
    pub fn unsharped(&self) -> Symbol {
        match self.name.strip_suffix('#') {
            Some(base) => Symbol::new(base, self.arity),
            None => self.clone(),
        }
    }

    /// Print name for proofs.  Sharped symbols show as capital initials:
    /// `f#` prints as `F`, `minus#` as `M`, `divL#` as `DL`.  Names that do
    /// not start with a lowercase letter keep the explicit `#` suffix.
    pub fn display_name(&self) -> String {
        match self.name.strip_suffix('#') {
            Some(base) if base.starts_with(|c: char| c.is_ascii_lowercase()) => {
                let mut out = String::new();
                out.push(base.chars().next().unwrap().to_ascii_uppercase());
                out.extend(base.chars().skip(1).filter(|c| c.is_ascii_uppercase()));
                out
            }
            _ => self.name.clone(),
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name())
    }
}

/// A position in a term: a sequence of 1-based child indices, empty = root.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// `self.i`, descending into the i-th child (1-based).
    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    /// Concatenation `self.other`.
    pub fn concat(&self, other: &Position) -> Position {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Position(v)
    }

    /// True iff `self` is a (non-strict) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// The suffix `tau` with `other = self.tau`, if `self` is a prefix.
    pub fn strip_prefix(&self, other: &Position) -> Option<Position> {
        if self.is_prefix_of(other) {
            Some(Position(other.0[self.0.len()..].to_vec()))
        } else {
            None
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Debug for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Self {
        Position(v)
    }
}

/// A first-order term: a variable or a symbol applied to argument terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn app(symbol: Symbol, args: Vec<Term>) -> Term {
        debug_assert_eq!(symbol.arity, args.len(), "arity mismatch for {symbol}");
        Term::App(symbol, args)
    }

    /// Nullary application.
    pub fn constant(name: impl Into<String>) -> Term {
        Term::App(Symbol::new(name, 0), Vec::new())
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn root(&self) -> Option<&Symbol> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    /// The subterm at `pos`, or `None` if the position does not exist.
    pub fn subterm_at(&self, pos: &Position) -> Option<&Term> {
        let mut cur = self;
        for &i in &pos.0 {
            match cur {
                Term::App(_, args) if i >= 1 && i <= args.len() => cur = &args[i - 1],
                _ => return None,
            }
        }
        Some(cur)
    }

    /// Replaces the subterm at `pos` by `replacement`.  Panics if the
    /// position does not exist.
    pub fn replace_at(&self, pos: &Position, replacement: Term) -> Term {
        fn go(t: &Term, path: &[usize], replacement: Term) -> Term {
            match path {
                [] => replacement,
                [i, rest @ ..] => match t {
                    Term::App(f, args) => {
                        let mut new_args = args.clone();
                        new_args[i - 1] = go(&args[i - 1], rest, replacement);
                        Term::App(f.clone(), new_args)
                    }
                    Term::Var(_) => panic!("position descends below a variable"),
                },
            }
        }
        go(self, &pos.0, replacement)
    }

    /// All positions of the term in lexicographic order.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        fn go(t: &Term, here: Position, out: &mut Vec<Position>) {
            out.push(here.clone());
            if let Term::App(_, args) = t {
                for (i, arg) in args.iter().enumerate() {
                    go(arg, here.child(i + 1), out);
                }
            }
        }
        go(self, Position::root(), &mut out);
        out
    }

    /// Positions of variable occurrences, in lexicographic order.
    pub fn var_positions(&self) -> Vec<Position> {
        self.positions()
            .into_iter()
            .filter(|p| matches!(self.subterm_at(p), Some(Term::Var(_))))
            .collect()
    }

    /// Positions whose symbol satisfies `pred`, in lexicographic order.
    pub fn positions_where(&self, mut pred: impl FnMut(&Symbol) -> bool) -> Vec<Position> {
        self.positions()
            .into_iter()
            .filter(|p| match self.subterm_at(p) {
                Some(Term::App(f, _)) => pred(f),
                _ => false,
            })
            .collect()
    }

    /// The multiset of variable occurrences, as a name -> count map.
    pub fn var_occurrences(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        fn go(t: &Term, counts: &mut BTreeMap<String, usize>) {
            match t {
                Term::Var(x) => *counts.entry(x.clone()).or_insert(0) += 1,
                Term::App(_, args) => args.iter().for_each(|a| go(a, counts)),
            }
        }
        go(self, &mut counts);
        counts
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.var_occurrences().into_keys().collect()
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// All symbols occurring in the term.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        fn go(t: &Term, out: &mut BTreeSet<Symbol>) {
            if let Term::App(f, args) = t {
                out.insert(f.clone());
                args.iter().for_each(|a| go(a, out));
            }
        }
        go(self, &mut out);
        out
    }

    /// Number of symbol and variable occurrences.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn contains_var(&self, name: &str) -> bool {
        match self {
            Term::Var(x) => x == name,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(name)),
        }
    }

    /// The term with every variable `x` renamed to `x` + `suffix`.
    pub fn rename_vars(&self, suffix: &str) -> Term {
        match self {
            Term::Var(x) => Term::Var(format!("{x}{suffix}")),
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(|a| a.rename_vars(suffix)).collect(),
            ),
        }
    }

    /// The same term with the root symbol sharped.  Panics on variables.
    pub fn sharped(&self) -> Term {
        match self {
            Term::App(f, args) => Term::App(f.sharped(), args.clone()),
            Term::Var(_) => panic!("cannot sharp a variable"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::App(sym, args) => {
                f.write_str(&sym.display_name())?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, arg) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{arg}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A finite mapping from variable names to terms.  Application is
/// simultaneous: inserted terms are not substituted into again.
#[derive(Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Substitution(pub BTreeMap<String, Term>);

impl Substitution {
    pub fn new() -> Self {
        Substitution(BTreeMap::new())
    }

    pub fn singleton(var: impl Into<String>, t: Term) -> Self {
        let mut m = BTreeMap::new();
        m.insert(var.into(), t);
        Substitution(m)
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    pub fn insert(&mut self, var: impl Into<String>, t: Term) {
        self.0.insert(var.into(), t);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(x) => self.0.get(x).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => {
                Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    /// `self` composed with `{var -> t}`: every binding of `self` has the new
    /// binding applied to its range, then the new binding is added.
    fn compose_binding(&mut self, var: &str, t: &Term) {
        let single = Substitution::singleton(var, t.clone());
        for range in self.0.values_mut() {
            *range = single.apply(range);
        }
        self.0.insert(var.to_string(), t.clone());
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, t)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x} -> {t}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Matches `pattern` against `subject`: returns `sigma` with
/// `pattern * sigma == subject`, or `None`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    if match_into(pattern, subject, &mut sigma) {
        Some(sigma)
    } else {
        None
    }
}

fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    match pattern {
        Term::Var(x) => match sigma.get(x) {
            Some(bound) => bound == subject,
            None => {
                sigma.insert(x.clone(), subject.clone());
                true
            }
        },
        Term::App(f, args) => match subject {
            Term::App(g, sargs) if f == g => args
                .iter()
                .zip(sargs.iter())
                .all(|(p, s)| match_into(p, s, sigma)),
            _ => false,
        },
    }
}

/// Computes an idempotent most general unifier of `s` and `t`, or `None`.
///
/// Callers that need the terms renamed apart must rename before calling.
pub fn unify_terms(s: &Term, t: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    let mut work = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = work.pop() {
        let a = sigma.apply(&a);
        let b = sigma.apply(&b);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), other) | (other, Term::Var(x)) => {
                if other.contains_var(&x) {
                    return None;
                }
                sigma.compose_binding(&x, &other);
            }
            (Term::App(f, fargs), Term::App(g, gargs)) => {
                if f != g {
                    return None;
                }
                work.extend(fargs.into_iter().zip(gargs));
            }
        }
    }
    Some(sigma)
}
