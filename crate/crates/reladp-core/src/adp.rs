//! Annotated terms and annotated dependency pairs (ADPs).
//!
//! An annotated term is a plain term plus an ordered set of positions whose
//! symbols are marked.  Keeping the marks outside the tree means matching
//! and unification work unchanged on the plain part and removing all
//! annotations is free.  Sharped symbols like `f#` only materialize at the
//! printing and constraint-generation boundaries.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{Position, Symbol, Term};
use crate::trs::{RelativeTrs, Rule};

/// A term with an ordered set of annotated positions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AnnotatedTerm {
    pub plain: Term,
    pub annotations: BTreeSet<Position>,
}

impl AnnotatedTerm {
    /// A term without annotations.
    pub fn flat(plain: Term) -> AnnotatedTerm {
        AnnotatedTerm {
            plain,
            annotations: BTreeSet::new(),
        }
    }

    /// Annotates exactly `annotations`; every position must exist in the
    /// term and carry a function symbol.
    pub fn new(plain: Term, annotations: BTreeSet<Position>) -> AnnotatedTerm {
        debug_assert!(
            annotations
                .iter()
                .all(|p| matches!(plain.subterm_at(p), Some(Term::App(..)))),
            "annotation positions must name function symbols"
        );
        AnnotatedTerm { plain, annotations }
    }

    pub fn is_flat(&self) -> bool {
        self.annotations.is_empty()
    }

    /// The same term with all annotations removed.
    pub fn flatten(&self) -> AnnotatedTerm {
        AnnotatedTerm::flat(self.plain.clone())
    }

    /// For each annotated position `pi` the pair `(pi, plain subterm at
    /// pi)`, ordered lexicographically by position.
    pub fn annotated_subterms(&self) -> Vec<(Position, Term)> {
        self.annotations
            .iter()
            .map(|p| {
                let sub = self
                    .plain
                    .subterm_at(p)
                    .expect("annotation position exists")
                    .clone();
                (p.clone(), sub)
            })
            .collect()
    }
}

impl fmt::Display for AnnotatedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(
            t: &Term,
            here: &Position,
            annotations: &BTreeSet<Position>,
            f: &mut fmt::Formatter<'_>,
        ) -> fmt::Result {
            match t {
                Term::Var(x) => f.write_str(x),
                Term::App(sym, args) => {
                    let shown = if annotations.contains(here) {
                        sym.sharped().display_name()
                    } else {
                        sym.display_name()
                    };
                    f.write_str(&shown)?;
                    if !args.is_empty() {
                        write!(f, "(")?;
                        for (i, arg) in args.iter().enumerate() {
                            if i > 0 {
                                write!(f, ",")?;
                            }
                            go(arg, &here.child(i + 1), annotations, f)?;
                        }
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(&self.plain, &Position::root(), &self.annotations, f)
    }
}

impl fmt::Debug for AnnotatedTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// The component an ADP currently belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Component {
    Main,
    Base,
}

/// An annotated dependency pair: a rewrite rule whose right-hand side
/// carries annotations.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Adp {
    pub lhs: Term,
    pub rhs: AnnotatedTerm,
    pub origin: Component,
}

impl Adp {
    pub fn new(lhs: Term, rhs: AnnotatedTerm, origin: Component) -> Adp {
        Adp { lhs, rhs, origin }
    }

    /// The underlying plain rule.
    pub fn rule(&self) -> Rule {
        Rule {
            lhs: self.lhs.clone(),
            rhs: self.rhs.plain.clone(),
        }
    }

    /// The ADP with all annotations removed.
    pub fn flatten(&self) -> Adp {
        Adp {
            lhs: self.lhs.clone(),
            rhs: self.rhs.flatten(),
            origin: self.origin,
        }
    }

    pub fn annotation_count(&self) -> usize {
        self.rhs.annotations.len()
    }

    /// The sharped left-hand side `l#`.
    pub fn sharped_lhs(&self) -> Term {
        self.lhs.sharped()
    }
}

impl fmt::Display for Adp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for Adp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// An ADP problem: the main ADPs and the base ADPs.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AdpProblem {
    pub main: Vec<Adp>,
    pub base: Vec<Adp>,
}

impl AdpProblem {
    pub fn new(mut main: Vec<Adp>, mut base: Vec<Adp>) -> AdpProblem {
        for adp in &mut main {
            adp.origin = Component::Main;
        }
        for adp in &mut base {
            adp.origin = Component::Base;
        }
        dedup_in_order(&mut main);
        dedup_in_order(&mut base);
        AdpProblem { main, base }
    }

    pub fn all(&self) -> impl Iterator<Item = &Adp> {
        self.main.iter().chain(self.base.iter())
    }

    /// The plain rules underlying all ADPs, main first.
    pub fn flat_rules(&self) -> Vec<Rule> {
        let mut rules: Vec<Rule> = self.all().map(Adp::rule).collect();
        dedup_in_order(&mut rules);
        rules
    }

    pub fn has_annotations(&self) -> bool {
        self.all().any(|adp| !adp.rhs.is_flat())
    }

    /// Total number of annotations over all ADPs.
    pub fn annotation_count(&self) -> usize {
        self.all().map(Adp::annotation_count).sum()
    }

    /// Root symbols of all left-hand sides.
    pub fn defined_symbols(&self) -> BTreeSet<Symbol> {
        self.all()
            .filter_map(|adp| adp.lhs.root().cloned())
            .collect()
    }
}

impl fmt::Display for AdpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({{")?;
        for (i, adp) in self.main.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{adp}")?;
        }
        write!(f, "}}, {{")?;
        for (i, adp) in self.base.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{adp}")?;
        }
        write!(f, "}})")
    }
}

impl fmt::Debug for AdpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn dedup_in_order<T: Clone + Ord>(items: &mut Vec<T>) {
    let mut seen = BTreeSet::new();
    items.retain(|item| seen.insert(item.clone()));
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdpError {
    #[error("base rule `{0}` is duplicating; preprocess before building ADPs")]
    DuplicatingBaseRule(String),
    #[error("right-hand side carries {0} annotations, at most 2 are supported here")]
    TooManyAnnotations(usize),
}

/// Builds the canonical ADP problem of a relative TRS: each main rule
/// contributes one ADP per defined-symbol position of its right-hand side
/// (or its unannotated self if there is none), each base rule one ADP per
/// two-element set of defined positions (falling back to one or zero marks).
/// Only subset-maximal annotation sets are kept.
pub fn canonical_adp_problem(trs: &RelativeTrs) -> Result<AdpProblem, AdpError> {
    if let Some(dup) = trs.base.iter().find(|r| r.is_duplicating()) {
        return Err(AdpError::DuplicatingBaseRule(dup.to_string()));
    }
    let main = trs
        .main
        .iter()
        .flat_map(|rule| canonical_adps_of_rule(rule, trs, 1, Component::Main))
        .collect();
    let base = trs
        .base
        .iter()
        .flat_map(|rule| canonical_adps_of_rule(rule, trs, 2, Component::Base))
        .collect();
    Ok(AdpProblem::new(main, base))
}

fn canonical_adps_of_rule(
    rule: &Rule,
    trs: &RelativeTrs,
    max_marks: usize,
    origin: Component,
) -> Vec<Adp> {
    let defined_positions: Vec<Position> =
        rule.rhs.positions_where(|sym| trs.is_defined(sym));
    let sets = maximal_subsets(&defined_positions, max_marks);
    sets.into_iter()
        .map(|set| {
            Adp::new(
                rule.lhs.clone(),
                AnnotatedTerm::new(rule.rhs.clone(), set),
                origin,
            )
        })
        .collect()
}

/// All subsets of `positions` of size at most `k` that are subset-maximal
/// within that bound: the full set if it fits, otherwise all k-element
/// subsets, in lexicographic order.
fn maximal_subsets(positions: &[Position], k: usize) -> Vec<BTreeSet<Position>> {
    if positions.len() <= k {
        return vec![positions.iter().cloned().collect()];
    }
    let mut out = Vec::new();
    let mut indices: Vec<usize> = (0..k).collect();
    loop {
        out.push(indices.iter().map(|&i| positions[i].clone()).collect());
        // Advance the combination.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if indices[i] != i + positions.len() - k {
                indices[i] += 1;
                for j in i + 1..k {
                    indices[j] = indices[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Removes all annotations from a set of ADPs.
pub fn flatten_all(adps: &[Adp]) -> Vec<Adp> {
    adps.iter().map(Adp::flatten).collect()
}

/// A right-hand side bundled for the reduction-pair comparison `l# vs
/// ann(r)`: nothing, one sharped subterm, or two combined by the compound
/// symbol `c2` (interpreted as addition; the empty compound `c0` is zero).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum CompoundTerm {
    /// `c0`: no annotated subterm.
    C0,
    /// A single sharped subterm `t#`.
    One(Term),
    /// `c2(s#, t#)` with the first component lexicographically smaller.
    Two(Term, Term),
}

impl fmt::Display for CompoundTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompoundTerm::C0 => f.write_str("c0"),
            CompoundTerm::One(t) => write!(f, "{t}"),
            CompoundTerm::Two(a, b) => write!(f, "c2({a},{b})"),
        }
    }
}

/// `ann(r)` for a right-hand side with at most two annotations: `c0` if
/// there are none, the sharped subterm if there is one, and
/// `c2(r1#, r2#)` with positions ordered lexicographically if there are two.
pub fn ann_of_rhs(rhs: &AnnotatedTerm) -> Result<CompoundTerm, AdpError> {
    let subterms = rhs.annotated_subterms();
    match subterms.as_slice() {
        [] => Ok(CompoundTerm::C0),
        [(_, t)] => Ok(CompoundTerm::One(t.sharped())),
        [(_, t1), (_, t2)] => Ok(CompoundTerm::Two(t1.sharped(), t2.sharped())),
        more => Err(AdpError::TooManyAnnotations(more.len())),
    }
}

/// Splits every ADP into one single-annotation ADP per annotated position;
/// ADPs without annotations are dropped.
pub fn split_adps(adps: &[Adp]) -> Vec<Adp> {
    let mut out = Vec::new();
    for adp in adps {
        for pos in &adp.rhs.annotations {
            out.push(Adp::new(
                adp.lhs.clone(),
                AnnotatedTerm::new(adp.rhs.plain.clone(), BTreeSet::from([pos.clone()])),
                adp.origin,
            ));
        }
    }
    out
}
