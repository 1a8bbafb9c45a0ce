//! Rewrite rules and relative TRSs with their defined/constructor split.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{Symbol, Term};

/// A rewrite rule `lhs -> rhs`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub lhs: Term,
    pub rhs: Term,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("left-hand side of a rule must not be a variable")]
    VariableLhs,
    #[error("right-hand side variable `{0}` does not occur in the left-hand side")]
    FreeRhsVariable(String),
}

impl Rule {
    pub fn new(lhs: Term, rhs: Term) -> Result<Rule, RuleError> {
        if lhs.is_var() {
            return Err(RuleError::VariableLhs);
        }
        let lhs_vars = lhs.variables();
        for v in rhs.variables() {
            if !lhs_vars.contains(&v) {
                return Err(RuleError::FreeRhsVariable(v));
            }
        }
        Ok(Rule { lhs, rhs })
    }

    /// True iff some variable occurs more often in the right-hand side than
    /// in the left-hand side.
    pub fn is_duplicating(&self) -> bool {
        let lhs_counts = self.lhs.var_occurrences();
        self.rhs
            .var_occurrences()
            .into_iter()
            .any(|(v, n)| n > lhs_counts.get(&v).copied().unwrap_or(0))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// A pair of a main TRS and a base TRS over a shared signature, with the
/// signature split into defined symbols (roots of left-hand sides of main
/// and base rules) and constructors (all remaining symbols).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RelativeTrs {
    pub signature: BTreeSet<Symbol>,
    pub main: Vec<Rule>,
    pub base: Vec<Rule>,
    pub defined: BTreeSet<Symbol>,
    pub constructors: BTreeSet<Symbol>,
}

impl RelativeTrs {
    pub fn new(main: Vec<Rule>, base: Vec<Rule>) -> RelativeTrs {
        let mut signature = BTreeSet::new();
        for rule in main.iter().chain(base.iter()) {
            signature.extend(rule.lhs.symbols());
            signature.extend(rule.rhs.symbols());
        }
        let defined = defined_symbols(&main, &base);
        let constructors = signature.difference(&defined).cloned().collect();
        RelativeTrs {
            signature,
            main,
            base,
            defined,
            constructors,
        }
    }

    pub fn is_defined(&self, symbol: &Symbol) -> bool {
        self.defined.contains(symbol)
    }

    /// True iff no base rule is duplicating.
    pub fn base_is_non_duplicating(&self) -> bool {
        !self.base.iter().any(Rule::is_duplicating)
    }

    /// All rules, main first, each tagged with its component.
    pub fn all_rules(&self) -> impl Iterator<Item = (&Rule, bool)> {
        self.main
            .iter()
            .map(|r| (r, true))
            .chain(self.base.iter().map(|r| (r, false)))
    }
}

impl fmt::Display for RelativeTrs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for rule in &self.main {
            writeln!(f, "{} -> {}", rule.lhs, rule.rhs)?;
        }
        for rule in &self.base {
            writeln!(f, "{} ->= {}", rule.lhs, rule.rhs)?;
        }
        Ok(())
    }
}

/// The defined symbols of a pair of rule sets: exactly the root symbols of
/// all left-hand sides.
pub fn defined_symbols(main: &[Rule], base: &[Rule]) -> BTreeSet<Symbol> {
    main.iter()
        .chain(base.iter())
        .filter_map(|rule| rule.lhs.root().cloned())
        .collect()
}

/// True iff no defined symbol of `main` occurs in any right-hand side of
/// `base`.
pub fn dominates(main: &[Rule], base: &[Rule]) -> bool {
    let main_defined: BTreeSet<Symbol> = main
        .iter()
        .filter_map(|rule| rule.lhs.root().cloned())
        .collect();
    base.iter()
        .all(|rule| rule.rhs.symbols().is_disjoint(&main_defined))
}
