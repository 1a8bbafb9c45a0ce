//! Linear polynomial interpretations over the naturals.
//!
//! Every symbol is mapped to a template `c0 + c1*x1 + ... + cn*xn` with
//! natural coefficients.  Interpreting a term yields a linear polynomial in
//! the term's variables.  Comparison uses the coefficient-wise criterion:
//! `p >= q` holds for all natural assignments if every coefficient of
//! `p - q` is nonnegative, and `p > q` additionally needs a constant gap of
//! at least one.  This is sufficient, not complete.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adp::CompoundTerm;
use crate::term::{Symbol, Term};

/// A linear polynomial `constant + sum coeff_v * v` over term variables.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct LinearPoly {
    pub constant: u64,
    pub coeffs: BTreeMap<String, u64>,
}

impl LinearPoly {
    pub fn constant(c: u64) -> LinearPoly {
        LinearPoly {
            constant: c,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn variable(name: impl Into<String>) -> LinearPoly {
        LinearPoly {
            constant: 0,
            coeffs: BTreeMap::from([(name.into(), 1)]),
        }
    }

    pub fn coeff(&self, var: &str) -> u64 {
        self.coeffs.get(var).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &LinearPoly) -> LinearPoly {
        let mut out = self.clone();
        out.constant += other.constant;
        for (v, c) in &other.coeffs {
            *out.coeffs.entry(v.clone()).or_insert(0) += c;
        }
        out.normalize()
    }

    pub fn scale(&self, factor: u64) -> LinearPoly {
        let mut out = LinearPoly {
            constant: self.constant * factor,
            coeffs: self
                .coeffs
                .iter()
                .map(|(v, c)| (v.clone(), c * factor))
                .collect(),
        };
        out = out.normalize();
        out
    }

    fn normalize(mut self) -> LinearPoly {
        self.coeffs.retain(|_, c| *c != 0);
        self
    }

    /// Evaluates the polynomial under an assignment of naturals to
    /// variables; unassigned variables count as zero.
    pub fn eval(&self, assignment: &BTreeMap<String, u64>) -> u64 {
        self.constant
            + self
                .coeffs
                .iter()
                .map(|(v, c)| c * assignment.get(v).copied().unwrap_or(0))
                .sum::<u64>()
    }
}

impl fmt::Display for LinearPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.constant != 0 || self.coeffs.is_empty() {
            parts.push(self.constant.to_string());
        }
        for (v, c) in &self.coeffs {
            if *c == 1 {
                parts.push(v.clone());
            } else {
                parts.push(format!("{c}*{v}"));
            }
        }
        f.write_str(&parts.join(" + "))
    }
}

/// Coefficient-wise comparison: `p >= q` under every natural assignment.
pub fn weakly_geq(p: &LinearPoly, q: &LinearPoly) -> bool {
    if p.constant < q.constant {
        return false;
    }
    q.coeffs.iter().all(|(v, c)| p.coeff(v) >= *c)
}

/// Coefficient-wise strict comparison: `p > q` under every natural
/// assignment, via a constant gap of at least one.
pub fn strictly_gt(p: &LinearPoly, q: &LinearPoly) -> bool {
    p.constant > q.constant && q.coeffs.iter().all(|(v, c)| p.coeff(v) >= *c)
}

/// The interpretation template of one symbol: `constant + sum
/// arg_coeffs[i] * x_{i+1}`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct TemplatePoly {
    pub constant: u64,
    pub arg_coeffs: Vec<u64>,
}

impl TemplatePoly {
    pub fn new(constant: u64, arg_coeffs: Vec<u64>) -> TemplatePoly {
        TemplatePoly {
            constant,
            arg_coeffs,
        }
    }

    /// Projection to the i-th argument (0-based), zero elsewhere.
    pub fn projection(arity: usize, index: usize) -> TemplatePoly {
        let mut coeffs = vec![0; arity];
        coeffs[index] = 1;
        TemplatePoly::new(0, coeffs)
    }
}

impl fmt::Display for TemplatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.constant != 0 || self.arg_coeffs.iter().all(|c| *c == 0) {
            parts.push(self.constant.to_string());
        }
        for (i, c) in self.arg_coeffs.iter().enumerate() {
            match c {
                0 => {}
                1 => parts.push(format!("x{}", i + 1)),
                c => parts.push(format!("{c}*x{}", i + 1)),
            }
        }
        f.write_str(&parts.join(" + "))
    }
}

/// A linear polynomial interpretation: one template per symbol (including
/// sharped symbols).  The compound symbols are fixed: `c0` is zero and `c2`
/// adds its arguments, which makes every induced reduction pair
/// com-monotonic and com-invariant.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct PolyInterpretation {
    #[serde(with = "symbol_map")]
    pub templates: BTreeMap<Symbol, TemplatePoly>,
}

/// Symbols are structured keys, so the template map serializes as an entry
/// list.
mod symbol_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<Symbol, TemplatePoly>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        let entries: Vec<(&Symbol, &TemplatePoly)> = map.iter().collect();
        serde::Serialize::serialize(&entries, serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<Symbol, TemplatePoly>, D::Error> {
        let entries: Vec<(Symbol, TemplatePoly)> = serde::Deserialize::deserialize(deserializer)?;
        Ok(entries.into_iter().collect())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterpretError {
    #[error("no interpretation for symbol `{0}`")]
    MissingSymbol(Symbol),
}

impl PolyInterpretation {
    pub fn insert(&mut self, symbol: Symbol, template: TemplatePoly) {
        debug_assert_eq!(symbol.arity, template.arg_coeffs.len());
        self.templates.insert(symbol, template);
    }

    pub fn template(&self, symbol: &Symbol) -> Option<&TemplatePoly> {
        self.templates.get(symbol)
    }

    /// Compositional interpretation of a term.
    pub fn interpret_term(&self, t: &Term) -> Result<LinearPoly, InterpretError> {
        match t {
            Term::Var(x) => Ok(LinearPoly::variable(x.clone())),
            Term::App(f, args) => {
                let template = self
                    .templates
                    .get(f)
                    .ok_or_else(|| InterpretError::MissingSymbol(f.clone()))?;
                let mut out = LinearPoly::constant(template.constant);
                for (arg, coeff) in args.iter().zip(&template.arg_coeffs) {
                    if *coeff == 0 {
                        continue;
                    }
                    out = out.add(&self.interpret_term(arg)?.scale(*coeff));
                }
                Ok(out)
            }
        }
    }

    /// Interpretation of a compound right-hand side: `c0` is 0 and `c2`
    /// sums, so the result is the sum of the annotated subterms'
    /// interpretations.
    pub fn interpret_compound(&self, c: &CompoundTerm) -> Result<LinearPoly, InterpretError> {
        match c {
            CompoundTerm::C0 => Ok(LinearPoly::constant(0)),
            CompoundTerm::One(t) => self.interpret_term(t),
            CompoundTerm::Two(a, b) => Ok(self.interpret_term(a)?.add(&self.interpret_term(b)?)),
        }
    }

    /// Lines `Pol(f(x1,..,xn)) = ...` for proof output.
    pub fn render_lines(&self) -> Vec<String> {
        self.templates
            .iter()
            .map(|(sym, template)| {
                let args: Vec<String> = (1..=sym.arity).map(|i| format!("x{i}")).collect();
                let head = if args.is_empty() {
                    sym.display_name()
                } else {
                    format!("{}({})", sym.display_name(), args.join(","))
                };
                format!("Pol({head}) = {template}")
            })
            .collect()
    }
}
