//! A library for proving relative termination of first-order term rewrite
//! systems.
//!
//! A relative TRS is a pair of rule sets: the *main* rules, written
//! `l -> r`, and the *base* rules, written `l ->= r`.  The question
//! answered here is whether every combined rewrite sequence uses the main
//! rules only finitely often, while base rules may be applied forever.
//! The prover decides YES/NO/MAYBE and produces a proof tree.
//!
//! The positive side is an annotated-dependency-pair framework: rewrite
//! rules whose right-hand sides carry annotations on selected
//! defined-symbol positions, transformed by a dependency graph processor
//! (with lasso detection for redex-creating base rules), reduction pair
//! and rule removal processors over linear polynomial interpretations, and
//! two derelatifying processors that hand sub-problems to the classical DP
//! framework.  The negative side is a bounded forward search for rewrite
//! loops that repeat a main step.

pub mod adp;
pub mod classic;
pub mod graph;
pub mod harness;
pub mod orders;
pub mod parse;
pub mod poly;
pub mod proof;
pub mod prover;
pub mod rewrite;
pub mod term;
pub mod trs;

pub use adp::{Adp, AdpProblem, AnnotatedTerm, Component, CompoundTerm};
pub use classic::DpProblem;
pub use graph::DependencyGraph;
pub use parse::{parse_relative_trs, print_relative_trs, ParseError};
pub use poly::{LinearPoly, PolyInterpretation, TemplatePoly};
pub use proof::{render_proof, NodeVerdict, ProofFormat, ProofNode, Verdict};
pub use prover::{prove, ProveResult, ProverConfig};
pub use rewrite::{LoopSearchConfig, LoopWitness, RewriteStep, Vrf};
pub use term::{Position, Substitution, Symbol, Term};
pub use trs::{RelativeTrs, Rule};
