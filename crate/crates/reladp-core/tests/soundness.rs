//! Desk-scale soundness checks on the bundled corpus: YES verdicts are
//! backed by a bounded exhaustive search showing main-step counts stay
//! finite, NO verdicts carry replaying witnesses, and every proof replays
//! structurally (orientations re-check coefficient-wise, graph
//! decompositions re-validate their components).

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use reladp_core::parse::parse_relative_trs;
use reladp_core::poly::{strictly_gt, weakly_geq};
use reladp_core::proof::{ProofNode, ProofParams, Verdict};
use reladp_core::prover::{prove, ProverConfig};
use reladp_core::rewrite::{ground_terms, plain_main_reach, replay_loop_witness};
use reladp_core::term::Substitution;
use reladp_core::trs::RelativeTrs;

fn corpus_systems() -> Vec<(String, RelativeTrs)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut files: Vec<_> = fs::read_dir(&dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "trs"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|path| {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let trs = parse_relative_trs(&fs::read_to_string(&path).unwrap()).unwrap();
            (name, trs)
        })
        .collect()
}

/// Small ground seed terms: every left-hand side instantiated with ground
/// terms of depth one.
fn seeds(trs: &RelativeTrs) -> Vec<reladp_core::term::Term> {
    let ground = ground_terms(trs, 1);
    let mut out = Vec::new();
    for (rule, _) in trs.all_rules() {
        let vars: Vec<String> = rule.lhs.variables().into_iter().collect();
        if vars.is_empty() {
            out.push(rule.lhs.clone());
            continue;
        }
        for g in ground.iter().take(2) {
            let mut sigma = Substitution::new();
            for v in &vars {
                sigma.insert(v.clone(), g.clone());
            }
            out.push(sigma.apply(&rule.lhs));
        }
    }
    out
}

#[test]
fn corpus_verdicts_are_backed_by_bounded_search() {
    for (name, trs) in corpus_systems() {
        let result = prove(&trs, &ProverConfig::default());
        match result.verdict {
            Verdict::Yes => {
                // No loop witness may coexist with a YES.
                assert!(
                    !result
                        .proof
                        .walk()
                        .iter()
                        .any(|n| matches!(n.params, ProofParams::LoopFound { .. })),
                    "{name}: YES with a loop witness"
                );
                // Within a size cap the reachable main-step count has a
                // finite maximum: some k <= 40 is unreachable.  A main-step
                // cycle would make every k reachable.
                for seed in seeds(&trs) {
                    let bounded = (1..=40).any(|k| !plain_main_reach(&trs, &seed, k, 14));
                    assert!(bounded, "{name}: unbounded main steps from {seed}");
                }
            }
            Verdict::No => {
                let witness = result
                    .proof
                    .walk()
                    .into_iter()
                    .find_map(|n| match &n.params {
                        ProofParams::LoopFound { witness } => Some(witness.clone()),
                        _ => None,
                    })
                    .expect("NO carries a witness");
                assert!(replay_loop_witness(&trs, &witness), "{name}: witness replay");
            }
            Verdict::Maybe => panic!("{name}: corpus systems must be decided"),
        }
    }
}

#[test]
fn proofs_replay_structurally() {
    for (name, trs) in corpus_systems() {
        let result = prove(
            &trs,
            &ProverConfig {
                loop_search: false,
                ..ProverConfig::default()
            },
        );
        for node in result.proof.walk() {
            replay_node(&name, node);
        }
    }
}

fn replay_node(name: &str, node: &ProofNode) {
    match &node.params {
        ProofParams::Orientation { orientation } => {
            for constraint in &orientation.weak {
                let lhs = orientation
                    .interpretation
                    .interpret_term(&constraint.lhs)
                    .expect("interpreted");
                let rhs = orientation
                    .interpretation
                    .interpret_compound(&constraint.rhs)
                    .expect("interpreted");
                assert!(
                    weakly_geq(&lhs, &rhs),
                    "{name}: weak constraint fails re-check in `{}`",
                    node.label
                );
            }
            for constraint in &orientation.strict {
                let lhs = orientation
                    .interpretation
                    .interpret_term(&constraint.lhs)
                    .expect("interpreted");
                let rhs = orientation
                    .interpretation
                    .interpret_compound(&constraint.rhs)
                    .expect("interpreted");
                assert!(
                    strictly_gt(&lhs, &rhs),
                    "{name}: strict constraint fails re-check in `{}`",
                    node.label
                );
            }
        }
        ProofParams::Graph {
            edges, components, ..
        } => {
            // Every recorded component is strongly connected over the
            // recorded edges (non-empty internal paths).
            for component in components {
                let inside: BTreeSet<usize> = component.iter().copied().collect();
                for &from in component {
                    for &to in component {
                        assert!(
                            connected(edges, from, to, &inside),
                            "{name}: component {component:?} not a cycle in `{}`",
                            node.label
                        );
                    }
                }
            }
        }
        _ => {}
    }
}

fn connected(edges: &[(usize, usize)], from: usize, to: usize, inside: &BTreeSet<usize>) -> bool {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<usize> = edges
        .iter()
        .filter(|(a, b)| *a == from && inside.contains(b))
        .map(|(_, b)| *b)
        .collect();
    while let Some(n) = stack.pop() {
        if n == to {
            return true;
        }
        if seen.insert(n) {
            stack.extend(
                edges
                    .iter()
                    .filter(|(a, b)| *a == n && inside.contains(b))
                    .map(|(_, b)| *b),
            );
        }
    }
    false
}
