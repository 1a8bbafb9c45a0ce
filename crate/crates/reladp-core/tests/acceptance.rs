//! Acceptance suite: one test per criterion, each printing a pass line and
//! enforcing its runtime budget.  Run with `cargo test --test acceptance`
//! (add `-- --nocapture` to see the pass lines).

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use reladp_core::adp::{canonical_adp_problem, AdpProblem};
use reladp_core::graph::{estimate_dependency_graph, minimal_lassos, DependencyGraph};
use reladp_core::parse::{fixtures, parse_relative_trs};
use reladp_core::poly::TemplatePoly;
use reladp_core::proof::{NodeVerdict, ProofNode, ProofParams, Verdict};
use reladp_core::prover::{prove, ProveResult, ProverConfig};
use reladp_core::rewrite::{adp_pr_main_reach, plain_main_reach, replay_loop_witness};
use reladp_core::term::{Symbol, Term};
use reladp_core::trs::{RelativeTrs, Rule};

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn report(criterion: &str, elapsed: Duration, budget: Duration) {
    println!(
        "criterion {criterion}: PASS ({:.2}s, budget {:.0}s)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(
        elapsed < budget,
        "criterion {criterion} exceeded its runtime budget: {elapsed:?} >= {budget:?}"
    );
}

fn trs(text: &str) -> RelativeTrs {
    parse_relative_trs(text).unwrap()
}

fn default_no_loop() -> ProverConfig {
    ProverConfig {
        loop_search: false,
        ..ProverConfig::default()
    }
}

fn nodes_labeled<'a>(proof: &'a ProofNode, label: &str) -> Vec<&'a ProofNode> {
    proof
        .walk()
        .into_iter()
        .filter(|n| n.label == label)
        .collect()
}

/// The interpretation shape the divL proofs are expected to use:
/// cons(y,xs) = xs + 1 and
/// the sharped divL symbol projecting to its second argument.
fn has_expected_interpretation_shape(proof: &ProofNode) -> bool {
    proof.orientations().iter().any(|orientation| {
        let cons = orientation.interpretation.template(&Symbol::new("cons", 2));
        let dl = orientation
            .interpretation
            .template(&Symbol::new("divL#", 2));
        cons == Some(&TemplatePoly::new(1, vec![0, 1]))
            && dl == Some(&TemplatePoly::new(0, vec![0, 1]))
    })
}

#[test]
fn criterion_1_plain_termination_walkthrough() {
    let (result, elapsed) = timed(|| prove(&trs(fixtures::DIVL), &ProverConfig::default()));
    assert_eq!(result.verdict, Verdict::Yes);

    // Exactly three classical SCC sub-problems.
    let dg_nodes = nodes_labeled(&result.proof, "classical dependency graph processor");
    assert_eq!(dg_nodes.len(), 1);
    assert_eq!(dg_nodes[0].children.len(), 3);
    match &dg_nodes[0].params {
        ProofParams::Graph { components, .. } => assert_eq!(components.len(), 3),
        other => panic!("expected graph params, got {other:?}"),
    }

    assert!(
        has_expected_interpretation_shape(&result.proof),
        "expected cons(y,xs) = xs + 1 with divL# projecting to its second argument"
    );
    report("1 (plain termination walkthrough)", elapsed, Duration::from_secs(5));
}

#[test]
fn criterion_2_leading_example_divl_mset2() {
    let config = ProverConfig {
        loop_search: false,
        max_coeff: 2,
        ..ProverConfig::default()
    };
    let (result, elapsed) = timed(|| prove(&trs(fixtures::DIVL_MSET2), &config));
    assert_eq!(result.verdict, Verdict::Yes);

    // One lasso-free dependency graph application with three sub-problems.
    let dg_nodes = nodes_labeled(&result.proof, "dependency graph processor");
    assert_eq!(dg_nodes.len(), 1);
    assert_eq!(dg_nodes[0].children.len(), 3);
    match &dg_nodes[0].params {
        ProofParams::Graph { lassos, components, .. } => {
            assert!(lassos.is_empty(), "the decomposition must be lasso-free");
            assert_eq!(components.len(), 3);
        }
        other => panic!("expected graph params, got {other:?}"),
    }

    // Two derelatifying discharges and one relative reduction pair step.
    let drp1_nodes: Vec<_> = nodes_labeled(&result.proof, "derelatifying processor (1)")
        .into_iter()
        .filter(|n| n.effective_verdict() == NodeVerdict::Sn)
        .collect();
    assert_eq!(drp1_nodes.len(), 2);
    let rpp_nodes = nodes_labeled(&result.proof, "reduction pair processor");
    assert_eq!(rpp_nodes.len(), 1);
    assert!(has_expected_interpretation_shape(&result.proof));

    report("2 (leading example divL/mset2)", elapsed, Duration::from_secs(30));
}

#[test]
fn criterion_3_dominance_fast_path() {
    let (result, elapsed) = timed(|| prove(&trs(fixtures::DIVL_MSET), &ProverConfig::default()));
    assert_eq!(result.verdict, Verdict::Yes);
    let fast = nodes_labeled(&result.proof, "dominance fast path");
    let drp1 = nodes_labeled(&result.proof, "derelatifying processor (1)");
    assert!(
        !fast.is_empty() || !drp1.is_empty(),
        "proof must record the fast path or a DG+derelatifying route"
    );
    report("3 (dominance fast path)", elapsed, Duration::from_secs(10));
}

#[test]
fn criterion_4_terminating_redex_creating_via_split() {
    let (result, elapsed) = timed(|| {
        prove(&trs(fixtures::CREATING_TERMINATING), &ProverConfig::default())
    });
    assert_eq!(result.verdict, Verdict::Yes);

    let split_nodes = nodes_labeled(&result.proof, "derelatifying processor (2)");
    assert_eq!(split_nodes.len(), 1, "the split must carry the proof");
    assert_eq!(split_nodes[0].effective_verdict(), NodeVerdict::Sn);
    match &split_nodes[0].params {
        ProofParams::Split { selected } => {
            assert_eq!(selected, &vec!["f(s(y)) -> d(F(y),A)".to_string()]);
        }
        other => panic!("expected split params, got {other:?}"),
    }

    // The ordinary DPs below the split are exactly F(s(y)) -> F(y) and
    // F(s(y)) -> A.
    let classical_problems: Vec<&str> = split_nodes[0]
        .walk()
        .into_iter()
        .filter(|n| n.label == "classical dependency graph processor")
        .map(|n| n.problem.as_str())
        .collect();
    assert!(
        classical_problems
            .iter()
            .any(|p| p.contains("F(s(y)) -> F(y)") && p.contains("F(s(y)) -> A")),
        "ordinary DP problem must contain both split pairs, got {classical_problems:?}"
    );
    report("4 (terminating redex-creating system)", elapsed, Duration::from_secs(10));
}

#[test]
fn criterion_5_non_terminating_systems() {
    let systems = [
        ("R1 redex-duplicating", fixtures::R1),
        ("R2 redex-creating", fixtures::R2),
        ("R3 redex-creating above", fixtures::R3),
        ("R4 ordinary infinite", fixtures::R4),
    ];
    for (name, text) in systems {
        let system = trs(text);
        let config = ProverConfig {
            loop_depth: 6,
            loop_seed_depth: 2,
            ..ProverConfig::default()
        };
        let (result, elapsed) = timed(|| prove(&system, &config));
        assert_eq!(result.verdict, Verdict::No, "{name} must be disproved");
        let witness = result
            .proof
            .walk()
            .into_iter()
            .find_map(|n| match &n.params {
                ProofParams::LoopFound { witness } => Some(witness.clone()),
                _ => None,
            })
            .expect("NO verdict must carry a loop witness");
        assert!(
            replay_loop_witness(&system, &witness),
            "{name}: witness must replay"
        );
        report(
            &format!("5 ({name})"),
            elapsed,
            Duration::from_secs(10),
        );
    }
}

#[test]
fn criterion_6_rpp_impossibility_on_lasso_problem() {
    let config = ProverConfig {
        loop_search: false,
        max_coeff: 3,
        ..ProverConfig::default()
    };
    let (result, elapsed) = timed(|| prove(&trs(fixtures::R2), &config));
    assert_eq!(result.verdict, Verdict::Maybe);

    // The reduction pair processor reported "no orientation" on the lasso
    // problem ({a -> b}, {f -> d(F,A)}) for every coefficient bound <= 3.
    let failures: Vec<&ProofNode> = result
        .proof
        .walk()
        .into_iter()
        .filter(|n| {
            matches!(
                &n.params,
                ProofParams::OrientationFailed { mode, bounds }
                    if mode == "reduction pair" && bounds == &vec![1, 2, 3]
            )
        })
        .collect();
    assert!(
        failures
            .iter()
            .any(|n| n.problem.contains("a -> b") && n.problem.contains("f -> d(F,A)")),
        "the failure must be recorded on the lasso problem; got {:?}",
        failures.iter().map(|n| n.problem.clone()).collect::<Vec<_>>()
    );
    report("6 (reduction-pair impossibility)", elapsed, Duration::from_secs(30));
}

/// Exhaustive family for the chain-criterion oracle: every relative TRS
/// with one main and one base rule drawn from all valid rules over the
/// signature {f/1, g/1, c/0} with left-hand sides of size at most 2 and
/// right-hand sides of size at most 2, plus two-rule-per-side samples.
fn oracle_family() -> Vec<RelativeTrs> {
    let f = |t: Term| Term::App(Symbol::new("f", 1), vec![t]);
    let g = |t: Term| Term::App(Symbol::new("g", 1), vec![t]);
    let c = Term::constant("c");
    let x = Term::var("x");

    let lhss = vec![c.clone(), f(x.clone()), f(c.clone()), g(x.clone()), g(c.clone())];
    let rhs_for = |lhs: &Term| -> Vec<Term> {
        let mut out = vec![c.clone(), f(c.clone()), g(c.clone())];
        if !lhs.is_ground() {
            out.extend([x.clone(), f(x.clone()), g(x.clone())]);
        }
        out
    };

    let mut rules = Vec::new();
    for lhs in &lhss {
        for rhs in rhs_for(lhs) {
            rules.push(Rule::new(lhs.clone(), rhs).unwrap());
        }
    }
    assert!(rules.len() >= 20);

    let mut family = Vec::new();
    for main in &rules {
        for base in &rules {
            family.push(RelativeTrs::new(vec![main.clone()], vec![base.clone()]));
        }
    }
    // A deterministic sample of systems with two rules on each side.
    for i in 0..40 {
        let a = &rules[(3 * i) % rules.len()];
        let b = &rules[(5 * i + 1) % rules.len()];
        let d = &rules[(7 * i + 2) % rules.len()];
        let e = &rules[(11 * i + 3) % rules.len()];
        family.push(RelativeTrs::new(
            vec![a.clone(), b.clone()],
            vec![d.clone(), e.clone()],
        ));
    }
    family
}

#[test]
fn criterion_7_chain_criterion_oracle() {
    let start = Instant::now();
    let family = oracle_family();
    assert!(family.len() >= 200, "family too small: {}", family.len());

    let starts: Vec<Term> = {
        let f = |t: Term| Term::App(Symbol::new("f", 1), vec![t]);
        let g = |t: Term| Term::App(Symbol::new("g", 1), vec![t]);
        let c = Term::constant("c");
        vec![
            c.clone(),
            f(c.clone()),
            g(c.clone()),
            f(f(c.clone())),
            f(g(c.clone())),
            g(f(c.clone())),
            g(g(c)),
        ]
    };

    let size_cap = 7;
    let mut checked = 0usize;
    for system in &family {
        let problem = canonical_adp_problem(system).expect("base rules are non-duplicating");
        for start_term in &starts {
            for k in 1..=4usize {
                let plain = plain_main_reach(system, start_term, k, size_cap);
                let annotated = adp_pr_main_reach(&problem, start_term, k, size_cap);
                assert_eq!(
                    plain, annotated,
                    "disagreement: system {system}, start {start_term}, k={k}"
                );
                checked += 1;
                // Reachability is monotone in k; once both sides are false
                // the larger bounds are false too.
                if !plain {
                    break;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    println!("criterion 7: {} systems, {checked} comparisons, zero disagreements", family.len());
    report("7 (chain-criterion oracle)", elapsed, Duration::from_secs(120));
}

#[test]
fn criterion_8_orientation_numerical_soundness() {
    let start = Instant::now();
    let runs: Vec<ProveResult> = vec![
        prove(&trs(fixtures::DIVL), &ProverConfig::default()),
        prove(
            &trs(fixtures::DIVL_MSET2),
            &ProverConfig {
                loop_search: false,
                max_coeff: 2,
                ..ProverConfig::default()
            },
        ),
        prove(&trs(fixtures::DIVL_MSET), &ProverConfig::default()),
        prove(&trs(fixtures::CREATING_TERMINATING), &ProverConfig::default()),
        prove(&trs(fixtures::R1), &ProverConfig::default()),
        prove(&trs(fixtures::R2), &ProverConfig::default()),
        prove(&trs(fixtures::R3), &ProverConfig::default()),
        prove(&trs(fixtures::R4), &ProverConfig::default()),
        prove(
            &trs(fixtures::R2),
            &ProverConfig {
                loop_search: false,
                max_coeff: 3,
                ..ProverConfig::default()
            },
        ),
    ];

    // Deterministic xorshift for the random assignments.
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        state
    };

    let mut interpretations = 0usize;
    let mut checks = 0usize;
    for run in &runs {
        for orientation in run.proof.orientations() {
            interpretations += 1;
            let constraints: Vec<(bool, _)> = orientation
                .weak
                .iter()
                .map(|c| (false, c))
                .chain(orientation.strict.iter().map(|c| (true, c)))
                .collect();
            for _ in 0..200 {
                for (strict, constraint) in &constraints {
                    let lhs = orientation
                        .interpretation
                        .interpret_term(&constraint.lhs)
                        .expect("interpretation covers the constraint");
                    let rhs = orientation
                        .interpretation
                        .interpret_compound(&constraint.rhs)
                        .expect("interpretation covers the constraint");
                    let mut assignment = BTreeMap::new();
                    for var in lhs.coeffs.keys().chain(rhs.coeffs.keys()) {
                        assignment.insert(var.clone(), next() % 11);
                    }
                    let l = lhs.eval(&assignment);
                    let r = rhs.eval(&assignment);
                    checks += 1;
                    if *strict {
                        assert!(l > r, "strict violation {l} vs {r} in {constraint:?}");
                    } else {
                        assert!(l >= r, "weak violation {l} vs {r} in {constraint:?}");
                    }
                }
            }
        }
    }
    assert!(interpretations > 0, "criteria runs must emit interpretations");
    let elapsed = start.elapsed();
    println!("criterion 8: {interpretations} interpretations, {checks} checks, zero violations");
    report("8 (orientation numerical soundness)", elapsed, Duration::from_secs(60));
}

#[test]
fn criterion_9_dependency_graph_fidelity() {
    let start = Instant::now();

    // The known dependency-graph edges of (DP(R_divL), DP(R=_mset2)):
    // the base self-edge, base to both divL ADPs, and the divL -> div ->
    // minus chains.
    let problem = canonical_adp_problem(&trs(fixtures::DIVL_MSET2)).unwrap();
    let graph = estimate_dependency_graph(&problem);
    let index = |label: &str| -> usize {
        graph
            .nodes
            .iter()
            .position(|(adp, _)| adp.to_string() == label)
            .unwrap_or_else(|| panic!("missing node {label}"))
    };
    let swap = index("divL(z,cons(x,cons(y,zs))) -> DL(z,cons(y,cons(x,zs)))");
    let divl_dl = index("divL(x,cons(y,xs)) -> DL(div(x,y),xs)");
    let divl_d = index("divL(x,cons(y,xs)) -> divL(D(x,y),xs)");
    let div_d = index("div(s(x),s(y)) -> s(D(minus(x,y),s(y)))");
    let div_m = index("div(s(x),s(y)) -> s(div(M(x,y),s(y)))");
    let minus_m = index("minus(s(x),s(y)) -> M(x,y)");
    let asserted_edges = [
        (swap, swap),
        (swap, divl_dl),
        (swap, divl_d),
        (divl_dl, divl_dl),
        (divl_d, div_d),
        (divl_d, div_m),
        (div_d, div_m),
        (div_m, minus_m),
        (minus_m, minus_m),
    ];
    for (from, to) in asserted_edges {
        assert!(
            graph.has_edge(from, to),
            "missing edge {} -> {}",
            graph.nodes[from].0,
            graph.nodes[to].0
        );
    }

    // The lasso set of (DP(R2), DP(R2=)) is exactly {{f -> d(F,A), a -> b}}.
    let r2 = canonical_adp_problem(&trs(fixtures::R2)).unwrap();
    let lassos = minimal_lassos(&r2);
    let as_labels = |p: &AdpProblem, set: &BTreeSet<usize>| -> BTreeSet<String> {
        let all: Vec<_> = p.all().collect();
        set.iter().map(|&i| all[i].to_string()).collect()
    };
    assert_eq!(lassos.len(), 1);
    assert_eq!(
        as_labels(&r2, &lassos[0]),
        BTreeSet::from(["a -> b".to_string(), "f -> d(F,A)".to_string()])
    );

    let _ = DependencyGraph::to_dot(&graph);
    let elapsed = start.elapsed();
    report("9 (dependency graph fidelity)", elapsed, Duration::from_secs(30));
}

#[test]
fn bundled_corpus_verdicts() {
    // The 8-system corpus of the repository: 4 YES, 4 NO.
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let report = reladp_core::harness::run_benchmark(&dir, &ProverConfig::default()).unwrap();
    assert_eq!(report.entries.len(), 8);
    assert_eq!((report.yes, report.no, report.maybe, report.errors), (4, 4, 0, 0));
}
