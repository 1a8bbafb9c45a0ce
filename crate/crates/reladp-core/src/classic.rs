//! The ordinary DP framework used after derelatifying: DP extraction, the
//! classical dependency graph and reduction pair processors, the two
//! derelatifying processors, and the dominance fast paths that reduce a
//! relative problem to an ordinary DP problem up front.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adp::{split_adps, Adp, AdpProblem};
use crate::graph::estimation_edge;
use crate::orders::{solve_orientation, Candidate, OrientationResult, PolyConstraint};
use crate::term::Symbol;
use crate::trs::{defined_symbols, dominates, RelativeTrs, Rule};

/// An ordinary DP problem: sharped pairs over a plain rule set.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct DpProblem {
    pub pairs: Vec<Rule>,
    pub rules: Vec<Rule>,
}

impl fmt::Display for DpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({{")?;
        for (i, pair) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{pair}")?;
        }
        write!(f, "}}, {} rules)", self.rules.len())
    }
}

/// The sharped dependency pairs of a set of ADPs: one pair `l# -> t#` per
/// annotated subterm `t` of each right-hand side.
pub fn dp_of(adps: &[Adp]) -> Vec<Rule> {
    let mut out: Vec<Rule> = Vec::new();
    for adp in adps {
        for (_, sub) in adp.rhs.annotated_subterms() {
            let pair = Rule {
                lhs: adp.lhs.sharped(),
                rhs: sub.sharped(),
            };
            if !out.contains(&pair) {
                out.push(pair);
            }
        }
    }
    out
}

/// Classical dependency pairs of plain rules, with "defined" given
/// explicitly (only roots of the chosen rule subset count as defined).
pub fn dp_of_rules(rules: &[Rule], defined: &BTreeSet<Symbol>) -> Vec<Rule> {
    let mut out: Vec<Rule> = Vec::new();
    for rule in rules {
        for pos in rule.rhs.positions_where(|sym| defined.contains(sym)) {
            let sub = rule.rhs.subterm_at(&pos).unwrap();
            let pair = Rule {
                lhs: rule.lhs.sharped(),
                rhs: sub.sharped(),
            };
            if !out.contains(&pair) {
                out.push(pair);
            }
        }
    }
    out
}

/// Derelatifying processor (1): once no base ADP carries annotations, the
/// relative problem reduces to the ordinary DP problem of the main ADPs
/// over all flattened rules.
pub fn drp1(problem: &AdpProblem) -> Option<DpProblem> {
    if problem.base.iter().any(|adp| !adp.rhs.is_flat()) {
        return None;
    }
    Some(DpProblem {
        pairs: dp_of(&problem.main),
        rules: problem.flat_rules(),
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Drp2Error {
    #[error("base ADP index {0} out of range")]
    InvalidIndex(usize),
}

/// Derelatifying processor (2): the selected base ADPs leave the base
/// component; their single-annotation split variants join the main
/// component.  Sound but not complete.
pub fn drp2(problem: &AdpProblem, selection: &[usize]) -> Result<AdpProblem, Drp2Error> {
    for &i in selection {
        if i >= problem.base.len() {
            return Err(Drp2Error::InvalidIndex(i));
        }
    }
    let selected: Vec<Adp> = selection.iter().map(|&i| problem.base[i].clone()).collect();
    let mut main = problem.main.clone();
    main.extend(split_adps(&selected));
    let base: Vec<Adp> = problem
        .base
        .iter()
        .enumerate()
        .filter(|(i, _)| !selection.contains(i))
        .map(|(_, adp)| adp.clone())
        .collect();
    Ok(AdpProblem::new(main, base))
}

/// The estimated `(P, R)`-dependency graph over pair indices.
pub fn classic_dependency_graph(problem: &DpProblem) -> Vec<BTreeSet<usize>> {
    let defined = defined_symbols(&problem.rules, &[]);
    let mut edges = vec![BTreeSet::new(); problem.pairs.len()];
    for (from, pair) in problem.pairs.iter().enumerate() {
        for (to, target) in problem.pairs.iter().enumerate() {
            if estimation_edge(&pair.rhs, &target.lhs, &defined) {
                edges[from].insert(to);
            }
        }
    }
    edges
}

/// Classical dependency graph processor: one sub-problem per nontrivial SCC
/// of the estimated graph.
pub fn classic_dg_processor(problem: &DpProblem) -> Vec<DpProblem> {
    let edges = classic_dependency_graph(problem);
    let graph = crate::graph::DependencyGraph {
        nodes: Vec::new(),
        edges,
    };
    let components = tarjan_on_edges(&graph.edges);
    components
        .into_iter()
        .map(|scc| DpProblem {
            pairs: scc.iter().map(|&i| problem.pairs[i].clone()).collect(),
            rules: problem.rules.clone(),
        })
        .collect()
}

fn tarjan_on_edges(edges: &[BTreeSet<usize>]) -> Vec<BTreeSet<usize>> {
    // Reuse the graph module's Tarjan via a dummy node list of the right
    // length is not possible without nodes, so inline a small copy here.
    struct State<'a> {
        edges: &'a [BTreeSet<usize>],
        index: usize,
        indices: Vec<Option<usize>>,
        lowlink: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        components: Vec<BTreeSet<usize>>,
    }
    fn visit(state: &mut State, v: usize) {
        state.indices[v] = Some(state.index);
        state.lowlink[v] = state.index;
        state.index += 1;
        state.stack.push(v);
        state.on_stack[v] = true;
        for &w in &state.edges[v] {
            if state.indices[w].is_none() {
                visit(state, w);
                state.lowlink[v] = state.lowlink[v].min(state.lowlink[w]);
            } else if state.on_stack[w] {
                state.lowlink[v] = state.lowlink[v].min(state.indices[w].unwrap());
            }
        }
        if state.lowlink[v] == state.indices[v].unwrap() {
            let mut component = BTreeSet::new();
            loop {
                let w = state.stack.pop().unwrap();
                state.on_stack[w] = false;
                component.insert(w);
                if w == v {
                    break;
                }
            }
            state.components.push(component);
        }
    }
    let n = edges.len();
    let mut state = State {
        edges,
        index: 0,
        indices: vec![None; n],
        lowlink: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        components: Vec::new(),
    };
    for v in 0..n {
        if state.indices[v].is_none() {
            visit(&mut state, v);
        }
    }
    let mut nontrivial: Vec<BTreeSet<usize>> = state
        .components
        .into_iter()
        .filter(|c| c.len() > 1 || c.iter().all(|&v| edges[v].contains(&v)))
        .collect();
    nontrivial.sort();
    nontrivial
}

/// Classical reduction pair processor: all rules and pairs weakly oriented,
/// strictly decreasing pairs removed.  Returns the reduced problem and the
/// interpretation, or `None` if no orientation with a strict pair exists.
pub fn classic_rpp_processor(
    problem: &DpProblem,
    max_coeff: u64,
    deadline: Option<Instant>,
) -> Option<(DpProblem, OrientationResult)> {
    let mut weak: Vec<PolyConstraint> =
        problem.rules.iter().map(PolyConstraint::rule).collect();
    weak.extend(problem.pairs.iter().map(PolyConstraint::rule));
    let candidates: Vec<Candidate> = problem
        .pairs
        .iter()
        .enumerate()
        .map(|(key, pair)| Candidate {
            key,
            constraint: PolyConstraint::rule(pair),
            required: false,
            progress: true,
        })
        .collect();
    let result = solve_orientation(&weak, &candidates, false, max_coeff, deadline)?;
    let pairs: Vec<Rule> = problem
        .pairs
        .iter()
        .enumerate()
        .filter(|(i, _)| !result.strict_keys.contains(i))
        .map(|(_, pair)| pair.clone())
        .collect();
    Some((
        DpProblem {
            pairs,
            rules: problem.rules.clone(),
        },
        result,
    ))
}

/// Which precondition admitted the fast path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FastPathRoute {
    /// Empty base: ordinary termination of the main TRS.
    OrdinaryTermination,
    /// Non-duplicating base dominated by the main TRS.
    Dominance,
    /// A split of the base: the moved part joins the pair construction.
    Split { moved: Vec<Rule> },
}

/// Reduces a relative TRS to an ordinary DP problem when the dominance
/// side conditions hold: either the base is empty, or it is non-duplicating
/// and dominated by the main TRS, or a nonempty dominated remainder exists
/// for the greedy split.  A split that leaves no base rules behind degrades
/// to plain termination of the union and is rejected; the ADP framework
/// handles that case better.
pub fn dominance_fast_path(
    trs: &RelativeTrs,
    partition: Option<&[usize]>,
) -> Option<(DpProblem, FastPathRoute)> {
    let mut rules: Vec<Rule> = trs.main.clone();
    rules.extend(trs.base.iter().cloned());

    if trs.base.is_empty() {
        let defined = defined_symbols(&trs.main, &[]);
        return Some((
            DpProblem {
                pairs: dp_of_rules(&trs.main, &defined),
                rules: trs.main.clone(),
            },
            FastPathRoute::OrdinaryTermination,
        ));
    }

    if let Some(indices) = partition {
        // Caller-chosen base_a: verify the split side conditions.
        let base_a: Vec<Rule> = indices.iter().map(|&i| trs.base[i].clone()).collect();
        let base_b: Vec<Rule> = trs
            .base
            .iter()
            .enumerate()
            .filter(|(i, _)| !indices.contains(i))
            .map(|(_, r)| r.clone())
            .collect();
        if base_b.iter().any(Rule::is_duplicating) {
            return None;
        }
        let mut extended = trs.main.clone();
        extended.extend(base_a.iter().cloned());
        if !dominates(&extended, &base_b) {
            return None;
        }
        let defined = defined_symbols(&extended, &[]);
        return Some((
            DpProblem {
                pairs: dp_of_rules(&extended, &defined),
                rules,
            },
            FastPathRoute::Split { moved: base_a },
        ));
    }

    if trs.base_is_non_duplicating() && dominates(&trs.main, &trs.base) {
        let defined = defined_symbols(&trs.main, &[]);
        return Some((
            DpProblem {
                pairs: dp_of_rules(&trs.main, &defined),
                rules,
            },
            FastPathRoute::Dominance,
        ));
    }

    // Greedy maximal split: duplicating base rules must move, then any base
    // rule whose right-hand side mentions a defined symbol of the growing
    // main part.
    let mut base_a: Vec<Rule> = trs.base.iter().filter(|r| r.is_duplicating()).cloned().collect();
    loop {
        let mut extended = trs.main.clone();
        extended.extend(base_a.iter().cloned());
        let extended_defined: BTreeSet<Symbol> = defined_symbols(&extended, &[]);
        let offender = trs.base.iter().find(|r| {
            !base_a.contains(r) && !r.rhs.symbols().is_disjoint(&extended_defined)
        });
        match offender {
            Some(rule) => base_a.push(rule.clone()),
            None => break,
        }
    }
    if base_a.is_empty() || base_a.len() == trs.base.len() {
        // Either dominance already failed above, or the split is
        // degenerate.
        return None;
    }
    let mut extended = trs.main.clone();
    extended.extend(base_a.iter().cloned());
    let defined = defined_symbols(&extended, &[]);
    Some((
        DpProblem {
            pairs: dp_of_rules(&extended, &defined),
            rules,
        },
        FastPathRoute::Split { moved: base_a },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adp::canonical_adp_problem;
    use crate::parse::{fixtures, parse_relative_trs};

    fn problem(text: &str) -> AdpProblem {
        canonical_adp_problem(&parse_relative_trs(text).unwrap()).unwrap()
    }

    fn shown(rules: &[Rule]) -> Vec<String> {
        rules.iter().map(|r| r.to_string()).collect()
    }

    #[test]
    fn dp_of_divl_matches_classical_pairs() {
        let p = problem(fixtures::DIVL);
        let pairs = dp_of(&p.main);
        assert_eq!(
            shown(&pairs),
            vec![
                "M(s(x),s(y)) -> M(x,y)",
                "D(s(x),s(y)) -> D(minus(x,y),s(y))",
                "D(s(x),s(y)) -> M(x,y)",
                "DL(x,cons(y,xs)) -> DL(div(x,y),xs)",
                "DL(x,cons(y,xs)) -> D(x,y)",
            ]
        );
        // Same set as the classical construction on the plain rules.
        let trs = parse_relative_trs(fixtures::DIVL).unwrap();
        let mut classical = dp_of_rules(&trs.main, &trs.defined);
        let mut via_adps = pairs;
        classical.sort();
        via_adps.sort();
        assert_eq!(classical, via_adps);
    }

    #[test]
    fn dp_of_flat_adps_is_empty() {
        let p = problem(fixtures::R2);
        assert!(dp_of(&p.main).is_empty());
    }

    #[test]
    fn dp_of_split_creating_terminating() {
        let p = problem(fixtures::CREATING_TERMINATING);
        let split = drp2(&p, &[0]).unwrap();
        let pairs = dp_of(&split.main);
        assert_eq!(
            shown(&pairs),
            vec!["F(s(y)) -> F(y)", "F(s(y)) -> A"]
        );
    }

    #[test]
    fn drp1_requires_flat_base() {
        let p = problem(fixtures::DIVL_MSET2);
        assert!(drp1(&p).is_none());

        let flat_base = AdpProblem::new(
            p.main.clone(),
            p.base.iter().map(|a| a.flatten()).collect(),
        );
        let dp = drp1(&flat_base).unwrap();
        assert_eq!(dp.pairs.len(), 5);
        assert_eq!(dp.rules.len(), 7);

        let no_main = AdpProblem::new(Vec::new(), p.base.iter().map(|a| a.flatten()).collect());
        let dp = drp1(&no_main).unwrap();
        assert!(dp.pairs.is_empty());
    }

    #[test]
    fn drp2_selection_cases() {
        let p = problem(fixtures::CREATING_TERMINATING);
        // Empty selection: identity.
        assert_eq!(drp2(&p, &[]).unwrap(), p);
        // Invalid index reported.
        assert_eq!(drp2(&p, &[4]), Err(Drp2Error::InvalidIndex(4)));
        // Selecting the doubly annotated base ADP splits it into two main
        // ADPs and preserves the underlying rules.
        let out = drp2(&p, &[0]).unwrap();
        assert!(out.base.is_empty());
        assert_eq!(out.main.len(), 3);
        let mut before = p.flat_rules();
        let mut after = out.flat_rules();
        before.sort();
        after.sort();
        assert_eq!(before, after);
        // A flat selected ADP is deleted and contributes nothing.
        let p_flat = AdpProblem::new(
            p.main.clone(),
            p.base.iter().map(|a| a.flatten()).collect(),
        );
        let out = drp2(&p_flat, &[0]).unwrap();
        assert!(out.base.is_empty());
        assert_eq!(out.main, p.main);
    }

    #[test]
    fn classic_graph_of_divl_has_three_sccs() {
        let trs = parse_relative_trs(fixtures::DIVL).unwrap();
        let dp = DpProblem {
            pairs: dp_of_rules(&trs.main, &trs.defined),
            rules: trs.main.clone(),
        };
        let subs = classic_dg_processor(&dp);
        assert_eq!(subs.len(), 3);
        for sub in &subs {
            assert_eq!(sub.pairs.len(), 1, "each SCC is a single self-loop");
        }
        let singletons: Vec<String> = subs.iter().map(|s| s.pairs[0].to_string()).collect();
        assert!(singletons.contains(&"M(s(x),s(y)) -> M(x,y)".to_string()));
        assert!(singletons.contains(&"D(s(x),s(y)) -> D(minus(x,y),s(y))".to_string()));
        assert!(singletons.contains(&"DL(x,cons(y,xs)) -> DL(div(x,y),xs)".to_string()));
    }

    #[test]
    fn classic_dg_trivial_cases() {
        let empty = DpProblem {
            pairs: Vec::new(),
            rules: Vec::new(),
        };
        assert!(classic_dg_processor(&empty).is_empty());

        // Two pairs with no edges at all.
        let trs = parse_relative_trs("(RULES p -> q r -> t)").unwrap();
        let dp = DpProblem {
            pairs: dp_of_rules(&trs.main, &trs.defined),
            rules: trs.main.clone(),
        };
        assert!(classic_dg_processor(&dp).is_empty());
    }

    #[test]
    fn classic_rpp_solves_dl_component() {
        let trs = parse_relative_trs(fixtures::DIVL).unwrap();
        let dl_pair = Rule {
            lhs: fixtures::term("divL(x,cons(y,xs))").sharped(),
            rhs: fixtures::term("divL(div(x,y),xs)").sharped(),
        };
        let dp = DpProblem {
            pairs: vec![dl_pair],
            rules: trs.main.clone(),
        };
        let (reduced, result) = classic_rpp_processor(&dp, 1, None).expect("orientable");
        assert!(reduced.pairs.is_empty());
        // The deterministic search lands on the canonical interpretation:
        // cons(y,xs) = xs + 1 and DL projecting to its second argument.
        let cons = result
            .interpretation
            .template(&Symbol::new("cons", 2))
            .unwrap();
        assert_eq!((cons.constant, cons.arg_coeffs.clone()), (1, vec![0, 1]));
        let dl = result
            .interpretation
            .template(&Symbol::new("divL#", 2))
            .unwrap();
        assert_eq!((dl.constant, dl.arg_coeffs.clone()), (0, vec![0, 1]));
    }

    #[test]
    fn classic_rpp_unsatisfiable_self_pair() {
        let pair = Rule {
            lhs: fixtures::term("a").sharped(),
            rhs: fixtures::term("a").sharped(),
        };
        let dp = DpProblem {
            pairs: vec![pair],
            rules: Vec::new(),
        };
        assert!(classic_rpp_processor(&dp, 3, None).is_none());
    }

    #[test]
    fn fast_path_for_empty_base() {
        let trs = parse_relative_trs(fixtures::DIVL).unwrap();
        let (dp, route) = dominance_fast_path(&trs, None).unwrap();
        assert_eq!(route, FastPathRoute::OrdinaryTermination);
        assert_eq!(dp.pairs.len(), 5);
        assert_eq!(dp.rules.len(), 6);
    }

    #[test]
    fn fast_path_for_dominated_mset() {
        let trs = parse_relative_trs(fixtures::DIVL_MSET).unwrap();
        let (dp, route) = dominance_fast_path(&trs, None).unwrap();
        assert_eq!(route, FastPathRoute::Dominance);
        // Pairs come from the main TRS only; rules include the base rule.
        assert_eq!(dp.pairs.len(), 5);
        assert_eq!(dp.rules.len(), 7);
    }

    #[test]
    fn fast_path_absent_for_mset2() {
        let trs = parse_relative_trs(fixtures::DIVL_MSET2).unwrap();
        assert!(dominance_fast_path(&trs, None).is_none());
    }

    #[test]
    fn fast_path_with_forced_partition() {
        let trs = parse_relative_trs(fixtures::DIVL_MSET2).unwrap();
        // Forcing the whole base into base_a trivially dominates the empty
        // remainder.
        let (dp, route) = dominance_fast_path(&trs, Some(&[0])).unwrap();
        assert!(matches!(route, FastPathRoute::Split { .. }));
        assert_eq!(dp.rules.len(), 7);
        // Forcing an empty base_a must satisfy dominance, which fails here.
        assert!(dominance_fast_path(&trs, Some(&[])).is_none());
    }
}
