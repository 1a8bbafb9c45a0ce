//! Dependency graph estimation, strongly connected components, minimal
//! lassos and the dependency graph processor.
//!
//! The estimation is the classical one: an edge from one node to another
//! exists if REN(CAP(t#)) unifies with the renamed-apart sharped left-hand
//! side, where `t` ranges over the annotated subterms of the source's
//! right-hand side and CAP replaces every subterm with a defined root below
//! the sharped root by a fresh variable.  Nodes without annotations have no
//! outgoing edges.

use std::collections::BTreeSet;

use crate::adp::{Adp, AdpProblem, Component};
use crate::term::{unify_terms, Symbol, Term};

/// A dependency graph over the ADPs of a problem.  Node order is main ADPs
/// first, then base ADPs, in problem order.
#[derive(Clone, Debug)]
pub struct DependencyGraph {
    pub nodes: Vec<(Adp, Component)>,
    pub edges: Vec<BTreeSet<usize>>,
}

impl DependencyGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges[from].contains(&to)
    }

    /// GraphViz rendering: main ADPs boxed, base ADPs oval.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dependency_graph {\n");
        for (i, (adp, component)) in self.nodes.iter().enumerate() {
            let shape = match component {
                Component::Main => "box",
                Component::Base => "oval",
            };
            let label = adp.to_string().replace('"', "\\\"");
            out.push_str(&format!("  n{i} [shape={shape}, label=\"{label}\"];\n"));
        }
        for (from, targets) in self.edges.iter().enumerate() {
            for to in targets {
                out.push_str(&format!("  n{from} -> n{to};\n"));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Replaces every subterm with a defined root by a fresh variable (CAP) and
/// makes all remaining variables fresh and distinct (REN).  The root symbol
/// is kept as-is; `counter` supplies fresh variable indices.
fn cap_ren(t: &Term, defined: &BTreeSet<Symbol>, counter: &mut usize) -> Term {
    fn fresh(counter: &mut usize) -> Term {
        let v = Term::Var(format!("_c{counter}"));
        *counter += 1;
        v
    }
    fn below(t: &Term, defined: &BTreeSet<Symbol>, counter: &mut usize) -> Term {
        match t {
            Term::Var(_) => fresh(counter),
            Term::App(f, _) if defined.contains(f) => fresh(counter),
            Term::App(f, args) => Term::App(
                f.clone(),
                args.iter().map(|a| below(a, defined, counter)).collect(),
            ),
        }
    }
    match t {
        Term::Var(_) => fresh(counter),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| below(a, defined, counter)).collect(),
        ),
    }
}

/// GraphViz rendering for a plain labeled edge list; used for the
/// classical pair graphs where every node is a dependency pair.
pub fn dot_of_edges(labels: &[String], edges: &[(usize, usize)]) -> String {
    let mut out = String::from("digraph dependency_graph {\n");
    for (i, label) in labels.iter().enumerate() {
        let label = label.replace('"', "\\\"");
        out.push_str(&format!("  n{i} [shape=box, label=\"{label}\"];\n"));
    }
    for (from, to) in edges {
        out.push_str(&format!("  n{from} -> n{to};\n"));
    }
    out.push_str("}\n");
    out
}

/// Sound over-approximation of "an instance of `from_rhs` rewrites to an
/// instance of `to_lhs` below the root": CAP/REN then unification.
pub fn estimation_edge(from_rhs: &Term, to_lhs: &Term, defined: &BTreeSet<Symbol>) -> bool {
    let mut counter = 0;
    let capped = cap_ren(from_rhs, defined, &mut counter);
    let renamed = to_lhs.rename_vars("_r");
    unify_terms(&capped, &renamed).is_some()
}

fn graph_of_nodes(nodes: Vec<(Adp, Component)>, defined: &BTreeSet<Symbol>) -> DependencyGraph {
    let sharped_lhss: Vec<Term> = nodes.iter().map(|(adp, _)| adp.sharped_lhs()).collect();
    let mut edges = vec![BTreeSet::new(); nodes.len()];
    for (from, (adp, _)) in nodes.iter().enumerate() {
        for (_, sub) in adp.rhs.annotated_subterms() {
            let sharped = sub.sharped();
            for (to, lhs) in sharped_lhss.iter().enumerate() {
                if estimation_edge(&sharped, lhs, defined) {
                    edges[from].insert(to);
                }
            }
        }
    }
    DependencyGraph { nodes, edges }
}

/// Builds the estimated dependency graph of an ADP problem.
pub fn estimate_dependency_graph(problem: &AdpProblem) -> DependencyGraph {
    let defined = problem.defined_symbols();
    let nodes: Vec<(Adp, Component)> = problem
        .main
        .iter()
        .map(|adp| (adp.clone(), Component::Main))
        .chain(problem.base.iter().map(|adp| (adp.clone(), Component::Base)))
        .collect();
    graph_of_nodes(nodes, &defined)
}

/// Tarjan's algorithm, returning only the nontrivial strongly connected
/// components (on a cycle: at least two nodes, or a self-loop), in a
/// deterministic order.
pub fn sccs(graph: &DependencyGraph) -> Vec<BTreeSet<usize>> {
    struct State<'a> {
        graph: &'a DependencyGraph,
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
        for &w in &state.graph.edges[v] {
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

    let n = graph.node_count();
    let mut state = State {
        graph,
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
        .filter(|c| c.len() > 1 || c.iter().all(|&v| graph.has_edge(v, v)))
        .collect();
    nontrivial.sort();
    nontrivial
}

/// Minimal lassos of a problem: in the graph where the main ADPs are
/// flattened, take every SCC that contains a base ADP with more than one
/// annotation, and extend it with all base nodes lying on a path from the
/// SCC to a main ADP (and that main ADP), stopping at the first main node.
/// Paths are collapsed to node sets, one lasso per reachable main node.
pub fn minimal_lassos(problem: &AdpProblem) -> Vec<BTreeSet<usize>> {
    let defined = problem.defined_symbols();
    // Same node order as the full graph, with main right-hand sides
    // flattened in place so indices line up.
    let nodes: Vec<(Adp, Component)> = problem
        .main
        .iter()
        .map(|adp| (adp.flatten(), Component::Main))
        .chain(problem.base.iter().map(|adp| (adp.clone(), Component::Base)))
        .collect();
    let graph = graph_of_nodes(nodes, &defined);
    let main_count = problem.main.len();
    let is_main = |i: usize| i < main_count;

    let mut out: Vec<BTreeSet<usize>> = Vec::new();
    for scc in sccs(&graph) {
        let has_multi_annotated_base = scc
            .iter()
            .any(|&i| !is_main(i) && graph.nodes[i].0.annotation_count() > 1);
        if !has_multi_annotated_base {
            continue;
        }
        // Base nodes reachable from the SCC without entering main nodes.
        let mut forward: BTreeSet<usize> = scc.clone();
        let mut stack: Vec<usize> = scc.iter().copied().collect();
        let mut reachable_mains: BTreeSet<usize> = BTreeSet::new();
        while let Some(v) = stack.pop() {
            for &w in &graph.edges[v] {
                if is_main(w) {
                    reachable_mains.insert(w);
                } else if forward.insert(w) {
                    stack.push(w);
                }
            }
        }
        for &m in &reachable_mains {
            // Base nodes outside the SCC that can still reach m without
            // passing a main node; restrict the forward set by backward
            // reachability from m.
            let mut backward: BTreeSet<usize> = BTreeSet::from([m]);
            let mut bstack = vec![m];
            while let Some(v) = bstack.pop() {
                for u in 0..graph.node_count() {
                    if graph.has_edge(u, v)
                        && !is_main(u)
                        && forward.contains(&u)
                        && backward.insert(u)
                    {
                        bstack.push(u);
                    }
                }
            }
            let mut lasso: BTreeSet<usize> = scc.clone();
            lasso.extend(backward);
            if !out.contains(&lasso) {
                out.push(lasso);
            }
        }
    }
    out
}

/// The dependency graph processor: one sub-problem per SCC containing a
/// main ADP and per minimal lasso.  Inside each sub-problem, everything
/// outside the chosen node set is flattened and moved to the base
/// component.
pub fn dg_processor(problem: &AdpProblem) -> Vec<AdpProblem> {
    let graph = estimate_dependency_graph(problem);
    let main_count = problem.main.len();
    let mut node_sets: Vec<BTreeSet<usize>> = sccs(&graph)
        .into_iter()
        .filter(|scc| scc.iter().any(|&i| i < main_count))
        .collect();
    for lasso in minimal_lassos(problem) {
        if !node_sets.contains(&lasso) {
            node_sets.push(lasso);
        }
    }

    let all: Vec<&Adp> = problem.all().collect();
    node_sets
        .into_iter()
        .map(|q| {
            let main: Vec<Adp> = (0..main_count)
                .filter(|i| q.contains(i))
                .map(|i| all[i].clone())
                .collect();
            let mut base: Vec<Adp> = (main_count..all.len())
                .filter(|i| q.contains(i))
                .map(|i| all[i].clone())
                .collect();
            for (i, adp) in all.iter().enumerate() {
                if !q.contains(&i) {
                    base.push(adp.flatten());
                }
            }
            AdpProblem::new(main, base)
        })
        .collect()
}
