//! The proof strategy: dominance fast paths, duplicating-base
//! preprocessing, the ADP processor pipeline with backtracking over the
//! incomplete derelatifying split, and a concurrent loop search for NO
//! answers.
//!
//! Per problem the processors run in a fixed order: derelatify once the
//! base is annotation-free (the classical pipeline is cheap), decompose
//! along the dependency graph, try the lasso-guided derelatifying split,
//! then reduction pairs with escalating coefficient bounds, then rule
//! removal, then the split of all remaining annotated base ADPs.  Complete
//! processors commit; the sound-but-incomplete splits backtrack when their
//! branch cannot be finished.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::adp::{canonical_adp_problem, AdpProblem};
use crate::classic::{
    classic_dg_processor, classic_rpp_processor, dominance_fast_path, drp1, drp2, DpProblem,
};
use crate::graph::{dg_processor, estimate_dependency_graph, minimal_lassos, sccs};
use crate::orders::{
    find_reduction_pair, preprocess_duplicating_base, rpp_processor, rule_removal_processor,
    DupPreprocess, OrientationMode,
};
use crate::proof::{NodeVerdict, ProofNode, ProofParams, Verdict};
use crate::rewrite::{find_relative_loop, LoopSearchConfig, LoopWitness, SearchControl};
use crate::trs::RelativeTrs;

/// Prover settings; every bound is positive.
#[derive(Clone, Debug)]
pub struct ProverConfig {
    /// Wall-clock budget; exceeding it yields MAYBE with a partial proof.
    pub timeout: Option<Duration>,
    /// Largest coefficient tried by the interpretation searches.
    pub max_coeff: u64,
    /// Whether the loop search runs alongside the processor pipeline.
    pub loop_search: bool,
    /// Maximum trace length of the loop search.
    pub loop_depth: usize,
    /// Term size bound of the loop search.
    pub loop_term_size: usize,
    /// Instantiation depth for loop-search seed terms.
    pub loop_seed_depth: usize,
    /// Recursion cap of the processor pipeline.
    pub max_recursion: usize,
}

impl Default for ProverConfig {
    fn default() -> Self {
        ProverConfig {
            timeout: Some(Duration::from_secs(60)),
            max_coeff: 2,
            loop_search: true,
            loop_depth: 6,
            loop_term_size: 40,
            loop_seed_depth: 2,
            max_recursion: 64,
        }
    }
}

/// The prover's answer together with its proof tree.
#[derive(Clone, Debug)]
pub struct ProveResult {
    pub verdict: Verdict,
    pub proof: ProofNode,
}

struct Ctx<'a> {
    config: &'a ProverConfig,
    deadline: Option<Instant>,
    abort: &'a AtomicBool,
}

impl Ctx<'_> {
    fn stopped(&self) -> bool {
        if self.abort.load(Ordering::Relaxed) {
            return true;
        }
        match self.deadline {
            Some(d) => Instant::now() >= d,
            None => false,
        }
    }
}

/// Decides relative termination of `trs`.  YES iff every proof obligation
/// was discharged, NO iff a replaying loop witness was found, MAYBE
/// otherwise.  The processor pipeline and the loop search run concurrently
/// under a shared deadline; the loop witness, if any, is the only place a
/// NOT-SN verdict can originate.
pub fn prove(trs: &RelativeTrs, config: &ProverConfig) -> ProveResult {
    let deadline = config.timeout.map(|t| Instant::now() + t);
    let summary = trs_summary(trs);

    if !config.loop_search {
        let abort = AtomicBool::new(false);
        let ctx = Ctx {
            config,
            deadline,
            abort: &abort,
        };
        let (verdict, children) = run_pipeline(trs, &ctx);
        let verdict = match verdict {
            NodeVerdict::Sn => Verdict::Yes,
            _ => Verdict::Maybe,
        };
        return ProveResult {
            verdict,
            proof: root_node(summary, children, verdict),
        };
    }

    let abort = AtomicBool::new(false);
    let control = SearchControl::with_deadline(deadline);
    let witness_cell: Mutex<Option<LoopWitness>> = Mutex::new(None);
    let loop_config = LoopSearchConfig {
        max_depth: config.loop_depth,
        max_term_size: config.loop_term_size,
        seed_depth: config.loop_seed_depth,
        ..LoopSearchConfig::default()
    };

    let (pipeline_verdict, children) = std::thread::scope(|scope| {
        scope.spawn(|| {
            if let Some(witness) = find_relative_loop(trs, &loop_config, &control) {
                *witness_cell.lock().unwrap() = Some(witness);
                abort.store(true, Ordering::Relaxed);
            }
        });
        let ctx = Ctx {
            config,
            deadline,
            abort: &abort,
        };
        let out = run_pipeline(trs, &ctx);
        // A finished pipeline ends the search either way: on SN the loop
        // search cannot succeed, otherwise we are about to wait for it.
        if out.0 == NodeVerdict::Sn {
            control.cancel.store(true, Ordering::Relaxed);
        }
        out
    });

    let witness = witness_cell.into_inner().unwrap();
    match (pipeline_verdict, witness) {
        (NodeVerdict::Sn, witness) => {
            debug_assert!(witness.is_none(), "SN proof and loop witness cannot coexist");
            ProveResult {
                verdict: Verdict::Yes,
                proof: root_node(summary, children, Verdict::Yes),
            }
        }
        (_, Some(witness)) => {
            let node = ProofNode {
                label: "loop witness".into(),
                params: ProofParams::LoopFound { witness },
                problem: summary.clone(),
                children: Vec::new(),
                verdict: Some(NodeVerdict::NotSn),
            };
            ProveResult {
                verdict: Verdict::No,
                proof: root_node(summary, vec![node], Verdict::No),
            }
        }
        (_, None) => ProveResult {
            verdict: Verdict::Maybe,
            proof: root_node(summary, children, Verdict::Maybe),
        },
    }
}

fn trs_summary(trs: &RelativeTrs) -> String {
    let main: Vec<String> = trs.main.iter().map(|r| r.to_string()).collect();
    let base: Vec<String> = trs.base.iter().map(|r| r.to_string()).collect();
    format!("R = {{{}}} / R= = {{{}}}", main.join(", "), base.join(", "))
}

fn root_node(summary: String, children: Vec<ProofNode>, verdict: Verdict) -> ProofNode {
    let node_verdict = match verdict {
        Verdict::Yes => NodeVerdict::Sn,
        Verdict::No => NodeVerdict::NotSn,
        Verdict::Maybe => NodeVerdict::Unknown,
    };
    ProofNode {
        label: "relative termination".into(),
        params: ProofParams::Empty,
        problem: summary,
        children,
        verdict: Some(node_verdict),
    }
}

/// Fast path, preprocessing, canonical ADPs, then the processor pipeline.
fn run_pipeline(trs: &RelativeTrs, ctx: &Ctx) -> (NodeVerdict, Vec<ProofNode>) {
    let mut children = Vec::new();

    if let Some((dp, route)) = dominance_fast_path(trs, None) {
        let tree = solve_classic(ctx, &dp, &mut Vec::new(), 0);
        let solved = tree.effective_verdict() == NodeVerdict::Sn;
        if solved {
            let node = ProofNode::node(
                "dominance fast path",
                trs_summary(trs),
                ProofParams::FastPath { route },
                vec![tree],
            );
            return (NodeVerdict::Sn, vec![node]);
        }
        children.push(ProofNode {
            label: "dominance fast path abandoned".into(),
            params: ProofParams::Note {
                text: "the ordinary DP problem could not be solved; continuing with ADPs".into(),
            },
            problem: trs_summary(trs),
            children: Vec::new(),
            verdict: None,
        });
    }

    let (preprocessed, outcome) = preprocess_duplicating_base(trs, ctx.config.max_coeff, ctx.deadline);
    match &outcome {
        DupPreprocess::Unchanged => {}
        DupPreprocess::Oriented { result, removed } => {
            children.push(ProofNode {
                label: "duplicating base preprocessing".into(),
                params: ProofParams::Orientation {
                    orientation: result.clone(),
                },
                problem: trs_summary(trs),
                children: vec![ProofNode {
                    label: "rules removed".into(),
                    params: ProofParams::Preprocess {
                        moved: Vec::new(),
                        removed: removed.iter().map(|r| r.to_string()).collect(),
                    },
                    problem: String::new(),
                    children: Vec::new(),
                    verdict: None,
                }],
                verdict: None,
            });
        }
        DupPreprocess::MovedToMain { moved } => {
            children.push(ProofNode {
                label: "duplicating base preprocessing".into(),
                params: ProofParams::Preprocess {
                    moved: moved.iter().map(|r| r.to_string()).collect(),
                    removed: Vec::new(),
                },
                problem: trs_summary(trs),
                children: Vec::new(),
                verdict: None,
            });
        }
    }

    let problem = match canonical_adp_problem(&preprocessed) {
        Ok(problem) => problem,
        Err(err) => {
            children.push(ProofNode::leaf(
                format!("canonical ADPs unavailable: {err}"),
                trs_summary(&preprocessed),
                NodeVerdict::Unknown,
            ));
            return (NodeVerdict::Unknown, children);
        }
    };
    let tree = solve_adp(ctx, &problem, &mut Vec::new(), 0);
    let verdict = tree.effective_verdict();
    children.push(tree);
    (verdict, children)
}

fn solve_adp(
    ctx: &Ctx,
    problem: &AdpProblem,
    ancestors: &mut Vec<AdpProblem>,
    depth: usize,
) -> ProofNode {
    let pstr = problem.to_string();
    if ctx.stopped() {
        return ProofNode::leaf("search aborted", pstr, NodeVerdict::Unknown);
    }
    if problem.main.is_empty() {
        return ProofNode::leaf("SN: no main ADPs", pstr, NodeVerdict::Sn);
    }
    if !problem.has_annotations() {
        return ProofNode::leaf("SN: no annotated symbols", pstr, NodeVerdict::Sn);
    }
    if depth >= ctx.config.max_recursion || ancestors.contains(problem) {
        return ProofNode::leaf("unresolved: search limit", pstr, NodeVerdict::Unknown);
    }
    ancestors.push(problem.clone());
    let node = solve_adp_inner(ctx, problem, ancestors, depth, pstr);
    ancestors.pop();
    node
}

fn solve_adp_inner(
    ctx: &Ctx,
    problem: &AdpProblem,
    ancestors: &mut Vec<AdpProblem>,
    depth: usize,
    pstr: String,
) -> ProofNode {
    let mut attempts: Vec<ProofNode> = Vec::new();

    // Derelatifying processor (1): with an annotation-free base, hand over
    // to the classical DP framework.
    if let Some(dp) = drp1(problem) {
        let tree = solve_classic(ctx, &dp, &mut Vec::new(), depth + 1);
        let node = ProofNode::node(
            "derelatifying processor (1)",
            pstr.clone(),
            ProofParams::Empty,
            vec![tree],
        );
        if node.effective_verdict() == NodeVerdict::Sn {
            return node;
        }
        attempts.push(node);
    }

    // Dependency graph processor: sound and complete, so progress commits.
    let subs = dg_processor(problem);
    let progress = subs.len() != 1 || subs[0] != *problem;
    if progress {
        let graph = estimate_dependency_graph(problem);
        let components = sccs(&graph);
        let lassos = minimal_lassos(problem);
        let params = ProofParams::Graph {
            node_labels: graph.nodes.iter().map(|(adp, _)| adp.to_string()).collect(),
            edges: graph
                .edges
                .iter()
                .enumerate()
                .flat_map(|(from, targets)| targets.iter().map(move |&to| (from, to)))
                .collect(),
            components: components
                .iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
            lassos: lassos.iter().map(|l| l.iter().copied().collect()).collect(),
            dot: graph.to_dot(),
        };
        let children: Vec<ProofNode> = subs
            .iter()
            .map(|sub| solve_adp(ctx, sub, ancestors, depth + 1))
            .collect();
        return ProofNode::node("dependency graph processor", pstr, params, children);
    }

    // Derelatifying processor (2) on the lasso selection: incomplete, so a
    // failed branch backtracks.
    let lassos = minimal_lassos(problem);
    let lasso_selection = base_selection_from_lassos(problem, &lassos);
    if !lasso_selection.is_empty() {
        if let Some(node) = try_drp2(ctx, problem, ancestors, depth, &pstr, &lasso_selection) {
            if node.effective_verdict() == NodeVerdict::Sn {
                return node;
            }
            attempts.push(node);
        }
    }

    // Reduction pair processor with escalating coefficient bounds.
    let mut bounds = Vec::new();
    for bound in 1..=ctx.config.max_coeff {
        if ctx.stopped() {
            break;
        }
        bounds.push(bound);
        if let Some(result) = find_reduction_pair(problem, bound, OrientationMode::Rpp, ctx.deadline)
        {
            let next = rpp_processor(problem, &result);
            let child = solve_adp(ctx, &next, ancestors, depth + 1);
            let mut node = ProofNode::node(
                "reduction pair processor",
                pstr,
                ProofParams::Orientation {
                    orientation: result,
                },
                vec![child],
            );
            if node.effective_verdict() != NodeVerdict::Sn {
                node.children.extend(attempts);
            }
            return node;
        }
    }
    attempts.push(ProofNode {
        label: "reduction pair processor: no orientation".into(),
        params: ProofParams::OrientationFailed {
            mode: "reduction pair".into(),
            bounds: bounds.clone(),
        },
        problem: pstr.clone(),
        children: Vec::new(),
        verdict: None,
    });

    // Rule removal with a context-closed strict order.
    for bound in 1..=ctx.config.max_coeff {
        if ctx.stopped() {
            break;
        }
        if let Some(result) =
            find_reduction_pair(problem, bound, OrientationMode::RuleRemoval, ctx.deadline)
        {
            let next = rule_removal_processor(problem, &result);
            if next == *problem {
                break;
            }
            let child = solve_adp(ctx, &next, ancestors, depth + 1);
            let mut node = ProofNode::node(
                "rule removal processor",
                pstr,
                ProofParams::Orientation {
                    orientation: result,
                },
                vec![child],
            );
            if node.effective_verdict() != NodeVerdict::Sn {
                node.children.extend(attempts);
            }
            return node;
        }
    }
    attempts.push(ProofNode {
        label: "rule removal processor: no orientation".into(),
        params: ProofParams::OrientationFailed {
            mode: "rule removal".into(),
            bounds,
        },
        problem: pstr.clone(),
        children: Vec::new(),
        verdict: None,
    });

    // Fallback derelatifying split: all annotated base ADPs.
    let fallback: Vec<usize> = (0..problem.base.len())
        .filter(|&i| problem.base[i].annotation_count() > 0)
        .collect();
    if !fallback.is_empty() && fallback != lasso_selection {
        if let Some(node) = try_drp2(ctx, problem, ancestors, depth, &pstr, &fallback) {
            if node.effective_verdict() == NodeVerdict::Sn {
                return node;
            }
            attempts.push(node);
        }
    }

    ProofNode {
        label: "unresolved".into(),
        params: ProofParams::Empty,
        problem: pstr,
        children: attempts,
        verdict: Some(NodeVerdict::Unknown),
    }
}

/// Base ADP indices whose annotations lie on some lasso.
fn base_selection_from_lassos(
    problem: &AdpProblem,
    lassos: &[std::collections::BTreeSet<usize>],
) -> Vec<usize> {
    let main_len = problem.main.len();
    (0..problem.base.len())
        .filter(|&i| {
            problem.base[i].annotation_count() > 0
                && lassos.iter().any(|l| l.contains(&(main_len + i)))
        })
        .collect()
}

fn try_drp2(
    ctx: &Ctx,
    problem: &AdpProblem,
    ancestors: &mut Vec<AdpProblem>,
    depth: usize,
    pstr: &str,
    selection: &[usize],
) -> Option<ProofNode> {
    let candidate = drp2(problem, selection).ok()?;
    if candidate == *problem || ancestors.contains(&candidate) {
        return None;
    }
    let selected: Vec<String> = selection
        .iter()
        .map(|&i| problem.base[i].to_string())
        .collect();
    let child = solve_adp(ctx, &candidate, ancestors, depth + 1);
    Some(ProofNode::node(
        "derelatifying processor (2)",
        pstr.to_string(),
        ProofParams::Split { selected },
        vec![child],
    ))
}

fn solve_classic(
    ctx: &Ctx,
    problem: &DpProblem,
    ancestors: &mut Vec<DpProblem>,
    depth: usize,
) -> ProofNode {
    let pstr = problem.to_string();
    if ctx.stopped() {
        return ProofNode::leaf("search aborted", pstr, NodeVerdict::Unknown);
    }
    if problem.pairs.is_empty() {
        return ProofNode::leaf("SN: no dependency pairs", pstr, NodeVerdict::Sn);
    }
    if depth >= ctx.config.max_recursion || ancestors.contains(problem) {
        return ProofNode::leaf("unresolved: search limit", pstr, NodeVerdict::Unknown);
    }
    ancestors.push(problem.clone());

    let subs = classic_dg_processor(problem);
    let progress = subs.len() != 1 || subs[0] != *problem;
    if progress {
        let edges = crate::classic::classic_dependency_graph(problem);
        let node_labels: Vec<String> = problem.pairs.iter().map(|p| p.to_string()).collect();
        let edge_list: Vec<(usize, usize)> = edges
            .iter()
            .enumerate()
            .flat_map(|(from, targets)| targets.iter().map(move |&to| (from, to)))
            .collect();
        let dot = crate::graph::dot_of_edges(&node_labels, &edge_list);
        let params = ProofParams::Graph {
            node_labels,
            edges: edge_list,
            components: subs
                .iter()
                .map(|sub| {
                    sub.pairs
                        .iter()
                        .map(|p| problem.pairs.iter().position(|q| q == p).unwrap())
                        .collect()
                })
                .collect(),
            lassos: Vec::new(),
            dot,
        };
        let children: Vec<ProofNode> = subs
            .iter()
            .map(|sub| solve_classic(ctx, sub, ancestors, depth + 1))
            .collect();
        ancestors.pop();
        return ProofNode::node("classical dependency graph processor", pstr, params, children);
    }

    let mut bounds = Vec::new();
    for bound in 1..=ctx.config.max_coeff {
        if ctx.stopped() {
            break;
        }
        bounds.push(bound);
        if let Some((next, result)) = classic_rpp_processor(problem, bound, ctx.deadline) {
            let child = solve_classic(ctx, &next, ancestors, depth + 1);
            ancestors.pop();
            return ProofNode::node(
                "classical reduction pair processor",
                pstr,
                ProofParams::Orientation {
                    orientation: result,
                },
                vec![child],
            );
        }
    }
    ancestors.pop();
    ProofNode {
        label: "unresolved".into(),
        params: ProofParams::OrientationFailed {
            mode: "classical reduction pair".into(),
            bounds,
        },
        problem: pstr,
        children: Vec::new(),
        verdict: Some(NodeVerdict::Unknown),
    }
}
