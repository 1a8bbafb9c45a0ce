//! Plain rewriting, the annotated ADP rewrite relation with variable
//! reposition functions, and bounded searches: a loop finder used as a
//! non-termination prover and exhaustive reachability used as the oracle
//! for the chain-criterion property tests.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adp::{Adp, AdpProblem, AnnotatedTerm, Component};
use crate::term::{match_term, Position, Substitution, Term};
use crate::trs::{RelativeTrs, Rule};

/// One plain rewrite step.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct RewriteStep {
    pub position: Position,
    pub rule: Rule,
    pub is_main: bool,
    pub substitution: Substitution,
    pub result: Term,
}

/// All one-step successors of `t` under the main and base rules, ordered by
/// position, then main before base, then rule index.
pub fn rewrite_successors(trs: &RelativeTrs, t: &Term) -> Vec<RewriteStep> {
    let mut steps = Vec::new();
    for pos in t.positions() {
        let sub = t.subterm_at(&pos).expect("position exists");
        if sub.is_var() {
            continue;
        }
        for (rule, is_main) in trs.all_rules() {
            if let Some(sigma) = match_term(&rule.lhs, sub) {
                let result = t.replace_at(&pos, sigma.apply(&rule.rhs));
                steps.push(RewriteStep {
                    position: pos.clone(),
                    rule: rule.clone(),
                    is_main,
                    substitution: sigma,
                    result,
                });
            }
        }
    }
    steps
}

/// A variable reposition function for an ADP `l -> r`: maps every variable
/// position of `l` to a variable position of `r` holding the same variable,
/// or to nothing.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Vrf(pub BTreeMap<Position, Option<Position>>);

impl Vrf {
    pub fn get(&self, pos: &Position) -> Option<&Position> {
        self.0.get(pos).and_then(|o| o.as_ref())
    }
}

impl fmt::Display for Vrf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (from, to)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match to {
                Some(p) => write!(f, "{from} -> {p}")?,
                None => write!(f, "{from} -> _")?,
            }
        }
        write!(f, "}}")
    }
}

/// Enumerates all VRFs of an ADP: the cartesian product, over the variable
/// positions of the left-hand side, of "drop" plus every right-hand-side
/// position carrying the same variable.
pub fn enumerate_vrfs(adp: &Adp) -> Vec<Vrf> {
    enumerate_vrfs_of(&adp.lhs, &adp.rhs.plain)
}

pub fn enumerate_vrfs_of(lhs: &Term, rhs: &Term) -> Vec<Vrf> {
    let lhs_positions = lhs.var_positions();
    let rhs_positions = rhs.var_positions();
    let mut choices: Vec<(Position, Vec<Option<Position>>)> = Vec::new();
    for lp in &lhs_positions {
        let var = lhs.subterm_at(lp).unwrap();
        let mut targets = vec![None];
        for rp in &rhs_positions {
            if rhs.subterm_at(rp).unwrap() == var {
                targets.push(Some(rp.clone()));
            }
        }
        choices.push((lp.clone(), targets));
    }
    let mut out = vec![BTreeMap::new()];
    for (lp, targets) in choices {
        let mut next = Vec::with_capacity(out.len() * targets.len());
        for partial in &out {
            for target in &targets {
                let mut map: BTreeMap<Position, Option<Position>> = partial.clone();
                map.insert(lp.clone(), target.clone());
                next.push(map);
            }
        }
        out = next;
    }
    out.into_iter().map(Vrf).collect()
}

/// Which case of the ADP rewrite relation a step used.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum StepKind {
    /// Rewriting at an annotated position; right-hand-side annotations are
    /// kept alongside the transported ones.
    Pr,
    /// Rewriting at an unannotated defined position; only transported
    /// annotations survive.
    R,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StepError {
    #[error("position {0} does not exist in the term")]
    NoSuchPosition(Position),
    #[error("left-hand side does not match the subterm at {0}")]
    NoMatch(Position),
}

/// Performs one ADP rewrite step on `s` at position `at` with `adp` and the
/// reposition function `vrf`.  Returns the result and whether the step was a
/// (pr) or an (r) step.
pub fn adp_rewrite_step(
    s: &AnnotatedTerm,
    at: &Position,
    adp: &Adp,
    vrf: &Vrf,
) -> Result<(AnnotatedTerm, StepKind), StepError> {
    let redex = s
        .plain
        .subterm_at(at)
        .ok_or_else(|| StepError::NoSuchPosition(at.clone()))?;
    let sigma = match_term(&adp.lhs, redex).ok_or_else(|| StepError::NoMatch(at.clone()))?;
    let kind = if s.annotations.contains(at) {
        StepKind::Pr
    } else {
        StepKind::R
    };

    // Annotations of the redex, relative to its root.
    let redex_annotations: Vec<Position> = s
        .annotations
        .iter()
        .filter_map(|a| at.strip_prefix(a))
        .collect();

    // Transported annotations: an annotation at rho.tau below a variable
    // position rho of the left-hand side reappears at phi(rho).tau.
    let mut transported: BTreeSet<Position> = BTreeSet::new();
    for (rho, target) in &vrf.0 {
        let Some(phi) = target else { continue };
        for ann in &redex_annotations {
            if let Some(tau) = rho.strip_prefix(ann) {
                transported.insert(phi.concat(&tau));
            }
        }
    }

    let mut inner = transported;
    if kind == StepKind::Pr {
        inner.extend(adp.rhs.annotations.iter().cloned());
    }

    let new_plain = s.plain.replace_at(at, sigma.apply(&adp.rhs.plain));
    let mut annotations: BTreeSet<Position> = s
        .annotations
        .iter()
        .filter(|a| !at.is_prefix_of(a))
        .cloned()
        .collect();
    annotations.extend(inner.into_iter().map(|b| at.concat(&b)));
    Ok((AnnotatedTerm::new(new_plain, annotations), kind))
}

/// One possible annotated step: position, ADP (by component and index),
/// VRF, resulting term and case.
#[derive(Clone, Debug)]
pub struct AdpStep {
    pub position: Position,
    pub component: Component,
    pub adp_index: usize,
    pub vrf: Vrf,
    pub kind: StepKind,
    pub result: AnnotatedTerm,
}

/// All annotated one-step successors of `s` under the problem's ADPs,
/// enumerating every position, ADP and VRF.
pub fn adp_successors(problem: &AdpProblem, s: &AnnotatedTerm) -> Vec<AdpStep> {
    let mut out = Vec::new();
    for pos in s.plain.positions() {
        let Some(sub) = s.plain.subterm_at(&pos) else {
            continue;
        };
        if sub.is_var() {
            continue;
        }
        let components = [
            (Component::Main, &problem.main),
            (Component::Base, &problem.base),
        ];
        for (component, adps) in components {
            for (adp_index, adp) in adps.iter().enumerate() {
                if match_term(&adp.lhs, sub).is_none() {
                    continue;
                }
                for vrf in enumerate_vrfs(adp) {
                    let (result, kind) =
                        adp_rewrite_step(s, &pos, adp, &vrf).expect("enumerated step applies");
                    out.push(AdpStep {
                        position: pos.clone(),
                        component,
                        adp_index,
                        vrf,
                        kind,
                        result,
                    });
                }
            }
        }
    }
    out
}

/// A certificate of relative non-termination: replaying `trace` from
/// `start` ends in a term whose subterm at `context_position` is
/// `start` instantiated by `loop_substitution`, and the trace contains at
/// least one main step.  Pumping the loop repeats that main step forever.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct LoopWitness {
    pub start: Term,
    pub trace: Vec<RewriteStep>,
    pub context_position: Position,
    pub loop_substitution: Substitution,
    pub main_steps: usize,
}

impl fmt::Display for LoopWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for step in &self.trace {
            let arrow = if step.is_main { "->" } else { "->=" };
            write!(f, " {arrow} {}", step.result)?;
        }
        write!(
            f,
            "  (loops: subterm at {} equals start, {} main step(s))",
            self.context_position, self.main_steps
        )
    }
}

/// Checks a witness against the TRS: every step must replay exactly, the
/// final term must embed the start term at the claimed position, and at
/// least one main step must occur.
pub fn replay_loop_witness(trs: &RelativeTrs, witness: &LoopWitness) -> bool {
    let mut current = witness.start.clone();
    let mut main_steps = 0usize;
    for step in &witness.trace {
        let Some(redex) = current.subterm_at(&step.position) else {
            return false;
        };
        let Some(sigma) = match_term(&step.rule.lhs, redex) else {
            return false;
        };
        let in_component = if step.is_main {
            trs.main.contains(&step.rule)
        } else {
            trs.base.contains(&step.rule)
        };
        if !in_component {
            return false;
        }
        let result = current.replace_at(&step.position, sigma.apply(&step.rule.rhs));
        if result != step.result {
            return false;
        }
        if step.is_main {
            main_steps += 1;
        }
        current = result;
    }
    if main_steps == 0 || main_steps != witness.main_steps {
        return false;
    }
    match current.subterm_at(&witness.context_position) {
        Some(sub) => *sub == witness.loop_substitution.apply(&witness.start),
        None => false,
    }
}

/// Bounds for the loop search.
#[derive(Clone, Debug)]
pub struct LoopSearchConfig {
    /// Maximum number of rewrite steps per trace.
    pub max_depth: usize,
    /// Terms larger than this are pruned.
    pub max_term_size: usize,
    /// Depth of the ground terms substituted into left-hand sides.
    pub seed_depth: usize,
    /// Cap on the number of seed terms.
    pub max_seeds: usize,
    /// Cap on explored search nodes.
    pub node_budget: usize,
}

impl Default for LoopSearchConfig {
    fn default() -> Self {
        LoopSearchConfig {
            max_depth: 6,
            max_term_size: 40,
            seed_depth: 2,
            max_seeds: 400,
            node_budget: 200_000,
        }
    }
}

/// Signals shared between the prover pipeline and the loop search.
#[derive(Default)]
pub struct SearchControl {
    pub cancel: AtomicBool,
    pub deadline: Option<Instant>,
}

impl SearchControl {
    pub fn with_deadline(deadline: Option<Instant>) -> Self {
        SearchControl {
            cancel: AtomicBool::new(false),
            deadline,
        }
    }

    pub fn should_stop(&self) -> bool {
        if self.cancel.load(Ordering::Relaxed) {
            return true;
        }
        match self.deadline {
            Some(d) => Instant::now() >= d,
            None => false,
        }
    }
}

/// Breadth-first search for a rewrite loop that repeats a main step.  Seeds
/// are every left-hand side instantiated with ground terms over the
/// signature up to `seed_depth`.  The search checks every reached term for a
/// self-embedding against each of its ancestors; absence only means
/// "unknown".
pub fn find_relative_loop(
    trs: &RelativeTrs,
    config: &LoopSearchConfig,
    control: &SearchControl,
) -> Option<LoopWitness> {
    let seeds = seed_terms(trs, config);
    let mut budget = config.node_budget;
    for seed in seeds {
        if control.should_stop() {
            return None;
        }
        if let Some(witness) = search_from(trs, &seed, config, control, &mut budget) {
            return Some(witness);
        }
        if budget == 0 {
            return None;
        }
    }
    None
}

/// Ground instantiations of every left-hand side with argument terms of
/// bounded depth, deterministic order, capped.
fn seed_terms(trs: &RelativeTrs, config: &LoopSearchConfig) -> Vec<Term> {
    let ground = ground_terms(trs, config.seed_depth);
    let mut seeds = Vec::new();
    'outer: for (rule, _) in trs.all_rules() {
        let vars: Vec<String> = rule.lhs.variables().into_iter().collect();
        if vars.is_empty() {
            seeds.push(rule.lhs.clone());
            continue;
        }
        if ground.is_empty() {
            continue;
        }
        let mut assignment = vec![0usize; vars.len()];
        loop {
            let mut sigma = Substitution::new();
            for (v, &i) in vars.iter().zip(&assignment) {
                sigma.insert(v.clone(), ground[i].clone());
            }
            seeds.push(sigma.apply(&rule.lhs));
            if seeds.len() >= config.max_seeds {
                break 'outer;
            }
            let mut k = 0;
            loop {
                if k == vars.len() {
                    continue 'outer;
                }
                assignment[k] += 1;
                if assignment[k] < ground.len() {
                    break;
                }
                assignment[k] = 0;
                k += 1;
            }
        }
    }
    seeds.truncate(config.max_seeds);
    seeds
}

/// All ground terms over the signature up to the given depth (a constant
/// has depth 1), sorted by size then structurally.
pub fn ground_terms(trs: &RelativeTrs, depth: usize) -> Vec<Term> {
    let mut by_depth: Vec<Vec<Term>> = vec![Vec::new(); depth + 1];
    for d in 1..=depth {
        let smaller: Vec<Term> = by_depth[..d].iter().flatten().cloned().collect();
        let mut layer = Vec::new();
        for sym in &trs.signature {
            if sym.arity == 0 {
                if d == 1 {
                    layer.push(Term::App(sym.clone(), Vec::new()));
                }
                continue;
            }
            if smaller.is_empty() {
                continue;
            }
            let mut assignment = vec![0usize; sym.arity];
            'args: loop {
                let args: Vec<Term> = assignment.iter().map(|&i| smaller[i].clone()).collect();
                let term = Term::App(sym.clone(), args);
                // Keep exactly-depth-d terms so each term appears once.
                if term_depth(&term) == d {
                    layer.push(term);
                }
                let mut k = 0;
                loop {
                    if k == sym.arity {
                        break 'args;
                    }
                    assignment[k] += 1;
                    if assignment[k] < smaller.len() {
                        break;
                    }
                    assignment[k] = 0;
                    k += 1;
                }
            }
        }
        by_depth[d] = layer;
    }
    let mut out: Vec<Term> = by_depth.into_iter().flatten().collect();
    out.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)));
    out
}

fn term_depth(t: &Term) -> usize {
    match t {
        Term::Var(_) => 1,
        Term::App(_, args) => 1 + args.iter().map(term_depth).max().unwrap_or(0),
    }
}

struct Node {
    term: Term,
    trace: Vec<RewriteStep>,
    main_count: usize,
}

fn search_from(
    trs: &RelativeTrs,
    seed: &Term,
    config: &LoopSearchConfig,
    control: &SearchControl,
    budget: &mut usize,
) -> Option<LoopWitness> {
    let mut queue = VecDeque::new();
    queue.push_back(Node {
        term: seed.clone(),
        trace: Vec::new(),
        main_count: 0,
    });
    while let Some(node) = queue.pop_front() {
        if control.should_stop() || *budget == 0 {
            return None;
        }
        *budget -= 1;
        if node.trace.len() >= config.max_depth {
            continue;
        }
        for step in rewrite_successors(trs, &node.term) {
            if step.result.size() > config.max_term_size {
                continue;
            }
            let mut trace = node.trace.clone();
            trace.push(step.clone());
            let main_count = node.main_count + step.is_main as usize;
            if let Some(witness) = witness_against_ancestors(seed, &trace, &step.result, main_count)
            {
                debug_assert!(replay_loop_witness(trs, &witness));
                return Some(witness);
            }
            queue.push_back(Node {
                term: step.result,
                trace,
                main_count,
            });
        }
    }
    None
}

/// Looks for an ancestor `u` on the trace and a position `p` such that the
/// final term embeds an instance of `u` at `p` with at least one main step
/// in between.
fn witness_against_ancestors(
    seed: &Term,
    trace: &[RewriteStep],
    result: &Term,
    total_main: usize,
) -> Option<LoopWitness> {
    let mut ancestor = seed.clone();
    let mut main_before = 0usize;
    for i in 0..trace.len() {
        let segment_main = total_main - main_before;
        if segment_main >= 1 {
            for pos in result.positions() {
                let sub = result.subterm_at(&pos).unwrap();
                if let Some(sigma) = match_term(&ancestor, sub) {
                    return Some(LoopWitness {
                        start: ancestor,
                        trace: trace[i..].to_vec(),
                        context_position: pos,
                        loop_substitution: sigma,
                        main_steps: segment_main,
                    });
                }
            }
        }
        main_before += trace[i].is_main as usize;
        ancestor = trace[i].result.clone();
    }
    None
}

/// Exhaustive check whether some plain rewrite sequence from `start`
/// accumulates at least `k` main steps, exploring all terms up to
/// `max_size`.  The plain side of the chain-criterion oracle.
pub fn plain_main_reach(trs: &RelativeTrs, start: &Term, k: usize, max_size: usize) -> bool {
    if k == 0 {
        return true;
    }
    let mut best: BTreeMap<Term, usize> = BTreeMap::new();
    best.insert(start.clone(), 0);
    let mut queue = VecDeque::from([(start.clone(), 0usize)]);
    while let Some((term, count)) = queue.pop_front() {
        if best.get(&term).copied().unwrap_or(0) > count {
            continue;
        }
        for step in rewrite_successors(trs, &term) {
            if step.result.size() > max_size {
                continue;
            }
            let new_count = (count + step.is_main as usize).min(k);
            if new_count >= k {
                return true;
            }
            let entry = best.entry(step.result.clone()).or_insert(usize::MAX);
            if *entry == usize::MAX || *entry < new_count {
                *entry = new_count;
                queue.push_back((step.result, new_count));
            }
        }
    }
    false
}

/// Exhaustive check whether some annotated rewrite sequence, starting from
/// *some* annotation of `start`, accumulates at least `k` main (pr) steps,
/// enumerating every ADP, position and VRF.  The annotated side of the
/// chain-criterion oracle.
pub fn adp_pr_main_reach(problem: &AdpProblem, start: &Term, k: usize, max_size: usize) -> bool {
    if k == 0 {
        return true;
    }
    let defined = problem.defined_symbols();
    let defined_positions = start.positions_where(|sym| defined.contains(sym));
    let mut best: BTreeMap<AnnotatedTerm, usize> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for subset in subsets(&defined_positions) {
        let annotated = AnnotatedTerm::new(start.clone(), subset);
        best.insert(annotated.clone(), 0);
        queue.push_back((annotated, 0usize));
    }
    while let Some((term, count)) = queue.pop_front() {
        if best.get(&term).copied().unwrap_or(0) > count {
            continue;
        }
        for step in adp_successors(problem, &term) {
            if step.result.plain.size() > max_size {
                continue;
            }
            let is_pr_main = step.component == Component::Main && step.kind == StepKind::Pr;
            let new_count = (count + is_pr_main as usize).min(k);
            if new_count >= k {
                return true;
            }
            let entry = best.entry(step.result.clone()).or_insert(usize::MAX);
            if *entry == usize::MAX || *entry < new_count {
                *entry = new_count;
                queue.push_back((step.result, new_count));
            }
        }
    }
    false
}

fn subsets(positions: &[Position]) -> Vec<BTreeSet<Position>> {
    let mut out = vec![BTreeSet::new()];
    for p in positions {
        let mut extended: Vec<BTreeSet<Position>> = out
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.insert(p.clone());
                s
            })
            .collect();
        out.append(&mut extended);
    }
    out
}
