//! Proof objects: a tree of processor applications ending in SN / NOT-SN /
//! UNKNOWN leaves, with text, JSON and DOT renderings.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::classic::FastPathRoute;
use crate::orders::OrientationResult;
use crate::rewrite::LoopWitness;

/// The final answer of the prover.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Verdict {
    Yes,
    No,
    Maybe,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Yes => "YES",
            Verdict::No => "NO",
            Verdict::Maybe => "MAYBE",
        })
    }
}

impl Verdict {
    /// Exit code convention: 0 = YES, 1 = NO, 2 = MAYBE.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Yes => 0,
            Verdict::No => 1,
            Verdict::Maybe => 2,
        }
    }
}

/// Verdict of a single proof node.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeVerdict {
    Sn,
    NotSn,
    Unknown,
}

impl fmt::Display for NodeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NodeVerdict::Sn => "SN",
            NodeVerdict::NotSn => "NOT-SN",
            NodeVerdict::Unknown => "UNKNOWN",
        })
    }
}

/// Structured payload of a proof node.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProofParams {
    Empty,
    Note {
        text: String,
    },
    /// A dependency graph decomposition: node labels, edges, the chosen
    /// SCCs and lassos, and a DOT rendering of the graph.
    Graph {
        node_labels: Vec<String>,
        edges: Vec<(usize, usize)>,
        components: Vec<Vec<usize>>,
        lassos: Vec<Vec<usize>>,
        dot: String,
    },
    /// A successful reduction-pair search.
    Orientation {
        orientation: OrientationResult,
    },
    /// A failed reduction-pair search with every attempted coefficient
    /// bound.
    OrientationFailed {
        mode: String,
        bounds: Vec<u64>,
    },
    /// Derelatifying processor (2) selection.
    Split {
        selected: Vec<String>,
    },
    /// How a dominance fast path applied.
    FastPath {
        route: FastPathRoute,
    },
    /// Duplicating-base preprocessing outcome.
    Preprocess {
        moved: Vec<String>,
        removed: Vec<String>,
    },
    /// A non-termination certificate.
    LoopFound {
        witness: LoopWitness,
    },
}

/// One node of the proof tree.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ProofNode {
    pub label: String,
    pub params: ProofParams,
    pub problem: String,
    pub children: Vec<ProofNode>,
    pub verdict: Option<NodeVerdict>,
}

impl ProofNode {
    pub fn leaf(
        label: impl Into<String>,
        problem: impl Into<String>,
        verdict: NodeVerdict,
    ) -> ProofNode {
        ProofNode {
            label: label.into(),
            params: ProofParams::Empty,
            problem: problem.into(),
            children: Vec::new(),
            verdict: Some(verdict),
        }
    }

    pub fn with_params(mut self, params: ProofParams) -> ProofNode {
        self.params = params;
        self
    }

    pub fn node(
        label: impl Into<String>,
        problem: impl Into<String>,
        params: ProofParams,
        children: Vec<ProofNode>,
    ) -> ProofNode {
        let verdict = combined_verdict(&children);
        ProofNode {
            label: label.into(),
            params,
            problem: problem.into(),
            children,
            verdict: Some(verdict),
        }
    }

    /// The node's effective verdict; `Unknown` when unset.
    pub fn effective_verdict(&self) -> NodeVerdict {
        self.verdict.unwrap_or(NodeVerdict::Unknown)
    }

    /// Depth-first iterator over the whole tree.
    pub fn walk(&self) -> Vec<&ProofNode> {
        let mut out = vec![self];
        let mut i = 0;
        while i < out.len() {
            let node = out[i];
            out.extend(node.children.iter());
            i += 1;
        }
        out
    }

    /// All orientation results in the tree (reduction pair, rule removal,
    /// classical reduction pair and preprocessing nodes).
    pub fn orientations(&self) -> Vec<&OrientationResult> {
        self.walk()
            .into_iter()
            .filter_map(|n| match &n.params {
                ProofParams::Orientation { orientation } => Some(orientation),
                _ => None,
            })
            .collect()
    }
}

/// SN iff all children SN; NOT-SN as soon as one child is NOT-SN.
pub fn combined_verdict(children: &[ProofNode]) -> NodeVerdict {
    if children
        .iter()
        .any(|c| c.effective_verdict() == NodeVerdict::NotSn)
    {
        return NodeVerdict::NotSn;
    }
    if children
        .iter()
        .all(|c| c.effective_verdict() == NodeVerdict::Sn)
    {
        NodeVerdict::Sn
    } else {
        NodeVerdict::Unknown
    }
}

/// Output format of `render_proof`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ProofFormat {
    Text,
    Json,
    Dot,
}

/// Renders a proof tree.  `Text` is an indented human-readable tree, `Json`
/// a schema-stable serialization that parses back to the identical tree,
/// and `Dot` the dependency graphs of all graph-decomposition nodes.
pub fn render_proof(node: &ProofNode, format: ProofFormat) -> String {
    match format {
        ProofFormat::Text => {
            let mut out = String::new();
            render_text(node, 0, &mut out);
            out
        }
        ProofFormat::Json => serde_json::to_string_pretty(node).expect("proof serializes"),
        ProofFormat::Dot => {
            let mut out = String::new();
            for n in node.walk() {
                if let ProofParams::Graph { dot, .. } = &n.params {
                    out.push_str(dot);
                    out.push('\n');
                }
            }
            out
        }
    }
}

/// Parses a JSON proof rendered by `render_proof`.
pub fn parse_proof_json(text: &str) -> Result<ProofNode, serde_json::Error> {
    serde_json::from_str(text)
}

fn render_text(node: &ProofNode, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    let verdict = match node.verdict {
        Some(v) => format!(" [{v}]"),
        None => String::new(),
    };
    out.push_str(&format!("{pad}{}{verdict}\n", node.label));
    if !node.problem.is_empty() {
        out.push_str(&format!("{pad}  problem: {}\n", node.problem));
    }
    match &node.params {
        ProofParams::Empty => {}
        ProofParams::Note { text } => {
            out.push_str(&format!("{pad}  note: {text}\n"));
        }
        ProofParams::Graph {
            node_labels,
            edges,
            components,
            lassos,
            ..
        } => {
            for (i, label) in node_labels.iter().enumerate() {
                out.push_str(&format!("{pad}  node {i}: {label}\n"));
            }
            let edge_list: Vec<String> = edges
                .iter()
                .map(|(a, b)| format!("{a}->{b}"))
                .collect();
            out.push_str(&format!("{pad}  edges: {}\n", edge_list.join(" ")));
            for scc in components {
                out.push_str(&format!("{pad}  scc: {scc:?}\n"));
            }
            for lasso in lassos {
                out.push_str(&format!("{pad}  lasso: {lasso:?}\n"));
            }
        }
        ProofParams::Orientation { orientation } => {
            out.push_str(&format!(
                "{pad}  coefficient bound: {}\n",
                orientation.coeff_bound
            ));
            for line in orientation.interpretation.render_lines() {
                out.push_str(&format!("{pad}  {line}\n"));
            }
            for c in &orientation.strict {
                out.push_str(&format!("{pad}  strict: {} > {}\n", c.lhs, c.rhs));
            }
        }
        ProofParams::OrientationFailed { mode, bounds } => {
            out.push_str(&format!(
                "{pad}  no orientation found ({mode}), coefficient bounds tried: {bounds:?}\n"
            ));
        }
        ProofParams::Split { selected } => {
            for s in selected {
                out.push_str(&format!("{pad}  split: {s}\n"));
            }
        }
        ProofParams::FastPath { route } => {
            let text = match route {
                FastPathRoute::OrdinaryTermination => "empty base, ordinary termination".into(),
                FastPathRoute::Dominance => {
                    "base is non-duplicating and dominated by the main TRS".into()
                }
                FastPathRoute::Split { moved } => {
                    let names: Vec<String> = moved.iter().map(|r| r.to_string()).collect();
                    format!("split base, moved: {}", names.join("; "))
                }
            };
            out.push_str(&format!("{pad}  route: {text}\n"));
        }
        ProofParams::Preprocess { moved, removed } => {
            if !moved.is_empty() {
                out.push_str(&format!("{pad}  moved to main: {}\n", moved.join("; ")));
            }
            if !removed.is_empty() {
                out.push_str(&format!("{pad}  removed: {}\n", removed.join("; ")));
            }
        }
        ProofParams::LoopFound { witness } => {
            out.push_str(&format!("{pad}  {witness}\n"));
        }
    }
    for child in &node.children {
        render_text(child, indent + 1, out);
    }
}
