//! Chain-of-thought text generated from a sliced graph.
//!
//! Variables and return values get one sentence per traversed edge, ordered by
//! hop level. Arguments get a usage sentence and a naming-convention sentence.
//! Every prompt ends with a conclusion that quotes the type in backticks.

mod phrases;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::frontend::{TargetKind, TargetVariable};
use crate::tdg::{Direction, NodeId, NodeKind, SlicedTdg, TdgNode};

pub use phrases::op_phrase;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CotPrompt {
    /// Numbered sentences, `"1. ..."`, `"2. ..."`.
    pub steps: Vec<String>,
    pub conclusion: String,
    pub rendered: String,
}

impl CotPrompt {
    fn new(sentences: Vec<String>, conclusion: String) -> Self {
        let steps: Vec<String> = sentences
            .into_iter()
            .enumerate()
            .map(|(i, s)| format!("{}. {s}", i + 1))
            .collect();
        let mut parts = steps.clone();
        parts.push(conclusion.clone());
        CotPrompt {
            rendered: parts.join(" "),
            steps,
            conclusion,
        }
    }
}

/// How the target is named in sentences: "variable x", "return value of f",
/// "argument x".
pub fn target_phrase(target: &TargetVariable) -> String {
    match target.kind {
        TargetKind::LocalVariable | TargetKind::GlobalVariable => format!("variable {}", target.name),
        TargetKind::ReturnValue => format!("return value of {}", target.display_name()),
        TargetKind::Argument => format!("argument {}", target.name),
    }
}

pub fn conclusion(target: &TargetVariable, ty: &str) -> String {
    format!("Therefore, the type of the {} is `{ty}`.", target_phrase(target))
}

pub fn generate_cot(s: &SlicedTdg, target: &TargetVariable, annotated_type: &str) -> CotPrompt {
    let sentences = match s.direction {
        Direction::Backward => backward_sentences(s, target),
        Direction::Forward => argument_sentences(s, target, annotated_type),
    };
    CotPrompt::new(sentences, conclusion(target, annotated_type))
}

fn backward_sentences(s: &SlicedTdg, target: &TargetVariable) -> Vec<String> {
    let g = &s.graph;
    let mut edges: Vec<(NodeId, NodeId)> = g.edges.keys().copied().collect();
    edges.sort_by(|a, b| edge_order(s, *a, *b));
    edges
        .into_iter()
        .map(|(src, dst)| {
            let (src_node, dst_node) = (g.node(src), g.node(dst));
            match &dst_node.kind {
                NodeKind::Symbol { name } => {
                    let subject = if s.anchors.contains(&dst) {
                        target_phrase(target)
                    } else {
                        format!("variable {name}")
                    };
                    format!("The {subject} is assigned from {}.", source_phrase(src_node))
                }
                NodeKind::Operation { op } => {
                    let role = g.edges[&(src, dst)].noun();
                    format!("The {role} of {} is {}.", op_phrase(op), source_phrase(src_node))
                }
                // type literals never have incoming edges
                NodeKind::TypeLit { ty } => format!("The type {ty} is {}.", source_phrase(src_node)),
            }
        })
        .collect()
}

fn edge_order(s: &SlicedTdg, a: (NodeId, NodeId), b: (NodeId, NodeId)) -> Ordering {
    let key = |(src, dst): (NodeId, NodeId)| {
        let loc = s.graph.node(src).location();
        (s.edge_level(src, dst), loc.line, loc.column, src, dst)
    };
    key(a).cmp(&key(b))
}

fn source_phrase(n: &TdgNode) -> String {
    match &n.kind {
        NodeKind::Symbol { name } => format!("variable {name}"),
        NodeKind::Operation { op } => op_phrase(op),
        NodeKind::TypeLit { ty } => ty.clone(),
    }
}

fn argument_sentences(s: &SlicedTdg, target: &TargetVariable, annotated_type: &str) -> Vec<String> {
    let g = &s.graph;
    let mut uses: Vec<(NodeId, NodeId)> = g
        .edges
        .keys()
        .copied()
        .filter(|(src, dst)| s.anchors.contains(src) && !s.anchors.contains(dst))
        .collect();
    uses.sort_by(|a, b| {
        let (la, lb) = (g.node(a.1).location(), g.node(b.1).location());
        (la, a.1).cmp(&(lb, b.1))
    });
    let mut users: Vec<String> = Vec::new();
    for (_, dst) in uses {
        let phrase = source_phrase(g.node(dst));
        if !users.contains(&phrase) {
            users.push(phrase);
        }
    }
    if users.is_empty() {
        if let Some(f) = &target.enclosing_function {
            users.push(f.rsplit('.').next().unwrap_or(f).to_string());
        }
    }
    vec![
        format!("The argument {} is used in {}.", target.name, users.join(", ")),
        format!(
            "Based on the naming convention, it is reasonable to assume that the type of the argument {} is {annotated_type}.",
            target.name
        ),
    ]
}
