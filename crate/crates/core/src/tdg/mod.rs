//! Type dependency graphs.
//!
//! An edge `a -> b` means the type of `b` depends on the type of `a`. Graphs
//! are built per scope (one function, or the module's top-level statements),
//! pruned to the component of the target variable, merged so that directly
//! connected occurrences of one variable become a single node, and finally
//! sliced around the target with breadth-first hop distances.

mod build;
mod ops;

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{Location, StmtId, TargetKind, TargetVariable};

pub use build::{build_tdg, Scope};
pub use ops::{BinOpKind, BoolOpKind, CompKind, OpKind, UnaryOpKind};

/// Default maximum hop distance kept by [`slice_tdg`].
pub const DEFAULT_MAX_HOP: u32 = 3;

/// Symbol name used for the value produced by `return` statements.
pub const RETURN_SYMBOL: &str = "@return";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Symbol { name: String },
    Operation { op: OpKind },
    TypeLit { ty: String },
}

impl NodeKind {
    pub fn symbol_name(&self) -> Option<&str> {
        match self {
            NodeKind::Symbol { name } => Some(name),
            _ => None,
        }
    }

    pub fn is_symbol(&self) -> bool {
        matches!(self, NodeKind::Symbol { .. })
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::Symbol { name } => write!(f, "Symbol({name})"),
            NodeKind::Operation { op } => write!(f, "Operation({})", op.name()),
            NodeKind::TypeLit { ty } => write!(f, "TypeLit({ty})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub location: Location,
    pub stmt: StmtId,
    /// Whether this occurrence binds the name (assignment target, parameter,
    /// import, loop variable, ...).
    pub is_def: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TdgNode {
    pub id: NodeId,
    pub kind: NodeKind,
    /// Sorted by location; never empty. Merged symbol nodes carry one entry
    /// per original occurrence.
    pub occurrences: Vec<Occurrence>,
}

impl TdgNode {
    pub fn statement_id(&self) -> StmtId {
        self.occurrences[0].stmt
    }

    pub fn location(&self) -> Location {
        self.occurrences[0].location
    }

    pub fn has_def(&self) -> bool {
        self.occurrences.iter().any(|o| o.is_def)
    }
}

/// How an input feeds an operation; picks the noun in generated sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    /// Plain data flow into a symbol.
    Flow,
    Operand,
    Target,
    Key,
    Value,
}

impl Role {
    pub fn noun(self) -> &'static str {
        match self {
            Role::Flow | Role::Operand => "operand",
            Role::Target => "target",
            Role::Key => "key",
            Role::Value => "value",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDependencyGraph {
    pub nodes: BTreeMap<NodeId, TdgNode>,
    pub edges: BTreeMap<(NodeId, NodeId), Role>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TdgError {
    #[error("target {0} not found in the type dependency graph")]
    TargetNotFound(String),
    #[error("scope `{0}` does not exist in the module")]
    ScopeNotFound(String),
}

impl TypeDependencyGraph {
    pub fn node(&self, id: NodeId) -> &TdgNode {
        &self.nodes[&id]
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Adds an edge unless it is a self-loop or already present.
    pub fn add_edge(&mut self, src: NodeId, dst: NodeId, role: Role) {
        debug_assert!(self.nodes.contains_key(&src) && self.nodes.contains_key(&dst));
        if src != dst {
            self.edges.entry((src, dst)).or_insert(role);
        }
    }

    pub fn predecessors(&self) -> HashMap<NodeId, Vec<NodeId>> {
        let mut m: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for &(s, d) in self.edges.keys() {
            m.entry(d).or_default().push(s);
        }
        m
    }

    pub fn successors(&self) -> HashMap<NodeId, Vec<NodeId>> {
        let mut m: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for &(s, d) in self.edges.keys() {
            m.entry(s).or_default().push(d);
        }
        m
    }

    /// Symbol nodes that stand for the target variable.
    pub fn target_occurrences(&self, target: &TargetVariable) -> Vec<NodeId> {
        let wanted = symbol_name_for(target);
        self.nodes
            .values()
            .filter(|n| n.kind.symbol_name() == Some(wanted))
            .map(|n| n.id)
            .collect()
    }

    fn restricted_to(&self, keep: &BTreeSet<NodeId>) -> TypeDependencyGraph {
        TypeDependencyGraph {
            nodes: self
                .nodes
                .iter()
                .filter(|(id, _)| keep.contains(id))
                .map(|(id, n)| (*id, n.clone()))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|((s, d), _)| keep.contains(s) && keep.contains(d))
                .map(|(k, r)| (*k, *r))
                .collect(),
        }
    }

    /// Debug export: a node table followed by one `src -> dst` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in self.nodes.values() {
            let _ = writeln!(out, "{} {} @{}", n.id, n.kind, n.location());
        }
        for ((s, d), role) in &self.edges {
            let _ = writeln!(out, "{s} -> {d} [{}]", role.noun());
        }
        out
    }
}

fn symbol_name_for(target: &TargetVariable) -> &str {
    match target.kind {
        TargetKind::ReturnValue => RETURN_SYMBOL,
        _ => &target.name,
    }
}

/// Keeps the nodes that are connected (ignoring edge direction) to some
/// occurrence of the target.
pub fn prune(
    g: &TypeDependencyGraph,
    target: &TargetVariable,
) -> Result<TypeDependencyGraph, TdgError> {
    let seeds = g.target_occurrences(target);
    if seeds.is_empty() {
        return Err(TdgError::TargetNotFound(describe(target)));
    }
    let mut adj: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for &(s, d) in g.edges.keys() {
        adj.entry(s).or_default().push(d);
        adj.entry(d).or_default().push(s);
    }
    let mut keep: BTreeSet<NodeId> = seeds.iter().copied().collect();
    let mut queue: VecDeque<NodeId> = seeds.into_iter().collect();
    while let Some(n) = queue.pop_front() {
        for &m in adj.get(&n).map(Vec::as_slice).unwrap_or(&[]) {
            if keep.insert(m) {
                queue.push_back(m);
            }
        }
    }
    Ok(g.restricted_to(&keep))
}

/// Collapses directly connected symbol nodes that carry the same name.
///
/// Uses a union-find over all same-name symbol edges, so one pass reaches the
/// fixpoint. Each merged node keeps the smallest id of its members.
pub fn merge_symbols(g: &TypeDependencyGraph) -> TypeDependencyGraph {
    let ids: Vec<NodeId> = g.nodes.keys().copied().collect();
    let index: HashMap<NodeId, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let mut parent: Vec<usize> = (0..ids.len()).collect();

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    for &(s, d) in g.edges.keys() {
        let (a, b) = (&g.nodes[&s].kind, &g.nodes[&d].kind);
        if let (Some(x), Some(y)) = (a.symbol_name(), b.symbol_name()) {
            if x == y {
                let (rs, rd) = (find(&mut parent, index[&s]), find(&mut parent, index[&d]));
                if rs != rd {
                    // keep the smaller index (= smaller id) as representative
                    let (lo, hi) = if rs < rd { (rs, rd) } else { (rd, rs) };
                    parent[hi] = lo;
                }
            }
        }
    }

    let mut rep: HashMap<NodeId, NodeId> = HashMap::new();
    for (i, id) in ids.iter().enumerate() {
        let r = find(&mut parent, i);
        rep.insert(*id, ids[r]);
    }

    let mut nodes: BTreeMap<NodeId, TdgNode> = BTreeMap::new();
    for (id, n) in &g.nodes {
        let r = rep[id];
        match nodes.get_mut(&r) {
            Some(existing) => existing.occurrences.extend(n.occurrences.iter().copied()),
            None => {
                let mut n = n.clone();
                n.id = r;
                nodes.insert(r, n);
            }
        }
    }
    for n in nodes.values_mut() {
        n.occurrences.sort();
        n.occurrences.dedup();
    }

    let mut edges = BTreeMap::new();
    for (&(s, d), &role) in &g.edges {
        let (rs, rd) = (rep[&s], rep[&d]);
        if rs != rd {
            edges.entry((rs, rd)).or_insert(role);
        }
    }
    TypeDependencyGraph { nodes, edges }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    /// Against the edges: what the target's type is built from.
    Backward,
    /// Along the edges: where the target is used.
    Forward,
}

impl Direction {
    pub fn for_target(kind: TargetKind) -> Self {
        match kind {
            TargetKind::Argument => Direction::Forward,
            _ => Direction::Backward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlicedTdg {
    pub graph: TypeDependencyGraph,
    /// Hop-0 nodes. Backward slices have the defining node(s); forward slices
    /// have every occurrence node of the argument.
    pub anchors: Vec<NodeId>,
    pub hops: BTreeMap<NodeId, u32>,
    pub direction: Direction,
    pub max_hop: u32,
}

impl SlicedTdg {
    pub fn target_node(&self) -> NodeId {
        self.anchors[0]
    }

    pub fn max_observed_hop(&self) -> u32 {
        self.hops.values().copied().max().unwrap_or(0)
    }

    /// Hop level of an edge: the number of steps needed to traverse it.
    pub fn edge_level(&self, src: NodeId, dst: NodeId) -> u32 {
        match self.direction {
            Direction::Backward => self.hops[&dst] + 1,
            Direction::Forward => self.hops[&src] + 1,
        }
    }
}

/// Picks the hop-0 nodes for a target in a merged graph.
pub fn anchor_nodes(g: &TypeDependencyGraph, target: &TargetVariable) -> Vec<NodeId> {
    let occ = g.target_occurrences(target);
    match target.kind {
        TargetKind::Argument | TargetKind::ReturnValue => occ,
        TargetKind::LocalVariable | TargetKind::GlobalVariable => {
            let at_line: Vec<NodeId> = occ
                .iter()
                .copied()
                .filter(|id| {
                    g.nodes[id]
                        .occurrences
                        .iter()
                        .any(|o| o.is_def && o.location.line == target.location.line)
                })
                .collect();
            if !at_line.is_empty() {
                return at_line;
            }
            let defs: Vec<NodeId> = occ.iter().copied().filter(|id| g.nodes[id].has_def()).collect();
            if defs.is_empty() {
                occ
            } else {
                defs
            }
        }
    }
}

/// Breadth-first slice around the target. Nodes farther than `max_hop` are
/// dropped; an edge is kept when it can be traversed within `max_hop` steps.
pub fn slice_tdg(
    g: &TypeDependencyGraph,
    target: &TargetVariable,
    max_hop: u32,
) -> Result<SlicedTdg, TdgError> {
    let anchors = anchor_nodes(g, target);
    if anchors.is_empty() {
        return Err(TdgError::TargetNotFound(describe(target)));
    }
    let direction = Direction::for_target(target.kind);
    Ok(slice_from(g, &anchors, direction, max_hop))
}

/// Slice from explicit anchors.
pub fn slice_from(
    g: &TypeDependencyGraph,
    anchors: &[NodeId],
    direction: Direction,
    max_hop: u32,
) -> SlicedTdg {
    let next = match direction {
        Direction::Backward => g.predecessors(),
        Direction::Forward => g.successors(),
    };
    let mut hops: BTreeMap<NodeId, u32> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for &a in anchors {
        if hops.insert(a, 0).is_none() {
            queue.push_back(a);
        }
    }
    while let Some(n) = queue.pop_front() {
        let h = hops[&n];
        if h == max_hop {
            continue;
        }
        for &m in next.get(&n).map(Vec::as_slice).unwrap_or(&[]) {
            if !hops.contains_key(&m) {
                hops.insert(m, h + 1);
                queue.push_back(m);
            }
        }
    }

    let nodes = g
        .nodes
        .iter()
        .filter(|(id, _)| hops.contains_key(id))
        .map(|(id, n)| (*id, n.clone()))
        .collect();
    let edges = g
        .edges
        .iter()
        .filter(|((s, d), _)| {
            let (from, to) = match direction {
                Direction::Backward => (d, s),
                Direction::Forward => (s, d),
            };
            matches!((hops.get(from), hops.get(to)), (Some(&hf), Some(_)) if hf < max_hop)
        })
        .map(|(k, r)| (*k, *r))
        .collect();
    let mut anchors: Vec<NodeId> = anchors.to_vec();
    anchors.sort();
    anchors.dedup();
    SlicedTdg {
        graph: TypeDependencyGraph { nodes, edges },
        anchors,
        hops,
        direction,
        max_hop,
    }
}

fn describe(t: &TargetVariable) -> String {
    format!("{} `{}` at line {}", t.kind, t.display_name(), t.location.line)
}
