//! Independent oracles shared by the acceptance and property suites.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;
use regex::Regex;

use typeprompt_core::dataset::{DatasetRecord, VarCategory};
use typeprompt_core::eval::{categorize_type, parse_type, TypeCategory};
use typeprompt_core::frontend::Location;
use typeprompt_core::tdg::{
    Direction, NodeId, NodeKind, OpKind, Occurrence, Role, TdgNode, TypeDependencyGraph,
};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

// ---------------------------------------------------------------- BM25

/// Textbook Okapi BM25 over pre-tokenized documents, computed term by term
/// with no shared state.
pub fn bm25_oracle(docs: &[Vec<String>], query: &[String], k1: f64, b: f64) -> Vec<f64> {
    let n = docs.len() as f64;
    let avg = docs.iter().map(Vec::len).sum::<usize>() as f64 / n;
    let mut terms: Vec<&String> = query.iter().collect();
    terms.sort();
    terms.dedup();
    docs.iter()
        .map(|d| {
            let mut score = 0.0;
            for t in &terms {
                let df = docs.iter().filter(|x| x.contains(t)).count() as f64;
                let idf = ((n - df + 0.5) / (df + 0.5)).ln().max(0.0);
                let tf = d.iter().filter(|w| w == t).count() as f64;
                if tf == 0.0 {
                    continue;
                }
                score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * d.len() as f64 / avg));
            }
            score
        })
        .collect()
}

pub const VOCAB: [&str; 16] = [
    "open", "file", "path", "read", "write", "dict", "list", "item", "key", "value", "self", "return",
    "count", "name", "data", "json",
];

pub fn random_doc(rng: &mut StdRng, max_len: usize) -> Vec<String> {
    let len = rng.random_range(1..=max_len);
    (0..len).map(|_| VOCAB.choose(rng).unwrap().to_string()).collect()
}

// ---------------------------------------------------------------- types

const ATOMS: [&str; 14] = [
    "int", "str", "float", "bool", "bytes", "None", "Any", "object", "Path", "Product",
    "requests.Session", "np.ndarray", "datetime.datetime", "MyClass",
];
const UNARY: [&str; 8] = ["List", "list", "Set", "set", "Optional", "Type", "Iterable", "FrozenSet"];
const BINARY: [&str; 4] = ["Dict", "dict", "Mapping", "Tuple"];

/// A random well-formed annotation string.
pub fn random_type(rng: &mut StdRng, depth: u32) -> String {
    let pick = if depth == 0 { 0 } else { rng.random_range(0..7) };
    match pick {
        0 | 1 => ATOMS.choose(rng).unwrap().to_string(),
        2 => format!("{}[{}]", UNARY.choose(rng).unwrap(), random_type(rng, depth - 1)),
        3 => format!(
            "{}[{}, {}]",
            BINARY.choose(rng).unwrap(),
            random_type(rng, depth - 1),
            random_type(rng, depth - 1)
        ),
        4 => format!("{} | {}", random_type(rng, 0), random_type(rng, depth - 1)),
        5 => format!(
            "Callable[[{}], {}]",
            random_type(rng, depth - 1),
            random_type(rng, depth - 1)
        ),
        _ => format!("Literal['{}']", VOCAB.choose(rng).unwrap()),
    }
}

/// Spelling variants that normalize to the same type.
pub fn respell(rng: &mut StdRng, t: &str) -> String {
    match rng.random_range(0..4) {
        0 => t.replace("List[", "list[").replace("Dict[", "dict["),
        1 => t.replace("list[", "typing.List["),
        2 => t.replace(", ", ","),
        _ => t.to_string(),
    }
}

// ---------------------------------------------------------------- metrics

/// Cell counts recomputed per cell by filtering the records, comparing
/// canonical text for EM and the outermost constructor for MTP.
pub fn naive_cells(
    records: &[DatasetRecord],
    predictions: &BTreeMap<String, Vec<String>>,
) -> BTreeMap<(Option<VarCategory>, Option<TypeCategory>, usize), (usize, usize, usize)> {
    let known = HashSet::new();
    let mut out = BTreeMap::new();
    let vs = [Some(VarCategory::Arg), Some(VarCategory::Ret), Some(VarCategory::Var), None];
    let ts = [Some(TypeCategory::Ele), Some(TypeCategory::Gen), Some(TypeCategory::Usr), None];
    for v in vs {
        for t in ts {
            for k in [1usize, 3, 5] {
                let (mut em, mut mtp, mut total) = (0, 0, 0);
                for r in records {
                    let gt = parse_type(&r.annotation);
                    let cat = categorize_type(&gt, &known);
                    if v.is_some_and(|v| v != r.kind) || t.is_some_and(|t| t != cat) {
                        continue;
                    }
                    total += 1;
                    let preds: Vec<_> = predictions
                        .get(&r.id)
                        .map(|p| p.iter().take(k).map(|s| parse_type(s)).collect())
                        .unwrap_or_default();
                    if preds.iter().any(|p| p.canonical == gt.canonical) {
                        em += 1;
                    }
                    if preds.iter().any(|p| p.ctor == gt.ctor) {
                        mtp += 1;
                    }
                }
                out.insert((v, t, k), (em, mtp, total));
            }
        }
    }
    out
}

// ---------------------------------------------------------------- graphs

/// A random graph with `n` nodes. Type literals get no incoming edges and
/// there are no self-loops; cycles are common.
pub fn random_tdg(rng: &mut StdRng, n: u32, edge_p: f64) -> TypeDependencyGraph {
    let mut g = TypeDependencyGraph::default();
    for i in 0..n {
        let kind = match rng.random_range(0..3) {
            0 => NodeKind::Symbol { name: format!("v{i}") },
            1 => NodeKind::Operation { op: OpKind::Compare },
            _ if i == 0 => NodeKind::Symbol { name: "v0".into() },
            _ => NodeKind::TypeLit { ty: "int".into() },
        };
        g.nodes.insert(
            NodeId(i),
            TdgNode {
                id: NodeId(i),
                kind,
                occurrences: vec![Occurrence {
                    location: Location::new(i + 1, 0),
                    stmt: i as usize,
                    is_def: true,
                }],
            },
        );
    }
    for s in 0..n {
        for d in 0..n {
            let lit = matches!(g.nodes[&NodeId(d)].kind, NodeKind::TypeLit { .. });
            if s != d && !lit && rng.random_bool(edge_p) {
                g.edges.insert((NodeId(s), NodeId(d)), Role::Operand);
            }
        }
    }
    g
}

/// Minimum distance from the anchors by Bellman-Ford style relaxation,
/// keeping nodes within `max_hop`.
pub fn hop_oracle(
    g: &TypeDependencyGraph,
    anchors: &[NodeId],
    dir: Direction,
    max_hop: u32,
) -> BTreeMap<NodeId, u32> {
    let mut dist: HashMap<NodeId, u32> = anchors.iter().map(|a| (*a, 0)).collect();
    for _ in 0..g.nodes.len() {
        let mut changed = false;
        for &(s, d) in g.edges.keys() {
            let (from, to) = match dir {
                Direction::Backward => (d, s),
                Direction::Forward => (s, d),
            };
            if let Some(&df) = dist.get(&from) {
                let cand = df + 1;
                if dist.get(&to).is_none_or(|&dt| cand < dt) {
                    dist.insert(to, cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist.into_iter().filter(|(_, h)| *h <= max_hop).collect()
}

// ---------------------------------------------------------------- COT

const NAME: &str = r"[A-Za-z_][A-Za-z0-9_]*";
const TYPE: &str = r"[A-Za-z_][A-Za-z0-9_.]*";

fn op_pattern() -> String {
    let call = r"[A-Za-z_][A-Za-z0-9_.\[\]'()]*";
    [
        "a tuple unpacking".to_string(),
        r"an? (?:unary )?\S+ operation".to_string(),
        "a subscript assignment".to_string(),
        "a (?:list|tuple|set|dict)".to_string(),
        "a (?:list|set|dict) comprehension".to_string(),
        "a generator expression".to_string(),
        "a conditional expression".to_string(),
        "a for-loop iteration".to_string(),
        format!("the attribute {NAME}"),
        call.to_string(),
    ]
    .map(|p| format!("(?:{p})"))
    .join("|")
}

/// The nine sentence templates: six dependency edges, usage, naming
/// convention and conclusion.
pub fn cot_templates() -> Vec<(&'static str, Regex)> {
    let op = op_pattern();
    let sym_subject = format!("(?:variable {NAME}|return value of {NAME})");
    let op_subject = format!("(?:operand|target|key|value) of (?:{op})");
    let user = format!("(?:{op}|variable {NAME})");
    let pats = [
        ("operation->symbol", format!("^The {sym_subject} is assigned from (?:{op})\\.$")),
        ("symbol->symbol", format!("^The {sym_subject} is assigned from variable {NAME}\\.$")),
        ("type->symbol", format!("^The {sym_subject} is assigned from {TYPE}\\.$")),
        ("operation->operation", format!("^The {op_subject} is (?:{op})\\.$")),
        ("symbol->operation", format!("^The {op_subject} is variable {NAME}\\.$")),
        ("type->operation", format!("^The {op_subject} is {TYPE}\\.$")),
        ("usage", format!("^The argument {NAME} is used in {user}(?:, {user})*\\.$")),
        (
            "naming",
            format!("^Based on the naming convention, it is reasonable to assume that the type of the argument {NAME} is [^`]+\\.$"),
        ),
        (
            "conclusion",
            format!("^Therefore, the type of the (?:variable {NAME}|return value of {NAME}|argument {NAME}) is `[^`]+`\\.$"),
        ),
    ];
    pats.into_iter()
        .map(|(name, p)| (name, Regex::new(&p).expect("template regex")))
        .collect()
}

/// Splits `"N. sentence"` into its ordinal and sentence.
pub fn split_step(step: &str) -> Option<(usize, &str)> {
    let (n, rest) = step.split_once(". ")?;
    Some((n.parse().ok()?, rest))
}
