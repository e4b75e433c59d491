//! Python type expressions: parsing, normalization and comparison.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A parsed type such as `dict[str, list[int]]`.
///
/// List-form arguments (the parameter list of `Callable[[int], str]`) use an
/// empty constructor and render as `[int]`. Strings that do not parse become
/// opaque atoms whose constructor is the trimmed input.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TypeExpr {
    pub ctor: String,
    pub args: Vec<TypeExpr>,
    /// Whether an argument list follows the constructor. Only list-form
    /// arguments may have an empty list (`Callable[[], int]`).
    pub bracketed: bool,
    pub canonical: String,
}

impl TypeExpr {
    fn new(ctor: String, args: Vec<TypeExpr>, bracketed: bool) -> Self {
        let canonical = if ctor == "|" {
            let members: Vec<&str> = args.iter().map(|a| a.canonical.as_str()).collect();
            members.join(" | ")
        } else if bracketed {
            let inner: Vec<&str> = args.iter().map(|a| a.canonical.as_str()).collect();
            format!("{ctor}[{}]", inner.join(", "))
        } else {
            ctor.clone()
        };
        TypeExpr {
            ctor,
            args,
            bracketed,
            canonical,
        }
    }

    pub fn atom(name: impl Into<String>) -> Self {
        TypeExpr::new(name.into(), Vec::new(), false)
    }

    pub fn generic(ctor: impl Into<String>, args: Vec<TypeExpr>) -> Self {
        TypeExpr::new(ctor.into(), args, true)
    }

    pub fn is_list_form(&self) -> bool {
        self.ctor.is_empty()
    }
}

impl fmt::Display for TypeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeCategory {
    Ele,
    Gen,
    Usr,
}

impl TypeCategory {
    pub const ALL: [TypeCategory; 3] = [TypeCategory::Ele, TypeCategory::Gen, TypeCategory::Usr];

    pub fn label(self) -> &'static str {
        match self {
            TypeCategory::Ele => "Ele",
            TypeCategory::Gen => "Gen",
            TypeCategory::Usr => "Usr",
        }
    }
}

/// Parses and normalizes.
pub fn parse_type(s: &str) -> TypeExpr {
    parse_with(s, true)
}

/// Parses without any normalization; only whitespace is canonicalized.
pub fn parse_type_strict(s: &str) -> TypeExpr {
    parse_with(s, false)
}

pub fn parse_with(s: &str, normalize: bool) -> TypeExpr {
    let trimmed = s.trim();
    let parsed = tokenize(trimmed).and_then(|toks| {
        let mut p = Parser { toks, pos: 0 };
        let t = p.union()?;
        (p.pos == p.toks.len()).then_some(t)
    });
    match parsed {
        Some(raw) if normalize => normalized(raw, false),
        Some(raw) => raw,
        None => TypeExpr::atom(trimmed),
    }
}

pub fn exact_match(pred: &TypeExpr, gt: &TypeExpr) -> bool {
    pred == gt
}

pub fn match_to_parametric(pred: &TypeExpr, gt: &TypeExpr) -> bool {
    pred.ctor == gt.ctor
}

const ELEMENTARY: &[&str] = &[
    "int",
    "float",
    "str",
    "bool",
    "bytes",
    "complex",
    "None",
    "NoneType",
    "object",
    "Any",
    "bytearray",
    "memoryview",
    "range",
    "slice",
    "ellipsis",
    "NoReturn",
    "Never",
    "Text",
    "AnyStr",
];

const GENERIC_CONTAINERS: &[&str] = &[
    "list",
    "dict",
    "set",
    "frozenset",
    "tuple",
    "type",
    "Union",
    "Optional",
    "Literal",
    "Callable",
    "Iterable",
    "Iterator",
    "Generator",
    "AsyncIterable",
    "AsyncIterator",
    "AsyncGenerator",
    "Awaitable",
    "Coroutine",
    "Sequence",
    "MutableSequence",
    "Mapping",
    "MutableMapping",
    "AbstractSet",
    "MutableSet",
    "Collection",
    "Container",
    "KeysView",
    "ValuesView",
    "ItemsView",
    "Deque",
    "deque",
    "DefaultDict",
    "defaultdict",
    "OrderedDict",
    "Counter",
    "ChainMap",
    "Pattern",
    "Match",
    "IO",
    "ClassVar",
    "Final",
];

/// Type category of a parsed annotation. Anything with arguments is generic,
/// even when its constructor is user-defined.
pub fn categorize_type(t: &TypeExpr, known_user_types: &HashSet<String>) -> TypeCategory {
    if t.bracketed || GENERIC_CONTAINERS.contains(&t.ctor.as_str()) {
        TypeCategory::Gen
    } else if known_user_types.contains(&t.ctor) {
        TypeCategory::Usr
    } else if ELEMENTARY.contains(&t.ctor.as_str()) {
        TypeCategory::Ele
    } else {
        TypeCategory::Usr
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Str(String),
    Open,
    Close,
    Comma,
    Pipe,
}

fn tokenize(s: &str) -> Option<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '[' => {
                out.push(Tok::Open);
                i += 1;
            }
            ']' => {
                out.push(Tok::Close);
                i += 1;
            }
            ',' => {
                out.push(Tok::Comma);
                i += 1;
            }
            '|' => {
                out.push(Tok::Pipe);
                i += 1;
            }
            '\'' | '"' => {
                let end = chars[i + 1..].iter().position(|&d| d == c)? + i + 1;
                out.push(Tok::Str(chars[i..=end].iter().collect()));
                i = end + 1;
            }
            c if c.is_alphanumeric() || matches!(c, '_' | '.' | '-') => {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || matches!(chars[i], '_' | '.' | '-')) {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                if word.split('.').any(str::is_empty) && word != "..." {
                    return None;
                }
                out.push(Tok::Name(word));
            }
            _ => return None,
        }
    }
    Some(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn union(&mut self) -> Option<TypeExpr> {
        let first = self.primary()?;
        if self.peek() != Some(&Tok::Pipe) {
            return Some(first);
        }
        let mut members = vec![first];
        while self.eat(&Tok::Pipe) {
            members.push(self.primary()?);
        }
        Some(TypeExpr::generic("|", members))
    }

    fn primary(&mut self) -> Option<TypeExpr> {
        match self.peek()?.clone() {
            Tok::Name(n) => {
                self.pos += 1;
                if self.eat(&Tok::Open) {
                    let args = self.list()?;
                    if args.is_empty() {
                        return None;
                    }
                    Some(TypeExpr::generic(n, args))
                } else {
                    Some(TypeExpr::atom(n))
                }
            }
            Tok::Str(s) => {
                self.pos += 1;
                Some(TypeExpr::atom(s))
            }
            Tok::Open => {
                self.pos += 1;
                Some(TypeExpr::generic("", self.list()?))
            }
            _ => None,
        }
    }

    /// Comma-separated items up to and including the closing bracket.
    fn list(&mut self) -> Option<Vec<TypeExpr>> {
        let mut items = Vec::new();
        if self.eat(&Tok::Close) {
            return Some(items);
        }
        loop {
            items.push(self.union()?);
            if self.eat(&Tok::Close) {
                return Some(items);
            }
            if !self.eat(&Tok::Comma) {
                return None;
            }
        }
    }
}

const PREFIXES: &[&str] = &["typing.", "typing_extensions.", "builtins."];

fn normalize_name(name: &str) -> String {
    let mut n = name;
    for p in PREFIXES {
        if let Some(rest) = n.strip_prefix(p) {
            n = rest;
            break;
        }
    }
    match n {
        "List" => "list",
        "Dict" => "dict",
        "Set" => "set",
        "Tuple" => "tuple",
        "FrozenSet" => "frozenset",
        "Type" => "type",
        other => other,
    }
    .to_string()
}

fn unquote(s: &str) -> Option<&str> {
    let first = s.chars().next()?;
    if matches!(first, '\'' | '"') && s.len() >= 2 && s.ends_with(first) {
        Some(&s[1..s.len() - 1])
    } else {
        None
    }
}

fn normalized(t: TypeExpr, in_literal: bool) -> TypeExpr {
    if !t.bracketed {
        if let Some(inner) = unquote(&t.ctor) {
            if in_literal {
                return t;
            }
            // forward reference
            return parse_type(inner);
        }
        return TypeExpr::atom(normalize_name(&t.ctor));
    }
    let ctor = if t.ctor == "|" {
        "Union".to_string()
    } else {
        normalize_name(&t.ctor)
    };
    let literal = ctor == "Literal";
    let args: Vec<TypeExpr> = t.args.into_iter().map(|a| normalized(a, literal)).collect();
    match ctor.as_str() {
        "Optional" if args.len() == 1 => {
            let mut members = args;
            members.push(TypeExpr::atom("None"));
            make_union(members)
        }
        "Union" => make_union(args),
        _ => TypeExpr::generic(ctor, args),
    }
}

fn make_union(members: Vec<TypeExpr>) -> TypeExpr {
    let mut flat: Vec<TypeExpr> = Vec::new();
    for m in members {
        if m.ctor == "Union" && m.bracketed {
            flat.extend(m.args);
        } else {
            flat.push(m);
        }
    }
    flat.sort_by(|a, b| a.canonical.cmp(&b.canonical));
    flat.dedup();
    if flat.len() == 1 {
        flat.pop().unwrap_or_else(|| TypeExpr::atom("None"))
    } else {
        TypeExpr::generic("Union", flat)
    }
}
