//! Graph construction from the AST.
//!
//! Each variable occurrence becomes its own symbol node. A use receives an
//! edge from every definition that may reach it (branches are unioned, loop
//! bodies get back edges), so [`super::merge_symbols`] can later fold the
//! occurrences of one variable together.

use std::collections::{BTreeSet, HashMap, HashSet};

use rustpython_parser::ast::{self, Ranged};
use rustpython_parser::text_size::TextRange;

use super::{
    BoolOpKind, CompKind, NodeId, NodeKind, Occurrence, OpKind, Role, TdgError, TdgNode,
    TypeDependencyGraph, RETURN_SYMBOL,
};
use crate::frontend::{SourceModule, StmtId};

/// Which statements a graph covers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scope {
    /// Top-level statements, excluding function and class definitions.
    Module,
    /// One function, by qualified name.
    Function(String),
}

pub fn build_tdg(m: &SourceModule, scope: &Scope) -> Result<TypeDependencyGraph, TdgError> {
    let mut b = Builder {
        m,
        g: TypeDependencyGraph::default(),
        next: 0,
        defs: HashMap::new(),
        loops: Vec::new(),
        shadow: Vec::new(),
        stmt: 0,
    };
    match scope {
        Scope::Module => b.block(&m.suite),
        Scope::Function(qualname) => {
            let info = m
                .function(qualname)
                .ok_or_else(|| TdgError::ScopeNotFound(qualname.clone()))?;
            let stmt = find_stmt(m, &m.suite, info.stmt)
                .ok_or_else(|| TdgError::ScopeNotFound(qualname.clone()))?;
            let (args, body) = match stmt {
                ast::Stmt::FunctionDef(f) => (&*f.args, &f.body),
                ast::Stmt::AsyncFunctionDef(f) => (&*f.args, &f.body),
                _ => return Err(TdgError::ScopeNotFound(qualname.clone())),
            };
            b.stmt = info.stmt;
            b.parameters(args);
            b.block(body);
            if falls_through(body) {
                // implicit `return None` at the end of the body
                b.stmt = info.stmt;
                let range = stmt.range();
                let none = b.type_lit("None", range);
                let d = b.def_name(RETURN_SYMBOL, range, false);
                b.g.add_edge(none, d, Role::Flow);
            }
        }
    }
    Ok(b.g)
}

/// Whether control can reach the end of a block.
fn falls_through(body: &[ast::Stmt]) -> bool {
    use ast::Stmt as S;
    match body.last() {
        None => true,
        Some(S::Return(_) | S::Raise(_)) => false,
        Some(S::If(i)) => falls_through(&i.body) || i.orelse.is_empty() || falls_through(&i.orelse),
        Some(S::With(w)) => falls_through(&w.body),
        Some(S::AsyncWith(w)) => falls_through(&w.body),
        Some(S::While(w)) => !matches!(&*w.test, ast::Expr::Constant(c) if matches!(c.value, ast::Constant::Bool(true))),
        Some(_) => true,
    }
}

fn find_stmt<'a>(m: &SourceModule, stmts: &'a [ast::Stmt], id: StmtId) -> Option<&'a ast::Stmt> {
    for s in stmts {
        if m.stmt_id(s) == id {
            return Some(s);
        }
        for block in child_blocks(s) {
            if let Some(found) = find_stmt(m, block, id) {
                return Some(found);
            }
        }
    }
    None
}

fn child_blocks(s: &ast::Stmt) -> Vec<&[ast::Stmt]> {
    use ast::Stmt as S;
    match s {
        S::FunctionDef(f) => vec![&f.body],
        S::AsyncFunctionDef(f) => vec![&f.body],
        S::ClassDef(c) => vec![&c.body],
        S::For(f) => vec![&f.body, &f.orelse],
        S::AsyncFor(f) => vec![&f.body, &f.orelse],
        S::While(w) => vec![&w.body, &w.orelse],
        S::If(i) => vec![&i.body, &i.orelse],
        S::With(w) => vec![&w.body],
        S::AsyncWith(w) => vec![&w.body],
        S::Try(t) => {
            let mut v: Vec<&[ast::Stmt]> = vec![&t.body];
            for ast::ExceptHandler::ExceptHandler(h) in &t.handlers {
                v.push(&h.body);
            }
            v.push(&t.orelse);
            v.push(&t.finalbody);
            v
        }
        S::TryStar(t) => {
            let mut v: Vec<&[ast::Stmt]> = vec![&t.body];
            for ast::ExceptHandler::ExceptHandler(h) in &t.handlers {
                v.push(&h.body);
            }
            v.push(&t.orelse);
            v.push(&t.finalbody);
            v
        }
        S::Match(m) => m.cases.iter().map(|c| c.body.as_slice()).collect(),
        _ => Vec::new(),
    }
}

type DefState = HashMap<String, BTreeSet<NodeId>>;

#[derive(Default)]
struct LoopFrame {
    uses: Vec<(String, NodeId)>,
    defs: Vec<(String, NodeId)>,
}

struct Builder<'m> {
    m: &'m SourceModule,
    g: TypeDependencyGraph,
    next: u32,
    /// Reaching definitions per name.
    defs: DefState,
    loops: Vec<LoopFrame>,
    /// Names bound by enclosing comprehensions.
    shadow: Vec<HashSet<String>>,
    stmt: StmtId,
}

impl Builder<'_> {
    fn node(&mut self, kind: NodeKind, range: TextRange, is_def: bool) -> NodeId {
        let id = NodeId(self.next);
        self.next += 1;
        let occ = Occurrence {
            location: self.m.location_of(range),
            stmt: self.stmt,
            is_def,
        };
        self.g.nodes.insert(
            id,
            TdgNode {
                id,
                kind,
                occurrences: vec![occ],
            },
        );
        id
    }

    fn op(&mut self, op: OpKind, range: TextRange, inputs: &[(Option<NodeId>, Role)]) -> NodeId {
        let id = self.node(NodeKind::Operation { op }, range, false);
        for &(input, role) in inputs {
            if let Some(src) = input {
                self.g.add_edge(src, id, role);
            }
        }
        id
    }

    fn type_lit(&mut self, ty: &str, range: TextRange) -> NodeId {
        self.node(NodeKind::TypeLit { ty: ty.to_string() }, range, false)
    }

    fn use_name(&mut self, name: &str, range: TextRange) -> NodeId {
        let id = self.node(NodeKind::Symbol { name: name.to_string() }, range, false);
        let reaching: Vec<NodeId> = self
            .defs
            .get(name)
            .map(|s| s.iter().copied().collect())
            .unwrap_or_default();
        for d in reaching {
            self.g.add_edge(d, id, Role::Flow);
        }
        for frame in &mut self.loops {
            frame.uses.push((name.to_string(), id));
        }
        id
    }

    /// Binds `name`. A strong definition replaces the reaching definitions; a
    /// weak one (element writes) adds to them.
    fn def_name(&mut self, name: &str, range: TextRange, strong: bool) -> NodeId {
        let id = self.node(NodeKind::Symbol { name: name.to_string() }, range, true);
        let entry = self.defs.entry(name.to_string()).or_default();
        if strong {
            entry.clear();
        }
        entry.insert(id);
        for frame in &mut self.loops {
            frame.defs.push((name.to_string(), id));
        }
        id
    }

    fn is_shadowed(&self, name: &str) -> bool {
        self.shadow.iter().any(|s| s.contains(name))
    }

    fn parameters(&mut self, args: &ast::Arguments) {
        let with_defaults = args
            .posonlyargs
            .iter()
            .chain(args.args.iter())
            .chain(args.kwonlyargs.iter());
        for a in with_defaults {
            let default = a.default.as_deref().and_then(|d| self.expr(d));
            let id = self.def_name(a.def.arg.as_str(), a.def.range, true);
            if let Some(d) = default {
                self.g.add_edge(d, id, Role::Flow);
            }
        }
        for a in args.vararg.iter().chain(args.kwarg.iter()) {
            self.def_name(a.arg.as_str(), a.range, true);
        }
    }

    fn block(&mut self, stmts: &[ast::Stmt]) {
        for s in stmts {
            self.stmt(s);
        }
    }

    fn union_into(base: &mut DefState, other: DefState) {
        for (k, v) in other {
            base.entry(k).or_default().extend(v);
        }
    }

    /// Runs each arm from the same starting state and unions the results.
    fn branches(&mut self, arms: &[&[ast::Stmt]]) {
        let start = self.defs.clone();
        let mut merged = DefState::new();
        for arm in arms {
            self.defs = start.clone();
            self.block(arm);
            Self::union_into(&mut merged, std::mem::take(&mut self.defs));
        }
        self.defs = merged;
    }

    fn looped(&mut self, prelude: impl FnOnce(&mut Self), body: &[ast::Stmt]) {
        let before = self.defs.clone();
        self.loops.push(LoopFrame::default());
        prelude(self);
        self.block(body);
        let frame = self.loops.pop().unwrap_or_default();
        for (uname, u) in &frame.uses {
            for (dname, d) in &frame.defs {
                if uname == dname {
                    self.g.add_edge(*d, *u, Role::Flow);
                }
            }
        }
        // the body may run zero times
        Self::union_into(&mut self.defs, before);
    }

    fn stmt(&mut self, s: &ast::Stmt) {
        use ast::Stmt as S;
        let saved = self.stmt;
        self.stmt = self.m.stmt_id(s);
        match s {
            S::FunctionDef(_) | S::AsyncFunctionDef(_) | S::ClassDef(_) => {}
            S::Assign(a) => {
                let v = self.expr(&a.value);
                for t in &a.targets {
                    self.assign_to(t, v);
                }
            }
            S::AnnAssign(a) => {
                let v = a.value.as_deref().and_then(|e| self.expr(e));
                self.assign_to(&a.target, v);
            }
            S::AugAssign(a) => self.aug_assign(a),
            S::Return(r) => {
                let v = match &r.value {
                    Some(e) => self.expr(e),
                    None => Some(self.type_lit("None", r.range)),
                };
                let d = self.def_name(RETURN_SYMBOL, r.range, false);
                if let Some(v) = v {
                    self.g.add_edge(v, d, Role::Flow);
                }
            }
            S::Expr(e) => {
                self.expr(&e.value);
            }
            S::If(i) => {
                self.expr(&i.test);
                self.branches(&[&i.body, &i.orelse]);
            }
            S::While(w) => {
                self.expr(&w.test);
                self.looped(|_| {}, &w.body);
                self.block(&w.orelse);
            }
            S::For(ast::StmtFor {
                target,
                iter,
                body,
                orelse,
                range,
                ..
            })
            | S::AsyncFor(ast::StmtAsyncFor {
                target,
                iter,
                body,
                orelse,
                range,
                ..
            }) => {
                let it = self.expr(iter);
                let elem = self.op(OpKind::Iterate, *range, &[(it, Role::Operand)]);
                self.looped(|b| b.assign_to(target, Some(elem)), body);
                self.block(orelse);
            }
            S::With(ast::StmtWith { items, body, .. })
            | S::AsyncWith(ast::StmtAsyncWith { items, body, .. }) => {
                for item in items {
                    let v = self.expr(&item.context_expr);
                    if let Some(vars) = &item.optional_vars {
                        self.assign_to(vars, v);
                    }
                }
                self.block(body);
            }
            S::Try(ast::StmtTry {
                body,
                handlers,
                orelse,
                finalbody,
                ..
            })
            | S::TryStar(ast::StmtTryStar {
                body,
                handlers,
                orelse,
                finalbody,
                ..
            }) => {
                let before = self.defs.clone();
                self.block(body);
                Self::union_into(&mut self.defs, before);
                let start = self.defs.clone();
                let mut merged = DefState::new();
                self.block(orelse);
                Self::union_into(&mut merged, std::mem::take(&mut self.defs));
                for ast::ExceptHandler::ExceptHandler(h) in handlers {
                    self.defs = start.clone();
                    let saved_stmt = self.stmt;
                    let ty = h.type_.as_deref().and_then(|e| self.expr(e));
                    if let Some(name) = &h.name {
                        let d = self.def_name(name.as_str(), h.range, true);
                        if let Some(ty) = ty {
                            self.g.add_edge(ty, d, Role::Flow);
                        }
                    }
                    self.stmt = saved_stmt;
                    self.block(&h.body);
                    Self::union_into(&mut merged, std::mem::take(&mut self.defs));
                }
                self.defs = merged;
                self.block(finalbody);
            }
            S::Match(mt) => {
                self.expr(&mt.subject);
                let mut arms: Vec<&[ast::Stmt]> = mt.cases.iter().map(|c| c.body.as_slice()).collect();
                arms.push(&[]);
                for c in &mt.cases {
                    if let Some(g) = &c.guard {
                        self.expr(g);
                    }
                }
                self.branches(&arms);
            }
            S::Raise(r) => {
                if let Some(e) = &r.exc {
                    self.expr(e);
                }
            }
            S::Assert(a) => {
                self.expr(&a.test);
            }
            S::Import(imp) => {
                for alias in &imp.names {
                    let bound = match &alias.asname {
                        Some(a) => a.to_string(),
                        None => alias.name.split('.').next().unwrap_or_default().to_string(),
                    };
                    self.def_name(&bound, alias.range, true);
                }
            }
            S::ImportFrom(imp) => {
                for alias in &imp.names {
                    if alias.name.as_str() == "*" {
                        continue;
                    }
                    let bound = alias.asname.as_ref().unwrap_or(&alias.name).to_string();
                    self.def_name(&bound, alias.range, true);
                }
            }
            S::Delete(_)
            | S::Pass(_)
            | S::Break(_)
            | S::Continue(_)
            | S::Global(_)
            | S::Nonlocal(_)
            | S::TypeAlias(_) => {}
        }
        self.stmt = saved;
    }

    fn aug_assign(&mut self, a: &ast::StmtAugAssign) {
        let kind = OpKind::AugAssign(a.op.into());
        match &*a.target {
            ast::Expr::Name(n) => {
                let u = self.use_name(n.id.as_str(), n.range);
                let v = self.expr(&a.value);
                let op = self.op(kind, a.range, &[(Some(u), Role::Target), (v, Role::Operand)]);
                let d = self.def_name(n.id.as_str(), n.range, true);
                self.g.add_edge(op, d, Role::Flow);
            }
            other => {
                let t = self.expr(other);
                let v = self.expr(&a.value);
                self.op(kind, a.range, &[(t, Role::Target), (v, Role::Operand)]);
            }
        }
    }

    fn assign_to(&mut self, target: &ast::Expr, value: Option<NodeId>) {
        use ast::Expr as E;
        match target {
            E::Name(n) => {
                let d = self.def_name(n.id.as_str(), n.range, true);
                if let Some(v) = value {
                    self.g.add_edge(v, d, Role::Flow);
                }
            }
            E::Tuple(ast::ExprTuple { elts, range, .. }) | E::List(ast::ExprList { elts, range, .. }) => {
                let op = self.op(OpKind::Assign, *range, &[(value, Role::Target)]);
                for e in elts {
                    self.assign_to(e, Some(op));
                }
            }
            E::Starred(s) => self.assign_to(&s.value, value),
            E::Attribute(a) => {
                let obj = self.expr(&a.value);
                self.op(
                    OpKind::Attribute(a.attr.to_string()),
                    a.range,
                    &[(value, Role::Operand), (obj, Role::Target)],
                );
            }
            E::Subscript(s) => {
                let obj = self.expr(&s.value);
                let key = self.expr(&s.slice);
                let op = self.op(
                    OpKind::SubscriptWrite,
                    s.range,
                    &[(obj, Role::Target), (key, Role::Operand), (value, Role::Operand)],
                );
                if let E::Name(n) = &*s.value {
                    let d = self.def_name(n.id.as_str(), n.range, false);
                    self.g.add_edge(op, d, Role::Flow);
                }
            }
            other => {
                log::debug!("unsupported assignment target at {:?}", other.range());
            }
        }
    }

    fn exprs(&mut self, es: &[ast::Expr], role: Role) -> Vec<(Option<NodeId>, Role)> {
        es.iter().map(|e| (self.expr(e), role)).collect()
    }

    fn expr(&mut self, e: &ast::Expr) -> Option<NodeId> {
        use ast::Expr as E;
        let range = e.range();
        Some(match e {
            E::Name(n) => {
                if self.is_shadowed(n.id.as_str()) {
                    return None;
                }
                self.use_name(n.id.as_str(), range)
            }
            E::Constant(c) => self.type_lit(constant_type(&c.value), range),
            E::JoinedStr(_) | E::FormattedValue(_) => self.type_lit("str", range),
            E::BinOp(b) => {
                let l = self.expr(&b.left);
                let r = self.expr(&b.right);
                self.op(
                    OpKind::BinOp(b.op.into()),
                    range,
                    &[(l, Role::Operand), (r, Role::Operand)],
                )
            }
            E::UnaryOp(u) => {
                let v = self.expr(&u.operand);
                self.op(OpKind::UnaryOp(u.op.into()), range, &[(v, Role::Operand)])
            }
            E::BoolOp(b) => {
                let inputs = self.exprs(&b.values, Role::Operand);
                let kind = match b.op {
                    ast::BoolOp::And => BoolOpKind::And,
                    ast::BoolOp::Or => BoolOpKind::Or,
                };
                self.op(OpKind::BoolOp(kind), range, &inputs)
            }
            E::Compare(c) => {
                let mut inputs = vec![(self.expr(&c.left), Role::Operand)];
                inputs.extend(self.exprs(&c.comparators, Role::Operand));
                self.op(OpKind::Compare, range, &inputs)
            }
            E::Call(c) => self.call(c),
            E::Attribute(a) => {
                let v = self.expr(&a.value);
                self.op(OpKind::Attribute(a.attr.to_string()), range, &[(v, Role::Operand)])
            }
            E::Subscript(s) => {
                let v = self.expr(&s.value);
                let k = self.expr(&s.slice);
                self.op(
                    OpKind::SubscriptRead,
                    range,
                    &[(v, Role::Operand), (k, Role::Operand)],
                )
            }
            E::List(l) => {
                let inputs = self.exprs(&l.elts, Role::Value);
                self.op(OpKind::ListLit, range, &inputs)
            }
            E::Tuple(t) => {
                let inputs = self.exprs(&t.elts, Role::Value);
                self.op(OpKind::TupleLit, range, &inputs)
            }
            E::Set(s) => {
                let inputs = self.exprs(&s.elts, Role::Value);
                self.op(OpKind::SetLit, range, &inputs)
            }
            E::Dict(d) => {
                let mut inputs = Vec::new();
                for (k, v) in d.keys.iter().zip(&d.values) {
                    match k {
                        Some(k) => {
                            let kid = self.expr(k);
                            inputs.push((kid, Role::Key));
                            let vid = self.expr(v);
                            inputs.push((vid, Role::Value));
                        }
                        // `**other` spreads a mapping
                        None => inputs.push((self.expr(v), Role::Value)),
                    }
                }
                self.op(OpKind::DictLit, range, &inputs)
            }
            E::ListComp(c) => self.comprehension(CompKind::List, &c.generators, &[(&c.elt, Role::Value)], range),
            E::SetComp(c) => self.comprehension(CompKind::Set, &c.generators, &[(&c.elt, Role::Value)], range),
            E::GeneratorExp(c) => {
                self.comprehension(CompKind::Generator, &c.generators, &[(&c.elt, Role::Value)], range)
            }
            E::DictComp(c) => self.comprehension(
                CompKind::Dict,
                &c.generators,
                &[(&c.key, Role::Key), (&c.value, Role::Value)],
                range,
            ),
            E::IfExp(i) => {
                let b = self.expr(&i.body);
                let o = self.expr(&i.orelse);
                self.op(OpKind::IfExp, range, &[(b, Role::Operand), (o, Role::Operand)])
            }
            E::NamedExpr(n) => {
                let v = self.expr(&n.value);
                match &*n.target {
                    E::Name(name) => {
                        let d = self.def_name(name.id.as_str(), name.range, true);
                        if let Some(v) = v {
                            self.g.add_edge(v, d, Role::Flow);
                        }
                        d
                    }
                    _ => return v,
                }
            }
            E::Await(a) => return self.expr(&a.value),
            E::Starred(s) => return self.expr(&s.value),
            E::Lambda(_) | E::Yield(_) | E::YieldFrom(_) | E::Slice(_) => {
                log::debug!(
                    "{}: unsupported construct at {}",
                    self.m.path.display(),
                    self.m.location_of(range)
                );
                return None;
            }
        })
    }

    fn call(&mut self, c: &ast::ExprCall) -> NodeId {
        let mut inputs = Vec::new();
        let name = match &*c.func {
            ast::Expr::Name(n) => n.id.to_string(),
            ast::Expr::Attribute(a) => match dotted_root(&a.value) {
                // `os.path.join(...)`: the root name feeds the call
                Some(root) => {
                    if !self.is_shadowed(root.id.as_str()) {
                        inputs.push((Some(self.use_name(root.id.as_str(), root.range)), Role::Operand));
                    }
                    self.m.snippet(c.func.range()).split_whitespace().collect::<String>()
                }
                None => {
                    inputs.push((self.expr(&a.value), Role::Operand));
                    a.attr.to_string()
                }
            },
            other => {
                inputs.push((self.expr(other), Role::Operand));
                "call".to_string()
            }
        };
        inputs.extend(self.exprs(&c.args, Role::Operand));
        for kw in &c.keywords {
            let v = self.expr(&kw.value);
            inputs.push((v, Role::Operand));
        }
        self.op(OpKind::Call(name), c.range, &inputs)
    }

    fn comprehension(
        &mut self,
        kind: CompKind,
        generators: &[ast::Comprehension],
        elts: &[(&ast::Expr, Role)],
        range: TextRange,
    ) -> NodeId {
        let mut inputs = Vec::new();
        self.shadow.push(HashSet::new());
        for g in generators {
            inputs.push((self.expr(&g.iter), Role::Operand));
            let mut names = Vec::new();
            bound_names(&g.target, &mut names);
            if let Some(top) = self.shadow.last_mut() {
                top.extend(names);
            }
        }
        for (e, role) in elts {
            inputs.push((self.expr(e), *role));
        }
        self.shadow.pop();
        self.op(OpKind::Comprehension(kind), range, &inputs)
    }
}

fn dotted_root(e: &ast::Expr) -> Option<&ast::ExprName> {
    match e {
        ast::Expr::Name(n) => Some(n),
        ast::Expr::Attribute(a) => dotted_root(&a.value),
        _ => None,
    }
}

fn bound_names(e: &ast::Expr, out: &mut Vec<String>) {
    match e {
        ast::Expr::Name(n) => out.push(n.id.to_string()),
        ast::Expr::Tuple(t) => t.elts.iter().for_each(|x| bound_names(x, out)),
        ast::Expr::List(l) => l.elts.iter().for_each(|x| bound_names(x, out)),
        ast::Expr::Starred(s) => bound_names(&s.value, out),
        _ => {}
    }
}

fn constant_type(c: &ast::Constant) -> &'static str {
    match c {
        ast::Constant::None => "None",
        ast::Constant::Bool(_) => "bool",
        ast::Constant::Str(_) => "str",
        ast::Constant::Bytes(_) => "bytes",
        ast::Constant::Int(_) => "int",
        ast::Constant::Tuple(_) => "tuple",
        ast::Constant::Float(_) => "float",
        ast::Constant::Complex { .. } => "complex",
        ast::Constant::Ellipsis => "ellipsis",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_module;

    fn graph(src: &str, scope: Scope) -> TypeDependencyGraph {
        build_tdg(&parse_module(src, "t.py").unwrap(), &scope).unwrap()
    }

    fn has_edge(g: &TypeDependencyGraph, from: &str, to: &str) -> bool {
        g.edges.keys().any(|(s, d)| {
            g.node(*s).kind.to_string() == from && g.node(*d).kind.to_string() == to
        })
    }

    #[test]
    fn module_scope_skips_definitions() {
        let g = graph("def f():\n    a = 1\nclass C:\n    b = 2\nc = 3\n", Scope::Module);
        assert_eq!(g.nodes.len(), 2);
        assert!(has_edge(&g, "TypeLit(int)", "Symbol(c)"));
    }

    #[test]
    fn unknown_scope() {
        let m = parse_module("x = 1\n", "t.py").unwrap();
        assert_eq!(
            build_tdg(&m, &Scope::Function("nope".into())),
            Err(TdgError::ScopeNotFound("nope".into()))
        );
    }

    #[test]
    fn dict_literal_is_dict_read() {
        let g = graph("D = {'a': {'b': 'c'}}\n", Scope::Module);
        assert!(has_edge(&g, "Operation(Dict_Read)", "Symbol(D)"));
        assert!(has_edge(&g, "Operation(Dict_Read)", "Operation(Dict_Read)"));
        let roles: Vec<Role> = g.edges.values().copied().collect();
        assert_eq!(roles.iter().filter(|r| **r == Role::Key).count(), 2);
        assert_eq!(roles.iter().filter(|r| **r == Role::Value).count(), 2);
    }

    #[test]
    fn argument_usage_in_call() {
        let src = "def read(path):\n    with open(path) as fh:\n        return fh.read()\n";
        let g = graph(src, Scope::Function("read".into()));
        assert!(has_edge(&g, "Symbol(path)", "Symbol(path)"));
        assert!(has_edge(&g, "Symbol(path)", "Operation(Call_open)"));
        assert!(has_edge(&g, "Operation(Call_open)", "Symbol(fh)"));
        assert!(has_edge(&g, "Operation(Call_fh.read)", "Symbol(@return)"));
    }

    #[test]
    fn branches_union_definitions() {
        let src = "def f(c):\n    if c:\n        x = 1\n    else:\n        x = 'a'\n    return x\n";
        let g = graph(src, Scope::Function("f".into()));
        let x_defs: Vec<_> = g
            .nodes
            .values()
            .filter(|n| n.kind.symbol_name() == Some("x") && n.has_def())
            .map(|n| n.id)
            .collect();
        assert_eq!(x_defs.len(), 2);
        let x_use = g
            .nodes
            .values()
            .find(|n| n.kind.symbol_name() == Some("x") && !n.has_def())
            .unwrap()
            .id;
        for d in x_defs {
            assert!(g.edges.contains_key(&(d, x_use)));
        }
    }

    #[test]
    fn comprehension_variables_are_not_symbols() {
        let g = graph("ys = [x * 2 for x in xs]\n", Scope::Module);
        assert!(g.nodes.values().all(|n| n.kind.symbol_name() != Some("x")));
        assert!(has_edge(&g, "Symbol(xs)", "Operation(ListComp)"));
        assert!(has_edge(&g, "Operation(BinOp_Mult)", "Operation(ListComp)"));
    }

    #[test]
    fn destructuring_uses_assign_op() {
        let g = graph("a, b = f()\n", Scope::Module);
        assert!(has_edge(&g, "Operation(Call_f)", "Operation(Assign)"));
        assert!(has_edge(&g, "Operation(Assign)", "Symbol(a)"));
        assert!(has_edge(&g, "Operation(Assign)", "Symbol(b)"));
    }

    #[test]
    fn subscript_write_redefines_weakly() {
        let g = graph("d = {}\nd['k'] = 1\ne = d\n", Scope::Module);
        assert!(has_edge(&g, "Operation(Subscript_Write)", "Symbol(d)"));
        let e_use = g
            .nodes
            .values()
            .filter(|n| n.kind.symbol_name() == Some("d") && !n.has_def())
            .last()
            .unwrap()
            .id;
        let incoming = g.edges.keys().filter(|(_, d)| *d == e_use).count();
        assert_eq!(incoming, 2);
    }

    #[test]
    fn type_literal_has_no_incoming_edges() {
        let g = graph("a = 1 + b\nc = [1, 'x', None]\n", Scope::Module);
        for (_, d) in g.edges.keys() {
            assert!(!matches!(g.node(*d).kind, NodeKind::TypeLit { .. }));
        }
        for (s, d) in g.edges.keys() {
            assert_ne!(s, d);
        }
    }

    #[test]
    fn implicit_none_return() {
        let g = graph("def f(x):\n    print(x)\n", Scope::Function("f".into()));
        assert!(has_edge(&g, "TypeLit(None)", "Symbol(@return)"));
        let g = graph("def f(x):\n    if x:\n        return 1\n", Scope::Function("f".into()));
        assert!(has_edge(&g, "TypeLit(None)", "Symbol(@return)"));
        let g = graph("def f(x):\n    if x:\n        return 1\n    return 2\n", Scope::Function("f".into()));
        assert!(!has_edge(&g, "TypeLit(None)", "Symbol(@return)"));
    }
}
