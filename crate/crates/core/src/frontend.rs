//! Python source frontend.
//!
//! Wraps `rustpython-parser` and flattens the AST into the pieces the rest of
//! the pipeline needs: a statement table with line spans, function and class
//! inventories, import records and the list of typed target variables.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use rustpython_parser::ast::{self, Ranged};
use rustpython_parser::text_size::TextRange;
use rustpython_parser::Parse;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type StmtId = usize;

/// 1-based line, 0-based byte column (same convention as CPython's `ast`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Location {
    pub line: u32,
    pub column: u32,
}

impl Location {
    pub fn new(line: u32, column: u32) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}:{line}:{column}: syntax error: {message}")]
pub struct SyntaxError {
    pub path: String,
    pub line: u32,
    pub column: u32,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StmtKind {
    FunctionDef,
    ClassDef,
    Return,
    Assign,
    AugAssign,
    AnnAssign,
    For,
    While,
    If,
    With,
    Try,
    Match,
    Import,
    ImportFrom,
    Expr,
    Other,
}

impl StmtKind {
    pub fn is_compound(self) -> bool {
        matches!(
            self,
            StmtKind::FunctionDef
                | StmtKind::ClassDef
                | StmtKind::For
                | StmtKind::While
                | StmtKind::If
                | StmtKind::With
                | StmtKind::Try
                | StmtKind::Match
        )
    }

    pub fn is_control_flow(self) -> bool {
        self.is_compound() && !matches!(self, StmtKind::FunctionDef | StmtKind::ClassDef)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Statement {
    pub id: StmtId,
    pub kind: StmtKind,
    pub start_line: u32,
    pub end_line: u32,
    /// Last line of the header for compound statements; equals `end_line`
    /// for simple statements.
    pub header_end_line: u32,
    pub parent: Option<StmtId>,
    /// Line of the `else:` / `except ...:` / `finally:` / `case ...:` clause
    /// that owns this statement, when it is not in its parent's main body.
    pub clause_line: Option<u32>,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgInfo {
    pub name: String,
    pub location: Location,
    pub annotation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionInfo {
    /// Dotted path through enclosing classes and functions, e.g. `Repo.save`.
    pub qualname: String,
    pub name: String,
    pub stmt: StmtId,
    pub location: Location,
    pub args: Vec<ArgInfo>,
    pub returns: Option<String>,
    /// Location used to order the return-value target after the arguments.
    pub return_location: Location,
    /// Direct body statements (nested statements are reachable through
    /// [`Statement::parent`]).
    pub body: Vec<StmtId>,
    pub is_method: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImportRecord {
    /// Dotted module path. Relative imports keep their leading dots, so the
    /// path is never empty (`from . import x` has module `"."`).
    pub module: String,
    /// Imported names for `from` imports (`"*"` for wildcards); empty for
    /// plain `import` statements.
    pub names: Vec<String>,
    /// Local alias → imported name (or module for plain imports).
    pub aliases: BTreeMap<String, String>,
    pub is_relative: bool,
    pub line: u32,
}

impl ImportRecord {
    /// Number of leading dots of a relative import.
    pub fn level(&self) -> usize {
        self.module.chars().take_while(|c| *c == '.').count()
    }

    /// Module path without the leading dots.
    pub fn bare_module(&self) -> &str {
        self.module.trim_start_matches('.')
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TargetKind {
    Argument,
    ReturnValue,
    LocalVariable,
    GlobalVariable,
}

impl TargetKind {
    /// Short label used in dataset files.
    pub fn dataset_label(self) -> &'static str {
        match self {
            TargetKind::Argument => "arg",
            TargetKind::ReturnValue => "ret",
            TargetKind::LocalVariable | TargetKind::GlobalVariable => "var",
        }
    }
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TargetKind::Argument => "argument",
            TargetKind::ReturnValue => "return",
            TargetKind::LocalVariable => "local",
            TargetKind::GlobalVariable => "global",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TargetVariable {
    pub kind: TargetKind,
    /// Empty for return values.
    pub name: String,
    pub enclosing_function: Option<String>,
    pub location: Location,
    pub annotation: Option<String>,
}

impl TargetVariable {
    /// Name shown to users; return values are shown under their function's
    /// short name.
    pub fn display_name(&self) -> &str {
        match self.kind {
            TargetKind::ReturnValue => self
                .enclosing_function
                .as_deref()
                .map(|f| f.rsplit('.').next().unwrap_or(f))
                .unwrap_or(""),
            _ => &self.name,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetMode {
    AnnotatedOnly,
    All,
}

/// A parsed Python file. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SourceModule {
    pub path: PathBuf,
    pub text: String,
    pub statements: Vec<Statement>,
    pub functions: Vec<FunctionInfo>,
    pub classes: Vec<String>,
    pub imports: Vec<ImportRecord>,
    pub(crate) suite: Vec<ast::Stmt>,
    pub(crate) stmt_index: HashMap<(u32, u32), StmtId>,
    line_starts: Vec<u32>,
    definitions: Vec<TargetVariable>,
}

pub fn parse_module(text: &str, path: impl AsRef<Path>) -> Result<SourceModule, SyntaxError> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let line_starts = line_starts(text);
    let suite = ast::Suite::parse(text, &path_str).map_err(|e| {
        let (line, column) = offset_to_line_col(&line_starts, u32::from(e.offset));
        SyntaxError {
            path: path_str.clone(),
            line,
            column,
            message: e.error.to_string(),
        }
    })?;

    let mut collector = Collector {
        text,
        line_starts: &line_starts,
        lines: text.split('\n').collect(),
        statements: Vec::new(),
        stmt_index: HashMap::new(),
        functions: Vec::new(),
        classes: Vec::new(),
        imports: Vec::new(),
        definitions: Vec::new(),
        scope: Vec::new(),
    };
    collector.visit_block(&suite, None, None, 0);

    Ok(SourceModule {
        path: path.to_path_buf(),
        text: text.to_string(),
        statements: collector.statements,
        functions: collector.functions,
        classes: collector.classes,
        imports: collector.imports,
        definitions: collector.definitions,
        suite,
        stmt_index: collector.stmt_index,
        line_starts,
    })
}

/// Reads and parses a `.py` file.
pub fn parse_file(path: impl AsRef<Path>) -> Result<SourceModule, FrontendError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| FrontendError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_module(&text, path)?)
}

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

pub fn enumerate_targets(m: &SourceModule, mode: TargetMode) -> Vec<TargetVariable> {
    let mut out: Vec<TargetVariable> = match mode {
        TargetMode::AnnotatedOnly => m
            .definitions
            .iter()
            .filter(|t| t.annotation.is_some())
            .cloned()
            .collect(),
        TargetMode::All => {
            // One target per variable and scope (its first definition), plus
            // every annotated definition.
            let mut seen = std::collections::HashSet::new();
            m.definitions
                .iter()
                .filter(|t| {
                    let first = seen.insert((t.kind, t.enclosing_function.clone(), t.name.clone()));
                    first || t.annotation.is_some()
                })
                .filter(|t| !(t.kind == TargetKind::Argument && is_receiver(m, t)))
                .cloned()
                .collect()
        }
    };
    out.sort_by_key(|t| t.location);
    out
}

fn is_receiver(m: &SourceModule, t: &TargetVariable) -> bool {
    t.annotation.is_none()
        && (t.name == "self" || t.name == "cls")
        && t
            .enclosing_function
            .as_deref()
            .and_then(|q| m.function(q))
            .is_some_and(|f| f.is_method && f.args.first().is_some_and(|a| a.name == t.name))
}

pub fn collect_imports(m: &SourceModule) -> Vec<ImportRecord> {
    m.imports.clone()
}

impl SourceModule {
    pub fn statement(&self, id: StmtId) -> &Statement {
        &self.statements[id]
    }

    pub fn function(&self, qualname: &str) -> Option<&FunctionInfo> {
        self.functions.iter().find(|f| f.qualname == qualname)
    }

    /// Every definition site of a variable, argument or return value, in
    /// source order. Unlike [`enumerate_targets`] nothing is deduplicated.
    pub fn definition_sites(&self) -> &[TargetVariable] {
        &self.definitions
    }

    /// Exact source text of lines `start..=end` (1-based).
    pub fn line_text(&self, start: u32, end: u32) -> String {
        let lo = self.line_starts[(start - 1) as usize] as usize;
        let hi = if (end as usize) < self.line_starts.len() {
            // exclude the newline terminating `end`
            self.line_starts[end as usize] as usize - 1
        } else {
            self.text.len()
        };
        let s = &self.text[lo..hi.max(lo)];
        s.strip_suffix('\r').unwrap_or(s).to_string()
    }

    pub fn line_count(&self) -> u32 {
        self.line_starts.len() as u32
    }

    pub fn location_of(&self, range: TextRange) -> Location {
        let (line, column) = offset_to_line_col(&self.line_starts, u32::from(range.start()));
        Location { line, column }
    }

    pub(crate) fn stmt_id(&self, stmt: &ast::Stmt) -> StmtId {
        let r = stmt.range();
        self.stmt_index[&(u32::from(r.start()), u32::from(r.end()))]
    }

    /// Source text covered by `range`.
    pub(crate) fn snippet(&self, range: TextRange) -> &str {
        &self.text[u32::from(range.start()) as usize..u32::from(range.end()) as usize]
    }

    /// Chain of ancestors from the direct parent upwards.
    pub fn ancestors(&self, id: StmtId) -> impl Iterator<Item = &Statement> + '_ {
        std::iter::successors(self.statements[id].parent.map(|p| &self.statements[p]), |s| {
            s.parent.map(|p| &self.statements[p])
        })
    }
}

fn line_starts(text: &str) -> Vec<u32> {
    std::iter::once(0)
        .chain(text.match_indices('\n').map(|(i, _)| i as u32 + 1))
        .collect()
}

fn offset_to_line_col(starts: &[u32], offset: u32) -> (u32, u32) {
    let idx = match starts.binary_search(&offset) {
        Ok(i) => i,
        Err(i) => i - 1,
    };
    (idx as u32 + 1, offset - starts[idx])
}

#[derive(Debug, Clone)]
enum ScopeFrame {
    Class(String),
    Function(String),
}

struct Collector<'a> {
    text: &'a str,
    line_starts: &'a [u32],
    lines: Vec<&'a str>,
    statements: Vec<Statement>,
    stmt_index: HashMap<(u32, u32), StmtId>,
    functions: Vec<FunctionInfo>,
    classes: Vec<String>,
    imports: Vec<ImportRecord>,
    definitions: Vec<TargetVariable>,
    scope: Vec<ScopeFrame>,
}

impl Collector<'_> {
    fn loc(&self, range: TextRange) -> Location {
        let (line, column) = offset_to_line_col(self.line_starts, u32::from(range.start()));
        Location { line, column }
    }

    fn end_line(&self, range: TextRange) -> u32 {
        // `end` is exclusive; a range ending right after a newline belongs
        // to the previous line.
        let end = u32::from(range.end()).max(u32::from(range.start()) + 1) - 1;
        offset_to_line_col(self.line_starts, end).0
    }

    fn snippet(&self, range: TextRange) -> String {
        self.text[u32::from(range.start()) as usize..u32::from(range.end()) as usize].to_string()
    }

    fn qualname(&self, name: &str) -> String {
        let mut parts: Vec<&str> = self
            .scope
            .iter()
            .map(|f| match f {
                ScopeFrame::Class(n) | ScopeFrame::Function(n) => n.as_str(),
            })
            .collect();
        parts.push(name);
        parts.join(".")
    }

    fn enclosing_function(&self) -> Option<String> {
        match self.scope.last() {
            Some(ScopeFrame::Function(_)) => {
                let names: Vec<&str> = self
                    .scope
                    .iter()
                    .map(|f| match f {
                        ScopeFrame::Class(n) | ScopeFrame::Function(n) => n.as_str(),
                    })
                    .collect();
                Some(names.join("."))
            }
            _ => None,
        }
    }

    fn in_class_body(&self) -> bool {
        matches!(self.scope.last(), Some(ScopeFrame::Class(_)))
    }

    /// Last non-blank, non-comment line strictly before `body_start`, but no
    /// earlier than `start`.
    fn header_end(&self, start: u32, body_start: u32) -> u32 {
        if body_start <= start {
            return start;
        }
        let mut line = body_start - 1;
        while line > start {
            let t = self.lines[(line - 1) as usize].trim();
            if !t.is_empty() && !t.starts_with('#') {
                break;
            }
            line -= 1;
        }
        line
    }

    /// Finds the clause keyword line (`else`, `finally`, ...) between the end
    /// of the previous block and the first statement of the clause.
    fn clause_line(&self, after: u32, first: u32, keyword: &str) -> Option<u32> {
        (after.max(1)..=first).rev().find(|&l| {
            let t = self.lines[(l - 1) as usize].trim_start();
            t.strip_prefix(keyword).is_some_and(|rest| {
                rest.starts_with(':') || rest.starts_with(' ') || rest.starts_with('(')
            })
        })
    }

    fn visit_block(
        &mut self,
        stmts: &[ast::Stmt],
        parent: Option<StmtId>,
        clause_line: Option<u32>,
        depth: usize,
    ) -> Vec<StmtId> {
        stmts
            .iter()
            .map(|s| self.visit_stmt(s, parent, clause_line, depth))
            .collect()
    }

    fn visit_body(&mut self, stmts: &[ast::Stmt], parent: StmtId, start: u32, depth: usize) -> u32 {
        self.visit_block(stmts, Some(parent), None, depth);
        stmts.last().map(|s| self.end_line(s.range())).unwrap_or(start)
    }

    fn visit_clause(
        &mut self,
        stmts: &[ast::Stmt],
        parent: StmtId,
        after_line: u32,
        keyword: &str,
        depth: usize,
    ) -> u32 {
        let Some(first) = stmts.first() else {
            return after_line;
        };
        let first_line = self.loc(first.range()).line;
        let clause = self.clause_line(after_line, first_line, keyword);
        self.visit_block(stmts, Some(parent), clause, depth);
        stmts.last().map(|s| self.end_line(s.range())).unwrap_or(after_line)
    }

    fn visit_stmt(
        &mut self,
        stmt: &ast::Stmt,
        parent: Option<StmtId>,
        clause_line: Option<u32>,
        depth: usize,
    ) -> StmtId {
        use ast::Stmt as S;
        let range = stmt.range();
        let start_line = self.loc(range).line;
        let end_line = self.end_line(range);
        let kind = match stmt {
            S::FunctionDef(_) | S::AsyncFunctionDef(_) => StmtKind::FunctionDef,
            S::ClassDef(_) => StmtKind::ClassDef,
            S::Return(_) => StmtKind::Return,
            S::Assign(_) => StmtKind::Assign,
            S::AugAssign(_) => StmtKind::AugAssign,
            S::AnnAssign(_) => StmtKind::AnnAssign,
            S::For(_) | S::AsyncFor(_) => StmtKind::For,
            S::While(_) => StmtKind::While,
            S::If(_) => StmtKind::If,
            S::With(_) | S::AsyncWith(_) => StmtKind::With,
            S::Try(_) | S::TryStar(_) => StmtKind::Try,
            S::Match(_) => StmtKind::Match,
            S::Import(_) => StmtKind::Import,
            S::ImportFrom(_) => StmtKind::ImportFrom,
            S::Expr(_) => StmtKind::Expr,
            _ => StmtKind::Other,
        };
        let id = self.statements.len();
        self.statements.push(Statement {
            id,
            kind,
            start_line,
            end_line,
            header_end_line: end_line,
            parent,
            clause_line,
            depth,
        });
        self.stmt_index
            .insert((u32::from(range.start()), u32::from(range.end())), id);

        let first_body_line = |b: &[ast::Stmt], me: &Self| {
            b.first().map(|s| me.loc(s.range()).line).unwrap_or(end_line)
        };
        let d = depth + 1;
        match stmt {
            S::FunctionDef(f) => {
                let hdr = self.header_end(start_line, first_body_line(&f.body, self));
                self.statements[id].header_end_line = hdr;
                self.function(id, &f.name, &f.args, f.returns.as_deref(), &f.body, range, d);
            }
            S::AsyncFunctionDef(f) => {
                let hdr = self.header_end(start_line, first_body_line(&f.body, self));
                self.statements[id].header_end_line = hdr;
                self.function(id, &f.name, &f.args, f.returns.as_deref(), &f.body, range, d);
            }
            S::ClassDef(c) => {
                let hdr = self.header_end(start_line, first_body_line(&c.body, self));
                self.statements[id].header_end_line = hdr;
                self.classes.push(c.name.to_string());
                self.scope.push(ScopeFrame::Class(c.name.to_string()));
                self.visit_block(&c.body, Some(id), None, d);
                self.scope.pop();
            }
            S::For(ast::StmtFor { target, body, orelse, .. })
            | S::AsyncFor(ast::StmtAsyncFor { target, body, orelse, .. }) => {
                let hdr = self.header_end(start_line, first_body_line(body, self));
                self.statements[id].header_end_line = hdr;
                self.definitions_in_target(target, None);
                let last = self.visit_body(body, id, start_line, d);
                self.visit_clause(orelse, id, last, "else", d);
            }
            S::While(w) => {
                let hdr = self.header_end(start_line, first_body_line(&w.body, self));
                self.statements[id].header_end_line = hdr;
                let last = self.visit_body(&w.body, id, start_line, d);
                self.visit_clause(&w.orelse, id, last, "else", d);
            }
            S::If(i) => {
                let hdr = self.header_end(start_line, first_body_line(&i.body, self));
                self.statements[id].header_end_line = hdr;
                let last = self.visit_body(&i.body, id, start_line, d);
                let is_elif = i.orelse.len() == 1
                    && matches!(&i.orelse[0], S::If(_))
                    && self.lines[(self.loc(i.orelse[0].range()).line - 1) as usize]
                        .trim_start()
                        .starts_with("elif");
                if is_elif {
                    // `elif` headers are their own (nested) statements.
                    self.visit_block(&i.orelse, Some(id), None, d);
                } else {
                    self.visit_clause(&i.orelse, id, last, "else", d);
                }
            }
            S::With(ast::StmtWith { items, body, .. })
            | S::AsyncWith(ast::StmtAsyncWith { items, body, .. }) => {
                let hdr = self.header_end(start_line, first_body_line(body, self));
                self.statements[id].header_end_line = hdr;
                for item in items {
                    if let Some(v) = &item.optional_vars {
                        self.definitions_in_target(v, None);
                    }
                }
                self.visit_body(body, id, start_line, d);
            }
            S::Try(ast::StmtTry { body, handlers, orelse, finalbody, .. })
            | S::TryStar(ast::StmtTryStar { body, handlers, orelse, finalbody, .. }) => {
                let hdr = self.header_end(start_line, first_body_line(body, self));
                self.statements[id].header_end_line = hdr;
                let mut last = self.visit_body(body, id, start_line, d);
                for h in handlers {
                    let ast::ExceptHandler::ExceptHandler(h) = h;
                    let hline = self.loc(h.range).line;
                    self.visit_block(&h.body, Some(id), Some(hline), d);
                    last = h.body.last().map(|s| self.end_line(s.range())).unwrap_or(last);
                }
                last = self.visit_clause(orelse, id, last, "else", d);
                self.visit_clause(finalbody, id, last, "finally", d);
            }
            S::Match(m) => {
                let first = m
                    .cases
                    .first()
                    .and_then(|c| c.body.first())
                    .map(|s| self.loc(s.range()).line)
                    .unwrap_or(end_line);
                // header is just the `match subject:` line(s)
                let subject_end = self.end_line(m.subject.range());
                self.statements[id].header_end_line = subject_end.min(first).max(start_line);
                let mut last = subject_end;
                for c in &m.cases {
                    let Some(first) = c.body.first() else { continue };
                    let first_line = self.loc(first.range()).line;
                    let clause = self.clause_line(last + 1, first_line, "case");
                    self.visit_block(&c.body, Some(id), clause, d);
                    last = c.body.last().map(|s| self.end_line(s.range())).unwrap_or(last);
                }
            }
            S::Assign(a) => {
                for t in &a.targets {
                    self.definitions_in_target(t, None);
                }
            }
            S::AnnAssign(a) => {
                let ann = self.snippet(a.annotation.range());
                self.definitions_in_target(&a.target, Some(ann));
            }
            S::AugAssign(a) => self.definitions_in_target(&a.target, None),
            S::Import(imp) => {
                for alias in &imp.names {
                    let mut aliases = BTreeMap::new();
                    if let Some(asname) = &alias.asname {
                        aliases.insert(asname.to_string(), alias.name.to_string());
                    }
                    self.imports.push(ImportRecord {
                        module: alias.name.to_string(),
                        names: Vec::new(),
                        aliases,
                        is_relative: false,
                        line: start_line,
                    });
                }
            }
            S::ImportFrom(imp) => {
                let level = imp.level.map(|l| l.to_u32()).unwrap_or(0) as usize;
                let module = format!(
                    "{}{}",
                    ".".repeat(level),
                    imp.module.as_ref().map(|m| m.as_str()).unwrap_or("")
                );
                let mut aliases = BTreeMap::new();
                let names = imp
                    .names
                    .iter()
                    .map(|a| {
                        if let Some(asname) = &a.asname {
                            aliases.insert(asname.to_string(), a.name.to_string());
                        }
                        a.name.to_string()
                    })
                    .collect();
                self.imports.push(ImportRecord {
                    module,
                    names,
                    aliases,
                    is_relative: level > 0,
                    line: start_line,
                });
            }
            _ => {}
        }
        id
    }

    #[allow(clippy::too_many_arguments)]
    fn function(
        &mut self,
        id: StmtId,
        name: &ast::Identifier,
        args: &ast::Arguments,
        returns: Option<&ast::Expr>,
        body: &[ast::Stmt],
        range: TextRange,
        depth: usize,
    ) {
        let qualname = self.qualname(name.as_str());
        let is_method = self.in_class_body();
        let mut infos = Vec::new();
        let all = args
            .posonlyargs
            .iter()
            .chain(args.args.iter())
            .map(|a| &a.def)
            .chain(args.vararg.as_deref())
            .chain(args.kwonlyargs.iter().map(|a| &a.def))
            .chain(args.kwarg.as_deref());
        for a in all {
            infos.push(ArgInfo {
                name: a.arg.to_string(),
                location: self.loc(a.range),
                annotation: a.annotation.as_ref().map(|e| self.snippet(e.range())),
            });
        }
        let def_loc = self.loc(range);
        let return_location = match returns {
            Some(r) => self.loc(r.range()),
            None => infos
                .iter()
                .map(|a| a.location)
                .filter(|l| l.line == def_loc.line)
                .max()
                .map(|l| Location::new(l.line, l.column + 1))
                .unwrap_or(def_loc),
        };
        let info = FunctionInfo {
            qualname: qualname.clone(),
            name: name.to_string(),
            stmt: id,
            location: def_loc,
            args: infos.clone(),
            returns: returns.map(|r| self.snippet(r.range())),
            return_location,
            body: Vec::new(),
            is_method,
        };
        let fidx = self.functions.len();
        self.functions.push(info);

        for a in &infos {
            self.definitions.push(TargetVariable {
                kind: TargetKind::Argument,
                name: a.name.clone(),
                enclosing_function: Some(qualname.clone()),
                location: a.location,
                annotation: a.annotation.clone(),
            });
        }
        self.definitions.push(TargetVariable {
            kind: TargetKind::ReturnValue,
            name: String::new(),
            enclosing_function: Some(qualname.clone()),
            location: return_location,
            annotation: returns.map(|r| self.snippet(r.range())),
        });

        self.scope.push(ScopeFrame::Function(name.to_string()));
        let ids = self.visit_block(body, Some(id), None, depth);
        self.scope.pop();
        self.functions[fidx].body = ids;
    }

    fn definitions_in_target(&mut self, target: &ast::Expr, annotation: Option<String>) {
        let kind = match self.scope.last() {
            None => TargetKind::GlobalVariable,
            Some(ScopeFrame::Function(_)) => TargetKind::LocalVariable,
            // class attributes are not targets
            Some(ScopeFrame::Class(_)) => return,
        };
        match target {
            ast::Expr::Name(n) => self.definitions.push(TargetVariable {
                kind,
                name: n.id.to_string(),
                enclosing_function: self.enclosing_function(),
                location: self.loc(n.range),
                annotation,
            }),
            ast::Expr::Tuple(t) => {
                for e in &t.elts {
                    self.definitions_in_target(e, None);
                }
            }
            ast::Expr::List(l) => {
                for e in &l.elts {
                    self.definitions_in_target(e, None);
                }
            }
            ast::Expr::Starred(s) => self.definitions_in_target(&s.value, None),
            _ => {}
        }
    }
}
