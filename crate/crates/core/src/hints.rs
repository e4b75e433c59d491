//! Type hints from class definitions and imports.
//!
//! Candidates come from three places, in priority order: classes defined in
//! the target file, classes of project files it imports (one level deep), and
//! third-party types looked up in a [`TypeDatabase`] by top-level package.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::frontend::{parse_file, ImportRecord, SourceModule};

pub const DEFAULT_HINT_CAP: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Provenance {
    UserCurrentFile,
    UserOtherFile,
    ThirdParty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeHint {
    pub name: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeHintSet {
    pub entries: Vec<TypeHint>,
}

impl TypeHintSet {
    /// Orders candidates by provenance (stable within a provenance), drops
    /// repeated names and keeps at most `cap` entries.
    pub fn from_candidates(mut candidates: Vec<TypeHint>, cap: usize) -> Self {
        candidates.sort_by_key(|h| h.provenance);
        let mut seen = HashSet::new();
        let entries = candidates
            .into_iter()
            .filter(|h| seen.insert(h.name.clone()))
            .take(cap)
            .collect();
        TypeHintSet { entries }
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.iter().map(|h| h.name.as_str()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn render_hint(h: &TypeHintSet) -> String {
    if h.is_empty() {
        return String::new();
    }
    format!("Available user-defined and third-party types: {}.", h.names().join(", "))
}

/// Exported class names per installed package.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeDatabase {
    pub packages: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Error)]
pub enum TypeDbError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl TypeDatabase {
    pub fn get(&self, package: &str) -> Option<&[String]> {
        self.packages.get(package).map(Vec::as_slice)
    }

    pub fn load(path: &Path) -> Result<Self, TypeDbError> {
        let text = fs::read_to_string(path).map_err(|source| TypeDbError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| TypeDbError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), TypeDbError> {
        let text = serde_json::to_string_pretty(self).map_err(|source| TypeDbError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        fs::write(path, text + "\n").map_err(|source| TypeDbError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Package roots below a site-packages style directory: sub-directories with
/// an `__init__.py` and top-level single-file modules.
pub fn discover_packages(site: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut roots = Vec::new();
    for entry in fs::read_dir(site)? {
        let p = entry?.path();
        let is_pkg = p.is_dir() && p.join("__init__.py").is_file();
        let is_module = p.is_file() && p.extension().is_some_and(|e| e == "py");
        if is_pkg || is_module {
            roots.push(p);
        }
    }
    roots.sort();
    Ok(roots)
}

fn package_name(root: &Path) -> String {
    let stem = if root.is_file() { root.file_stem() } else { root.file_name() };
    stem.map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Builds the database from package roots (a package directory or a single
/// `.py` module each). Files that fail to parse are logged and skipped.
pub fn build_typedb(roots: &[PathBuf]) -> TypeDatabase {
    let mut packages = BTreeMap::new();
    for root in roots {
        let name = package_name(root);
        let mut found: Vec<(String, String)> = Vec::new();
        let files: Vec<PathBuf> = if root.is_file() {
            vec![root.clone()]
        } else {
            WalkDir::new(root)
                .sort_by_file_name()
                .into_iter()
                .filter_map(Result::ok)
                .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "py"))
                .map(|e| e.into_path())
                .collect()
        };
        for file in files {
            let module = module_path(root, &file);
            match parse_file(&file) {
                Ok(m) => found.extend(m.classes.into_iter().map(|c| (module.clone(), c))),
                Err(e) => log::warn!("skipping {}: {e}", file.display()),
            }
        }
        found.sort();
        let mut seen = HashSet::new();
        let names = found
            .into_iter()
            .filter_map(|(_, c)| seen.insert(c.clone()).then_some(c))
            .collect();
        packages.entry(name).or_insert(names);
    }
    TypeDatabase { packages }
}

fn module_path(root: &Path, file: &Path) -> String {
    let rel = file.strip_prefix(root).unwrap_or(file).with_extension("");
    let mut parts: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
    if parts.last().is_some_and(|p| p == "__init__") {
        parts.pop();
    }
    parts.join(".")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HintOptions {
    pub cap: usize,
    /// Prefix third-party names with their package (`requests.Session`).
    pub qualified: bool,
}

impl Default for HintOptions {
    fn default() -> Self {
        HintOptions {
            cap: DEFAULT_HINT_CAP,
            qualified: false,
        }
    }
}

pub fn collect_hints(
    m: &SourceModule,
    project_root: &Path,
    db: &TypeDatabase,
    opts: HintOptions,
) -> TypeHintSet {
    let mut cands: Vec<TypeHint> = m
        .classes
        .iter()
        .map(|c| TypeHint {
            name: c.clone(),
            provenance: Provenance::UserCurrentFile,
        })
        .collect();
    let mut cache: HashMap<PathBuf, Vec<String>> = HashMap::new();
    let file_dir = m.path.parent().unwrap_or(Path::new(""));

    for imp in &m.imports {
        match resolve_project_import(imp, file_dir, project_root) {
            Some(base) => {
                for name in user_types(&base, imp, &mut cache) {
                    cands.push(TypeHint {
                        name,
                        provenance: Provenance::UserOtherFile,
                    });
                }
            }
            None if imp.is_relative => {
                log::debug!("{}: unresolved import {}", m.path.display(), imp.module);
            }
            None => {
                let pkg = imp.bare_module().split('.').next().unwrap_or_default();
                let Some(types) = db.get(pkg) else {
                    log::debug!("{}: no type database entry for {pkg}", m.path.display());
                    continue;
                };
                let named = types.iter().filter(|t| imp.names.contains(t));
                let rest = types.iter().filter(|t| !imp.names.contains(t));
                for t in named.chain(rest) {
                    let name = if opts.qualified { format!("{pkg}.{t}") } else { t.clone() };
                    cands.push(TypeHint {
                        name,
                        provenance: Provenance::ThirdParty,
                    });
                }
            }
        }
    }
    TypeHintSet::from_candidates(cands, opts.cap)
}

/// The project path an import refers to, without extension: `a/b` stands for
/// `a/b.py` or the package `a/b/__init__.py`.
fn resolve_project_import(imp: &ImportRecord, file_dir: &Path, project_root: &Path) -> Option<PathBuf> {
    let rel: PathBuf = imp.bare_module().split('.').filter(|s| !s.is_empty()).collect();
    let bases: Vec<PathBuf> = if imp.is_relative {
        let mut dir = file_dir.to_path_buf();
        for _ in 1..imp.level() {
            dir = dir.parent()?.to_path_buf();
        }
        vec![dir]
    } else {
        vec![project_root.to_path_buf(), file_dir.to_path_buf()]
    };
    bases
        .into_iter()
        .map(|b| b.join(&rel))
        .find(|p| module_file(p).is_some() || (imp.is_relative && p.is_dir()))
}

fn module_file(base: &Path) -> Option<PathBuf> {
    let file = base.with_extension("py");
    if base.file_name().is_some() && file.is_file() {
        return Some(file);
    }
    let init = base.join("__init__.py");
    init.is_file().then_some(init)
}

fn classes_of(path: &Path, cache: &mut HashMap<PathBuf, Vec<String>>) -> Vec<String> {
    cache
        .entry(path.to_path_buf())
        .or_insert_with(|| match parse_file(path) {
            Ok(m) => m.classes,
            Err(e) => {
                log::warn!("skipping {}: {e}", path.display());
                Vec::new()
            }
        })
        .clone()
}

fn user_types(base: &Path, imp: &ImportRecord, cache: &mut HashMap<PathBuf, Vec<String>>) -> Vec<String> {
    let own = module_file(base).map(|f| classes_of(&f, cache)).unwrap_or_default();
    if imp.names.is_empty() || imp.names.iter().any(|n| n == "*") {
        return own;
    }
    let mut out = Vec::new();
    for name in &imp.names {
        if own.contains(name) {
            out.push(name.clone());
        } else if let Some(sub) = module_file(&base.join(name)) {
            out.extend(classes_of(&sub, cache));
        }
    }
    out
}
