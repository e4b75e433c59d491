//! JSON Lines formats for annotated targets and predictions.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{TargetKind, TargetVariable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarCategory {
    Arg,
    Ret,
    Var,
}

impl VarCategory {
    pub const ALL: [VarCategory; 3] = [VarCategory::Arg, VarCategory::Ret, VarCategory::Var];

    pub fn label(self) -> &'static str {
        match self {
            VarCategory::Arg => "Arg",
            VarCategory::Ret => "Ret",
            VarCategory::Var => "Var",
        }
    }
}

impl From<TargetKind> for VarCategory {
    fn from(k: TargetKind) -> Self {
        match k {
            TargetKind::Argument => VarCategory::Arg,
            TargetKind::ReturnValue => VarCategory::Ret,
            TargetKind::LocalVariable | TargetKind::GlobalVariable => VarCategory::Var,
        }
    }
}

/// One annotated target. For return values `name` is the function's short
/// name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub file: String,
    pub kind: VarCategory,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    pub line: u32,
    pub annotation: String,
}

impl DatasetRecord {
    /// Builds a record for an annotated target of `file` (path as it should
    /// appear in the dataset).
    pub fn from_target(file: &str, t: &TargetVariable) -> Option<Self> {
        let annotation = t.annotation.clone()?;
        let kind = VarCategory::from(t.kind);
        let name = t.display_name().to_string();
        let function = t.enclosing_function.clone();
        let id = match &function {
            Some(f) if kind != VarCategory::Ret => format!("{file}:{}:{f}.{name}", t.location.line),
            _ => format!("{file}:{}:{name}", t.location.line),
        };
        Some(DatasetRecord {
            id: format!("{id}:{}", kind_suffix(kind)),
            file: file.to_string(),
            kind,
            name,
            function,
            line: t.location.line,
            annotation,
        })
    }
}

fn kind_suffix(k: VarCategory) -> &'static str {
    match k {
        VarCategory::Arg => "arg",
        VarCategory::Ret => "ret",
        VarCategory::Var => "var",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub ranked: Vec<String>,
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(line).map_err(|source| DatasetError::Json {
            path: path.to_path_buf(),
            line: i + 1,
            source,
        })?;
        out.push(item);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), DatasetError> {
    let io = |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    for item in items {
        let line = serde_json::to_string(item).map_err(|source| DatasetError::Json {
            path: path.to_path_buf(),
            line: 0,
            source,
        })?;
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{enumerate_targets, parse_module, TargetMode};

    #[test]
    fn records_round_trip() {
        let m = parse_module("def f(x: int) -> str:\n    y: float = 1.0\n    return ''\n", "a.py").unwrap();
        let recs: Vec<DatasetRecord> = enumerate_targets(&m, TargetMode::AnnotatedOnly)
            .iter()
            .filter_map(|t| DatasetRecord::from_target("a.py", t))
            .collect();
        let ids: Vec<&str> = recs.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["a.py:1:f.x:arg", "a.py:1:f:ret", "a.py:2:f.y:var"]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        write_jsonl(&p, &recs).unwrap();
        let back: Vec<DatasetRecord> = read_jsonl(&p).unwrap();
        assert_eq!(back, recs);
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.lines().next().unwrap().contains(r#""kind":"arg""#));
    }

    #[test]
    fn bad_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        fs::write(&p, "{\"id\":\"a\",\"ranked\":[]}\nnot json\n").unwrap();
        let err = read_jsonl::<PredictionRecord>(&p).unwrap_err();
        assert!(matches!(err, DatasetError::Json { line: 2, .. }));
    }
}
