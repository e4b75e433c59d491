//! Top-k aggregation by variable and type category.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::types::{categorize_type, exact_match, match_to_parametric, parse_with, TypeCategory};
use crate::dataset::{DatasetRecord, VarCategory};

pub const TOP_KS: [usize; 3] = [1, 3, 5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub em: usize,
    pub mtp: usize,
    pub total: usize,
}

impl Cell {
    pub fn em_percent(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.em as f64 / self.total as f64)
    }

    pub fn mtp_percent(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.mtp as f64 / self.total as f64)
    }
}

/// Row key: `None` stands for "All".
pub type CellKey = (Option<VarCategory>, Option<TypeCategory>, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalReport {
    pub cells: BTreeMap<CellKey, Cell>,
}

#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    /// Compare annotation text without normalization.
    pub strict_text: bool,
    /// Constructors always counted as user-defined.
    pub known_user_types: HashSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("prediction for unknown target id `{0}`")]
    UnknownTargetId(String),
}

fn var_groups() -> [Option<VarCategory>; 4] {
    [
        Some(VarCategory::Arg),
        Some(VarCategory::Ret),
        Some(VarCategory::Var),
        None,
    ]
}

fn type_groups() -> [Option<TypeCategory>; 4] {
    [
        Some(TypeCategory::Ele),
        Some(TypeCategory::Gen),
        Some(TypeCategory::Usr),
        None,
    ]
}

fn group_label<T>(g: Option<T>, label: impl Fn(T) -> &'static str) -> &'static str {
    g.map(label).unwrap_or("All")
}

/// Scores every dataset record against its ranked predictions. Records without
/// predictions count as misses.
pub fn evaluate(
    records: &[DatasetRecord],
    predictions: &BTreeMap<String, Vec<String>>,
    opts: &EvalOptions,
) -> Result<EvalReport, EvalError> {
    let known: HashSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
    if let Some(bad) = predictions.keys().find(|id| !known.contains(id.as_str())) {
        return Err(EvalError::UnknownTargetId(bad.clone()));
    }
    let normalize = !opts.strict_text;

    let mut cells: BTreeMap<CellKey, Cell> = BTreeMap::new();
    for v in var_groups() {
        for t in type_groups() {
            for k in TOP_KS {
                cells.insert((v, t, k), Cell { em: 0, mtp: 0, total: 0 });
            }
        }
    }

    for r in records {
        let gt = parse_with(&r.annotation, normalize);
        // categories always use the normalized form
        let cat = categorize_type(&super::types::parse_type(&r.annotation), &opts.known_user_types);
        let ranked: Vec<_> = predictions
            .get(&r.id)
            .map(|p| p.iter().map(|s| parse_with(s, normalize)).collect())
            .unwrap_or_default();
        for k in TOP_KS {
            let top = &ranked[..ranked.len().min(k)];
            let em = top.iter().any(|p| exact_match(p, &gt));
            let mtp = top.iter().any(|p| match_to_parametric(p, &gt));
            for v in [Some(r.kind), None] {
                for t in [Some(cat), None] {
                    let c = cells.get_mut(&(v, t, k)).expect("all cells initialized");
                    c.total += 1;
                    c.em += em as usize;
                    c.mtp += mtp as usize;
                }
            }
        }
    }
    Ok(EvalReport { cells })
}

#[derive(Serialize)]
struct JsonCell<'a> {
    variable: &'a str,
    #[serde(rename = "type")]
    type_category: &'a str,
    k: usize,
    em: usize,
    mtp: usize,
    total: usize,
}

impl EvalReport {
    pub fn cell(&self, v: Option<VarCategory>, t: Option<TypeCategory>, k: usize) -> Cell {
        self.cells[&(v, t, k)]
    }

    pub fn to_json(&self) -> serde_json::Value {
        let cells: Vec<JsonCell> = self
            .cells
            .iter()
            .map(|((v, t, k), c)| JsonCell {
                variable: group_label(*v, VarCategory::label),
                type_category: group_label(*t, TypeCategory::label),
                k: *k,
                em: c.em,
                mtp: c.mtp,
                total: c.total,
            })
            .collect();
        serde_json::json!({ "cells": cells })
    }

    /// One row per (variable, type) group with EM and MTP percentages for
    /// each k.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = write!(out, "{:<8} {:<5} {:>6}", "Variable", "Type", "Total");
        for k in TOP_KS {
            let _ = write!(out, " {:>9} {:>10}", format!("Top-{k} EM"), format!("Top-{k} MTP"));
        }
        out.push('\n');
        let pct = |p: Option<f64>| p.map(|x| format!("{x:.1}%")).unwrap_or_else(|| "-".into());
        for v in var_groups() {
            for t in type_groups() {
                let total = self.cell(v, t, 1).total;
                let _ = write!(
                    out,
                    "{:<8} {:<5} {:>6}",
                    group_label(v, VarCategory::label),
                    group_label(t, TypeCategory::label),
                    total
                );
                for k in TOP_KS {
                    let c = self.cell(v, t, k);
                    let _ = write!(out, " {:>9} {:>10}", pct(c.em_percent()), pct(c.mtp_percent()));
                }
                out.push('\n');
            }
        }
        out
    }
}
