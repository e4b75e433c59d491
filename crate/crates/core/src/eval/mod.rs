//! Type comparison metrics and reports.

mod report;
mod types;

pub use report::{evaluate, Cell, CellKey, EvalError, EvalOptions, EvalReport, TOP_KS};
pub use types::{
    categorize_type, exact_match, match_to_parametric, parse_type, parse_type_strict, parse_with,
    TypeCategory, TypeExpr,
};
