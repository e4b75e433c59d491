//! Turning a sliced graph back into source text.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::frontend::{SourceModule, StmtId, TargetKind, TargetVariable};
use crate::tdg::{NodeKind, SlicedTdg};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceEntry {
    pub start_line: u32,
    pub end_line: u32,
    /// Source lines `start_line..=end_line`, unmodified.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSlice {
    pub entries: Vec<SliceEntry>,
    pub target: TargetVariable,
    pub rendered: String,
}

impl CodeSlice {
    /// Every source line covered by the slice.
    pub fn lines(&self) -> BTreeSet<u32> {
        self.entries
            .iter()
            .flat_map(|e| e.start_line..=e.end_line)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SliceOptions {
    /// Leave out enclosing control-flow headers and dedent every statement to
    /// column zero.
    pub flat: bool,
}

pub fn slice_code(
    s: &SlicedTdg,
    m: &SourceModule,
    target: &TargetVariable,
    opts: SliceOptions,
) -> CodeSlice {
    let mut ranges: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut selected: BTreeSet<StmtId> = BTreeSet::new();

    for node in s.graph.nodes.values() {
        let occs: Vec<_> = match node.kind {
            NodeKind::Symbol { .. } => node.occurrences.iter().filter(|o| o.is_def).collect(),
            _ => node.occurrences.iter().take(1).collect(),
        };
        for o in occs {
            let st = m.statement(o.stmt);
            if st.kind.is_compound() && o.location.line > st.header_end_line {
                // a clause header such as `except E as e:`
                ranges.insert((o.location.line, o.location.line));
            } else {
                ranges.insert(statement_range(m, o.stmt));
            }
            selected.insert(o.stmt);
        }
    }

    if target.kind != TargetKind::GlobalVariable {
        if let Some(f) = target.enclosing_function.as_deref().and_then(|q| m.function(q)) {
            ranges.insert(statement_range(m, f.stmt));
        }
    }

    if !opts.flat {
        for &id in &selected {
            let mut child = m.statement(id);
            for anc in m.ancestors(id) {
                if !anc.kind.is_control_flow() {
                    break;
                }
                if let Some(l) = child.clause_line {
                    ranges.insert((l, l));
                }
                ranges.insert((anc.start_line, anc.header_end_line));
                child = anc;
            }
        }
    }

    let mut merged: Vec<(u32, u32)> = Vec::new();
    for (lo, hi) in ranges {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let entries: Vec<SliceEntry> = merged
        .into_iter()
        .map(|(start_line, end_line)| SliceEntry {
            start_line,
            end_line,
            text: m.line_text(start_line, end_line),
        })
        .collect();
    let rendered = render(&entries, opts.flat);
    CodeSlice {
        entries,
        target: target.clone(),
        rendered,
    }
}

fn statement_range(m: &SourceModule, id: StmtId) -> (u32, u32) {
    let st = m.statement(id);
    if st.kind.is_compound() {
        (st.start_line, st.header_end_line)
    } else {
        (st.start_line, st.end_line)
    }
}

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start_matches([' ', '\t']).len()
}

fn dedent(text: &str, by: usize) -> String {
    text.split('\n')
        .map(|l| &l[indent_of(l).min(by)..])
        .collect::<Vec<_>>()
        .join("\n")
}

fn render(entries: &[SliceEntry], flat: bool) -> String {
    let base = entries
        .iter()
        .map(|e| indent_of(&e.text))
        .min()
        .unwrap_or(0);
    entries
        .iter()
        .map(|e| {
            let by = if flat { indent_of(&e.text) } else { base };
            dedent(&e.text, by)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{enumerate_targets, parse_module, TargetMode};
    use crate::tdg::{build_tdg, merge_symbols, prune, slice_tdg, Scope};

    fn slice_for(src: &str, name: &str, opts: SliceOptions) -> CodeSlice {
        let m = parse_module(src, "t.py").unwrap();
        let t = enumerate_targets(&m, TargetMode::All)
            .into_iter()
            .find(|t| t.display_name() == name)
            .unwrap();
        let scope = match &t.enclosing_function {
            Some(f) => Scope::Function(f.clone()),
            None => Scope::Module,
        };
        let g = merge_symbols(&prune(&build_tdg(&m, &scope).unwrap(), &t).unwrap());
        slice_code(&slice_tdg(&g, &t, 3).unwrap(), &m, &t, opts)
    }

    #[test]
    fn unrelated_statement_removed() {
        let s = slice_for("a = 1\nb = 2\n", "a", SliceOptions::default());
        assert_eq!(s.rendered, "a = 1");
    }

    #[test]
    fn nested_assignment_keeps_header() {
        let src = "def f(flag):\n    if flag:\n        x = 1\n    else:\n        x = 'one'\n    y = 2\n    return x\n";
        let s = slice_for(src, "f", SliceOptions::default());
        assert_eq!(
            s.rendered,
            "def f(flag):\n    if flag:\n        x = 1\n    else:\n        x = 'one'\n    return x"
        );
        let flat = slice_for(src, "f", SliceOptions { flat: true });
        assert_eq!(flat.rendered, "def f(flag):\nx = 1\nx = 'one'\nreturn x");
    }

    #[test]
    fn multi_line_statement_copied_whole() {
        let src = "X = [\n    1,\n    2,\n]\nY = 3\n";
        let s = slice_for(src, "X", SliceOptions::default());
        assert_eq!(s.entries.len(), 1);
        assert_eq!((s.entries[0].start_line, s.entries[0].end_line), (1, 4));
        assert_eq!(s.rendered, "X = [\n    1,\n    2,\n]");
    }

    #[test]
    fn argument_slice_has_def_and_uses() {
        let src = "def read(path):\n    n = 0\n    with open(path) as fh:\n        return fh.read()\n";
        let s = slice_for(src, "path", SliceOptions::default());
        assert_eq!(
            s.rendered,
            "def read(path):\n    with open(path) as fh:\n        return fh.read()"
        );
    }
}
