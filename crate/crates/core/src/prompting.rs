//! Prompt assembly and answer extraction.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::VarCategory;
use crate::eval::parse_with;
use crate::frontend::{TargetKind, TargetVariable};
use crate::hints::{render_hint, TypeHintSet};
use crate::llm::estimate_tokens;
use crate::retrieval::ExampleRecord;

pub const PREAMBLE: &str = "Infer the type of the Python variable in the last question from its code, following the reasoning style of the answered examples.";

pub const QUESTION_TEMPLATE: &str =
    "What is the type of the {kind} {name}? Provide your reasoning steps and conclude with the type in backquotes.";

pub const DEFAULT_TOP_K: usize = 5;

fn kind_word(kind: VarCategory) -> &'static str {
    match kind {
        VarCategory::Arg => "argument",
        VarCategory::Ret => "return value",
        VarCategory::Var => "variable",
    }
}

pub fn question(kind: VarCategory, name: &str) -> String {
    QUESTION_TEMPLATE
        .replace("{kind}", kind_word(kind))
        .replace("{name}", name)
}

pub fn target_question(target: &TargetVariable) -> String {
    let name = match target.kind {
        TargetKind::ReturnValue => target.display_name(),
        _ => &target.name,
    };
    question(target.kind.into(), name)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSection {
    pub slice: String,
    /// Rendered hint sentence; empty when there are no hints.
    pub hint: String,
    pub question: String,
    /// Reasoning for examples; `None` for the target.
    pub answer: Option<String>,
}

impl PromptSection {
    pub fn render(&self) -> String {
        let mut out = format!("Code:\n{}\n", self.slice);
        if !self.hint.is_empty() {
            out.push_str(&self.hint);
            out.push('\n');
        }
        out.push_str("Question: ");
        out.push_str(&self.question);
        out.push_str("\nAnswer:");
        if let Some(a) = &self.answer {
            out.push(' ');
            out.push_str(a);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputPrompt {
    pub preamble: String,
    /// Least similar first.
    pub examples: Vec<PromptSection>,
    pub target: PromptSection,
    pub rendered: String,
    pub estimated_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("prompt needs about {tokens} tokens, over the budget of {budget}")]
    ContextOverflow { tokens: usize, budget: usize },
}

fn render_prompt(examples: &[PromptSection], target: &PromptSection) -> String {
    if examples.is_empty() {
        return target.render();
    }
    let mut parts = vec![PREAMBLE.to_string()];
    parts.extend(examples.iter().map(PromptSection::render));
    parts.push(target.render());
    parts.join("\n\n")
}

pub fn example_section(e: &ExampleRecord) -> PromptSection {
    PromptSection {
        slice: e.slice.clone(),
        hint: render_hint(&e.hints),
        question: question(e.kind, &e.name),
        answer: Some(e.cot.rendered.clone()),
    }
}

/// Builds the prompt from examples in ascending similarity. With a token
/// budget, the least similar examples are dropped one at a time (keeping at
/// least one) until the prompt fits.
pub fn assemble_prompt(
    examples: &[&ExampleRecord],
    target_slice: &str,
    target_hints: &TypeHintSet,
    target: &TargetVariable,
    token_budget: Option<usize>,
) -> Result<InputPrompt, PromptError> {
    let target_section = PromptSection {
        slice: target_slice.to_string(),
        hint: render_hint(target_hints),
        question: target_question(target),
        answer: None,
    };
    let mut sections: Vec<PromptSection> = examples.iter().map(|e| example_section(e)).collect();
    loop {
        let rendered = render_prompt(&sections, &target_section);
        let tokens = estimate_tokens(&rendered);
        match token_budget {
            Some(budget) if tokens > budget => {
                if sections.len() > 1 {
                    sections.remove(0);
                    continue;
                }
                return Err(PromptError::ContextOverflow { tokens, budget });
            }
            _ => {
                return Ok(InputPrompt {
                    preamble: PREAMBLE.to_string(),
                    examples: sections,
                    target: target_section,
                    rendered,
                    estimated_tokens: tokens,
                })
            }
        }
    }
}

/// The predicted type of one generation: the last backtick-quoted span, or
/// failing that the words after the final "is " of the text.
pub fn extract_predictions(generation: &str) -> Vec<String> {
    let text = generation.replace("```", "");
    let spans: Vec<&str> = text.split('`').skip(1).step_by(2).collect();
    let closed = text.matches('`').count() / 2;
    if let Some(span) = spans[..closed.min(spans.len())]
        .iter()
        .rev()
        .map(|s| s.trim())
        .find(|s| !s.is_empty())
    {
        return vec![span.to_string()];
    }
    fallback(&text).into_iter().collect()
}

fn fallback(text: &str) -> Option<String> {
    let pos = text
        .match_indices("is ")
        .filter(|(i, _)| *i == 0 || !text[..*i].ends_with(|c: char| c.is_alphanumeric()))
        .last()?
        .0;
    let rest = text[pos + 3..].lines().next().unwrap_or("").trim();
    let rest = rest.trim_end_matches('.').trim();
    let rest = rest
        .strip_prefix('\'')
        .and_then(|r| r.strip_suffix('\''))
        .or_else(|| rest.strip_prefix('"').and_then(|r| r.strip_suffix('"')))
        .unwrap_or(rest)
        .trim();
    (!rest.is_empty()).then(|| rest.to_string())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionSet {
    /// Canonical type text with its count, most frequent first.
    pub ranked: Vec<(String, usize)>,
    pub samples_used: usize,
}

impl PredictionSet {
    pub fn types(&self) -> Vec<String> {
        self.ranked.iter().map(|(t, _)| t.clone()).collect()
    }
}

/// Frequency ranking of the types extracted from each sample. Ties keep the
/// order of first appearance.
pub fn rank_samples(samples: &[String], top_k: usize, strict_text: bool) -> PredictionSet {
    let mut counts: Vec<(String, usize)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for s in samples {
        let Some(pred) = extract_predictions(s).pop() else { continue };
        let canon = parse_with(&pred, !strict_text).canonical;
        match index.get(&canon) {
            Some(&i) => counts[i].1 += 1,
            None => {
                index.insert(canon.clone(), counts.len());
                counts.push((canon, 1));
            }
        }
    }
    // stable sort keeps first-appearance order among equal counts
    counts.sort_by(|a, b| b.1.cmp(&a.1));
    counts.truncate(top_k);
    PredictionSet {
        ranked: counts,
        samples_used: samples.len(),
    }
}
