//! Few-shot generative type inference for Python.
//!
//! A target variable, argument or return value is turned into a prompt in
//! stages: the file is parsed ([`frontend`]), a type dependency graph is built
//! and sliced around the target ([`tdg`]), the surviving statements form a
//! code slice ([`slicer`]), visible user and third-party types become a hint
//! line ([`hints`]), and solved examples retrieved with BM25 ([`retrieval`])
//! carry chain-of-thought answers ([`cot`]). [`prompting`] assembles the
//! prompt and extracts ranked types from the model's samples ([`llm`]);
//! [`eval`] scores them with exact and parametric matching.

pub mod config;
pub mod cot;
pub mod dataset;
pub mod eval;
pub mod frontend;
pub mod hints;
pub mod llm;
pub mod pipeline;
pub mod prompting;
pub mod retrieval;
pub mod slicer;
pub mod tdg;

pub use config::RunConfig;
pub use cot::{generate_cot, CotPrompt};
pub use dataset::{DatasetRecord, PredictionRecord, VarCategory};
pub use eval::{evaluate, EvalReport, TypeCategory, TypeExpr};
pub use frontend::{parse_file, parse_module, SourceModule, TargetKind, TargetVariable};
pub use hints::{collect_hints, TypeDatabase, TypeHintSet};
pub use llm::{BackendConfig, BackendKind, Completer, CompletionRequest};
pub use pipeline::{analyze_target, infer, PipelineError as Error, TargetContext};
pub use prompting::{assemble_prompt, extract_predictions, rank_samples, InputPrompt};
pub use retrieval::{build_index, Bm25Index, ExampleRecord};
pub use slicer::{slice_code, CodeSlice};
pub use tdg::{slice_tdg, SlicedTdg, TypeDependencyGraph};
