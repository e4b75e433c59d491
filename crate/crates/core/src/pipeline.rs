//! End-to-end inference: locate targets, build their context, prompt the
//! model and rank its answers.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::cot::{generate_cot, CotPrompt};
use crate::dataset::{DatasetError, DatasetRecord, PredictionRecord, VarCategory};
use crate::eval::EvalError;
use crate::frontend::{parse_file, FrontendError, SourceModule, TargetKind, TargetVariable};
use crate::hints::{collect_hints, HintOptions, TypeDatabase, TypeDbError, TypeHintSet};
use crate::llm::{Completer, CompletionRequest, LlmError, SampleKey};
use crate::prompting::{assemble_prompt, rank_samples, InputPrompt, PromptError};
use crate::retrieval::{select_examples_where, select_fixed, Bm25Index, ExampleRecord, IndexError};
use crate::slicer::{slice_code, CodeSlice, SliceOptions};
use crate::tdg::{build_tdg, merge_symbols, prune, slice_tdg, Scope, SlicedTdg, TdgError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error("{target}: {source}")]
    Tdg {
        target: String,
        #[source]
        source: TdgError,
    },
    #[error("no target {0}")]
    TargetNotFound(String),
    #[error("{0} matches several targets; pass --kind")]
    AmbiguousTarget(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    TypeDb(#[from] TypeDbError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("unknown example id `{0}`")]
    UnknownExample(String),
    #[error("{target}: {source}")]
    Prompt {
        target: String,
        #[source]
        source: PromptError,
    },
    #[error("{target}: {source}")]
    Backend {
        target: String,
        #[source]
        source: LlmError,
    },
}

impl PipelineError {
    /// Failures caused by the completion backend rather than the inputs.
    pub fn is_backend(&self) -> bool {
        matches!(self, PipelineError::Backend { .. })
    }
}

/// Everything derived from the source for one target.
#[derive(Debug, Clone)]
pub struct TargetContext {
    pub target: TargetVariable,
    pub sliced: SlicedTdg,
    pub slice: CodeSlice,
    pub hints: TypeHintSet,
}

impl TargetContext {
    pub fn cot(&self, annotated_type: &str) -> CotPrompt {
        generate_cot(&self.sliced, &self.target, annotated_type)
    }
}

pub fn scope_of(target: &TargetVariable) -> Scope {
    match (&target.kind, &target.enclosing_function) {
        (TargetKind::GlobalVariable, _) | (_, None) => Scope::Module,
        (_, Some(f)) => Scope::Function(f.clone()),
    }
}

fn describe(m: &SourceModule, t: &TargetVariable) -> String {
    format!("{}:{}:{}", m.path.display(), t.location.line, t.display_name())
}

/// Finds the definition site at `line` named `name` (the function name for
/// return values).
pub fn locate_target(
    m: &SourceModule,
    line: u32,
    name: &str,
    kind: Option<TargetKind>,
) -> Result<TargetVariable, PipelineError> {
    let mut found: Vec<&TargetVariable> = m
        .definition_sites()
        .iter()
        .filter(|t| t.location.line == line && t.display_name() == name)
        .filter(|t| kind.is_none_or(|k| k == t.kind))
        .collect();
    found.dedup_by_key(|t| t.kind);
    let loc = format!("{}:{line}:{name}", m.path.display());
    match found.as_slice() {
        [] => Err(PipelineError::TargetNotFound(loc)),
        [t] => Ok((*t).clone()),
        _ => Err(PipelineError::AmbiguousTarget(loc)),
    }
}

/// The definition site a dataset record refers to.
pub fn locate_record(m: &SourceModule, r: &DatasetRecord) -> Result<TargetVariable, PipelineError> {
    m.definition_sites()
        .iter()
        .find(|t| {
            VarCategory::from(t.kind) == r.kind
                && t.location.line == r.line
                && t.display_name() == r.name
                && t.enclosing_function == r.function
        })
        .cloned()
        .ok_or_else(|| PipelineError::TargetNotFound(r.id.clone()))
}

/// Builds, prunes, merges and slices the graph for `target`, then renders its
/// code slice and collects hints.
pub fn analyze_target(
    m: &SourceModule,
    target: &TargetVariable,
    project_root: &Path,
    db: &TypeDatabase,
    cfg: &RunConfig,
) -> Result<TargetContext, PipelineError> {
    let tdg_err = |source| PipelineError::Tdg {
        target: describe(m, target),
        source,
    };
    let g = build_tdg(m, &scope_of(target)).map_err(tdg_err)?;
    let g = merge_symbols(&prune(&g, target).map_err(tdg_err)?);
    let sliced = slice_tdg(&g, target, cfg.max_hop).map_err(tdg_err)?;
    let slice = slice_code(&sliced, m, target, SliceOptions { flat: cfg.flat_slices });
    let hints = collect_hints(
        m,
        project_root,
        db,
        HintOptions {
            cap: cfg.hint_cap,
            qualified: cfg.qualified_hints,
        },
    );
    Ok(TargetContext {
        target: target.clone(),
        sliced,
        slice,
        hints,
    })
}

/// Parsed files of a dataset, keyed by their dataset path.
pub struct Corpus {
    pub root: PathBuf,
    pub modules: HashMap<String, SourceModule>,
}

impl Corpus {
    pub fn load(root: &Path, records: &[DatasetRecord]) -> Result<Self, PipelineError> {
        let mut modules = HashMap::new();
        for r in records {
            if !modules.contains_key(&r.file) {
                modules.insert(r.file.clone(), parse_file(root.join(&r.file))?);
            }
        }
        Ok(Corpus {
            root: root.to_path_buf(),
            modules,
        })
    }

    pub fn context(
        &self,
        r: &DatasetRecord,
        db: &TypeDatabase,
        cfg: &RunConfig,
    ) -> Result<TargetContext, PipelineError> {
        let m = self
            .modules
            .get(&r.file)
            .ok_or_else(|| PipelineError::TargetNotFound(r.id.clone()))?;
        let target = locate_record(m, r)?;
        analyze_target(m, &target, &self.root, db, cfg)
    }
}

pub fn example_from(r: &DatasetRecord, ctx: &TargetContext) -> ExampleRecord {
    ExampleRecord {
        id: r.id.clone(),
        name: r.name.clone(),
        slice: ctx.slice.rendered.clone(),
        hints: ctx.hints.clone(),
        cot: ctx.cot(&r.annotation),
        annotation: r.annotation.clone(),
        kind: r.kind,
    }
}

/// Solved examples for annotated training records. Records that cannot be
/// analysed are returned with their error instead of aborting the build.
pub fn build_examples(
    records: &[DatasetRecord],
    root: &Path,
    db: &TypeDatabase,
    cfg: &RunConfig,
) -> (Vec<ExampleRecord>, Vec<(String, PipelineError)>) {
    let mut examples = Vec::new();
    let mut skipped = Vec::new();
    let mut modules: HashMap<&str, Result<SourceModule, String>> = HashMap::new();
    for r in records {
        let m = modules
            .entry(&r.file)
            .or_insert_with(|| parse_file(root.join(&r.file)).map_err(|e| e.to_string()));
        let m = match m {
            Ok(m) => m,
            Err(e) => {
                skipped.push((r.id.clone(), PipelineError::TargetNotFound(format!("{}: {e}", r.id))));
                continue;
            }
        };
        match locate_record(m, r).and_then(|t| analyze_target(m, &t, root, db, cfg)) {
            Ok(ctx) => examples.push(example_from(r, &ctx)),
            Err(e) => skipped.push((r.id.clone(), e)),
        }
    }
    (examples, skipped)
}

/// Assembles the prompt for a target. `exclude` keeps a record from serving
/// as its own example.
pub fn build_prompt(
    ctx: &TargetContext,
    index: Option<&Bm25Index>,
    cfg: &RunConfig,
    exclude: Option<&str>,
) -> Result<InputPrompt, PipelineError> {
    let examples: Vec<&ExampleRecord> = match index {
        Some(idx) if !cfg.fixed_examples.is_empty() => {
            select_fixed(idx, &cfg.fixed_examples).map_err(PipelineError::UnknownExample)?
        }
        Some(idx) if cfg.shots > 0 => select_examples_where(idx, &ctx.slice.rendered, cfg.shots, |e| {
            Some(e.id.as_str()) != exclude
        })
        .into_iter()
        .map(|(e, _)| e)
        .collect(),
        _ => Vec::new(),
    };
    assemble_prompt(&examples, &ctx.slice.rendered, &ctx.hints, &ctx.target, cfg.token_budget).map_err(
        |source| PipelineError::Prompt {
            target: describe_target(&ctx.target),
            source,
        },
    )
}

fn describe_target(t: &TargetVariable) -> String {
    format!("{}:{}", t.location.line, t.display_name())
}

fn predict_one(
    r: &DatasetRecord,
    corpus: &Corpus,
    index: Option<&Bm25Index>,
    db: &TypeDatabase,
    completer: &dyn Completer,
    cfg: &RunConfig,
) -> Result<PredictionRecord, PipelineError> {
    let ctx = corpus.context(r, db, cfg)?;
    let prompt = match build_prompt(&ctx, index, cfg, Some(&r.id)) {
        Ok(p) => p,
        Err(PipelineError::Prompt { source, .. }) => {
            log::warn!("{}: {source}; no prediction", r.id);
            return Ok(PredictionRecord {
                id: r.id.clone(),
                ranked: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };
    let req = CompletionRequest {
        prompt: prompt.rendered,
        n_samples: cfg.n_samples,
        temperature: cfg.temperature,
        max_new_tokens: cfg.max_new_tokens,
        model: cfg.backend.model.clone(),
        key: Some(SampleKey {
            file: r.file.clone(),
            target: r.id.clone(),
        }),
    };
    let samples = completer.complete(&req).map_err(|source| PipelineError::Backend {
        target: r.id.clone(),
        source,
    })?;
    Ok(PredictionRecord {
        id: r.id.clone(),
        ranked: rank_samples(&samples, cfg.top_k, cfg.strict_text).types(),
    })
}

/// Predictions for every record, in dataset order. Targets are processed on a
/// pool of `cfg.jobs` workers.
pub fn infer(
    records: &[DatasetRecord],
    root: &Path,
    index: Option<&Bm25Index>,
    db: &TypeDatabase,
    completer: &dyn Completer,
    cfg: &RunConfig,
) -> Result<Vec<PredictionRecord>, PipelineError> {
    cfg.validate()?;
    let corpus = Corpus::load(root, records)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    pool.install(|| {
        records
            .par_iter()
            .map(|r| predict_one(r, &corpus, index, db, completer, cfg))
            .collect()
    })
}

/// Annotation of every record, keyed by id.
pub fn ground_truth(records: &[DatasetRecord]) -> BTreeMap<String, String> {
    records.iter().map(|r| (r.id.clone(), r.annotation.clone())).collect()
}

/// Annotated targets of every `.py` file below `root`, in path order. Files
/// that fail to parse are skipped.
pub fn collect_dataset(root: &Path) -> Result<Vec<DatasetRecord>, PipelineError> {
    let mut files: Vec<PathBuf> = walkdir::WalkDir::new(root)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "py"))
        .map(|e| e.into_path())
        .collect();
    files.sort();
    let mut out = Vec::new();
    for path in files {
        let m = match parse_file(&path) {
            Ok(m) => m,
            Err(FrontendError::Syntax(e)) => {
                log::warn!("skipping {e}");
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let rel = path.strip_prefix(root).unwrap_or(&path);
        let rel = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        for t in crate::frontend::enumerate_targets(&m, crate::frontend::TargetMode::AnnotatedOnly) {
            out.extend(DatasetRecord::from_target(&rel, &t));
        }
    }
    Ok(out)
}
