use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};

use typeprompt_core::config::RunConfig;
use typeprompt_core::dataset::{read_jsonl, write_jsonl, DatasetRecord, PredictionRecord};
use typeprompt_core::eval::{evaluate, EvalOptions};
use typeprompt_core::frontend::{parse_file, SourceModule, TargetKind};
use typeprompt_core::hints::{build_typedb, collect_hints, discover_packages, render_hint, HintOptions, TypeDatabase};
use typeprompt_core::llm::{connect, LlmError};
use typeprompt_core::pipeline::{
    analyze_target, build_examples, build_prompt, collect_dataset, ground_truth, infer, locate_target,
    PipelineError, TargetContext,
};
use typeprompt_core::prompting::extract_predictions;
use typeprompt_core::retrieval::{build_index, Bm25Index, DEFAULT_B, DEFAULT_K1};

use crate::{Cli, Command, DatasetCommand, GraphFormat, IndexCommand, RunArgs, TargetArgs, TypedbCommand};

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Backend(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Backend(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Backend(m) => f.write_str(m),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        if e.is_backend() {
            CliError::Backend(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        CliError::Backend(e.to_string())
    }
}

fn input(e: impl fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: Cli) -> Result<()> {
    let cfg = run_config(cli.config.as_deref(), &cli.run)?;
    match cli.command {
        Command::Slice(t) => {
            let (_, ctx) = target_context(&t, &cfg)?;
            println!("{}", ctx.slice.rendered);
        }
        Command::Hints { file, root } => {
            let m = parse_file(&file).map_err(input)?;
            let root = root.unwrap_or_else(|| parent_dir(&file));
            let db = load_typedb(&cfg)?;
            let hints = collect_hints(&m, &root, &db, hint_options(&cfg));
            let line = render_hint(&hints);
            if !line.is_empty() {
                println!("{line}");
            }
        }
        Command::Cot { target, ty } => {
            let (_, ctx) = target_context(&target, &cfg)?;
            let cot = ctx.cot(&ty);
            for step in &cot.steps {
                println!("{step}");
            }
            println!("{}", cot.conclusion);
        }
        Command::Prompt(t) => {
            let (_, ctx) = target_context(&t, &cfg)?;
            let index = load_index(&cfg)?;
            let prompt = build_prompt(&ctx, index.as_ref(), &cfg, None)?;
            println!("{}", prompt.rendered);
        }
        Command::Tdg { target, format } => {
            let (_, ctx) = target_context(&target, &cfg)?;
            match format {
                GraphFormat::Text => print!("{}", ctx.sliced.graph.to_text()),
                GraphFormat::Json => {
                    let v = serde_json::to_string_pretty(&ctx.sliced).map_err(input)?;
                    println!("{v}");
                }
            }
        }
        Command::Extract { text } => {
            let text = match text {
                Some(t) => t,
                None => {
                    let mut buf = String::new();
                    std::io::stdin().read_to_string(&mut buf).map_err(input)?;
                    buf
                }
            };
            for t in extract_predictions(&text) {
                println!("{t}");
            }
        }
        Command::Dataset(DatasetCommand::Build { root, output }) => {
            let records = collect_dataset(&root)?;
            write_jsonl(&output, &records).map_err(input)?;
            eprintln!("wrote {} records to {}", records.len(), output.display());
        }
        Command::Index(IndexCommand::Build { train, root, output }) => {
            let records: Vec<DatasetRecord> = read_jsonl(&train).map_err(input)?;
            let root = root.unwrap_or_else(|| parent_dir(&train));
            let db = load_typedb(&cfg)?;
            let (examples, skipped) = build_examples(&records, &root, &db, &cfg);
            for (id, e) in &skipped {
                log::warn!("skipping {id}: {e}");
            }
            let n = examples.len();
            let idx = build_index(examples, DEFAULT_K1, DEFAULT_B).map_err(input)?;
            idx.save(&output).map_err(input)?;
            eprintln!("indexed {n} examples ({} skipped) into {}", skipped.len(), output.display());
        }
        Command::Typedb(TypedbCommand::Build { site, output }) => {
            let roots = discover_packages(&site).map_err(|e| input(format!("{}: {e}", site.display())))?;
            let db = build_typedb(&roots);
            db.save(&output).map_err(input)?;
            eprintln!("recorded {} packages in {}", db.packages.len(), output.display());
        }
        Command::Infer { dataset, root, output } => {
            let records: Vec<DatasetRecord> = read_jsonl(&dataset).map_err(input)?;
            let root = root.unwrap_or_else(|| parent_dir(&dataset));
            let db = load_typedb(&cfg)?;
            let index = load_index(&cfg)?;
            if index.is_none() && cfg.shots > 0 {
                log::warn!("no --index given; prompting without examples");
            }
            let backend = connect(&cfg.backend, ground_truth(&records))?;
            let preds = infer(&records, &root, index.as_ref(), &db, backend.as_ref(), &cfg)?;
            write_jsonl(&output, &preds).map_err(input)?;
            eprintln!("wrote {} predictions to {}", preds.len(), output.display());
        }
        Command::Eval {
            dataset,
            predictions,
            json,
        } => {
            let records: Vec<DatasetRecord> = read_jsonl(&dataset).map_err(input)?;
            let preds: Vec<PredictionRecord> = read_jsonl(&predictions).map_err(input)?;
            let map: BTreeMap<String, Vec<String>> = preds.into_iter().map(|p| (p.id, p.ranked)).collect();
            let known_user_types: HashSet<String> = load_typedb(&cfg)?
                .packages
                .into_values()
                .flatten()
                .collect();
            let opts = EvalOptions {
                strict_text: cfg.strict_text,
                known_user_types,
            };
            let report = evaluate(&records, &map, &opts).map_err(input)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report.to_json()).map_err(input)?);
            } else {
                print!("{}", report.to_table());
            }
        }
    }
    Ok(())
}

fn parent_dir(p: &Path) -> PathBuf {
    p.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Defaults, then the config file, then flags.
fn run_config(file: Option<&Path>, a: &RunArgs) -> Result<RunConfig> {
    let mut c = match file {
        Some(p) => RunConfig::from_toml_file(p).map_err(input)?,
        None => RunConfig::default(),
    };
    macro_rules! flag {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src.clone() {
                $dst = v.into();
            }
        };
    }
    flag!(c.max_hop, a.max_hop);
    flag!(c.shots, a.shots);
    flag!(c.n_samples, a.samples);
    flag!(c.temperature, a.temperature);
    flag!(c.top_k, a.top_k);
    flag!(c.hint_cap, a.hint_cap);
    flag!(c.backend.kind, a.backend);
    flag!(c.backend.model, a.model);
    flag!(c.fixed_examples, a.fixed_examples);
    flag!(c.seed, a.seed);
    flag!(c.jobs, a.jobs);
    if let Some(url) = &a.base_url {
        c.backend.base_url = Some(url.clone());
    }
    if let Some(p) = &a.mock_fixtures {
        c.backend.mock_fixtures = Some(p.clone());
    }
    if let Some(b) = a.token_budget {
        c.token_budget = (b > 0).then_some(b);
    }
    if let Some(p) = &a.index {
        c.index = Some(p.clone());
    }
    if let Some(p) = &a.typedb {
        c.typedb = Some(p.clone());
    }
    c.flat_slices |= a.flat_slices;
    c.strict_text |= a.strict_text;
    c.qualified_hints |= a.qualified_hints;
    c.validate().map_err(input)?;
    Ok(c)
}

fn hint_options(cfg: &RunConfig) -> HintOptions {
    HintOptions {
        cap: cfg.hint_cap,
        qualified: cfg.qualified_hints,
    }
}

fn load_typedb(cfg: &RunConfig) -> Result<TypeDatabase> {
    match &cfg.typedb {
        Some(p) => TypeDatabase::load(p).map_err(input),
        None => Ok(TypeDatabase::default()),
    }
}

fn load_index(cfg: &RunConfig) -> Result<Option<Bm25Index>> {
    cfg.index.as_deref().map(Bm25Index::load).transpose().map_err(input)
}

/// Splits `FILE:LINE:NAME` from the right so paths may contain colons.
fn parse_locator(s: &str) -> Result<(PathBuf, u32, String)> {
    let bad = || input(format!("bad target locator `{s}`; expected FILE.py:LINE:NAME"));
    let mut parts = s.rsplitn(3, ':');
    let name = parts.next().filter(|n| !n.is_empty()).ok_or_else(bad)?;
    let line = parts.next().and_then(|l| l.parse().ok()).ok_or_else(bad)?;
    let file = parts.next().filter(|f| !f.is_empty()).ok_or_else(bad)?;
    Ok((PathBuf::from(file), line, name.to_string()))
}

fn target_context(t: &TargetArgs, cfg: &RunConfig) -> Result<(SourceModule, TargetContext)> {
    let (file, line, name) = parse_locator(&t.locator)?;
    let m = parse_file(&file).map_err(input)?;
    let target = locate_target(&m, line, &name, t.kind.map(TargetKind::from))?;
    let root = t.root.clone().unwrap_or_else(|| parent_dir(&file));
    let db = load_typedb(cfg)?;
    let ctx = analyze_target(&m, &target, &root, &db, cfg)?;
    Ok((m, ctx))
}
