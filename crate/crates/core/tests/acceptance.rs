//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report reads top to bottom:
//!
//! ```text
//! cargo test -p typeprompt-core --test acceptance
//! ```

mod common;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use typeprompt_core::config::RunConfig;
use typeprompt_core::dataset::{read_jsonl, DatasetRecord, VarCategory};
use typeprompt_core::eval::{
    evaluate, exact_match, match_to_parametric, parse_type, EvalOptions, TypeCategory,
};
use typeprompt_core::frontend::{enumerate_targets, parse_file, TargetKind, TargetMode};
use typeprompt_core::hints::TypeDatabase;
use typeprompt_core::llm::{deny_remote, MockBackend};
use typeprompt_core::pipeline::{analyze_target, build_examples, ground_truth, infer, locate_target};
use typeprompt_core::prompting::extract_predictions;
use typeprompt_core::retrieval::{build_index, select_examples, tokenize, ExampleRecord};
use typeprompt_core::tdg::{build_tdg, prune, slice_from, Direction, NodeId, Scope};
use typeprompt_core::{generate_cot, CotPrompt, TypeHintSet};

use common::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() -> ExitCode {
    deny_remote(true);
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("DATABASES fixture: hops, slice, reasoning", fixture_pipeline),
        ("echo oracle end to end", echo_oracle),
        ("BM25 oracle equivalence and ordering", bm25_equivalence),
        ("metric oracle equivalence", metric_equivalence),
        ("slicing properties on random graphs", slicing_properties),
        ("reasoning template conformance", template_conformance),
        ("extraction round trip", extraction_round_trip),
        ("run configuration defaults", defaults_audit),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(format!("panicked: {}", panic_text(&e))));
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({detail}; {ms} ms)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why} ({ms} ms)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_text(e: &Box<dyn std::any::Any + Send>) -> String {
    e.downcast_ref::<String>()
        .cloned()
        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure!(took < limit, "{what} took {took:?}, limit {limit:?}");
    Ok(())
}

// ---------------------------------------------------------------- 1

fn fixture_pipeline() -> Outcome {
    let start = Instant::now();
    let dir = fixtures();
    let m = parse_file(dir.join("django/settings.py")).map_err(|e| e.to_string())?;
    let target = locate_target(&m, 71, "DATABASES", None).map_err(|e| e.to_string())?;
    ensure!(target.kind == TargetKind::GlobalVariable, "DATABASES is {:?}", target.kind);

    let full = build_tdg(&m, &Scope::Module).map_err(|e| e.to_string())?;
    let pruned = prune(&full, &target).map_err(|e| e.to_string())?;
    let unrelated = [25, 27, 129];
    ensure!(
        unrelated
            .iter()
            .all(|l| full.nodes.values().any(|n| n.location().line == *l)),
        "unrelated statements missing from the full graph"
    );
    ensure!(
        pruned.nodes.values().all(|n| !unrelated.contains(&n.location().line)),
        "pruning kept nodes from lines {unrelated:?}"
    );

    let ctx = analyze_target(&m, &target, &dir, &TypeDatabase::default(), &RunConfig::default())
        .map_err(|e| e.to_string())?;
    let mut hops: Vec<(String, u32, u32, u32)> = ctx
        .sliced
        .hops
        .iter()
        .map(|(id, h)| {
            let n = ctx.sliced.graph.node(*id);
            (n.kind.to_string(), n.location().line, n.location().column, *h)
        })
        .collect();
    hops.sort_by_key(|h| (h.3, h.1, h.2));
    let expected: Vec<(String, u32, u32, u32)> = [
        ("Symbol(DATABASES)", 71, 0, 0),
        ("Operation(Dict_Read)", 71, 12, 1),
        ("TypeLit(str)", 72, 4, 2),
        ("Operation(Dict_Read)", 72, 15, 2),
        ("TypeLit(str)", 73, 8, 3),
        ("TypeLit(str)", 73, 18, 3),
        ("TypeLit(str)", 74, 8, 3),
        ("TypeLit(str)", 74, 16, 3),
    ]
    .iter()
    .map(|(k, l, c, h)| (k.to_string(), *l, *c, *h))
    .collect();
    ensure!(hops == expected, "hop labels differ: {hops:?}");

    let golden_slice = fs::read_to_string(dir.join("golden/databases_slice.txt")).map_err(|e| e.to_string())?;
    ensure!(format!("{}\n", ctx.slice.rendered) == golden_slice, "slice differs from the golden block");
    ensure!(
        golden_slice == format!("{}\n", m.line_text(71, 76)),
        "golden slice is not the source block at lines 71-76"
    );

    let cot = ctx.cot("dict[str, dict[str, str]]");
    let first = cot.steps.first().ok_or("no reasoning steps")?;
    ensure!(
        first.trim_end_matches('.') == "1. The variable DATABASES is assigned from a dict",
        "first step is {first:?}"
    );
    ensure!(
        cot.conclusion.contains("`dict[str, dict[str, str]]`"),
        "conclusion {:?}",
        cot.conclusion
    );
    let mut text = cot.steps.join("\n");
    text.push('\n');
    text.push_str(&cot.conclusion);
    text.push('\n');
    let golden_cot = fs::read_to_string(dir.join("golden/databases_cot.txt")).map_err(|e| e.to_string())?;
    ensure!(text == golden_cot, "reasoning differs from the golden snapshot:\n{text}");
    within(start, Duration::from_secs(1), "fixture pipeline")?;
    Ok(format!("{} nodes, {} steps", hops.len(), cot.steps.len()))
}

// ---------------------------------------------------------------- 2

fn echo_oracle() -> Outcome {
    let start = Instant::now();
    let root = fixtures().join("corpus");
    let records: Vec<DatasetRecord> = read_jsonl(&root.join("dataset.jsonl")).map_err(|e| e.to_string())?;
    let train: Vec<DatasetRecord> = read_jsonl(&root.join("train.jsonl")).map_err(|e| e.to_string())?;
    let db = TypeDatabase::load(&root.join("typedb.json")).map_err(|e| e.to_string())?;
    ensure!(records.len() >= 30, "only {} targets", records.len());

    let cfg = RunConfig::default();
    let (examples, skipped) = build_examples(&train, &root, &db, &cfg);
    ensure!(skipped.is_empty(), "training records skipped: {:?}", skipped.iter().map(|s| &s.0).collect::<Vec<_>>());
    let index = build_index(examples, 1.2, 0.75).map_err(|e| e.to_string())?;
    let backend = MockBackend::echo(ground_truth(&records));
    let preds = infer(&records, &root, Some(&index), &db, &backend, &cfg).map_err(|e| e.to_string())?;
    let map: BTreeMap<String, Vec<String>> = preds.into_iter().map(|p| (p.id, p.ranked)).collect();
    let report = evaluate(&records, &map, &EvalOptions::default()).map_err(|e| e.to_string())?;

    for v in VarCategory::ALL {
        for t in TypeCategory::ALL {
            let c = report.cell(Some(v), Some(t), 1);
            ensure!(c.total > 0, "no {}/{} targets", v.label(), t.label());
            ensure!(
                c.em == c.total && c.mtp == c.total,
                "{}/{}: EM {}/{} MTP {}/{}",
                v.label(),
                t.label(),
                c.em,
                c.total,
                c.mtp,
                c.total
            );
        }
    }
    let all = report.cell(None, None, 1);
    ensure!(all.em == all.total && all.mtp == all.total, "overall EM {}/{}", all.em, all.total);
    within(start, Duration::from_secs(10), "echo run")?;
    Ok(format!("{} targets, top-1 EM and MTP 100% in all 9 cells", all.total))
}

// ---------------------------------------------------------------- 3

fn toy_example(id: String, words: &[String]) -> ExampleRecord {
    let conclusion = "Therefore, the type of the variable x is `int`.".to_string();
    ExampleRecord {
        id,
        name: "x".into(),
        slice: words.join(" "),
        hints: TypeHintSet::default(),
        cot: CotPrompt {
            steps: Vec::new(),
            rendered: conclusion.clone(),
            conclusion,
        },
        annotation: "int".into(),
        kind: VarCategory::Var,
    }
}

fn bm25_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xb325);
    let mut queries = 0;
    let mut worst: f64 = 0.0;
    for corpus in 0..50 {
        let n = rng.random_range(1..=12);
        let docs: Vec<Vec<String>> = (0..n).map(|_| random_doc(&mut rng, 15)).collect();
        let records = docs
            .iter()
            .enumerate()
            .map(|(i, d)| toy_example(format!("d{i:02}"), d))
            .collect();
        let idx = build_index(records, 1.2, 0.75).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let query = random_doc(&mut rng, 6);
            let text = query.join(" ");
            ensure!(tokenize(&text) == query, "toy tokens changed by the tokenizer");
            let got = idx.scores(&text);
            let want = bm25_oracle(&docs, &query, 1.2, 0.75);
            for (i, (g, w)) in got.iter().zip(&want).enumerate() {
                worst = worst.max((g - w).abs());
                ensure!((g - w).abs() <= 1e-9, "corpus {corpus} doc {i}: {g} vs oracle {w}");
            }
            for k in 1..=6 {
                let picked = select_examples(&idx, &text, k);
                ensure!(picked.len() == k.min(n), "selected {} of {n} with k={k}", picked.len());
                ensure!(
                    picked.windows(2).all(|w| w[0].1 <= w[1].1),
                    "corpus {corpus}: selected scores not ascending"
                );
                let best = want.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let last = picked.last().unwrap().1;
                ensure!((last - best).abs() <= 1e-9, "most similar example is not last");
            }
            queries += 1;
        }
    }
    Ok(format!("50 corpora, {queries} queries, max deviation {worst:.1e}"))
}

// ---------------------------------------------------------------- 4

fn metric_equivalence() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0xe7a1);
    for set in 0..100 {
        let n = rng.random_range(1..=25);
        let mut records = Vec::new();
        let mut preds = BTreeMap::new();
        for i in 0..n {
            let kind = VarCategory::ALL[rng.random_range(0..3)];
            let annotation = random_type(&mut rng, 2);
            let id = format!("f.py:{i}:x{i}:{}", kind.label());
            let mut ranked: Vec<String> = (0..rng.random_range(0..7)).map(|_| random_type(&mut rng, 2)).collect();
            if !ranked.is_empty() && rng.random_bool(0.5) {
                let at = rng.random_range(0..ranked.len());
                ranked[at] = respell(&mut rng, &annotation);
            }
            if rng.random_bool(0.9) {
                preds.insert(id.clone(), ranked);
            }
            records.push(DatasetRecord {
                id,
                file: "f.py".into(),
                kind,
                name: format!("x{i}"),
                function: None,
                line: i,
                annotation,
            });
        }
        let report = evaluate(&records, &preds, &EvalOptions::default()).map_err(|e| e.to_string())?;
        let naive = naive_cells(&records, &preds);
        ensure!(naive.len() == report.cells.len(), "cell count {} vs {}", report.cells.len(), naive.len());
        for (key, &(em, mtp, total)) in &naive {
            let c = report.cells[key];
            ensure!(
                (c.em, c.mtp, c.total) == (em, mtp, total),
                "set {set} cell {key:?}: {:?} vs naive {:?}",
                (c.em, c.mtp, c.total),
                (em, mtp, total)
            );
        }
    }

    let mut em_pairs = 0;
    for i in 0..10_000 {
        let a = random_type(&mut rng, 3);
        let b = if i % 3 == 0 { respell(&mut rng, &a) } else { random_type(&mut rng, 3) };
        let (pa, pb) = (parse_type(&a), parse_type(&b));
        if exact_match(&pa, &pb) {
            em_pairs += 1;
            ensure!(match_to_parametric(&pa, &pb), "EM without MTP: {a} / {b}");
        }
    }
    ensure!(em_pairs > 1000, "only {em_pairs} exact pairs generated");

    let (li, ls) = (parse_type("List[int]"), parse_type("List[str]"));
    ensure!(match_to_parametric(&li, &ls) && !exact_match(&li, &ls), "List[int] vs List[str] misjudged");
    Ok(format!("100 prediction sets, 10000 pairs ({em_pairs} exact)"))
}

// ---------------------------------------------------------------- 5

fn slicing_properties() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x51ce);
    let mut cyclic = 0;
    for case in 0..200 {
        let n = rng.random_range(1..=14);
        let p = rng.random_range(0.05..0.4);
        let g = random_tdg(&mut rng, n, p);
        if has_cycle(&g) {
            cyclic += 1;
        }
        let anchors = vec![NodeId(0)];
        for dir in [Direction::Backward, Direction::Forward] {
            let s = slice_from(&g, &anchors, dir, 3);
            let want = hop_oracle(&g, &anchors, dir, 3);
            ensure!(s.hops == want, "case {case} {dir:?}: hops {:?} vs oracle {want:?}", s.hops);
            ensure!(s.max_observed_hop() <= 3, "case {case}: hop above 3");
            let mut prev = slice_from(&g, &anchors, dir, 0);
            for h in 1..=6 {
                let next = slice_from(&g, &anchors, dir, h);
                ensure!(
                    prev.graph.nodes.keys().all(|k| next.graph.nodes.contains_key(k))
                        && prev.graph.edges.keys().all(|k| next.graph.edges.contains_key(k)),
                    "case {case} {dir:?}: slice at hop {} not contained in hop {h}",
                    h - 1
                );
                prev = next;
            }
        }
    }
    ensure!(cyclic >= 50, "only {cyclic} cyclic graphs generated");
    Ok(format!("200 graphs, {cyclic} cyclic"))
}

fn has_cycle(g: &typeprompt_core::TypeDependencyGraph) -> bool {
    g.nodes.keys().any(|&start| {
        let forward = slice_from(g, &[start], Direction::Forward, u32::MAX - 1);
        g.edges.keys().any(|&(s, d)| d == start && forward.hops.contains_key(&s))
    })
}

// ---------------------------------------------------------------- 6

fn template_conformance() -> Outcome {
    let templates = cot_templates();
    let dir = fixtures();
    let mut files = vec![dir.join("django/settings.py")];
    for sub in ["corpus/shop", "corpus/train"] {
        let mut found: Vec<_> = fs::read_dir(dir.join(sub))
            .map_err(|e| e.to_string())?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "py"))
            .collect();
        found.sort();
        files.extend(found);
    }
    let cfg = RunConfig::default();
    let db = TypeDatabase::default();
    let (mut steps, mut targets) = (0, 0);
    let mut used: HashSet<&str> = HashSet::new();
    for f in &files {
        let m = parse_file(f).map_err(|e| e.to_string())?;
        for t in enumerate_targets(&m, TargetMode::All) {
            let ctx = analyze_target(&m, &t, &dir, &db, &cfg)
                .map_err(|e| format!("{}:{}: {e}", f.display(), t.location.line))?;
            let ty = t.annotation.clone().unwrap_or_else(|| "object".into());
            let cot = generate_cot(&ctx.sliced, &t, &ty);
            targets += 1;
            let where_ = || format!("{}:{} {}", f.display(), t.location.line, t.display_name());
            for (i, step) in cot.steps.iter().enumerate() {
                let (n, sentence) = split_step(step).ok_or_else(|| format!("{}: unnumbered step {step:?}", where_()))?;
                ensure!(n == i + 1, "{}: step numbered {n} at position {}", where_(), i + 1);
                let hits: Vec<&str> = templates
                    .iter()
                    .filter(|(_, re)| re.is_match(sentence))
                    .map(|(n, _)| *n)
                    .collect();
                ensure!(!hits.is_empty(), "{}: no template matches {sentence:?}", where_());
                used.extend(hits);
                steps += 1;
            }
            let concl = templates.iter().find(|(n, _)| *n == "conclusion").unwrap();
            ensure!(concl.1.is_match(&cot.conclusion), "{}: conclusion {:?}", where_(), cot.conclusion);
            used.insert("conclusion");
            if t.kind == TargetKind::Argument {
                ensure!(cot.steps.len() == 2, "{}: argument has {} steps", where_(), cot.steps.len());
                let (_, usage) = split_step(&cot.steps[0]).unwrap();
                let (_, naming) = split_step(&cot.steps[1]).unwrap();
                ensure!(
                    templates[6].1.is_match(usage) && templates[7].1.is_match(naming),
                    "{}: argument steps are not usage + naming",
                    where_()
                );
            }
        }
    }
    let unused: Vec<&str> = templates.iter().map(|(n, _)| *n).filter(|n| !used.contains(n)).collect();
    ensure!(unused.is_empty(), "templates never produced: {unused:?}");
    Ok(format!("{targets} targets, {steps} steps, all 9 templates exercised"))
}

// ---------------------------------------------------------------- 7

fn extraction_round_trip() -> Outcome {
    let m = parse_file(fixtures().join("corpus/shop/pricing.py")).map_err(|e| e.to_string())?;
    let targets = enumerate_targets(&m, TargetMode::AnnotatedOnly);
    let cfg = RunConfig::default();
    let db = TypeDatabase::default();
    let contexts = targets
        .iter()
        .map(|t| analyze_target(&m, t, &fixtures(), &db, &cfg))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut rng = StdRng::seed_from_u64(0x7e57);
    for i in 0..1000 {
        let ty = random_type(&mut rng, 3);
        let ctx = &contexts[i % contexts.len()];
        let cot = generate_cot(&ctx.sliced, &ctx.target, &ty);
        let got = extract_predictions(&cot.rendered);
        ensure!(got == [ty.clone()], "{ty:?} came back as {got:?}");
    }
    Ok("1000 types".into())
}

// ---------------------------------------------------------------- 8

fn defaults_audit() -> Outcome {
    let c = RunConfig::default();
    let got = (c.max_hop, c.shots, c.n_samples, c.temperature, c.top_k, c.hint_cap);
    ensure!(got == (3, 5, 50, 1.0, 5, 50), "defaults are {got:?}");
    Ok("hop 3, 5 shots, 50 samples, temperature 1.0, top-5, hint cap 50".into())
}
