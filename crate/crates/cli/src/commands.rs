//! Subcommand implementations.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use kghist_core::{EntityId, Object, Revision, Triple, TripleOperation};
use kghist_eval::compare::{compare_models, ModelEvaluation};
use kghist_eval::metrics::{build_test_sample, filtered_rank, known_true_classes, ranking_report};
use kghist_learn::embedding::{EmbeddingModel, ModelKind};
use kghist_learn::forest::ForestConfig;
use kghist_learn::sampler::{SamplerConfig, SamplerContext, SamplerKind};
use kghist_learn::search::{random_search, SearchSpace};
use kghist_learn::train::{train as train_model, TrainConfig};
use kghist_learn::typer::{dedup_last_label, label_from_history, TyperModel};
use kghist_learn::walks::{walk_embeddings, WalkConfig};
use kghist_pipeline::analytics::{
    class_operation_stats, conflict_rankings, detect_edit_wars, entity_category_sequences,
    most_removed_properties, property_display, transition_graph,
};
use kghist_pipeline::export::{export_dynamic, export_static};
use kghist_pipeline::extract::extract_triple_ops;
use kghist_pipeline::fixture::{generate, FixtureConfig};
use kghist_pipeline::graph::{chronological_split, materialize_all, SplitSpec};
use kghist_pipeline::ingest::{ingest_jsonl, ingest_xml_dump};
use kghist_pipeline::rank::{class_rank, filter_classes_by_label, pagerank, Aggregation, RankGraph};
use kghist_pipeline::store::{build_store, StoreLayout, StoreReader};

use crate::config::FileConfig;
use crate::manifest::RunManifest;
use crate::{ExportKind, IngestFormat, ReportFormat, ReportKind, TrainArgs};

type CommandResult = Result<(), String>;

fn ensure_dir(path: &Path) -> Result<(), String> {
    std::fs::create_dir_all(path)
        .map_err(|e| format!("cannot create directory {}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn read_text(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn open_store(store_dir: &Path) -> Result<StoreReader, String> {
    StoreReader::open(StoreLayout::in_dir(store_dir)).map_err(|e| e.to_string())
}

/// English labels of every entity in the store's final snapshots.
fn store_labels(reader: &StoreReader) -> Result<BTreeMap<EntityId, String>, String> {
    let mut labels = BTreeMap::new();
    for entity in reader.entity_ids() {
        let snapshot = reader.final_snapshot(entity).map_err(|e| e.to_string())?;
        if let Some(label) = snapshot.pointer("/labels/en").and_then(|v| v.as_str()) {
            labels.insert(entity, label.to_owned());
        }
    }
    Ok(labels)
}

fn print_warnings(warnings: &[kghist_pipeline::Warning]) {
    for warning in warnings {
        eprintln!("warning: {warning}");
    }
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

pub fn ingest(format: IngestFormat, input: &Path, out_dir: &Path) -> CommandResult {
    let started = Instant::now();
    ensure_dir(out_dir)?;
    let file = std::fs::File::open(input)
        .map_err(|e| format!("cannot open {}: {e}", input.display()))?;
    let reader = BufReader::new(file);
    let outcome = match format {
        IngestFormat::Xml => ingest_xml_dump(reader).map_err(|e| e.to_string())?,
        IngestFormat::Jsonl => ingest_jsonl(reader).map_err(|e| e.to_string())?,
    };
    print_warnings(&outcome.warnings);

    let layout = StoreLayout::in_dir(out_dir);
    let stats = build_store(outcome.records, &layout).map_err(|e| e.to_string())?;
    println!(
        "ingested {} entities, {} revisions, {} operations",
        stats.entities, stats.revisions, stats.operations
    );

    let mut manifest = RunManifest::new(None);
    manifest.add_input(input)?;
    for path in [&layout.entities_file, &layout.revisions_file, &layout.index_file] {
        manifest.add_output(path);
    }
    manifest.write(out_dir, started)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

pub fn analyze(
    store_dir: &Path,
    report: ReportKind,
    format: ReportFormat,
    class: Option<&str>,
    prune: Option<f64>,
    out: &Path,
    file_config: &FileConfig,
) -> CommandResult {
    let started = Instant::now();
    let reader = open_store(store_dir)?;
    let revisions = reader.all_revisions().map_err(|e| e.to_string())?;
    let labels = store_labels(&reader)?;

    let text = match report {
        ReportKind::Transitions => {
            let prune = file_config.resolve(prune, "prune", 0.10)?;
            let (sequences, warnings) =
                entity_category_sequences(&revisions).map_err(|e| e.to_string())?;
            print_warnings(&warnings);
            let graph = transition_graph(sequences.values().map(Vec::as_slice), prune);
            match format {
                ReportFormat::Dot => graph.to_dot(),
                ReportFormat::Csv => {
                    let mut text = String::from("from,to,count\n");
                    for ((from, to), count) in &graph.edge_counts {
                        text.push_str(&format!("{from},{to},{count}\n"));
                    }
                    text
                }
            }
        }
        ReportKind::ClassOps => {
            let membership = final_class_membership(&revisions)?;
            let stats = class_operation_stats(&revisions, &membership);
            let mut text =
                String::from("class,label,instances,mean_additions,mean_removals,mean_replacements\n");
            for row in stats {
                text.push_str(&format!(
                    "{},{},{},{:.4},{:.4},{:.4}\n",
                    row.class_id,
                    labels.get(&row.class_id).cloned().unwrap_or_default(),
                    row.instance_count,
                    row.mean_additions,
                    row.mean_removals,
                    row.mean_replacements
                ));
            }
            text
        }
        ReportKind::RemovedProps => {
            let class = class.ok_or("--class is required for removed-props")?;
            let class_id: EntityId =
                class.parse().map_err(|e: kghist_core::EntityIdParseError| e.to_string())?;
            let membership = final_class_membership(&revisions)?;
            let ranking = most_removed_properties(&revisions, &membership, class_id)
                .map_err(|e| e.to_string())?;
            let mut text = String::from("property,display,removals_per_instance\n");
            for (property, rate) in ranking {
                text.push_str(&format!(
                    "{},{},{:.4}\n",
                    property,
                    property_display(property, &labels),
                    rate
                ));
            }
            text
        }
        ReportKind::EditWars => {
            let extracted = extract_triple_ops(&revisions).map_err(|e| e.to_string())?;
            let wars = detect_edit_wars(&extracted.ops);
            let membership = final_class_membership(&revisions)?;
            let rankings = conflict_rankings(&wars, &membership);
            let mut text = String::from("kind,id,display,value\n");
            for (property, count) in &rankings.per_property {
                text.push_str(&format!(
                    "property,{},{},{}\n",
                    property,
                    property_display(*property, &labels),
                    count
                ));
            }
            for (class, mean) in &rankings.per_class {
                text.push_str(&format!(
                    "class,{},{},{:.4}\n",
                    class,
                    labels.get(class).cloned().unwrap_or_default(),
                    mean
                ));
            }
            text
        }
    };
    write_text(out, &text)?;

    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        let mut manifest = RunManifest::new(None);
        manifest.add_output(out);
        manifest.write(parent, started)?;
    }
    Ok(())
}

/// Instance-to-classes map from the final materialized graph.
fn final_class_membership(
    revisions: &[Revision],
) -> Result<BTreeMap<EntityId, BTreeSet<EntityId>>, String> {
    let extracted = extract_triple_ops(revisions).map_err(|e| e.to_string())?;
    let state = materialize_all(&extracted.ops).state;
    Ok(state.class_membership(EntityId::property(31)))
}

// ---------------------------------------------------------------------------
// classrank
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
pub fn classrank(
    store_dir: &Path,
    pagerank_file: Option<&Path>,
    top: usize,
    filter_label: Option<&str>,
    damping: Option<f64>,
    iterations: Option<usize>,
    mean: bool,
    out: &Path,
    file_config: &FileConfig,
) -> CommandResult {
    let started = Instant::now();
    let reader = open_store(store_dir)?;
    let revisions = reader.all_revisions().map_err(|e| e.to_string())?;
    let labels = store_labels(&reader)?;
    let extracted = extract_triple_ops(&revisions).map_err(|e| e.to_string())?;
    let state = materialize_all(&extracted.ops).state;

    let scores = match pagerank_file {
        Some(path) => {
            let mut scores = BTreeMap::new();
            for (number, line) in read_text(path)?.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let (id, score) = line
                    .split_once(',')
                    .ok_or_else(|| format!("{}:{}: expected `id,score`", path.display(), number + 1))?;
                let id: EntityId = id.trim().parse().map_err(|e| format!("{e}"))?;
                let score: f64 = score
                    .trim()
                    .parse()
                    .map_err(|e| format!("{}:{}: bad score: {e}", path.display(), number + 1))?;
                scores.insert(id, score);
            }
            scores
        }
        None => {
            let damping = file_config.resolve(damping, "damping", 0.85)?;
            let iterations = file_config.resolve(iterations, "iterations", 50)?;
            let mut graph = RankGraph::from_edges(state.triples.iter().filter_map(|t| {
                match &t.object {
                    Object::Entity(object) => Some((t.subject, *object)),
                    _ => None,
                }
            }));
            for triple in &state.triples {
                graph.add_node(triple.subject);
            }
            pagerank(&graph, damping, iterations)
        }
    };

    let instance_of: Vec<(EntityId, EntityId)> = state
        .class_membership(EntityId::property(31))
        .into_iter()
        .flat_map(|(instance, classes)| classes.into_iter().map(move |c| (instance, c)))
        .collect();
    let aggregation = if mean { Aggregation::Mean } else { Aggregation::Sum };
    let mut ranking = class_rank(&instance_of, &scores, aggregation);
    if let Some(term) = filter_label {
        ranking = filter_classes_by_label(ranking, &labels, term);
    }
    ranking.truncate(top);

    let mut text = String::from("class,label,score,instances\n");
    for row in &ranking {
        text.push_str(&format!(
            "{},{},{:.6},{}\n",
            row.class_id,
            labels.get(&row.class_id).cloned().unwrap_or_default(),
            row.score,
            row.instance_count
        ));
    }
    write_text(out, &text)?;

    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        let mut manifest = RunManifest::new(None);
        manifest.add_output(out);
        manifest.write(parent, started)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// split
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct SplitMeta {
    train_fraction: f64,
    valid_fraction: f64,
    test_fraction: f64,
    train_ops: usize,
    valid_ops: usize,
    test_ops: usize,
}

fn write_ops(path: &Path, ops: &[TripleOperation]) -> Result<(), String> {
    let mut text = String::new();
    for op in ops {
        text.push_str(&serde_json::to_string(op).map_err(|e| e.to_string())?);
        text.push('\n');
    }
    write_text(path, &text)
}

fn read_ops(path: &Path) -> Result<Vec<TripleOperation>, String> {
    let mut ops = Vec::new();
    for (number, line) in read_text(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let op: TripleOperation = serde_json::from_str(line)
            .map_err(|e| format!("{}:{}: {e}", path.display(), number + 1))?;
        ops.push(op);
    }
    Ok(ops)
}

pub struct SplitPaths {
    pub train: PathBuf,
    pub valid: PathBuf,
    pub test: PathBuf,
}

pub fn split_paths(dir: &Path) -> SplitPaths {
    SplitPaths {
        train: dir.join("train_ops.jsonl"),
        valid: dir.join("valid_ops.jsonl"),
        test: dir.join("test_ops.jsonl"),
    }
}

pub fn split(
    store_dir: &Path,
    out_dir: &Path,
    train: Option<f64>,
    valid: Option<f64>,
    file_config: &FileConfig,
) -> CommandResult {
    let started = Instant::now();
    ensure_dir(out_dir)?;
    let train_fraction = file_config.resolve(train, "train", 0.70)?;
    let valid_fraction = file_config.resolve(valid, "valid", 0.15)?;
    let spec = SplitSpec::new(train_fraction, valid_fraction).map_err(|e| e.to_string())?;

    let reader = open_store(store_dir)?;
    let revisions = reader.all_revisions().map_err(|e| e.to_string())?;
    let extracted = extract_triple_ops(&revisions).map_err(|e| e.to_string())?;
    let result = chronological_split(&revisions, &extracted.ops, &spec);

    let paths = split_paths(out_dir);
    write_ops(&paths.train, &result.train_ops)?;
    write_ops(&paths.valid, &result.valid_ops)?;
    write_ops(&paths.test, &result.test_ops)?;
    let meta = SplitMeta {
        train_fraction,
        valid_fraction,
        test_fraction: spec.test_fraction,
        train_ops: result.train_ops.len(),
        valid_ops: result.valid_ops.len(),
        test_ops: result.test_ops.len(),
    };
    write_text(
        &out_dir.join("split.json"),
        &serde_json::to_string_pretty(&meta).map_err(|e| e.to_string())?,
    )?;
    println!(
        "split {} ops into {}/{}/{}",
        extracted.ops.len(),
        result.train_ops.len(),
        result.valid_ops.len(),
        result.test_ops.len()
    );

    let mut manifest = RunManifest::new(None);
    for path in [&paths.train, &paths.valid, &paths.test] {
        manifest.add_output(path);
    }
    manifest.write(out_dir, started)?;
    Ok(())
}

pub fn load_split(dir: &Path) -> Result<kghist_pipeline::graph::ChronologicalSplit, String> {
    let paths = split_paths(dir);
    Ok(kghist_pipeline::graph::ChronologicalSplit {
        train_ops: read_ops(&paths.train)?,
        valid_ops: read_ops(&paths.valid)?,
        test_ops: read_ops(&paths.test)?,
        ..Default::default()
    })
}

// ---------------------------------------------------------------------------
// export
// ---------------------------------------------------------------------------

pub fn export(store_dir: &Path, kind: ExportKind, out: &Path) -> CommandResult {
    let started = Instant::now();
    let reader = open_store(store_dir)?;
    let revisions = reader.all_revisions().map_err(|e| e.to_string())?;
    let extracted = extract_triple_ops(&revisions).map_err(|e| e.to_string())?;
    let count = match kind {
        ExportKind::Static => {
            let state = materialize_all(&extracted.ops).state;
            export_static(&state, out).map_err(|e| e.to_string())?
        }
        ExportKind::Dynamic => {
            export_dynamic(&extracted.ops, &revisions, out).map_err(|e| e.to_string())?
        }
    };
    println!("wrote {count} triples to {}", out.display());

    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        let mut manifest = RunManifest::new(None);
        manifest.add_output(out);
        manifest.write(parent, started)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct TrainSummary<'a> {
    model: &'a str,
    sampler: &'a str,
    config: &'a TrainConfig,
    epoch_losses: &'a [f64],
    search_trials: usize,
}

pub fn train(args: &TrainArgs, file_config: &FileConfig) -> CommandResult {
    let started = Instant::now();
    ensure_dir(&args.out_dir)?;
    let seed = file_config.resolve(args.seed, "seed", 42)?;
    let split = load_split(&args.split_dir)?;

    if args.supervised {
        return train_supervised(args, file_config, seed, &split, started);
    }

    let kind: ModelKind = args.model.parse()?;
    let sampler_kind: SamplerKind = args.sampler.parse()?;
    let train_valid = split.train_valid_ops();
    let wars = detect_edit_wars(&train_valid);
    let ctx = SamplerContext::from_ops(&train_valid, &wars);
    let positives: Vec<Triple> = materialize_all(&train_valid).state.triples.into_iter().collect();

    let base_config = TrainConfig {
        dim: file_config.resolve(args.dim, "dim", 64)?,
        epochs: file_config.resolve(args.epochs, "epochs", 20)?,
        batch_size: file_config.resolve(args.batch, "batch", 128)?,
        learning_rate: file_config.resolve(args.lr, "lr", 0.01)?,
        num_negatives: file_config.resolve(args.negatives, "negatives", 5)?,
        margin: file_config.resolve(args.margin, "margin", 1.0)?,
        seed,
        norm: Default::default(),
    };
    let sampler_config = SamplerConfig { kind: sampler_kind, seed, ..Default::default() };

    let mut search_trials = 0;
    let config = if args.search_budget > 0 {
        // Objective: validation MRR of a model trained on the train split only.
        let validation_view = kghist_pipeline::graph::ChronologicalSplit {
            train_ops: split.train_ops.clone(),
            valid_ops: Vec::new(),
            test_ops: split.valid_ops.clone(),
            ..Default::default()
        };
        let train_only_positives: Vec<Triple> =
            materialize_all(&split.train_ops).state.triples.into_iter().collect();
        let train_wars = detect_edit_wars(&split.train_ops);
        let train_ctx = SamplerContext::from_ops(&split.train_ops, &train_wars);
        let (best, trials) = random_search(&SearchSpace::default(), args.search_budget, seed, |candidate| {
            let Ok((model, _)) = train_model(
                kind,
                &train_only_positives,
                &train_ctx,
                SamplerConfig { kind: sampler_kind, seed, ..Default::default() },
                candidate,
            ) else {
                return f64::NEG_INFINITY;
            };
            validation_mrr(&model, &validation_view)
        });
        search_trials = trials.len();
        write_text(
            &args.out_dir.join("search_trials.json"),
            &serde_json::to_string_pretty(&trials).map_err(|e| e.to_string())?,
        )?;
        TrainConfig { seed, ..best }
    } else {
        base_config
    };

    let (model, report) =
        train_model(kind, &positives, &ctx, sampler_config, &config).map_err(|e| e.to_string())?;
    let stem = args.out_dir.join("model");
    model.save(&stem).map_err(|e| e.to_string())?;

    let summary = TrainSummary {
        model: &args.model,
        sampler: &args.sampler,
        config: &config,
        epoch_losses: &report.epoch_losses,
        search_trials,
    };
    write_text(
        &args.out_dir.join("train_report.json"),
        &serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?,
    )?;
    println!(
        "trained {} ({} positives, {} epochs, final loss {:.4})",
        args.model,
        positives.len(),
        config.epochs,
        report.epoch_losses.last().copied().unwrap_or_default()
    );

    let mut manifest = RunManifest::new(Some(seed));
    manifest.add_output(&stem.with_extension("bin"));
    manifest.add_output(&stem.with_extension("json"));
    manifest.write(&args.out_dir, started)?;
    Ok(())
}

/// Validation MRR of an embedding model over a split view whose test bucket
/// holds the validation operations.
fn validation_mrr(
    model: &EmbeddingModel,
    view: &kghist_pipeline::graph::ChronologicalSplit,
) -> f64 {
    let class_pointer = EntityId::property(31);
    let sample = build_test_sample(view, class_pointer);
    let known = known_true_classes(view, class_pointer);
    let candidates = candidate_classes(&view.train_ops, class_pointer);
    let mut ranks = Vec::new();
    for (entity, class) in sample {
        let Some(scores) = score_candidates_embedding(model, entity, class_pointer, &candidates)
        else {
            continue;
        };
        let empty = BTreeSet::new();
        let known_for_entity = known.get(&entity).unwrap_or(&empty);
        if let Ok(rank) = filtered_rank(&scores, class, known_for_entity) {
            ranks.push(rank);
        }
    }
    match ranking_report(&ranks) {
        Ok(report) => report.mrr,
        Err(_) => f64::NEG_INFINITY,
    }
}

fn train_supervised(
    args: &TrainArgs,
    file_config: &FileConfig,
    seed: u64,
    split: &kghist_pipeline::graph::ChronologicalSplit,
    started: Instant,
) -> CommandResult {
    let train_valid = split.train_valid_ops();
    let state = materialize_all(&train_valid).state;
    let walk_config = WalkConfig {
        vector_size: file_config.resolve(args.dim, "dim", 50)?,
        epochs: file_config.resolve(args.epochs, "epochs", 50)?,
        max_depth: file_config.resolve(args.depth, "depth", 5)?,
        walks_per_entity: file_config.resolve(args.walks, "walks", 50)?,
        seed,
        ..Default::default()
    };
    let embeddings = walk_embeddings(&state, &walk_config);
    let mut labeled = label_from_history(&train_valid);
    if args.dedup_labels {
        labeled = dedup_last_label(&labeled);
    }
    let forest_config = ForestConfig {
        num_trees: file_config.resolve(args.trees, "trees", 75)?,
        seed,
        ..Default::default()
    };
    let typer = TyperModel::train(
        &labeled,
        embeddings,
        walk_config,
        &forest_config,
        EntityId::property(31),
    )
    .map_err(|e| e.to_string())?;
    let path = args.out_dir.join("typer.json");
    typer.save(&path).map_err(|e| e.to_string())?;
    println!(
        "trained supervised typer ({} labeled instances, oob accuracy {})",
        labeled.len(),
        typer
            .forest
            .oob_accuracy
            .map(|a| format!("{a:.3}"))
            .unwrap_or_else(|| "n/a".to_owned())
    );

    let mut manifest = RunManifest::new(Some(seed));
    manifest.add_output(&path);
    manifest.write(&args.out_dir, started)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

enum LoadedModel {
    Embedding(EmbeddingModel),
    Typer(Box<TyperModel>),
}

fn load_model(path: &Path) -> Result<LoadedModel, String> {
    let stem = if path.extension().is_some() { path.with_extension("") } else { path.to_path_buf() };
    if stem.with_extension("bin").exists() {
        return Ok(LoadedModel::Embedding(
            EmbeddingModel::load(&stem).map_err(|e| e.to_string())?,
        ));
    }
    if path.exists() {
        return Ok(LoadedModel::Typer(Box::new(
            TyperModel::load(path).map_err(|e| e.to_string())?,
        )));
    }
    Err(format!("model not found at {}", path.display()))
}

/// Every class used as a type object anywhere in the training operations.
fn candidate_classes(train_ops: &[TripleOperation], class_pointer: EntityId) -> Vec<EntityId> {
    train_ops
        .iter()
        .filter(|op| op.triple.predicate == class_pointer)
        .filter_map(|op| match &op.triple.object {
            Object::Entity(class) => Some(*class),
            _ => None,
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn score_candidates_embedding(
    model: &EmbeddingModel,
    entity: EntityId,
    class_pointer: EntityId,
    candidates: &[EntityId],
) -> Option<BTreeMap<EntityId, f64>> {
    let mut scores = BTreeMap::new();
    for &candidate in candidates {
        let triple = Triple::new(entity, class_pointer, Object::Entity(candidate));
        if let Ok(score) = model.score(&triple) {
            scores.insert(candidate, score);
        }
    }
    if scores.is_empty() {
        None
    } else {
        Some(scores)
    }
}

#[derive(Serialize, Deserialize)]
pub struct EvaluationArtifacts {
    pub name: String,
    pub report: kghist_eval::metrics::RankingReport,
    pub outcomes: Vec<bool>,
    pub test_cases: Vec<(EntityId, EntityId)>,
    pub skipped_cases: usize,
}

pub fn evaluate(model_path: &Path, split_dir: &Path, out_dir: &Path) -> CommandResult {
    let started = Instant::now();
    ensure_dir(out_dir)?;
    let model = load_model(model_path)?;
    let split = load_split(split_dir)?;
    let class_pointer = EntityId::property(31);

    let sample = build_test_sample(&split, class_pointer);
    let known = known_true_classes(&split, class_pointer);
    let candidates = candidate_classes(&split.train_ops, class_pointer);

    let mut ranks = Vec::new();
    let mut outcomes = Vec::new();
    let mut test_cases = Vec::new();
    let mut skipped = 0usize;
    let mut rank_rows = String::from("entity,new_class,rank\n");
    for (entity, class) in sample {
        let scores = match &model {
            LoadedModel::Embedding(m) => {
                score_candidates_embedding(m, entity, class_pointer, &candidates)
            }
            LoadedModel::Typer(m) => {
                let (ranked, _skipped) = m.rank_types(entity, &candidates);
                if ranked.is_empty() {
                    None
                } else {
                    Some(ranked.into_iter().collect())
                }
            }
        };
        let Some(scores) = scores else {
            skipped += 1;
            continue;
        };
        let empty = BTreeSet::new();
        let known_for_entity = known.get(&entity).unwrap_or(&empty);
        match filtered_rank(&scores, class, known_for_entity) {
            Ok(rank) => {
                rank_rows.push_str(&format!("{entity},{class},{rank}\n"));
                outcomes.push(rank == 1);
                test_cases.push((entity, class));
                ranks.push(rank);
            }
            Err(_) => skipped += 1,
        }
    }
    if skipped > 0 {
        eprintln!("warning: {skipped} test cases had no scorable candidates and were skipped");
    }

    let report = ranking_report(&ranks).map_err(|e| e.to_string())?;
    println!(
        "evaluated {} cases: MR {:.2}, MRR {:.4}, hits@1 {:.4}, hits@5 {:.4}, hits@10 {:.4}",
        report.n, report.mr, report.mrr, report.hits_at[&1], report.hits_at[&5], report.hits_at[&10]
    );

    let stem = model_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".to_owned());
    // Generic stems take their training directory's name instead.
    let name = if stem == "model" || stem == "typer" {
        model_path
            .parent()
            .and_then(|p| p.file_name())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or(stem)
    } else {
        stem
    };
    let artifacts =
        EvaluationArtifacts { name, report, outcomes, test_cases, skipped_cases: skipped };
    let artifacts_path = out_dir.join("evaluation.json");
    write_text(
        &artifacts_path,
        &serde_json::to_string_pretty(&artifacts).map_err(|e| e.to_string())?,
    )?;
    write_text(&out_dir.join("ranks.csv"), &rank_rows)?;

    let mut manifest = RunManifest::new(None);
    manifest.add_output(&artifacts_path);
    manifest.write(out_dir, started)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

pub fn compare(
    eval_dirs: &[PathBuf],
    alpha: Option<f64>,
    continuity_correction: bool,
    out: &Path,
    file_config: &FileConfig,
) -> CommandResult {
    let started = Instant::now();
    let alpha = file_config.resolve(alpha, "alpha", 0.01)?;
    let mut models = Vec::new();
    for dir in eval_dirs {
        let path = dir.join("evaluation.json");
        let artifacts: EvaluationArtifacts =
            serde_json::from_str(&read_text(&path)?).map_err(|e| format!("{}: {e}", path.display()))?;
        models.push(ModelEvaluation {
            name: artifacts.name,
            report: artifacts.report,
            outcomes: artifacts.outcomes,
        });
    }
    let report = compare_models(models, alpha, continuity_correction).map_err(|e| e.to_string())?;
    print!("{}", report.to_text());
    write_text(out, &report.to_csv())?;
    let text_path = out.with_extension("txt");
    write_text(&text_path, &report.to_text())?;

    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        let mut manifest = RunManifest::new(None);
        manifest.add_output(out);
        manifest.add_output(&text_path);
        manifest.write(parent, started)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// make-fixture
// ---------------------------------------------------------------------------

pub fn make_fixture(
    out_dir: &Path,
    seed: Option<u64>,
    entities: Option<usize>,
    file_config: &FileConfig,
) -> CommandResult {
    let started = Instant::now();
    ensure_dir(out_dir)?;
    let config = FixtureConfig {
        seed: file_config.resolve(seed, "seed", 42)?,
        instance_count: file_config.resolve(entities, "entities", 48)?,
        ..Default::default()
    };
    let corpus = generate(&config);
    let xml_path = out_dir.join("corpus.xml");
    let jsonl_path = out_dir.join("corpus.jsonl");
    write_text(&xml_path, &corpus.to_xml())?;
    write_text(&jsonl_path, &corpus.to_jsonl())?;
    println!(
        "wrote fixture corpus: {} pages, {} revisions",
        corpus.pages.len(),
        corpus.revision_count()
    );

    let mut manifest = RunManifest::new(Some(config.seed));
    manifest.add_output(&xml_path);
    manifest.add_output(&jsonl_path);
    manifest.write(out_dir, started)?;
    Ok(())
}
