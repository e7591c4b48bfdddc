use std::collections::BTreeMap;
use std::fmt::Write as _;

use rlie_core::corpus::{
    generate_synthetic_corpus, parse_corpus, shootings_schema, write_corpus, Corpus,
    SyntheticConfig,
};
use rlie_core::dqn::Checkpoint;
use rlie_core::eval::EvalReport;
use rlie_core::extractor::{train_maxent, MaxentModel};
use rlie_core::mdp::ContextVocabulary;
use rlie_core::pipeline::{
    evaluate_policy, fit_vectorizer, prepare_retrieval, run_baselines, run_meta, split,
    train_variant, Prepared,
};
use rlie_core::retrieval::{read_pools, write_pools, QueryTemplate};
use rlie_core::text::Lexicons;

use crate::artifacts::*;
use crate::config::{sha256_hex, RunConfig, Stage};
use crate::error::CliError;

type Digests = BTreeMap<String, String>;

fn json_error(name: &str) -> impl Fn(serde_json::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{name}: {e}"))
}

fn lexicons(config: &RunConfig) -> Result<Lexicons, CliError> {
    let l = &config.lexicons;
    Ok(Lexicons::load(
        l.male_names.as_deref(),
        l.female_names.as_deref(),
        l.cities.as_deref(),
    )?)
}

/// The configured corpus file, or the synthetic one from `gen-data`.
fn load_corpus(config: &RunConfig, out: &OutDir, inputs: &mut Digests) -> Result<Corpus, CliError> {
    let schema = config.schema()?;
    let bytes = match &config.data.corpus {
        Some(path) => {
            let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
            inputs.insert(path.display().to_string(), sha256_hex(&bytes));
            bytes
        }
        None => {
            let input = out.require(config, Stage::GenData, CORPUS)?;
            inputs.insert(CORPUS.into(), input.sha256);
            input.bytes
        }
    };
    Ok(parse_corpus(bytes.as_slice(), &schema)?)
}

fn split_events(config: &RunConfig, corpus: &Corpus) -> Result<(Vec<usize>, Vec<usize>), CliError> {
    split(corpus, config.data.n_train, config.data.n_test)
        .map_err(|e| CliError::Usage(e.to_string()))
}

pub fn gen_data(config: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    if !config.corpus_is_synthetic() {
        return Err(CliError::Usage(
            "data.corpus is set; gen-data only produces the synthetic corpus".into(),
        ));
    }
    if config.schema()? != shootings_schema() {
        return Err(CliError::Usage(
            "the synthetic generator only supports the default shootings schema".into(),
        ));
    }
    let seed = config.sub_seed("gen-data");
    let corpus = generate_synthetic_corpus(&SyntheticConfig {
        seed,
        n_events: config.data.n_events,
        distractor_ratio: config.data.distractor_ratio,
        noise: config.data.noise,
    })?;
    let mut bytes = Vec::new();
    write_corpus(&corpus, &mut bytes).expect("writing to memory");
    let outputs = BTreeMap::from([(CORPUS.to_string(), out.write(CORPUS, &bytes)?)]);
    out.write_manifest(Stage::GenData, config, seed, Digests::new(), outputs)?;
    Ok(format!(
        "wrote {} documents for {} events to {}",
        corpus.documents.len(),
        corpus.events.len(),
        out.path(CORPUS).display()
    ))
}

pub fn train_extractor(config: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let mut inputs = Digests::new();
    let corpus = load_corpus(config, out, &mut inputs)?;
    let (train, _) = split_events(config, &corpus)?;
    let maxent = config.maxent();
    let model = train_maxent(
        train
            .iter()
            .map(|&i| (&corpus.events[i].source, &corpus.events[i].gold)),
        &corpus.schema,
        &lexicons(config)?,
        &maxent,
    )?;
    let outputs = BTreeMap::from([(
        EXTRACTOR.to_string(),
        out.write(EXTRACTOR, model.to_json()?.as_bytes())?,
    )]);
    out.write_manifest(Stage::TrainExtractor, config, maxent.seed, inputs, outputs)?;
    Ok(format!(
        "trained extractor on {} source documents",
        train.len()
    ))
}

pub fn build_pools(config: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let mut inputs = Digests::new();
    let corpus = load_corpus(config, out, &mut inputs)?;
    let (train, _) = split_events(config, &corpus)?;
    let r = prepare_retrieval(&corpus, &train, &config.retrieval);
    let docs = corpus
        .documents
        .iter()
        .map(|d| (d.id.as_str(), d))
        .collect();
    let mut pools = Vec::new();
    write_pools(&r.pools, &docs, &mut pools)?;
    let templates = serde_json::to_string_pretty(&r.templates).expect("templates serialize");
    let vocabulary = serde_json::to_string(&r.vocabulary).expect("vocabulary serializes");
    let outputs = BTreeMap::from([
        (POOLS.to_string(), out.write(POOLS, &pools)?),
        (
            TEMPLATES.to_string(),
            out.write(TEMPLATES, templates.as_bytes())?,
        ),
        (
            VOCABULARY.to_string(),
            out.write(VOCABULARY, vocabulary.as_bytes())?,
        ),
    ]);
    out.write_manifest(Stage::BuildPools, config, 0, inputs, outputs)?;
    let mut msg = format!(
        "pooled {} events over {} queries of depth {}:",
        r.pools.n_events(),
        r.templates.len(),
        r.pools.k
    );
    for t in &r.templates {
        let _ = write!(msg, "\n  {}", t.describe());
    }
    Ok(msg)
}

/// Reassembles the frozen pipeline state from the extractor and pool
/// artifacts.
fn load_prepared(
    config: &RunConfig,
    out: &OutDir,
    inputs: &mut Digests,
) -> Result<Prepared, CliError> {
    let corpus = load_corpus(config, out, inputs)?;
    let (train, test) = split_events(config, &corpus)?;
    let mut read = |stage, name: &str| -> Result<Input, CliError> {
        let input = out.require(config, stage, name)?;
        inputs.insert(name.to_string(), input.sha256.clone());
        Ok(input)
    };
    let extractor = read(Stage::TrainExtractor, EXTRACTOR)?;
    let model = MaxentModel::from_json(extractor.text(EXTRACTOR)?)?;
    if model.schema() != &corpus.schema {
        return Err(CliError::Data(format!(
            "{EXTRACTOR} was trained for a different schema"
        )));
    }
    let templates: Vec<QueryTemplate> =
        serde_json::from_slice(&read(Stage::BuildPools, TEMPLATES)?.bytes)
            .map_err(json_error(TEMPLATES))?;
    let mut vocabulary: ContextVocabulary =
        serde_json::from_slice(&read(Stage::BuildPools, VOCABULARY)?.bytes)
            .map_err(json_error(VOCABULARY))?;
    vocabulary.reindex();
    let event_ids: Vec<String> = corpus.events.iter().map(|e| e.event_id.clone()).collect();
    let pools = read_pools(
        read(Stage::BuildPools, POOLS)?.bytes.as_slice(),
        &event_ids,
        templates.len(),
        config.retrieval.k,
    )?;
    let vectorizer = fit_vectorizer(&corpus);
    Ok(Prepared {
        corpus,
        train,
        test,
        model,
        vectorizer,
        templates,
        pools,
        vocabulary,
    })
}

pub fn train_agent(config: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let mut inputs = Digests::new();
    let p = load_prepared(config, out, &mut inputs)?;
    let cache = p.feature_cache(config.env.context_mode);
    let train = p.train_events();
    let seed = config.sub_seed("agent");
    let variant = config.agent.variant;
    // The best epoch is chosen on training events; test events stay unseen.
    let run = train_variant(
        &p,
        &cache,
        variant,
        &config.env,
        &config.train,
        seed,
        &train,
        &train,
        &train,
    )?;
    let checkpoint = Checkpoint::new(&run.network, run.allowed.clone());
    let mut metrics = String::new();
    for m in &run.outcome.metrics {
        metrics.push_str(&serde_json::to_string(m).expect("metrics serialize"));
        metrics.push('\n');
    }
    let outputs = BTreeMap::from([
        (
            CHECKPOINT.to_string(),
            out.write(CHECKPOINT, checkpoint.to_json().as_bytes())?,
        ),
        (METRICS.to_string(), out.write(METRICS, metrics.as_bytes())?),
    ]);
    out.write_manifest(Stage::TrainAgent, config, seed, inputs, outputs)?;
    let best = run
        .outcome
        .best
        .as_ref()
        .map_or("last".to_string(), |(e, _)| e.to_string());
    Ok(format!(
        "trained {} for {} transitions; kept epoch {best}\n{}",
        variant.name(),
        run.outcome.transitions,
        run.report.table()
    ))
}

pub fn evaluate(config: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let mut inputs = Digests::new();
    let p = load_prepared(config, out, &mut inputs)?;
    let input = out.require(config, Stage::TrainAgent, CHECKPOINT)?;
    inputs.insert(CHECKPOINT.into(), input.sha256.clone());
    let checkpoint = Checkpoint::from_json(input.text(CHECKPOINT)?)?;
    let net = checkpoint.network()?;
    let variant = config.agent.variant;
    let (env, _) = variant.apply(&config.env, p.corpus.schema.len());
    let cache = p.feature_cache(env.context_mode);
    let dim = 4 * p.corpus.schema.len() + cache.context_dim() + 1;
    if net.architecture().input != dim {
        return Err(CliError::Data(format!(
            "{CHECKPOINT} expects states of size {}, the pipeline produces {dim}",
            net.architecture().input
        )));
    }
    let test = p.test_events();
    let (report, episodes) = evaluate_policy(
        variant.name(),
        &p,
        &cache,
        &test,
        &net,
        &env,
        checkpoint.allowed_decisions.as_deref(),
    );
    let mut traces = String::new();
    for e in &episodes {
        let line = serde_json::json!({
            "event_id": e.event_id,
            "steps": e.steps,
            "initial": e.initial,
            "values": e.values,
            "rewards": e.rewards,
            "trace": e.trace,
        });
        traces.push_str(&line.to_string());
        traces.push('\n');
    }
    let table = report.table();
    let outputs = BTreeMap::from([
        (
            REPORT.to_string(),
            out.write(REPORT, format!("{}\n", report.json_line()).as_bytes())?,
        ),
        (
            REPORT_TABLE.to_string(),
            out.write(REPORT_TABLE, format!("{table}\n").as_bytes())?,
        ),
        (TRACES.to_string(), out.write(TRACES, traces.as_bytes())?),
    ]);
    out.write_manifest(Stage::Evaluate, config, 0, inputs, outputs)?;
    Ok(table)
}

pub fn baselines(config: &RunConfig, out: &OutDir) -> Result<String, CliError> {
    let mut inputs = Digests::new();
    let p = load_prepared(config, out, &mut inputs)?;
    let cache = p.feature_cache(config.env.context_mode);
    let (train, test) = (p.train_events(), p.test_events());
    let b = run_baselines(&p, &cache, &test, &config.eval.taus);
    let sgd = config.meta_sgd();
    let (meta_model, meta) = run_meta(&p, &cache, &train, &test, &sgd)?;
    let mut all: Vec<&EvalReport> = vec![&b.maxent];
    all.extend(b.confidence.iter().map(|(_, r)| r));
    all.extend(b.majority.iter().map(|(_, r)| r));
    all.push(&meta);
    all.push(&b.oracle);
    let jsonl: String = all.iter().map(|r| format!("{}\n", r.json_line())).collect();
    let mut table = b.maxent.table_header();
    for r in [
        &b.maxent,
        &b.best_confidence().1,
        &b.best_majority().1,
        &meta,
        &b.oracle,
    ] {
        table.push('\n');
        table.push_str(&r.table_row());
    }
    table.push('\n');
    let meta_json = serde_json::to_string(&meta_model).expect("meta-classifier serializes");
    let outputs = BTreeMap::from([
        (
            BASELINES.to_string(),
            out.write(BASELINES, jsonl.as_bytes())?,
        ),
        (
            BASELINES_TABLE.to_string(),
            out.write(BASELINES_TABLE, table.as_bytes())?,
        ),
        (META.to_string(), out.write(META, meta_json.as_bytes())?),
    ]);
    out.write_manifest(Stage::Baselines, config, sgd.seed, inputs, outputs)?;
    Ok(table.trim_end().to_string())
}
