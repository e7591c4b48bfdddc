//! End-to-end experiment plumbing shared by the command-line tool and the
//! integration tests: train/test split, base extractor, pools, feature
//! caches, baselines and agent training.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, EventRecord};
use crate::dqn::{greedy_action, train_agent, QNetwork, TrainConfig, TrainOutcome};
use crate::error::{Error, Result};
use crate::eval::{
    aggregate_confidence, aggregate_majority, evaluate, oracle_values, ArticleExtraction,
    EvalReport, MetaClassifier,
};
use crate::extractor::{train_maxent, EntityValues, MaxentConfig, MaxentModel, SgdConfig};
use crate::mdp::{
    run_episode, Action, ContextMode, ContextVocabulary, Decision, EnvConfig, EpisodeResult,
    FeatureCache, IeEnvironment, QueryPolicy, Scheme,
};
use crate::retrieval::{
    build_pools, induce_templates, DateFilter, EpisodePool, QueryTemplate, SearchEngine,
};
use crate::text::{Lexicons, StopWords, TfIdfVectorizer};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetrievalConfig {
    pub k: usize,
    pub window: usize,
    pub words_per_entity: usize,
    pub date_filter: DateFilter,
    pub context_vocabulary: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            k: crate::retrieval::DEFAULT_K,
            window: 4,
            words_per_entity: 5,
            date_filter: DateFilter::OlderOnly,
            context_vocabulary: 500,
        }
    }
}

/// Which parts of the action space the agent controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Reconciliation decisions only; queues are read round-robin.
    Basic,
    /// Query choice plus accept-all/stop under confidence reconciliation.
    Query,
    /// Full decision and query control.
    Extract,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Basic => "RL-Basic",
            Variant::Query => "RL-Query",
            Variant::Extract => "RL-Extract",
        }
    }

    /// Environment settings and the allowed decision set for this variant.
    pub fn apply(self, env: &EnvConfig, n_entities: usize) -> (EnvConfig, Option<Vec<usize>>) {
        let mut env = env.clone();
        match self {
            Variant::Basic => {
                env.query_policy = QueryPolicy::RoundRobin;
                (env, None)
            }
            Variant::Query => {
                env.scheme = Scheme::Confidence;
                env.query_policy = QueryPolicy::Agent;
                let allowed = vec![
                    Decision::AcceptAll.index(n_entities),
                    Decision::Stop.index(n_entities),
                ];
                (env, Some(allowed))
            }
            Variant::Extract => {
                env.query_policy = QueryPolicy::Agent;
                (env, None)
            }
        }
    }
}

/// Everything frozen before agents are trained.
#[derive(Debug)]
pub struct Prepared {
    pub corpus: Corpus,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    pub model: MaxentModel,
    pub vectorizer: TfIdfVectorizer,
    pub templates: Vec<QueryTemplate>,
    pub pools: EpisodePool,
    pub vocabulary: ContextVocabulary,
}

impl Prepared {
    pub fn train_events(&self) -> Vec<&EventRecord> {
        self.train.iter().map(|&i| &self.corpus.events[i]).collect()
    }

    pub fn test_events(&self) -> Vec<&EventRecord> {
        self.test.iter().map(|&i| &self.corpus.events[i]).collect()
    }

    /// Sources plus every pooled document.
    pub fn episode_documents(&self) -> Vec<&Document> {
        let by_id: BTreeMap<&str, &Document> = self
            .corpus
            .documents
            .iter()
            .map(|d| (d.id.as_str(), d))
            .collect();
        let mut ids: Vec<&str> = self
            .corpus
            .events
            .iter()
            .map(|e| e.source.id.as_str())
            .collect();
        for e in &self.corpus.events {
            ids.extend(self.pools.distinct_ids(&e.event_id));
        }
        ids.sort_unstable();
        ids.dedup();
        ids.into_iter().map(|id| by_id[id]).collect()
    }

    pub fn feature_cache(&self, mode: ContextMode) -> FeatureCache {
        FeatureCache::build(
            &self.model,
            &self.vocabulary,
            &self.vectorizer,
            mode,
            self.episode_documents(),
        )
    }
}

/// First `n_train` events train, the next `n_test` evaluate.
pub fn split(corpus: &Corpus, n_train: usize, n_test: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    if n_train == 0 || n_train + n_test > corpus.events.len() {
        return Err(Error::Config(format!(
            "split {n_train}/{n_test} does not fit {} events",
            corpus.events.len()
        )));
    }
    Ok((
        (0..n_train).collect(),
        (n_train..n_train + n_test).collect(),
    ))
}

pub fn fit_vectorizer(corpus: &Corpus) -> TfIdfVectorizer {
    TfIdfVectorizer::fit(corpus.documents.iter().map(|d| d.token_iter()))
}

/// Retrieval-side state: everything `prepare` builds apart from the
/// extractor.
#[derive(Debug)]
pub struct RetrievalState {
    pub vectorizer: TfIdfVectorizer,
    pub templates: Vec<QueryTemplate>,
    pub pools: EpisodePool,
    pub vocabulary: ContextVocabulary,
}

/// Induces templates and the context vocabulary from training events and
/// builds pools for every event.
pub fn prepare_retrieval(
    corpus: &Corpus,
    train: &[usize],
    retrieval: &RetrievalConfig,
) -> RetrievalState {
    let train_events: Vec<&EventRecord> = train.iter().map(|&i| &corpus.events[i]).collect();
    let vectorizer = fit_vectorizer(corpus);
    let templates = induce_templates(
        &train_events,
        &corpus.schema,
        retrieval.window,
        retrieval.words_per_entity,
        &StopWords::bundled(),
    );
    let vocabulary = ContextVocabulary::from_training(
        &train_events,
        &corpus.schema,
        retrieval.window,
        retrieval.context_vocabulary,
    );
    let pools = {
        let engine = SearchEngine::new(&corpus.documents, &vectorizer, retrieval.date_filter);
        build_pools(&engine, &corpus.events, &templates, retrieval.k)
    };
    RetrievalState {
        vectorizer,
        templates,
        pools,
        vocabulary,
    }
}

/// Trains the base extractor on training sources, induces templates, builds
/// pools for every event and the context vocabulary.
pub fn prepare(
    corpus: Corpus,
    train: Vec<usize>,
    test: Vec<usize>,
    lexicons: &Lexicons,
    maxent: &MaxentConfig,
    retrieval: &RetrievalConfig,
) -> Result<Prepared> {
    let model = train_maxent(
        train
            .iter()
            .map(|&i| (&corpus.events[i].source, &corpus.events[i].gold)),
        &corpus.schema,
        lexicons,
        maxent,
    )?;
    let r = prepare_retrieval(&corpus, &train, retrieval);
    Ok(Prepared {
        corpus,
        train,
        test,
        model,
        vectorizer: r.vectorizer,
        templates: r.templates,
        pools: r.pools,
        vocabulary: r.vocabulary,
    })
}

fn articles(
    event: &EventRecord,
    pools: &EpisodePool,
    cache: &FeatureCache,
) -> Vec<ArticleExtraction> {
    pools
        .distinct_ids(&event.event_id)
        .into_iter()
        .map(|id| ArticleExtraction {
            values: cache.get(id).values.clone(),
            similarity: cache.similarity(&event.source.id, id),
        })
        .collect()
}

fn report_over(
    name: &str,
    prepared: &Prepared,
    events: &[&EventRecord],
    f: impl Fn(&EventRecord) -> EntityValues + Sync,
) -> EvalReport {
    let preds: BTreeMap<String, EntityValues> = events
        .par_iter()
        .map(|e| (e.event_id.clone(), f(e)))
        .collect();
    evaluate(name, &prepared.corpus.schema, events, &preds)
}

/// Base extractor, aggregation baselines at every threshold, and the oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReports {
    pub maxent: EvalReport,
    pub confidence: Vec<(f64, EvalReport)>,
    pub majority: Vec<(f64, EvalReport)>,
    pub oracle: EvalReport,
}

impl BaselineReports {
    fn best(list: &[(f64, EvalReport)]) -> &(f64, EvalReport) {
        // Earliest threshold wins ties.
        list.iter()
            .fold(None::<&(f64, EvalReport)>, |best, x| match best {
                Some(b) if b.1.macro_accuracy >= x.1.macro_accuracy => Some(b),
                _ => Some(x),
            })
            .expect("non-empty threshold grid")
    }

    pub fn best_confidence(&self) -> &(f64, EvalReport) {
        Self::best(&self.confidence)
    }

    pub fn best_majority(&self) -> &(f64, EvalReport) {
        Self::best(&self.majority)
    }
}

pub fn run_baselines(
    prepared: &Prepared,
    cache: &FeatureCache,
    events: &[&EventRecord],
    taus: &[f64],
) -> BaselineReports {
    assert!(!taus.is_empty(), "empty threshold grid");
    let pools = &prepared.pools;
    let schema = &prepared.corpus.schema;
    let source = |e: &EventRecord| cache.get(&e.source.id).values.clone();
    let maxent = report_over("Maxent", prepared, events, source);
    let sweep = |majority: bool| {
        taus.iter()
            .map(|&tau| {
                let name = format!(
                    "{} (tau={tau})",
                    if majority { "Majority" } else { "Confidence" }
                );
                let r = report_over(&name, prepared, events, |e| {
                    let arts = articles(e, pools, cache);
                    if majority {
                        aggregate_majority(&source(e), &arts, tau)
                    } else {
                        aggregate_confidence(&source(e), &arts, tau)
                    }
                });
                (tau, r)
            })
            .collect::<Vec<_>>()
    };
    let confidence = sweep(false);
    let majority = sweep(true);
    let oracle = report_over("Oracle", prepared, events, |e| {
        oracle_values(schema, &source(e), &articles(e, pools, cache), &e.gold)
    });
    BaselineReports {
        maxent,
        confidence,
        majority,
        oracle,
    }
}

pub fn run_meta(
    prepared: &Prepared,
    cache: &FeatureCache,
    train: &[&EventRecord],
    test: &[&EventRecord],
    config: &SgdConfig,
) -> Result<(MetaClassifier, EvalReport)> {
    let schema = &prepared.corpus.schema;
    let mc = MetaClassifier::train(schema, train, &prepared.pools, cache, config)?;
    let report = report_over("Meta-classifier", prepared, test, |e| {
        mc.run(schema, e, &prepared.pools, cache)
    });
    Ok((mc, report))
}

/// Runs the frozen greedy policy once per event, in parallel.
pub fn evaluate_policy(
    name: &str,
    prepared: &Prepared,
    cache: &FeatureCache,
    events: &[&EventRecord],
    net: &QNetwork,
    env_config: &EnvConfig,
    allowed: Option<&[usize]>,
) -> (EvalReport, Vec<EpisodeResult>) {
    let schema = &prepared.corpus.schema;
    let n = schema.len();
    let results: Vec<EpisodeResult> = events
        .par_iter()
        .map(|e| {
            let mut env =
                IeEnvironment::new(schema, vec![*e], &prepared.pools, cache, env_config.clone());
            run_episode(&mut env, 0, |s| {
                let (d, q) = greedy_action(net, s, allowed).expect("state matches network");
                Action {
                    decision: Decision::from_index(d, n),
                    query: q,
                }
            })
        })
        .collect();
    let preds: BTreeMap<String, EntityValues> = results
        .iter()
        .map(|r| (r.event_id.clone(), r.values.clone()))
        .collect();
    let steps = results.iter().map(|r| r.steps as f64).sum::<f64>() / results.len().max(1) as f64;
    (
        evaluate(name, schema, events, &preds).with_steps(steps),
        results,
    )
}

#[derive(Debug, Clone)]
pub struct AgentRun {
    pub variant: Variant,
    pub env: EnvConfig,
    pub allowed: Option<Vec<usize>>,
    pub outcome: TrainOutcome,
    /// The network kept for testing: the epoch scoring best on the
    /// selection events, or the last one.
    pub network: QNetwork,
    pub report: EvalReport,
}

/// Trains one agent variant on `train` events, keeps the epoch that scores
/// best on `select` events, and evaluates it on `test`.
#[allow(clippy::too_many_arguments)]
pub fn train_variant(
    prepared: &Prepared,
    cache: &FeatureCache,
    variant: Variant,
    env: &EnvConfig,
    config: &TrainConfig,
    seed: u64,
    train: &[&EventRecord],
    select: &[&EventRecord],
    test: &[&EventRecord],
) -> Result<AgentRun> {
    let schema = &prepared.corpus.schema;
    let (env_config, allowed) = variant.apply(env, schema.len());
    env_config.validate()?;
    let config = TrainConfig {
        allowed_decisions: allowed.clone(),
        ..config.clone()
    };
    let mut train_env = IeEnvironment::new(
        schema,
        train.to_vec(),
        &prepared.pools,
        cache,
        env_config.clone(),
    );
    let outcome = train_agent(&mut train_env, &config, seed, |_, net| {
        (!select.is_empty()).then(|| {
            evaluate_policy(
                "select",
                prepared,
                cache,
                select,
                net,
                &env_config,
                allowed.as_deref(),
            )
            .0
        })
    })?;
    let network = outcome
        .best
        .as_ref()
        .map_or_else(|| outcome.network.clone(), |(_, n)| n.clone());
    let (report, _) = evaluate_policy(
        variant.name(),
        prepared,
        cache,
        test,
        &network,
        &env_config,
        allowed.as_deref(),
    );
    Ok(AgentRun {
        variant,
        env: env_config,
        allowed,
        outcome,
        network,
        report,
    })
}
