use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::reconcile::{reconcile, Tallies};
use super::state::{assemble_state, context_vector, match_flags, ContextVocabulary};
use super::{
    Action, ContextMode, Decision, EnvConfig, Environment, QueryPolicy, RewardMode, StepResult,
};
use crate::corpus::{Document, EntitySchema, EventRecord};
use crate::eval::accuracy_sum;
use crate::extractor::{EntityValues, MaxentModel};
use crate::retrieval::EpisodePool;
use crate::text::{cosine, SparseVector, TfIdfVectorizer};

/// Everything the environment needs from one document, computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct DocFeatures {
    pub values: EntityValues,
    pub context: Vec<f64>,
    pub vector: SparseVector,
}

/// Extraction, context and tf-idf vectors keyed by document id.
#[derive(Debug, Clone, Default)]
pub struct FeatureCache {
    by_id: HashMap<String, DocFeatures>,
    context_dim: usize,
}

impl FeatureCache {
    pub fn build<'d>(
        model: &MaxentModel,
        vocab: &ContextVocabulary,
        vectorizer: &TfIdfVectorizer,
        mode: ContextMode,
        docs: impl IntoIterator<Item = &'d Document>,
    ) -> Self {
        let docs: Vec<&Document> = docs.into_iter().collect();
        let by_id = docs
            .par_iter()
            .map(|d| {
                let tokens = d.tokens();
                let ex = model.extract_entities(d);
                let context = context_vector(&tokens, &ex.positions, vocab, mode, vectorizer);
                let features = DocFeatures {
                    values: ex.values,
                    context,
                    vector: vectorizer.vectorize(tokens.iter()),
                };
                (d.id.clone(), features)
            })
            .collect();
        Self {
            by_id,
            context_dim: vocab.len(),
        }
    }

    /// Cache from precomputed features; every context block must have
    /// `context_dim` entries.
    pub fn from_features(features: HashMap<String, DocFeatures>, context_dim: usize) -> Self {
        assert!(features.values().all(|f| f.context.len() == context_dim));
        Self {
            by_id: features,
            context_dim,
        }
    }

    pub fn get(&self, id: &str) -> &DocFeatures {
        self.by_id
            .get(id)
            .unwrap_or_else(|| panic!("document {id} missing from feature cache"))
    }

    pub fn context_dim(&self) -> usize {
        self.context_dim
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }

    pub fn similarity(&self, a: &str, b: &str) -> f64 {
        cosine(&self.get(a).vector, &self.get(b).vector)
    }
}

#[derive(Debug, Clone)]
struct EpisodeState {
    event: usize,
    cur: EntityValues,
    cursors: Vec<usize>,
    round_robin: usize,
    steps: usize,
    tallies: Tallies,
    article: String,
    withheld: f64,
}

/// The extraction MDP over a fixed set of events and their article pools.
#[derive(Debug, Clone)]
pub struct IeEnvironment<'a> {
    schema: &'a EntitySchema,
    events: Vec<&'a EventRecord>,
    pools: &'a EpisodePool,
    cache: &'a FeatureCache,
    config: EnvConfig,
    episode: Option<EpisodeState>,
    last_values: Option<EntityValues>,
    last_steps: usize,
}

impl<'a> IeEnvironment<'a> {
    pub fn new(
        schema: &'a EntitySchema,
        events: Vec<&'a EventRecord>,
        pools: &'a EpisodePool,
        cache: &'a FeatureCache,
        config: EnvConfig,
    ) -> Self {
        Self {
            schema,
            events,
            pools,
            cache,
            config,
            episode: None,
            last_values: None,
            last_steps: 0,
        }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn events(&self) -> &[&'a EventRecord] {
        &self.events
    }

    pub fn is_running(&self) -> bool {
        self.episode.is_some()
    }

    /// Current values of the running episode, or the final values of the
    /// last finished one.
    pub fn values(&self) -> Option<&EntityValues> {
        self.episode
            .as_ref()
            .map(|e| &e.cur)
            .or(self.last_values.as_ref())
    }

    /// Decisions taken in the running or last finished episode.
    pub fn steps(&self) -> usize {
        self.episode.as_ref().map_or(self.last_steps, |e| e.steps)
    }

    fn queues(&self, event: usize) -> &'a [Vec<String>] {
        let id = &self.events[event].event_id;
        self.pools
            .queues(id)
            .unwrap_or_else(|| panic!("no pool for event {id}"))
    }

    /// Pops from queue `q`, falling back to the following queues in turn.
    fn pop(&self, ep: &mut EpisodeState, q: usize) -> Option<String> {
        let queues = self.queues(ep.event);
        let m = queues.len();
        if m == 0 {
            return None;
        }
        let start = match self.config.query_policy {
            QueryPolicy::Agent => q % m,
            QueryPolicy::RoundRobin => ep.round_robin,
        };
        for offset in 0..m {
            let qq = (start + offset) % m;
            if ep.cursors[qq] < queues[qq].len() {
                let id = queues[qq][ep.cursors[qq]].clone();
                ep.cursors[qq] += 1;
                ep.round_robin = (qq + 1) % m;
                return Some(id);
            }
        }
        None
    }

    fn state(&self, ep: &EpisodeState) -> Vec<f64> {
        let n = self.schema.len();
        let new = self.cache.get(&ep.article);
        let source = &self.events[ep.event].source.id;
        let cur_conf: Vec<f64> = (0..n).map(|j| ep.cur.confidence(j)).collect();
        let new_conf: Vec<f64> = (0..n).map(|j| new.values.confidence(j)).collect();
        let matches = match_flags(self.schema, &ep.cur, &new.values);
        let similarity = self.cache.similarity(source, &ep.article);
        assemble_state(&cur_conf, &new_conf, &matches, &new.context, similarity)
    }

    fn finish(&mut self, ep: EpisodeState) {
        self.last_steps = ep.steps;
        self.last_values = Some(ep.cur);
    }

    fn accuracy(&self, event: usize, v: &EntityValues) -> f64 {
        accuracy_sum(self.schema, v, &self.events[event].gold)
    }

    pub fn act(&mut self, action: Action) -> StepResult {
        let mut ep = self.episode.take().expect("step on a finished episode");
        ep.steps += 1;
        let mut reward = self.config.penalty;
        let mut done = action.decision == Decision::Stop;
        if !done {
            let new = &self.cache.get(&ep.article).values;
            let prev_acc = self.accuracy(ep.event, &ep.cur);
            ep.cur = reconcile(
                &ep.cur,
                new,
                action.decision,
                self.config.scheme,
                &mut ep.tallies,
            );
            let delta = self.accuracy(ep.event, &ep.cur) - prev_acc;
            match self.config.reward_mode {
                RewardMode::Step => reward += delta,
                RewardMode::Episode => ep.withheld += delta,
            }
            if ep.steps >= self.config.max_steps {
                done = true;
            } else {
                match self.pop(&mut ep, action.query) {
                    Some(next) => ep.article = next,
                    None => done = true,
                }
            }
        }
        if done {
            reward += ep.withheld;
            self.finish(ep);
            StepResult { next: None, reward }
        } else {
            let next = self.state(&ep);
            self.episode = Some(ep);
            StepResult {
                next: Some(next),
                reward,
            }
        }
    }
}

impl Environment for IeEnvironment<'_> {
    fn state_dim(&self) -> usize {
        4 * self.schema.len() + self.cache.context_dim() + 1
    }

    fn n_decisions(&self) -> usize {
        Decision::count(self.schema.len())
    }

    fn n_queries(&self) -> usize {
        self.pools.n_templates
    }

    fn n_episodes(&self) -> usize {
        self.events.len()
    }

    fn reset(&mut self, index: usize) -> Option<Vec<f64>> {
        let event = &self.events[index];
        let cur = self.cache.get(&event.source.id).values.clone();
        let n_queues = self.queues(index).len();
        let mut ep = EpisodeState {
            event: index,
            tallies: Tallies::seeded(&cur),
            cur,
            cursors: vec![0; n_queues],
            round_robin: 0,
            steps: 0,
            article: String::new(),
            withheld: 0.0,
        };
        match self.pop(&mut ep, 0) {
            Some(first) => {
                ep.article = first;
                let s = self.state(&ep);
                self.episode = Some(ep);
                Some(s)
            }
            None => {
                self.finish(ep);
                None
            }
        }
    }

    fn step(&mut self, decision: usize, query: usize) -> StepResult {
        let action = Action {
            decision: Decision::from_index(decision, self.schema.len()),
            query,
        };
        self.act(action)
    }
}

/// One decision in an exported trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub state: Vec<f64>,
    pub decision: usize,
    pub query: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub event_id: String,
    pub initial: EntityValues,
    pub values: EntityValues,
    /// One reward per decision, the last paid on termination. An episode
    /// with nothing to read records a single zero.
    pub rewards: Vec<f64>,
    pub steps: usize,
    pub trace: Vec<TraceRecord>,
}

impl EpisodeResult {
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.trace {
            out.push_str(&serde_json::to_string(r).expect("trace serializes"));
            out.push('\n');
        }
        out
    }
}

/// Plays one episode with `policy` choosing each action.
pub fn run_episode(
    env: &mut IeEnvironment<'_>,
    index: usize,
    mut policy: impl FnMut(&[f64]) -> Action,
) -> EpisodeResult {
    let n = env.schema.len();
    let event_id = env.events[index].event_id.clone();
    let initial = env.cache.get(&env.events[index].source.id).values.clone();
    let mut rewards = Vec::new();
    let mut trace = Vec::new();
    let mut state = env.reset(index);
    if state.is_none() {
        rewards.push(0.0);
    }
    while let Some(s) = state {
        let action = policy(&s);
        let r = env.act(action);
        rewards.push(r.reward);
        trace.push(TraceRecord {
            state: s,
            decision: action.decision.index(n),
            query: action.query,
            reward: r.reward,
        });
        state = r.next;
    }
    EpisodeResult {
        event_id,
        initial,
        values: env.values().cloned().expect("episode finished"),
        rewards,
        steps: env.steps(),
        trace,
    }
}
