//! The extraction MDP: state vectors, the joint (decision, query) action
//! space, value reconciliation, rewards and the episode driver.

mod chain;
mod env;
mod reconcile;
mod state;

pub use chain::ChainMdp;
pub use env::{run_episode, DocFeatures, EpisodeResult, FeatureCache, IeEnvironment, TraceRecord};
pub use reconcile::{reconcile, step_reward, Tallies};
pub use state::{
    assemble_state, build_state, context_vector, match_flags, ContextVocabulary, StateLayout,
};

use serde::{Deserialize, Serialize};

/// What to do with the values extracted from the article under review.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    AcceptEntity(usize),
    AcceptAll,
    RejectAll,
    Stop,
}

impl Decision {
    /// Size of the decision space for `n_entities` entities.
    pub fn count(n_entities: usize) -> usize {
        n_entities + 3
    }

    pub fn from_index(i: usize, n_entities: usize) -> Self {
        match i {
            i if i < n_entities => Decision::AcceptEntity(i),
            i if i == n_entities => Decision::AcceptAll,
            i if i == n_entities + 1 => Decision::RejectAll,
            i if i == n_entities + 2 => Decision::Stop,
            _ => panic!("decision index {i} out of range for {n_entities} entities"),
        }
    }

    pub fn index(self, n_entities: usize) -> usize {
        match self {
            Decision::AcceptEntity(j) => {
                assert!(j < n_entities, "entity {j} out of range");
                j
            }
            Decision::AcceptAll => n_entities,
            Decision::RejectAll => n_entities + 1,
            Decision::Stop => n_entities + 2,
        }
    }

    /// Entities whose new values this decision accepts.
    pub fn accepts(self, j: usize) -> bool {
        match self {
            Decision::AcceptEntity(k) => k == j,
            Decision::AcceptAll => true,
            Decision::RejectAll | Decision::Stop => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub decision: Decision,
    pub query: usize,
}

/// How accepted values merge into the current ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Replace,
    Confidence,
    Majority,
}

/// Summary of the words surrounding extracted values in the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextMode {
    None,
    Unigram,
    #[default]
    TfIdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Accuracy change paid after every decision.
    #[default]
    Step,
    /// Accuracy change withheld until the episode ends.
    Episode,
}

/// Who picks the next query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryPolicy {
    #[default]
    Agent,
    /// The agent's query choice is ignored and queues are read in turn.
    RoundRobin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub scheme: Scheme,
    pub context_mode: ContextMode,
    pub reward_mode: RewardMode,
    pub query_policy: QueryPolicy,
    pub penalty: f64,
    pub max_steps: usize,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::Replace,
            context_mode: ContextMode::TfIdf,
            reward_mode: RewardMode::Step,
            query_policy: QueryPolicy::Agent,
            penalty: -0.001,
            max_steps: 20,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !self.penalty.is_finite() {
            return Err(crate::Error::Config("penalty must be finite".into()));
        }
        if self.max_steps == 0 {
            return Err(crate::Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of one environment transition.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// `None` when the episode has ended.
    pub next: Option<Vec<f64>>,
    pub reward: f64,
}

/// An episodic environment with a two-headed discrete action space, as
/// consumed by the Q-learning trainer.
pub trait Environment {
    fn state_dim(&self) -> usize;
    fn n_decisions(&self) -> usize;
    fn n_queries(&self) -> usize;
    fn n_episodes(&self) -> usize;
    /// Starts episode `index`; `None` when it is over before any decision.
    fn reset(&mut self, index: usize) -> Option<Vec<f64>>;
    /// Applies a (decision, query) index pair. Panics when no episode is
    /// running.
    fn step(&mut self, decision: usize, query: usize) -> StepResult;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decision_indexing_round_trips() {
        for n in 1..6 {
            assert_eq!(Decision::count(n), n + 3);
            for i in 0..Decision::count(n) {
                assert_eq!(Decision::from_index(i, n).index(n), i);
            }
        }
        assert_eq!(Decision::from_index(4, 4), Decision::AcceptAll);
        assert_eq!(Decision::from_index(6, 4), Decision::Stop);
    }

    #[test]
    #[should_panic]
    fn decision_index_out_of_range() {
        Decision::from_index(7, 4);
    }

    #[test]
    fn defaults() {
        let c = EnvConfig::default();
        assert_eq!(c.penalty, -0.001);
        assert_eq!(c.max_steps, 20);
        assert!(c.validate().is_ok());
    }
}
