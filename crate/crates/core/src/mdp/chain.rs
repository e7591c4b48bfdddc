use super::{Environment, StepResult};

/// Three-state deterministic chain used to check the learner against known
/// optimal values. Decision 0 moves left (staying put at the left end),
/// decision 1 moves right; moving right from the last state ends the episode
/// with reward 1. Every other transition pays 0. The query head has a single
/// dummy action. Episode `i` starts in state `i % 3`.
#[derive(Debug, Clone, Default)]
pub struct ChainMdp {
    position: Option<usize>,
}

impl ChainMdp {
    pub const N_STATES: usize = 3;

    pub fn new() -> Self {
        Self::default()
    }

    pub fn one_hot(state: usize) -> Vec<f64> {
        let mut v = vec![0.0; Self::N_STATES];
        v[state] = 1.0;
        v
    }

    /// Optimal action values by value iteration.
    pub fn optimal_q(gamma: f64) -> [[f64; 2]; 3] {
        let mut q = [[0.0f64; 2]; 3];
        for _ in 0..10_000 {
            let v: Vec<f64> = q.iter().map(|r| r[0].max(r[1])).collect();
            let mut next = [[0.0; 2]; 3];
            for s in 0usize..3 {
                let left = s.saturating_sub(1);
                next[s][0] = gamma * v[left];
                next[s][1] = if s == 2 { 1.0 } else { gamma * v[s + 1] };
            }
            if next == q {
                break;
            }
            q = next;
        }
        q
    }
}

impl Environment for ChainMdp {
    fn state_dim(&self) -> usize {
        Self::N_STATES
    }

    fn n_decisions(&self) -> usize {
        2
    }

    fn n_queries(&self) -> usize {
        1
    }

    fn n_episodes(&self) -> usize {
        Self::N_STATES
    }

    fn reset(&mut self, index: usize) -> Option<Vec<f64>> {
        let s = index % Self::N_STATES;
        self.position = Some(s);
        Some(Self::one_hot(s))
    }

    fn step(&mut self, decision: usize, _query: usize) -> StepResult {
        let s = self.position.expect("step on a finished episode");
        match decision {
            0 => {
                let next = s.saturating_sub(1);
                self.position = Some(next);
                StepResult {
                    next: Some(Self::one_hot(next)),
                    reward: 0.0,
                }
            }
            1 if s == Self::N_STATES - 1 => {
                self.position = None;
                StepResult {
                    next: None,
                    reward: 1.0,
                }
            }
            1 => {
                self.position = Some(s + 1);
                StepResult {
                    next: Some(Self::one_hot(s + 1)),
                    reward: 0.0,
                }
            }
            _ => panic!("chain decision {decision} out of range"),
        }
    }
}
