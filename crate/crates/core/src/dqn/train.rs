use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::network::{Architecture, QNetwork};
use super::replay::{ReplayMemory, Transition};
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::extractor::argmax;
use crate::mdp::Environment;

pub const CHECKPOINT_FORMAT_VERSION: u32 = 1;

/// How the two heads' squared TD errors combine into one loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadLoss {
    #[default]
    Sum,
    Mean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_anneal_transitions: u64,
    pub target_sync_steps: u64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub steps_per_epoch: usize,
    pub epochs: usize,
    pub hidden: usize,
    pub init_scale: f64,
    pub rms_rho: f64,
    pub rms_epsilon: f64,
    /// Updates start once the replay memory holds this many transitions.
    pub learn_start: usize,
    /// One exploration draw for both heads instead of one per head.
    pub shared_epsilon: bool,
    pub head_loss: HeadLoss,
    /// Decision indices the agent may choose; all when absent.
    pub allowed_decisions: Option<Vec<usize>>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            gamma: 0.8,
            learning_rate: 2.5e-5,
            eps_start: 1.0,
            eps_end: 0.1,
            eps_anneal_transitions: 500_000,
            target_sync_steps: 5_000,
            replay_capacity: 500_000,
            batch_size: 32,
            steps_per_epoch: 10_000,
            epochs: 10,
            hidden: 20,
            init_scale: 0.05,
            rms_rho: 0.95,
            rms_epsilon: 1e-6,
            learn_start: 32,
            shared_epsilon: false,
            head_loss: HeadLoss::Sum,
            allowed_decisions: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..=1.0).contains(&self.eps_end)
            || !(0.0..=1.0).contains(&self.eps_start)
            || self.eps_end > self.eps_start
        {
            return bad("need 0 <= eps_end <= eps_start <= 1");
        }
        if self.batch_size == 0
            || self.replay_capacity == 0
            || self.hidden == 0
            || self.target_sync_steps == 0
        {
            return bad(
                "batch_size, replay_capacity, hidden and target_sync_steps must be positive",
            );
        }
        if !(0.0..1.0).contains(&self.rms_rho) || self.rms_epsilon <= 0.0 {
            return bad("rms_rho must lie in [0, 1) and rms_epsilon be positive");
        }
        if let Some(a) = &self.allowed_decisions {
            if a.is_empty() {
                return bad("allowed_decisions must not be empty");
            }
        }
        Ok(())
    }
}

/// Exploration rate after `t` transitions: linear from `eps_start` to
/// `eps_end`, flat afterwards.
pub fn epsilon_at(t: u64, config: &TrainConfig) -> f64 {
    if config.eps_anneal_transitions == 0 || t >= config.eps_anneal_transitions {
        return config.eps_end;
    }
    let frac = t as f64 / config.eps_anneal_transitions as f64;
    config.eps_start + frac * (config.eps_end - config.eps_start)
}

fn masked_argmax(q: &[f64], allowed: Option<&[usize]>) -> usize {
    match allowed {
        None => argmax(q),
        Some(a) => {
            let mut best = a[0];
            for &i in a {
                if q[i] > q[best] || (q[i] == q[best] && i < best) {
                    best = i;
                }
            }
            best
        }
    }
}

fn masked_max(q: &[f64], allowed: Option<&[usize]>) -> f64 {
    q[masked_argmax(q, allowed)]
}

/// Greedy (decision, query); ties go to the lowest index.
pub fn greedy_action(
    net: &QNetwork,
    s: &[f64],
    allowed: Option<&[usize]>,
) -> Result<(usize, usize)> {
    let (q_d, q_q) = net.forward(s)?;
    Ok((masked_argmax(&q_d, allowed), argmax(&q_q)))
}

/// ε-greedy choice, drawn independently per head unless `shared`.
pub fn select_action(
    net: &QNetwork,
    s: &[f64],
    eps: f64,
    rng: &mut impl Rng,
    allowed: Option<&[usize]>,
    shared: bool,
) -> Result<(usize, usize)> {
    let (greedy_d, greedy_q) = greedy_action(net, s, allowed)?;
    let arch = net.architecture();
    let explore_d = rng.gen::<f64>() < eps;
    let explore_q = if shared {
        explore_d
    } else {
        rng.gen::<f64>() < eps
    };
    let d = if explore_d {
        match allowed {
            Some(a) => a[rng.gen_range(0..a.len())],
            None => rng.gen_range(0..arch.n_decisions),
        }
    } else {
        greedy_d
    };
    let q = if explore_q {
        rng.gen_range(0..arch.n_queries)
    } else {
        greedy_q
    };
    Ok((d, q))
}

/// Per-head targets `r` (terminal) or `r + γ·max Q_target(s')`.
pub fn td_targets(
    batch: &[&Transition],
    target: &QNetwork,
    gamma: f64,
    allowed: Option<&[usize]>,
) -> Result<Vec<(f64, f64)>> {
    batch
        .iter()
        .map(|t| match &t.next {
            None => Ok((t.reward, t.reward)),
            Some(next) => {
                let (q_d, q_q) = target.forward(next)?;
                Ok((
                    t.reward + gamma * masked_max(&q_d, allowed),
                    t.reward + gamma * masked_max(&q_q, None),
                ))
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    cache: Vec<f64>,
}

impl RmsProp {
    pub fn new(n_params: usize, learning_rate: f64, rho: f64, epsilon: f64) -> Self {
        Self {
            learning_rate,
            rho,
            epsilon,
            cache: vec![0.0; n_params],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        for ((p, c), &g) in params.iter_mut().zip(&mut self.cache).zip(grad) {
            *c = self.rho * *c + (1.0 - self.rho) * g * g;
            *p -= self.learning_rate * g / (c.sqrt() + self.epsilon);
        }
    }
}

/// Loss of `net` on a batch against fixed targets, and its gradient. Only
/// the taken action's output of each head receives gradient.
pub fn loss_and_gradient(
    net: &QNetwork,
    batch: &[&Transition],
    targets: &[(f64, f64)],
    head_loss: HeadLoss,
) -> Result<(f64, Vec<f64>)> {
    let arch = net.architecture();
    let scale = match head_loss {
        HeadLoss::Sum => 1.0,
        HeadLoss::Mean => 0.5,
    } / batch.len() as f64;
    let mut grad = vec![0.0; arch.n_params()];
    let mut loss = 0.0;
    let mut g_d = vec![0.0; arch.n_decisions];
    let mut g_q = vec![0.0; arch.n_queries];
    for (t, &(y_d, y_q)) in batch.iter().zip(targets) {
        let cache = net.forward_cached(&t.state)?;
        let r_d = cache.q_d[t.decision] - y_d;
        let r_q = cache.q_q[t.query] - y_q;
        loss += scale * (r_d * r_d + r_q * r_q);
        g_d.iter_mut().for_each(|g| *g = 0.0);
        g_q.iter_mut().for_each(|g| *g = 0.0);
        g_d[t.decision] = 2.0 * scale * r_d;
        g_q[t.query] = 2.0 * scale * r_q;
        net.accumulate_gradient(&t.state, &cache, &g_d, &g_q, &mut grad);
    }
    Ok((loss, grad))
}

/// One RMSprop update on a replay batch; returns the pre-update loss.
pub fn train_step(
    net: &mut QNetwork,
    target: &QNetwork,
    batch: &[&Transition],
    config: &TrainConfig,
    optimizer: &mut RmsProp,
) -> Result<f64> {
    assert!(!batch.is_empty(), "empty training batch");
    let allowed = config.allowed_decisions.as_deref();
    let targets = td_targets(batch, target, config.gamma, allowed)?;
    let (loss, grad) = loss_and_gradient(net, batch, &targets, config.head_loss)?;
    if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numerical(format!(
            "non-finite loss {loss} in training step"
        )));
    }
    optimizer.step(net.params_mut(), &grad);
    Ok(loss)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub steps: usize,
    pub episodes: usize,
    pub mean_episode_reward: f64,
    pub mean_loss: f64,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval: Option<EvalReport>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: QNetwork,
    /// Network after the epoch with the best evaluation macro accuracy
    /// (earliest on ties), when an evaluation hook reported one.
    pub best: Option<(usize, QNetwork)>,
    pub metrics: Vec<EpochMetrics>,
    pub transitions: u64,
}

/// Online network, target network, optimizer and replay memory stepping
/// together, one stored transition at a time.
#[derive(Debug, Clone)]
pub struct Learner {
    config: TrainConfig,
    net: QNetwork,
    target: QNetwork,
    optimizer: RmsProp,
    replay: ReplayMemory,
    rng: ChaCha8Rng,
    transitions: u64,
}

impl Learner {
    pub fn new(arch: Architecture, config: &TrainConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        if let Some(a) = &config.allowed_decisions {
            if a.iter().any(|&d| d >= arch.n_decisions) {
                return Err(Error::Config("allowed decision out of range".into()));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = QNetwork::random(arch, config.init_scale, &mut rng);
        Ok(Self {
            config: config.clone(),
            target: net.clone(),
            optimizer: RmsProp::new(
                arch.n_params(),
                config.learning_rate,
                config.rms_rho,
                config.rms_epsilon,
            ),
            replay: ReplayMemory::new(config.replay_capacity),
            net,
            rng,
            transitions: 0,
        })
    }

    pub fn online(&self) -> &QNetwork {
        &self.net
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    pub fn replay(&self) -> &ReplayMemory {
        &self.replay
    }

    pub fn transitions(&self) -> u64 {
        self.transitions
    }

    pub fn epsilon(&self) -> f64 {
        epsilon_at(self.transitions, &self.config)
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// ε-greedy action at the current exploration rate.
    pub fn act(&mut self, state: &[f64]) -> Result<(usize, usize)> {
        let eps = self.epsilon();
        select_action(
            &self.net,
            state,
            eps,
            &mut self.rng,
            self.config.allowed_decisions.as_deref(),
            self.config.shared_epsilon,
        )
    }

    /// Stores a transition, runs one update once the memory is warm, and
    /// copies the online network into the target every
    /// `target_sync_steps` transitions. Returns the update's loss.
    pub fn observe(&mut self, t: Transition) -> Result<Option<f64>> {
        if !t.reward.is_finite() {
            return Err(Error::Numerical(format!("non-finite reward {}", t.reward)));
        }
        self.replay.push(t);
        self.transitions += 1;
        let mut loss = None;
        if self.replay.len() >= self.config.learn_start.max(1) {
            let batch = self.replay.sample(self.config.batch_size, &mut self.rng);
            loss = Some(train_step(
                &mut self.net,
                &self.target,
                &batch,
                &self.config,
                &mut self.optimizer,
            )?);
        }
        if self
            .transitions
            .is_multiple_of(self.config.target_sync_steps)
        {
            self.target = self.net.clone();
        }
        Ok(loss)
    }
}

/// Q-learning over the environment's episodes. Episodes are visited in a
/// seeded random order, reshuffled after each pass; an epoch ends at the
/// first episode boundary after `steps_per_epoch` transitions. `evaluate`
/// runs after every epoch.
pub fn train_agent<E: Environment>(
    env: &mut E,
    config: &TrainConfig,
    seed: u64,
    mut evaluate: impl FnMut(usize, &QNetwork) -> Option<EvalReport>,
) -> Result<TrainOutcome> {
    let arch = Architecture {
        input: env.state_dim(),
        hidden: config.hidden,
        n_decisions: env.n_decisions(),
        n_queries: env.n_queries(),
    };
    let mut learner = Learner::new(arch, config, seed)?;
    if env.n_episodes() == 0 {
        return Err(Error::Validation("no training episodes".into()));
    }
    let mut order: Vec<usize> = (0..env.n_episodes()).collect();
    let mut cursor = order.len();
    let mut metrics = Vec::new();
    let mut best: Option<(usize, f64, QNetwork)> = None;

    for epoch in 0..config.epochs {
        let (mut steps, mut episodes, mut reward_sum) = (0usize, 0usize, 0.0);
        let (mut loss_sum, mut updates) = (0.0, 0usize);
        let mut empty_run = 0;
        while steps < config.steps_per_epoch {
            if cursor == order.len() {
                order.shuffle(learner.rng_mut());
                cursor = 0;
            }
            let index = order[cursor];
            cursor += 1;
            let Some(mut state) = env.reset(index) else {
                empty_run += 1;
                if empty_run >= order.len() {
                    return Err(Error::Validation("no episode offers any decision".into()));
                }
                continue;
            };
            empty_run = 0;
            episodes += 1;
            loop {
                let (d, q) = learner.act(&state)?;
                let result = env.step(d, q);
                reward_sum += result.reward;
                let loss = learner.observe(Transition {
                    state,
                    decision: d,
                    query: q,
                    reward: result.reward,
                    next: result.next.clone(),
                })?;
                if let Some(l) = loss {
                    loss_sum += l;
                    updates += 1;
                }
                steps += 1;
                match result.next {
                    Some(next) => state = next,
                    None => break,
                }
            }
        }
        let eval = evaluate(epoch, learner.online());
        if let Some(r) = &eval {
            if best
                .as_ref()
                .is_none_or(|(_, score, _)| r.macro_accuracy > *score)
            {
                best = Some((epoch, r.macro_accuracy, learner.online().clone()));
            }
        }
        let m = EpochMetrics {
            epoch,
            steps,
            episodes,
            mean_episode_reward: if episodes == 0 {
                0.0
            } else {
                reward_sum / episodes as f64
            },
            mean_loss: if updates == 0 {
                0.0
            } else {
                loss_sum / updates as f64
            },
            epsilon: learner.epsilon(),
            eval,
        };
        log::info!(
            "epoch {epoch}: {episodes} episodes, mean reward {:.4}, loss {:.5}, eps {:.3}",
            m.mean_episode_reward,
            m.mean_loss,
            m.epsilon
        );
        metrics.push(m);
    }
    Ok(TrainOutcome {
        transitions: learner.transitions(),
        network: learner.online().clone(),
        best: best.map(|(e, _, n)| (e, n)),
        metrics,
    })
}

/// Serialized agent: format version, architecture and flat parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub architecture: Architecture,
    pub params: Vec<f64>,
    #[serde(default)]
    pub allowed_decisions: Option<Vec<usize>>,
}

impl Checkpoint {
    pub fn new(net: &QNetwork, allowed_decisions: Option<Vec<usize>>) -> Self {
        Self {
            format_version: CHECKPOINT_FORMAT_VERSION,
            architecture: net.architecture(),
            params: net.params().to_vec(),
            allowed_decisions,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(text)?;
        if c.format_version != CHECKPOINT_FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                what: "agent checkpoint",
                expected: CHECKPOINT_FORMAT_VERSION,
                found: c.format_version,
            });
        }
        Ok(c)
    }

    pub fn network(&self) -> Result<QNetwork> {
        QNetwork::from_params(self.architecture, self.params.clone())
    }
}
