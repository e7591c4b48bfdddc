//! Dual-head deep Q-network trained with experience replay, a target
//! network and RMSprop.

mod network;
mod replay;
mod train;

pub use network::{Architecture, ForwardCache, QNetwork};
pub use replay::{ReplayMemory, Transition};
pub use train::{
    epsilon_at, greedy_action, loss_and_gradient, select_action, td_targets, train_agent,
    train_step, Checkpoint, EpochMetrics, HeadLoss, Learner, RmsProp, TrainConfig, TrainOutcome,
    CHECKPOINT_FORMAT_VERSION,
};
