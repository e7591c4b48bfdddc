//! Query templates induced from training data, and a simulated search engine
//! that fills the per-event, per-template article queues.

mod pool;
mod search;
mod templates;

pub use pool::{build_pools, read_pools, write_pools, EpisodePool};
pub use search::{DateFilter, SearchEngine, DATE_WINDOW_DAYS};
pub use templates::{induce_templates, proper_noun_set, QueryTemplate, TemplateKind};

/// Default number of results kept per query.
pub const DEFAULT_K: usize = 20;
