//! Shared fixtures for the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rlie_core::corpus::{generate_synthetic_corpus, Corpus, SyntheticConfig};
use rlie_core::dqn::{Architecture, QNetwork, Transition};
use rlie_core::extractor::{train_maxent, MaxentConfig, MaxentModel};
use rlie_core::text::Lexicons;

/// Network sized like the shootings setup: 4 entities, 100 context words.
pub fn network() -> QNetwork {
    let arch = Architecture {
        input: 4 * 4 + 100 + 1,
        hidden: 20,
        n_decisions: 4 + 3,
        n_queries: 5,
    };
    QNetwork::random(arch, 0.05, &mut ChaCha8Rng::seed_from_u64(0))
}

pub fn batch(net: &QNetwork, n: usize) -> Vec<Transition> {
    let arch = net.architecture();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    (0..n)
        .map(|_| Transition {
            state: (0..arch.input).map(|_| rng.gen_range(0.0..1.0)).collect(),
            decision: rng.gen_range(0..arch.n_decisions),
            query: rng.gen_range(0..arch.n_queries),
            reward: rng.gen_range(-1.0..1.0),
            next: Some((0..arch.input).map(|_| rng.gen_range(0.0..1.0)).collect()),
        })
        .collect()
}

pub fn corpus(n_events: usize) -> Corpus {
    generate_synthetic_corpus(&SyntheticConfig {
        n_events,
        ..SyntheticConfig::default()
    })
    .expect("synthetic corpus")
}

pub fn extractor(corpus: &Corpus) -> MaxentModel {
    let config = MaxentConfig {
        dimension: 1 << 16,
        epochs: 5,
        ..MaxentConfig::default()
    };
    train_maxent(
        corpus.events.iter().map(|e| (&e.source, &e.gold)),
        &corpus.schema,
        &Lexicons::bundled(),
        &config,
    )
    .expect("extractor trains")
}
