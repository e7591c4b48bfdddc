use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use rlie_core::dqn::{loss_and_gradient, td_targets, HeadLoss};
use rlie_core::pipeline::{fit_vectorizer, prepare_retrieval, RetrievalConfig};
use rlie_core::retrieval::{DateFilter, SearchEngine};

fn network(c: &mut Criterion) {
    let net = rlie_bench::network();
    let batch = rlie_bench::batch(&net, 32);
    let refs: Vec<_> = batch.iter().collect();
    let targets = td_targets(&refs, &net, 0.8, None).unwrap();
    c.bench_function("q_forward", |b| {
        b.iter(|| net.forward(black_box(&batch[0].state)).unwrap())
    });
    c.bench_function("q_backward_batch32", |b| {
        b.iter(|| loss_and_gradient(&net, black_box(&refs), &targets, HeadLoss::Sum).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let corpus = rlie_bench::corpus(200);
    let vectorizer = fit_vectorizer(&corpus);
    let engine = SearchEngine::new(&corpus.documents, &vectorizer, DateFilter::OlderOnly);
    let templates = prepare_retrieval(
        &corpus,
        &(0..100).collect::<Vec<_>>(),
        &RetrievalConfig::default(),
    )
    .templates;
    let source = &corpus.events[150].source;
    c.bench_function("search_top20", |b| {
        b.iter(|| engine.search(black_box(&templates[1]), source, 20))
    });
}

fn tagging(c: &mut Criterion) {
    let corpus = rlie_bench::corpus(60);
    let model = rlie_bench::extractor(&corpus);
    let doc = &corpus.events[0].source;
    c.bench_function("extract_entities", |b| {
        b.iter(|| model.extract_entities(black_box(doc)))
    });
}

criterion_group!(benches, network, search, tagging);
criterion_main!(benches);
