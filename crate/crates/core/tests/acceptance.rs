//! Acceptance checks, one pass/fail line per criterion. Runs without the
//! libtest harness so the lines are always printed.

#![allow(clippy::needless_range_loop)]

use std::collections::HashMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use rlie_core::corpus::{generate_synthetic_corpus, shootings_schema, SyntheticConfig};
use rlie_core::dqn::{
    epsilon_at, loss_and_gradient, train_agent, Architecture, HeadLoss, Learner, QNetwork,
    ReplayMemory, TrainConfig, Transition,
};
use rlie_core::eval::accuracy_sum;
use rlie_core::eval::{
    aggregate_confidence, aggregate_majority, ArticleExtraction, EvalReport, DEFAULT_TAU_GRID,
};
use rlie_core::extractor::{
    argmax, EntityValue, EntityValues, MaxentConfig, SgdConfig, SoftmaxRegression, SparseInput,
};
use rlie_core::mdp::{
    assemble_state, match_flags, run_episode, Action, ChainMdp, ContextMode, Decision, EnvConfig,
    IeEnvironment, RewardMode, Scheme,
};
use rlie_core::pipeline::{
    prepare, run_baselines, run_meta, split, train_variant, Prepared, RetrievalConfig, Variant,
};
use rlie_core::text::{normalize_value, Lexicons};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

fn gradients() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let mut worst: f64 = 0.0;
    let h = 1e-6;
    for i in 0..100 {
        let arch = Architecture {
            input: 2 + i % 9,
            hidden: 1 + i % 6,
            n_decisions: 2 + i % 4,
            n_queries: 1 + i % 3,
        };
        let net = QNetwork::random(arch, 0.8, &mut rng);
        let batch: Vec<Transition> = (0..3)
            .map(|_| Transition {
                state: (0..arch.input).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                decision: rng.gen_range(0..arch.n_decisions),
                query: rng.gen_range(0..arch.n_queries),
                reward: 0.0,
                next: None,
            })
            .collect();
        let refs: Vec<&Transition> = batch.iter().collect();
        let targets: Vec<(f64, f64)> = (0..3)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let (_, grad) = loss_and_gradient(&net, &refs, &targets, HeadLoss::Sum).unwrap();
        for p in 0..net.params().len() {
            let mut plus = net.clone();
            plus.params_mut()[p] += h;
            let mut minus = net.clone();
            minus.params_mut()[p] -= h;
            let lp = loss_and_gradient(&plus, &refs, &targets, HeadLoss::Sum)
                .unwrap()
                .0;
            let lm = loss_and_gradient(&minus, &refs, &targets, HeadLoss::Sum)
                .unwrap()
                .0;
            worst = worst.max(rel_err((lp - lm) / (2.0 * h), grad[p]));
        }
    }
    for i in 0..100 {
        let (n_features, n_classes) = (2 + i % 9, 2 + i % 4);
        let mut model = SoftmaxRegression::zeros(n_features, n_classes);
        model
            .weights_mut()
            .iter_mut()
            .for_each(|w| *w = rng.gen_range(-1.0..1.0));
        model
            .bias_mut()
            .iter_mut()
            .for_each(|b| *b = rng.gen_range(-1.0..1.0));
        let data: Vec<(SparseInput, usize)> = (0..5)
            .map(|_| {
                let mut x = Vec::new();
                for f in 0..n_features {
                    if rng.gen_bool(0.7) {
                        x.push((f, rng.gen_range(-1.0..1.0)));
                    }
                }
                (x, rng.gen_range(0..n_classes))
            })
            .collect();
        let l2 = 1e-2;
        let (gw, gb) = model.gradient(&data, l2);
        for p in 0..gw.len() {
            let mut plus = model.clone();
            plus.weights_mut()[p] += h;
            let mut minus = model.clone();
            minus.weights_mut()[p] -= h;
            worst = worst.max(rel_err(
                (plus.loss(&data, l2) - minus.loss(&data, l2)) / (2.0 * h),
                gw[p],
            ));
        }
        for c in 0..gb.len() {
            let mut plus = model.clone();
            plus.bias_mut()[c] += h;
            let mut minus = model.clone();
            minus.bias_mut()[c] -= h;
            worst = worst.max(rel_err(
                (plus.loss(&data, l2) - minus.loss(&data, l2)) / (2.0 * h),
                gb[c],
            ));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-4 && elapsed < Duration::from_secs(10),
        format!("max relative error {worst:.2e} over 200 instances, {elapsed:.2?}"),
    )
}

fn chain_q_learning() -> Verdict {
    let start = Instant::now();
    let config = TrainConfig {
        learning_rate: 2e-3,
        eps_anneal_transitions: 5_000,
        eps_end: 0.2,
        target_sync_steps: 200,
        replay_capacity: 10_000,
        steps_per_epoch: 2_000,
        epochs: 10,
        ..TrainConfig::default()
    };
    let out = train_agent(&mut ChainMdp::new(), &config, 3, |_, _| None).unwrap();
    let q_star = ChainMdp::optimal_q(0.8);
    let mut worst: f64 = 0.0;
    let mut optimal = true;
    for s in 0..ChainMdp::N_STATES {
        let (q, _) = out.network.forward(&ChainMdp::one_hot(s)).unwrap();
        optimal &= argmax(&q) == argmax(&q_star[s]);
        for a in 0..2 {
            worst = worst.max((q[a] - q_star[s][a]).abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        optimal && worst <= 0.05 && out.transitions <= 50_000 && elapsed < Duration::from_secs(60),
        format!(
            "greedy optimal: {optimal}, max |Q-Q*| {worst:.4} after {} steps, {elapsed:.2?}",
            out.transitions
        ),
    )
}

fn schedule_and_plumbing() -> Verdict {
    let c = TrainConfig::default();
    let mut ok = epsilon_at(0, &c) == 1.0
        && epsilon_at(500_000, &c) == 0.1
        && epsilon_at(750_000, &c) == 0.1;
    for t in (0..=500_000).step_by(12_500) {
        let linear = 1.0 + (t as f64 / 500_000.0) * (0.1 - 1.0);
        ok &= (epsilon_at(t, &c) - linear).abs() <= 1e-15;
    }
    ok &= (epsilon_at(250_000, &c) - 0.55).abs() <= 1e-15;

    let arch = Architecture {
        input: 3,
        hidden: 4,
        n_decisions: 3,
        n_queries: 2,
    };
    let config = TrainConfig {
        learn_start: 1,
        batch_size: 4,
        learning_rate: 1e-3,
        replay_capacity: 1_000,
        ..TrainConfig::default()
    };
    let mut learner = Learner::new(arch, &config, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut synced = true;
    for i in 1..=10_000u64 {
        let t = Transition {
            state: (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            decision: rng.gen_range(0..3),
            query: rng.gen_range(0..2),
            reward: rng.gen_range(-1.0..1.0),
            next: rng
                .gen_bool(0.5)
                .then(|| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()),
        };
        learner.observe(t).unwrap();
        if i % config.target_sync_steps == 0 {
            let same_bits = learner
                .target()
                .params()
                .iter()
                .zip(learner.online().params())
                .all(|(a, b)| a.to_bits() == b.to_bits());
            synced &= same_bits;
        }
    }

    let mut replay = ReplayMemory::new(100);
    for i in 0..260 {
        replay.push(Transition {
            state: vec![i as f64],
            decision: 0,
            query: 0,
            reward: i as f64,
            next: None,
        });
    }
    let kept: Vec<f64> = replay.iter().map(|t| t.reward).collect();
    let fifo = replay.len() == 100 && kept == (160..260).map(|i| i as f64).collect::<Vec<_>>();
    verdict(
        ok && synced && fifo,
        format!("epsilon exact: {ok}, target bit-equal after each sync: {synced}, FIFO at capacity 100: {fifo}"),
    )
}

fn worked_state_layout() -> Verdict {
    let schema = shootings_schema();
    let v = |vals: [(&str, f64); 4]| {
        EntityValues(
            vals.iter()
                .map(|&(s, c)| Some(EntityValue::new(s, c)))
                .collect(),
        )
    };
    let cur = v([
        ("Scott Westerhuis", 0.3),
        ("4", 0.2),
        ("2", 0.5),
        ("Platte", 0.1),
    ]);
    let new = v([
        ("Scott Westerhuis", 0.4),
        ("6", 0.6),
        ("0", 0.2),
        ("Platte", 0.4),
    ]);
    let conf = |x: &EntityValues| (0..4).map(|j| x.confidence(j)).collect::<Vec<_>>();
    let context = [0.2, 0.3, 0.1, 0.5];
    let s = assemble_state(
        &conf(&cur),
        &conf(&new),
        &match_flags(&schema, &cur, &new),
        &context,
        0.65,
    );
    let expected = [
        0.3, 0.2, 0.5, 0.1, 0.4, 0.6, 0.2, 0.4, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.2, 0.3,
        0.1, 0.5, 0.65,
    ];
    verdict(s == expected, format!("state {s:?}"))
}

fn telescoping(p: &Prepared, cache: &rlie_core::mdp::FeatureCache) -> Verdict {
    let schema = &p.corpus.schema;
    let events = p.train_events();
    let n = schema.len();
    let worst = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(i);
            let scheme = [Scheme::Replace, Scheme::Confidence, Scheme::Majority][i as usize % 3];
            let config = EnvConfig {
                scheme,
                reward_mode: RewardMode::Step,
                ..EnvConfig::default()
            };
            let m = p.pools.n_templates;
            let mut env = IeEnvironment::new(schema, events.clone(), &p.pools, cache, config);
            let index = rng.gen_range(0..events.len());
            let stop_p = rng.gen_range(0.0..0.3);
            let r = run_episode(&mut env, index, |_| {
                let d = if rng.gen_bool(stop_p) {
                    Decision::Stop
                } else {
                    Decision::from_index(rng.gen_range(0..n + 2), n)
                };
                Action {
                    decision: d,
                    query: rng.gen_range(0..m),
                }
            });
            let gold = &events[index].gold;
            let delta =
                accuracy_sum(schema, &r.values, gold) - accuracy_sum(schema, &r.initial, gold);
            let total: f64 = r.rewards.iter().sum();
            (total - (delta + config_penalty() * r.steps as f64)).abs()
        })
        .reduce(|| 0.0, f64::max);
    verdict(
        worst <= 1e-12,
        format!("max deviation {worst:.3e} over 1000 random episodes"),
    )
}

fn config_penalty() -> f64 {
    EnvConfig::default().penalty
}

fn reference_confidence(
    source: &EntityValues,
    arts: &[ArticleExtraction],
    tau: f64,
) -> EntityValues {
    let pool: Vec<&EntityValues> = std::iter::once(source)
        .chain(
            arts.iter()
                .filter(|a| a.similarity >= tau)
                .map(|a| &a.values),
        )
        .collect();
    EntityValues(
        (0..source.len())
            .map(|j| {
                let mut c: Vec<(usize, &EntityValue)> = pool
                    .iter()
                    .enumerate()
                    .filter_map(|(i, v)| v.get(j).map(|x| (i, x)))
                    .collect();
                c.sort_by(|a, b| {
                    b.1.confidence
                        .total_cmp(&a.1.confidence)
                        .then(a.0.cmp(&b.0))
                });
                c.first().map(|(_, v)| (*v).clone())
            })
            .collect(),
    )
}

fn reference_majority(source: &EntityValues, arts: &[ArticleExtraction], tau: f64) -> EntityValues {
    let pool: Vec<&EntityValues> = std::iter::once(source)
        .chain(
            arts.iter()
                .filter(|a| a.similarity >= tau)
                .map(|a| &a.values),
        )
        .collect();
    EntityValues(
        (0..source.len())
            .map(|j| {
                let c: Vec<&EntityValue> = pool.iter().filter_map(|v| v.get(j)).collect();
                let keys: Vec<String> = c.iter().map(|v| normalize_value(&v.value)).collect();
                let mut options: Vec<(usize, f64, String, String)> = Vec::new();
                for (i, k) in keys.iter().enumerate() {
                    if keys[..i].contains(k) {
                        continue;
                    }
                    let count = keys.iter().filter(|x| *x == k).count();
                    let mut total = 0.0;
                    for (x, v) in keys.iter().zip(&c) {
                        if x == k {
                            total += v.confidence;
                        }
                    }
                    options.push((count, total, k.clone(), c[i].value.clone()));
                }
                options.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2)));
                options.first().map(|(count, _, _, value)| {
                    EntityValue::new(value.clone(), *count as f64 / c.len() as f64)
                })
            })
            .collect(),
    )
}

fn aggregation_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let surfaces = ["1", "one", "2", "two", "Ann", "ann", "Bo Li", "bo li", "7"];
    let confs = [0.1, 0.2, 0.5, 0.5, 0.9];
    let sims = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut mismatches = 0;
    for _ in 0..500 {
        let n_e = rng.gen_range(1..=4);
        let values = |rng: &mut ChaCha8Rng| {
            EntityValues(
                (0..n_e)
                    .map(|_| {
                        rng.gen_bool(0.8).then(|| {
                            EntityValue::new(
                                surfaces[rng.gen_range(0..surfaces.len())],
                                confs[rng.gen_range(0..confs.len())],
                            )
                        })
                    })
                    .collect(),
            )
        };
        let source = values(&mut rng);
        let arts: Vec<ArticleExtraction> = (0..rng.gen_range(0..8))
            .map(|_| ArticleExtraction {
                values: values(&mut rng),
                similarity: sims[rng.gen_range(0..sims.len())],
            })
            .collect();
        let tau = [0.0, 0.3, 0.5, 0.75, 1.0][rng.gen_range(0..5)];
        if aggregate_confidence(&source, &arts, tau) != reference_confidence(&source, &arts, tau) {
            mismatches += 1;
        }
        if aggregate_majority(&source, &arts, tau) != reference_majority(&source, &arts, tau) {
            mismatches += 1;
        }
    }
    verdict(
        mismatches == 0,
        format!("{mismatches} mismatches over 500 fixtures x 2 schemes"),
    )
}

fn desk_schedule(epochs: usize) -> TrainConfig {
    TrainConfig {
        learning_rate: 5e-4,
        eps_anneal_transitions: 20_000,
        target_sync_steps: 1_000,
        replay_capacity: 50_000,
        steps_per_epoch: 5_000,
        epochs,
        ..TrainConfig::default()
    }
}

fn dominated(oracle: &EvalReport, others: &[&EvalReport]) -> Vec<String> {
    let mut out = Vec::new();
    for r in others {
        for (j, (&o, &a)) in oracle.accuracy.iter().zip(&r.accuracy).enumerate() {
            if o < a {
                out.push(format!(
                    "{} beats oracle on {}",
                    r.system, oracle.entities[j]
                ));
            }
        }
    }
    out
}

/// Baselines on an unrelated, cleaner corpus. Returns violations and the
/// number of systems checked.
fn second_corpus() -> (Vec<String>, usize) {
    let corpus = generate_synthetic_corpus(&SyntheticConfig {
        seed: 11,
        n_events: 120,
        noise: 0.3,
        ..SyntheticConfig::default()
    })
    .expect("synthetic corpus");
    let (train, test) = split(&corpus, 80, 40).expect("split");
    let p = prepare(
        corpus,
        train,
        test,
        &Lexicons::bundled(),
        &MaxentConfig::default(),
        &RetrievalConfig::default(),
    )
    .expect("prepare");
    let cache = p.feature_cache(ContextMode::TfIdf);
    let b = run_baselines(&p, &cache, &p.test_events(), &DEFAULT_TAU_GRID);
    let (_, meta) = run_meta(
        &p,
        &cache,
        &p.train_events(),
        &p.test_events(),
        &SgdConfig::default(),
    )
    .expect("meta");
    let mut systems: Vec<&EvalReport> = vec![&b.maxent, &meta];
    systems.extend(b.confidence.iter().map(|(_, r)| r));
    systems.extend(b.majority.iter().map(|(_, r)| r));
    (dominated(&b.oracle, &systems), systems.len())
}

fn main() {
    let mut lines: Vec<(usize, &str, Verdict)> = Vec::new();
    let mut record = |id: usize, name: &'static str, v: Verdict| {
        println!(
            "[{}] criterion {id} ({name}): {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        lines.push((id, name, v));
    };

    record(1, "gradient correctness", gradients());
    record(2, "Q-learning soundness", chain_q_learning());
    record(3, "schedule and plumbing", schedule_and_plumbing());
    record(4, "worked state layout", worked_state_layout());
    record(9, "aggregation oracles", aggregation_oracles());

    let start = Instant::now();
    let corpus = generate_synthetic_corpus(&SyntheticConfig {
        seed: 7,
        n_events: 300,
        ..SyntheticConfig::default()
    })
    .expect("synthetic corpus");
    let (train, test) = split(&corpus, 200, 100).expect("split");
    let retrieval = RetrievalConfig {
        context_vocabulary: 100,
        ..RetrievalConfig::default()
    };
    let p = prepare(
        corpus,
        train,
        test,
        &Lexicons::bundled(),
        &MaxentConfig::default(),
        &retrieval,
    )
    .expect("prepare");
    let cache = p.feature_cache(ContextMode::TfIdf);
    record(5, "reward telescoping", telescoping(&p, &cache));

    let train_events = p.train_events();
    let test_events = p.test_events();
    let baselines = run_baselines(&p, &cache, &test_events, &DEFAULT_TAU_GRID);
    let (_, meta) = run_meta(
        &p,
        &cache,
        &train_events,
        &test_events,
        &SgdConfig::default(),
    )
    .expect("meta");
    let schedule = desk_schedule(10);
    let seeds = [1u64, 2, 3];
    let runs: HashMap<(u64, bool), EvalReport> = seeds
        .par_iter()
        .flat_map(|&s| [(s, true), (s, false)])
        .map(|(seed, step)| {
            let env = EnvConfig {
                reward_mode: if step {
                    RewardMode::Step
                } else {
                    RewardMode::Episode
                },
                ..EnvConfig::default()
            };
            let run = train_variant(
                &p,
                &cache,
                Variant::Extract,
                &env,
                &schedule,
                seed,
                &train_events,
                &train_events,
                &test_events,
            )
            .expect("agent training");
            ((seed, step), run.report)
        })
        .collect();
    let others: Vec<EvalReport> = [Variant::Basic, Variant::Query]
        .par_iter()
        .map(|&v| {
            train_variant(
                &p,
                &cache,
                v,
                &EnvConfig::default(),
                &schedule,
                1,
                &train_events,
                &train_events,
                &test_events,
            )
            .expect("agent training")
            .report
        })
        .collect();
    let elapsed = start.elapsed();

    let base = baselines.maxent.macro_accuracy;
    let (best_tau, best_conf) = baselines.best_confidence();
    let mut wins = 0;
    let mut per_seed = Vec::new();
    for s in seeds {
        let rl = runs[&(s, true)].macro_accuracy;
        let ok = rl - base >= 0.10 && rl - best_conf.macro_accuracy >= 0.03;
        wins += usize::from(ok);
        per_seed.push(format!("seed {s}: {:.1}", 100.0 * rl));
    }
    record(
        7,
        "synthetic end-to-end gain",
        verdict(
            wins >= 2 && elapsed < Duration::from_secs(15 * 60),
            format!(
                "RL-Extract macro [{}] vs Maxent {:.1} and Confidence (tau={best_tau}) {:.1}; {wins}/3 seeds clear both margins; {elapsed:.1?}",
                per_seed.join(", "),
                100.0 * base,
                100.0 * best_conf.macro_accuracy
            ),
        ),
    );

    let mean = |step: bool| {
        seeds
            .iter()
            .map(|s| runs[&(*s, step)].macro_accuracy)
            .sum::<f64>()
            / seeds.len() as f64
    };
    let (step_mean, episode_mean) = (mean(true), mean(false));
    record(
        8,
        "step vs episode reward",
        verdict(
            step_mean > episode_mean,
            format!(
                "mean macro over 3 seeds: step {:.1}, episode {:.1}",
                100.0 * step_mean,
                100.0 * episode_mean
            ),
        ),
    );

    let mut systems: Vec<&EvalReport> = vec![&baselines.maxent, &meta];
    systems.extend(baselines.confidence.iter().map(|(_, r)| r));
    systems.extend(baselines.majority.iter().map(|(_, r)| r));
    systems.extend(runs.values());
    systems.extend(others.iter());
    let mut violations = dominated(&baselines.oracle, &systems);
    let (second, n_second) = second_corpus();
    violations.extend(second);
    record(
        6,
        "oracle dominance",
        verdict(
            violations.is_empty(),
            format!(
                "oracle {:?} checked against {} systems, plus {n_second} on a second corpus{}",
                baselines.oracle.accuracy,
                systems.len(),
                if violations.is_empty() {
                    String::new()
                } else {
                    format!(": {}", violations.join("; "))
                }
            ),
        ),
    );

    println!();
    println!("{}", baselines.maxent.table_header());
    for r in [
        &baselines.maxent,
        &best_conf.clone(),
        &baselines.best_majority().1,
        &meta,
        &others[0],
        &others[1],
    ] {
        println!("{}", r.table_row());
    }
    for s in seeds {
        println!("{}  [seed {s}, step]", runs[&(s, true)].table_row());
        println!("{}  [seed {s}, episode]", runs[&(s, false)].table_row());
    }
    println!("{}", baselines.oracle.table_row());

    lines.sort_by_key(|l| l.0);
    let failed: Vec<usize> = lines.iter().filter(|l| !l.2.pass).map(|l| l.0).collect();
    println!();
    println!(
        "{} of {} criteria passed",
        lines.len() - failed.len(),
        lines.len()
    );
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
