use criterion::{criterion_group, criterion_main, Criterion};

use fdash_sim::batch::{run_batch_with, Execution};
use fdash_sim::config::{parse_config, Scenario};

fn scenario() -> Scenario {
    let text = "[scenario]\niterations = 8\n[channel]\nspeeds_mps = 5, 20, 40\n";
    Scenario::from_entries(&parse_config(text, "bench", None).unwrap()).unwrap()
}

fn batch(c: &mut Criterion) {
    let s = scenario();
    let mut group = c.benchmark_group("batch_6alg_3speed_8runs");
    group.sample_size(10);
    group.bench_function("sequential", |b| b.iter(|| run_batch_with(&s, Execution::Sequential)));
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| b.iter(|| run_batch_with(&s, Execution::Parallel)));
    group.finish();
}

fn session(c: &mut Criterion) {
    let s = scenario();
    c.bench_function("single_session_fdash_40mps", |b| {
        b.iter(|| s.run_one(fdash_sim::abr::Algorithm::Fdash, Some(40.0), 0).unwrap())
    });
}

criterion_group!(benches, batch, session);
criterion_main!(benches);
