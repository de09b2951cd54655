use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use tracelab::batch;
use tracelab::generators::{generate, GeneratorConfig, GeneratorKind};
use tracelab::search::astar_maze;
use tracelab::seed;
use tracelab::validate::validate_trace;

const BATCH: u64 = 256;

// Generate, solve and self-validate one Wilson instance.
fn label(i: u64) -> bool {
    let m = generate(&GeneratorConfig::new(GeneratorKind::Wilson, seed::derive(7, i))).unwrap();
    let r = astar_maze(&m).unwrap();
    validate_trace(&m, &r.trace).is_valid()
}

fn labeling(c: &mut Criterion) {
    let mut group = c.benchmark_group("label_wilson_30x30");
    group.throughput(Throughput::Elements(BATCH));
    group.sample_size(20);
    group.bench_with_input(BenchmarkId::new("sequential", BATCH), &BATCH, |b, &n| {
        b.iter(|| batch::sequential::map_range(n, label))
    });
    #[cfg(feature = "parallel")]
    group.bench_with_input(BenchmarkId::new("parallel", BATCH), &BATCH, |b, &n| {
        b.iter(|| batch::parallel::map_range(n, label))
    });
    group.finish();
}

criterion_group!(benches, labeling);
criterion_main!(benches);
