use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use summatoria::arith::builtins;
use summatoria::sieve::{build_block, BasePrimes, DEFAULT_BLOCK_SIZE};
use summatoria::Summator;

const N: u64 = 4_000_000;

fn sieve_block(c: &mut Criterion) {
    let lo = 1 + 7 * DEFAULT_BLOCK_SIZE as u64;
    let hi = lo + DEFAULT_BLOCK_SIZE as u64;
    let base = BasePrimes::for_limit(hi);
    let mut g = c.benchmark_group("sieve_block");
    g.throughput(Throughput::Elements(DEFAULT_BLOCK_SIZE as u64));
    g.bench_function("one block", |b| b.iter(|| build_block(lo, hi, &base).unwrap()));
    g.finish();
}

fn summatory(c: &mut Criterion) {
    let grid = [N / 4, N / 2, N];
    let mut g = c.benchmark_group("summatory");
    g.throughput(Throughput::Elements(N));
    g.sample_size(10);
    let mut runners = vec![("sequential".to_string(), Summator::sequential())];
    for workers in [2, 4] {
        runners.push((format!("workers={workers}"), Summator::with_workers(workers).unwrap()));
    }
    for (label, s) in &runners {
        g.bench_with_input(BenchmarkId::new("mertens", label), s, |b, s| b.iter(|| s.mertens(&grid).unwrap()));
        g.bench_with_input(BenchmarkId::new("log_phi", label), s, |b, s| {
            b.iter(|| s.compute_summatory(&builtins::log_phi(), &grid).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sieve_block, summatory);
criterion_main!(benches);
