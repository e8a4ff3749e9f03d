use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ctxlang_bench::{gen_benchmark, BenchConfig, Family, BENCH_FILE};
use ctxlang_core::{compile_text, MemorySources, ParseOptions};

fn families(c: &mut Criterion) {
    for family in Family::ALL {
        for depth in [1, 2] {
            let mut group = c.benchmark_group(format!("{family}/depth{depth}"));
            group.sample_size(10);
            for p in [8, 16, 32, 64] {
                let text = gen_benchmark(BenchConfig { family, p, depth });
                group.bench_with_input(BenchmarkId::from_parameter(p), &text, |b, text| {
                    b.iter(|| compile_text(BENCH_FILE, text, &MemorySources::default(), ParseOptions::default()).unwrap())
                });
            }
            group.finish();
        }
    }
}

criterion_group!(benches, families);
criterion_main!(benches);
