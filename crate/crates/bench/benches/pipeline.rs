//! Benchmarks for the hot paths: digit expansion, membership scans,
//! subsequence extraction, and full witness construction.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use num_bigint::BigInt;

use badic::{construct_witness, in_v, DSeq, DigitStream, Rational};

fn bench_expansion(c: &mut Criterion) {
    let mut group = c.benchmark_group("expand");
    for (name, base) in [
        ("pow2", DSeq::geometric(2).unwrap()),
        ("factorial", DSeq::factorial()),
        ("powsq2", DSeq::squared_exp(2).unwrap()),
    ] {
        group.bench_function(format!("{name}/40-digits"), |bench| {
            bench.iter_batched(
                || DigitStream::expand_reduced(&Rational::of(355, 1130), base.clone()).unwrap(),
                |stream| stream.digit(40).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn bench_membership(c: &mut Criterion) {
    let mut group = c.benchmark_group("in_v");
    let pow2 = DSeq::geometric(2).unwrap();
    let factorial = DSeq::factorial();
    group.bench_function("pow2/window-scan", |bench| {
        bench.iter(|| {
            let mut members = 0usize;
            for k in 1..=2000i64 {
                if in_v(&pow2, 2, &BigInt::from(k)).unwrap().is_member() {
                    members += 1;
                }
            }
            members
        })
    });
    group.bench_function("factorial/large-k", |bench| {
        let k: BigInt = "479001600479001600".parse().unwrap();
        bench.iter(|| in_v(&factorial, 3, &k).unwrap().is_member())
    });
    group.finish();
}

fn bench_extraction(c: &mut Criterion) {
    c.bench_function("extract_dinfty/pow2-len-24", |bench| {
        bench.iter_batched(
            || DSeq::geometric(2).unwrap(),
            |b| b.extract_dinfty(24).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_witness(c: &mut Criterion) {
    let mut group = c.benchmark_group("witness");
    group.sample_size(20);
    for (name, base) in [
        ("triangular-pow2", DSeq::triangular_pow(2).unwrap()),
        ("powsq2", DSeq::squared_exp(2).unwrap()),
        ("factorial", DSeq::factorial()),
    ] {
        group.bench_function(format!("{name}/ones-m1"), |bench| {
            bench.iter_batched(
                || DigitStream::ones(base.clone()),
                |stream| construct_witness(&stream, 1, 320).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_expansion,
    bench_membership,
    bench_extraction,
    bench_witness
);
criterion_main!(benches);
