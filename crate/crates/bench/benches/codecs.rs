use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use fpc_bench::{de_bruijn_power, markov, uniform};
use fpc_core::bitcodec::{delta_decode, write_delta, BitString};
use fpc_core::{entropy, footprint, mtf, CodecParams};

const LEN: usize = 1 << 18;

fn bench_delta(c: &mut Criterion) {
    let values: Vec<u64> = (1..=4096).collect();
    let mut encoded = BitString::new();
    for &v in &values {
        write_delta(&mut encoded, v).unwrap();
    }
    let mut group = c.benchmark_group("delta");
    group.throughput(Throughput::Elements(values.len() as u64));
    group.bench_function("encode", |b| {
        b.iter(|| {
            let mut out = BitString::new();
            for &v in &values {
                write_delta(&mut out, black_box(v)).unwrap();
            }
            out
        })
    });
    group.bench_function("decode", |b| {
        b.iter(|| {
            let mut cursor = encoded.cursor();
            (0..values.len()).map(|_| delta_decode(&mut cursor).unwrap()).sum::<u64>()
        })
    });
    group.finish();
}

fn bench_footprint(c: &mut Criterion) {
    let mut group = c.benchmark_group("footprint");
    group.throughput(Throughput::Elements(LEN as u64));
    let inputs = [
        ("markov256", 256, markov(256, LEN, 0.8, 1)),
        ("uniform16", 16, uniform(16, LEN, 2)),
        ("debruijn4", 4, de_bruijn_power(4, 3, LEN)),
    ];
    for (name, n, data) in &inputs {
        for (order, k) in [(0usize, 16u32), (1, 16), (2, 4)] {
            let params = CodecParams::new(*n, order, k).unwrap();
            let (bits, _) = footprint::compress_to_bits(params, data).unwrap();
            group.bench_with_input(
                BenchmarkId::new(format!("compress/{name}"), format!("l{order}k{k}")),
                data,
                |b, data| b.iter(|| footprint::compress_to_bits(params, data).unwrap()),
            );
            group.bench_with_input(
                BenchmarkId::new(format!("decompress/{name}"), format!("l{order}k{k}")),
                &bits,
                |b, bits| b.iter(|| footprint::decompress(params, bits, data.len()).unwrap()),
            );
        }
    }
    group.finish();
}

fn bench_mtf(c: &mut Criterion) {
    let data = markov(256, LEN, 0.8, 3);
    let mut group = c.benchmark_group("mtf");
    group.throughput(Throughput::Elements(LEN as u64));
    group.bench_function("encode/markov256", |b| b.iter(|| mtf::mtf_encode(&data, 256).unwrap()));
    group.finish();
}

fn bench_entropy(c: &mut Criterion) {
    let data = markov(256, LEN, 0.8, 4);
    let mut group = c.benchmark_group("entropy");
    group.throughput(Throughput::Elements(LEN as u64));
    for order in 0..=3 {
        group.bench_with_input(BenchmarkId::new("hl", order), &order, |b, &order| {
            b.iter(|| entropy::hl(&data, order))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_delta, bench_footprint, bench_mtf, bench_entropy);
criterion_main!(benches);
