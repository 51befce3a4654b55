//! Criterion benchmarks over the stages of the embedding pipeline, from the
//! codec up to a complete adaptive embed.

use criterion::{black_box, criterion_group, criterion_main, Criterion, Throughput};
use stegarmor_core::{
    build_cover_sequence, compress, cost_maps, embed, parse_jpeg, random_bits, recompress,
    serialize_jpeg, synth_image, ternary_embed, ChannelModel, EmbedConfig, EmbeddingDomain,
    StcParams,
};

fn bench_codec(c: &mut Criterion) {
    let image = synth_image(1, 256, 256);
    let coeffs = compress(&image, 75).unwrap();
    let bytes = serialize_jpeg(&coeffs).unwrap();

    let mut g = c.benchmark_group("codec");
    g.throughput(Throughput::Elements((256 * 256) as u64));
    g.bench_function("compress_256", |b| {
        b.iter(|| compress(black_box(&image), 75).unwrap())
    });
    g.bench_function("serialize_256", |b| {
        b.iter(|| serialize_jpeg(black_box(&coeffs)).unwrap())
    });
    g.bench_function("parse_256", |b| {
        b.iter(|| parse_jpeg(black_box(&bytes)).unwrap())
    });
    g.finish();
}

fn bench_cost_model(c: &mut Criterion) {
    let cover = compress(&synth_image(2, 256, 256), 75).unwrap();
    let mut g = c.benchmark_group("cost");
    g.throughput(Throughput::Elements((256 * 256) as u64));
    g.bench_function("cost_maps_256", |b| {
        b.iter(|| cost_maps(black_box(&cover), 0.7).unwrap())
    });
    g.finish();
}

fn bench_trellis(c: &mut Criterion) {
    let cover = compress(&synth_image(3, 128, 128), 75).unwrap();
    let (_, dither) = cost_maps(&cover, 0.7).unwrap();
    let seq = build_cover_sequence(&cover, EmbeddingDomain::new(1).unwrap(), &dither).unwrap();
    let message = random_bits(5, 600);

    let mut g = c.benchmark_group("trellis");
    g.throughput(Throughput::Elements(seq.len() as u64));
    for h in [8u8, 10] {
        let params = StcParams::new(h, 0).unwrap();
        g.bench_function(format!("embed_128_h{h}"), |b| {
            b.iter(|| ternary_embed(black_box(&seq), black_box(&message), params).unwrap())
        });
    }
    g.finish();
}

fn bench_channel(c: &mut Criterion) {
    let cover = compress(&synth_image(4, 256, 256), 75).unwrap();
    let mut g = c.benchmark_group("channel");
    g.throughput(Throughput::Elements((256 * 256) as u64));
    g.bench_function("recompress_256_q75", |b| {
        b.iter(|| recompress(black_box(&cover), 75).unwrap())
    });
    g.finish();
}

fn bench_full_embed(c: &mut Criterion) {
    let cover = compress(&synth_image(5, 128, 128), 75).unwrap();
    let cfg = EmbedConfig {
        channel: ChannelModel::Quality(75),
        ..EmbedConfig::default()
    };
    let n_m = stegarmor_core::payload_bits(&cover, 0.05).unwrap();
    let message = random_bits(6, n_m);

    let mut g = c.benchmark_group("pipeline");
    g.sample_size(20);
    g.bench_function("adaptive_embed_128_p05", |b| {
        b.iter(|| embed(black_box(&cover), black_box(&message), &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_codec,
    bench_cost_model,
    bench_trellis,
    bench_channel,
    bench_full_embed
);
criterion_main!(benches);
