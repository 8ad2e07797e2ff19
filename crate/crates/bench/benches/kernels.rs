use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use dpilot_core::channel::ChannelLayout;
use dpilot_core::decoder::{
    decode_product, grand_hard, grand_soft_list, ComponentDecoder, ProductInput,
};
use dpilot_core::estimator::mmse_equalize;
use dpilot_core::fec::{encode, make_ebch, make_product};
use dpilot_core::harness::{run_point, LinkConfig};
use dpilot_core::rng::RandomStream;
use dpilot_core::Complex64;

/// BPSK LLRs of a random codeword at the given noise standard deviation.
fn noisy_llrs(codeword: &[u8], sigma: f64, rng: &mut RandomStream) -> Vec<f64> {
    codeword
        .iter()
        .map(|&b| {
            let x = if b == 0 { 1.0 } else { -1.0 };
            2.0 * (x + sigma * rng.gaussian()) / (sigma * sigma)
        })
        .collect()
}

fn hard(llrs: &[f64]) -> Vec<u8> {
    llrs.iter().map(|&l| u8::from(l < 0.0)).collect()
}

fn grand(c: &mut Criterion) {
    let code = make_ebch(6, 2).unwrap();
    let mut rng = RandomStream::new(1);
    let inputs: Vec<Vec<f64>> = (0..64)
        .map(|_| {
            let cw = encode(&rng.bits(code.k()), &code).unwrap();
            noisy_llrs(&cw, 0.6, &mut rng)
        })
        .collect();
    let hard_inputs: Vec<Vec<u8>> = inputs.iter().map(|l| hard(l)).collect();

    c.bench_function("grand_hard [64,51]", |b| {
        b.iter(|| {
            for y in &hard_inputs {
                black_box(grand_hard(black_box(y), &code, 1_000_000).unwrap());
            }
        })
    });
    c.bench_function("grand_soft_list [64,51] L=1", |b| {
        b.iter(|| {
            for l in &inputs {
                black_box(grand_soft_list(black_box(l), &code, 1, 1_000_000).unwrap());
            }
        })
    });
}

fn product(c: &mut Criterion) {
    let code = make_product(&make_ebch(5, 1).unwrap()).unwrap();
    let mut rng = RandomStream::new(2);
    let cw = encode(&rng.bits(code.k()), &code).unwrap();
    let llrs = noisy_llrs(&cw, 0.55, &mut rng);
    let y = hard(&llrs);
    c.bench_function("decode_product [32,26]^2 hard", |b| {
        b.iter(|| {
            decode_product(
                ProductInput::Hard(black_box(&y)),
                &code,
                ComponentDecoder::Hard {
                    max_queries: 1_000_000,
                },
                4,
            )
            .unwrap()
        })
    });
}

fn equalizer(c: &mut Criterion) {
    let mut rng = RandomStream::new(3);
    let y: Vec<Complex64> = (0..512).map(|_| rng.complex_gaussian(1.0)).collect();
    let single = [Complex64::new(0.8, -0.3)];
    let taps = [Complex64::new(0.8, -0.3), Complex64::new(0.2, 0.1)];
    c.bench_function("mmse_equalize 512 symbols, 1 tap", |b| {
        b.iter(|| mmse_equalize(black_box(&y), &single, ChannelLayout::Taps, 0.1).unwrap())
    });
    c.bench_function("mmse_equalize 512 symbols, 2 taps", |b| {
        b.iter(|| mmse_equalize(black_box(&y), &taps, ChannelLayout::Taps, 0.1).unwrap())
    });
}

const POINT: &str = r#"
seed = 1
modulation = 4
ebn0_db = [6.0]
blocks_per_point = 200
crc = "crc8"

[code]
family = "ebch"
m = 6
t = 2

[waveform]
type = "single_carrier"

[channel]
decorrelation_interval = 3200.0

[[policies]]
kind = "decoder"
training_interval = 20
"#;

fn link(c: &mut Criterion) {
    let cfg = LinkConfig::from_toml_str(POINT).unwrap();
    let policy = cfg.policies[0];
    let mut group = c.benchmark_group("link");
    group.sample_size(10);
    group.bench_function("run_point [64,51] 4-QAM, 200 blocks", |b| {
        b.iter(|| run_point(&cfg, &policy, 6.0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, grand, product, equalizer, link);
criterion_main!(benches);
