use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use oversight_bench::{score_pairs, tokens};
use oversight_core::metrics::{bleu4_tokens, pairwise_accuracy_tie_opt, rouge_l_tokens};

fn overlap(c: &mut Criterion) {
    let mut g = c.benchmark_group("overlap");
    for len in [16, 64, 256] {
        let (a, b) = (tokens(len, 0), tokens(len, 1));
        g.bench_with_input(BenchmarkId::new("bleu4", len), &len, |bch, _| bch.iter(|| bleu4_tokens(black_box(&a), black_box(&b))));
        g.bench_with_input(BenchmarkId::new("rouge_l", len), &len, |bch, _| bch.iter(|| rouge_l_tokens(black_box(&a), black_box(&b))));
    }
    g.finish();
}

fn tie_opt(c: &mut Criterion) {
    let mut g = c.benchmark_group("tie_opt");
    for n in [50, 200, 800] {
        let (h, m) = score_pairs(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |bch, _| bch.iter(|| pairwise_accuracy_tie_opt(black_box(&h), black_box(&m)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, overlap, tie_opt);
criterion_main!(benches);
