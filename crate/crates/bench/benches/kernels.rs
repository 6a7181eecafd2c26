use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use quadweil::circle::{b_sum, brute_force_weighted_count};
use quadweil::expsums::{t_sum_direct, t_value};
use quadweil::gamma::search_irreducible_form;
use quadweil::measures::{convolve, mu_q, reflect, SpContext};
use quadweil::quadform::QuadForm;
use quadweil::weil::{form_word, rho_of_word};
use quadweil_bench::state_pair;

fn t_sums(c: &mut Criterion) {
    let f = QuadForm::e1();
    let mut g = c.benchmark_group("t_value");
    for q in [13u64, 17, 23] {
        let (f1, f2) = state_pair(q, 1);
        g.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, _| {
            b.iter(|| t_value(black_box(&f1), &f2, 2, &f))
        });
    }
    g.finish();
    let (f1, f2) = state_pair(3, 1);
    c.bench_function("t_sum_direct/3", |b| {
        b.iter(|| t_sum_direct(black_box(&f1), &f2, 2, &f))
    });
}

fn weil_apply(c: &mut Criterion) {
    let f = QuadForm::e1();
    let q = 13;
    let op = rho_of_word(&form_word(&f, q).unwrap(), q).unwrap();
    let (v, _) = state_pair(q, 2);
    c.bench_function("rho(g)/13", |b| b.iter(|| op.apply(black_box(&v))));
}

fn local_sums(c: &mut Criterion) {
    let f = QuadForm::e1();
    let mut g = c.benchmark_group("b_sum");
    for q in [37u64, 101, 15, 25] {
        g.bench_with_input(BenchmarkId::from_parameter(q), &q, |b, &q| {
            b.iter(|| b_sum(&f, black_box(q), 3801))
        });
    }
    g.finish();
}

fn convolution(c: &mut Criterion) {
    let f = search_irreducible_form(3, 1).expect("form exists");
    let ctx = SpContext::new(3).unwrap();
    let mu = mu_q(&f, &ctx).unwrap();
    let mu2 = convolve(&ctx, &reflect(&ctx, &mu), &mu).unwrap();
    c.bench_function("convolve/p3", |b| b.iter(|| convolve(&ctx, black_box(&mu2), &mu2)));
}

fn weighted_count(c: &mut Criterion) {
    let f = QuadForm::e1();
    let mut g = c.benchmark_group("weighted_count");
    g.sample_size(10);
    g.bench_function("X=20", |b| {
        b.iter(|| brute_force_weighted_count(&f, black_box(1001), 20))
    });
    g.finish();
}

criterion_group!(benches, t_sums, weil_apply, local_sums, convolution, weighted_count);
criterion_main!(benches);
