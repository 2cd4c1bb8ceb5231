use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use twistedcx::cover_model::CoverNerve;
use twistedcx::exact_linalg::Field;
use twistedcx::functors::{local_equivalence, sheafify};
use twistedcx::gen;
use twistedcx::par;
use twistedcx::resolution::twisted_resolution;

// Each group runs the same workload with the rayon path and with the forced sequential path.
fn paths(c: &mut Criterion) {
    let nerve = CoverNerve::simplex(4);
    let q = Field::Rational;
    let t = gen::twisted(&mut gen::rng(11), &nerve, q, 0, 2, 3);
    let p = gen::presheaf_complex(&mut gen::rng(12), &CoverNerve::simplex(3), q, -1, 2, 2, true);
    let s = sheafify(&t).unwrap();

    let mut g = c.benchmark_group("sheafify");
    g.sample_size(10);
    for (label, seq) in [("parallel", false), ("sequential", true)] {
        g.bench_with_input(BenchmarkId::from_parameter(label), &seq, |b, &seq| {
            par::set_sequential(seq);
            b.iter(|| sheafify(&t).unwrap());
        });
    }
    g.finish();

    let mut g = c.benchmark_group("local_equivalence");
    g.sample_size(10);
    for (label, seq) in [("parallel", false), ("sequential", true)] {
        g.bench_with_input(BenchmarkId::from_parameter(label), &seq, |b, &seq| {
            par::set_sequential(seq);
            b.iter(|| (0..nerve.len()).map(|j| local_equivalence(&t, &s, j).holds()).count());
        });
    }
    g.finish();

    let mut g = c.benchmark_group("twisted_resolution");
    g.sample_size(10);
    for (label, seq) in [("parallel", false), ("sequential", true)] {
        g.bench_with_input(BenchmarkId::from_parameter(label), &seq, |b, &seq| {
            par::set_sequential(seq);
            b.iter(|| twisted_resolution(&p, &CoverNerve::simplex(3)).unwrap());
        });
    }
    g.finish();
    par::set_sequential(false);
}

criterion_group!(benches, paths);
criterion_main!(benches);
