use std::hint::black_box;

use cartan_core::corpus;
use cartan_core::scalarfield::Tape;
use cartan_core::{parse, reduce, Point, Var};
use criterion::{criterion_group, criterion_main, Criterion};

const HEISENBERG_M: &str = "9/4*(x^2+y^2)^2/(1+x^2+y^2)^4";

fn expressions(c: &mut Criterion) {
    c.bench_function("parse closed-form M", |b| {
        b.iter(|| parse(black_box(HEISENBERG_M)).unwrap())
    });
    c.bench_function("third derivative of closed-form M", |b| {
        b.iter(|| {
            // fresh tree each time; derivatives memoize per node
            let f = parse(HEISENBERG_M).unwrap();
            f.differentiate(Var::X).differentiate(Var::Y).differentiate(Var::X)
        })
    });
    let m = reduce(&corpus::heisenberg(), &[Point::new(1.0, 0.0, 0.3)]).unwrap().m;
    let tape = Tape::compile([&m]);
    c.bench_function("evaluate pipeline M on tape", |b| {
        b.iter(|| tape.eval(black_box(Point::new(0.5, -0.5, 0.3))).unwrap())
    });
}

fn pipeline(c: &mut Criterion) {
    let grid = corpus::default_grid();
    let mut g = c.benchmark_group("reduce on default grid");
    g.sample_size(20);
    for d in [corpus::heisenberg(), corpus::cartan()] {
        g.bench_function(d.name.clone(), |b| b.iter(|| reduce(black_box(&d), &grid).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, expressions, pipeline);
criterion_main!(benches);
