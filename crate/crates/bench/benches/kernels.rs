use criterion::{criterion_group, criterion_main, Criterion};
use locc_bench::{dense, entry};
use locc_core::{
    cascading_partition, numeric_rank, search_protocols, FirstParty, ProtocolClass, SearchSpec,
    Tolerance,
};
use std::hint::black_box;

fn rank(c: &mut Criterion) {
    let tol = Tolerance::default();
    for n in [4, 16, 36] {
        let m = dense(n);
        c.bench_function(&format!("numeric_rank {n}x{n}"), |b| b.iter(|| numeric_rank(black_box(&m), tol)));
    }
}

fn verify(c: &mut Criterion) {
    let tol = Tolerance::default();
    for name in ["exstates-4x4", "beat-schmidt-5x5", "appc-threestates"] {
        let e = entry(name);
        let t = e.tree().unwrap().clone();
        c.bench_function(&format!("verify {name}"), |b| {
            b.iter(|| t.verify_deterministic(black_box(&e.state_set), 1, tol).unwrap())
        });
    }
}

fn partition(c: &mut Criterion) {
    let tol = Tolerance::default();
    let e = entry("ccsp-4x6");
    c.bench_function("cascading_partition ccsp", |b| {
        b.iter(|| cascading_partition(black_box(&e.state_set), FirstParty::Auto, tol))
    });
}

fn search(c: &mut Criterion) {
    let tol = Tolerance::default();
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    for (name, class, r) in [
        ("exstates-4x4", ProtocolClass::P0, 2),
        ("yu-3x3", ProtocolClass::P2, 2),
        ("bennett9", ProtocolClass::P2, 1),
    ] {
        let e = entry(name);
        let spec = SearchSpec::new(class, r, 4);
        g.bench_function(name, |b| b.iter(|| search_protocols(black_box(&e.state_set), &spec, tol).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, rank, verify, partition, search);
criterion_main!(benches);
