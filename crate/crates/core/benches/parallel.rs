//! Sequential against rayon-backed evaluation of the sweep workloads.
//!
//! Without the `parallel` feature both arms run on one thread.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use colp::coalgebra::{inj_sweep, lax_sweep, oracle_sweep, SweepBounds};
use colp::fixtures;
use colp::resolution::verify_bridge_all;
use colp::saturation::{check_coherence_with, saturate_with, Bounds};
use colp::syntax::{enumerate_atoms, parse_atom_indexed, parse_program, Program};
use colp::Exec;

const ARMS: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn listnat() -> Program {
    parse_program(fixtures::LISTNAT).unwrap()
}

fn saturation(c: &mut Criterion) {
    let p = listnat();
    let root = parse_atom_indexed("list(x1)", 1, 0).unwrap();
    let bounds = Bounds::default_for(1);
    let table = saturate_with(&p, &root, bounds, Exec::Sequential);
    let mut g = c.benchmark_group("saturation");
    g.sample_size(10);
    for (name, exec) in ARMS {
        g.bench_with_input(BenchmarkId::new("saturate", name), &exec, |b, &e| {
            b.iter(|| saturate_with(&p, black_box(&root), bounds, e))
        });
        g.bench_with_input(BenchmarkId::new("coherence", name), &exec, |b, &e| {
            b.iter(|| check_coherence_with(black_box(&table), bounds, e))
        });
    }
    g.finish();
}

fn sweeps(c: &mut Criterion) {
    let p = listnat();
    let gc = parse_program(fixtures::GC).unwrap();
    let lax = SweepBounds {
        max_atom_context: 2,
        max_atom_depth: 1,
        max_sub_context: 2,
        max_sub_depth: 1,
        tree_depth: 3,
    };
    let goals: Vec<_> = (0..=2)
        .flat_map(|n| enumerate_atoms(&p.signature, n, 1))
        .collect();
    let mut g = c.benchmark_group("sweeps");
    g.sample_size(10);
    for (name, exec) in ARMS {
        g.bench_with_input(BenchmarkId::new("oracle", name), &exec, |b, &e| {
            b.iter(|| oracle_sweep(&p, 2, 1, 4, e))
        });
        g.bench_with_input(BenchmarkId::new("lax", name), &exec, |b, &e| {
            b.iter(|| lax_sweep(&p, lax, e))
        });
        g.bench_with_input(BenchmarkId::new("inj", name), &exec, |b, &e| {
            b.iter(|| inj_sweep(&gc, 2, 1, 4, 3, e))
        });
        g.bench_with_input(BenchmarkId::new("bridge", name), &exec, |b, &e| {
            b.iter(|| verify_bridge_all(&p, &goals, 8, e))
        });
    }
    g.finish();
}

criterion_group!(benches, saturation, sweeps);
criterion_main!(benches);
