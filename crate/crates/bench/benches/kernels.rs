use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use frontburn_bench::two_layer_fixture;
use frontburn_core::inequality::{fineq_product, random_admissible_profile};
use frontburn_core::spreading::linear_spreading_speed;
use frontburn_core::tridiag::{ThomasFactor, Tridiagonal};
use frontburn_core::{burning_rate_reaction, LayerSystem, Solver, SolverConfig};

fn thomas(c: &mut Criterion) {
    let n = 20_000;
    let m = Tridiagonal {
        lower: vec![-0.3; n],
        diag: vec![1.7; n],
        upper: vec![-0.4; n],
    };
    let f = m.factor().unwrap();
    let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.01).sin()).collect();
    let mut g = c.benchmark_group("thomas_20k");
    g.bench_function("single", |b| {
        b.iter_batched_ref(|| rhs.clone(), |x| f.solve_in_place(x), BatchSize::SmallInput)
    });
    g.bench_function("pair", |b| {
        b.iter_batched_ref(
            || (rhs.clone(), rhs.clone()),
            |(x, y)| ThomasFactor::solve_pair_in_place(&f, x, &f, y),
            BatchSize::SmallInput,
        )
    });
    g.finish();
}

fn solver_step(c: &mut Criterion) {
    let (sys, state, target) = two_layer_fixture(20.0, 0.5, 0.05);
    let cfg = SolverConfig {
        recenter_target: target,
        ..SolverConfig::default()
    };
    let mut solver = Solver::new(&sys, cfg, state.grid_spacing, state.n_points()).unwrap();
    let mut st = state.clone();
    c.bench_function("step_A20_kappa0.5", |b| {
        b.iter(|| {
            // Restart before the front can reach the edge of the fixed window.
            if st.time > 2.0 {
                st = state.clone();
            }
            solver.step_in_place(&mut st).unwrap()
        })
    });
    c.bench_function("burning_rate_A20_kappa0.5", |b| {
        b.iter(|| burning_rate_reaction(&sys, black_box(&state)))
    });
}

fn fineq(c: &mut Criterion) {
    let p = random_admissible_profile(17, 1e-3).unwrap();
    c.bench_function("fineq_product_dx1e-3", |b| {
        b.iter(|| fineq_product(black_box(&p)))
    });
}

fn spreading(c: &mut Criterion) {
    let sys = LayerSystem::alternating(4, 30.0, 0.5).unwrap();
    c.bench_function("spreading_speed_4_layers", |b| {
        b.iter(|| linear_spreading_speed(black_box(&sys)))
    });
}

criterion_group!(benches, thomas, solver_step, fineq, spreading);
criterion_main!(benches);
