use cellform::{
    build_network, dissimilarity_matrix, run_heuristic, solve_family_formation, solve_qap,
    usage_factors, CellConfig,
};
use cellform_bench::{banded_instance, random_instance};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn family_formation(c: &mut Criterion) {
    let mut group = c.benchmark_group("family_formation");
    for &parts in &[4usize, 6, 8] {
        let instance = random_instance(7, parts, 3, 8);
        let d = dissimilarity_matrix(&instance);
        group.bench_function(format!("random_{parts}_parts"), |b| {
            b.iter(|| solve_family_formation(black_box(&instance), black_box(&d)).unwrap())
        });
    }
    let banded = banded_instance(10, 8);
    let banded_d = dissimilarity_matrix(&banded);
    group.bench_function("banded_10_parts", |b| {
        b.iter(|| solve_family_formation(black_box(&banded), black_box(&banded_d)).unwrap())
    });
    group.finish();
}

fn network_construction(c: &mut Criterion) {
    let instance = random_instance(11, 8, 3, 10);
    let d = dissimilarity_matrix(&instance);
    c.bench_function("build_network_8_parts", |b| {
        b.iter(|| build_network(black_box(&instance), black_box(&d)))
    });
}

fn cell_formation(c: &mut Criterion) {
    let mut group = c.benchmark_group("cell_formation");
    for &parts in &[6usize, 10] {
        let instance = banded_instance(parts, 8);
        let d = dissimilarity_matrix(&instance);
        let families = solve_family_formation(&instance, &d).unwrap().families;
        let usage = usage_factors(&instance, &families);
        // Capacity equal to the machine count keeps every merge legal, so
        // the heuristic cannot fail and the two solvers stay comparable.
        let config = CellConfig {
            max_cells: 2,
            max_per_cell: 8,
        };
        group.bench_function(format!("qap_{parts}_parts"), |b| {
            b.iter(|| solve_qap(black_box(&usage), black_box(config)).unwrap())
        });
        group.bench_function(format!("heuristic_{parts}_parts"), |b| {
            b.iter(|| run_heuristic(black_box(&instance), black_box(&families), config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, family_formation, network_construction, cell_formation);
criterion_main!(benches);
