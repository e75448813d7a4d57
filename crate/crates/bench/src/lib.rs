//! Instance generators shared by the benchmarks and by randomized tests
//! elsewhere in the workspace.

use cellform::{Instance, RawInstance};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// A random instance: `parts` parts with 1..=`max_routes` routes each,
/// every route visiting a nonempty random subset of `machines` machines.
/// Identical seeds give identical instances.
pub fn random_instance(seed: u64, parts: usize, max_routes: usize, machines: usize) -> Instance {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut part_routes = Vec::with_capacity(parts);
    let mut incidence = Vec::new();
    let mut next_route = 1;
    for _ in 0..parts {
        let count = rng.random_range(1..=max_routes);
        let mut routes = Vec::with_capacity(count);
        for _ in 0..count {
            routes.push(next_route);
            next_route += 1;
            let mut row = vec![false; machines];
            for cell in row.iter_mut() {
                *cell = rng.random_bool(0.4);
            }
            if !row.iter().any(|&used| used) {
                row[rng.random_range(0..machines)] = true;
            }
            incidence.push(row);
        }
        part_routes.push(routes);
    }
    cellform::validate_instance(RawInstance {
        machine_count: machines,
        part_routes,
        incidence,
    })
    .expect("generated instances are well formed")
}

/// A structured instance with two natural machine groups and `parts`
/// parts alternating between them, two routes per part. Scales linearly
/// for throughput benchmarks without randomness.
pub fn banded_instance(parts: usize, machines: usize) -> Instance {
    assert!(machines >= 4, "need at least two machines per band");
    let half = machines / 2;
    let band = |start: usize, end: usize, offset: usize| -> Vec<usize> {
        (start..end).map(|m| m % machines + 1).skip(offset).take(3).collect()
    };
    let mut per_part = Vec::with_capacity(parts);
    for part in 0..parts {
        let base = if part % 2 == 0 { 0 } else { half };
        per_part.push(vec![
            band(base, base + half, 0),
            band(base, base + half, 1),
        ]);
    }
    Instance::from_machine_sets(machines, &per_part).expect("banded instances are well formed")
}
