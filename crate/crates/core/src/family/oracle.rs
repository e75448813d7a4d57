//! Exhaustive reference solver for family formation.
//!
//! Enumerates every way of picking one route per part and, for each pick,
//! every successor assignment over the picked routes (skipping
//! self-successors, with partial-cost pruning). Shares nothing with the
//! branch-and-bound path except the dissimilarity values, so agreement
//! between the two is meaningful evidence of correctness.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::dissimilarity::DissimilarityMatrix;
use crate::model::{Instance, PartId, RouteId};

use super::FamilySolution;

/// Enumeration limits: the oracle refuses instances where the number of
/// route picks or the part count makes exhaustion pointless.
const MAX_SELECTIONS: u128 = 100_000;
const MAX_PARTS: usize = 9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(
        "instance too large for exhaustive search: {parts} parts, {selections} route picks \
         (limits: {MAX_PARTS} parts, {MAX_SELECTIONS} picks)"
    )]
    InstanceTooLarge { parts: usize, selections: u128 },
}

/// Finds the optimal family solution by exhaustive enumeration.
///
/// Ties break exactly as in the exact solver: smallest per-part route
/// choice vector first, then smallest successor assignment.
pub fn brute_force_families(
    instance: &Instance,
    d: &DissimilarityMatrix,
) -> Result<FamilySolution, OracleError> {
    let k = instance.part_count();
    let selections: u128 = instance
        .parts()
        .map(|p| instance.routes_per_part(p) as u128)
        .product();
    if k > MAX_PARTS || selections > MAX_SELECTIONS {
        return Err(OracleError::InstanceTooLarge {
            parts: k,
            selections,
        });
    }

    let candidates: Vec<Vec<RouteId>> = instance
        .parts()
        .map(|p| {
            let mut routes = instance.routes_of(p).to_vec();
            routes.sort();
            routes
        })
        .collect();

    let mut best: Option<(u64, Vec<RouteId>, Vec<usize>, Vec<RouteId>)> = None;

    let mut odometer = vec![0usize; k];
    loop {
        let picked: Vec<RouteId> = odometer
            .iter()
            .enumerate()
            .map(|(p, &c)| candidates[p][c])
            .collect();
        let mut routes = picked.clone();
        routes.sort();

        let cutoff = best.as_ref().map_or(u64::MAX, |(v, ..)| *v);
        if let Some((value, succ)) = best_cycle_cover(&routes, d, cutoff) {
            best = Some((value, picked, succ, routes));
        }

        // Advance the odometer: last part fastest.
        let mut pos = k;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < candidates[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
        if odometer.iter().all(|&c| c == 0) {
            break;
        }
    }

    let (objective, picked, succ, routes) =
        best.expect("two or more parts always admit a successor cycle");

    let selected_route: BTreeMap<PartId, RouteId> = picked
        .iter()
        .enumerate()
        .map(|(p, &r)| (PartId::new(p + 1), r))
        .collect();

    let mut families: Vec<BTreeSet<RouteId>> = Vec::new();
    let mut seen = vec![false; routes.len()];
    for start in 0..routes.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = BTreeSet::new();
        let mut pos = start;
        while !seen[pos] {
            seen[pos] = true;
            cycle.insert(routes[pos]);
            pos = succ[pos];
        }
        families.push(cycle);
    }
    families.sort_by_key(|f| *f.first().expect("cycles are nonempty"));

    Ok(FamilySolution {
        selected_route,
        families,
        objective,
    })
}

/// Cheapest successor assignment over `routes` (each position must map to
/// a different position with a defined dissimilarity), or `None` when no
/// assignment beats `cutoff`. Enumerates positions in order and candidate
/// successors ascending, so the first assignment reaching the best value
/// is the lexicographically smallest one.
fn best_cycle_cover(
    routes: &[RouteId],
    d: &DissimilarityMatrix,
    cutoff: u64,
) -> Option<(u64, Vec<usize>)> {
    struct Enumeration<'a> {
        routes: &'a [RouteId],
        d: &'a DissimilarityMatrix,
        used: Vec<bool>,
        succ: Vec<usize>,
        best: Option<(u64, Vec<usize>)>,
        cutoff: u64,
    }

    impl Enumeration<'_> {
        fn step(&mut self, pos: usize, cost: u64) {
            if pos == self.routes.len() {
                self.cutoff = cost;
                self.best = Some((cost, self.succ.clone()));
                return;
            }
            for next in 0..self.routes.len() {
                if self.used[next] {
                    continue;
                }
                let Some(step) = self.d.get(self.routes[pos], self.routes[next]) else {
                    continue;
                };
                let total = cost + u64::from(step);
                if total >= self.cutoff {
                    continue;
                }
                self.used[next] = true;
                self.succ[pos] = next;
                self.step(pos + 1, total);
                self.used[next] = false;
            }
        }
    }

    let mut search = Enumeration {
        routes,
        d,
        used: vec![false; routes.len()],
        succ: vec![0; routes.len()],
        best: None,
        cutoff,
    };
    search.step(0, 0);
    search.best
}
