//! Dissimilarity between process routes of distinct parts.
//!
//! The dissimilarity of two routes is the Hamming distance between their
//! incidence rows: the number of machines visited by exactly one of the two.
//! It is defined only for routes of distinct parts; a pair from the same
//! part has no value at all (the grouping model never compares them).

use std::collections::BTreeSet;

use itertools::Itertools;
use thiserror::Error;

use crate::model::{Instance, RouteId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DissimilarityError {
    #[error("routes {i} and {j} belong to the same part; dissimilarity is undefined")]
    SamePartPair { i: usize, j: usize },
    #[error("a route family needs at least 2 routes, got {size}")]
    FamilyTooSmall { size: usize },
}

/// Pairwise dissimilarities for all cross-part route pairs.
///
/// Pairs from the same part (and the diagonal) are absent, not zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DissimilarityMatrix {
    routes: usize,
    entries: Vec<Option<u32>>,
}

impl DissimilarityMatrix {
    pub fn route_count(&self) -> usize {
        self.routes
    }

    /// The dissimilarity of routes `i` and `j`, or `None` when the pair is
    /// from one part (or `i == j`).
    pub fn get(&self, i: RouteId, j: RouteId) -> Option<u32> {
        self.entries[i.index() * self.routes + j.index()]
    }
}

/// Hamming distance between the incidence rows of two routes of distinct
/// parts.
pub fn route_dissimilarity(
    instance: &Instance,
    i: RouteId,
    j: RouteId,
) -> Result<u32, DissimilarityError> {
    if instance.part_of(i) == instance.part_of(j) {
        return Err(DissimilarityError::SamePartPair {
            i: i.get(),
            j: j.get(),
        });
    }
    let d = instance
        .machines()
        .filter(|&m| instance.uses(i, m) != instance.uses(j, m))
        .count();
    Ok(d as u32)
}

/// Computes all defined pairwise dissimilarities.
pub fn dissimilarity_matrix(instance: &Instance) -> DissimilarityMatrix {
    let n = instance.route_count();
    let mut entries = vec![None; n * n];
    for i in instance.routes() {
        for j in instance.routes() {
            if i != j && instance.part_of(i) != instance.part_of(j) {
                let d = route_dissimilarity(instance, i, j).expect("cross-part pair");
                entries[i.index() * n + j.index()] = Some(d);
            }
        }
    }
    DissimilarityMatrix { routes: n, entries }
}

/// The dissimilarity of a route family: the minimum, over all directed
/// cyclic orders of the family's routes, of the sum of dissimilarities
/// between cyclically adjacent routes.
///
/// All routes must come from distinct parts. For a family of two the value
/// is twice the pair's dissimilarity (the cycle visits the pair both ways).
/// The search enumerates every distinct cyclic order, anchoring the
/// smallest serial number so each order is counted once.
pub fn family_cyclic_dissimilarity(
    d: &DissimilarityMatrix,
    family: &BTreeSet<RouteId>,
) -> Result<u32, DissimilarityError> {
    let members: Vec<RouteId> = family.iter().copied().collect();
    if members.len() < 2 {
        return Err(DissimilarityError::FamilyTooSmall {
            size: members.len(),
        });
    }
    let pair = |a: RouteId, b: RouteId| {
        d.get(a, b).ok_or(DissimilarityError::SamePartPair {
            i: a.get(),
            j: b.get(),
        })
    };
    // Validate every pair up front so an undefined pair is reported even
    // when some cyclic orders would not place it adjacently.
    for (i, &x) in members.iter().enumerate() {
        for &y in &members[i + 1..] {
            pair(x, y)?;
        }
    }

    let anchor = members[0];
    let rest = &members[1..];
    let mut best = u32::MAX;
    let k = rest.len();
    for perm in rest.iter().copied().permutations(k) {
        let mut total = pair(anchor, perm[0])?;
        for w in perm.windows(2) {
            total += pair(w[0], w[1])?;
        }
        total += pair(perm[k - 1], anchor)?;
        best = best.min(total);
    }
    Ok(best)
}
