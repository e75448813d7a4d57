//! Fast three-step cell formation.
//!
//! 1. Families whose machine sets contain one another are merged: a
//!    family visiting a subset of another's machines can share its cell
//!    at no cost.
//! 2. Every machine joins the merged family using it most.
//! 3. Starting from one cell per merged family, cells are merged while
//!    there are more of them than allowed, always joining the pair with
//!    the heaviest traffic between them that still fits the capacity.
//!
//! The result is scored exactly like the exact solver — realized usage
//! of the original families inside their cells — so the two are directly
//! comparable.

use std::collections::{BTreeMap, BTreeSet};

use crate::family::FamilySolution;
use crate::model::{Instance, MachineId, RouteId};

use super::{usage_factors, usage_from_groups, CellConfig, CellError, CellSolution, UsageMatrix};

/// Families after containment merges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergedFamilies {
    /// Each entry is the union of one or more original families.
    pub families: Vec<BTreeSet<RouteId>>,
    /// Index into `families` for every original family (0-based on both
    /// sides).
    pub origin: Vec<usize>,
}

/// Merges families whose machine sets are contained in one another.
///
/// Pairs are examined in ascending index order and the scan restarts
/// after every merge, so a chain of containments collapses into one
/// family. The earlier index survives a merge.
pub fn merge_contained_families(
    instance: &Instance,
    families: &FamilySolution,
) -> MergedFamilies {
    let mut groups: Vec<(BTreeSet<RouteId>, BTreeSet<MachineId>, Vec<usize>)> = families
        .families
        .iter()
        .enumerate()
        .map(|(idx, routes)| {
            let machines = routes
                .iter()
                .flat_map(|&r| instance.machines_of(r).iter().copied())
                .collect();
            (routes.clone(), machines, vec![idx])
        })
        .collect();
    'scan: loop {
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let (mi, mj) = (&groups[i].1, &groups[j].1);
                if mi.is_subset(mj) || mj.is_subset(mi) {
                    let (routes, machines, members) = groups.remove(j);
                    groups[i].0.extend(routes);
                    groups[i].1.extend(machines);
                    groups[i].2.extend(members);
                    continue 'scan;
                }
            }
        }
        break;
    }
    let mut origin = vec![0; families.families.len()];
    for (k, (_, _, members)) in groups.iter().enumerate() {
        for &idx in members {
            origin[idx] = k;
        }
    }
    MergedFamilies {
        families: groups.into_iter().map(|(routes, _, _)| routes).collect(),
        origin,
    }
}

/// Machines keyed to the merged family each one serves most.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineAssignment {
    /// Merged family index (1-based) per machine.
    pub machine_family: BTreeMap<MachineId, usize>,
    /// Machines no family uses; they default to family 1 and likely
    /// deserve a second look by the planner.
    pub orphans: Vec<MachineId>,
}

/// Assigns every machine to the family with the highest usage of it,
/// breaking ties toward the lower family index.
pub fn assign_machines_by_usage(u: &UsageMatrix) -> MachineAssignment {
    let mut machine_family = BTreeMap::new();
    let mut orphans = Vec::new();
    for m in (1..=u.machine_count()).map(MachineId::new) {
        let mut best = (0u32, 1usize);
        for r in 1..=u.family_count() {
            let usage = u.get(m, r);
            if usage > best.0 {
                best = (usage, r);
            }
        }
        if best.0 == 0 {
            orphans.push(m);
        }
        machine_family.insert(m, best.1);
    }
    MachineAssignment {
        machine_family,
        orphans,
    }
}

/// Usage of `machines` by the merged families `fams` (0-based indices).
fn traffic(u: &UsageMatrix, fams: &[usize], machines: &[MachineId]) -> u64 {
    let mut total = 0;
    for &f in fams {
        for &m in machines {
            total += u64::from(u.get(m, f + 1));
        }
    }
    total
}

/// Reduces one-cell-per-family to at most `max_cells` cells by greedy
/// merging, then scores the result over the original families.
///
/// While too many cells remain, the pair exchanging the most work that
/// still fits `max_per_cell` is merged (ties go to the lowest pair). If
/// no pair fits, [`CellError::TooManyCells`] is returned; a cell
/// overfilled by the machine assignment itself surfaces as
/// [`CellError::CellCapExceeded`].
pub fn merge_cells(
    instance: &Instance,
    families: &FamilySolution,
    merged: &MergedFamilies,
    assignment: &MachineAssignment,
    config: CellConfig,
) -> Result<CellSolution, CellError> {
    let u_merged = usage_from_groups(instance, &merged.families);
    let mut cells: Vec<(Vec<usize>, Vec<MachineId>)> = (0..merged.families.len())
        .map(|k| (vec![k], Vec::new()))
        .collect();
    for (&m, &r) in &assignment.machine_family {
        cells[r - 1].1.push(m);
    }

    while cells.len() > config.max_cells {
        let mut pick: Option<(u64, usize, usize)> = None;
        for i in 0..cells.len() {
            for j in i + 1..cells.len() {
                if cells[i].1.len() + cells[j].1.len() > config.max_per_cell {
                    continue;
                }
                let moved = traffic(&u_merged, &cells[i].0, &cells[j].1)
                    + traffic(&u_merged, &cells[j].0, &cells[i].1);
                if pick.map_or(true, |(best, _, _)| moved > best) {
                    pick = Some((moved, i, j));
                }
            }
        }
        let Some((_, i, j)) = pick else {
            return Err(CellError::TooManyCells {
                cells: cells.len(),
                max_cells: config.max_cells,
            });
        };
        let (fams, machines) = cells.remove(j);
        cells[i].0.extend(fams);
        cells[i].1.extend(machines);
    }

    for (c, (_, machines)) in cells.iter().enumerate() {
        if machines.len() > config.max_per_cell {
            return Err(CellError::CellCapExceeded {
                cell: c + 1,
                machines: machines.len(),
                cap: config.max_per_cell,
            });
        }
    }

    let mut merged_cell = vec![0usize; merged.families.len()];
    let mut machine_cell = BTreeMap::new();
    for (c, (fams, machines)) in cells.iter().enumerate() {
        for &f in fams {
            merged_cell[f] = c + 1;
        }
        for &m in machines {
            machine_cell.insert(m, c + 1);
        }
    }
    let family_cell: BTreeMap<usize, usize> = merged
        .origin
        .iter()
        .enumerate()
        .map(|(orig, &mf)| (orig + 1, merged_cell[mf]))
        .collect();

    let u_orig = usage_factors(instance, families);
    let mut utilization = 0u64;
    for (&m, &mc) in &machine_cell {
        for (&r, &rc) in &family_cell {
            if mc == rc {
                utilization += u64::from(u_orig.get(m, r));
            }
        }
    }
    let used: BTreeSet<usize> = machine_cell
        .values()
        .chain(family_cell.values())
        .copied()
        .collect();
    Ok(CellSolution {
        machine_cell,
        family_cell,
        utilization,
        cell_count_used: used.len(),
    })
}

/// Runs the three heuristic steps back to back.
pub fn run_heuristic(
    instance: &Instance,
    families: &FamilySolution,
    config: CellConfig,
) -> Result<CellSolution, CellError> {
    config.validate(instance.machine_count())?;
    let merged = merge_contained_families(instance, families);
    let usage = usage_from_groups(instance, &merged.families);
    let assignment = assign_machines_by_usage(&usage);
    merge_cells(instance, families, &merged, &assignment, config)
}
