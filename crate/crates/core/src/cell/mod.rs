//! Machine-cell formation: placing machines and route families into
//! manufacturing cells.
//!
//! The quality of a placement is its utilization: for every machine and
//! every family sharing a cell, the number of that family's routes that
//! visit the machine. Machines and families each go to exactly one cell
//! and no cell may hold more than a configured number of machines.

mod heuristic;
mod qap;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::family::FamilySolution;
use crate::model::{Instance, MachineId};

pub use heuristic::{
    assign_machines_by_usage, merge_cells, merge_contained_families, run_heuristic,
    MachineAssignment, MergedFamilies,
};
pub use qap::{solve_qap, solve_qap_with, QapOptions};

/// Cell count and per-cell machine capacity limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellConfig {
    /// Number of cells available, C.
    pub max_cells: usize,
    /// Machine capacity of each cell.
    pub max_per_cell: usize,
}

impl CellConfig {
    /// A configuration must offer room for every machine.
    pub fn validate(&self, machine_count: usize) -> Result<(), CellError> {
        if self.max_cells == 0
            || self.max_per_cell == 0
            || self.max_cells.saturating_mul(self.max_per_cell) < machine_count
        {
            return Err(CellError::InfeasibleConfig {
                max_cells: self.max_cells,
                max_per_cell: self.max_per_cell,
                machines: machine_count,
            });
        }
        Ok(())
    }
}

/// Usage factors: `get(m, r)` counts the routes of family `r` that visit
/// machine `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageMatrix {
    machines: usize,
    families: usize,
    data: Vec<u32>,
}

impl UsageMatrix {
    pub fn machine_count(&self) -> usize {
        self.machines
    }

    pub fn family_count(&self) -> usize {
        self.families
    }

    /// Usage of machine `m` by family `r` (1-based family index).
    pub fn get(&self, m: MachineId, r: usize) -> u32 {
        assert!(r >= 1 && r <= self.families, "family index out of range");
        self.data[m.index() * self.families + (r - 1)]
    }

    /// Builds a matrix from rows (machines) of family columns, mainly for
    /// tests and standalone cell-formation runs.
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Self {
        let machines = rows.len();
        let families = rows.first().map_or(0, Vec::len);
        assert!(
            rows.iter().all(|r| r.len() == families),
            "ragged usage rows"
        );
        UsageMatrix {
            machines,
            families,
            data: rows.into_iter().flatten().collect(),
        }
    }
}

/// Usage factors of machines by the given route families.
pub fn usage_factors(instance: &Instance, families: &FamilySolution) -> UsageMatrix {
    usage_from_groups(instance, &families.families)
}

/// Usage factors for an explicit family list (used after family merges).
pub(crate) fn usage_from_groups(
    instance: &Instance,
    groups: &[std::collections::BTreeSet<crate::model::RouteId>],
) -> UsageMatrix {
    let machines = instance.machine_count();
    let families = groups.len();
    let mut data = vec![0u32; machines * families];
    for (r, group) in groups.iter().enumerate() {
        for &route in group {
            for &m in instance.machines_of(route) {
                data[m.index() * families + r] += 1;
            }
        }
    }
    UsageMatrix {
        machines,
        families,
        data,
    }
}

/// A placement of machines and families into cells (1-based cell ids).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSolution {
    pub machine_cell: BTreeMap<MachineId, usize>,
    /// Family index (1-based, in family-solution order) to cell.
    pub family_cell: BTreeMap<usize, usize>,
    /// Total usage realized inside cells.
    pub utilization: u64,
    /// Number of cells holding at least one machine or family.
    pub cell_count_used: usize,
}

impl CellSolution {
    /// Cells as (machines, families) groups keyed by nothing, for
    /// label-independent comparison of two placements.
    pub fn canonical_groups(&self) -> Vec<(Vec<MachineId>, Vec<usize>)> {
        let mut cells: BTreeMap<usize, (Vec<MachineId>, Vec<usize>)> = BTreeMap::new();
        for (&m, &c) in &self.machine_cell {
            cells.entry(c).or_default().0.push(m);
        }
        for (&r, &c) in &self.family_cell {
            cells.entry(c).or_default().1.push(r);
        }
        let mut groups: Vec<_> = cells.into_values().collect();
        groups.sort();
        groups
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CellError {
    #[error(
        "{max_cells} cell(s) of capacity {max_per_cell} cannot hold {machines} machine(s)"
    )]
    InfeasibleConfig {
        max_cells: usize,
        max_per_cell: usize,
        machines: usize,
    },
    /// The placement enumeration cap was reached. `incumbent` is the best
    /// placement found, `bound` a simple upper bound on the optimum.
    #[error("placement enumeration cap reached before optimality was proven (bound {bound})")]
    Timeout {
        incumbent: Option<CellSolution>,
        bound: u64,
    },
    /// The merge heuristic filled a cell past the configured capacity.
    #[error("heuristic filled cell {cell} with {machines} machines, capacity {cap}")]
    CellCapExceeded {
        cell: usize,
        machines: usize,
        cap: usize,
    },
    /// The merge heuristic ended with more cells than configured.
    #[error("heuristic ended with {cells} cells, limit {max_cells}")]
    TooManyCells { cells: usize, max_cells: usize },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissimilarity::dissimilarity_matrix;
    use crate::family::solve_family_formation;
    use crate::model::Instance;

    #[test]
    fn config_feasibility() {
        assert!(CellConfig {
            max_cells: 2,
            max_per_cell: 2
        }
        .validate(4)
        .is_ok());
        let err = CellConfig {
            max_cells: 2,
            max_per_cell: 1
        }
        .validate(4)
        .unwrap_err();
        assert!(matches!(err, CellError::InfeasibleConfig { .. }));
        assert!(CellConfig {
            max_cells: 0,
            max_per_cell: 5
        }
        .validate(0)
        .is_err());
    }

    #[test]
    fn usage_counts_routes_per_family_and_machine() {
        // Four single-route parts pairing into families {1,2} and {3,4}.
        // Machine 2 serves both routes of both families.
        let instance = Instance::from_machine_sets(
            3,
            &[
                vec![vec![1, 2]],
                vec![vec![1, 2]],
                vec![vec![2, 3]],
                vec![vec![2, 3]],
            ],
        )
        .unwrap();
        let d = dissimilarity_matrix(&instance);
        let formation = solve_family_formation(&instance, &d).unwrap();
        assert_eq!(formation.families.families.len(), 2);
        let u = usage_factors(&instance, &formation.families);
        assert_eq!(u.machine_count(), 3);
        assert_eq!(u.family_count(), 2);
        let m = MachineId::new;
        assert_eq!(u.get(m(1), 1), 2);
        assert_eq!(u.get(m(2), 1), 2);
        assert_eq!(u.get(m(3), 1), 0);
        assert_eq!(u.get(m(1), 2), 0);
        assert_eq!(u.get(m(2), 2), 2);
        assert_eq!(u.get(m(3), 2), 2);
    }

    #[test]
    fn canonical_groups_ignore_cell_labels() {
        let m = MachineId::new;
        let a = CellSolution {
            machine_cell: [(m(1), 1), (m(2), 2)].into(),
            family_cell: [(1, 1), (2, 2)].into(),
            utilization: 5,
            cell_count_used: 2,
        };
        let b = CellSolution {
            machine_cell: [(m(1), 2), (m(2), 1)].into(),
            family_cell: [(1, 2), (2, 1)].into(),
            utilization: 5,
            cell_count_used: 2,
        };
        assert_eq!(a.canonical_groups(), b.canonical_groups());
    }
}
