//! Exact cell formation.
//!
//! Maximizes utilization over all placements of families and machines
//! into cells. Families are assigned first: cells of equal capacity are
//! interchangeable, so only canonical assignments are enumerated (each
//! family goes to an already-used cell or the next fresh one). For every
//! family assignment the machines are placed by an exact transportation
//! step: each cell contributes `max_per_cell` unit slots, machine-to-slot
//! profits follow from the families in the slot's cell, and a min-cost
//! assignment on the negated profits yields the optimal placement.

use std::collections::BTreeMap;

use crate::assignment::{solve_assignment, FORBIDDEN};
use crate::model::MachineId;

use super::{CellConfig, CellError, CellSolution, UsageMatrix};

/// Resource cap for the enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QapOptions {
    /// Maximum number of family-to-cell assignments to evaluate before
    /// giving up with [`CellError::Timeout`].
    pub assignment_limit: u64,
}

impl Default for QapOptions {
    fn default() -> Self {
        QapOptions {
            assignment_limit: 50_000_000,
        }
    }
}

/// Exact cell formation with default options.
pub fn solve_qap(u: &UsageMatrix, config: CellConfig) -> Result<CellSolution, CellError> {
    solve_qap_with(u, config, QapOptions::default())
}

/// Exact cell formation.
///
/// The result is canonical: among maximum-utilization placements, the
/// family-to-cell vector is first-use ordered (family 1 in cell 1, each
/// later family in a seen cell or the next unseen one) and smallest in
/// enumeration order, and the machine placement vector is
/// lexicographically smallest cell-wise for that family assignment.
pub fn solve_qap_with(
    u: &UsageMatrix,
    config: CellConfig,
    options: QapOptions,
) -> Result<CellSolution, CellError> {
    let machines = u.machine_count();
    let families = u.family_count();
    config.validate(machines)?;

    // Machines occupy at most `machines` distinct cells and families at
    // most `families`, and both prefer low cell ids, so extra cells past
    // that can never appear in a canonical optimum.
    let cells = config.max_cells.min(machines + families).max(1);
    let cap = config.max_per_cell.min(machines.max(1));
    let slots = cells * cap;

    let placement = Placement {
        u,
        machines,
        families,
        cells,
        cap,
        slots,
    };

    let mut enumerated = 0u64;
    let mut best: Option<(u64, Vec<usize>)> = None;
    let mut timed_out = false;

    // Canonical family-to-cell vectors by restricted growth.
    let mut assign = vec![0usize; families];
    'enumeration: loop {
        enumerated += 1;
        if enumerated > options.assignment_limit {
            timed_out = true;
            break 'enumeration;
        }
        let value = placement.best_value(&assign);
        if best.as_ref().is_none_or(|&(v, _)| value > v) {
            best = Some((value, assign.clone()));
        }

        // Advance to the next restricted-growth vector.
        let mut pos = families;
        loop {
            if pos == 0 {
                break 'enumeration;
            }
            pos -= 1;
            let prefix_max = assign[..pos].iter().copied().max().map_or(0, |m| m + 1);
            let limit = prefix_max.min(cells - 1);
            if assign[pos] < limit {
                assign[pos] += 1;
                for later in assign.iter_mut().skip(pos + 1) {
                    *later = 0;
                }
                continue 'enumeration;
            }
        }
    }

    let solution = best.map(|(value, family_to_cell)| {
        let machine_cell = placement.lex_min_machines(&family_to_cell, value);
        build_solution(&family_to_cell, machine_cell, value)
    });

    if timed_out {
        let bound: u64 = (0..machines)
            .map(|m| {
                (1..=families)
                    .map(|r| u64::from(u.get(MachineId::new(m + 1), r)))
                    .sum::<u64>()
            })
            .sum();
        return Err(CellError::Timeout {
            incumbent: solution,
            bound,
        });
    }
    Ok(solution.expect("at least one family assignment exists"))
}

struct Placement<'a> {
    u: &'a UsageMatrix,
    machines: usize,
    families: usize,
    cells: usize,
    cap: usize,
    slots: usize,
}

impl Placement<'_> {
    fn profit(&self, machine: usize, cell: usize, family_to_cell: &[usize]) -> i64 {
        (0..self.families)
            .filter(|&r| family_to_cell[r] == cell)
            .map(|r| i64::from(self.u.get(MachineId::new(machine + 1), r + 1)))
            .sum()
    }

    /// Optimal utilization for a fixed family assignment.
    fn best_value(&self, family_to_cell: &[usize]) -> u64 {
        let profit: Vec<Vec<i64>> = (0..self.machines)
            .map(|m| {
                (0..self.cells)
                    .map(|c| self.profit(m, c, family_to_cell))
                    .collect()
            })
            .collect();
        let cap = self.cap;
        let cost = |row: usize, slot: usize| -> i64 {
            if row < self.machines {
                -profit[row][slot / cap]
            } else {
                0
            }
        };
        let (total, _) = solve_assignment(self.slots, &cost);
        (-total) as u64
    }

    /// Lexicographically smallest machine-to-cell vector achieving the
    /// optimal utilization for a fixed family assignment.
    fn lex_min_machines(&self, family_to_cell: &[usize], optimum: u64) -> BTreeMap<MachineId, usize> {
        let profit: Vec<Vec<i64>> = (0..self.machines)
            .map(|m| {
                (0..self.cells)
                    .map(|c| self.profit(m, c, family_to_cell))
                    .collect()
            })
            .collect();
        let cap = self.cap;
        let mut fixed: Vec<Option<usize>> = vec![None; self.machines];
        for m in 0..self.machines {
            for candidate in 0..self.cells {
                fixed[m] = Some(candidate);
                let cost = |row: usize, slot: usize| -> i64 {
                    if row >= self.machines {
                        return 0;
                    }
                    let cell = slot / cap;
                    match fixed[row] {
                        Some(fc) if fc != cell => FORBIDDEN,
                        _ => -profit[row][cell],
                    }
                };
                let (total, _) = solve_assignment(self.slots, &cost);
                if total <= 0 && (-total) as u64 == optimum {
                    break;
                }
                fixed[m] = None;
            }
            assert!(fixed[m].is_some(), "an optimal completion always exists");
        }
        fixed
            .into_iter()
            .enumerate()
            .map(|(m, c)| (MachineId::new(m + 1), c.expect("fixed") + 1))
            .collect()
    }
}

fn build_solution(
    family_to_cell: &[usize],
    machine_cell: BTreeMap<MachineId, usize>,
    utilization: u64,
) -> CellSolution {
    let family_cell: BTreeMap<usize, usize> = family_to_cell
        .iter()
        .enumerate()
        .map(|(r, &c)| (r + 1, c + 1))
        .collect();
    let mut used: std::collections::BTreeSet<usize> = machine_cell.values().copied().collect();
    used.extend(family_cell.values().copied());
    CellSolution {
        machine_cell,
        family_cell,
        utilization,
        cell_count_used: used.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(c: usize, cap: usize) -> CellConfig {
        CellConfig {
            max_cells: c,
            max_per_cell: cap,
        }
    }

    #[test]
    fn one_cell_takes_everything() {
        let u = UsageMatrix::from_rows(vec![vec![1, 2], vec![3, 0], vec![0, 4]]);
        let solution = solve_qap(&u, config(1, 3)).unwrap();
        assert_eq!(solution.utilization, 1 + 2 + 3 + 4);
        assert!(solution.machine_cell.values().all(|&c| c == 1));
        assert!(solution.family_cell.values().all(|&c| c == 1));
        assert_eq!(solution.cell_count_used, 1);
    }

    #[test]
    fn splits_two_clear_blocks() {
        // Machines 1,2 belong with family 1; machines 3,4 with family 2.
        let u = UsageMatrix::from_rows(vec![
            vec![5, 0],
            vec![4, 1],
            vec![0, 6],
            vec![1, 3],
        ]);
        let solution = solve_qap(&u, config(2, 2)).unwrap();
        assert_eq!(solution.utilization, 5 + 4 + 6 + 3);
        assert_eq!(solution.family_cell[&1], 1);
        assert_eq!(solution.family_cell[&2], 2);
        let m = MachineId::new;
        assert_eq!(solution.machine_cell[&m(1)], 1);
        assert_eq!(solution.machine_cell[&m(2)], 1);
        assert_eq!(solution.machine_cell[&m(3)], 2);
        assert_eq!(solution.machine_cell[&m(4)], 2);
    }

    #[test]
    fn capacity_forces_the_weakest_machine_out() {
        // All machines prefer family 1's cell, but only two fit.
        let u = UsageMatrix::from_rows(vec![vec![5, 0], vec![4, 0], vec![3, 2]]);
        let solution = solve_qap(&u, config(2, 2)).unwrap();
        // Machines 1,2 with family 1; machine 3 lands with family 2.
        assert_eq!(solution.utilization, 5 + 4 + 2);
        assert_eq!(solution.family_cell[&1], 1);
        assert_eq!(solution.family_cell[&2], 2);
        let m = MachineId::new;
        assert_eq!(solution.machine_cell[&m(1)], 1);
        assert_eq!(solution.machine_cell[&m(2)], 1);
        assert_eq!(solution.machine_cell[&m(3)], 2);
    }

    #[test]
    fn zero_usage_machines_park_in_the_first_open_cell() {
        let u = UsageMatrix::from_rows(vec![vec![0, 0], vec![2, 0], vec![0, 2]]);
        let solution = solve_qap(&u, config(3, 1)).unwrap();
        assert_eq!(solution.utilization, 4);
        let m = MachineId::new;
        // Cells 1 and 2 are full with the useful machines; the idle
        // machine takes the smallest cell with room.
        assert_eq!(solution.machine_cell[&m(2)], 1);
        assert_eq!(solution.machine_cell[&m(3)], 2);
        assert_eq!(solution.machine_cell[&m(1)], 3);
        assert_eq!(solution.cell_count_used, 3);
    }

    #[test]
    fn infeasible_config_is_rejected() {
        let u = UsageMatrix::from_rows(vec![vec![1], vec![1], vec![1]]);
        let err = solve_qap(&u, config(1, 2)).unwrap_err();
        assert!(matches!(err, CellError::InfeasibleConfig { .. }));
    }

    #[test]
    fn assignment_cap_times_out_with_incumbent_and_bound() {
        let u = UsageMatrix::from_rows(vec![vec![2, 1], vec![1, 2]]);
        let err = solve_qap_with(
            &u,
            config(2, 2),
            QapOptions {
                assignment_limit: 1,
            },
        )
        .unwrap_err();
        match err {
            CellError::Timeout { incumbent, bound } => {
                let inc = incumbent.expect("one assignment was evaluated");
                assert!(inc.utilization <= bound);
                assert_eq!(bound, 6);
            }
            other => panic!("expected timeout, got {other:?}"),
        }
    }

    #[test]
    fn empty_cells_are_allowed_when_they_help() {
        // Single-machine cells force the families apart; the third cell
        // stays empty without penalty.
        let u = UsageMatrix::from_rows(vec![vec![3, 0], vec![0, 3]]);
        let solution = solve_qap(&u, config(3, 1)).unwrap();
        assert_eq!(solution.utilization, 6);
        assert_eq!(solution.cell_count_used, 2);
    }
}
