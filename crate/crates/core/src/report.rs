//! Block-diagonal presentation of a finished grouping.
//!
//! Rows are the selected routes, grouped by the cell hosting their
//! family; columns are machines grouped by cell. A well-formed grouping
//! concentrates the 1-entries in square blocks along the diagonal; any
//! 1-entry outside its block is an exceptional element — a route that
//! must leave its cell for some machine.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::cell::CellSolution;
use crate::dissimilarity::{dissimilarity_matrix, family_cyclic_dissimilarity};
use crate::family::FamilySolution;
use crate::model::{Instance, MachineId, PartId, RouteId};

/// One cell's contents, for display.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellBlock {
    /// Cell id as assigned by the cell-formation stage (1-based).
    pub cell: usize,
    pub machines: Vec<MachineId>,
    /// Family indices (1-based) hosted by the cell.
    pub families: Vec<usize>,
}

/// A rearranged incidence matrix plus the headline numbers of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupingReport {
    pub families: Vec<BTreeSet<RouteId>>,
    pub selected_route: BTreeMap<PartId, RouteId>,
    /// Cells ascending; machines and families ascending within each.
    pub blocks: Vec<CellBlock>,
    /// Selected routes: cells ascending, families ascending within a
    /// cell, routes ascending within a family.
    pub row_order: Vec<RouteId>,
    /// Machines: cells ascending, ascending within a cell.
    pub column_order: Vec<MachineId>,
    /// Incidence of `row_order` against `column_order`.
    pub matrix: Vec<Vec<bool>>,
    pub objective: u64,
    pub utilization: u64,
    pub exceptional_elements: u64,
    /// Cyclic dissimilarity of each family, in family order.
    pub family_dissimilarities: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("family and cell solutions disagree: {0}")]
    InconsistentSolutions(String),
}

/// Counts 1-entries of the rearranged matrix lying outside their block:
/// uses of a machine by a selected route whose family sits in another
/// cell. Routes or machines the cell solution does not place are skipped;
/// [`build_report`] rejects such inputs up front.
pub fn count_exceptional_elements(
    instance: &Instance,
    families: &FamilySolution,
    cells: &CellSolution,
) -> u64 {
    let mut count = 0;
    for (idx, family) in families.families.iter().enumerate() {
        let Some(&home) = cells.family_cell.get(&(idx + 1)) else {
            continue;
        };
        for &route in family {
            for machine in instance.machines_of(route) {
                if let Some(&cell) = cells.machine_cell.get(machine) {
                    if cell != home {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

/// Assembles the block-diagonal view of a family solution and a cell
/// placement, re-deriving every per-family number from the instance.
pub fn build_report(
    instance: &Instance,
    families: &FamilySolution,
    cells: &CellSolution,
) -> Result<GroupingReport, ReportError> {
    let inconsistent = |msg: String| Err(ReportError::InconsistentSolutions(msg));

    let family_count = families.families.len();
    if !cells.family_cell.keys().copied().eq(1..=family_count) {
        return inconsistent(format!(
            "cell solution places {} families, family solution has {}",
            cells.family_cell.len(),
            family_count
        ));
    }
    if !cells.machine_cell.keys().copied().eq(instance.machines()) {
        return inconsistent("cell solution does not place every machine exactly once".into());
    }
    if !families.selected_route.keys().copied().eq(instance.parts()) {
        return inconsistent("family solution does not select a route for every part".into());
    }
    let mut from_families: BTreeMap<PartId, RouteId> = BTreeMap::new();
    for family in &families.families {
        if family.is_empty() {
            return inconsistent("a family owns no routes".into());
        }
        for &route in family {
            let part = instance.part_of(route);
            if from_families.insert(part, route).is_some() {
                return inconsistent(format!("part {part} appears in more than one family"));
            }
        }
    }
    if from_families != families.selected_route {
        return inconsistent("families do not partition the selected routes".into());
    }

    let d = dissimilarity_matrix(instance);
    let mut family_dissimilarities = Vec::with_capacity(family_count);
    for family in &families.families {
        match family_cyclic_dissimilarity(&d, family) {
            Ok(value) => family_dissimilarities.push(u64::from(value)),
            Err(err) => return inconsistent(format!("family not scorable: {err}")),
        }
    }
    let recomputed: u64 = family_dissimilarities.iter().sum();
    if recomputed != families.objective {
        return inconsistent(format!(
            "stated objective {} differs from recomputed dissimilarity {recomputed}",
            families.objective
        ));
    }

    let mut block_map: BTreeMap<usize, (Vec<MachineId>, Vec<usize>)> = BTreeMap::new();
    for (&machine, &cell) in &cells.machine_cell {
        block_map.entry(cell).or_default().0.push(machine);
    }
    for (&family, &cell) in &cells.family_cell {
        block_map.entry(cell).or_default().1.push(family);
    }
    let blocks: Vec<CellBlock> = block_map
        .into_iter()
        .map(|(cell, (machines, fams))| CellBlock {
            cell,
            machines,
            families: fams,
        })
        .collect();

    let row_order: Vec<RouteId> = blocks
        .iter()
        .flat_map(|block| block.families.iter())
        .flat_map(|&family| families.families[family - 1].iter().copied())
        .collect();
    let column_order: Vec<MachineId> = blocks
        .iter()
        .flat_map(|block| block.machines.iter().copied())
        .collect();
    let matrix: Vec<Vec<bool>> = row_order
        .iter()
        .map(|&route| {
            column_order
                .iter()
                .map(|&machine| instance.uses(route, machine))
                .collect()
        })
        .collect();

    Ok(GroupingReport {
        families: families.families.clone(),
        selected_route: families.selected_route.clone(),
        blocks,
        row_order,
        column_order,
        matrix,
        objective: families.objective,
        utilization: cells.utilization,
        exceptional_elements: count_exceptional_elements(instance, families, cells),
        family_dissimilarities,
    })
}

/// Output flavors of [`render_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Human-readable grid plus summary lines.
    Table,
    /// Machine-readable document with a stable key order.
    Json,
}

/// Renders a report. Equal reports render to identical bytes.
pub fn render_table(report: &GroupingReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => render_text(report),
        ReportFormat::Json => render_json(report),
    }
}

fn render_text(report: &GroupingReport) -> String {
    let part_of: BTreeMap<RouteId, PartId> = report
        .selected_route
        .iter()
        .map(|(&part, &route)| (route, part))
        .collect();
    let row_labels: Vec<String> = report
        .row_order
        .iter()
        .map(|route| format!("p{} r{route}", part_of[route]))
        .collect();
    let label_w = row_labels.iter().map(String::len).max().unwrap_or(0);
    let col_headers: Vec<String> = report
        .column_order
        .iter()
        .map(|machine| format!("m{machine}"))
        .collect();
    let col_w = col_headers.iter().map(String::len).max().unwrap_or(1);

    let mut out = String::new();
    out += &format!("{:w$} |", "", w = label_w);
    let mut col = 0;
    for block in &report.blocks {
        for _ in &block.machines {
            out += &format!(" {:>w$}", col_headers[col], w = col_w);
            col += 1;
        }
        out += " |";
    }
    out.push('\n');

    let separator = {
        let mut line = "-".repeat(label_w + 1);
        line.push('+');
        for block in &report.blocks {
            line += &"-".repeat((col_w + 1) * block.machines.len() + 1);
            line.push('+');
        }
        line.push('\n');
        line
    };
    out += &separator;

    let mut row = 0;
    for block in &report.blocks {
        let rows_here: usize = block
            .families
            .iter()
            .map(|&family| report.families[family - 1].len())
            .sum();
        if rows_here == 0 {
            continue;
        }
        for _ in 0..rows_here {
            out += &format!("{:<w$} |", row_labels[row], w = label_w);
            let mut col = 0;
            for col_block in &report.blocks {
                for _ in &col_block.machines {
                    let mark = if report.matrix[row][col] { "1" } else { "." };
                    out += &format!(" {mark:>w$}", w = col_w);
                    col += 1;
                }
                out += " |";
            }
            out.push('\n');
            row += 1;
        }
        out += &separator;
    }

    out.push('\n');
    for block in &report.blocks {
        out += &format!(
            "cell {}: machines {{{}}}  families {{{}}}\n",
            block.cell,
            block.machines.iter().join(" "),
            block.families.iter().join(" "),
        );
    }
    for (idx, family) in report.families.iter().enumerate() {
        out += &format!(
            "family {}: routes {{{}}}  dissimilarity {}\n",
            idx + 1,
            family.iter().join(" "),
            report.family_dissimilarities[idx],
        );
    }
    out += &format!("objective: {}\n", report.objective);
    out += &format!("utilization: {}\n", report.utilization);
    out += &format!("exceptional elements: {}", report.exceptional_elements);
    out
}

fn render_json(report: &GroupingReport) -> String {
    #[derive(Serialize)]
    struct Cell {
        machines: Vec<usize>,
        families: Vec<usize>,
    }
    #[derive(Serialize)]
    struct Document {
        families: Vec<Vec<usize>>,
        selected_route: BTreeMap<usize, usize>,
        cells: Vec<Cell>,
        objective: u64,
        utilization: u64,
        exceptional_elements: u64,
    }

    let document = Document {
        families: report
            .families
            .iter()
            .map(|family| family.iter().map(|route| route.get()).collect())
            .collect(),
        selected_route: report
            .selected_route
            .iter()
            .map(|(part, route)| (part.get(), route.get()))
            .collect(),
        cells: report
            .blocks
            .iter()
            .map(|block| Cell {
                machines: block.machines.iter().map(|m| m.get()).collect(),
                families: block.families.clone(),
            })
            .collect(),
        objective: report.objective,
        utilization: report.utilization,
        exceptional_elements: report.exceptional_elements,
    };
    serde_json::to_string_pretty(&document).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cell::{solve_qap, usage_factors, CellConfig};
    use crate::family::solve_family_formation;

    /// Two clean blocks: machines 1-2 serve parts 1-2, machine 3 serves
    /// parts 3-4. Every part has a single route.
    fn block_instance() -> Instance {
        Instance::from_machine_sets(
            3,
            &[
                vec![vec![1, 2]],
                vec![vec![1, 2]],
                vec![vec![3]],
                vec![vec![3]],
            ],
        )
        .unwrap()
    }

    fn solved(instance: &Instance) -> (FamilySolution, CellSolution) {
        let d = dissimilarity_matrix(instance);
        let families = solve_family_formation(instance, &d).unwrap().families;
        let usage = usage_factors(instance, &families);
        let cells = solve_qap(
            &usage,
            CellConfig {
                max_cells: 2,
                max_per_cell: 2,
            },
        )
        .unwrap();
        (families, cells)
    }

    #[test]
    fn rows_and_columns_follow_the_cells() {
        let instance = block_instance();
        let (families, cells) = solved(&instance);
        let report = build_report(&instance, &families, &cells).unwrap();
        let routes: Vec<usize> = report.row_order.iter().map(|r| r.get()).collect();
        let machines: Vec<usize> = report.column_order.iter().map(|m| m.get()).collect();
        assert_eq!(routes, vec![1, 2, 3, 4]);
        assert_eq!(machines, vec![1, 2, 3]);
        assert_eq!(
            report.matrix,
            vec![
                vec![true, true, false],
                vec![true, true, false],
                vec![false, false, true],
                vec![false, false, true],
            ]
        );
        assert_eq!(report.exceptional_elements, 0);
        assert_eq!(report.utilization, 6);
        assert_eq!(report.objective, 0);
        assert_eq!(report.family_dissimilarities, vec![0, 0]);
    }

    #[test]
    fn cross_cell_usage_counts_once_per_route_and_machine() {
        let instance = block_instance();
        let (families, mut cells) = solved(&instance);
        // Drag machine 3 into cell 1: both routes of family 2 now need a
        // machine outside their cell.
        cells.machine_cell.insert(MachineId::new(3), 1);
        assert_eq!(count_exceptional_elements(&instance, &families, &cells), 2);
    }

    #[test]
    fn one_cell_means_no_exceptions() {
        let instance = block_instance();
        let (families, _) = solved(&instance);
        let everything = CellSolution {
            machine_cell: instance.machines().map(|m| (m, 1)).collect(),
            family_cell: (1..=families.families.len()).map(|f| (f, 1)).collect(),
            utilization: 8,
            cell_count_used: 1,
        };
        assert_eq!(
            count_exceptional_elements(&instance, &families, &everything),
            0
        );
    }

    #[test]
    fn mismatched_family_counts_are_rejected() {
        let instance = block_instance();
        let (families, mut cells) = solved(&instance);
        cells.family_cell.remove(&2);
        let err = build_report(&instance, &families, &cells).unwrap_err();
        assert!(matches!(err, ReportError::InconsistentSolutions(_)));
    }

    #[test]
    fn unplaced_machines_are_rejected() {
        let instance = block_instance();
        let (families, mut cells) = solved(&instance);
        cells.machine_cell.remove(&MachineId::new(2));
        let err = build_report(&instance, &families, &cells).unwrap_err();
        assert!(matches!(err, ReportError::InconsistentSolutions(_)));
    }

    #[test]
    fn stale_objectives_are_rejected() {
        let instance = block_instance();
        let (mut families, cells) = solved(&instance);
        families.objective += 1;
        let err = build_report(&instance, &families, &cells).unwrap_err();
        assert!(matches!(err, ReportError::InconsistentSolutions(_)));
    }

    #[test]
    fn table_output_is_pinned() {
        let instance = block_instance();
        let (families, cells) = solved(&instance);
        let report = build_report(&instance, &families, &cells).unwrap();
        let expected = "      | m1 m2 | m3 |
------+-------+----+
p1 r1 |  1  1 |  . |
p2 r2 |  1  1 |  . |
------+-------+----+
p3 r3 |  .  . |  1 |
p4 r4 |  .  . |  1 |
------+-------+----+

cell 1: machines {1 2}  families {1}
cell 2: machines {3}  families {2}
family 1: routes {1 2}  dissimilarity 0
family 2: routes {3 4}  dissimilarity 0
objective: 0
utilization: 6
exceptional elements: 0";
        assert_eq!(render_table(&report, ReportFormat::Table), expected);
    }

    #[test]
    fn json_output_keeps_its_key_order() {
        let instance = block_instance();
        let (families, cells) = solved(&instance);
        let report = build_report(&instance, &families, &cells).unwrap();
        let rendered = render_table(&report, ReportFormat::Json);

        let value: serde_json::Value = serde_json::from_str(&rendered).unwrap();
        assert_eq!(
            value,
            serde_json::json!({
                "families": [[1, 2], [3, 4]],
                "selected_route": {"1": 1, "2": 2, "3": 3, "4": 4},
                "cells": [
                    {"machines": [1, 2], "families": [1]},
                    {"machines": [3], "families": [2]},
                ],
                "objective": 0,
                "utilization": 6,
                "exceptional_elements": 0,
            })
        );

        let at = |key: &str| rendered.find(key).unwrap();
        assert!(at("\"families\"") < at("\"selected_route\""));
        assert!(at("\"selected_route\"") < at("\"cells\""));
        assert!(at("\"cells\"") < at("\"objective\""));
        assert!(at("\"objective\"") < at("\"utilization\""));
        assert!(at("\"utilization\"") < at("\"exceptional_elements\""));
    }
}
