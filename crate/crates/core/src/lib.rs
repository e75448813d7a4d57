//! Grouping for cellular manufacturing.
//!
//! Parts arrive with several candidate process routes; the library picks
//! one route per part, gathers the picks into route families with
//! minimal total dissimilarity, places machines and families into cells,
//! and reports the result as a block-diagonal incidence matrix.
//!
//! The stages line up with the modules:
//!
//! 1. [`model`] — instances: machines, parts, and their candidate routes.
//! 2. [`dissimilarity`] — route distances and family scores.
//! 3. [`family`] — route selection and family formation, solved exactly
//!    on a unit-capacity flow network with one side constraint per part,
//!    plus a brute-force oracle for cross-checking.
//! 4. [`cell`] — machine-cell formation, exact and heuristic.
//! 5. [`report`] — block-diagonal rendering and exceptional elements.
//!
//! ```
//! use cellform::{
//!     build_report, dissimilarity_matrix, render_table, solve_family_formation, solve_qap,
//!     usage_factors, CellConfig, Instance, ReportFormat,
//! };
//!
//! // Two parts with one route each, sharing machine 2.
//! let instance = Instance::from_machine_sets(
//!     3,
//!     &[vec![vec![1, 2]], vec![vec![2, 3]]],
//! )?;
//! let d = dissimilarity_matrix(&instance);
//! let families = solve_family_formation(&instance, &d)?.families;
//! let usage = usage_factors(&instance, &families);
//! let cells = solve_qap(&usage, CellConfig { max_cells: 1, max_per_cell: 3 })?;
//! let report = build_report(&instance, &families, &cells)?;
//! println!("{}", render_table(&report, ReportFormat::Table));
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

mod assignment;

pub mod cell;
pub mod dissimilarity;
pub mod family;
pub mod model;
pub mod report;

pub use cell::{
    run_heuristic, solve_qap, solve_qap_with, usage_factors, CellConfig, CellError, CellSolution,
    QapOptions, UsageMatrix,
};
pub use dissimilarity::{
    dissimilarity_matrix, family_cyclic_dissimilarity, route_dissimilarity, DissimilarityError,
    DissimilarityMatrix,
};
pub use family::{
    brute_force_families, build_network, solve_family_formation, solve_family_formation_with,
    FamilyError, FamilyFormation, FamilySolution, FlowNetwork, SolveOptions,
};
pub use model::{
    validate_instance, Instance, MachineId, ModelError, PartId, RawInstance, RouteId,
};
pub use report::{
    build_report, count_exceptional_elements, render_table, GroupingReport, ReportError,
    ReportFormat,
};
