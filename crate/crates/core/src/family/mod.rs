//! Route-family formation.
//!
//! Picks one process route per part and groups the picked routes into
//! families so that the total dissimilarity along each family's cyclic
//! order is minimal. The model is a unit-capacity minimum-cost flow
//! network with one side constraint; routes whose transshipment arc is
//! satisfied through relational arcs close into cycles, and each cycle is
//! a family.

mod cycles;
mod network;
mod oracle;
mod solver;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{PartId, RouteId};

pub use cycles::extract_cycles;
pub use network::{build_network, FlowViolation};
pub use oracle::{brute_force_families, OracleError};
pub use solver::{solve_family_formation, solve_family_formation_with, SolveOptions};

/// What a flow node stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowNodeKind {
    /// Source for one part: emits one unit per non-chosen route.
    Supply(PartId),
    /// Entry side of a route's transshipment arc.
    RouteIn(RouteId),
    /// Exit side of a route's transshipment arc.
    RouteOut(RouteId),
    /// Sink for one part: absorbs what its supply emitted.
    Demand(PartId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowNode {
    pub kind: FlowNodeKind,
    /// Net outflow this node must produce (negative: absorb).
    pub balance: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowArcKind {
    /// Supply node to a route's entry node.
    Supply,
    /// A route's entry node to its exit node; lower bound 1.
    Transshipment,
    /// A route's exit node to its part's demand node.
    Demand,
    /// Exit node of one route to entry node of a route of another part;
    /// carries the pair's dissimilarity as cost.
    Relational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowArc {
    pub kind: FlowArcKind,
    /// Index into [`FlowNetwork::nodes`].
    pub tail: usize,
    /// Index into [`FlowNetwork::nodes`].
    pub head: usize,
    pub lower: u32,
    pub upper: u32,
    pub cost: u64,
}

/// The flow network for one instance.
///
/// Node order: part supply nodes, route entry nodes, route exit nodes,
/// part demand nodes, each ascending. Arc order: supply, transshipment,
/// demand, relational, each sorted by (tail, head).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowNetwork {
    pub nodes: Vec<FlowNode>,
    pub arcs: Vec<FlowArc>,
    part_count: usize,
    route_count: usize,
    /// Route index -> part index, both 0-based.
    route_part: Vec<usize>,
    /// Arc index of each route's supply arc.
    supply_arc: Vec<usize>,
    /// Arc index of each route's transshipment arc.
    trans_arc: Vec<usize>,
    /// Arc index of each route's demand arc.
    demand_arc: Vec<usize>,
    /// (tail route index, head route index) -> relational arc index.
    relational: BTreeMap<(usize, usize), usize>,
}

/// Arc flows for a [`FlowNetwork`], positionally aligned with its arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSolution {
    pub arc_flow: Vec<u8>,
    /// Total cost of the flow (relational arcs are the only costed ones).
    pub objective: u64,
}

/// Families of process routes, one chosen route per part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilySolution {
    /// The route chosen for each part.
    pub selected_route: BTreeMap<PartId, RouteId>,
    /// Families sorted by smallest member; each is a set of chosen routes
    /// of pairwise distinct parts, at least two per family.
    pub families: Vec<BTreeSet<RouteId>>,
    /// Total dissimilarity over all families' realized cyclic orders.
    pub objective: u64,
}

impl FamilySolution {
    /// 1-based index of the family containing `route`, if any.
    pub fn family_of(&self, route: RouteId) -> Option<usize> {
        self.families
            .iter()
            .position(|f| f.contains(&route))
            .map(|i| i + 1)
    }
}

/// Everything the exact solver produces: the network it solved, the
/// optimal arc flows, and their family reading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyFormation {
    pub network: FlowNetwork,
    pub flow: FlowSolution,
    pub families: FamilySolution,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FamilyError {
    /// The flow does not decompose into one cycle per unchosen-supply
    /// route. Flows produced by the solver never trip this; it guards
    /// hand-built flows and would otherwise indicate a solver bug.
    #[error("malformed flow: {0}")]
    MalformedFlow(String),
    /// The branch-and-bound node limit was reached before optimality was
    /// proven. `incumbent` is the best solution found, `bound` the best
    /// lower bound established on the optimum.
    #[error("node limit reached before optimality was proven (best bound {bound})")]
    Timeout {
        incumbent: Option<FamilySolution>,
        bound: u64,
    },
}
