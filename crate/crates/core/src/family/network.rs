//! Construction, validation, and export of the family-formation network.

use thiserror::Error;

use crate::dissimilarity::DissimilarityMatrix;
use crate::model::{Instance, RouteId};

use super::{FlowArc, FlowArcKind, FlowNetwork, FlowNode, FlowNodeKind, FlowSolution};

/// Builds the unit-capacity flow network for an instance.
///
/// Per part there is a supply node emitting `routes_per_part - 1` units and
/// a demand node absorbing the same amount. Per route there is an entry and
/// an exit node joined by a transshipment arc with lower bound 1, fed from
/// the part's supply and drained to its demand by unit arcs. Exit nodes
/// connect to entry nodes of every route of every other part through
/// relational arcs costed with the pair's dissimilarity. Arc count is
/// `3N + N(N-1) - sum_k tpr_k(tpr_k - 1)` for `N` routes.
pub fn build_network(instance: &Instance, d: &DissimilarityMatrix) -> FlowNetwork {
    let k = instance.part_count();
    let n = instance.route_count();

    let supply_node = |p: usize| p;
    let in_node = move |r: usize| k + r;
    let out_node = move |r: usize| k + n + r;
    let demand_node = move |p: usize| k + 2 * n + p;

    let mut nodes = Vec::with_capacity(2 * k + 2 * n);
    for part in instance.parts() {
        nodes.push(FlowNode {
            kind: FlowNodeKind::Supply(part),
            balance: instance.routes_per_part(part) as i64 - 1,
        });
    }
    for route in instance.routes() {
        nodes.push(FlowNode {
            kind: FlowNodeKind::RouteIn(route),
            balance: 0,
        });
    }
    for route in instance.routes() {
        nodes.push(FlowNode {
            kind: FlowNodeKind::RouteOut(route),
            balance: 0,
        });
    }
    for part in instance.parts() {
        nodes.push(FlowNode {
            kind: FlowNodeKind::Demand(part),
            balance: -(instance.routes_per_part(part) as i64 - 1),
        });
    }

    let mut route_part = vec![0usize; n];
    for route in instance.routes() {
        route_part[route.index()] = instance.part_of(route).index();
    }

    let mut arcs = Vec::new();
    let mut supply_arc = vec![0usize; n];
    let mut trans_arc = vec![0usize; n];
    let mut demand_arc = vec![0usize; n];

    for part in instance.parts() {
        let mut routes: Vec<RouteId> = instance.routes_of(part).to_vec();
        routes.sort();
        for route in routes {
            supply_arc[route.index()] = arcs.len();
            arcs.push(FlowArc {
                kind: FlowArcKind::Supply,
                tail: supply_node(part.index()),
                head: in_node(route.index()),
                lower: 0,
                upper: 1,
                cost: 0,
            });
        }
    }
    for route in instance.routes() {
        trans_arc[route.index()] = arcs.len();
        arcs.push(FlowArc {
            kind: FlowArcKind::Transshipment,
            tail: in_node(route.index()),
            head: out_node(route.index()),
            lower: 1,
            upper: 1,
            cost: 0,
        });
    }
    for route in instance.routes() {
        demand_arc[route.index()] = arcs.len();
        arcs.push(FlowArc {
            kind: FlowArcKind::Demand,
            tail: out_node(route.index()),
            head: demand_node(route_part[route.index()]),
            lower: 0,
            upper: 1,
            cost: 0,
        });
    }
    let mut relational = std::collections::BTreeMap::new();
    for i in instance.routes() {
        for j in instance.routes() {
            if let Some(cost) = d.get(i, j) {
                relational.insert((i.index(), j.index()), arcs.len());
                arcs.push(FlowArc {
                    kind: FlowArcKind::Relational,
                    tail: out_node(i.index()),
                    head: in_node(j.index()),
                    lower: 0,
                    upper: 1,
                    cost: u64::from(cost),
                });
            }
        }
    }

    FlowNetwork {
        nodes,
        arcs,
        part_count: k,
        route_count: n,
        route_part,
        supply_arc,
        trans_arc,
        demand_arc,
        relational,
    }
}

/// Why a flow fails verification against the network's constraints.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowViolation {
    #[error("flow vector has {got} entries for {want} arcs")]
    LengthMismatch { got: usize, want: usize },
    #[error("arc {arc} carries flow {flow}, outside [{lower}, {upper}]")]
    BoundViolated {
        arc: usize,
        flow: u8,
        lower: u32,
        upper: u32,
    },
    #[error("node {node} has net outflow {got}, balance requires {want}")]
    ConservationViolated { node: usize, got: i64, want: i64 },
    #[error("route {route}: supply arc carries {supply} but demand arc carries {demand}")]
    SideConstraintViolated { route: usize, supply: u8, demand: u8 },
    #[error("stated objective {stated} differs from the flow's cost {computed}")]
    ObjectiveMismatch { stated: u64, computed: u64 },
}

impl FlowNetwork {
    pub fn part_count(&self) -> usize {
        self.part_count
    }

    pub fn route_count(&self) -> usize {
        self.route_count
    }

    /// 0-based part index of a 0-based route index.
    pub(crate) fn part_index_of_route(&self, route: usize) -> usize {
        self.route_part[route]
    }

    pub(crate) fn supply_arc_of(&self, route: usize) -> usize {
        self.supply_arc[route]
    }

    pub(crate) fn trans_arc_of(&self, route: usize) -> usize {
        self.trans_arc[route]
    }

    pub(crate) fn demand_arc_of(&self, route: usize) -> usize {
        self.demand_arc[route]
    }

    /// Relational arc from route `i` to route `j` (0-based indices).
    pub(crate) fn relational_arc(&self, i: usize, j: usize) -> Option<usize> {
        self.relational.get(&(i, j)).copied()
    }

    /// Relational arcs leaving route `i`, ascending by head route.
    pub(crate) fn relational_out(&self, i: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.relational
            .range((i, 0)..(i + 1, 0))
            .map(|(&(_, j), &arc)| (j, arc))
    }

    /// Verifies a flow literally against every constraint of the model:
    /// integrality and arc bounds, node conservation, the per-route
    /// side constraint (supply arc flow equals demand arc flow), and the
    /// objective identity.
    pub fn check_flow(&self, flow: &FlowSolution) -> Result<(), FlowViolation> {
        if flow.arc_flow.len() != self.arcs.len() {
            return Err(FlowViolation::LengthMismatch {
                got: flow.arc_flow.len(),
                want: self.arcs.len(),
            });
        }
        for (idx, (arc, &f)) in self.arcs.iter().zip(&flow.arc_flow).enumerate() {
            if u32::from(f) < arc.lower || u32::from(f) > arc.upper {
                return Err(FlowViolation::BoundViolated {
                    arc: idx,
                    flow: f,
                    lower: arc.lower,
                    upper: arc.upper,
                });
            }
        }
        let mut net = vec![0i64; self.nodes.len()];
        for (arc, &f) in self.arcs.iter().zip(&flow.arc_flow) {
            net[arc.tail] += i64::from(f);
            net[arc.head] -= i64::from(f);
        }
        for (idx, node) in self.nodes.iter().enumerate() {
            if net[idx] != node.balance {
                return Err(FlowViolation::ConservationViolated {
                    node: idx,
                    got: net[idx],
                    want: node.balance,
                });
            }
        }
        for route in 0..self.route_count {
            let supply = flow.arc_flow[self.supply_arc[route]];
            let demand = flow.arc_flow[self.demand_arc[route]];
            if supply != demand {
                return Err(FlowViolation::SideConstraintViolated {
                    route: route + 1,
                    supply,
                    demand,
                });
            }
        }
        let computed: u64 = self
            .arcs
            .iter()
            .zip(&flow.arc_flow)
            .map(|(arc, &f)| arc.cost * u64::from(f))
            .sum();
        if computed != flow.objective {
            return Err(FlowViolation::ObjectiveMismatch {
                stated: flow.objective,
                computed,
            });
        }
        Ok(())
    }

    /// Renders the network in DIMACS minimum-cost-flow format. The side
    /// constraints, which DIMACS cannot express, follow the arc lines as
    /// one comment per route. Node ids are 1-based positions in
    /// [`FlowNetwork::nodes`]; output is byte-stable for equal networks.
    pub fn to_dimacs(&self) -> String {
        use std::fmt::Write;

        let mut out = String::new();
        writeln!(out, "p min {} {}", self.nodes.len(), self.arcs.len()).unwrap();
        for (idx, node) in self.nodes.iter().enumerate() {
            if node.balance != 0 {
                writeln!(out, "n {} {}", idx + 1, node.balance).unwrap();
            }
        }
        for arc in &self.arcs {
            writeln!(
                out,
                "a {} {} {} {} {}",
                arc.tail + 1,
                arc.head + 1,
                arc.lower,
                arc.upper,
                arc.cost
            )
            .unwrap();
        }
        for route in 0..self.route_count {
            let supply = &self.arcs[self.supply_arc[route]];
            let demand = &self.arcs[self.demand_arc[route]];
            writeln!(
                out,
                "c side-constraint f({},{}) = f({},{})",
                supply.tail + 1,
                supply.head + 1,
                demand.tail + 1,
                demand.head + 1
            )
            .unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissimilarity::dissimilarity_matrix;
    use crate::model::Instance;

    fn two_singleton_parts() -> (Instance, FlowNetwork) {
        let instance =
            Instance::from_machine_sets(2, &[vec![vec![1]], vec![vec![1, 2]]]).unwrap();
        let d = dissimilarity_matrix(&instance);
        let network = build_network(&instance, &d);
        (instance, network)
    }

    #[test]
    fn two_single_route_parts_build_the_minimal_network() {
        let (_, network) = two_singleton_parts();
        assert_eq!(network.nodes.len(), 8);
        assert_eq!(network.arcs.len(), 8);
        let kinds: Vec<FlowArcKind> = network.arcs.iter().map(|a| a.kind).collect();
        assert_eq!(
            kinds,
            vec![
                FlowArcKind::Supply,
                FlowArcKind::Supply,
                FlowArcKind::Transshipment,
                FlowArcKind::Transshipment,
                FlowArcKind::Demand,
                FlowArcKind::Demand,
                FlowArcKind::Relational,
                FlowArcKind::Relational,
            ]
        );
        // Single-route parts hold no supply.
        assert_eq!(network.nodes[0].balance, 0);
        assert_eq!(network.nodes[1].balance, 0);
        // Relational costs carry the pair's dissimilarity, both ways.
        assert_eq!(network.arcs[6].cost, 1);
        assert_eq!(network.arcs[7].cost, 1);
    }

    #[test]
    fn balances_mirror_supply_and_demand() {
        let instance = Instance::from_machine_sets(
            3,
            &[vec![vec![1], vec![2], vec![3]], vec![vec![1, 2]]],
        )
        .unwrap();
        let d = dissimilarity_matrix(&instance);
        let network = build_network(&instance, &d);
        assert_eq!(network.nodes[0].balance, 2);
        assert_eq!(network.nodes[1].balance, 0);
        let total: i64 = network.nodes.iter().map(|n| n.balance).sum();
        assert_eq!(total, 0);
        let demand = network
            .nodes
            .iter()
            .find(|n| matches!(n.kind, FlowNodeKind::Demand(p) if p.get() == 1))
            .unwrap();
        assert_eq!(demand.balance, -2);
    }

    #[test]
    fn relational_arcs_skip_same_part_pairs() {
        let instance = Instance::from_machine_sets(
            3,
            &[vec![vec![1], vec![2]], vec![vec![3]], vec![vec![1, 3]]],
        )
        .unwrap();
        let d = dissimilarity_matrix(&instance);
        let network = build_network(&instance, &d);
        let n = instance.route_count();
        let tpr_term: usize = instance
            .parts()
            .map(|p| {
                let t = instance.routes_per_part(p);
                t * (t - 1)
            })
            .sum();
        let relational = network
            .arcs
            .iter()
            .filter(|a| a.kind == FlowArcKind::Relational)
            .count();
        assert_eq!(relational, n * (n - 1) - tpr_term);
        assert_eq!(network.arcs.len(), 3 * n + relational);
        assert!(network.relational_arc(0, 1).is_none());
        assert!(network.relational_arc(0, 2).is_some());
    }

    #[test]
    fn check_flow_accepts_a_legal_cycle_flow() {
        let (_, network) = two_singleton_parts();
        // Both routes chosen: transshipment arcs and the two relational
        // arcs carry one unit; supplies stay idle.
        let mut arc_flow = vec![0u8; 8];
        arc_flow[2] = 1;
        arc_flow[3] = 1;
        arc_flow[6] = 1;
        arc_flow[7] = 1;
        let flow = FlowSolution {
            arc_flow,
            objective: 2,
        };
        assert_eq!(network.check_flow(&flow), Ok(()));
    }

    #[test]
    fn check_flow_rejects_violations() {
        let (_, network) = two_singleton_parts();
        let zero = FlowSolution {
            arc_flow: vec![0u8; 8],
            objective: 0,
        };
        // Transshipment lower bounds unmet.
        assert!(matches!(
            network.check_flow(&zero),
            Err(FlowViolation::BoundViolated { .. })
        ));

        let mut arc_flow = vec![0u8; 8];
        arc_flow[2] = 1;
        arc_flow[3] = 1;
        arc_flow[6] = 1;
        arc_flow[7] = 1;
        let stale = FlowSolution {
            arc_flow: arc_flow.clone(),
            objective: 5,
        };
        assert_eq!(
            network.check_flow(&stale),
            Err(FlowViolation::ObjectiveMismatch {
                stated: 5,
                computed: 2
            })
        );

        let short = FlowSolution {
            arc_flow: vec![0u8; 3],
            objective: 0,
        };
        assert!(matches!(
            network.check_flow(&short),
            Err(FlowViolation::LengthMismatch { .. })
        ));

        // One relational arc only: conservation breaks at the exit node.
        let mut arc_flow = vec![0u8; 8];
        arc_flow[2] = 1;
        arc_flow[3] = 1;
        arc_flow[6] = 1;
        let broken = FlowSolution {
            arc_flow,
            objective: 1,
        };
        assert!(matches!(
            network.check_flow(&broken),
            Err(FlowViolation::ConservationViolated { .. })
        ));
    }

    #[test]
    fn dimacs_lists_nonzero_balances_arcs_and_side_constraints() {
        let instance = Instance::from_machine_sets(
            2,
            &[vec![vec![1], vec![2]], vec![vec![1, 2]]],
        )
        .unwrap();
        let d = dissimilarity_matrix(&instance);
        let network = build_network(&instance, &d);
        let text = network.to_dimacs();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], format!("p min {} {}", network.nodes.len(), network.arcs.len()));
        assert_eq!(lines[1], "n 1 1");
        // Part 1's demand node sits right after the route exit nodes.
        assert_eq!(lines[2], "n 9 -1");
        let arc_lines = lines.iter().filter(|l| l.starts_with("a ")).count();
        assert_eq!(arc_lines, network.arcs.len());
        let side = lines
            .iter()
            .filter(|l| l.starts_with("c side-constraint "))
            .count();
        assert_eq!(side, instance.route_count());
        // Deterministic: same network renders the same bytes.
        assert_eq!(text, network.to_dimacs());
    }
}
