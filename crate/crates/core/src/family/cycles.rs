//! Reads route families out of a feasible flow.

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{PartId, RouteId};

use super::{FamilyError, FamilySolution, FlowNetwork, FlowSolution};

/// Decomposes a flow into route families.
///
/// A route whose supply arc is idle is the one chosen for its part; its
/// transshipment unit must arrive over a relational arc and leave over
/// another, so chosen routes link into cycles. Each cycle becomes one
/// family. Any structural defect (a chosen route without exactly one
/// outgoing relational unit, a cycle running through a supply-fed route,
/// stray relational flow, several chosen routes in one part) yields
/// [`FamilyError::MalformedFlow`].
pub fn extract_cycles(
    network: &FlowNetwork,
    flow: &FlowSolution,
) -> Result<FamilySolution, FamilyError> {
    let malformed = |msg: String| Err(FamilyError::MalformedFlow(msg));

    if flow.arc_flow.len() != network.arcs.len() {
        return malformed(format!(
            "flow vector has {} entries for {} arcs",
            flow.arc_flow.len(),
            network.arcs.len()
        ));
    }

    let n = network.route_count();
    let k = network.part_count();

    for route in 0..n {
        if flow.arc_flow[network.trans_arc_of(route)] != 1 {
            return malformed(format!(
                "transshipment arc of route {} carries no flow",
                route + 1
            ));
        }
    }

    let chosen: Vec<bool> = (0..n)
        .map(|r| flow.arc_flow[network.supply_arc_of(r)] == 0)
        .collect();

    let mut part_choice: Vec<Option<usize>> = vec![None; k];
    for route in 0..n {
        if chosen[route] {
            let part = network.part_index_of_route(route);
            if let Some(other) = part_choice[part] {
                return malformed(format!(
                    "part {} has two supply-free routes, {} and {}",
                    part + 1,
                    other + 1,
                    route + 1
                ));
            }
            part_choice[part] = Some(route);
        }
    }
    for (part, choice) in part_choice.iter().enumerate() {
        if choice.is_none() {
            return malformed(format!("every route of part {} is supply-fed", part + 1));
        }
    }

    let mut visited = vec![false; n];
    let mut families: Vec<BTreeSet<RouteId>> = Vec::new();
    let mut relational_units = 0usize;
    for (idx, arc) in network.arcs.iter().enumerate() {
        if arc.kind == super::FlowArcKind::Relational && flow.arc_flow[idx] == 1 {
            relational_units += 1;
        }
    }

    for start in 0..n {
        if !chosen[start] || visited[start] {
            continue;
        }
        let mut cycle = BTreeSet::new();
        let mut current = start;
        loop {
            visited[current] = true;
            cycle.insert(RouteId::new(current + 1));
            let mut next = None;
            for (j, arc_idx) in network.relational_out(current) {
                if flow.arc_flow[arc_idx] == 1 {
                    if next.is_some() {
                        return malformed(format!(
                            "route {} sends flow over two relational arcs",
                            current + 1
                        ));
                    }
                    next = Some(j);
                }
            }
            let Some(next) = next else {
                return malformed(format!(
                    "chosen route {} has no outgoing relational flow",
                    current + 1
                ));
            };
            if !chosen[next] {
                return malformed(format!(
                    "relational flow enters supply-fed route {}",
                    next + 1
                ));
            }
            if next == start {
                break;
            }
            if visited[next] {
                return malformed(format!(
                    "relational flow re-enters route {} before closing its cycle",
                    next + 1
                ));
            }
            current = next;
        }
        families.push(cycle);
    }

    let chosen_count = chosen.iter().filter(|&&c| c).count();
    if relational_units != chosen_count {
        return malformed(format!(
            "{relational_units} relational units for {chosen_count} chosen routes"
        ));
    }

    families.sort_by_key(|f| *f.first().expect("cycles are nonempty"));

    let selected_route: BTreeMap<PartId, RouteId> = part_choice
        .iter()
        .enumerate()
        .map(|(part, choice)| {
            (
                PartId::new(part + 1),
                RouteId::new(choice.expect("checked above") + 1),
            )
        })
        .collect();

    let objective: u64 = network
        .arcs
        .iter()
        .zip(&flow.arc_flow)
        .filter(|(arc, &f)| arc.kind == super::FlowArcKind::Relational && f == 1)
        .map(|(arc, _)| arc.cost)
        .sum();

    Ok(FamilySolution {
        selected_route,
        families,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissimilarity::dissimilarity_matrix;
    use crate::family::build_network;
    use crate::model::Instance;

    /// Four parts, two routes each, all routes visiting machine 1 only.
    fn four_part_instance() -> (Instance, FlowNetwork) {
        let route = || vec![1usize];
        let instance = Instance::from_machine_sets(
            1,
            &[
                vec![route(), route()],
                vec![route(), route()],
                vec![route(), route()],
                vec![route(), route()],
            ],
        )
        .unwrap();
        let d = dissimilarity_matrix(&instance);
        let network = build_network(&instance, &d);
        (instance, network)
    }

    /// Flow choosing one route per part and linking the chosen routes by
    /// the given successor pairs (1-based route numbers).
    fn flow_from(
        network: &FlowNetwork,
        chosen: &[usize],
        links: &[(usize, usize)],
    ) -> FlowSolution {
        let mut arc_flow = vec![0u8; network.arcs.len()];
        for route in 0..network.route_count() {
            arc_flow[network.trans_arc_of(route)] = 1;
            if !chosen.contains(&(route + 1)) {
                arc_flow[network.supply_arc_of(route)] = 1;
                arc_flow[network.demand_arc_of(route)] = 1;
            }
        }
        let mut objective = 0u64;
        for &(i, j) in links {
            let arc = network
                .relational_arc(i - 1, j - 1)
                .expect("cross-part link");
            arc_flow[arc] = 1;
            objective += network.arcs[arc].cost;
        }
        FlowSolution {
            arc_flow,
            objective,
        }
    }

    #[test]
    fn reads_two_two_cycles() {
        let (_, network) = four_part_instance();
        // Parts own routes (1,2), (3,4), (5,6), (7,8); choose 2,3,6,7 and
        // close 2-3 and 6-7 into cycles.
        let flow = flow_from(
            &network,
            &[2, 3, 6, 7],
            &[(2, 3), (3, 2), (6, 7), (7, 6)],
        );
        network.check_flow(&flow).unwrap();
        let solution = extract_cycles(&network, &flow).unwrap();
        assert_eq!(solution.families.len(), 2);
        assert_eq!(
            solution.families[0],
            [RouteId::new(2), RouteId::new(3)].into()
        );
        assert_eq!(
            solution.families[1],
            [RouteId::new(6), RouteId::new(7)].into()
        );
        assert_eq!(
            solution.selected_route[&PartId::new(1)],
            RouteId::new(2)
        );
        assert_eq!(solution.family_of(RouteId::new(6)), Some(2));
        assert_eq!(solution.family_of(RouteId::new(1)), None);
    }

    #[test]
    fn reads_one_long_cycle_and_orders_families_by_smallest_member() {
        let (_, network) = four_part_instance();
        let flow = flow_from(
            &network,
            &[1, 4, 5, 8],
            &[(4, 1), (1, 5), (5, 8), (8, 4)],
        );
        network.check_flow(&flow).unwrap();
        let solution = extract_cycles(&network, &flow).unwrap();
        assert_eq!(solution.families.len(), 1);
        assert_eq!(
            solution.families[0],
            [1, 4, 5, 8].map(RouteId::new).into()
        );
    }

    #[test]
    fn chosen_route_without_relational_flow_is_malformed() {
        let (_, network) = four_part_instance();
        // Chosen routes get no relational links at all.
        let flow = flow_from(&network, &[1, 3, 5, 7], &[]);
        let err = extract_cycles(&network, &flow).unwrap_err();
        assert!(matches!(err, FamilyError::MalformedFlow(_)));
    }

    #[test]
    fn chain_into_supply_fed_route_is_malformed() {
        let (_, network) = four_part_instance();
        // 2 -> 4 enters a supply-fed route (3 is the chosen one of part 2).
        let flow = flow_from(&network, &[2, 3, 5, 7], &[(2, 4), (3, 2)]);
        let err = extract_cycles(&network, &flow).unwrap_err();
        assert!(matches!(err, FamilyError::MalformedFlow(_)));
    }

    #[test]
    fn double_outgoing_relational_flow_is_malformed() {
        let (_, network) = four_part_instance();
        let flow = flow_from(
            &network,
            &[2, 3, 6, 7],
            &[(2, 3), (3, 2), (6, 7), (7, 6), (2, 6)],
        );
        let err = extract_cycles(&network, &flow).unwrap_err();
        assert!(matches!(err, FamilyError::MalformedFlow(_)));
    }

    #[test]
    fn two_supply_free_routes_in_one_part_is_malformed() {
        let (_, network) = four_part_instance();
        let mut flow = flow_from(
            &network,
            &[2, 3, 6, 7],
            &[(2, 3), (3, 2), (6, 7), (7, 6)],
        );
        // Silence route 1's supply arc as well.
        flow.arc_flow[network.supply_arc_of(0)] = 0;
        let err = extract_cycles(&network, &flow).unwrap_err();
        assert!(matches!(err, FamilyError::MalformedFlow(_)));
    }
}
