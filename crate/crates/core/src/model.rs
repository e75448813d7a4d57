//! Problem data: parts, their candidate process routes, and the
//! route-machine incidence matrix.
//!
//! Every part has one or more process routes. A route is a set of machines
//! the part visits when produced that way. Routes carry global serial
//! numbers (1-based) shared across all parts; each serial number belongs to
//! exactly one part.

use std::fmt;

use thiserror::Error;

/// 1-based part number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartId(usize);

/// 1-based machine number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MachineId(usize);

/// 1-based global route serial number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RouteId(usize);

macro_rules! id_impls {
    ($t:ident) => {
        impl $t {
            /// Wraps a 1-based number. Zero is rejected.
            pub fn new(n: usize) -> Self {
                assert!(n >= 1, concat!(stringify!($t), " is 1-based"));
                Self(n)
            }

            /// The 1-based number.
            pub fn get(self) -> usize {
                self.0
            }

            /// Position in a dense array (`get() - 1`).
            pub fn index(self) -> usize {
                self.0 - 1
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt(f)
            }
        }
    };
}

id_impls!(PartId);
id_impls!(MachineId);
id_impls!(RouteId);

/// Unvalidated instance data as read from a file or built by hand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawInstance {
    /// Number of machines M.
    pub machine_count: usize,
    /// Route serial numbers of each part, in part order.
    pub part_routes: Vec<Vec<usize>>,
    /// One row per route serial number (row `i` describes route `i + 1`),
    /// `incidence[i][m]` true when the route visits machine `m + 1`.
    pub incidence: Vec<Vec<bool>>,
}

/// A validated problem instance.
///
/// Guarantees: at least two parts, every part has at least one route, the
/// union of all parts' route lists is exactly `{1..N}` with no serial number
/// repeated, every route visits at least one machine, and all rows of the
/// incidence matrix have width `machine_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    machine_count: usize,
    part_routes: Vec<Vec<RouteId>>,
    route_part: Vec<PartId>,
    route_machines: Vec<Vec<MachineId>>,
    incidence: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("route {route} of part {part} uses no machines")]
    EmptyRoute { part: usize, route: usize },
    #[error("route {route} appears in more than one part's route list")]
    DuplicateRoute { route: usize },
    #[error("instance has {parts} part(s); grouping needs at least two")]
    TooFewParts { parts: usize },
    #[error("{0}")]
    DimensionMismatch(String),
}

/// Checks `raw` and freezes it into an [`Instance`].
pub fn validate_instance(raw: RawInstance) -> Result<Instance, ModelError> {
    let RawInstance {
        machine_count,
        part_routes,
        incidence,
    } = raw;

    let part_count = part_routes.len();
    if part_count < 2 {
        return Err(ModelError::TooFewParts { parts: part_count });
    }
    if machine_count == 0 {
        return Err(ModelError::DimensionMismatch(
            "machine count must be at least 1".into(),
        ));
    }

    let route_count: usize = part_routes.iter().map(Vec::len).sum();
    if incidence.len() != route_count {
        return Err(ModelError::DimensionMismatch(format!(
            "parts list {route_count} routes but the incidence matrix has {} rows",
            incidence.len()
        )));
    }
    for (i, row) in incidence.iter().enumerate() {
        if row.len() != machine_count {
            return Err(ModelError::DimensionMismatch(format!(
                "incidence row {} has {} entries; expected {machine_count}",
                i + 1,
                row.len()
            )));
        }
    }

    let mut route_part = vec![None; route_count];
    for (p, routes) in part_routes.iter().enumerate() {
        if routes.is_empty() {
            return Err(ModelError::DimensionMismatch(format!(
                "part {} lists no routes",
                p + 1
            )));
        }
        for &r in routes {
            if r == 0 || r > route_count {
                return Err(ModelError::DimensionMismatch(format!(
                    "part {} lists route {r}, outside 1..={route_count}",
                    p + 1
                )));
            }
            if route_part[r - 1].is_some() {
                return Err(ModelError::DuplicateRoute { route: r });
            }
            route_part[r - 1] = Some(PartId::new(p + 1));
        }
    }
    // Counts match and no serial number repeats, so all are covered.
    let route_part: Vec<PartId> = route_part.into_iter().map(Option::unwrap).collect();

    let mut route_machines = Vec::with_capacity(route_count);
    for (i, row) in incidence.iter().enumerate() {
        let machines: Vec<MachineId> = row
            .iter()
            .enumerate()
            .filter(|&(_, &used)| used)
            .map(|(m, _)| MachineId::new(m + 1))
            .collect();
        if machines.is_empty() {
            return Err(ModelError::EmptyRoute {
                part: route_part[i].get(),
                route: i + 1,
            });
        }
        route_machines.push(machines);
    }

    let part_routes = part_routes
        .into_iter()
        .map(|routes| routes.into_iter().map(RouteId::new).collect())
        .collect();

    Ok(Instance {
        machine_count,
        part_routes,
        route_part,
        route_machines,
        incidence,
    })
}

impl Instance {
    /// Builds an instance whose routes are numbered 1..N in the order given:
    /// `parts[k]` lists the machine sets of part `k + 1`'s routes.
    pub fn from_machine_sets(
        machine_count: usize,
        parts: &[Vec<Vec<usize>>],
    ) -> Result<Self, ModelError> {
        let mut part_routes = Vec::with_capacity(parts.len());
        let mut incidence = Vec::new();
        let mut next = 1;
        for routes in parts {
            let mut ids = Vec::with_capacity(routes.len());
            for machines in routes {
                let mut row = vec![false; machine_count];
                for &m in machines {
                    if m == 0 || m > machine_count {
                        return Err(ModelError::DimensionMismatch(format!(
                            "machine {m} outside 1..={machine_count}"
                        )));
                    }
                    row[m - 1] = true;
                }
                incidence.push(row);
                ids.push(next);
                next += 1;
            }
            part_routes.push(ids);
        }
        validate_instance(RawInstance {
            machine_count,
            part_routes,
            incidence,
        })
    }

    pub fn machine_count(&self) -> usize {
        self.machine_count
    }

    pub fn part_count(&self) -> usize {
        self.part_routes.len()
    }

    pub fn route_count(&self) -> usize {
        self.route_part.len()
    }

    pub fn machines(&self) -> impl Iterator<Item = MachineId> + '_ {
        (1..=self.machine_count).map(MachineId::new)
    }

    pub fn parts(&self) -> impl Iterator<Item = PartId> + '_ {
        (1..=self.part_count()).map(PartId::new)
    }

    pub fn routes(&self) -> impl Iterator<Item = RouteId> + '_ {
        (1..=self.route_count()).map(RouteId::new)
    }

    /// Routes of one part, in serial-number order as listed.
    pub fn routes_of(&self, part: PartId) -> &[RouteId] {
        &self.part_routes[part.index()]
    }

    /// Number of routes of one part.
    pub fn routes_per_part(&self, part: PartId) -> usize {
        self.part_routes[part.index()].len()
    }

    /// The part a route belongs to.
    pub fn part_of(&self, route: RouteId) -> PartId {
        self.route_part[route.index()]
    }

    /// Machines visited by a route, ascending.
    pub fn machines_of(&self, route: RouteId) -> &[MachineId] {
        &self.route_machines[route.index()]
    }

    /// Whether a route visits a machine.
    pub fn uses(&self, route: RouteId, machine: MachineId) -> bool {
        self.incidence[route.index()][machine.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(machine_count: usize, part_routes: &[&[usize]], rows: &[&[usize]]) -> RawInstance {
        RawInstance {
            machine_count,
            part_routes: part_routes.iter().map(|r| r.to_vec()).collect(),
            incidence: rows
                .iter()
                .map(|row| {
                    let mut bits = vec![false; machine_count];
                    for &m in row.iter() {
                        bits[m - 1] = true;
                    }
                    bits
                })
                .collect(),
        }
    }

    #[test]
    fn accepts_two_part_instance() {
        let inst = validate_instance(raw(3, &[&[1, 2], &[3]], &[&[1], &[2, 3], &[1, 3]])).unwrap();
        assert_eq!(inst.part_count(), 2);
        assert_eq!(inst.route_count(), 3);
        assert_eq!(inst.part_of(RouteId::new(2)), PartId::new(1));
        assert_eq!(inst.part_of(RouteId::new(3)), PartId::new(2));
        assert_eq!(
            inst.machines_of(RouteId::new(2)),
            &[MachineId::new(2), MachineId::new(3)]
        );
        assert!(inst.uses(RouteId::new(1), MachineId::new(1)));
        assert!(!inst.uses(RouteId::new(1), MachineId::new(2)));
    }

    #[test]
    fn rejects_single_part() {
        let err = validate_instance(raw(2, &[&[1]], &[&[1]])).unwrap_err();
        assert_eq!(err, ModelError::TooFewParts { parts: 1 });
    }

    #[test]
    fn rejects_all_zero_route_row() {
        let mut r = raw(2, &[&[1], &[2]], &[&[1], &[2]]);
        r.incidence[1] = vec![false, false];
        let err = validate_instance(r).unwrap_err();
        assert_eq!(err, ModelError::EmptyRoute { part: 2, route: 2 });
    }

    #[test]
    fn rejects_route_listed_twice() {
        let err = validate_instance(raw(2, &[&[1, 2], &[2]], &[&[1], &[2], &[1]])).unwrap_err();
        assert_eq!(err, ModelError::DuplicateRoute { route: 2 });
    }

    #[test]
    fn rejects_row_count_mismatch() {
        let err = validate_instance(raw(2, &[&[1], &[2, 3]], &[&[1], &[2]])).unwrap_err();
        assert!(matches!(err, ModelError::DimensionMismatch(_)));
    }

    #[test]
    fn rejects_ragged_incidence_row() {
        let mut r = raw(3, &[&[1], &[2]], &[&[1], &[2]]);
        r.incidence[0].pop();
        let err = validate_instance(r).unwrap_err();
        assert!(matches!(err, ModelError::DimensionMismatch(_)));
    }

    #[test]
    fn rejects_route_serial_out_of_range() {
        let err = validate_instance(raw(2, &[&[1], &[3]], &[&[1], &[2]])).unwrap_err();
        assert!(matches!(err, ModelError::DimensionMismatch(_)));
    }

    #[test]
    fn from_machine_sets_numbers_routes_in_order() {
        let inst = Instance::from_machine_sets(
            4,
            &[
                vec![vec![3, 4], vec![2, 4]],
                vec![vec![1, 3]],
            ],
        )
        .unwrap();
        assert_eq!(inst.route_count(), 3);
        assert_eq!(inst.routes_of(PartId::new(1)), &[RouteId::new(1), RouteId::new(2)]);
        assert_eq!(
            inst.machines_of(RouteId::new(3)),
            &[MachineId::new(1), MachineId::new(3)]
        );
    }
}
