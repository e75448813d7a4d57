//! Exact family formation by branch and bound over route choices.
//!
//! A feasible solution picks one route per part and strings the picked
//! routes into cycles over relational arcs; every other route carries its
//! part's supply straight to demand at zero cost. The objective therefore
//! equals the cost of a successor assignment among picked routes where a
//! route never succeeds itself or a route of its own part. The search
//! branches on parts in order, choosing routes in ascending serial order,
//! and bounds each node with a relaxed successor assignment that lets
//! every undecided part contribute its cheapest route per pairing.
//! Leaves have no undecided parts, so the bound there is the exact value.

use crate::assignment::{solve_assignment, FORBIDDEN};
use crate::dissimilarity::DissimilarityMatrix;
use crate::model::Instance;

use super::{extract_cycles, FamilyError, FamilyFormation, FlowNetwork, FlowSolution};

/// Resource cap for the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    /// Maximum number of branch-and-bound nodes to expand before giving
    /// up with [`FamilyError::Timeout`].
    pub node_limit: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            node_limit: 10_000_000,
        }
    }
}

/// Solves family formation exactly with default options.
pub fn solve_family_formation(
    instance: &Instance,
    d: &DissimilarityMatrix,
) -> Result<FamilyFormation, FamilyError> {
    solve_family_formation_with(instance, d, SolveOptions::default())
}

/// Solves family formation exactly.
///
/// Returns the network, the optimal arc flows, and the family reading of
/// the flow. Among optimal solutions the result is canonical: the
/// per-part route choice vector is lexicographically smallest, and for
/// that choice the successor assignment (ordered by route serial number)
/// is lexicographically smallest.
pub fn solve_family_formation_with(
    instance: &Instance,
    d: &DissimilarityMatrix,
    options: SolveOptions,
) -> Result<FamilyFormation, FamilyError> {
    let network = super::build_network(instance, d);
    let mut search = Search::new(instance, d, options);
    search.run();

    let build = |selection: &[usize], search: &Search| -> (FlowSolution, super::FamilySolution) {
        let mut routes: Vec<usize> = selection.to_vec();
        routes.sort_unstable();
        let succ = lex_min_successors(&routes, &search.dcost, search.n);
        let flow = assemble_flow(&network, selection, &routes, &succ);
        debug_assert_eq!(network.check_flow(&flow), Ok(()));
        let families = extract_cycles(&network, &flow).expect("solver flow decomposes");
        (flow, families)
    };

    if search.timed_out {
        let bound = search.final_bound();
        let incumbent = search
            .incumbent
            .take()
            .map(|(selection, _)| build(&selection, &search).1);
        return Err(FamilyError::Timeout { incumbent, bound });
    }

    let (selection, value) = search
        .incumbent
        .take()
        .expect("a cross-part successor assignment exists for two or more parts");
    let (flow, families) = build(&selection, &search);
    debug_assert_eq!(families.objective, value);
    Ok(FamilyFormation {
        network,
        flow,
        families,
    })
}

struct Search {
    /// Candidate route indices per part, ascending.
    candidates: Vec<Vec<usize>>,
    /// Pairwise route costs, `FORBIDDEN` on same-part pairs.
    dcost: Vec<i64>,
    n: usize,
    k: usize,
    /// `min_from_route[i * k + p]`: cheapest link from route `i` to any
    /// route of part `p`.
    min_from_route: Vec<i64>,
    /// `min_pair[p * k + q]`: cheapest link from any route of part `p` to
    /// any route of part `q`.
    min_pair: Vec<i64>,
    options: SolveOptions,
    nodes: u64,
    incumbent: Option<(Vec<usize>, u64)>,
    timed_out: bool,
    abandoned_bound: i64,
}

impl Search {
    fn new(instance: &Instance, d: &DissimilarityMatrix, options: SolveOptions) -> Self {
        let n = instance.route_count();
        let k = instance.part_count();
        let mut candidates: Vec<Vec<usize>> = instance
            .parts()
            .map(|p| {
                let mut routes: Vec<usize> =
                    instance.routes_of(p).iter().map(|r| r.index()).collect();
                routes.sort_unstable();
                routes
            })
            .collect();
        for c in &mut candidates {
            debug_assert!(!c.is_empty());
            c.dedup();
        }

        let mut dcost = vec![FORBIDDEN; n * n];
        for i in instance.routes() {
            for j in instance.routes() {
                if let Some(v) = d.get(i, j) {
                    dcost[i.index() * n + j.index()] = i64::from(v);
                }
            }
        }

        let mut min_from_route = vec![FORBIDDEN; n * k];
        for i in 0..n {
            for (p, cand) in candidates.iter().enumerate() {
                let best = cand
                    .iter()
                    .map(|&j| dcost[i * n + j])
                    .min()
                    .unwrap_or(FORBIDDEN);
                min_from_route[i * k + p] = best;
            }
        }
        let mut min_pair = vec![FORBIDDEN; k * k];
        for (p, cand) in candidates.iter().enumerate() {
            for q in 0..k {
                let best = cand
                    .iter()
                    .map(|&i| min_from_route[i * k + q])
                    .min()
                    .unwrap_or(FORBIDDEN);
                min_pair[p * k + q] = best;
            }
        }

        Search {
            candidates,
            dcost,
            n,
            k,
            min_from_route,
            min_pair,
            options,
            nodes: 0,
            incumbent: None,
            timed_out: false,
            abandoned_bound: i64::MAX,
        }
    }

    fn run(&mut self) {
        let mut selection = Vec::with_capacity(self.k);
        self.dfs(&mut selection);
    }

    /// Relaxed successor-assignment bound for a node where parts
    /// `0..selection.len()` are decided. Decided parts pair at the exact
    /// route cost; undecided parts contribute their cheapest candidate.
    fn lower_bound(&self, selection: &[usize]) -> i64 {
        let k = self.k;
        let decided = selection.len();
        let cost = |p: usize, q: usize| -> i64 {
            if p == q {
                return FORBIDDEN;
            }
            match (p < decided, q < decided) {
                (true, true) => self.dcost[selection[p] * self.n + selection[q]],
                (true, false) => self.min_from_route[selection[p] * k + q],
                // Costs are symmetric, so the cheapest link from any route
                // of part p to the decided route of q equals the reverse.
                (false, true) => self.min_from_route[selection[q] * k + p],
                (false, false) => self.min_pair[p * k + q],
            }
        };
        solve_assignment(k, &cost).0
    }

    fn dfs(&mut self, selection: &mut Vec<usize>) {
        self.nodes += 1;
        let bound = self.lower_bound(selection);
        if self.nodes > self.options.node_limit {
            self.timed_out = true;
            self.abandoned_bound = self.abandoned_bound.min(bound);
            return;
        }
        let cutoff = self
            .incumbent
            .as_ref()
            .map_or(FORBIDDEN, |&(_, v)| (v as i64).min(FORBIDDEN));
        if bound >= cutoff {
            return;
        }
        if selection.len() == self.k {
            // All parts decided: the relaxation is the exact assignment.
            self.incumbent = Some((selection.clone(), bound as u64));
            return;
        }
        let part = selection.len();
        for idx in 0..self.candidates[part].len() {
            let route = self.candidates[part][idx];
            selection.push(route);
            self.dfs(selection);
            selection.pop();
            if self.timed_out {
                // Remaining siblings inherit this node's bound.
                self.abandoned_bound = self.abandoned_bound.min(bound);
                return;
            }
        }
    }

    /// Best proven lower bound on the optimum at the moment of abort.
    fn final_bound(&self) -> u64 {
        let mut bound = self.abandoned_bound;
        if let Some((_, v)) = &self.incumbent {
            bound = bound.min(*v as i64);
        }
        bound.clamp(0, FORBIDDEN) as u64
    }
}

/// Lexicographically smallest successor assignment, among those of
/// minimum cost, for the picked routes (`routes` ascending, 0-based).
/// Position `p` of the result is the index into `routes` of the successor
/// of `routes[p]`.
fn lex_min_successors(routes: &[usize], dcost: &[i64], n: usize) -> Vec<usize> {
    let m = routes.len();
    let base = |p: usize, q: usize| -> i64 { dcost[routes[p] * n + routes[q]] };
    let (optimum, _) = solve_assignment(m, &base);
    debug_assert!(optimum < FORBIDDEN);

    let mut fixed: Vec<Option<usize>> = vec![None; m];
    let mut used = vec![false; m];
    for p in 0..m {
        let mut locked = false;
        for q in 0..m {
            if used[q] || base(p, q) >= FORBIDDEN {
                continue;
            }
            fixed[p] = Some(q);
            let probe = |r: usize, c: usize| -> i64 {
                match fixed[r] {
                    Some(fc) if fc == c => base(r, c),
                    Some(_) => FORBIDDEN,
                    None => base(r, c),
                }
            };
            let (total, _) = solve_assignment(m, &probe);
            if total == optimum {
                used[q] = true;
                locked = true;
                break;
            }
            fixed[p] = None;
        }
        debug_assert!(locked, "an optimal completion always exists");
    }
    fixed.into_iter().map(|q| q.expect("locked")).collect()
}

/// Builds the arc flows realizing a selection and successor assignment.
fn assemble_flow(
    network: &FlowNetwork,
    selection: &[usize],
    routes: &[usize],
    succ: &[usize],
) -> FlowSolution {
    let mut arc_flow = vec![0u8; network.arcs.len()];
    for route in 0..network.route_count() {
        arc_flow[network.trans_arc_of(route)] = 1;
    }
    let chosen: std::collections::BTreeSet<usize> = selection.iter().copied().collect();
    for route in 0..network.route_count() {
        if !chosen.contains(&route) {
            arc_flow[network.supply_arc_of(route)] = 1;
            arc_flow[network.demand_arc_of(route)] = 1;
        }
    }
    let mut objective = 0u64;
    for (p, &q) in succ.iter().enumerate() {
        let arc = network
            .relational_arc(routes[p], routes[q])
            .expect("successors cross parts");
        arc_flow[arc] = 1;
        objective += network.arcs[arc].cost;
    }
    FlowSolution {
        arc_flow,
        objective,
    }
}
