//! Exact solver for small instances; ground truth for every bound and
//! heuristic in the crate.
//!
//! The solver runs a dynamic program over terminal subsets: the best cover
//! of a set `S` picks the group containing the lowest-indexed terminal of
//! `S` (symmetry breaking), pays that group's optimal single-tour cost, and
//! recurses. Optimal single-tour costs for all subsets come from one shared
//! Held-Karp table.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{DistanceOracle, Instance};
use crate::tour::{expand_metric_path, CvrpSolution, Tour};
use crate::tsp::{closure_matrix, held_karp_all_subset_costs, held_karp_cycle};

/// Default limit on the number of terminals for [`exact_cvrp`].
pub const DEFAULT_ORACLE_TERMINAL_LIMIT: usize = 12;

/// Vertex budget for a single Held-Karp tour computation.
const HELD_KARP_VERTEX_LIMIT: usize = crate::tsp::DEFAULT_EXACT_TSP_VERTEX_LIMIT;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{terminals} terminals exceed the exact solver limit of {limit}")]
    TooLarge { terminals: usize, limit: usize },
    #[error("vertex {0} is not a terminal of this instance")]
    NotATerminal(usize),
}

/// Optimal solution with the default terminal limit.
pub fn exact_cvrp(inst: &Instance) -> Result<CvrpSolution, OracleError> {
    exact_cvrp_with_limit(inst, DEFAULT_ORACLE_TERMINAL_LIMIT)
}

/// Optimal solution; refuses instances with more than `limit` terminals.
pub fn exact_cvrp_with_limit(inst: &Instance, limit: usize) -> Result<CvrpSolution, OracleError> {
    let n = inst.num_terminals();
    if n > limit {
        return Err(OracleError::TooLarge {
            terminals: n,
            limit,
        });
    }
    let oracle = DistanceOracle::new(inst);
    let terminals: Vec<usize> = inst.terminals().collect();
    let dist = closure_matrix(&oracle, inst.depot(), &terminals);
    let tour_cost = held_karp_all_subset_costs(&dist);
    let k = inst.capacity();

    let full = 1usize << n;
    let mut best = vec![u64::MAX; full];
    let mut choice = vec![0usize; full];
    best[0] = 0;
    for mask in 1..full {
        let low = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << low);
        // Every submask of `rest` joined with the lowest terminal is a
        // candidate group; this counts each partition exactly once.
        let mut sub = rest;
        loop {
            let group = sub | (1 << low);
            if group.count_ones() as usize <= k {
                let remainder = mask & !group;
                if best[remainder] != u64::MAX {
                    let cand = tour_cost[group] + best[remainder];
                    if cand < best[mask] {
                        best[mask] = cand;
                        choice[mask] = group;
                    }
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }

    // Rebuild tours for the chosen partition; each group's visiting order is
    // recomputed independently and must reproduce the tabled cost.
    let mut tours = Vec::new();
    let mut mask = full - 1;
    while mask != 0 {
        let group = choice[mask];
        let members: Vec<usize> = (0..n)
            .filter(|i| group & (1 << i) != 0)
            .map(|i| terminals[i])
            .collect();
        let sub = closure_matrix(&oracle, inst.depot(), &members);
        let (cost, order) = held_karp_cycle(&sub);
        debug_assert_eq!(cost, tour_cost[group]);
        let mut hops = vec![inst.depot()];
        hops.extend(order.iter().map(|&i| members[i - 1]));
        hops.push(inst.depot());
        let walk = expand_metric_path(&oracle, &hops);
        tours.push(Tour::new(walk, members));
        mask &= !group;
    }
    let solution = CvrpSolution::new(tours);
    debug_assert_eq!(solution.total_cost(), best[full - 1]);
    debug_assert!(crate::tour::validate_solution(inst, &solution).is_feasible());
    Ok(solution)
}

/// Minimal closed-walk cost from the depot covering exactly `terminals`.
pub fn exact_tour_cost(inst: &Instance, terminals: &BTreeSet<usize>) -> Result<u64, OracleError> {
    if terminals.len() + 1 > HELD_KARP_VERTEX_LIMIT {
        return Err(OracleError::TooLarge {
            terminals: terminals.len(),
            limit: HELD_KARP_VERTEX_LIMIT - 1,
        });
    }
    if let Some(&bad) = terminals.iter().find(|&&v| !inst.is_terminal(v)) {
        return Err(OracleError::NotATerminal(bad));
    }
    let oracle = DistanceOracle::new(inst);
    let members: Vec<usize> = terminals.iter().copied().collect();
    let dist = closure_matrix(&oracle, inst.depot(), &members);
    Ok(held_karp_cycle(&dist).0)
}
