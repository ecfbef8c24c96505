//! Closed walks through the depot, solution feasibility checks, and the
//! JSON solution format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DistanceOracle, Instance};

/// A closed walk through the depot together with the set of terminals whose
/// demand it serves.
///
/// `covered` is explicit rather than inferred from the walk: a walk may pass
/// through terminals that other tours serve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub walk: Vec<usize>,
    pub covered: BTreeSet<usize>,
}

impl Tour {
    pub fn new(walk: Vec<usize>, covered: impl IntoIterator<Item = usize>) -> Self {
        Tour {
            walk,
            covered: covered.into_iter().collect(),
        }
    }

    /// Number of edges on the walk.
    pub fn cost(&self) -> u64 {
        self.walk.len().saturating_sub(1) as u64
    }
}

/// A set of tours meant to cover every terminal exactly once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvrpSolution {
    pub tours: Vec<Tour>,
}

impl CvrpSolution {
    pub fn new(tours: Vec<Tour>) -> Self {
        CvrpSolution { tours }
    }

    pub fn total_cost(&self) -> u64 {
        self.tours.iter().map(Tour::cost).sum()
    }
}

/// Problems found while constructing a [`TspTour`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TourError {
    #[error("walk is empty")]
    EmptyWalk,
    #[error("walk must start and end at the depot")]
    NotClosedAtDepot,
    #[error("walk vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("walk step {pos}: ({from}, {to}) is not an edge")]
    NonAdjacentStep { pos: usize, from: usize, to: usize },
    #[error("walk never visits terminal {0}")]
    MissingTerminal(usize),
}

/// A closed walk from the depot that visits every terminal at least once.
///
/// `terminal_order` lists terminals by first occurrence along the walk;
/// later occurrences are ignored when the tour is partitioned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TspTour {
    walk: Vec<usize>,
    terminal_order: Vec<usize>,
    first_occurrence: Vec<usize>,
}

impl TspTour {
    /// Validates the walk against the instance and records terminal first
    /// occurrences.
    pub fn new(inst: &Instance, walk: Vec<usize>) -> Result<Self, TourError> {
        check_closed_walk(inst, &walk)?;
        let mut seen = vec![false; inst.num_vertices()];
        let mut terminal_order = Vec::with_capacity(inst.num_terminals());
        let mut first_occurrence = Vec::with_capacity(inst.num_terminals());
        for (i, &v) in walk.iter().enumerate() {
            if inst.is_terminal(v) && !seen[v] {
                seen[v] = true;
                terminal_order.push(v);
                first_occurrence.push(i);
            }
        }
        if let Some(missing) = inst.terminals().find(|&v| !seen[v]) {
            return Err(TourError::MissingTerminal(missing));
        }
        Ok(TspTour {
            walk,
            terminal_order,
            first_occurrence,
        })
    }

    pub fn walk(&self) -> &[usize] {
        &self.walk
    }

    /// Terminals in order of first occurrence along the walk.
    pub fn terminal_order(&self) -> &[usize] {
        &self.terminal_order
    }

    /// Walk index of each terminal's first occurrence, parallel to
    /// [`TspTour::terminal_order`].
    pub fn first_occurrence(&self) -> &[usize] {
        &self.first_occurrence
    }

    pub fn cost(&self) -> u64 {
        self.walk.len().saturating_sub(1) as u64
    }
}

pub(crate) fn check_closed_walk(inst: &Instance, walk: &[usize]) -> Result<(), TourError> {
    if walk.is_empty() {
        return Err(TourError::EmptyWalk);
    }
    if let Some(&v) = walk.iter().find(|&&v| v >= inst.num_vertices()) {
        return Err(TourError::VertexOutOfRange(v));
    }
    if walk[0] != inst.depot() || walk[walk.len() - 1] != inst.depot() {
        return Err(TourError::NotClosedAtDepot);
    }
    for (pos, pair) in walk.windows(2).enumerate() {
        if !inst.has_edge(pair[0], pair[1]) {
            return Err(TourError::NonAdjacentStep {
                pos,
                from: pair[0],
                to: pair[1],
            });
        }
    }
    Ok(())
}

/// One feasibility violation; indices refer to the solution's tour list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyWalk {
        tour: usize,
    },
    NotClosedAtDepot {
        tour: usize,
    },
    VertexOutOfRange {
        tour: usize,
        vertex: usize,
    },
    NonAdjacentStep {
        tour: usize,
        pos: usize,
        from: usize,
        to: usize,
    },
    CapacityExceeded {
        tour: usize,
        covered: usize,
        capacity: usize,
    },
    CoveredDepot {
        tour: usize,
    },
    CoveredNotOnWalk {
        tour: usize,
        terminal: usize,
    },
    TerminalUncovered {
        terminal: usize,
    },
    TerminalMultiplyCovered {
        terminal: usize,
        tours: Vec<usize>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyWalk { tour } => write!(f, "tour {tour}: empty walk"),
            Violation::NotClosedAtDepot { tour } => {
                write!(f, "tour {tour}: walk does not start and end at the depot")
            }
            Violation::VertexOutOfRange { tour, vertex } => {
                write!(f, "tour {tour}: vertex {vertex} out of range")
            }
            Violation::NonAdjacentStep {
                tour,
                pos,
                from,
                to,
            } => write!(f, "tour {tour}: step {pos} uses non-edge ({from}, {to})"),
            Violation::CapacityExceeded {
                tour,
                covered,
                capacity,
            } => write!(
                f,
                "tour {tour}: covers {covered} terminals, capacity is {capacity}"
            ),
            Violation::CoveredDepot { tour } => {
                write!(f, "tour {tour}: depot listed as covered")
            }
            Violation::CoveredNotOnWalk { tour, terminal } => write!(
                f,
                "tour {tour}: covers terminal {terminal} that is not on its walk"
            ),
            Violation::TerminalUncovered { terminal } => {
                write!(f, "terminal {terminal} is not covered by any tour")
            }
            Violation::TerminalMultiplyCovered { terminal, tours } => {
                write!(f, "terminal {terminal} is covered by tours {tours:?}")
            }
        }
    }
}

/// Outcome of [`validate_solution`]: all violations, plus the total cost.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub total_cost: u64,
}

impl ValidationReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a solution against the instance. Violations are report content,
/// not errors; an empty violation list means the solution is feasible.
pub fn validate_solution(inst: &Instance, sol: &CvrpSolution) -> ValidationReport {
    let mut violations = Vec::new();
    let mut coverage: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (idx, tour) in sol.tours.iter().enumerate() {
        match check_closed_walk(inst, &tour.walk) {
            Ok(()) => {}
            Err(TourError::EmptyWalk) => violations.push(Violation::EmptyWalk { tour: idx }),
            Err(TourError::NotClosedAtDepot) => {
                violations.push(Violation::NotClosedAtDepot { tour: idx })
            }
            Err(TourError::VertexOutOfRange(v)) => violations.push(Violation::VertexOutOfRange {
                tour: idx,
                vertex: v,
            }),
            Err(TourError::NonAdjacentStep { pos, from, to }) => {
                violations.push(Violation::NonAdjacentStep {
                    tour: idx,
                    pos,
                    from,
                    to,
                })
            }
            Err(TourError::MissingTerminal(_)) => unreachable!("not checked here"),
        }
        if tour.covered.len() > inst.capacity() {
            violations.push(Violation::CapacityExceeded {
                tour: idx,
                covered: tour.covered.len(),
                capacity: inst.capacity(),
            });
        }
        let on_walk: BTreeSet<usize> = tour.walk.iter().copied().collect();
        for &t in &tour.covered {
            if t == inst.depot() {
                violations.push(Violation::CoveredDepot { tour: idx });
                continue;
            }
            if t >= inst.num_vertices() {
                violations.push(Violation::VertexOutOfRange {
                    tour: idx,
                    vertex: t,
                });
                continue;
            }
            if !on_walk.contains(&t) {
                violations.push(Violation::CoveredNotOnWalk {
                    tour: idx,
                    terminal: t,
                });
            }
            coverage.entry(t).or_default().push(idx);
        }
    }
    for t in inst.terminals() {
        match coverage.get(&t) {
            None => violations.push(Violation::TerminalUncovered { terminal: t }),
            Some(tours) if tours.len() > 1 => violations.push(Violation::TerminalMultiplyCovered {
                terminal: t,
                tours: tours.clone(),
            }),
            _ => {}
        }
    }
    ValidationReport {
        violations,
        total_cost: sol.total_cost(),
    }
}

/// Replaces each consecutive hop pair by an actual shortest path in the
/// graph. The resulting walk costs exactly the sum of pairwise distances of
/// consecutive hops.
pub fn expand_metric_path(oracle: &DistanceOracle, hops: &[usize]) -> Vec<usize> {
    assert!(!hops.is_empty(), "hops must be nonempty");
    let mut walk = vec![hops[0]];
    for pair in hops.windows(2) {
        let segment = oracle.shortest_path(pair[0], pair[1]);
        walk.extend_from_slice(&segment[1..]);
    }
    walk
}

/// Errors when decoding the JSON solution schema.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolutionJsonError {
    #[error("tour {tour}: walk is empty")]
    EmptyWalk { tour: usize },
    #[error("tour {tour}: ids are 1-based, found 0")]
    ZeroId { tour: usize },
    #[error("tour {tour}: declared cost {declared} does not match walk length {actual}")]
    CostMismatch {
        tour: usize,
        declared: u64,
        actual: u64,
    },
    #[error("declared total cost {declared} does not match sum of tour costs {actual}")]
    TotalCostMismatch { declared: u64, actual: u64 },
}

/// JSON form of one tour; ids are 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TourJson {
    pub walk: Vec<usize>,
    pub covered: Vec<usize>,
    pub cost: u64,
}

/// JSON form of a whole solution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionJson {
    pub capacity: usize,
    pub tours: Vec<TourJson>,
    pub total_cost: u64,
}

/// Converts a solution to its JSON schema (1-based ids, sorted covered sets).
pub fn solution_to_json(capacity: usize, sol: &CvrpSolution) -> SolutionJson {
    SolutionJson {
        capacity,
        tours: sol
            .tours
            .iter()
            .map(|t| TourJson {
                walk: t.walk.iter().map(|&v| v + 1).collect(),
                covered: t.covered.iter().map(|&v| v + 1).collect(),
                cost: t.cost(),
            })
            .collect(),
        total_cost: sol.total_cost(),
    }
}

/// Decodes the JSON schema back to a solution, checking that the redundant
/// cost fields are consistent.
pub fn solution_from_json(json: &SolutionJson) -> Result<CvrpSolution, SolutionJsonError> {
    let mut tours = Vec::with_capacity(json.tours.len());
    for (idx, t) in json.tours.iter().enumerate() {
        if t.walk.is_empty() {
            return Err(SolutionJsonError::EmptyWalk { tour: idx });
        }
        if t.walk.iter().chain(t.covered.iter()).any(|&v| v == 0) {
            return Err(SolutionJsonError::ZeroId { tour: idx });
        }
        let actual = (t.walk.len() - 1) as u64;
        if t.cost != actual {
            return Err(SolutionJsonError::CostMismatch {
                tour: idx,
                declared: t.cost,
                actual,
            });
        }
        tours.push(Tour::new(
            t.walk.iter().map(|&v| v - 1).collect(),
            t.covered.iter().map(|&v| v - 1),
        ));
    }
    let sol = CvrpSolution::new(tours);
    let actual = sol.total_cost();
    if json.total_cost != actual {
        return Err(SolutionJsonError::TotalCostMismatch {
            declared: json.total_cost,
            actual,
        });
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_cycle_instance() -> Instance {
        // Two 4-edge cycles sharing the depot; terminals 1..=3 and 4..=6.
        Instance::new(
            7,
            0,
            vec![
                (0, 1),
                (1, 2),
                (2, 3),
                (0, 3),
                (0, 4),
                (4, 5),
                (5, 6),
                (0, 6),
            ],
            3,
        )
        .unwrap()
    }

    fn two_cycle_solution() -> CvrpSolution {
        CvrpSolution::new(vec![
            Tour::new(vec![0, 1, 2, 3, 0], [1, 2, 3]),
            Tour::new(vec![0, 4, 5, 6, 0], [4, 5, 6]),
        ])
    }

    #[test]
    fn two_cycle_solution_is_feasible_at_cost_eight() {
        let inst = two_cycle_instance();
        let report = validate_solution(&inst, &two_cycle_solution());
        assert!(report.is_feasible(), "{:?}", report.violations);
        assert_eq!(report.total_cost, 8);
    }

    #[test]
    fn double_coverage_is_reported() {
        let inst = two_cycle_instance();
        let mut sol = two_cycle_solution();
        sol.tours[1].covered.insert(1);
        let report = validate_solution(&inst, &sol);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::TerminalMultiplyCovered { terminal: 1, .. })));
        // Terminal 1 is not on the second walk either.
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::CoveredNotOnWalk {
                tour: 1,
                terminal: 1
            }
        )));
    }

    #[test]
    fn adjacency_break_is_reported() {
        let inst = two_cycle_instance();
        let sol = CvrpSolution::new(vec![
            Tour::new(vec![0, 1, 3, 2, 3, 0], [1, 2, 3]),
            Tour::new(vec![0, 4, 5, 6, 0], [4, 5, 6]),
        ]);
        let report = validate_solution(&inst, &sol);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::NonAdjacentStep { tour: 0, .. })));
    }

    #[test]
    fn capacity_breach_and_uncovered_are_reported() {
        let inst = two_cycle_instance();
        let sol = CvrpSolution::new(vec![Tour::new(
            vec![0, 1, 2, 3, 0, 4, 5, 6, 0],
            [1, 2, 3, 4, 5, 6],
        )]);
        let report = validate_solution(&inst, &sol);
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::CapacityExceeded {
                tour: 0,
                covered: 6,
                capacity: 3
            }
        )));
    }

    #[test]
    fn expand_on_path_graph() {
        let inst = Instance::new(3, 0, vec![(0, 1), (1, 2)], 2).unwrap();
        let oracle = DistanceOracle::new(&inst);
        assert_eq!(expand_metric_path(&oracle, &[0, 2]), vec![0, 1, 2]);
        assert_eq!(expand_metric_path(&oracle, &[1]), vec![1]);
        assert_eq!(expand_metric_path(&oracle, &[0, 2, 0]), vec![0, 1, 2, 1, 0]);
    }

    #[test]
    fn expand_cost_matches_pairwise_sums() {
        let inst = two_cycle_instance();
        let oracle = DistanceOracle::new(&inst);
        let hops = [0, 2, 5, 1, 0];
        let walk = expand_metric_path(&oracle, &hops);
        let expected: u64 = hops.windows(2).map(|p| oracle.pairwise(p[0], p[1])).sum();
        assert_eq!((walk.len() - 1) as u64, expected);
    }

    #[test]
    fn tsp_tour_requires_all_terminals() {
        let inst = two_cycle_instance();
        let err = TspTour::new(&inst, vec![0, 1, 2, 3, 0]).unwrap_err();
        assert!(matches!(err, TourError::MissingTerminal(_)));
    }

    #[test]
    fn tsp_tour_orders_by_first_occurrence() {
        let inst = Instance::new(3, 0, vec![(0, 1), (1, 2)], 2).unwrap();
        let tour = TspTour::new(&inst, vec![0, 1, 2, 1, 0]).unwrap();
        assert_eq!(tour.terminal_order(), &[1, 2]);
        assert_eq!(tour.first_occurrence(), &[1, 2]);
        assert_eq!(tour.cost(), 4);
    }

    #[test]
    fn json_round_trip() {
        let sol = two_cycle_solution();
        let json = solution_to_json(3, &sol);
        assert_eq!(json.total_cost, 8);
        assert_eq!(json.tours[0].walk, vec![1, 2, 3, 4, 1]);
        let back = solution_from_json(&json).unwrap();
        assert_eq!(back, sol);
    }

    #[test]
    fn json_rejects_cost_tampering() {
        let mut json = solution_to_json(3, &two_cycle_solution());
        json.tours[0].cost = 3;
        assert!(matches!(
            solution_from_json(&json),
            Err(SolutionJsonError::CostMismatch { tour: 0, .. })
        ));
    }
}
