//! Traveling salesman tours in the hop metric: an exact Held-Karp solver,
//! tree doubling, and Christofides with exact minimum-weight perfect
//! matching.
//!
//! All constructions work on the metric closure of the instance and expand
//! the resulting visiting order back into an actual walk, so returned tours
//! are valid closed walks in the original graph.

pub mod matching;

use thiserror::Error;

use crate::graph::{DistanceOracle, Instance};
use crate::tour::{expand_metric_path, TspTour};

pub use matching::{min_weight_perfect_matching, Matching, MatchingError, MatchingProblem};

/// Default limit on `num_vertices` for the exact solver (the Held-Karp
/// table grows as `n * 2^n`).
pub const DEFAULT_EXACT_TSP_VERTEX_LIMIT: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TspError {
    #[error("instance with {vertices} vertices exceeds the exact solver limit of {limit}")]
    TooLarge { vertices: usize, limit: usize },
}

/// A spanning tree of the instance graph; its cost is always exactly `n`
/// because every edge costs one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    /// Tree edges as `(parent, child)` in BFS discovery order.
    pub edges: Vec<(usize, usize)>,
    /// `parent[v]`, `None` for the depot root.
    pub parent: Vec<Option<usize>>,
}

impl SpanningTree {
    pub fn cost(&self) -> u64 {
        self.edges.len() as u64
    }

    /// Vertex degrees within the tree.
    pub fn degrees(&self, num_vertices: usize) -> Vec<usize> {
        let mut deg = vec![0usize; num_vertices];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }
}

/// BFS tree rooted at the depot. Deterministic: neighbor lists are sorted,
/// so each vertex's parent is its lowest-numbered neighbor on the previous
/// BFS level.
pub fn spanning_tree(inst: &Instance) -> SpanningTree {
    let mut parent = vec![None; inst.num_vertices()];
    let mut visited = vec![false; inst.num_vertices()];
    let mut edges = Vec::with_capacity(inst.num_terminals());
    let mut queue = std::collections::VecDeque::new();
    visited[inst.depot()] = true;
    queue.push_back(inst.depot());
    while let Some(u) = queue.pop_front() {
        for &w in inst.neighbors(u) {
            if !visited[w] {
                visited[w] = true;
                parent[w] = Some(u);
                edges.push((u, w));
                queue.push_back(w);
            }
        }
    }
    SpanningTree { edges, parent }
}

/// Exact optimum closed-walk cost via Held-Karp on the metric closure,
/// expanded back to a graph walk. Refuses instances above `limit` vertices.
pub fn exact_tsp_with_limit(inst: &Instance, limit: usize) -> Result<TspTour, TspError> {
    if inst.num_vertices() > limit {
        return Err(TspError::TooLarge {
            vertices: inst.num_vertices(),
            limit,
        });
    }
    let oracle = DistanceOracle::new(inst);
    let terminals: Vec<usize> = inst.terminals().collect();
    let dist = closure_matrix(&oracle, inst.depot(), &terminals);
    let (_, order) = held_karp_cycle(&dist);
    let mut hops = vec![inst.depot()];
    hops.extend(order.iter().map(|&i| terminals[i - 1]));
    hops.push(inst.depot());
    let walk = expand_metric_path(&oracle, &hops);
    Ok(TspTour::new(inst, walk).expect("expansion yields a valid tour"))
}

/// [`exact_tsp_with_limit`] at the default limit.
pub fn exact_tsp(inst: &Instance) -> Result<TspTour, TspError> {
    exact_tsp_with_limit(inst, DEFAULT_EXACT_TSP_VERTEX_LIMIT)
}

/// Christofides: BFS spanning tree, exact minimum-weight perfect matching on
/// its odd-degree vertices (weights are hop distances), Euler circuit of the
/// union, shortcut to first occurrences, expand. The result costs at most
/// `n + opt_tsp/2`.
pub fn christofides(inst: &Instance) -> TspTour {
    let oracle = DistanceOracle::new(inst);
    let tree = spanning_tree(inst);
    let degrees = tree.degrees(inst.num_vertices());
    let odd: Vec<usize> = (0..inst.num_vertices())
        .filter(|&v| degrees[v] % 2 == 1)
        .collect();
    let problem = MatchingProblem::new(odd, |u, v| oracle.pairwise(u, v));
    let matched = min_weight_perfect_matching(&problem).expect("odd-degree vertices come in pairs");

    // Multigraph of tree edges plus matching edges (the latter stand for
    // shortest paths in the closure); all degrees are even.
    let mut multi_adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); inst.num_vertices()];
    let mut edge_id = 0usize;
    let add = |adj: &mut Vec<Vec<(usize, usize)>>, u: usize, v: usize, id: usize| {
        adj[u].push((v, id));
        adj[v].push((u, id));
    };
    for &(u, v) in &tree.edges {
        add(&mut multi_adj, u, v, edge_id);
        edge_id += 1;
    }
    for &(u, v) in &matched.pairs {
        add(&mut multi_adj, u, v, edge_id);
        edge_id += 1;
    }
    for list in &mut multi_adj {
        list.sort_unstable();
    }
    let circuit = euler_circuit(&multi_adj, edge_id, inst.depot());

    let mut hops = vec![inst.depot()];
    let mut seen = vec![false; inst.num_vertices()];
    seen[inst.depot()] = true;
    for &v in &circuit[1..] {
        if !seen[v] {
            seen[v] = true;
            hops.push(v);
        }
    }
    hops.push(inst.depot());
    let walk = expand_metric_path(&oracle, &hops);
    TspTour::new(inst, walk).expect("shortcut circuit visits every vertex")
}

/// Tree doubling: preorder traversal of the BFS tree shortcut through the
/// closure. A matching-free baseline of cost at most `2n`.
pub fn double_tree(inst: &Instance) -> TspTour {
    let oracle = DistanceOracle::new(inst);
    let tree = spanning_tree(inst);
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); inst.num_vertices()];
    for &(u, v) in &tree.edges {
        children[u].push(v);
    }
    for list in &mut children {
        list.sort_unstable();
    }
    let mut hops = Vec::with_capacity(inst.num_vertices() + 1);
    let mut stack = vec![inst.depot()];
    while let Some(v) = stack.pop() {
        hops.push(v);
        for &c in children[v].iter().rev() {
            stack.push(c);
        }
    }
    hops.push(inst.depot());
    let walk = expand_metric_path(&oracle, &hops);
    TspTour::new(inst, walk).expect("preorder visits every vertex")
}

/// Hierholzer's algorithm on an even-degree connected multigraph,
/// deterministic because adjacency lists are sorted.
fn euler_circuit(adj: &[Vec<(usize, usize)>], num_edges: usize, start: usize) -> Vec<usize> {
    let mut next = vec![0usize; adj.len()];
    let mut used = vec![false; num_edges];
    let mut stack = vec![start];
    let mut circuit = Vec::with_capacity(num_edges + 1);
    while let Some(&v) = stack.last() {
        let mut advanced = false;
        while next[v] < adj[v].len() {
            let (w, id) = adj[v][next[v]];
            next[v] += 1;
            if !used[id] {
                used[id] = true;
                stack.push(w);
                advanced = true;
                break;
            }
        }
        if !advanced {
            circuit.push(v);
            stack.pop();
        }
    }
    circuit.reverse();
    debug_assert!(used.iter().all(|&u| u), "multigraph must be connected");
    circuit
}

/// Distance matrix of the metric closure with the depot at index 0 and the
/// given vertices at indices `1..`.
pub(crate) fn closure_matrix(
    oracle: &DistanceOracle,
    depot: usize,
    vertices: &[usize],
) -> Vec<Vec<u64>> {
    let mut ids = Vec::with_capacity(vertices.len() + 1);
    ids.push(depot);
    ids.extend_from_slice(vertices);
    ids.iter()
        .map(|&u| ids.iter().map(|&v| oracle.pairwise(u, v)).collect())
        .collect()
}

/// Held-Karp path table: `dp[mask][e]` is the cheapest path from index 0
/// through exactly the index set `mask` (over indices `1..=m`), ending at
/// `e`. Returns the table and parent pointers for reconstruction.
fn held_karp_table(dist: &[Vec<u64>]) -> (Vec<Vec<u64>>, Vec<Vec<usize>>) {
    let m = dist.len() - 1;
    let full = 1usize << m;
    let mut dp = vec![vec![u64::MAX; m]; full];
    let mut parent = vec![vec![usize::MAX; m]; full];
    for e in 0..m {
        dp[1 << e][e] = dist[0][e + 1];
    }
    for mask in 1..full {
        for e in 0..m {
            if mask & (1 << e) == 0 || dp[mask][e] == u64::MAX {
                continue;
            }
            let base = dp[mask][e];
            for f in 0..m {
                if mask & (1 << f) != 0 {
                    continue;
                }
                let next = mask | (1 << f);
                let cand = base + dist[e + 1][f + 1];
                if cand < dp[next][f] {
                    dp[next][f] = cand;
                    parent[next][f] = e;
                }
            }
        }
    }
    (dp, parent)
}

/// Minimum closed-tour cost and visiting order over a closure matrix with
/// the depot at index 0. The order lists matrix indices `1..=m`.
pub(crate) fn held_karp_cycle(dist: &[Vec<u64>]) -> (u64, Vec<usize>) {
    let m = dist.len() - 1;
    if m == 0 {
        return (0, Vec::new());
    }
    let (dp, parent) = held_karp_table(dist);
    let full = (1usize << m) - 1;
    let (mut best_end, mut best_cost) = (0usize, u64::MAX);
    for e in 0..m {
        let cand = dp[full][e].saturating_add(dist[e + 1][0]);
        if cand < best_cost {
            best_cost = cand;
            best_end = e;
        }
    }
    let mut order = Vec::with_capacity(m);
    let mut mask = full;
    let mut e = best_end;
    loop {
        order.push(e + 1);
        let p = parent[mask][e];
        mask &= !(1 << e);
        if mask == 0 {
            break;
        }
        e = p;
    }
    order.reverse();
    (best_cost, order)
}

/// Optimal closed-tour cost for every subset of the closure's non-depot
/// indices at once; entry `mask` covers exactly the indices in `mask`.
pub(crate) fn held_karp_all_subset_costs(dist: &[Vec<u64>]) -> Vec<u64> {
    let m = dist.len() - 1;
    let (dp, _) = held_karp_table(dist);
    let mut closed = vec![u64::MAX; 1 << m];
    closed[0] = 0;
    for mask in 1..1usize << m {
        for e in 0..m {
            if mask & (1 << e) != 0 && dp[mask][e] != u64::MAX {
                let cand = dp[mask][e] + dist[e + 1][0];
                if cand < closed[mask] {
                    closed[mask] = cand;
                }
            }
        }
    }
    closed
}
