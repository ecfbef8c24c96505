//! Shared helpers and independent oracles for the integration suites.
//!
//! The oracles here deliberately avoid the library's solver paths: hop
//! distances come from a local BFS, TSP costs from permutation enumeration,
//! CVRP optima from raw set-partition recursion, and matching weights from
//! a bitmask DP.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::process::{Command, Output};

use gcvrp::graph::Instance;
use gcvrp::instgen::{self, SplitMix64, StructuredKind};
use gcvrp::tour::Tour;

/// All-pairs hop distances by plain BFS, independent of `DistanceOracle`.
pub fn hop_matrix(inst: &Instance) -> Vec<Vec<u64>> {
    let nv = inst.num_vertices();
    let mut all = Vec::with_capacity(nv);
    for src in 0..nv {
        let mut dist = vec![u64::MAX; nv];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &w in inst.neighbors(u) {
                if dist[w] == u64::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        all.push(dist);
    }
    all
}

fn for_each_permutation(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        for_each_permutation(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Cheapest closed walk from the depot through `group`, by trying every
/// visiting order.
pub fn group_tour_cost(dist: &[Vec<u64>], depot: usize, group: &[usize]) -> u64 {
    let mut best = u64::MAX;
    let mut items = group.to_vec();
    for_each_permutation(&mut items, 0, &mut |perm| {
        let mut cost = dist[depot][perm[0]];
        for w in perm.windows(2) {
            cost += dist[w[0]][w[1]];
        }
        cost += dist[perm[perm.len() - 1]][depot];
        best = best.min(cost);
    });
    best
}

/// Optimal TSP cost by permutation enumeration (keep `n <= 8`).
pub fn tsp_brute_force(inst: &Instance) -> u64 {
    let dist = hop_matrix(inst);
    let terminals: Vec<usize> = inst.terminals().collect();
    group_tour_cost(&dist, inst.depot(), &terminals)
}

/// Optimal CVRP cost by enumerating every set partition of the terminals
/// into parts of size at most `k`, costing each part by permutation
/// enumeration. No memoization anywhere (keep `n <= 6`).
pub fn cvrp_brute_force(inst: &Instance) -> u64 {
    let dist = hop_matrix(inst);
    let terminals: Vec<usize> = inst.terminals().collect();
    partition_rec(&dist, inst.depot(), inst.capacity(), &terminals)
}

fn partition_rec(dist: &[Vec<u64>], depot: usize, k: usize, remaining: &[usize]) -> u64 {
    if remaining.is_empty() {
        return 0;
    }
    let first = remaining[0];
    let rest = &remaining[1..];
    let mut best = u64::MAX;
    // The part containing `first` is `first` plus any subset of the rest of
    // size < k; enumerating only such parts counts every partition once.
    for mask in 0..(1usize << rest.len()) {
        if (mask.count_ones() as usize) + 1 > k {
            continue;
        }
        let mut part = vec![first];
        let mut others = Vec::new();
        for (i, &t) in rest.iter().enumerate() {
            if mask & (1 << i) != 0 {
                part.push(t);
            } else {
                others.push(t);
            }
        }
        let cost = group_tour_cost(dist, depot, &part)
            .saturating_add(partition_rec(dist, depot, k, &others));
        best = best.min(cost);
    }
    best
}

/// Minimum-weight perfect matching by bitmask DP for up to 16 nodes.
pub fn min_matching_dp(weights: &[Vec<u64>]) -> u64 {
    let m = weights.len();
    assert!(m.is_multiple_of(2) && m <= 16);
    let full = 1usize << m;
    let mut dp = vec![u64::MAX; full];
    dp[0] = 0;
    for mask in 1..full {
        if !(mask.count_ones() as usize).is_multiple_of(2) {
            continue;
        }
        let a = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << a);
        let mut sub = rest;
        while sub != 0 {
            let b = sub.trailing_zeros() as usize;
            let prev = dp[mask & !(1 << a) & !(1 << b)];
            if prev != u64::MAX {
                dp[mask] = dp[mask].min(prev + weights[a][b]);
            }
            sub &= sub - 1;
        }
    }
    dp[full - 1]
}

/// Edge lists of every connected labeled graph on `v` vertices.
pub fn all_connected_graphs(v: usize) -> Vec<Vec<(usize, usize)>> {
    assert!((2..=6).contains(&v));
    let pairs: Vec<(usize, usize)> = (0..v)
        .flat_map(|a| ((a + 1)..v).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for mask in 0usize..(1 << pairs.len()) {
        let mut adj = vec![0u8; v];
        for (i, &(a, b)) in pairs.iter().enumerate() {
            if mask & (1 << i) != 0 {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
        let mut reach: u8 = 1;
        loop {
            let mut next = reach;
            #[allow(clippy::needless_range_loop)]
            for x in 0..v {
                if reach & (1 << x) != 0 {
                    next |= adj[x];
                }
            }
            if next == reach {
                break;
            }
            reach = next;
        }
        if reach == ((1u8 << v) - 1) {
            out.push(
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &e)| e)
                    .collect(),
            );
        }
    }
    out
}

/// Seeded random instance with at most `max_vertices` vertices and a random
/// capacity.
pub fn random_instance(seed: u64, max_vertices: usize) -> Instance {
    let mut rng = SplitMix64::new(seed.wrapping_mul(0x5851_f42d_4c95_7f2d).wrapping_add(1));
    let nv = 2 + rng.next_below((max_vertices - 1) as u64) as usize;
    let p = 0.1 + 0.8 * rng.next_f64();
    let capacity = 1 + rng.next_below((nv - 1) as u64) as usize;
    instgen::random_connected(nv, p, rng.next_u64(), capacity).unwrap()
}

/// A random valid tour: a random walk from the depot, closed by a shortest
/// path home, covering a random nonempty subset of the visited terminals
/// (at most `k` of them).
pub fn random_tour(inst: &Instance, rng: &mut SplitMix64) -> Tour {
    let dist = hop_matrix(inst);
    let depot = inst.depot();
    let mut walk = vec![depot];
    let steps = 1 + rng.next_below(2 * inst.num_vertices() as u64) as usize;
    for _ in 0..steps {
        let cur = *walk.last().unwrap();
        let nbrs = inst.neighbors(cur);
        walk.push(nbrs[rng.next_below(nbrs.len() as u64) as usize]);
    }
    // Walk home along a shortest path.
    while *walk.last().unwrap() != depot {
        let cur = *walk.last().unwrap();
        let next = inst
            .neighbors(cur)
            .iter()
            .copied()
            .find(|&x| dist[x][depot] + 1 == dist[cur][depot])
            .unwrap();
        walk.push(next);
    }
    let mut visited: Vec<usize> = walk
        .iter()
        .copied()
        .filter(|&v| v != depot)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    // Random nonempty covered subset within capacity.
    let take = 1 + rng.next_below(visited.len().min(inst.capacity()) as u64) as usize;
    for i in 0..take {
        let j = i + rng.next_below((visited.len() - i) as u64) as usize;
        visited.swap(i, j);
    }
    Tour::new(walk, visited[..take].iter().copied())
}

/// Fixed mixed corpus used by several criteria: structured fixtures, tight
/// families, and a seeded random batch. All instances stay small enough for
/// the exact TSP solver.
pub fn suite_instances() -> Vec<Instance> {
    let mut out = Vec::new();
    for (m, k) in [(1usize, 1usize), (3, 2), (5, 2), (7, 3)] {
        out.push(instgen::structured(StructuredKind::Path(m), k).unwrap());
    }
    for (m, k) in [(2usize, 1usize), (4, 2), (6, 4), (9, 3)] {
        out.push(instgen::structured(StructuredKind::Star(m), k).unwrap());
    }
    for (m, k) in [(4usize, 2usize), (8, 3), (11, 5)] {
        out.push(instgen::structured(StructuredKind::Cycle(m), k).unwrap());
    }
    for (r, c, k) in [(2usize, 2usize, 2usize), (2, 4, 3), (3, 4, 4)] {
        out.push(instgen::structured(StructuredKind::Grid(r, c), k).unwrap());
    }
    for (k, n) in [(3usize, 6usize), (3, 9), (3, 12), (5, 10)] {
        out.push(instgen::tight_instance(k, n).unwrap().instance);
    }
    for seed in 0..40u64 {
        out.push(random_instance(seed, 13));
    }
    out
}

/// Runs the compiled `gcvrp` binary with the given arguments.
pub fn run_cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcvrp"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout_str(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}
