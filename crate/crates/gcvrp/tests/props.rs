//! Property tests for the library's structural invariants.

mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use gcvrp::bounds::{rat_u64, structure_bound};
use gcvrp::graph::{DistanceOracle, Instance};
use gcvrp::instgen::{self, SplitMix64};
use gcvrp::itp::{itp_with_report, offset_cost_average};
use gcvrp::oracle::exact_cvrp;
use gcvrp::tour::{expand_metric_path, validate_solution, CvrpSolution, Tour, TspTour};
use gcvrp::tsp::{
    christofides, double_tree, exact_tsp, min_weight_perfect_matching, MatchingProblem,
};

/// Random closed walk from the depot that visits every terminal: random
/// neighbor steps, interleaved with beelines to unvisited terminals, then a
/// shortest path home. Produces walks with plenty of repeated vertices.
fn random_tsp_walk(inst: &Instance, rng: &mut SplitMix64) -> Vec<usize> {
    let dist = common::hop_matrix(inst);
    let depot = inst.depot();
    let mut walk = vec![depot];
    let mut unvisited: BTreeSet<usize> = inst.terminals().collect();
    unvisited.remove(&depot);
    let mut wandering_budget = 20 * inst.num_vertices();
    while !unvisited.is_empty() {
        let cur = *walk.last().unwrap();
        let next = if wandering_budget > 0 && rng.next_below(4) != 0 {
            wandering_budget -= 1;
            let nbrs = inst.neighbors(cur);
            nbrs[rng.next_below(nbrs.len() as u64) as usize]
        } else {
            let targets: Vec<usize> = unvisited.iter().copied().collect();
            let t = targets[rng.next_below(targets.len() as u64) as usize];
            inst.neighbors(cur)
                .iter()
                .copied()
                .find(|&x| dist[x][t] + 1 == dist[cur][t])
                .unwrap()
        };
        walk.push(next);
        unvisited.remove(&next);
    }
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
    walk
}

/// A graph that contains a Hamiltonian cycle through the depot (a random
/// terminal permutation ring plus random chords), together with that cycle
/// as a walk: each terminal occurs exactly once on it.
fn hamiltonian_instance(seed: u64, n: usize) -> (Instance, Vec<usize>) {
    let mut rng = SplitMix64::new(seed);
    let mut perm: Vec<usize> = (1..=n).collect();
    for i in (1..perm.len()).rev() {
        let j = rng.next_below((i + 1) as u64) as usize;
        perm.swap(i, j);
    }
    let mut edges = vec![(0, perm[0]), (0, perm[n - 1])];
    for w in perm.windows(2) {
        edges.push((w[0], w[1]));
    }
    let mut edge_set: BTreeSet<(usize, usize)> =
        edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    for u in 0..=n {
        for v in (u + 1)..=n {
            if rng.next_f64() < 0.25 {
                edge_set.insert((u, v));
            }
        }
    }
    let capacity = 1 + rng.next_below(n as u64) as usize;
    let inst = Instance::new(n + 1, 0, edge_set.into_iter().collect(), capacity).unwrap();
    let mut walk = vec![0];
    walk.extend_from_slice(&perm);
    walk.push(0);
    (inst, walk)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hop_metric_satisfies_triangle_inequality(seed in any::<u64>(), nv in 2usize..=50) {
        let inst = instgen::random_connected(nv, 0.15, seed, 1).unwrap();
        let oracle = DistanceOracle::new(&inst);
        let mut rng = SplitMix64::new(seed ^ 0xabc);
        for _ in 0..200 {
            let u = rng.next_below(nv as u64) as usize;
            let v = rng.next_below(nv as u64) as usize;
            let w = rng.next_below(nv as u64) as usize;
            prop_assert!(oracle.pairwise(u, w) <= oracle.pairwise(u, v) + oracle.pairwise(v, w));
            prop_assert_eq!(oracle.pairwise(u, v), oracle.pairwise(v, u));
            prop_assert_eq!(oracle.pairwise(u, u), 0);
        }
        for v in 0..nv {
            prop_assert_eq!(oracle.dist(v), oracle.pairwise(v, inst.depot()));
        }
    }

    // Canonical files are a fixed point of parse/serialize. (The requested
    // pre-clamp capacity is not part of the file format, so compare the
    // canonical form, not the construction-time memo.)
    #[test]
    fn parse_of_serialize_is_identity(seed in any::<u64>(), nv in 2usize..30, p in 0.0f64..=1.0) {
        let inst = instgen::random_connected(nv, p, seed, 1 + (seed % 7) as usize).unwrap();
        let text = inst.to_gcvrp();
        let back = Instance::parse(&text).unwrap();
        prop_assert_eq!(back.num_vertices(), inst.num_vertices());
        prop_assert_eq!(back.depot(), inst.depot());
        prop_assert_eq!(back.capacity(), inst.capacity());
        prop_assert_eq!(back.edges(), inst.edges());
        prop_assert_eq!(back.to_gcvrp(), text);
    }

    #[test]
    fn expansion_cost_equals_pairwise_sums(seed in any::<u64>()) {
        let inst = common::random_instance(seed, 15);
        let oracle = DistanceOracle::new(&inst);
        let mut rng = SplitMix64::new(seed ^ 0x515);
        let len = 1 + rng.next_below(10) as usize;
        let hops: Vec<usize> = (0..len)
            .map(|_| rng.next_below(inst.num_vertices() as u64) as usize)
            .collect();
        let walk = expand_metric_path(&oracle, &hops);
        let expected: u64 = hops.windows(2).map(|p| oracle.pairwise(p[0], p[1])).sum();
        prop_assert_eq!((walk.len() - 1) as u64, expected);
        for w in walk.windows(2) {
            prop_assert!(inst.has_edge(w[0], w[1]));
        }
    }

    #[test]
    fn itp_min_at_most_average_at_most_guarantee(seed in any::<u64>()) {
        let inst = common::random_instance(seed, 12);
        let mut rng = SplitMix64::new(seed ^ 0x9191);
        let s = TspTour::new(&inst, random_tsp_walk(&inst, &mut rng)).unwrap();
        let (sol, report) = itp_with_report(&inst, &s).unwrap();
        prop_assert!(validate_solution(&inst, &sol).is_feasible());
        let min = rat_u64(report.min_cost());
        let avg = offset_cost_average(&report);
        prop_assert!(min <= avg.clone());
        prop_assert!(avg <= report.ag_bound);
    }

    // Reversing the tour mirrors the segment multiset, so the minimum
    // offset cost is unchanged — provided each terminal occurs exactly once
    // on the walk. (With repeated visits the first-occurrence order of the
    // reversed walk is not the mirror of the forward one and the minima can
    // genuinely differ, so those walks only promise the averaging bound,
    // which `itp` asserts on every run.)
    #[test]
    fn itp_min_cost_is_reversal_invariant_on_single_visit_walks(
        seed in any::<u64>(),
        n in 2usize..=10,
    ) {
        let (inst, walk) = hamiltonian_instance(seed, n);
        let reversed: Vec<usize> = walk.iter().rev().copied().collect();
        let s = TspTour::new(&inst, walk).unwrap();
        let s_rev = TspTour::new(&inst, reversed).unwrap();
        let (_, fwd) = itp_with_report(&inst, &s).unwrap();
        let (_, rev) = itp_with_report(&inst, &s_rev).unwrap();
        prop_assert_eq!(fwd.min_cost(), rev.min_cost());
    }

    // For general walks with repeated visits only the guarantee itself is
    // direction-independent.
    #[test]
    fn itp_guarantee_holds_in_both_directions(seed in any::<u64>()) {
        let inst = common::random_instance(seed, 12);
        let mut rng = SplitMix64::new(seed ^ 0x7777);
        let walk = random_tsp_walk(&inst, &mut rng);
        let reversed: Vec<usize> = walk.iter().rev().copied().collect();
        let s = TspTour::new(&inst, walk).unwrap();
        let s_rev = TspTour::new(&inst, reversed).unwrap();
        let (_, fwd) = itp_with_report(&inst, &s).unwrap();
        let (_, rev) = itp_with_report(&inst, &s_rev).unwrap();
        prop_assert!(fwd.ag_bound_ok && rev.ag_bound_ok);
        prop_assert_eq!(fwd.ag_bound, rev.ag_bound);
    }

    // The Held-Karp path is checked against plain enumeration of visiting
    // orders.
    #[test]
    fn exact_tsp_matches_permutation_enumeration(seed in any::<u64>()) {
        let inst = common::random_instance(seed, 8);
        prop_assert_eq!(exact_tsp(&inst).unwrap().cost(), common::tsp_brute_force(&inst));
    }

    #[test]
    fn solver_cost_ordering(seed in any::<u64>()) {
        let inst = common::random_instance(seed, 12);
        let n = inst.num_terminals() as u64;
        let opt = exact_tsp(&inst).unwrap().cost();
        let chr = christofides(&inst).cost();
        let dbl = double_tree(&inst).cost();
        prop_assert!(opt <= chr);
        prop_assert!(opt <= dbl);
        prop_assert!(dbl <= 2 * n);
        prop_assert!(2 * chr <= 2 * n + opt);
        let oracle = DistanceOracle::new(&inst);
        let deepest = inst.terminals().map(|v| oracle.dist(v)).max().unwrap();
        prop_assert!(opt >= 2 * deepest);
    }

    #[test]
    fn oracle_is_a_true_lower_bound_for_itp(seed in any::<u64>()) {
        let inst = common::random_instance(seed, 10);
        let opt = exact_cvrp(&inst).unwrap().total_cost();
        for tour in [christofides(&inst), double_tree(&inst)] {
            let (sol, _) = itp_with_report(&inst, &tour).unwrap();
            prop_assert!(opt <= sol.total_cost());
        }
        prop_assert!(rat_u64(opt) >= structure_bound(&inst));
        if inst.capacity() >= 2 {
            prop_assert!(structure_bound(&inst) > gcvrp::bounds::radius_cost(&inst));
        }
    }

    #[test]
    fn blossom_matches_dp_on_random_tables(seed in any::<u64>(), half in 1usize..=5) {
        let m = 2 * half;
        let mut rng = SplitMix64::new(seed);
        let mut weights = vec![vec![0u64; m]; m];
        #[allow(clippy::needless_range_loop)]
        for a in 0..m {
            for b in (a + 1)..m {
                let w = rng.next_below(100);
                weights[a][b] = w;
                weights[b][a] = w;
            }
        }
        let expected = common::min_matching_dp(&weights);
        let ws = weights.clone();
        let prob = MatchingProblem::new((0..m).collect(), |a, b| ws[a][b]);
        let got = min_weight_perfect_matching(&prob).unwrap();
        prop_assert_eq!(got.total_weight, expected);
    }
}

/// Every partition of the terminals into parts of size at most `k` induces
/// a feasible solution, and the validator accepts exactly those; dropping
/// or double-booking coverage must be flagged.
#[test]
fn validator_agrees_with_partition_semantics_on_small_instances() {
    // Exhaustive through five vertices, sampled on six.
    let mut cases: Vec<(usize, Vec<(usize, usize)>)> = Vec::new();
    for v in 2..=5usize {
        for edges in common::all_connected_graphs(v) {
            cases.push((v, edges));
        }
    }
    for (i, edges) in common::all_connected_graphs(6).into_iter().enumerate() {
        if i % 97 == 0 {
            cases.push((6, edges));
        }
    }
    for (v, edges) in cases {
        let inst = Instance::new(v, 0, edges, (v - 1).clamp(1, 2)).unwrap();
        let dist = common::hop_matrix(&inst);
        let terminals: Vec<usize> = inst.terminals().collect();
        for partition in all_partitions(&terminals, inst.capacity()) {
            let sol = solution_from_partition(&inst, &dist, &partition);
            let report = validate_solution(&inst, &sol);
            assert!(
                report.is_feasible(),
                "{:?} on {:?}",
                report.violations,
                partition
            );

            // Dropping a covered terminal breaks feasibility.
            let mut tampered = sol.clone();
            let victim = *tampered.tours[0].covered.iter().next().unwrap();
            tampered.tours[0].covered.remove(&victim);
            assert!(!validate_solution(&inst, &tampered).is_feasible());

            // Double coverage breaks feasibility.
            if sol.tours.len() >= 2 {
                let mut tampered = sol.clone();
                let dup = *tampered.tours[0].covered.iter().next().unwrap();
                tampered.tours[1].covered.insert(dup);
                assert!(!validate_solution(&inst, &tampered).is_feasible());
            }
        }
    }
}

fn all_partitions(items: &[usize], max_part: usize) -> Vec<Vec<Vec<usize>>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let first = items[0];
    let rest = &items[1..];
    let mut out = Vec::new();
    for mask in 0..(1usize << rest.len()) {
        if (mask.count_ones() as usize) + 1 > max_part {
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
        for mut tail in all_partitions(&others, max_part) {
            let mut partition = vec![part.clone()];
            partition.append(&mut tail);
            out.push(partition);
        }
    }
    out
}

fn solution_from_partition(
    inst: &Instance,
    dist: &[Vec<u64>],
    partition: &[Vec<usize>],
) -> CvrpSolution {
    let step_toward = |cur: usize, target: usize| {
        inst.neighbors(cur)
            .iter()
            .copied()
            .find(|&x| dist[x][target] + 1 == dist[cur][target])
            .unwrap()
    };
    let tours = partition
        .iter()
        .map(|part| {
            let mut walk = vec![inst.depot()];
            for &stop in part.iter().chain(std::iter::once(&inst.depot())) {
                while *walk.last().unwrap() != stop {
                    let cur = *walk.last().unwrap();
                    walk.push(step_toward(cur, stop));
                }
            }
            Tour::new(walk, part.iter().copied())
        })
        .collect();
    CvrpSolution::new(tours)
}
