//! Instance generators: the tight depot-cycle family, seeded random
//! connected graphs, and deterministic structured fixtures.

use num::BigInt;
use thiserror::Error;

use crate::bounds::Rational;
use crate::graph::Instance;
use crate::tour::{CvrpSolution, Tour};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstgenError {
    #[error("cycle capacity must be an odd integer >= 3, got {0}")]
    BadCycleCapacity(usize),
    #[error("terminal count {n} must be a positive multiple of capacity {k}")]
    NotAMultiple { n: usize, k: usize },
    #[error("need at least two vertices, got {0}")]
    TooFewVertices(usize),
    #[error("edge probability must lie in [0, 1], got {0}")]
    BadEdgeProbability(f64),
    #[error("invalid size for {kind}: {msg}")]
    BadSize { kind: &'static str, msg: String },
}

/// SplitMix64 (Steele, Lea & Flood 2014). Tiny, seed-stable across
/// platforms, with published constants, so golden instance files never
/// depend on a library's unspecified generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `0..bound` (`bound > 0`); modulo bias is irrelevant at the
    /// bounds used here.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

/// A tight-family instance plus its analytic quantities.
///
/// The graph is `n/k` cycles sharing only the depot, each cycle carrying
/// `k` terminals over `k + 1` edges. Riding each cycle once is optimal, so
/// the optimum equals `n + n/k`, which the structure bound matches exactly.
#[derive(Debug, Clone)]
pub struct TightFamily {
    pub instance: Instance,
    /// Terminal ids of each cycle, in path order between the two depot edges.
    pub cycles: Vec<Vec<usize>>,
    /// `(k + 1) * n / k = n + n/k`.
    pub analytic_opt: u64,
    /// `n/2 + n/k + n/(2k^2)`, exact.
    pub analytic_rad: Rational,
}

/// Builds the tight family for odd `k >= 3` and `n` a positive multiple of
/// `k`. The depot is vertex 0; cycle `c` owns terminals
/// `c*k + 1 ..= (c+1)*k`.
pub fn tight_instance(k: usize, n: usize) -> Result<TightFamily, InstgenError> {
    if k < 3 || k.is_multiple_of(2) {
        return Err(InstgenError::BadCycleCapacity(k));
    }
    if n == 0 || !n.is_multiple_of(k) {
        return Err(InstgenError::NotAMultiple { n, k });
    }
    let mut edges = Vec::with_capacity(n + n / k);
    let mut cycles = Vec::with_capacity(n / k);
    for c in 0..n / k {
        let first = c * k + 1;
        let last = c * k + k;
        edges.push((0, first));
        for v in first..last {
            edges.push((v, v + 1));
        }
        edges.push((0, last));
        cycles.push((first..=last).collect());
    }
    let instance = Instance::new(n + 1, 0, edges, k).expect("family construction is valid");
    let n_big = BigInt::from(n as u64);
    let k_big = BigInt::from(k as u64);
    let analytic_rad = Rational::new(n_big.clone(), BigInt::from(2u32))
        + Rational::new(n_big.clone(), k_big.clone())
        + Rational::new(n_big, BigInt::from(2u32) * &k_big * &k_big);
    Ok(TightFamily {
        instance,
        cycles,
        analytic_opt: (n + n / k) as u64,
        analytic_rad,
    })
}

/// The canonical optimal solution for a tight-family instance: one tour per
/// cycle, riding it end to end.
pub fn tight_solution(family: &TightFamily) -> CvrpSolution {
    let depot = family.instance.depot();
    let tours = family
        .cycles
        .iter()
        .map(|cycle| {
            let mut walk = Vec::with_capacity(cycle.len() + 2);
            walk.push(depot);
            walk.extend_from_slice(cycle);
            walk.push(depot);
            Tour::new(walk, cycle.iter().copied())
        })
        .collect();
    CvrpSolution::new(tours)
}

/// Seeded random connected graph: a uniform random labeled spanning tree
/// (drawn via a random Prüfer sequence), plus every non-tree pair
/// independently with probability `edge_prob`. Pairs are examined in
/// lexicographic order, so output is a pure function of the arguments.
/// The depot is vertex 0.
pub fn random_connected(
    n_vertices: usize,
    edge_prob: f64,
    seed: u64,
    capacity: usize,
) -> Result<Instance, InstgenError> {
    if n_vertices < 2 {
        return Err(InstgenError::TooFewVertices(n_vertices));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(InstgenError::BadEdgeProbability(edge_prob));
    }
    let mut rng = SplitMix64::new(seed);
    let code: Vec<usize> = (0..n_vertices.saturating_sub(2))
        .map(|_| rng.next_below(n_vertices as u64) as usize)
        .collect();
    let mut edges = prufer_decode(n_vertices, &code);
    let tree: std::collections::BTreeSet<(usize, usize)> = edges.iter().copied().collect();
    for u in 0..n_vertices {
        for v in (u + 1)..n_vertices {
            let draw = rng.next_f64();
            if !tree.contains(&(u, v)) && draw < edge_prob {
                edges.push((u, v));
            }
        }
    }
    Ok(Instance::new(n_vertices, 0, edges, capacity)
        .expect("tree skeleton keeps the graph connected"))
}

/// Uniform labeled tree from a Prüfer sequence; edges come out canonical
/// (`u < v`).
fn prufer_decode(n: usize, code: &[usize]) -> Vec<(usize, usize)> {
    debug_assert_eq!(code.len(), n.saturating_sub(2));
    if n == 2 {
        return vec![(0, 1)];
    }
    let mut degree = vec![1usize; n];
    for &c in code {
        degree[c] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut leaves: std::collections::BTreeSet<usize> =
        (0..n).filter(|&v| degree[v] == 1).collect();
    for &c in code {
        let leaf = *leaves.iter().next().expect("a leaf always remains");
        leaves.remove(&leaf);
        edges.push((leaf.min(c), leaf.max(c)));
        degree[c] -= 1;
        if degree[c] == 1 {
            leaves.insert(c);
        }
    }
    let mut it = leaves.iter();
    let a = *it.next().unwrap();
    let b = *it.next().unwrap();
    edges.push((a.min(b), a.max(b)));
    edges
}

/// Canonical deterministic fixture graphs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StructuredKind {
    /// `m` terminals in a line, depot at one end.
    Path(usize),
    /// Depot center with `m` leaves.
    Star(usize),
    /// One cycle of `m` terminals through the depot.
    Cycle(usize),
    /// `rows x cols` grid (terminals plus depot), depot at a corner.
    Grid(usize, usize),
}

pub fn structured(kind: StructuredKind, capacity: usize) -> Result<Instance, InstgenError> {
    let (num_vertices, edges) = match kind {
        StructuredKind::Path(m) => {
            if m < 1 {
                return Err(InstgenError::BadSize {
                    kind: "path",
                    msg: "need at least one terminal".into(),
                });
            }
            (m + 1, (0..m).map(|v| (v, v + 1)).collect())
        }
        StructuredKind::Star(m) => {
            if m < 1 {
                return Err(InstgenError::BadSize {
                    kind: "star",
                    msg: "need at least one leaf".into(),
                });
            }
            (m + 1, (1..=m).map(|v| (0, v)).collect())
        }
        StructuredKind::Cycle(m) => {
            if m < 2 {
                return Err(InstgenError::BadSize {
                    kind: "cycle",
                    msg: "need at least two terminals for a simple cycle".into(),
                });
            }
            let mut edges: Vec<(usize, usize)> = (0..m).map(|v| (v, v + 1)).collect();
            edges.push((0, m));
            (m + 1, edges)
        }
        StructuredKind::Grid(rows, cols) => {
            if rows * cols < 2 {
                return Err(InstgenError::BadSize {
                    kind: "grid",
                    msg: "need at least two vertices".into(),
                });
            }
            let id = |r: usize, c: usize| r * cols + c;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((id(r, c), id(r, c + 1)));
                    }
                    if r + 1 < rows {
                        edges.push((id(r, c), id(r + 1, c)));
                    }
                }
            }
            (rows * cols, edges)
        }
    };
    Instance::new(num_vertices, 0, edges, capacity).map_err(|e| InstgenError::BadSize {
        kind: "structured",
        msg: e.to_string(),
    })
}
