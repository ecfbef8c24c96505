//! Problem instances over unweighted graphs, BFS hop metrics, and `.gcvrp` file I/O.
//!
//! Vertices are 0-based in memory and 1-based in `.gcvrp` files (DIMACS
//! convention). Every vertex other than the depot is a terminal with unit
//! demand.

use std::collections::{BTreeSet, VecDeque};
use std::sync::OnceLock;

use thiserror::Error;

const UNREACHABLE: u64 = u64::MAX;

/// Vertex count at or below which [`DistanceOracle::precompute_all_pairs`]
/// fills the whole pairwise table instead of relying on per-source laziness.
pub const ALL_PAIRS_THRESHOLD: usize = 2048;

/// Errors from assembling an [`Instance`] out of raw parts.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("an instance needs at least one terminal besides the depot")]
    NoTerminals,
    #[error("depot id {0} is out of range")]
    DepotOutOfRange(usize),
    #[error("edge ({0}, {1}) references a vertex out of range")]
    EdgeOutOfRange(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("tour capacity must be at least 1")]
    CapacityZero,
    #[error("graph is disconnected: vertex {0} is unreachable from the depot")]
    Disconnected(usize),
}

/// Errors from reading `.gcvrp` text.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("missing problem line (`p gcvrp <vertices> <edges> <capacity> <depot>`)")]
    MissingProblemLine,
    #[error("{0}")]
    Invalid(#[from] InstanceError),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

/// A capacitated routing instance: a connected simple unweighted graph, a
/// depot vertex, and a tour capacity `k`.
///
/// The capacity is clamped to the terminal count `n` on construction (any
/// `k >= n` is equivalent); [`Instance::capacity_clamped`] reports whether
/// that happened.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    num_vertices: usize,
    depot: usize,
    capacity: usize,
    requested_capacity: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Instance {
    /// Validates and builds an instance. Edges may arrive in any order and
    /// orientation; they are stored canonically (`u < v`, sorted).
    pub fn new(
        num_vertices: usize,
        depot: usize,
        edges: Vec<(usize, usize)>,
        capacity: usize,
    ) -> Result<Self, InstanceError> {
        if num_vertices < 2 {
            return Err(InstanceError::NoTerminals);
        }
        if depot >= num_vertices {
            return Err(InstanceError::DepotOutOfRange(depot));
        }
        if capacity == 0 {
            return Err(InstanceError::CapacityZero);
        }
        let mut canonical = Vec::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= num_vertices || v >= num_vertices {
                return Err(InstanceError::EdgeOutOfRange(u, v));
            }
            if u == v {
                return Err(InstanceError::SelfLoop(u));
            }
            canonical.push((u.min(v), u.max(v)));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(InstanceError::DuplicateEdge(w[0].0, w[0].1));
        }
        let mut adj = vec![Vec::new(); num_vertices];
        for &(u, v) in &canonical {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let n = num_vertices - 1;
        let inst = Instance {
            num_vertices,
            depot,
            capacity: capacity.min(n),
            requested_capacity: capacity,
            edges: canonical,
            adj,
        };
        let dist = inst.bfs_from(depot);
        if let Some(v) = (0..num_vertices).find(|&v| dist[v] == UNREACHABLE) {
            return Err(InstanceError::Disconnected(v));
        }
        Ok(inst)
    }

    /// Parses `.gcvrp` text. Comment lines start with `c`; exactly one
    /// problem line `p gcvrp <vertices> <edges> <capacity> <depot>` must
    /// precede the `e <u> <v>` edge lines (ids 1-based).
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut header: Option<(usize, usize, usize, usize)> = None;
        let mut header_line = 0usize;
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let mut tokens = raw.split_ascii_whitespace();
            let tag = match tokens.next() {
                None => continue,
                Some(t) => t,
            };
            match tag {
                "c" => continue,
                "p" => {
                    if header.is_some() {
                        return Err(syntax(line, "duplicate problem line"));
                    }
                    if tokens.next() != Some("gcvrp") {
                        return Err(syntax(line, "expected `p gcvrp ...`"));
                    }
                    let nv = parse_field(&mut tokens, line, "vertex count")?;
                    let ne = parse_field(&mut tokens, line, "edge count")?;
                    let k = parse_field(&mut tokens, line, "capacity")?;
                    let depot = parse_field(&mut tokens, line, "depot id")?;
                    if tokens.next().is_some() {
                        return Err(syntax(line, "trailing tokens on problem line"));
                    }
                    header = Some((nv, ne, k, depot));
                    header_line = line;
                }
                "e" => {
                    let (nv, ..) =
                        header.ok_or_else(|| syntax(line, "edge line before problem line"))?;
                    let u: usize = parse_field(&mut tokens, line, "edge endpoint")?;
                    let v: usize = parse_field(&mut tokens, line, "edge endpoint")?;
                    if tokens.next().is_some() {
                        return Err(syntax(line, "trailing tokens on edge line"));
                    }
                    if u < 1 || u > nv || v < 1 || v > nv {
                        return Err(syntax(
                            line,
                            format!("edge ({u}, {v}) out of range 1..={nv}"),
                        ));
                    }
                    if u == v {
                        return Err(syntax(line, format!("self-loop at vertex {u}")));
                    }
                    let key = (u.min(v), u.max(v));
                    if !seen.insert(key) {
                        return Err(syntax(line, format!("duplicate edge ({u}, {v})")));
                    }
                    edges.push((u - 1, v - 1));
                }
                other => {
                    return Err(syntax(line, format!("unknown line type `{other}`")));
                }
            }
        }
        let (nv, ne, k, depot) = header.ok_or(ParseError::MissingProblemLine)?;
        if edges.len() != ne {
            return Err(syntax(
                header_line,
                format!(
                    "problem line declares {ne} edges but {} present",
                    edges.len()
                ),
            ));
        }
        if depot < 1 || depot > nv {
            return Err(syntax(
                header_line,
                format!("depot id {depot} out of range 1..={nv}"),
            ));
        }
        Ok(Instance::new(nv, depot - 1, edges, k)?)
    }

    /// Canonical `.gcvrp` serialization: no comments, edges sorted
    /// lexicographically, 1-based ids, trailing newline.
    /// `parse(to_gcvrp(i))` reproduces `i` exactly.
    pub fn to_gcvrp(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "p gcvrp {} {} {} {}\n",
            self.num_vertices,
            self.edges.len(),
            self.capacity,
            self.depot + 1
        ));
        for &(u, v) in &self.edges {
            out.push_str(&format!("e {} {}\n", u + 1, v + 1));
        }
        out
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Number of terminals `n` (every vertex except the depot).
    pub fn num_terminals(&self) -> usize {
        self.num_vertices - 1
    }

    pub fn depot(&self) -> usize {
        self.depot
    }

    /// Effective tour capacity `k`, already clamped into `1..=n`.
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Capacity as requested before clamping.
    pub fn requested_capacity(&self) -> usize {
        self.requested_capacity
    }

    /// True when the requested capacity exceeded `n` and was clamped.
    pub fn capacity_clamped(&self) -> bool {
        self.requested_capacity != self.capacity
    }

    /// Edges in canonical order (`u < v`, sorted).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_vertices && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        v < self.num_vertices && v != self.depot
    }

    /// All terminal ids in increasing order.
    pub fn terminals(&self) -> impl Iterator<Item = usize> + '_ {
        let depot = self.depot;
        (0..self.num_vertices).filter(move |&v| v != depot)
    }

    fn bfs_from(&self, src: usize) -> Vec<u64> {
        let mut dist = vec![UNREACHABLE; self.num_vertices];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &w in &self.adj[u] {
                if dist[w] == UNREACHABLE {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}

fn parse_field<'a, T: std::str::FromStr>(
    tokens: &mut impl Iterator<Item = &'a str>,
    line: usize,
    what: &str,
) -> Result<T, ParseError> {
    let tok = tokens
        .next()
        .ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| syntax(line, format!("invalid {what} `{tok}`")))
}

/// Hop-count metric over an [`Instance`].
///
/// The depot row is computed eagerly; other source rows are computed on
/// demand and memoized. Memoization goes through [`OnceLock`], so a shared
/// `&DistanceOracle` is safe to query from several threads.
pub struct DistanceOracle<'a> {
    inst: &'a Instance,
    rows: Vec<OnceLock<Vec<u64>>>,
}

impl<'a> DistanceOracle<'a> {
    /// Runs BFS from the depot and prepares lazy per-source memoization for
    /// pairwise queries.
    pub fn new(inst: &'a Instance) -> Self {
        let rows = (0..inst.num_vertices()).map(|_| OnceLock::new()).collect();
        let oracle = DistanceOracle { inst, rows };
        oracle.row(inst.depot());
        oracle
    }

    pub fn instance(&self) -> &Instance {
        self.inst
    }

    fn row(&self, src: usize) -> &[u64] {
        assert!(
            src < self.inst.num_vertices(),
            "vertex id {src} out of range"
        );
        self.rows[src].get_or_init(|| self.inst.bfs_from(src))
    }

    /// Hop distance from `v` to the depot.
    pub fn dist(&self, v: usize) -> u64 {
        self.row(self.inst.depot())[v]
    }

    /// Exact hop distance between two vertices; rows are cached per source.
    pub fn pairwise(&self, u: usize, v: usize) -> u64 {
        assert!(v < self.inst.num_vertices(), "vertex id {v} out of range");
        self.row(u)[v]
    }

    /// Sum of depot distances over all terminals.
    pub fn terminal_dist_sum(&self) -> u64 {
        self.inst.terminals().map(|v| self.dist(v)).sum()
    }

    /// One shortest path from `from` to `to` (endpoints included), breaking
    /// ties by the lowest-numbered next vertex so expansions are
    /// deterministic.
    pub fn shortest_path(&self, from: usize, to: usize) -> Vec<usize> {
        let dist_to = self.row(to).to_vec();
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            let next = self
                .inst
                .neighbors(cur)
                .iter()
                .copied()
                .find(|&x| dist_to[x] + 1 == dist_to[cur])
                .expect("connected graph always has a next hop on a shortest path");
            path.push(next);
            cur = next;
        }
        path
    }

    /// Eagerly fills every source row, but only when the instance is small
    /// enough (at most [`ALL_PAIRS_THRESHOLD`] vertices). Useful before
    /// handing the oracle to many threads at once.
    pub fn precompute_all_pairs(&self) {
        if self.inst.num_vertices() <= ALL_PAIRS_THRESHOLD {
            for v in 0..self.inst.num_vertices() {
                self.row(v);
            }
        }
    }
}
