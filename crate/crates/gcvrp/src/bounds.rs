//! Exact-rational lower bounds and ratio certificates.
//!
//! Every comparison here runs in exact rational arithmetic; floating point
//! appears only in human-readable output. The two instance-level bounds are
//!
//! * the radius cost `rad = (2/k) * sum_v dist(v)`, and
//! * the structure bound `rad + n/2 - n/(2k^2)`,
//!
//! and the per-tour certificate lower-bounds a single tour's cost by
//! `2D/|U| + |U|/2 - 1/(2|U|)` where `U` is its covered set and `D` the sum
//! of depot distances over `U`.

use std::collections::BTreeSet;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive};
use thiserror::Error;

use crate::graph::{DistanceOracle, Instance};
use crate::tour::{check_closed_walk, Tour};

/// Exact rational number; all bound arithmetic stays in this type.
pub type Rational = BigRational;

/// `n / d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn rat_u64(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Lossy conversion for display purposes only.
pub fn rat_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Canonical exact text form: `p` when integral, `p/q` otherwise.
pub fn rat_to_string(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `{"num": p, "den": q}` with reduced terms.
pub fn rat_json(r: &Rational) -> serde_json::Value {
    let num = r.numer().to_i64().expect("bound numerator exceeds i64");
    let den = r.denom().to_i64().expect("bound denominator exceeds i64");
    serde_json::json!({ "num": num, "den": den })
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("combined ratio requires beta >= 1/2, got {0}")]
    BetaTooSmall(String),
    #[error("combined ratio requires gamma >= 0, got {0}")]
    GammaNegative(String),
    #[error("covered set must be nonempty")]
    EmptyCoveredSet,
    #[error("delta must be nonnegative, got {0}")]
    DeltaNegative(String),
}

/// Errors from [`tour_certificate`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertificateError {
    #[error("tour covers no terminal")]
    EmptyCoverage,
    #[error("invalid tour: {0}")]
    InvalidTour(String),
}

/// Radius cost `(2/k) * sum over terminals of dist(v)`, exact.
pub fn radius_cost(inst: &Instance) -> Rational {
    let oracle = DistanceOracle::new(inst);
    radius_cost_from_sum(oracle.terminal_dist_sum(), inst.capacity())
}

pub(crate) fn radius_cost_from_sum(dist_sum: u64, capacity: usize) -> Rational {
    Rational::new(
        BigInt::from(2u32) * BigInt::from(dist_sum),
        BigInt::from(capacity as u64),
    )
}

/// Structure lower bound `rad + n/2 - n/(2k^2)`, exact. Every feasible
/// solution costs at least this much.
pub fn structure_bound(inst: &Instance) -> Rational {
    let n = BigInt::from(inst.num_terminals() as u64);
    let k = BigInt::from(inst.capacity() as u64);
    let half_n = Rational::new(n.clone(), BigInt::from(2u32));
    let correction = Rational::new(n, BigInt::from(2u32) * &k * &k);
    radius_cost(inst) + half_n - correction
}

/// Instance-level bound summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub rad: Rational,
    pub structure_bound: Rational,
    pub n: usize,
    pub k: usize,
}

impl BoundReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "k": self.k,
            "rad": rat_json(&self.rad),
            "structure_bound": rat_json(&self.structure_bound),
        })
    }
}

pub fn bound_report(inst: &Instance) -> BoundReport {
    BoundReport {
        rad: radius_cost(inst),
        structure_bound: structure_bound(inst),
        n: inst.num_terminals(),
        k: inst.capacity(),
    }
}

/// Per-tour decomposition evidencing the tour cost lower bound.
///
/// The walk is split at a deepest vertex; on each of the two halves one
/// witness occurrence is selected per depth level (first occurrence along
/// the half). `witness_covered_count` is the number of covered terminals
/// that appear among the witnesses; it never exceeds
/// `sqrt(4|U| * delta + 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TourCertificate {
    /// Covered terminal set `U`.
    pub covered: BTreeSet<usize>,
    /// `D`: sum of depot distances over the covered set.
    pub dist_sum: u64,
    /// `R`: maximum depot distance over all non-depot walk vertices.
    pub peak_dist: u64,
    /// `delta = R - D/|U|`; always nonnegative.
    pub delta: Rational,
    /// Covered terminals with at least one witness occurrence.
    pub witness_covered_count: usize,
    /// `2D/|U| + |U|/2 - 1/(2|U|)`; the tour's cost is at least this.
    pub cost_bound: Rational,
    /// Actual edge count of the walk.
    pub tour_cost: u64,
}

impl TourCertificate {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "covered": self.covered.iter().map(|&v| v + 1).collect::<Vec<_>>(),
            "dist_sum": self.dist_sum,
            "peak_dist": self.peak_dist,
            "delta": rat_json(&self.delta),
            "witness_covered_count": self.witness_covered_count,
            "cost_bound": rat_json(&self.cost_bound),
            "tour_cost": self.tour_cost,
        })
    }
}

/// Builds the certificate for one tour. Ties (the split vertex, the per-level
/// witnesses) are broken by earliest occurrence so output is deterministic.
pub fn tour_certificate(inst: &Instance, tour: &Tour) -> Result<TourCertificate, CertificateError> {
    check_closed_walk(inst, &tour.walk)
        .map_err(|e| CertificateError::InvalidTour(e.to_string()))?;
    if tour.covered.is_empty() {
        return Err(CertificateError::EmptyCoverage);
    }
    let on_walk: BTreeSet<usize> = tour.walk.iter().copied().collect();
    for &t in &tour.covered {
        if t == inst.depot() {
            return Err(CertificateError::InvalidTour(format!(
                "depot {t} listed as covered"
            )));
        }
        if !on_walk.contains(&t) {
            return Err(CertificateError::InvalidTour(format!(
                "covered terminal {t} is not on the walk"
            )));
        }
    }
    let oracle = DistanceOracle::new(inst);
    let depot = inst.depot();
    let covered_count = tour.covered.len() as u64;
    let dist_sum: u64 = tour.covered.iter().map(|&v| oracle.dist(v)).sum();
    let peak_dist = tour
        .walk
        .iter()
        .filter(|&&v| v != depot)
        .map(|&v| oracle.dist(v))
        .max()
        .expect("covered terminals lie on the walk");
    let delta =
        rat_u64(peak_dist) - Rational::new(BigInt::from(dist_sum), BigInt::from(covered_count));
    debug_assert!(!delta.is_negative());

    // Split at the first deepest occurrence; collect one witness per depth
    // level on each half, scanning each half away from its own start.
    let split = tour
        .walk
        .iter()
        .position(|&v| v != depot && oracle.dist(v) == peak_dist)
        .expect("a deepest vertex exists");
    let mut witnesses: BTreeSet<usize> = BTreeSet::new();
    witnesses.insert(tour.walk[split]);
    let mut climb: Vec<Option<usize>> = vec![None; peak_dist as usize];
    for &v in &tour.walk[..=split] {
        let d = oracle.dist(v) as usize;
        if v != depot && d < peak_dist as usize && climb[d].is_none() {
            climb[d] = Some(v);
        }
    }
    let mut descent: Vec<Option<usize>> = vec![None; peak_dist as usize];
    for &v in &tour.walk[split..] {
        let d = oracle.dist(v) as usize;
        if v != depot && d < peak_dist as usize && descent[d].is_none() {
            descent[d] = Some(v);
        }
    }
    for level in 1..peak_dist as usize {
        witnesses.insert(climb[level].expect("every level below the peak occurs on the climb"));
        witnesses.insert(descent[level].expect("every level below the peak occurs on the descent"));
    }
    let witness_covered_count = tour
        .covered
        .iter()
        .filter(|v| witnesses.contains(v))
        .count();

    let u = BigInt::from(covered_count);
    let cost_bound = Rational::new(BigInt::from(2u32) * BigInt::from(dist_sum), u.clone())
        + Rational::new(u.clone(), BigInt::from(2u32))
        - Rational::new(BigInt::one(), BigInt::from(2u32) * &u);
    Ok(TourCertificate {
        covered: tour.covered.clone(),
        dist_sum,
        peak_dist,
        delta,
        witness_covered_count,
        cost_bound,
        tour_cost: tour.cost(),
    })
}

/// Result of [`check_delta_bound`]: the inequality always holds; `slack` is
/// the exact nonnegative gap in squared form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaBoundCheck {
    pub holds: bool,
    pub slack: Rational,
}

/// Verifies `2*delta - sqrt(4|U|*delta + 1) >= -|U|/2 - 1/(2|U|)` without
/// irrational arithmetic: both sides shift to nonnegative quantities and are
/// compared squared, i.e. the check is
/// `(2*delta + |U|/2 + 1/(2|U|))^2 >= 4|U|*delta + 1`.
pub fn check_delta_bound(u_size: usize, delta: &Rational) -> Result<DeltaBoundCheck, BoundsError> {
    if u_size == 0 {
        return Err(BoundsError::EmptyCoveredSet);
    }
    if delta.is_negative() {
        return Err(BoundsError::DeltaNegative(rat_to_string(delta)));
    }
    let u = BigInt::from(u_size as u64);
    let lhs = rat(2, 1) * delta
        + Rational::new(u.clone(), BigInt::from(2u32))
        + Rational::new(BigInt::one(), BigInt::from(2u32) * &u);
    let rhs = rat(4, 1) * Rational::from_integer(u) * delta + Rational::one();
    let slack = &lhs * &lhs - rhs;
    Ok(DeltaBoundCheck {
        holds: !slack.is_negative(),
        slack,
    })
}

/// Approximation ratio `beta + gamma + 1/2` achieved by tour partitioning
/// applied to a TSP tour of cost at most `beta*n + gamma*opt_tsp`. Requires
/// `beta >= 1/2` and `gamma >= 0`.
pub fn combined_approx_ratio(beta: &Rational, gamma: &Rational) -> Result<Rational, BoundsError> {
    if *beta < rat(1, 2) {
        return Err(BoundsError::BetaTooSmall(rat_to_string(beta)));
    }
    if gamma.is_negative() {
        return Err(BoundsError::GammaNegative(rat_to_string(gamma)));
    }
    Ok(beta + gamma + rat(1, 2))
}

/// Analytical TSP cost guarantees in terms of `n` and `opt_tsp`. These are
/// formula evaluations only; no algorithm runs here. `christofides` is the
/// one guarantee matched by an implemented algorithm in this crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TspGuarantees {
    /// `n + opt_tsp/2`
    pub christofides: Rational,
    /// `n/3 + (10/9) * opt_tsp`
    pub momke_svensson: Rational,
    /// `(7/5) * opt_tsp`
    pub sebo_vygen: Rational,
    /// `n/2 + (23/24) * opt_tsp` (best of Christofides and Mömke-Svensson)
    pub s2_combo: Rational,
    /// `n/2 + (19/20) * opt_tsp` (best of Christofides and Sebő-Vygen)
    pub s3_combo: Rational,
}

impl TspGuarantees {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "christofides": rat_json(&self.christofides),
            "momke_svensson": rat_json(&self.momke_svensson),
            "sebo_vygen": rat_json(&self.sebo_vygen),
            "s2_combo": rat_json(&self.s2_combo),
            "s3_combo": rat_json(&self.s3_combo),
        })
    }
}

pub fn tsp_cost_guarantees(n: u64, opt_tsp: u64) -> TspGuarantees {
    let n = rat_u64(n);
    let opt = rat_u64(opt_tsp);
    TspGuarantees {
        christofides: &n + &opt * rat(1, 2),
        momke_svensson: &n * rat(1, 3) + &opt * rat(10, 9),
        sebo_vygen: &opt * rat(7, 5),
        s2_combo: &n * rat(1, 2) + &opt * rat(23, 24),
        s3_combo: &n * rat(1, 2) + &opt * rat(19, 20),
    }
}
