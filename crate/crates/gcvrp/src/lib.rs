//! Capacitated vehicle routing on unweighted graphs (hop-count metric).
//!
//! The pipeline: build or parse an [`Instance`], compute a traveling
//! salesman tour ([`tsp::exact_tsp`], [`tsp::christofides`] or
//! [`tsp::double_tree`]), partition it into capacity-respecting tours with
//! [`itp::itp`], and judge the result against exact lower bounds from
//! [`bounds`] — or against the true optimum from [`oracle`] when the
//! instance is small. [`instgen`] provides generators, including the
//! depot-cycle family on which the structure bound is tight.

pub mod bounds;
pub mod cli;
pub mod graph;
pub mod instgen;
pub mod itp;
pub mod oracle;
pub mod tour;
pub mod tsp;

pub use bounds::{BoundReport, Rational, TourCertificate};
pub use graph::{DistanceOracle, Instance, InstanceError, ParseError};
pub use tour::{CvrpSolution, Tour, TspTour, ValidationReport, Violation};
