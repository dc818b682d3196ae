//! Geodesic convex analysis on Hadamard (complete CAT(0)) spaces.
//!
//! The crate provides four model geometries (Euclidean space, the
//! hyperbolic half-plane, metric spiders, and products), extended-valued
//! convex functionals over them, proximal mappings and Moreau envelopes
//! computed by a certified multi-start solver, descent slopes, and a
//! convergence lab that probes pointwise/envelope/prox/Mosco limits and
//! the implications connecting them.
//!
//! Numerical checks return three-valued verdicts: `ConsistentWith`,
//! `Violated` (with a concrete witness), or `Inconclusive`. Theorem
//! reports compose such checks under implication semantics and expose a
//! dedicated falsification flag for the pattern "all hypotheses pass,
//! a conclusion fails", which no built-in instance is expected to hit.

pub mod descriptor;
pub mod error;
pub mod extended;
pub mod functional;
pub mod lab;
pub mod minimize;
pub mod prox;
pub mod region;
pub mod space;
pub mod tolerances;
pub mod verdict;

pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use space::{
    cat0_comparison_check, distance, geodesic_point, project_to_geodesic, weak_limit_test,
    Coords, GeodesicSegment, Point, PointSequence, Projection, Space, SpaceRegistry, WindowSpec,
};
pub use verdict::{CheckRole, Status, SubCheck, TheoremId, TheoremReport, Verdict, Witness};
