//! Exact TSP solving by lengthwise zone decomposition.
//!
//! The solver dissects an instance into ordered zones (vertical strips), then
//! sweeps left to right. For every combination of boundary vertices drawn from
//! the next zone — and every pairing of those vertices into path endpoints —
//! it keeps one minimum-length set of disjoint Hamiltonian paths covering
//! everything processed so far. Paths solved in earlier zones are carried
//! forward contracted to super-edges, so each zone only ever solves a small
//! fixed-endpoint path problem. The final zone closes the cycle and
//! back-substitution expands the contracted paths into a full tour.
//!
//! The crate ships the `att48` TSPLIB instance together with a hand-tuned
//! ten-zone plan that reproduces its known optimum (length 10628), plus exact
//! reference solvers ([`oracle`]) used to validate the path search and the
//! sweep on small instances.

pub mod hp;
pub mod oracle;
mod par;
pub mod svg;
pub mod sweep;
pub mod tsplib;
pub mod zoning;

pub use hp::{ContractedGraph, EmbeddedHp, HpError, PathResult};
pub use oracle::OracleBudget;
pub use sweep::{run_sweep, SweepError, SweepOptions, Tour};
pub use tsplib::{Instance, Metric, ParseError, VertexId};
pub use zoning::{BoundaryChoice, ZoneError, ZonePlan, ZoneSpec};
