//! Constant-modulus (CM) optimization toolkit.
//!
//! A CM set is a set whose members all share the same Euclidean norm `√C`:
//! binary vectors, MPSK symbols, spheres, semi-orthogonal matrices, selection
//! and assignment matrices, and Cartesian products of those. The toolkit
//! attacks `min f(x)` over such a set by relaxing the constraint to the
//! convex hull and subtracting `λ‖x‖²`, which pushes minimizers out to the
//! extreme points of the hull (extreme point pursuit).
//!
//! Modules:
//!
//! - [`cm_sets`]: set catalog, membership, rounding, distances and error bounds.
//! - [`hull_projections`]: Euclidean projections onto every convex hull.
//! - [`objectives`]: the objective families with (sub)gradients and smoothness constants.
//! - [`penalties`]: penalized objectives and exact-penalization thresholds.
//! - [`solver`]: projected (sub)gradient stages inside a homotopy on `λ`.
//! - [`oracle`]: brute-force ground truth and the verification suites.
//! - [`io`]: JSON instance, configuration and point formats.

pub mod cm_sets;
pub mod error;
pub mod hull_projections;
pub mod io;
pub mod linalg;
pub mod objectives;
pub mod oracle;
pub mod penalties;
pub mod solver;

pub use cm_sets::{CmSetSpec, Distance, Family, Point};
pub use error::{Error, Result};
pub use objectives::ProblemSpec;
pub use penalties::{PenaltyConfig, PenaltyKind};
pub use solver::{HomotopySchedule, SolveResult, SolverConfig};

/// Default absolute tolerance per scalar constraint.
pub const FEAS_TOL: f64 = 1e-8;
