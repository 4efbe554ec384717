//! geomflow-core: a numerical laboratory for invariant curve flows and the
//! integrable structures they induce on differential invariants.
//!
//! The crate is organized around a periodic pseudo-spectral grid:
//!
//! - [`numerics`]: grid calculus (spectral derivatives, quadrature,
//!   antiderivatives, linear solves, RK4).
//! - [`curves`]: curve models for Euclidean, projective, star-shaped and
//!   Lagrangian-plane geometries.
//! - [`invariants`]: curvature/torsion, the Hasimoto function, the scalar
//!   and Lagrangian Schwarzian derivatives, centro-affine curvature.
//! - [`frames`]: classical and group-based moving frames with their
//!   Serret-Frenet matrices.
//! - [`flows`]: the catalog of invariant curve evolutions, time integration
//!   and the brute-force invariantization oracle.
//! - [`hamiltonian`]: differential-operator algebra, variational
//!   derivatives and the Poisson operator catalog.
//! - [`akns`]: zero-curvature pairs and their residual checks.
//! - [`verify`]: the property suites exposed through the CLI.

pub mod akns;
pub mod curves;
pub mod error;
pub mod flows;
pub mod frames;
pub mod hamiltonian;
pub mod invariants;
pub mod io;
pub mod numerics;
pub mod tolerances;
pub mod verify;

pub use error::{Error, Result};
