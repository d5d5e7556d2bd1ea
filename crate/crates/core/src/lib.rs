//! Numerical laboratory for the entropy machinery of hyperbolic torus maps
//! and their quantizations.
//!
//! The crate is organized around one pipeline:
//!
//! * [`dynamics`] — Anosov torus maps, unstable directions and Jacobians,
//!   Lyapunov exponents, covers, and the discrete (per-cell-pair) Jacobian.
//! * [`symbolic`] — shift spaces over a finite alphabet, cylinder measures,
//!   partition entropies, and Kolmogorov–Sinai entropy estimation.
//! * [`roof`] — roof functions built from discrete Jacobians, stopping
//!   times, the variable-length index families they generate (complete
//!   prefix codes), and the adapted partition with its refinements.
//! * [`suspension`] — special flows under a roof, suspension measures,
//!   suspension entropies, and Abramov-theorem verification.
//! * [`quantum`] — quantized cat maps, observable quantization, smooth
//!   quantum partitions of identity, quantum entropy and the entropic
//!   uncertainty principle, eigenvector-induced cylinder measures, and
//!   Egorov/commutator defect measurements.
//! * [`experiments`] — end-to-end experiment drivers with machine-readable
//!   result records (consumed by the CLI).

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod quantum;
pub mod roof;
pub mod suspension;
pub mod symbolic;

pub use error::{Error, Result};
