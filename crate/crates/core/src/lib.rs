//! Verification toolkit for the Grauert-tube model of `T CP^n` inside `CP^n x CP^n`.
//!
//! The crate is organised the same way the model is built up:
//!
//! * [`projective_geometry`]: Fubini–Study points, tangent vectors and closed geodesics
//!   (normalised so that every closed geodesic has length `2π`).
//! * [`model_embedding`]: the compactified tube `X = CP^n x CP^n`, leaf maps, the divisor
//!   `D = {Σ Z_a W_a = 0}`, the exhaustion `u0`, the Kähler potential and the involution `N_{-1}`.
//! * [`geodesic_jacobi`]: geodesic and Jacobi-field integration on chart metrics,
//!   conjugate points, Morse index and vanishing orders.
//! * [`adapted_structure`]: the matrices `ψ`/`Ψ` and the adapted complex structure `J`.
//! * [`complex_checks`]: Levi forms, Monge–Ampère residuals, leaf harmonicity,
//!   circle-maximum profiles and restricted Chern degrees.
//! * [`cohomology`]: exact integer cohomology of `UM`, `D` and `X` through Gysin and
//!   Mayer–Vietoris sequences.
//! * [`involutions`]: anti-holomorphic involutions of `CP^n`.
//! * [`cli`]: report envelope and the command implementations behind the `grauert` binary.

pub mod adapted_structure;
pub mod cli;
pub mod cohomology;
pub mod complex_checks;
pub mod error;
pub mod geodesic_jacobi;
pub mod involutions;
pub mod model_embedding;
pub mod numerics;
pub mod projective_geometry;

pub use error::{Error, Result};

/// Tolerance tiers shared by every module.
pub mod tol {
    /// Algebraic identities on inputs (norms, orthogonality).
    pub const ALGEBRAIC: f64 = 1e-12;
    /// Quantities derived through a few floating point operations.
    pub const DERIVED: f64 = 1e-9;
    /// Finite-difference checks.
    pub const FINITE_DIFFERENCE: f64 = 1e-6;
}
