//! Double nets ("binets") on the quad lattice: points on vertices *and* faces
//! of ℤ², checked for conjugacy and orthogonality, lifted into the projective
//! models of Möbius, Laguerre and Lie sphere geometry, and propagated through
//! the multi-dimensionally consistent ℤ³ system.
//!
//! The crate is organised bottom-up:
//!
//! * [`projective`] — homogeneous-coordinate linear algebra (join, meet,
//!   polarity with respect to a diagonal quadric form, form isometries),
//! * [`lattice`] — combinatorics of the double lattice `D = V ∪ F` over
//!   finite windows of ℤ² and ℤ³ (incidence, crosses, dual edges),
//! * [`nets`] — binets and bi*nets with the conjugacy / orthogonality /
//!   polarity predicates and the `□` / `□*` operators,
//! * [`lifts`] — the additive (ρ) and multiplicative (σ) potentials and the
//!   three lifts with their projections and sphere/plane decoders,
//! * [`construct`] — generators and Cauchy-data propagators, including the
//!   circular↔conical reflection construction,
//! * [`curvature`] — normal bicongruences, focal binets, per-cell circles and
//!   cones, and principal curvature spheres in Möbius and Lie form,
//! * [`consistency`] — the ℤ³ cube completion and face-net machinery,
//! * [`document`] / [`mesh`] — JSON documents and OBJ export.

pub mod consistency;
pub mod construct;
pub mod curvature;
pub mod document;
pub mod error;
pub mod lattice;
pub mod lifts;
pub mod mesh;
pub mod nets;
pub mod projective;

pub use error::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Global rank/degeneracy tolerance: singular values below this factor times
/// the largest singular value count as zero. Overridable per call where a
/// `tol` parameter is exposed.
pub const RANK_TOL: f64 = 1e-9;
