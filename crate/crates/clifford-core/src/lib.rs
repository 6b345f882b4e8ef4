//! Verification engine for the variational structure of products of two
//! round spheres as mean-curvature-flow self-shrinkers.
//!
//! The crate has two halves that check each other:
//!
//! * An exact layer (arbitrary-precision rationals, radical scalars with
//!   r_b² = 2k_b, sphere moments, polynomial calculus on the product) that
//!   builds Jacobi fields, solves the corrector equation LW = -D²φ(U,U),
//!   evaluates the third-order obstruction, and certifies the positivity
//!   claims behind it by coefficient certificates.
//! * A floating-point oracle (finite-difference shrinker quantity on
//!   perturbed graphs, Gaussian-area quadrature) that confirms the variation
//!   formulas and the Łojasiewicz exponents 1/3 and 3/4 empirically.
//!
//! Everything user-facing is exposed through the `clifford` CLI crate.

pub mod ambient;
pub mod bivar;
pub mod certificates;
pub mod error;
pub mod exec;
pub mod fields;
pub mod moments;
pub mod obstruction;
pub mod oracle;
pub mod rat;
pub mod ratfunc;
pub mod radical;
pub mod report;
pub mod sqrt2;
pub mod svd;

pub use error::EngineError;
