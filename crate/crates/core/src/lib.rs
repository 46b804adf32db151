//! Twistor correspondences over the Riemann sphere: holomorphic bundles on
//! `CP¹`, linear ρ-quaternionic structures, the infinitesimal Ward transform,
//! the Penrose transform for pluriharmonic functions, and a numerical
//! Gibbons–Hawking verifier.
//!
//! Algebraic modules are generic over a [`scalar::Field`]; the aliases below
//! fix the exact Gaussian rationals used by default.

pub mod error;
pub mod flat_models;
pub mod gibbons_hawking;
pub mod cp1_bundles;
pub mod laurent_linalg;
pub mod penrose;
pub mod report;
pub mod rho_quat;
pub mod ward;
pub mod scalar;

pub use error::{Error, Result};

/// Exact Gaussian rational scalar.
pub type Scalar = scalar::QI;
pub type Poly = laurent_linalg::LaurentPoly<Scalar>;
pub type Matrix = laurent_linalg::Mat<Scalar>;
pub type LMatrix = laurent_linalg::LaurentMatrix<Scalar>;
pub type Bundle = cp1_bundles::Bundle<Scalar>;
pub type RhoQuatSpace = rho_quat::RhoQuatSpace<Scalar>;
