//! Linear ρ-quaternionic structures `(U, E = C² ⊗ F, ρ)` and the dictionary
//! with nonnegative bundles on `CP¹` through `0 → O(−1)⊗F → O⊗U → 𝒰 → 0`.

mod hypercomplex;
mod quotient;

pub use hypercomplex::{kernel_line, nilpotent, HypercomplexStructure, BASIS};
pub use quotient::{bundle_of, space_from_bundle, Completion, QuotientBundle, RhoQuatSpace, SectionModel};
