//! Whitney extension on `R^d` at finite jet order.
//!
//! [`whitney_decompose`] covers a box minus the set by dyadic cubes whose
//! size is comparable to their distance from the set, [`BumpSystem`] turns
//! the cubes into a partition of unity, and [`extend_jet`] blends the
//! Taylor polynomials at the cube anchors.

mod agreement;
mod bumps;
mod decomposition;
mod operator;

pub use agreement::{verify_jet_agreement, AgreementReport, DecayFit};
pub use bumps::{BumpProfile, BumpSystem, SUPPORT_FACTOR};
pub use decomposition::{
    nearest_sample, whitney_decompose, Aabb, Cube, WhitneyDecomposition, DEFAULT_CUBE_BUDGET, PROXIMITY_HIGH,
    PROXIMITY_LOW,
};
pub use operator::{extend_jet, Branch, WhitneyExtension};
