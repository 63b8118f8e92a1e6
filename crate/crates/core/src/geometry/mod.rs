//! Sampled closed sets, the no-narrow-fjords and outward-cusp verifiers,
//! constant bookkeeping and test domains.

pub mod constants;
pub mod cusp;
pub mod fjord;
pub mod generators;
pub mod geodesic;
mod polygon;
mod set;

pub use constants::{normalize_constants, transfer_cusp_constants, CuspConstants};
pub use cusp::{
    boundary_subset, check_outward_cusps, replay_cusp_certificate, CuspCertificate, CuspCheckConfig, CuspOutcome,
    CuspViolation, CuspWitness,
};
pub use fjord::{
    check_no_narrow_fjords, replay_fjord_certificate, select_pairs, FjordCertificate, FjordCheckConfig, FjordOutcome,
    FjordPath, FjordProbe,
};
pub use geodesic::GridGeodesic;
pub use polygon::Polygon;
pub use set::{Euclidean, Metric, SampleKind, SampledClosedSet, SetOracle, SetValidation};
