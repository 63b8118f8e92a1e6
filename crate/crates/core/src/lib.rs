//! Finite-order Whitney extension machinery.
//!
//! The crate is `no_std` (it needs `alloc`) and holds only pure numerics:
//!
//! * [`jet`]: multi-indices, Whitney jets of finite order, formal Taylor
//!   polynomials and remainders, the jet seminorms and the Whitney-jet test.
//! * [`geometry`]: sampled closed sets, verifiers for the no-narrow-fjords and
//!   polynomial-outward-cusp conditions, constant bookkeeping for metric
//!   changes, and a graph geodesic metric on Riemannian grids.
//! * [`extension`]: dyadic Whitney cubes, a cube partition of unity, and the
//!   Taylor-blending extension operator on `R^d`.
//! * [`patching`]: atlases with bundle transitions, the mixing map, per-chart
//!   extension and gluing into a global extension operator on a manifold.
//! * [`mapping`]: local additions on flat space and round spheres, canonical
//!   charts on grid-sampled mapping spaces, and the submersion-chart check.
//!
//! File formats, the experiment runner and the CLI live in the `wkit` crate.

#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod extension;
pub mod geometry;
pub mod graph;
pub mod jet;
pub mod kdtree;
pub mod mapping;
pub mod patching;

pub use error::{Error, Result};
