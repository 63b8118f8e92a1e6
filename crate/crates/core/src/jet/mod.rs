//! Multi-indices, finite-order Whitney jets and their seminorms.

mod field;
pub mod functions;
mod multi_index;
mod seminorm;
mod source;

pub use field::JetField;
pub use multi_index::{IndexSet, MultiIndex};
pub use seminorm::{
    q_profile, q_seminorm, seminorm_report, whitney_jet_check, JetCheck, JetCheckConfig, JetVerdict, QProfile,
    RemainderWitness, SeminormReport,
};
pub use source::{central_difference, central_difference_step, fd_step, jet_of_function, FnSource, JetSource};
