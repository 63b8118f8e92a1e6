//! Spaces of smooth maps sampled on grids: local additions, canonical
//! charts, change of charts and the submersion-chart check for restriction
//! to a closed subset.

mod addition;
mod chart;
mod submersion;

pub use addition::LocalAddition;
pub use chart::{change_of_charts, chart_backward, chart_forward, MapGridFunction, TangentField};
pub use submersion::{
    submersion_chart_check, CircleMap, PullbackFrames, SubmersionConfig, SubmersionReport, SubmersionSetup,
    TangentAlongMap, TrialDefects, TrigVectorField,
};
