//! Vector bundles over manifolds given by finitely many box charts:
//! sampled local sections, partition-of-unity mixing, gluing and the global
//! extension of sections from a closed subset.

mod atlas;
mod global;
mod mixing;
mod section;

pub use atlas::{
    circle_angle, circle_two_chart, model_boxes, AffinePiece, AtlasBundle, Bundle, Chart, FrameField, Gauge, ManifoldPoint,
    PouProfile, PouReport,
};
pub use global::{
    circle_arc, global_extension_operator, CircleTrigSection, local_extend, locate_angle, seam_jumps, ArcOracle, ChartExtension,
    ExtensionSettings, GlobalExtension, LocalExtensions, ManifoldSubset, Preconditions, SeamReport, SectionEvaluator,
};
pub use mixing::{glue, mixing_map, GluedSection};
pub use section::{
    compatibility_check, restrict_section, ChartValues, CompactSupportTag, CompatibilityReport, LocalSectionFamily,
    PairDefect, SectionSource, Stage,
};
