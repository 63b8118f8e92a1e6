use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::jet::RemainderWitness;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A base point that is not one of the jet's sample points.
    MissingPoint(Vec<f64>),
    /// Requested jet order exceeds the order carried by the jet.
    Order { requested: usize, available: usize },
    /// A scalar argument outside its admissible range.
    Argument(String),
    /// Inconsistent or insufficient configuration.
    Config(String),
    /// A finite-difference stencil left the admissible domain.
    Stencil { location: Vec<f64> },
    EmptyInput(String),
    /// Invalid geometric data at a node (e.g. a metric tensor that is not SPD).
    Geometry { node: usize, detail: String },
    /// A resource guard was exceeded.
    Size { limit: usize, detail: String },
    /// Evaluation outside the domain of an operator.
    Domain { point: Vec<f64> },
    /// The jet failed the Whitney-jet test; carries the witness.
    NotWhitneyJet(Box<RemainderWitness>),
    /// A partition-of-unity value is missing at a point of the manifold.
    Coverage { chart: usize, point: Vec<f64> },
    /// Chart/sample bookkeeping mismatch.
    Indexing(String),
    /// Overlap data is incompatible beyond tolerance.
    Glue {
        chart_a: usize,
        chart_b: usize,
        point: Vec<f64>,
        defect: f64,
    },
    /// A chart refused to extend because its closed set failed a cusp check.
    CuspPrecondition { chart: usize, detail: String },
    /// A grid node lies outside the domain of a canonical chart.
    ChartDomain { node: usize, distance: f64, bound: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::MissingPoint(p) => write!(f, "point {p:?} is not a sample point of the jet"),
            Error::Order {
                requested,
                available,
            } => write!(f, "order {requested} requested but the jet has order {available}"),
            Error::Argument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Stencil { location } => {
                write!(f, "finite-difference stencil leaves the domain at {location:?}")
            }
            Error::EmptyInput(msg) => write!(f, "empty input: {msg}"),
            Error::Geometry { node, detail } => write!(f, "geometry error at node {node}: {detail}"),
            Error::Size { limit, detail } => write!(f, "size limit {limit} exceeded: {detail}"),
            Error::Domain { point } => write!(f, "point {point:?} is outside the operator domain"),
            Error::NotWhitneyJet(w) => write!(
                f,
                "not a Whitney jet: remainder ratio {:.6} for alpha {:?} between {:?} and {:?}",
                w.ratio,
                w.alpha.entries(),
                w.base_point,
                w.target_point
            ),
            Error::Coverage { chart, point } => {
                write!(f, "no partition-of-unity coverage at {point:?} (chart {chart})")
            }
            Error::Indexing(msg) => write!(f, "indexing error: {msg}"),
            Error::Glue {
                chart_a,
                chart_b,
                point,
                defect,
            } => write!(
                f,
                "charts {chart_a} and {chart_b} disagree by {defect:e} at {point:?}"
            ),
            Error::CuspPrecondition { chart, detail } => {
                write!(f, "chart {chart} fails the cusp precondition: {detail}")
            }
            Error::ChartDomain {
                node,
                distance,
                bound,
            } => write!(
                f,
                "node {node} is outside the chart domain (distance {distance} > {bound})"
            ),
        }
    }
}

impl core::error::Error for Error {}
