use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::kdtree::{dist, KdTree};
use crate::{Error, Result};

/// A distance function on `R^d`.
pub trait Metric: Send + Sync + fmt::Debug {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64;

    /// Whether `distance` is the Euclidean distance. Verifiers use this to
    /// enable exact ball reasoning on samples.
    fn is_euclidean(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Euclidean;

impl Metric for Euclidean {
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        dist(a, b)
    }

    fn is_euclidean(&self) -> bool {
        true
    }
}

/// Closed-form membership and interior oracles of a closed set `C`.
pub trait SetOracle: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// `x` in `C`.
    fn contains(&self, x: &[f64]) -> bool;

    /// `x` in the interior of `C`.
    fn interior(&self, x: &[f64]) -> bool;

    /// Whether the open segment `(a, b)` lies in the interior of `C`.
    ///
    /// The default probes the segment at spacing at most `step`; generators
    /// with closed-form boundaries override it with an exact test.
    fn open_segment_interior(&self, a: &[f64], b: &[f64], step: f64) -> bool {
        let len = dist(a, b);
        let n = ((len / step).ceil() as usize).max(2);
        let mut p = alloc::vec![0.0; a.len()];
        (1..n).all(|k| {
            let t = k as f64 / n as f64;
            for (i, v) in p.iter_mut().enumerate() {
                *v = a[i] + t * (b[i] - a[i]);
            }
            self.interior(&p)
        })
    }
}

/// Tag of a sample point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Boundary,
    Interior,
}

/// A closed set given by oracles, tagged point samples and a metric.
///
/// Samples are stored flat. The combined sample list used for jets is the
/// boundary samples followed by the interior samples.
#[derive(Clone)]
pub struct SampledClosedSet {
    label: String,
    oracle: Arc<dyn SetOracle>,
    metric: Arc<dyn Metric>,
    resolution: f64,
    boundary: Vec<f64>,
    interior: Vec<f64>,
    boundary_tree: KdTree,
    interior_tree: KdTree,
}

impl fmt::Debug for SampledClosedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SampledClosedSet")
            .field("label", &self.label)
            .field("dim", &self.dim())
            .field("resolution", &self.resolution)
            .field("boundary_samples", &self.boundary_len())
            .field("interior_samples", &self.interior_len())
            .finish()
    }
}

impl SampledClosedSet {
    pub fn new(
        label: impl Into<String>,
        oracle: Arc<dyn SetOracle>,
        boundary: Vec<f64>,
        interior: Vec<f64>,
        resolution: f64,
    ) -> Result<Self> {
        let d = oracle.dim();
        if d == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        if !(resolution > 0.0) || !resolution.is_finite() {
            return Err(Error::Argument(format!("resolution must be positive, got {resolution}")));
        }
        if !boundary.len().is_multiple_of(d) || !interior.len().is_multiple_of(d) {
            return Err(Error::Config("sample arrays do not match the dimension".into()));
        }
        if boundary.iter().chain(&interior).any(|v| !v.is_finite()) {
            return Err(Error::Argument("non-finite sample coordinate".into()));
        }
        let boundary_tree = KdTree::new(d, boundary.clone());
        let interior_tree = KdTree::new(d, interior.clone());
        Ok(Self {
            label: label.into(),
            oracle,
            metric: Arc::new(Euclidean),
            resolution,
            boundary,
            interior,
            boundary_tree,
            interior_tree,
        })
    }

    pub fn with_metric(mut self, metric: Arc<dyn Metric>) -> Self {
        self.metric = metric;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn oracle(&self) -> &Arc<dyn SetOracle> {
        &self.oracle
    }

    pub fn metric(&self) -> &Arc<dyn Metric> {
        &self.metric
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.oracle.contains(x)
    }

    pub fn interior(&self, x: &[f64]) -> bool {
        self.oracle.interior(x)
    }

    pub fn open_segment_interior(&self, a: &[f64], b: &[f64]) -> bool {
        self.oracle.open_segment_interior(a, b, self.resolution / 8.0)
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.metric.distance(a, b)
    }

    pub fn boundary_samples(&self) -> &[f64] {
        &self.boundary
    }

    pub fn interior_samples(&self) -> &[f64] {
        &self.interior
    }

    pub fn boundary_len(&self) -> usize {
        self.boundary.len() / self.dim()
    }

    pub fn interior_len(&self) -> usize {
        self.interior.len() / self.dim()
    }

    pub fn boundary_point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.boundary[i * d..(i + 1) * d]
    }

    pub fn interior_point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.interior[i * d..(i + 1) * d]
    }

    pub fn boundary_tree(&self) -> &KdTree {
        &self.boundary_tree
    }

    pub fn interior_tree(&self) -> &KdTree {
        &self.interior_tree
    }

    pub fn sample_len(&self) -> usize {
        self.boundary_len() + self.interior_len()
    }

    /// Boundary samples followed by interior samples, flat.
    pub fn sample_points(&self) -> Vec<f64> {
        let mut all = self.boundary.clone();
        all.extend_from_slice(&self.interior);
        all
    }

    pub fn sample_kind(&self, i: usize) -> SampleKind {
        if i < self.boundary_len() {
            SampleKind::Boundary
        } else {
            SampleKind::Interior
        }
    }

    /// Euclidean distance from `x` to the sampled set; `0` when the
    /// membership oracle accepts `x`.
    pub fn distance_to_set(&self, x: &[f64]) -> f64 {
        if self.contains(x) {
            return 0.0;
        }
        let b = self.boundary_tree.nearest(x).map_or(f64::INFINITY, |n| n.1);
        let i = self.interior_tree.nearest(x).map_or(f64::INFINITY, |n| n.1);
        b.min(i)
    }

    /// Checks the stated invariants on the samples: tags agree with the
    /// oracles, the metric is symmetric, vanishes exactly on equal points and
    /// satisfies the triangle inequality on sampled triples, and every
    /// boundary sample has an interior sample within the resolution.
    pub fn validate(&self) -> SetValidation {
        let d = self.dim();
        let mut report = SetValidation::default();
        for i in 0..self.boundary_len() {
            if !self.contains(self.boundary_point(i)) {
                report.problems.push(format!("boundary sample {i} is not in the set"));
            }
        }
        for i in 0..self.interior_len() {
            let x = self.interior_point(i);
            if !self.interior(x) || !self.contains(x) {
                report.problems.push(format!("interior sample {i} is not interior"));
            }
        }
        for i in 0..self.boundary_len() {
            let ok = self
                .interior_tree
                .nearest(self.boundary_point(i))
                .is_some_and(|(_, r)| r <= self.resolution);
            if !ok {
                report.regularity_gaps += 1;
            }
        }
        if report.regularity_gaps > 0 {
            report.problems.push(format!(
                "{} boundary samples have no interior sample within {}",
                report.regularity_gaps, self.resolution
            ));
        }
        // Deterministic stride over the combined sample list.
        let all = self.sample_points();
        let n = all.len() / d;
        if n > 0 {
            let take = n.min(40);
            let stride = (n / take).max(1);
            let picks: Vec<&[f64]> = (0..take).map(|k| &all[(k * stride % n) * d..(k * stride % n + 1) * d]).collect();
            for a in &picks {
                if self.distance(a, a) != 0.0 {
                    report.problems.push(format!("metric({a:?}, itself) is not zero"));
                }
                for b in &picks {
                    let ab = self.distance(a, b);
                    if (ab - self.distance(b, a)).abs() > 1e-9 {
                        report.problems.push(format!("metric is not symmetric at {a:?}, {b:?}"));
                    }
                    if a != b && !(ab > 0.0) {
                        report.problems.push(format!("metric vanishes between {a:?} and {b:?}"));
                    }
                    for c in picks.iter().step_by(4) {
                        if ab > self.distance(a, c) + self.distance(c, b) + 1e-9 {
                            report.problems.push(format!("triangle inequality fails at {a:?}, {b:?}, {c:?}"));
                        }
                    }
                }
            }
        }
        report
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SetValidation {
    pub regularity_gaps: usize,
    pub problems: Vec<String>,
}

impl SetValidation {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Adds, for every boundary sample lacking an interior sample within
/// `resolution`, an interior point at distance `resolution / 2` from it.
pub(crate) fn add_regularity_witnesses(oracle: &dyn SetOracle, boundary: &[f64], interior: &mut Vec<f64>, resolution: f64) {
    let d = oracle.dim();
    let tree = KdTree::new(d, interior.clone());
    let dirs = probe_directions(d);
    let step = resolution / 2.0;
    let mut p = alloc::vec![0.0; d];
    for b in boundary.chunks_exact(d) {
        if tree.nearest(b).is_some_and(|(_, r)| r <= resolution) {
            continue;
        }
        for u in dirs.chunks_exact(d) {
            for i in 0..d {
                p[i] = b[i] + step * u[i];
            }
            if oracle.interior(&p) {
                interior.extend_from_slice(&p);
                break;
            }
        }
    }
}

/// Unit directions: 32 angles in the plane, otherwise the normalised
/// vectors of `{-1, 0, 1}^d \ {0}`.
fn probe_directions(d: usize) -> Vec<f64> {
    let mut out = Vec::new();
    if d == 2 {
        for k in 0..32 {
            let t = core::f64::consts::PI * k as f64 / 16.0;
            out.extend_from_slice(&[t.cos(), t.sin()]);
        }
        return out;
    }
    let total = 3usize.pow(d as u32);
    for code in 0..total {
        let mut c = code;
        let mut v = Vec::with_capacity(d);
        for _ in 0..d {
            v.push((c % 3) as f64 - 1.0);
            c /= 3;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            out.extend(v.iter().map(|x| x / norm));
        }
    }
    out
}
