//! Finite atlases of boxes with affine transition maps, a subordinate
//! partition of unity, and vector-bundle trivializations.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::extension::Aabb;
use crate::{Error, Result};

/// `u -> A u + b` applied to chart coordinates lying in `domain`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinePiece {
    pub domain: Aabb,
    /// Row-major `d x d`.
    pub matrix: Vec<f64>,
    pub offset: Vec<f64>,
}

impl AffinePiece {
    pub fn translation(domain: Aabb, offset: Vec<f64>) -> Self {
        let d = offset.len();
        let mut matrix = vec![0.0; d * d];
        for i in 0..d {
            matrix[i * d + i] = 1.0;
        }
        Self { domain, matrix, offset }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let d = u.len();
        (0..d)
            .map(|i| (0..d).fold(self.offset[i], |acc, k| acc + self.matrix[i * d + k] * u[k]))
            .collect()
    }
}

/// Radial shape of the bumps `psi_i` normalized into the partition of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PouProfile {
    /// Product of `exp(-1/(t(1-t)))` over the axes of the shrunken box.
    #[default]
    Smooth,
    /// Product of tent functions `1 - |2t - 1|`.
    Hat,
}

impl PouProfile {
    fn eval(self, t: f64) -> f64 {
        if !(t > 0.0 && t < 1.0) {
            return 0.0;
        }
        match self {
            PouProfile::Smooth => (4.0 - 1.0 / (t * (1.0 - t))).exp(),
            PouProfile::Hat => 1.0 - (2.0 * t - 1.0).abs(),
        }
    }
}

/// Chart domain `U` (open box in chart coordinates) with shrunken box `V`,
/// `closure(V) ⊂ U`, carrying the bump of the partition of unity.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub domain: Aabb,
    pub shrunk: Aabb,
    pub pou: PouProfile,
}

impl Chart {
    pub fn new(domain: Aabb, shrunk: Aabb, pou: PouProfile) -> Result<Self> {
        if domain.dim() != shrunk.dim() {
            return Err(Error::Config("chart boxes differ in dimension".into()));
        }
        let inside = (0..domain.dim()).all(|k| domain.lo[k] < shrunk.lo[k] && shrunk.hi[k] < domain.hi[k]);
        if !inside {
            return Err(Error::Config(format!(
                "shrunken box {:?}..{:?} is not compactly inside {:?}..{:?}",
                shrunk.lo, shrunk.hi, domain.lo, domain.hi
            )));
        }
        Ok(Self { domain, shrunk, pou })
    }

    pub fn in_domain(&self, u: &[f64]) -> bool {
        open_contains(&self.domain, u)
    }

    pub fn in_shrunk(&self, u: &[f64]) -> bool {
        open_contains(&self.shrunk, u)
    }

    /// Unnormalized bump, positive exactly on the open shrunken box.
    pub fn bump(&self, u: &[f64]) -> f64 {
        let b = &self.shrunk;
        (0..u.len()).fold(1.0, |acc, k| acc * self.pou.eval((u[k] - b.lo[k]) / (b.hi[k] - b.lo[k])))
    }
}

pub(crate) fn open_contains(b: &Aabb, u: &[f64]) -> bool {
    u.iter().zip(b.lo.iter().zip(&b.hi)).all(|(v, (lo, hi))| *lo < *v && *v < *hi)
}

/// Per-chart change of trivialization `G_i(u)`, so that `Phi_ij = G_i G_j^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Gauge {
    Identity,
    /// `exp(a . u + b)` times the identity.
    Scalar { slope: Vec<f64>, intercept: f64 },
    /// Rotation by the angle `a . u + b` (rank 2 only).
    Rotation { slope: Vec<f64>, intercept: f64 },
}

impl Gauge {
    fn linear(slope: &[f64], intercept: f64, u: &[f64]) -> f64 {
        slope.iter().zip(u).fold(intercept, |acc, (a, x)| acc + a * x)
    }

    /// `G(u)` when `inverse` is false, `G(u)^{-1}` otherwise, row-major.
    fn matrix(&self, rank: usize, u: &[f64], inverse: bool) -> Vec<f64> {
        let sign = if inverse { -1.0 } else { 1.0 };
        match self {
            Gauge::Identity => identity(rank),
            Gauge::Scalar { slope, intercept } => {
                let s = (sign * Self::linear(slope, *intercept, u)).exp();
                let mut m = identity(rank);
                m.iter_mut().for_each(|v| *v *= s);
                m
            }
            Gauge::Rotation { slope, intercept } => {
                let t = sign * Self::linear(slope, *intercept, u);
                let (s, c) = t.sin_cos();
                vec![c, -s, s, c]
            }
        }
    }
}

/// Orthonormal-style frames of a bundle embedded in a trivial ambient bundle
/// `M x R^n`: per chart an `n x r` frame `E_i(u)` and an `r x n` left
/// inverse `L_i(u)`. Then `Phi_ij = L_i E_j`.
pub trait FrameField: Send + Sync + fmt::Debug {
    fn ambient(&self) -> usize;
    /// Writes `E` (`n x r`) and `L` (`r x n`), row-major.
    fn frame(&self, chart: usize, u: &[f64], e: &mut [f64], l: &mut [f64]);
}

#[derive(Debug, Clone)]
pub enum Bundle {
    Trivial { rank: usize },
    Gauged { rank: usize, gauges: Vec<Gauge> },
    Frames { rank: usize, field: Arc<dyn FrameField> },
}

impl Bundle {
    pub fn rank(&self) -> usize {
        match self {
            Bundle::Trivial { rank } | Bundle::Gauged { rank, .. } | Bundle::Frames { rank, .. } => *rank,
        }
    }
}

/// A point of the manifold with its coordinates in every chart whose domain
/// contains it, sorted by chart.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldPoint {
    pub home: usize,
    pub coords: Vec<(usize, Vec<f64>)>,
}

impl ManifoldPoint {
    pub fn coords_in(&self, chart: usize) -> Option<&[f64]> {
        self.coords
            .binary_search_by_key(&chart, |c| c.0)
            .ok()
            .map(|k| self.coords[k].1.as_slice())
    }

    pub fn home_coords(&self) -> &[f64] {
        self.coords_in(self.home).expect("home chart holds the point")
    }

    pub fn charts(&self) -> impl Iterator<Item = usize> + '_ {
        self.coords.iter().map(|c| c.0)
    }
}

#[derive(Debug, Clone)]
pub struct AtlasBundle {
    dim: usize,
    charts: Vec<Chart>,
    transitions: BTreeMap<(usize, usize), Vec<AffinePiece>>,
    bundle: Bundle,
}

impl AtlasBundle {
    /// `transitions[(i, j)]` maps chart-`i` coordinates to chart-`j`
    /// coordinates on the pieces of the overlap.
    pub fn new(charts: Vec<Chart>, transitions: BTreeMap<(usize, usize), Vec<AffinePiece>>, bundle: Bundle) -> Result<Self> {
        let Some(first) = charts.first() else {
            return Err(Error::Config("atlas needs at least one chart".into()));
        };
        let dim = first.domain.dim();
        if charts.iter().any(|c| c.domain.dim() != dim) {
            return Err(Error::Config("charts differ in dimension".into()));
        }
        for (&(i, j), pieces) in &transitions {
            if i >= charts.len() || j >= charts.len() || i == j {
                return Err(Error::Config(format!("transition ({i}, {j}) does not join two charts")));
            }
            if pieces.iter().any(|p| p.domain.dim() != dim || p.offset.len() != dim || p.matrix.len() != dim * dim) {
                return Err(Error::Config(format!("transition ({i}, {j}) has pieces of the wrong dimension")));
            }
        }
        let rank = bundle.rank();
        if rank == 0 {
            return Err(Error::Config("bundle rank must be positive".into()));
        }
        match &bundle {
            Bundle::Gauged { gauges, .. } => {
                if gauges.len() != charts.len() {
                    return Err(Error::Config("one gauge per chart is required".into()));
                }
                for g in gauges {
                    let ok = match g {
                        Gauge::Identity => true,
                        Gauge::Scalar { slope, .. } => slope.len() == dim,
                        Gauge::Rotation { slope, .. } => slope.len() == dim && rank == 2,
                    };
                    if !ok {
                        return Err(Error::Config(format!("gauge {g:?} does not fit dimension {dim} and rank {rank}")));
                    }
                }
            }
            Bundle::Frames { field, .. } if field.ambient() < rank => {
                return Err(Error::Config("frame ambient dimension is below the rank".into()));
            }
            _ => {}
        }
        Ok(Self {
            dim,
            charts,
            transitions,
            bundle,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.bundle.rank()
    }

    pub fn len(&self) -> usize {
        self.charts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charts.is_empty()
    }

    pub fn chart(&self, i: usize) -> &Chart {
        &self.charts[i]
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn bundle(&self) -> &Bundle {
        &self.bundle
    }

    pub fn transitions(&self) -> &BTreeMap<(usize, usize), Vec<AffinePiece>> {
        &self.transitions
    }

    pub fn with_bundle(mut self, bundle: Bundle) -> Result<Self> {
        let charts = core::mem::take(&mut self.charts);
        Self::new(charts, self.transitions, bundle)
    }

    /// Coordinates in chart `j` of the point with chart-`i` coordinates `u`,
    /// when it lies in the domain of `j`.
    pub fn transition(&self, i: usize, j: usize, u: &[f64]) -> Option<Vec<f64>> {
        if i == j {
            return self.charts[i].in_domain(u).then(|| u.to_vec());
        }
        let pieces = self.transitions.get(&(i, j))?;
        let piece = pieces.iter().find(|p| p.domain.contains(u))?;
        let v = piece.apply(u);
        self.charts[j].in_domain(&v).then_some(v)
    }

    /// The manifold point with coordinates `u` in chart `home`.
    pub fn locate(&self, home: usize, u: &[f64]) -> Result<ManifoldPoint> {
        if home >= self.len() || u.len() != self.dim || !self.charts[home].in_domain(u) {
            return Err(Error::Indexing(format!("{u:?} is not in the domain of chart {home}")));
        }
        let coords = (0..self.len())
            .filter_map(|j| self.transition(home, j, u).map(|v| (j, v)))
            .collect();
        Ok(ManifoldPoint { home, coords })
    }

    /// Grid points of every shrunken box, spacing at most `spacing`.
    pub fn grid_points(&self, spacing: f64) -> Result<Vec<ManifoldPoint>> {
        if !(spacing > 0.0) {
            return Err(Error::Argument(format!("grid spacing must be positive, got {spacing}")));
        }
        let mut out = Vec::new();
        for (i, c) in self.charts.iter().enumerate() {
            let b = &c.shrunk;
            let counts: Vec<usize> = (0..self.dim)
                .map(|k| ((b.hi[k] - b.lo[k]) / spacing).ceil().max(1.0) as usize)
                .collect();
            let total: usize = counts.iter().product();
            for mut n in 0..total {
                let u: Vec<f64> = (0..self.dim)
                    .map(|k| {
                        let step = (b.hi[k] - b.lo[k]) / counts[k] as f64;
                        let v = b.lo[k] + (n % counts[k]) as f64 * step + 0.5 * step;
                        n /= counts[k];
                        v
                    })
                    .collect();
                out.push(self.locate(i, &u)?);
            }
        }
        Ok(out)
    }

    /// Partition-of-unity values `(chart, chi)` with `chi > 0` at `p`.
    pub fn pou(&self, p: &ManifoldPoint) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = p
            .coords
            .iter()
            .map(|(j, u)| (*j, self.charts[*j].bump(u)))
            .filter(|e| e.1 > 0.0)
            .collect();
        let total: f64 = out.iter().map(|e| e.1).sum();
        out.iter_mut().for_each(|e| e.1 /= total);
        out
    }

    pub fn chi(&self, j: usize, p: &ManifoldPoint) -> f64 {
        self.pou(p).iter().find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    /// `Phi_ij(p)` (`r x r`, row-major): turns chart-`j` fibre coordinates
    /// into chart-`i` fibre coordinates.
    pub fn phi(&self, i: usize, j: usize, p: &ManifoldPoint) -> Result<Vec<f64>> {
        let r = self.rank();
        let (Some(ui), Some(uj)) = (p.coords_in(i), p.coords_in(j)) else {
            return Err(Error::Indexing(format!("point is not in the overlap of charts {i} and {j}")));
        };
        Ok(match &self.bundle {
            Bundle::Trivial { .. } => identity(r),
            Bundle::Gauged { gauges, .. } => {
                if i == j {
                    identity(r)
                } else {
                    mat_mul(r, r, r, &gauges[i].matrix(r, ui, false), &gauges[j].matrix(r, uj, true))
                }
            }
            Bundle::Frames { field, .. } => {
                let n = field.ambient();
                let (mut ei, mut li) = (vec![0.0; n * r], vec![0.0; r * n]);
                let (mut ej, mut lj) = (vec![0.0; n * r], vec![0.0; r * n]);
                field.frame(i, ui, &mut ei, &mut li);
                field.frame(j, uj, &mut ej, &mut lj);
                mat_mul(r, n, r, &li, &ej)
            }
        })
    }

    /// `Phi_ij(p) v`.
    pub fn transport(&self, i: usize, j: usize, p: &ManifoldPoint, v: &[f64]) -> Result<Vec<f64>> {
        if i == j {
            return Ok(v.to_vec());
        }
        if let Bundle::Trivial { .. } = self.bundle {
            return Ok(v.to_vec());
        }
        let m = self.phi(i, j, p)?;
        Ok(mat_vec(self.rank(), self.rank(), &m, v))
    }

    /// Largest entry of `Phi_ik - Phi_ij Phi_jk` over all sampled triple
    /// overlaps, including `Phi_ii = I`.
    pub fn cocycle_defect(&self, points: &[ManifoldPoint]) -> Result<f64> {
        let r = self.rank();
        let mut worst = 0.0f64;
        for p in points {
            let charts: Vec<usize> = p.charts().collect();
            let mut table = BTreeMap::new();
            for &i in &charts {
                for &j in &charts {
                    table.insert((i, j), self.phi(i, j, p)?);
                }
            }
            for &i in &charts {
                let id = identity(r);
                worst = worst.max(max_abs_diff(&table[&(i, i)], &id));
                for &j in &charts {
                    for &k in &charts {
                        let prod = mat_mul(r, r, r, &table[&(i, j)], &table[&(j, k)]);
                        worst = worst.max(max_abs_diff(&table[&(i, k)], &prod));
                    }
                }
            }
        }
        Ok(worst)
    }

    /// Sampled checks of the partition of unity.
    pub fn pou_report(&self, points: &[ManifoldPoint]) -> PouReport {
        let mut rep = PouReport::default();
        for p in points {
            rep.multiplicity = rep.multiplicity.max(p.coords.len());
            let values = self.pou(p);
            let in_some_v = p.coords.iter().any(|(j, u)| self.charts[*j].in_shrunk(u));
            if in_some_v {
                let s: f64 = values.iter().map(|e| e.1).sum();
                rep.max_sum_defect = rep.max_sum_defect.max((s - 1.0).abs());
            }
            for (j, chi) in values {
                if chi < 0.0 {
                    rep.negative += 1;
                }
                if !self.charts[j].in_shrunk(p.coords_in(j).expect("chart of the point")) {
                    rep.support_violations += 1;
                }
            }
        }
        rep
    }

    /// Charts `j` whose domain meets the domain of `i`, judged on samples.
    pub fn neighbours(&self, i: usize, points: &[ManifoldPoint]) -> Vec<usize> {
        let mut out: Vec<usize> = points
            .iter()
            .filter(|p| p.coords_in(i).is_some())
            .flat_map(|p| p.charts())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PouReport {
    /// `max |sum_i chi_i - 1|` over samples in the union of shrunken boxes.
    pub max_sum_defect: f64,
    pub negative: usize,
    /// Samples where some `chi_j > 0` outside the shrunken box of `j`.
    pub support_violations: usize,
    /// Largest number of charts holding one sample.
    pub multiplicity: usize,
}

pub(crate) fn identity(r: usize) -> Vec<f64> {
    let mut m = vec![0.0; r * r];
    for i in 0..r {
        m[i * r + i] = 1.0;
    }
    m
}

/// `(a x b) * (b x c)`, row-major.
pub(crate) fn mat_mul(a: usize, b: usize, c: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a * c];
    for i in 0..a {
        for k in 0..b {
            let v = x[i * b + k];
            for j in 0..c {
                out[i * c + j] += v * y[k * c + j];
            }
        }
    }
    out
}

pub(crate) fn mat_vec(rows: usize, cols: usize, m: &[f64], v: &[f64]) -> Vec<f64> {
    (0..rows)
        .map(|i| (0..cols).fold(0.0, |acc, k| acc + m[i * cols + k] * v[k]))
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// The circle as two arcs. Chart 0 has coordinate `theta` on
/// `(-delta, pi + delta)`, chart 1 has `u` with `theta = u + pi` on the same
/// interval. Shrunken boxes are `(-delta/2, pi + delta/2)`.
pub fn circle_two_chart(delta: f64, pou: PouProfile, rank: usize) -> Result<AtlasBundle> {
    if !(delta > 0.0 && delta < PI / 2.0) {
        return Err(Error::Argument(format!("overlap half-width must lie in (0, pi/2), got {delta}")));
    }
    let b = |lo: f64, hi: f64| Aabb::new(vec![lo], vec![hi]);
    let chart = Chart::new(b(-delta, PI + delta)?, b(-delta / 2.0, PI + delta / 2.0)?, pou)?;
    let pieces = vec![
        AffinePiece::translation(b(PI - delta, PI + delta)?, vec![-PI]),
        AffinePiece::translation(b(-delta, delta)?, vec![PI]),
    ];
    let mut transitions = BTreeMap::new();
    transitions.insert((0, 1), pieces.clone());
    transitions.insert((1, 0), pieces);
    AtlasBundle::new(vec![chart.clone(), chart], transitions, Bundle::Trivial { rank })
}

/// Angle in `[0, 2 pi)` of a point of [`circle_two_chart`].
pub fn circle_angle(p: &ManifoldPoint) -> f64 {
    let u = p.home_coords()[0];
    let t = if p.home == 0 { u } else { u + PI };
    wrap_angle(t)
}

/// `x` reduced to `[0, 2 pi)`.
pub(crate) fn wrap_angle(x: f64) -> f64 {
    let t = x - 2.0 * PI * (x / (2.0 * PI)).floor();
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}

/// Charts given as boxes in a model space `R^d` with coordinates
/// `u = s_i * x + b_i` (componentwise scale and shift). Transitions are the
/// induced affine maps on the closures of pairwise intersections.
pub fn model_boxes(
    boxes: Vec<(Aabb, Aabb)>,
    scales: Vec<Vec<f64>>,
    shifts: Vec<Vec<f64>>,
    pou: PouProfile,
    bundle: Bundle,
) -> Result<AtlasBundle> {
    let n = boxes.len();
    if scales.len() != n || shifts.len() != n {
        return Err(Error::Config("one scale and one shift per chart".into()));
    }
    let d = boxes.first().map_or(0, |b| b.0.dim());
    let to_chart = |i: usize, b: &Aabb| -> Result<Aabb> {
        let (mut lo, mut hi) = (vec![0.0; d], vec![0.0; d]);
        for k in 0..d {
            let (a, c) = (scales[i][k] * b.lo[k] + shifts[i][k], scales[i][k] * b.hi[k] + shifts[i][k]);
            lo[k] = a.min(c);
            hi[k] = a.max(c);
        }
        Aabb::new(lo, hi)
    };
    if scales.iter().chain(&shifts).any(|v| v.len() != d) || scales.iter().flatten().any(|s| *s == 0.0) {
        return Err(Error::Config("scales must be non-zero and match the dimension".into()));
    }
    let mut charts = Vec::with_capacity(n);
    for (i, (u, v)) in boxes.iter().enumerate() {
        charts.push(Chart::new(to_chart(i, u)?, to_chart(i, v)?, pou)?);
    }
    let mut transitions = BTreeMap::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (&boxes[i].0, &boxes[j].0);
            let lo: Vec<f64> = (0..d).map(|k| a.lo[k].max(b.lo[k])).collect();
            let hi: Vec<f64> = (0..d).map(|k| a.hi[k].min(b.hi[k])).collect();
            let Ok(meet) = Aabb::new(lo, hi) else { continue };
            // v = s_j (u - b_i) / s_i + b_j
            let mut matrix = vec![0.0; d * d];
            let mut offset = vec![0.0; d];
            for k in 0..d {
                let ratio = scales[j][k] / scales[i][k];
                matrix[k * d + k] = ratio;
                offset[k] = shifts[j][k] - ratio * shifts[i][k];
            }
            transitions.insert(
                (i, j),
                vec![AffinePiece {
                    domain: to_chart(i, &meet)?,
                    matrix,
                    offset,
                }],
            );
        }
    }
    AtlasBundle::new(charts, transitions, bundle)
}
