//! Sampled local representatives of bundle sections, one per chart.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::atlas::{AtlasBundle, ManifoldPoint};
use crate::jet::{jet_of_function, IndexSet, JetSource};
use crate::{Error, Result};

/// Which subset of each chart a family is sampled on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// All samples in the chart domain `U_i`.
    Domain,
    /// Samples in the shrunken box `V_i`.
    Shrunk,
    /// Samples of the closed subset inside `U_i`.
    Subset,
}

impl Stage {
    fn holds(self, atlas: &AtlasBundle, chart: usize, p: &ManifoldPoint) -> bool {
        match p.coords_in(chart) {
            None => false,
            Some(u) => match self {
                Stage::Domain | Stage::Subset => true,
                Stage::Shrunk => atlas.chart(chart).in_shrunk(u),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartValues {
    /// Indices into the family's points, ascending.
    pub samples: Vec<usize>,
    /// Per sample `rank * width` numbers: component-major jets.
    pub values: Vec<f64>,
}

/// Charts where a family is not identically zero, with the bounding box of
/// the non-zero samples in chart coordinates.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompactSupportTag {
    pub charts: Vec<(usize, Vec<f64>, Vec<f64>)>,
}

impl CompactSupportTag {
    pub fn contains_chart(&self, chart: usize) -> bool {
        self.charts.iter().any(|c| c.0 == chart)
    }
}

/// A family `(f_i)` of jets of order `order` with values in `R^rank`,
/// sampled per chart on a shared point set.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSectionFamily {
    stage: Stage,
    rank: usize,
    order: usize,
    width: usize,
    points: Arc<Vec<ManifoldPoint>>,
    charts: Vec<ChartValues>,
}

impl LocalSectionFamily {
    /// The zero family on `points` at `stage`.
    pub fn zeros(atlas: &AtlasBundle, points: Arc<Vec<ManifoldPoint>>, stage: Stage, order: usize) -> Self {
        let width = IndexSet::new(atlas.dim(), order).len();
        let rank = atlas.rank();
        let charts = (0..atlas.len())
            .map(|i| {
                let samples: Vec<usize> = (0..points.len()).filter(|&k| stage.holds(atlas, i, &points[k])).collect();
                let values = vec![0.0; samples.len() * rank * width];
                ChartValues { samples, values }
            })
            .collect();
        Self {
            stage,
            rank,
            order,
            width,
            points,
            charts,
        }
    }

    /// Fills every slot with `f(chart, sample point, component * width + k)`.
    pub fn from_fn(
        atlas: &AtlasBundle,
        points: Arc<Vec<ManifoldPoint>>,
        stage: Stage,
        order: usize,
        mut f: impl FnMut(usize, &ManifoldPoint, usize) -> f64,
    ) -> Self {
        let mut fam = Self::zeros(atlas, points, stage, order);
        let block = fam.rank * fam.width;
        for (i, c) in fam.charts.iter_mut().enumerate() {
            for (s, &k) in c.samples.iter().enumerate() {
                for slot in 0..block {
                    c.values[s * block + slot] = f(i, &fam.points[k], slot);
                }
            }
        }
        fam
    }

    /// Samples a section given by local representatives on the chart
    /// domains. Jets come from each chart's representative; order-0 values
    /// are transported from the home chart of each point, so the family is
    /// compatible up to the transport itself.
    pub fn from_source(
        atlas: &AtlasBundle,
        points: Arc<Vec<ManifoldPoint>>,
        source: &dyn SectionSource,
        order: usize,
    ) -> Result<Self> {
        if source.rank() != atlas.rank() {
            return Err(Error::Config(format!(
                "section rank {} differs from bundle rank {}",
                source.rank(),
                atlas.rank()
            )));
        }
        let mut fam = Self::zeros(atlas, points, Stage::Domain, order);
        let (d, r, w) = (atlas.dim(), fam.rank, fam.width);
        for i in 0..atlas.len() {
            let coords: Vec<f64> = fam.charts[i]
                .samples
                .iter()
                .flat_map(|&k| fam.points[k].coords_in(i).expect("sample in chart").iter().copied())
                .collect();
            if coords.is_empty() {
                continue;
            }
            for c in 0..r {
                let comp = source.component(i, c);
                if comp.dim() != d {
                    return Err(Error::Config("section component has the wrong dimension".into()));
                }
                let jet = jet_of_function(comp.as_ref(), &coords, order, None)?;
                for s in 0..fam.charts[i].samples.len() {
                    let dst = &mut fam.charts[i].values[s * r * w + c * w..s * r * w + (c + 1) * w];
                    dst.copy_from_slice(jet.values_at(s));
                }
            }
        }
        for k in 0..fam.points.len() {
            let p = fam.points[k].clone();
            let home: Vec<f64> = fam.order0(p.home, k).expect("home chart holds its point");
            for i in p.charts().filter(|&i| i != p.home) {
                let v = atlas.transport(i, p.home, &p, &home)?;
                let s = fam.position(i, k).expect("domain stage holds every chart");
                for c in 0..r {
                    fam.charts[i].values[s * r * w + c * w] = v[c];
                }
            }
        }
        Ok(fam)
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Jet entries per component.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn points(&self) -> &Arc<Vec<ManifoldPoint>> {
        &self.points
    }

    pub fn chart_count(&self) -> usize {
        self.charts.len()
    }

    pub fn chart(&self, i: usize) -> &ChartValues {
        &self.charts[i]
    }

    pub fn chart_mut(&mut self, i: usize) -> &mut ChartValues {
        &mut self.charts[i]
    }

    /// Position of point `k` among the samples of chart `i`.
    pub fn position(&self, i: usize, k: usize) -> Option<usize> {
        self.charts[i].samples.binary_search(&k).ok()
    }

    /// The `rank * width` block of point `k` in chart `i`.
    pub fn block(&self, i: usize, k: usize) -> Option<&[f64]> {
        let b = self.rank * self.width;
        self.position(i, k).map(|s| &self.charts[i].values[s * b..(s + 1) * b])
    }

    /// Order-0 value (all components) of point `k` in chart `i`.
    pub fn order0(&self, i: usize, k: usize) -> Option<Vec<f64>> {
        self.block(i, k)
            .map(|b| (0..self.rank).map(|c| b[c * self.width]).collect())
    }

    pub(crate) fn set_order0(&mut self, i: usize, s: usize, v: &[f64]) {
        let (r, w) = (self.rank, self.width);
        for c in 0..r {
            self.charts[i].values[s * r * w + c * w] = v[c];
        }
    }

    pub(crate) fn with_parts(
        stage: Stage,
        rank: usize,
        order: usize,
        width: usize,
        points: Arc<Vec<ManifoldPoint>>,
        charts: Vec<ChartValues>,
    ) -> Self {
        Self {
            stage,
            rank,
            order,
            width,
            points,
            charts,
        }
    }

    /// `a * self + b * other` on identical sampling.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        let same = self.stage == other.stage
            && self.rank == other.rank
            && self.order == other.order
            && self.points == other.points
            && self.charts.len() == other.charts.len()
            && self.charts.iter().zip(&other.charts).all(|(x, y)| x.samples == y.samples);
        if !same {
            return Err(Error::Indexing("families are sampled differently".into()));
        }
        let mut out = self.clone();
        for (c, o) in out.charts.iter_mut().zip(&other.charts) {
            for (v, w) in c.values.iter_mut().zip(&o.values) {
                *v = a * *v + b * w;
            }
        }
        Ok(out)
    }

    /// Largest absolute entry over all charts.
    pub fn sup_norm(&self) -> f64 {
        self.charts
            .iter()
            .flat_map(|c| c.values.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn support_tag(&self) -> CompactSupportTag {
        let b = self.rank * self.width;
        let mut tag = CompactSupportTag::default();
        for (i, c) in self.charts.iter().enumerate() {
            let mut bounds: Option<(Vec<f64>, Vec<f64>)> = None;
            for (s, &k) in c.samples.iter().enumerate() {
                if c.values[s * b..(s + 1) * b].iter().all(|v| *v == 0.0) {
                    continue;
                }
                let u = self.points[k].coords_in(i).expect("sample in chart");
                let (lo, hi) = bounds.get_or_insert_with(|| (u.to_vec(), u.to_vec()));
                for (t, x) in u.iter().enumerate() {
                    lo[t] = lo[t].min(*x);
                    hi[t] = hi[t].max(*x);
                }
            }
            if let Some((lo, hi)) = bounds {
                tag.charts.push((i, lo, hi));
            }
        }
        tag
    }

    /// Largest absolute value in charts absent from `tag`; zero when the tag
    /// covers the support.
    pub fn untagged_mass(&self, tag: &CompactSupportTag) -> f64 {
        self.charts
            .iter()
            .enumerate()
            .filter(|(i, _)| !tag.contains_chart(*i))
            .flat_map(|(_, c)| c.values.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Local representatives of a section: component `c` in chart `i` as a
/// function of chart coordinates.
pub trait SectionSource {
    fn rank(&self) -> usize;
    fn component(&self, chart: usize, c: usize) -> Box<dyn JetSource + '_>;
}

fn point_key(p: &ManifoldPoint) -> (usize, Vec<u64>) {
    (p.home, p.home_coords().iter().map(|v| v.to_bits()).collect())
}

/// Restriction to the samples of a closed subset: keeps, per chart, the jets
/// at the subset's points. Every subset point must be one of the family's
/// points (same home chart and coordinates).
pub fn restrict_section(sec: &LocalSectionFamily, subset_points: &Arc<Vec<ManifoldPoint>>) -> Result<LocalSectionFamily> {
    if sec.stage != Stage::Domain {
        return Err(Error::Config("restriction expects a family on the chart domains".into()));
    }
    let mut index = BTreeMap::new();
    for (k, p) in sec.points.iter().enumerate() {
        index.entry(point_key(p)).or_insert(k);
    }
    let mut source = Vec::with_capacity(subset_points.len());
    for p in subset_points.iter() {
        match index.get(&point_key(p)) {
            Some(&k) => source.push(k),
            None => {
                return Err(Error::Indexing(format!(
                    "subset point {:?} of chart {} is not sampled by the section",
                    p.home_coords(),
                    p.home
                )))
            }
        }
    }
    let b = sec.rank * sec.width;
    let charts = (0..sec.charts.len())
        .map(|i| {
            let mut samples = Vec::new();
            let mut values = Vec::new();
            for (t, &k) in source.iter().enumerate() {
                if let Some(block) = sec.block(i, k) {
                    samples.push(t);
                    values.extend_from_slice(block);
                }
            }
            debug_assert_eq!(values.len(), samples.len() * b);
            ChartValues { samples, values }
        })
        .collect();
    Ok(LocalSectionFamily::with_parts(
        Stage::Subset,
        sec.rank,
        sec.order,
        sec.width,
        subset_points.clone(),
        charts,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairDefect {
    pub chart_a: usize,
    pub chart_b: usize,
    /// `max |f_a - Phi_ab f_b|` over shared samples (order 0).
    pub max_defect: f64,
    /// Point index of the maximum.
    pub worst_point: Option<usize>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompatibilityReport {
    pub tolerance: f64,
    pub pairs: Vec<PairDefect>,
    pub max_defect: f64,
}

impl CompatibilityReport {
    pub fn passed(&self) -> bool {
        self.max_defect <= self.tolerance
    }

    pub fn worst(&self) -> Option<&PairDefect> {
        self.pairs.iter().max_by(|a, b| a.max_defect.total_cmp(&b.max_defect))
    }
}

/// Overlap defects `f_a - Phi_ab f_b` of the order-0 data on every pair of
/// charts sharing a sample. A single chart passes vacuously.
pub fn compatibility_check(family: &LocalSectionFamily, atlas: &AtlasBundle, tolerance: f64) -> Result<CompatibilityReport> {
    let n = family.charts.len();
    let mut pairs: BTreeMap<(usize, usize), PairDefect> = BTreeMap::new();
    for k in 0..family.points.len() {
        let p = &family.points[k];
        let holders: Vec<usize> = (0..n).filter(|&i| family.position(i, k).is_some()).collect();
        for (x, &a) in holders.iter().enumerate() {
            let fa = family.order0(a, k).expect("holder");
            for &b in &holders[x + 1..] {
                let fb = family.order0(b, k).expect("holder");
                let moved = atlas.transport(a, b, p, &fb)?;
                let defect = fa.iter().zip(&moved).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
                let e = pairs.entry((a, b)).or_insert(PairDefect {
                    chart_a: a,
                    chart_b: b,
                    max_defect: 0.0,
                    worst_point: None,
                    samples: 0,
                });
                e.samples += 1;
                if defect > e.max_defect || e.worst_point.is_none() {
                    e.max_defect = e.max_defect.max(defect);
                    e.worst_point = Some(k);
                }
            }
        }
    }
    let pairs: Vec<PairDefect> = pairs.into_values().collect();
    let max_defect = pairs.iter().fold(0.0f64, |m, p| m.max(p.max_defect));
    Ok(CompatibilityReport {
        tolerance,
        pairs,
        max_defect,
    })
}
