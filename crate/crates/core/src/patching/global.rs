//! Closed subsets of a manifold, chartwise extension and the global
//! extension operator `glue . mix . extend . restrict`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use super::atlas::{open_contains, wrap_angle, AtlasBundle, ManifoldPoint};
use super::mixing::{glue, mixing_map, GluedSection};
use super::section::{restrict_section, ChartValues, LocalSectionFamily, SectionSource, Stage};
use crate::extension::{whitney_decompose, Aabb, BumpProfile, BumpSystem, WhitneyDecomposition, WhitneyExtension, DEFAULT_CUBE_BUDGET};
use crate::geometry::{
    check_no_narrow_fjords, check_outward_cusps, CuspCheckConfig, CuspOutcome, FjordCheckConfig, FjordOutcome, SampleKind,
    SampledClosedSet, SetOracle,
};
use crate::jet::functions::TrigSum;
use crate::jet::{whitney_jet_check, JetCheck, JetCheckConfig, JetField, JetSource};
use crate::{Error, Result};

/// `C` intersected with a closed chart box, in chart coordinates.
#[derive(Debug)]
struct ChartPiece {
    inner: Arc<dyn SetOracle>,
    domain: Aabb,
}

impl SetOracle for ChartPiece {
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.domain.contains(x) && self.inner.contains(x)
    }
    fn interior(&self, x: &[f64]) -> bool {
        open_contains(&self.domain, x) && self.inner.interior(x)
    }
}

/// A closed subset `C` of the manifold: a membership oracle per chart (in
/// that chart's coordinates) and samples as manifold points.
#[derive(Debug, Clone)]
pub struct ManifoldSubset {
    label: String,
    oracles: Vec<Arc<dyn SetOracle>>,
    points: Arc<Vec<ManifoldPoint>>,
    kinds: Vec<SampleKind>,
    resolution: f64,
}

impl ManifoldSubset {
    pub fn new(
        label: impl Into<String>,
        atlas: &AtlasBundle,
        oracles: Vec<Arc<dyn SetOracle>>,
        samples: Vec<(ManifoldPoint, SampleKind)>,
        resolution: f64,
    ) -> Result<Self> {
        if oracles.len() != atlas.len() || oracles.iter().any(|o| o.dim() != atlas.dim()) {
            return Err(Error::Config("one oracle of the atlas dimension per chart".into()));
        }
        if !(resolution > 0.0) {
            return Err(Error::Argument(format!("resolution must be positive, got {resolution}")));
        }
        for (p, _) in &samples {
            for (i, u) in &p.coords {
                if !oracles[*i].contains(u) {
                    return Err(Error::Config(format!("sample {u:?} of chart {i} is not in the set")));
                }
            }
        }
        let (points, kinds) = samples.into_iter().unzip();
        Ok(Self {
            label: label.into(),
            oracles,
            points: Arc::new(points),
            kinds,
            resolution,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn points(&self) -> &Arc<Vec<ManifoldPoint>> {
        &self.points
    }

    pub fn kind(&self, k: usize) -> SampleKind {
        self.kinds[k]
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn oracle(&self, chart: usize) -> &Arc<dyn SetOracle> {
        &self.oracles[chart]
    }

    /// `C_i = C` within the closed domain of chart `i`, sampled at the
    /// subset points the chart holds; `None` when it holds none.
    pub fn local_set(&self, atlas: &AtlasBundle, chart: usize) -> Result<Option<SampledClosedSet>> {
        let (mut boundary, mut interior) = (Vec::new(), Vec::new());
        for (p, kind) in self.points.iter().zip(&self.kinds) {
            if let Some(u) = p.coords_in(chart) {
                match kind {
                    SampleKind::Boundary => boundary.extend_from_slice(u),
                    SampleKind::Interior => interior.extend_from_slice(u),
                }
            }
        }
        if boundary.is_empty() && interior.is_empty() {
            return Ok(None);
        }
        let oracle = Arc::new(ChartPiece {
            inner: self.oracles[chart].clone(),
            domain: atlas.chart(chart).domain.clone(),
        });
        SampledClosedSet::new(format!("{}@{chart}", self.label), oracle, boundary, interior, self.resolution).map(Some)
    }
}

/// Closed arc of angles `[start, start + length]` on a circle chart, in the
/// coordinate `u` with angle `u + offset`.
#[derive(Debug, Clone)]
pub struct ArcOracle {
    pub offset: f64,
    pub start: f64,
    pub length: f64,
}

impl ArcOracle {
    fn along(&self, u: f64) -> f64 {
        wrap_angle(u + self.offset - self.start)
    }
}

impl SetOracle for ArcOracle {
    fn dim(&self) -> usize {
        1
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.along(x[0]) <= self.length
    }
    fn interior(&self, x: &[f64]) -> bool {
        let t = self.along(x[0]);
        t > 0.0 && t < self.length
    }
}

/// The arc `[start, start + length]` of the circle atlas, sampled at spacing
/// at most `spacing` with both ends as boundary samples. Each sample is
/// located from the chart whose shrunken box holds it, chart 0 first.
pub fn circle_arc(atlas: &AtlasBundle, start: f64, length: f64, spacing: f64) -> Result<ManifoldSubset> {
    if !(length > 0.0 && length < 2.0 * PI && spacing > 0.0) || atlas.len() != 2 || atlas.dim() != 1 {
        return Err(Error::Config("arc needs the two-chart circle, a length in (0, 2 pi) and a positive spacing".into()));
    }
    let n = (length / spacing).ceil() as usize;
    let mut samples = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let theta = wrap_angle(start + length * k as f64 / n as f64);
        let kind = if k == 0 || k == n { SampleKind::Boundary } else { SampleKind::Interior };
        samples.push((locate_angle(atlas, theta)?, kind));
    }
    let oracles: Vec<Arc<dyn SetOracle>> = vec![
        Arc::new(ArcOracle { offset: 0.0, start, length }),
        Arc::new(ArcOracle { offset: PI, start, length }),
    ];
    ManifoldSubset::new("arc", atlas, oracles, samples, spacing)
}

/// A section of a trivial bundle over [`circle_two_chart`] whose components
/// are trigonometric polynomials in the angle: `(amplitude, frequency,
/// phase)` modes with integer frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleTrigSection {
    pub components: Vec<Vec<(f64, f64, f64)>>,
}

impl SectionSource for CircleTrigSection {
    fn rank(&self) -> usize {
        self.components.len()
    }
    fn component(&self, chart: usize, c: usize) -> Box<dyn JetSource + '_> {
        let offset = if chart == 0 { 0.0 } else { PI };
        let modes = self.components[c]
            .iter()
            .map(|&(a, k, ph)| (a, vec![k], ph + k * offset))
            .collect();
        Box::new(TrigSum::new(1, modes))
    }
}

/// Point of the circle atlas with angle `theta`.
pub fn locate_angle(atlas: &AtlasBundle, theta: f64) -> Result<ManifoldPoint> {
    let t = wrap_angle(theta);
    for (home, u) in [(0, t), (0, t - 2.0 * PI), (1, t - PI)] {
        if atlas.chart(home).in_shrunk(&[u]) {
            return atlas.locate(home, &[u]);
        }
    }
    Err(Error::Indexing(format!("angle {theta} is not covered")))
}

/// Cusp and fjord checks every non-empty `C_i` must pass before extension.
#[derive(Debug, Clone)]
pub struct Preconditions {
    pub cusp: CuspCheckConfig,
    pub fjord: FjordCheckConfig,
    /// Every `stride`-th sample enters the sets `K` of the checks.
    pub stride: usize,
}

#[derive(Debug, Clone)]
pub struct ExtensionSettings {
    /// Jet order `m` the chartwise extensions use.
    pub order: usize,
    pub min_side: f64,
    pub max_side: f64,
    pub budget: usize,
    pub profile: BumpProfile,
    pub jet_check: Option<JetCheckConfig>,
    pub preconditions: Option<Preconditions>,
    /// Overlap tolerance of the gluing step.
    pub glue_tolerance: f64,
    /// When set, each chart extension is multiplied by the weight of the
    /// Whitney cubes with at most this side, confining it near `C_i`.
    pub cutoff_side: Option<f64>,
}

impl ExtensionSettings {
    pub fn new(order: usize, min_side: f64, max_side: f64) -> Self {
        Self {
            order,
            min_side,
            max_side,
            budget: DEFAULT_CUBE_BUDGET,
            profile: BumpProfile::Mollifier,
            jet_check: None,
            preconditions: None,
            glue_tolerance: 1e-8,
            cutoff_side: None,
        }
    }
}

/// The data of one chart's extension: `C_i`, its decomposition and bumps,
/// and one jet per fibre component.
#[derive(Debug)]
pub struct ChartExtension {
    pub chart: usize,
    pub set: SampledClosedSet,
    pub decomposition: WhitneyDecomposition,
    pub bumps: BumpSystem,
    pub jets: Vec<JetField>,
    pub checks: Vec<JetCheck>,
    order: usize,
    cutoff: Option<f64>,
}

impl ChartExtension {
    pub fn operators(&self) -> Result<Vec<WhitneyExtension<'_>>> {
        self.jets
            .iter()
            .map(|j| WhitneyExtension::new_unchecked(j, self.order, &self.decomposition, &self.bumps))
            .collect()
    }

    /// Smooth cutoff: the partition weight of the cubes with side at most
    /// the configured size, and 1 on `C_i` and where no cube reaches. It is
    /// 1 near `C_i` and vanishes far from it.
    pub fn cutoff_at(&self, u: &[f64], scratch: &mut Vec<(usize, f64)>) -> f64 {
        let Some(side) = self.cutoff else { return 1.0 };
        if self.decomposition.oracle().contains(u) {
            return 1.0;
        }
        self.bumps.partition_at(u, scratch);
        if scratch.is_empty() {
            return 1.0;
        }
        scratch
            .iter()
            .filter(|e| self.decomposition.cubes[e.0].side <= side)
            .map(|e| e.1)
            .sum()
    }
}

fn eval_components(
    ext: &ChartExtension,
    ops: &[WhitneyExtension<'_>],
    u: &[f64],
    scratch: &mut Vec<(usize, f64)>,
) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = ops.iter().map(|e| e.eval_into(u, scratch).map(|v| v.0)).collect::<Result<_>>()?;
    if ext.cutoff.is_some() {
        let psi = ext.cutoff_at(u, scratch);
        v.iter_mut().for_each(|x| *x *= psi);
    }
    Ok(v)
}

/// Chartwise extensions; charts whose `C_i` is empty extend by zero.
#[derive(Debug)]
pub struct LocalExtensions {
    rank: usize,
    order: usize,
    charts: Vec<Option<ChartExtension>>,
}

impl LocalExtensions {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn chart(&self, i: usize) -> Option<&ChartExtension> {
        self.charts[i].as_ref()
    }

    pub fn operators(&self) -> Result<Vec<Option<Vec<WhitneyExtension<'_>>>>> {
        self.charts
            .iter()
            .map(|c| c.as_ref().map(|c| c.operators()).transpose())
            .collect()
    }

    /// `Ef_i` at every sample of every chart domain, order 0.
    pub fn evaluate(&self, atlas: &AtlasBundle, points: Arc<Vec<ManifoldPoint>>) -> Result<LocalSectionFamily> {
        let ops = self.operators()?;
        let mut out = LocalSectionFamily::zeros(atlas, points.clone(), Stage::Domain, 0);
        let mut scratch = Vec::new();
        for (i, op) in ops.iter().enumerate() {
            let (Some(op), Some(ext)) = (op, self.chart(i)) else { continue };
            let samples = out.chart(i).samples.clone();
            for (s, k) in samples.into_iter().enumerate() {
                let u = points[k].coords_in(i).expect("sample in chart");
                let v = eval_components(ext, op, u, &mut scratch)?;
                out.set_order0(i, s, &v);
            }
        }
        Ok(out)
    }
}

fn precondition_error(chart: usize, detail: String) -> Error {
    Error::CuspPrecondition { chart, detail }
}

fn run_preconditions(chart: usize, set: &SampledClosedSet, pre: &Preconditions) -> Result<()> {
    let d = set.dim();
    let stride = pre.stride.max(1);
    let k_boundary: Vec<f64> = set
        .boundary_samples()
        .chunks_exact(d)
        .step_by(stride)
        .flatten()
        .copied()
        .collect();
    if let CuspOutcome::Violated(v) = check_outward_cusps(set, &k_boundary, &pre.cusp)? {
        return Err(precondition_error(chart, format!("outward cusp near {:?}", v.z)));
    }
    let all = set.sample_points();
    let k_all: Vec<f64> = all.chunks_exact(d).step_by(stride).flatten().copied().collect();
    if k_all.len() >= 2 * d {
        match check_no_narrow_fjords(set, &all[..d], &k_all, &pre.fjord)? {
            FjordOutcome::Certified(_) => {}
            FjordOutcome::Violated { x, y, length, .. } => {
                return Err(precondition_error(chart, format!("narrow fjord between {x:?} and {y:?} (path {length})")))
            }
            FjordOutcome::Disconnected { a, b } => {
                return Err(precondition_error(chart, format!("{a:?} and {b:?} are not joined inside the set")))
            }
        }
    }
    Ok(())
}

/// The extension map `epsilon`: extends each chart's jets from `C_i` to the
/// closed chart box. `family` is a family on the subset samples.
pub fn local_extend(
    family: &LocalSectionFamily,
    atlas: &AtlasBundle,
    subset: &ManifoldSubset,
    settings: &ExtensionSettings,
) -> Result<LocalExtensions> {
    if family.stage() != Stage::Subset || family.points() != subset.points() {
        return Err(Error::Indexing("family is not sampled on the subset".into()));
    }
    if settings.order > family.order() {
        return Err(Error::Order {
            requested: settings.order,
            available: family.order(),
        });
    }
    let (d, r, w) = (atlas.dim(), family.rank(), family.width());
    let mut charts = Vec::with_capacity(atlas.len());
    for i in 0..atlas.len() {
        let Some(set) = subset.local_set(atlas, i)? else {
            charts.push(None);
            continue;
        };
        if let Some(pre) = &settings.preconditions {
            run_preconditions(i, &set, pre)?;
        }
        let values: &ChartValues = family.chart(i);
        let points: Vec<f64> = values
            .samples
            .iter()
            .flat_map(|&k| family.points()[k].coords_in(i).expect("sample in chart").iter().copied())
            .collect();
        let mut jets = Vec::with_capacity(r);
        let mut checks = Vec::new();
        for c in 0..r {
            let vals: Vec<f64> = values
                .values
                .chunks_exact(r * w)
                .flat_map(|b| b[c * w..(c + 1) * w].iter().copied())
                .collect();
            let jet = JetField::from_flat(family.order(), d, points.clone(), vals)?;
            if let Some(cfg) = &settings.jet_check {
                let check = whitney_jet_check(&jet, settings.order, cfg)?;
                if let crate::jet::JetVerdict::Fail(witness) = &check.verdict {
                    return Err(Error::NotWhitneyJet(Box::new(witness.clone())));
                }
                checks.push(check);
            }
            jets.push(jet);
        }
        let decomposition = whitney_decompose(
            &set,
            &atlas.chart(i).domain,
            settings.min_side,
            settings.max_side,
            settings.budget,
        )?;
        let bumps = BumpSystem::new(&decomposition, settings.profile)?;
        charts.push(Some(ChartExtension {
            chart: i,
            set,
            decomposition,
            bumps,
            jets,
            checks,
            order: settings.order,
            cutoff: settings.cutoff_side,
        }));
    }
    Ok(LocalExtensions {
        rank: r,
        order: settings.order,
        charts,
    })
}

/// Output of the global extension operator.
#[derive(Debug)]
pub struct GlobalExtension {
    pub local: LocalExtensions,
    /// `epsilon(r(f))` on the chart domains.
    pub extended: LocalSectionFamily,
    /// `mu(epsilon(r(f)))` on the shrunken boxes.
    pub mixed: LocalSectionFamily,
    pub glued: GluedSection,
}

impl GlobalExtension {
    /// The glued section as a function of chart coordinates.
    pub fn evaluator<'s>(&'s self, atlas: &'s AtlasBundle) -> Result<SectionEvaluator<'s>> {
        Ok(SectionEvaluator {
            atlas,
            local: &self.local,
            ops: self.local.operators()?,
            rank: self.local.rank,
        })
    }
}

/// `S_i(u) = sum_j chi_j Phi_ij Ef_j(u_j)` at any point of chart `i`.
pub struct SectionEvaluator<'s> {
    atlas: &'s AtlasBundle,
    local: &'s LocalExtensions,
    ops: Vec<Option<Vec<WhitneyExtension<'s>>>>,
    rank: usize,
}

impl core::fmt::Debug for SectionEvaluator<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SectionEvaluator")
            .field("rank", &self.rank)
            .field("extended_charts", &self.ops.iter().filter(|o| o.is_some()).count())
            .finish()
    }
}

impl SectionEvaluator<'_> {
    pub fn eval(&self, chart: usize, u: &[f64]) -> Result<Vec<f64>> {
        let p = self.atlas.locate(chart, u)?;
        self.eval_point(chart, &p)
    }

    pub fn eval_point(&self, chart: usize, p: &ManifoldPoint) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.rank];
        let mut scratch = Vec::new();
        for (j, chi) in self.atlas.pou(p) {
            let (Some(op), Some(ext)) = (&self.ops[j], self.local.chart(j)) else { continue };
            let v = eval_components(ext, op, p.coords_in(j).expect("pou chart holds the point"), &mut scratch)?;
            let moved = self.atlas.transport(chart, j, p, &v)?;
            for (o, m) in out.iter_mut().zip(&moved) {
                *o += chi * m;
            }
        }
        Ok(out)
    }
}

/// The global extension operator `glue . mu . epsilon . r` applied to a
/// section sampled on the subset. The glued family is sampled at the subset
/// points followed by `points`.
pub fn global_extension_operator(
    section: &LocalSectionFamily,
    atlas: &AtlasBundle,
    subset: &ManifoldSubset,
    points: &[ManifoldPoint],
    settings: &ExtensionSettings,
) -> Result<GlobalExtension> {
    let on_subset = match section.stage() {
        Stage::Subset => section.clone(),
        Stage::Domain => restrict_section(section, subset.points())?,
        Stage::Shrunk => return Err(Error::Config("cannot restrict a family on the shrunken boxes".into())),
    };
    let local = local_extend(&on_subset, atlas, subset, settings)?;
    let mut all: Vec<ManifoldPoint> = subset.points().as_ref().clone();
    all.extend_from_slice(points);
    let extended = local.evaluate(atlas, Arc::new(all))?;
    let mixed = mixing_map(&extended, atlas)?;
    let glued = glue(&mixed, atlas, settings.glue_tolerance)?;
    Ok(GlobalExtension {
        local,
        extended,
        mixed,
        glued,
    })
}

/// Largest discrepancies between the chart representatives of a section,
/// `S_i(u)` against `Phi_ij S_j(tau_ij(u))`, and between their central
/// differences with step `step`, over all sampled overlaps.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeamReport {
    pub value_jump: f64,
    pub derivative_jump: f64,
    pub pairs_checked: usize,
}

pub fn seam_jumps(eval: &SectionEvaluator<'_>, points: &[ManifoldPoint], step: f64) -> Result<SeamReport> {
    let atlas = eval.atlas;
    let d = atlas.dim();
    let mut rep = SeamReport::default();
    for p in points {
        let charts: Vec<usize> = p.charts().collect();
        for &i in &charts {
            for &j in charts.iter().filter(|&&j| j != i) {
                let u = p.coords_in(i).expect("chart of the point");
                let si = eval.eval_point(i, p)?;
                let sj = atlas.transport(i, j, p, &eval.eval_point(j, p)?)?;
                let jump = max_diff(&si, &sj);
                let mut djump = 0.0f64;
                for a in 0..d {
                    let mut plus = u.to_vec();
                    let mut minus = u.to_vec();
                    plus[a] += step;
                    minus[a] -= step;
                    let (Ok(qp), Ok(qm)) = (atlas.locate(i, &plus), atlas.locate(i, &minus)) else {
                        continue;
                    };
                    if qp.coords_in(j).is_none() || qm.coords_in(j).is_none() {
                        continue;
                    }
                    let di: Vec<f64> = eval
                        .eval_point(i, &qp)?
                        .iter()
                        .zip(eval.eval_point(i, &qm)?)
                        .map(|(x, y)| (x - y) / (2.0 * step))
                        .collect();
                    let tp = atlas.transport(i, j, &qp, &eval.eval_point(j, &qp)?)?;
                    let tm = atlas.transport(i, j, &qm, &eval.eval_point(j, &qm)?)?;
                    let dj: Vec<f64> = tp.iter().zip(&tm).map(|(x, y)| (x - y) / (2.0 * step)).collect();
                    djump = djump.max(max_diff(&di, &dj));
                }
                rep.value_jump = rep.value_jump.max(jump);
                rep.derivative_jump = rep.derivative_jump.max(djump);
                rep.pairs_checked += 1;
            }
        }
    }
    Ok(rep)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CuspConstants;
    use crate::jet::functions::Polynomial;
    use crate::jet::MultiIndex;
    use crate::patching::{circle_angle, circle_two_chart, model_boxes, Bundle, PouProfile};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[derive(Debug)]
    struct Interval(f64, f64);

    impl SetOracle for Interval {
        fn dim(&self) -> usize {
            1
        }
        fn contains(&self, x: &[f64]) -> bool {
            self.0 <= x[0] && x[0] <= self.1
        }
        fn interior(&self, x: &[f64]) -> bool {
            self.0 < x[0] && x[0] < self.1
        }
    }

    struct Scalar(Polynomial);

    impl SectionSource for Scalar {
        fn rank(&self) -> usize {
            1
        }
        fn component(&self, _: usize, _: usize) -> Box<dyn JetSource + '_> {
            Box::new(self.0.clone())
        }
    }

    fn line() -> AtlasBundle {
        let b = |lo: f64, hi: f64| Aabb::new(vec![lo], vec![hi]).unwrap();
        model_boxes(
            vec![(b(-1.2, 1.2), b(-1.1, 1.1))],
            vec![vec![1.0]],
            vec![vec![0.0]],
            PouProfile::Smooth,
            Bundle::Trivial { rank: 1 },
        )
        .unwrap()
    }

    fn half_interval(atlas: &AtlasBundle, h: f64) -> ManifoldSubset {
        let n = (0.5 / h).round() as usize;
        let samples = (0..=n)
            .map(|k| {
                let kind = if k == 0 || k == n { SampleKind::Boundary } else { SampleKind::Interior };
                (atlas.locate(0, &[k as f64 * h]).unwrap(), kind)
            })
            .collect();
        ManifoldSubset::new("half", atlas, vec![Arc::new(Interval(0.0, 0.5))], samples, h).unwrap()
    }

    fn quarter_arc(atlas: &AtlasBundle) -> ManifoldSubset {
        circle_arc(atlas, 0.3, PI / 2.0, 2e-3).unwrap()
    }

    fn settings(order: usize) -> ExtensionSettings {
        ExtensionSettings::new(order, 2.5e-4, 1.0)
    }

    fn random_section(rng: &mut ChaCha8Rng) -> CircleTrigSection {
        let modes = (0..3)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0..4) as f64, rng.gen_range(-PI..PI)))
            .collect();
        CircleTrigSection { components: vec![modes] }
    }

    fn on_arc(atlas: &AtlasBundle, arc: &ManifoldSubset, src: &dyn SectionSource, order: usize) -> LocalSectionFamily {
        LocalSectionFamily::from_source(atlas, arc.points().clone(), src, order).map(|f| {
            // from_source samples every chart domain; relabel as subset data
            let charts = (0..atlas.len()).map(|i| f.chart(i).clone()).collect();
            LocalSectionFamily::with_parts(Stage::Subset, f.rank(), f.order(), f.width(), f.points().clone(), charts)
        })
        .unwrap()
    }

    #[test]
    fn quadratic_is_reproduced_off_the_interval() {
        let atlas = line();
        let set = half_interval(&atlas, 1.0 / 200.0);
        let sq = Scalar(Polynomial::new(1, vec![(1.0, MultiIndex::new(vec![2]))]));
        let fam = on_arc(&atlas, &set, &sq, 2);
        let mut s = settings(2);
        s.jet_check = Some(JetCheckConfig::geometric(0.02, 2e-4, 5, 0.5).unwrap());
        let local = local_extend(&fam, &atlas, &set, &s).unwrap();
        assert_eq!(local.chart(0).unwrap().checks.len(), 1);
        let ops = local.operators().unwrap();
        let op = &ops[0].as_ref().unwrap()[0];
        for p in set.points().iter() {
            let u = p.home_coords()[0];
            assert_eq!(op.eval(&[u]).unwrap(), u * u);
        }
        for k in 1..=100 {
            let u = 0.5 + 0.005 * k as f64;
            let v = op.eval(&[u]).unwrap();
            assert!((v - u * u).abs() <= 5e-3 * (u * u), "{u}: {v}");
        }
    }

    #[test]
    fn empty_and_zero_inputs_extend_by_zero() {
        let atlas = line();
        let set = half_interval(&atlas, 0.01);
        let zero = LocalSectionFamily::zeros(&atlas, set.points().clone(), Stage::Subset, 1);
        let local = local_extend(&zero, &atlas, &set, &settings(1)).unwrap();
        assert!(local.chart(0).is_some());
        let grid = Arc::new(atlas.grid_points(0.01).unwrap());
        assert_eq!(local.evaluate(&atlas, grid.clone()).unwrap().sup_norm(), 0.0);

        let none = ManifoldSubset::new("empty", &atlas, vec![Arc::new(Interval(0.0, 0.5))], Vec::new(), 0.01).unwrap();
        let empty = LocalSectionFamily::zeros(&atlas, none.points().clone(), Stage::Subset, 1);
        let local = local_extend(&empty, &atlas, &none, &settings(1)).unwrap();
        assert!(local.chart(0).is_none());
        assert_eq!(local.evaluate(&atlas, grid).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn quarter_arc_cosine_round_trip_is_seamless() {
        let atlas = circle_two_chart(0.4, PouProfile::Smooth, 1).unwrap();
        let arc = quarter_arc(&atlas);
        assert!(arc.local_set(&atlas, 1).unwrap().is_some());
        let cos = CircleTrigSection {
            components: vec![vec![(1.0, 1.0, 0.0)]],
        };
        let fam = on_arc(&atlas, &arc, &cos, 3);
        let grid = atlas.grid_points(0.01).unwrap();
        let g = global_extension_operator(&fam, &atlas, &arc, &grid, &settings(3)).unwrap();
        assert!(g.glued.output.passed());
        let back = restrict_section(&g.glued.section, arc.points()).unwrap();
        for i in 0..2 {
            for (s, &k) in back.chart(i).samples.iter().enumerate() {
                assert_eq!(back.chart(i).values[s], fam.order0(i, k).unwrap()[0]);
            }
        }
        // the extension follows cos near the arc
        let eval = g.evaluator(&atlas).unwrap();
        let p = locate_angle(&atlas, 0.3 + PI / 2.0 + 0.01).unwrap();
        let v = eval.eval_point(p.home, &p).unwrap()[0];
        assert!((v - circle_angle(&p).cos()).abs() < 1e-6);
        let seams = seam_jumps(&eval, &grid, 1e-4).unwrap();
        assert!(seams.pairs_checked > 50);
        assert!(seams.value_jump <= 1e-12 && seams.derivative_jump <= 1e-6, "{seams:?}");
    }

    #[test]
    fn the_pipeline_is_linear_and_splits() {
        let atlas = circle_two_chart(0.4, PouProfile::Smooth, 1).unwrap();
        let arc = quarter_arc(&atlas);
        let grid = atlas.grid_points(0.02).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (f, g) = (random_section(&mut rng), random_section(&mut rng));
        let (a, b) = (1.7, -0.4);
        let ff = on_arc(&atlas, &arc, &f, 2);
        let fg = on_arc(&atlas, &arc, &g, 2);
        let s = settings(2);
        let ef = global_extension_operator(&ff, &atlas, &arc, &grid, &s).unwrap();
        let eg = global_extension_operator(&fg, &atlas, &arc, &grid, &s).unwrap();
        let mix = ff.linear_combination(a, &fg, b).unwrap();
        let em = global_extension_operator(&mix, &atlas, &arc, &grid, &s).unwrap();
        let combo = ef.glued.section.linear_combination(a, &eg.glued.section, b).unwrap();
        let scale = a.abs() * ef.glued.section.sup_norm() + b.abs() * eg.glued.section.sup_norm();
        let diff = em.glued.section.linear_combination(1.0, &combo, -1.0).unwrap();
        assert!(diff.sup_norm() <= 1e-9 * scale, "{}", diff.sup_norm());

        // sigma - E(res sigma) vanishes on the arc
        let mut all = arc.points().as_ref().clone();
        all.extend_from_slice(&grid);
        let sigma = LocalSectionFamily::from_source(&atlas, Arc::new(all), &f, 0).unwrap();
        let iota = sigma.linear_combination(1.0, &ef.glued.section, -1.0).unwrap();
        assert_eq!(restrict_section(&iota, arc.points()).unwrap().sup_norm(), 0.0);
        assert!(iota.sup_norm() > 1e-3);
    }

    #[test]
    fn cusp_preconditions_gate_the_extension() {
        let atlas = circle_two_chart(0.4, PouProfile::Smooth, 1).unwrap();
        let arc = quarter_arc(&atlas);
        let fam = on_arc(&atlas, &arc, &CircleTrigSection { components: vec![vec![(1.0, 1.0, 0.0)]] }, 1);
        let pre = |rho: f64| Preconditions {
            cusp: CuspCheckConfig::new(CuspConstants::new(0.25, rho, 1.0).unwrap(), vec![0.2, 0.1, 0.05], 100).unwrap(),
            fjord: FjordCheckConfig::new(1, 0.5, 200).unwrap(),
            stride: 5,
        };
        let mut s = settings(1);
        s.preconditions = Some(pre(0.2));
        local_extend(&fam, &atlas, &arc, &s).unwrap();
        s.preconditions = Some(pre(1.0));
        assert!(matches!(local_extend(&fam, &atlas, &arc, &s), Err(Error::CuspPrecondition { .. })));
    }

    #[test]
    fn cutoffs_confine_the_extension_near_the_subset() {
        let atlas = circle_two_chart(0.4, PouProfile::Smooth, 1).unwrap();
        let arc = quarter_arc(&atlas);
        let one = CircleTrigSection {
            components: vec![vec![(1.0, 0.0, 0.0)]],
        };
        let fam = on_arc(&atlas, &arc, &one, 1);
        let grid = atlas.grid_points(0.01).unwrap();
        let mut s = settings(1);
        s.cutoff_side = Some(0.02);
        let g = global_extension_operator(&fam, &atlas, &arc, &grid, &s).unwrap();
        let back = restrict_section(&g.glued.section, arc.points()).unwrap();
        assert!(back.chart(0).values.iter().all(|v| *v == 1.0));
        let eval = g.evaluator(&atlas).unwrap();
        let at = |theta: f64| {
            let p = locate_angle(&atlas, theta).unwrap();
            eval.eval_point(p.home, &p).unwrap()[0]
        };
        assert!((at(0.3 + PI / 2.0 + 0.005) - 1.0).abs() < 1e-9);
        assert_eq!(at(0.3 + PI / 2.0 + 1.0), 0.0);
        assert_eq!(at(4.5), 0.0);
        let seams = seam_jumps(&eval, &grid, 1e-4).unwrap();
        assert!(seams.derivative_jump <= 1e-6, "{seams:?}");
    }
}
