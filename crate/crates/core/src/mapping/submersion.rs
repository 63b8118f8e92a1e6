//! The restriction map `C^inf(M, N) -> C^inf(C, N)` in canonical charts,
//! checked on grids for `M` the circle.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::addition::LocalAddition;
use super::chart::{chart_backward, chart_forward, MapGridFunction, TangentField};
use crate::jet::{FnSource, JetSource};
use crate::patching::{
    circle_angle, circle_arc, circle_two_chart, global_extension_operator, AtlasBundle, Bundle, ExtensionSettings,
    FrameField, LocalSectionFamily, ManifoldPoint, ManifoldSubset, PouProfile, SectionSource,
};
use crate::{Error, Result};

/// A smooth map from the circle (by angle) into the target of a local
/// addition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircleMap {
    /// `theta -> (cos t cos b, sin t cos b, sin b)` with
    /// `b = tilt * sin(2 theta)`: a wavy equator on the unit 2-sphere.
    WavyEquator { tilt: f64 },
    /// Component `k` is `cos((k + 1) theta + k)` in `R^n`.
    FlatCurve { ambient: usize },
}

impl CircleMap {
    pub fn ambient(&self) -> usize {
        match self {
            CircleMap::WavyEquator { .. } => 3,
            CircleMap::FlatCurve { ambient } => *ambient,
        }
    }

    pub fn eval(&self, theta: f64) -> Vec<f64> {
        match *self {
            CircleMap::WavyEquator { tilt } => {
                let b = tilt * (2.0 * theta).sin();
                vec![theta.cos() * b.cos(), theta.sin() * b.cos(), b.sin()]
            }
            CircleMap::FlatCurve { ambient } => (0..ambient)
                .map(|k| ((k + 1) as f64 * theta + k as f64).cos())
                .collect(),
        }
    }
}

fn chart_offset(chart: usize) -> f64 {
    if chart == 0 {
        0.0
    } else {
        PI
    }
}

fn cross(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// Frames of the pull-back bundle `F^* TN` over the two-chart circle. On the
/// sphere chart `i` uses the tangent projection of its own reference vector,
/// so the transitions are rotations; in flat space the frame is the identity.
#[derive(Debug, Clone)]
pub struct PullbackFrames {
    pub map: CircleMap,
    pub addition: LocalAddition,
    pub references: [[f64; 3]; 2],
}

impl PullbackFrames {
    pub fn new(map: CircleMap, addition: LocalAddition) -> Result<Self> {
        if map.ambient() != addition.ambient() || (addition.is_sphere() && addition.ambient() != 3) {
            return Err(Error::Config("map and local addition need the same ambient space (R^3 for spheres)".into()));
        }
        Ok(Self {
            map,
            addition,
            references: [[0.0, 0.0, 1.0], [0.3, 0.2, 1.0]],
        })
    }

    pub fn rank(&self) -> usize {
        if self.addition.is_sphere() {
            2
        } else {
            self.addition.ambient()
        }
    }
}

impl FrameField for PullbackFrames {
    fn ambient(&self) -> usize {
        self.addition.ambient()
    }

    fn frame(&self, chart: usize, u: &[f64], e: &mut [f64], l: &mut [f64]) {
        let n = self.ambient();
        if !self.addition.is_sphere() {
            e.fill(0.0);
            l.fill(0.0);
            for k in 0..n {
                e[k * n + k] = 1.0;
                l[k * n + k] = 1.0;
            }
            return;
        }
        let q = self.map.eval(u[0] + chart_offset(chart));
        let t = self.addition.project(&q, &self.references[chart]);
        let len = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        let e1: Vec<f64> = t.iter().map(|x| x / len).collect();
        let e2 = cross(&q, &e1);
        for k in 0..3 {
            e[k * 2] = e1[k];
            e[k * 2 + 1] = e2[k];
            l[k] = e1[k];
            l[3 + k] = e2[k];
        }
    }
}

/// `w(theta) = sum_k a_k cos(k theta) + b_k sin(k theta)` in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigVectorField {
    pub cos: Vec<Vec<f64>>,
    pub sin: Vec<Vec<f64>>,
}

impl TrigVectorField {
    pub fn random(rng: &mut ChaCha8Rng, ambient: usize, modes: usize) -> Self {
        let mut draw = || (0..ambient).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
        let cos = (0..modes).map(|_| draw()).collect();
        let sin = (0..modes).map(|_| draw()).collect();
        Self { cos, sin }
    }

    pub fn zero(ambient: usize) -> Self {
        Self {
            cos: vec![vec![0.0; ambient]],
            sin: vec![vec![0.0; ambient]],
        }
    }

    pub fn eval(&self, theta: f64) -> Vec<f64> {
        let n = self.cos.first().map_or(0, |c| c.len());
        let mut out = vec![0.0; n];
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let (s, c) = (k as f64 * theta).sin_cos();
            for i in 0..n {
                out[i] += a[i] * c + b[i] * s;
            }
        }
        out
    }
}

/// A tangent field along `F`: `sigma(theta) = scale * P_{F(theta)} w(theta)`.
#[derive(Debug, Clone)]
pub struct TangentAlongMap {
    pub frames: Arc<PullbackFrames>,
    pub field: TrigVectorField,
    pub scale: f64,
}

impl TangentAlongMap {
    /// Scales `field` so that the sampled sup norm of `sigma` is `amplitude`.
    pub fn normalized(frames: Arc<PullbackFrames>, field: TrigVectorField, amplitude: f64) -> Self {
        let mut s = Self {
            frames,
            field,
            scale: 1.0,
        };
        let sup = (0..2048)
            .map(|k| {
                let v = s.eval(2.0 * PI * k as f64 / 2048.0);
                v.iter().map(|x| x * x).sum::<f64>().sqrt()
            })
            .fold(0.0f64, f64::max);
        s.scale = if sup > 0.0 { amplitude / sup } else { 0.0 };
        s
    }

    pub fn eval(&self, theta: f64) -> Vec<f64> {
        let q = self.frames.map.eval(theta);
        self.frames
            .addition
            .project(&q, &self.field.eval(theta))
            .into_iter()
            .map(|x| self.scale * x)
            .collect()
    }
}

impl SectionSource for TangentAlongMap {
    fn rank(&self) -> usize {
        self.frames.rank()
    }

    fn component(&self, chart: usize, c: usize) -> Box<dyn JetSource + '_> {
        let (n, r) = (self.frames.ambient(), self.frames.rank());
        Box::new(FnSource::new(1, move |u: &[f64]| {
            let (mut e, mut l) = (vec![0.0; n * r], vec![0.0; r * n]);
            self.frames.frame(chart, u, &mut e, &mut l);
            let v = self.eval(u[0] + chart_offset(chart));
            (0..n).map(|k| l[c * n + k] * v[k]).sum()
        }))
    }
}

#[derive(Debug, Clone)]
pub struct SubmersionConfig {
    pub map: CircleMap,
    pub addition: LocalAddition,
    /// Closed arc `C = [start, start + length]` of angles.
    pub arc_start: f64,
    pub arc_length: f64,
    /// Grid spacing on `M` and on `C`.
    pub grid_spacing: f64,
    /// Half-width of the circle chart overlaps.
    pub overlap: f64,
    pub trials: usize,
    /// Sup norm of the random tangent fields.
    pub amplitude: f64,
    pub modes: usize,
    /// Jet order of the chartwise extensions.
    pub order: usize,
    /// Cube side below which the extension is kept (see
    /// [`ExtensionSettings::cutoff_side`]).
    pub cutoff_side: f64,
    pub seed: u64,
}

impl SubmersionConfig {
    pub fn sphere(seed: u64) -> Self {
        Self {
            map: CircleMap::WavyEquator { tilt: 0.3 },
            addition: LocalAddition::SphereExp { ambient: 3 },
            arc_start: 0.3,
            arc_length: 2.0,
            grid_spacing: 1e-2,
            overlap: 0.4,
            trials: 50,
            amplitude: 0.1,
            modes: 3,
            order: 2,
            cutoff_side: 0.05,
            seed,
        }
    }
}

/// The fixed data of a check: atlas, arc, grid and the sampled map `F`.
#[derive(Debug)]
pub struct SubmersionSetup {
    pub config: SubmersionConfig,
    pub frames: Arc<PullbackFrames>,
    pub atlas: AtlasBundle,
    pub arc: ManifoldSubset,
    pub grid: Vec<ManifoldPoint>,
    /// `F` on the arc samples followed by the grid.
    pub map: MapGridFunction,
    settings: ExtensionSettings,
}

/// Defects of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialDefects {
    /// `max |phi_f(res_C phi_F^{-1}(sigma)) - res_C sigma|` on `C`.
    pub diagram: f64,
    /// `max |res_C phi_F^{-1}(E tau) - phi_f^{-1}(tau)|` on `C`, with
    /// `tau = res_C sigma`.
    pub right_inverse: f64,
    /// Sup norm of the extended field `E tau` on the grid.
    pub extension_sup: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmersionReport {
    pub trials: usize,
    pub grid_spacing: f64,
    pub arc_nodes: usize,
    pub grid_nodes: usize,
    pub diagram_defect_max: f64,
    pub right_inverse_defect_max: f64,
    /// Largest of both defects over all trials.
    pub defect_max: f64,
    /// Mean over trials of the larger defect per trial.
    pub defect_mean: f64,
    pub seed: u64,
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

impl SubmersionSetup {
    pub fn new(config: SubmersionConfig) -> Result<Self> {
        if !(config.grid_spacing > 0.0 && config.amplitude >= 0.0) {
            return Err(Error::Config("grid spacing must be positive and amplitude non-negative".into()));
        }
        let frames = Arc::new(PullbackFrames::new(config.map, config.addition)?);
        let atlas = circle_two_chart(config.overlap, PouProfile::Smooth, frames.rank())?.with_bundle(Bundle::Frames {
            rank: frames.rank(),
            field: frames.clone(),
        })?;
        let arc = circle_arc(&atlas, config.arc_start, config.arc_length, config.grid_spacing)?;
        let grid = atlas.grid_points(config.grid_spacing)?;
        let angles: Vec<f64> = arc.points().iter().chain(&grid).map(circle_angle).collect();
        let map = MapGridFunction::from_fn(1, config.addition, angles, |t| config.map.eval(t[0]))?;
        let mut settings = ExtensionSettings::new(config.order, config.grid_spacing / 8.0, 1.0);
        settings.glue_tolerance = 1e-9;
        settings.cutoff_side = Some(config.cutoff_side);
        Ok(Self {
            config,
            frames,
            atlas,
            arc,
            grid,
            map,
            settings,
        })
    }

    fn arc_len(&self) -> usize {
        self.arc.points().len()
    }

    /// Runs both checks for the tangent field `sigma` along `F`.
    pub fn trial(&self, sigma: &TangentAlongMap) -> Result<TrialDefects> {
        let n = self.frames.ambient();
        let c = self.arc_len();
        let on_c: Vec<usize> = (0..c).collect();
        let f = self.map.select(&on_c);

        let sigma_all: TangentField = (0..self.map.len()).flat_map(|k| sigma.eval(self.map.node(k)[0])).collect();
        let g = chart_backward(&self.map, &sigma_all)?;
        let lhs = chart_forward(&f, &g.select(&on_c))?;
        let diagram = max_diff(&lhs, &sigma_all[..c * n]);

        let family = LocalSectionFamily::from_source(&self.atlas, self.arc.points().clone(), sigma, self.config.order)?;
        let ext = global_extension_operator(&family, &self.atlas, &self.arc, &self.grid, &self.settings)?;
        let glued = &ext.glued.section;
        let r = self.frames.rank();
        let mut extended: TangentField = Vec::with_capacity(self.map.len() * n);
        for (k, p) in glued.points().iter().enumerate() {
            let comps = glued.order0(p.home, k).expect("home chart holds the point");
            let (mut e, mut l) = (vec![0.0; n * r], vec![0.0; r * n]);
            self.frames.frame(p.home, p.home_coords(), &mut e, &mut l);
            extended.extend((0..n).map(|i| (0..r).map(|j| e[i * r + j] * comps[j]).sum::<f64>()));
        }
        let extension_sup = extended.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let big_g = chart_backward(&self.map, &extended)?;
        let target = chart_backward(&f, &sigma_all[..c * n])?;
        let right_inverse = max_diff(big_g.select(&on_c).values(), target.values());
        Ok(TrialDefects {
            diagram,
            right_inverse,
            extension_sup,
        })
    }
}

/// The grid shadow of the submersion diagram: for `trials` random tangent
/// fields `sigma` along `F` with sup norm `amplitude`, checks that the chart
/// at `f = F|_C` of the restricted map is the restricted field, and that the
/// extension operator of the pull-back bundle gives a right inverse of the
/// restriction in charts.
pub fn submersion_chart_check(config: &SubmersionConfig) -> Result<SubmersionReport> {
    let setup = SubmersionSetup::new(config.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (mut dmax, mut rmax, mut sum) = (0.0f64, 0.0f64, 0.0);
    for _ in 0..config.trials {
        let field = TrigVectorField::random(&mut rng, setup.frames.ambient(), config.modes.max(1));
        let sigma = TangentAlongMap::normalized(setup.frames.clone(), field, config.amplitude);
        let t = setup.trial(&sigma)?;
        dmax = dmax.max(t.diagram);
        rmax = rmax.max(t.right_inverse);
        sum += t.diagram.max(t.right_inverse);
    }
    Ok(SubmersionReport {
        trials: config.trials,
        grid_spacing: config.grid_spacing,
        arc_nodes: setup.arc_len(),
        grid_nodes: setup.grid.len(),
        diagram_defect_max: dmax,
        right_inverse_defect_max: rmax,
        defect_max: dmax.max(rmax),
        defect_mean: if config.trials > 0 { sum / config.trials as f64 } else { 0.0 },
        seed: config.seed,
    })
}
