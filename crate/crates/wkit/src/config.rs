//! Experiment configuration files.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use wkit_core::extension::BumpProfile;
use wkit_core::jet::functions::{ExpCuspFunction, Polynomial, SinCos, TrigSum};
use wkit_core::jet::{JetCheckConfig, JetSource, MultiIndex};
use wkit_core::mapping::{CircleMap, LocalAddition, SubmersionConfig};

use crate::error::{Result, WkitError};
use crate::formats::atlas::PouJson;
use crate::formats::domain::{DomainSpec, Generator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GenDomain,
    CheckCusp,
    CheckFjords,
    Extend,
    Roundtrip,
    Patch,
    Submersion,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GenDomain => "gen-domain",
            ExperimentKind::CheckCusp => "check-cusp",
            ExperimentKind::CheckFjords => "check-fjords",
            ExperimentKind::Extend => "extend",
            ExperimentKind::Roundtrip => "roundtrip",
            ExperimentKind::Patch => "patch",
            ExperimentKind::Submersion => "submersion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub alpha: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub amp: f64,
    pub freq: Vec<f64>,
    #[serde(default)]
    pub phase: f64,
}

/// The function whose jet is sampled on the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FunctionSpec {
    Zero,
    /// `sin(x_1) cos(x_2)` (two dimensions).
    SinCos,
    /// The fjord function: the wall height above the fjord, zero elsewhere.
    ExpCusp,
    Polynomial { terms: Vec<Term> },
    /// Coefficients uniform in `[-1, 1]` from the seeded generator.
    RandomPolynomial { degree: usize },
    /// `sum amp * cos(freq . x + phase)`.
    Trig { modes: Vec<Mode> },
}

impl FunctionSpec {
    /// The jet source on `R^dim`; `seed` feeds random coefficients.
    pub fn source(&self, dim: usize, seed: u64) -> Result<Box<dyn JetSource>> {
        Ok(match self {
            FunctionSpec::Zero => Box::new(Polynomial::zero(dim)),
            FunctionSpec::SinCos | FunctionSpec::ExpCusp if dim != 2 => {
                return Err(WkitError::Config(format!("{self:?} needs a two-dimensional domain")))
            }
            FunctionSpec::SinCos => Box::new(SinCos),
            FunctionSpec::ExpCusp => Box::new(ExpCuspFunction),
            FunctionSpec::Polynomial { terms } => {
                if let Some(t) = terms.iter().find(|t| t.alpha.len() != dim) {
                    return Err(WkitError::Config(format!("term {:?} does not have {dim} exponents", t.alpha)));
                }
                Box::new(Polynomial::new(
                    dim,
                    terms.iter().map(|t| (t.coef, MultiIndex::new(t.alpha.clone()))).collect(),
                ))
            }
            FunctionSpec::RandomPolynomial { degree } => Box::new(crate::run::random_polynomial(dim, *degree, seed)),
            FunctionSpec::Trig { modes } => {
                if let Some(m) = modes.iter().find(|m| m.freq.len() != dim) {
                    return Err(WkitError::Config(format!("mode frequency {:?} does not have {dim} entries", m.freq)));
                }
                Box::new(TrigSum::new(
                    dim,
                    modes.iter().map(|m| (m.amp, m.freq.clone(), m.phase)).collect(),
                ))
            }
        })
    }

    /// Degree when the function is a polynomial.
    pub fn degree(&self) -> Option<usize> {
        match self {
            FunctionSpec::Zero => Some(0),
            FunctionSpec::Polynomial { terms } => {
                Some(terms.iter().map(|t| t.alpha.iter().sum::<u32>() as usize).max().unwrap_or(0))
            }
            FunctionSpec::RandomPolynomial { degree } => Some(*degree),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Whitney-jet test threshold on `q_m` at the smallest grid value.
    pub jet: f64,
    /// Relative error for reproducing polynomials off the set.
    pub relative: f64,
    /// Restriction identity `res_C E f = f` at the samples.
    pub restriction: f64,
    /// Overlap compatibility for gluing.
    pub glue: f64,
    /// Value and derivative jumps across chart seams.
    pub seam: f64,
    /// Submersion diagram and right-inverse defects.
    pub diagram: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            jet: 0.5,
            relative: 5e-3,
            restriction: 1e-12,
            glue: 1e-8,
            seam: 1e-6,
            diagram: 1e-6,
        }
    }
}

/// t grid of the Whitney-jet test, in units of the domain resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JetCheckSpec {
    pub t_max: f64,
    pub t_min: f64,
    pub count: usize,
}

impl Default for JetCheckSpec {
    fn default() -> Self {
        JetCheckSpec {
            t_max: 4.0,
            t_min: 0.04,
            count: 5,
        }
    }
}

impl JetCheckSpec {
    pub fn build(&self, resolution: f64, tol: f64) -> Result<JetCheckConfig> {
        Ok(JetCheckConfig::geometric(self.t_max * resolution, self.t_min * resolution, self.count, tol)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProfileSpec {
    #[default]
    Mollifier,
    Polynomial { k: u32 },
}

impl From<ProfileSpec> for BumpProfile {
    fn from(p: ProfileSpec) -> Self {
        match p {
            ProfileSpec::Mollifier => BumpProfile::Mollifier,
            ProfileSpec::Polynomial { k } => BumpProfile::Polynomial { k },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecompositionSpec {
    /// Margin of the bounding box around the samples.
    pub margin: f64,
    /// Smallest cube side, in units of the resolution.
    pub min_side: f64,
    pub max_side: f64,
    pub budget: usize,
    pub profile: ProfileSpec,
}

impl Default for DecompositionSpec {
    fn default() -> Self {
        DecompositionSpec {
            margin: 0.5,
            min_side: 0.125,
            max_side: 0.5,
            budget: wkit_core::extension::DEFAULT_CUBE_BUDGET,
            profile: ProfileSpec::Mollifier,
        }
    }
}

/// Probe grid: `per_axis^d` nodes in the bounding box, kept within `reach`
/// of the set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSpec {
    pub per_axis: usize,
    pub reach: f64,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            per_axis: 40,
            reach: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CuspSpec {
    pub epsilon0: f64,
    pub rho: f64,
    pub r: f64,
    pub eps_grid: Vec<f64>,
    pub probe_count: usize,
    /// Every `stride`-th boundary sample within `radius` of `center` is tested.
    pub stride: usize,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
}

impl Default for CuspSpec {
    fn default() -> Self {
        CuspSpec {
            epsilon0: 0.25,
            rho: 0.2,
            r: 1.0,
            eps_grid: vec![0.2, 0.1, 0.05],
            probe_count: 100,
            stride: 5,
            center: None,
            radius: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FjordSpec {
    pub p: u32,
    pub constant: f64,
    pub pairs: usize,
    /// Base point; defaults to the middle interior sample.
    pub base: Option<Vec<f64>>,
    /// Radius of the tested neighbourhood `K` about the base.
    pub radius: Option<f64>,
    /// Radius of the interior graph about the base.
    pub graph_radius: Option<f64>,
    pub stride: usize,
}

impl Default for FjordSpec {
    fn default() -> Self {
        FjordSpec {
            p: 1,
            constant: 0.1,
            pairs: 120,
            base: None,
            radius: None,
            graph_radius: None,
            stride: 3,
        }
    }
}

/// Round trip on the two-chart circle with a closed arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatchSpec {
    pub overlap: f64,
    pub pou: PouJson,
    pub rank: usize,
    pub arc_start: f64,
    pub arc_length: f64,
    pub arc_spacing: f64,
    pub grid_spacing: f64,
    pub trials: usize,
    pub modes: usize,
    pub max_frequency: u32,
    pub min_side: f64,
    pub max_side: f64,
    pub seam_step: f64,
    /// Cube side below which the chart extensions are kept.
    pub cutoff_side: Option<f64>,
}

impl Default for PatchSpec {
    fn default() -> Self {
        PatchSpec {
            overlap: 0.4,
            pou: PouJson::Smooth,
            rank: 1,
            arc_start: 0.3,
            arc_length: PI / 2.0,
            arc_spacing: 2e-3,
            grid_spacing: 1e-2,
            trials: 20,
            modes: 3,
            max_frequency: 3,
            min_side: 2.5e-4,
            max_side: 1.0,
            seam_step: 1e-4,
            cutoff_side: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MapSpec {
    WavyEquator { tilt: f64 },
    FlatCurve { ambient: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdditionSpec {
    Flat,
    SphereExp,
    SphereProjection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubmersionSpec {
    pub map: MapSpec,
    pub addition: AdditionSpec,
    pub arc_start: f64,
    pub arc_length: f64,
    pub grid_spacing: f64,
    pub overlap: f64,
    pub trials: usize,
    pub amplitude: f64,
    pub modes: usize,
    pub order: usize,
    pub cutoff_side: f64,
}

impl Default for SubmersionSpec {
    fn default() -> Self {
        let c = SubmersionConfig::sphere(0);
        let CircleMap::WavyEquator { tilt } = c.map else { unreachable!() };
        SubmersionSpec {
            map: MapSpec::WavyEquator { tilt },
            addition: AdditionSpec::SphereExp,
            arc_start: c.arc_start,
            arc_length: c.arc_length,
            grid_spacing: c.grid_spacing,
            overlap: c.overlap,
            trials: c.trials,
            amplitude: c.amplitude,
            modes: c.modes,
            order: c.order,
            cutoff_side: c.cutoff_side,
        }
    }
}

impl SubmersionSpec {
    pub fn build(&self, seed: u64) -> Result<SubmersionConfig> {
        let map = match self.map {
            MapSpec::WavyEquator { tilt } => CircleMap::WavyEquator { tilt },
            MapSpec::FlatCurve { ambient } => CircleMap::FlatCurve { ambient },
        };
        let ambient = map.ambient();
        let addition = match self.addition {
            AdditionSpec::Flat => LocalAddition::Flat { ambient },
            AdditionSpec::SphereExp => LocalAddition::SphereExp { ambient },
            AdditionSpec::SphereProjection => LocalAddition::SphereProjection { ambient },
        };
        if addition.is_sphere() && !matches!(map, CircleMap::WavyEquator { .. }) {
            return Err(WkitError::Config("sphere additions need a map into the sphere".into()));
        }
        Ok(SubmersionConfig {
            map,
            addition,
            arc_start: self.arc_start,
            arc_length: self.arc_length,
            grid_spacing: self.grid_spacing,
            overlap: self.overlap,
            trials: self.trials,
            amplitude: self.amplitude,
            modes: self.modes,
            order: self.order,
            cutoff_side: self.cutoff_side,
            seed,
        })
    }
}

/// One experiment. Every section has defaults; `kind`, when present, must
/// match the subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    pub domain: Option<DomainSpec>,
    /// Jet order `m`.
    pub order: usize,
    /// Defaults to the fjord function on the exp-cusp domains and to
    /// `sin(x_1) cos(x_2)` elsewhere.
    pub function: Option<FunctionSpec>,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub jet_check: JetCheckSpec,
    pub decomposition: DecompositionSpec,
    pub probes: ProbeSpec,
    pub cusp: CuspSpec,
    pub fjord: FjordSpec,
    pub patch: PatchSpec,
    pub submersion: SubmersionSpec,
    /// Output directory; `--out` takes precedence.
    pub out: Option<std::path::PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            kind: None,
            domain: None,
            order: 3,
            function: None,
            seed: 0,
            tolerances: Tolerances::default(),
            jet_check: JetCheckSpec::default(),
            decomposition: DecompositionSpec::default(),
            probes: ProbeSpec::default(),
            cusp: CuspSpec::default(),
            fjord: FjordSpec::default(),
            patch: PatchSpec::default(),
            submersion: SubmersionSpec::default(),
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| WkitError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        let all = [t.jet, t.relative, t.restriction, t.glue, t.seam, t.diagram];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(WkitError::Config("all tolerances must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<&DomainSpec> {
        self.domain
            .as_ref()
            .ok_or_else(|| WkitError::Config("this experiment needs a \"domain\" section".into()))
    }

    pub fn function(&self) -> Result<FunctionSpec> {
        if let Some(f) = &self.function {
            return Ok(f.clone());
        }
        Ok(match self.domain()?.generator {
            Generator::ExpCuspDomain { .. } | Generator::ExpCuspEpigraph { .. } => FunctionSpec::ExpCusp,
            _ => FunctionSpec::SinCos,
        })
    }
}
