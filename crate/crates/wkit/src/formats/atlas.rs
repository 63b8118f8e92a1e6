//! Atlas files: charts as boxes with affine transition pieces, a partition
//! of unity profile and a bundle.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use wkit_core::extension::Aabb;
use wkit_core::patching::{AffinePiece, AtlasBundle, Bundle, Chart, Gauge, PouProfile};

use crate::error::{Result, WkitError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxJson {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl From<&Aabb> for BoxJson {
    fn from(b: &Aabb) -> Self {
        BoxJson {
            lo: b.lo.clone(),
            hi: b.hi.clone(),
        }
    }
}

impl BoxJson {
    fn to_aabb(&self) -> Result<Aabb> {
        Ok(Aabb::new(self.lo.clone(), self.hi.clone())?)
    }
}

/// `v = matrix * u + offset` for `u` in `domain` (row-major matrix).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineJson {
    pub domain: BoxJson,
    pub matrix: Vec<f64>,
    pub offset: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartJson {
    #[serde(rename = "box")]
    pub domain: BoxJson,
    pub shrunk: BoxJson,
    /// Transition pieces to other charts, keyed by chart index.
    #[serde(default)]
    pub transition_to: BTreeMap<usize, Vec<AffineJson>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PouJson {
    #[default]
    Smooth,
    Hat,
}

impl From<PouJson> for PouProfile {
    fn from(p: PouJson) -> Self {
        match p {
            PouJson::Smooth => PouProfile::Smooth,
            PouJson::Hat => PouProfile::Hat,
        }
    }
}

impl From<PouProfile> for PouJson {
    fn from(p: PouProfile) -> Self {
        match p {
            PouProfile::Smooth => PouJson::Smooth,
            PouProfile::Hat => PouJson::Hat,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GaugeJson {
    Identity,
    Scalar { slope: Vec<f64>, intercept: f64 },
    Rotation { slope: Vec<f64>, intercept: f64 },
}

/// Bundle transitions: `trivial`, per-chart `gauges`, or `frames` (computed
/// frames, written for information and not readable back).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleJson {
    pub rank: usize,
    pub transitions: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gauges: Vec<GaugeJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtlasJson {
    pub charts: Vec<ChartJson>,
    pub pou: PouJson,
    pub bundle: BundleJson,
}

impl From<&AtlasBundle> for AtlasJson {
    fn from(atlas: &AtlasBundle) -> Self {
        let mut charts: Vec<ChartJson> = atlas
            .charts()
            .iter()
            .map(|c| ChartJson {
                domain: (&c.domain).into(),
                shrunk: (&c.shrunk).into(),
                transition_to: BTreeMap::new(),
            })
            .collect();
        for (&(i, j), pieces) in atlas.transitions() {
            charts[i].transition_to.insert(
                j,
                pieces
                    .iter()
                    .map(|p| AffineJson {
                        domain: (&p.domain).into(),
                        matrix: p.matrix.clone(),
                        offset: p.offset.clone(),
                    })
                    .collect(),
            );
        }
        let bundle = match atlas.bundle() {
            Bundle::Trivial { rank } => BundleJson {
                rank: *rank,
                transitions: "trivial".into(),
                gauges: Vec::new(),
            },
            Bundle::Gauged { rank, gauges } => BundleJson {
                rank: *rank,
                transitions: "gauges".into(),
                gauges: gauges
                    .iter()
                    .map(|g| match g {
                        Gauge::Identity => GaugeJson::Identity,
                        Gauge::Scalar { slope, intercept } => GaugeJson::Scalar {
                            slope: slope.clone(),
                            intercept: *intercept,
                        },
                        Gauge::Rotation { slope, intercept } => GaugeJson::Rotation {
                            slope: slope.clone(),
                            intercept: *intercept,
                        },
                    })
                    .collect(),
            },
            Bundle::Frames { rank, .. } => BundleJson {
                rank: *rank,
                transitions: "frames".into(),
                gauges: Vec::new(),
            },
        };
        AtlasJson {
            charts,
            pou: atlas.charts().first().map_or(PouJson::Smooth, |c| c.pou.into()),
            bundle,
        }
    }
}

impl AtlasJson {
    pub fn build(&self) -> Result<AtlasBundle> {
        let pou: PouProfile = self.pou.into();
        let mut charts = Vec::with_capacity(self.charts.len());
        let mut transitions = BTreeMap::new();
        for (i, c) in self.charts.iter().enumerate() {
            charts.push(Chart::new(c.domain.to_aabb()?, c.shrunk.to_aabb()?, pou)?);
            for (&j, pieces) in &c.transition_to {
                let pieces = pieces
                    .iter()
                    .map(|p| {
                        Ok(AffinePiece {
                            domain: p.domain.to_aabb()?,
                            matrix: p.matrix.clone(),
                            offset: p.offset.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                transitions.insert((i, j), pieces);
            }
        }
        let rank = self.bundle.rank;
        let bundle = match self.bundle.transitions.as_str() {
            "trivial" => Bundle::Trivial { rank },
            "gauges" => Bundle::Gauged {
                rank,
                gauges: self
                    .bundle
                    .gauges
                    .iter()
                    .map(|g| match g {
                        GaugeJson::Identity => Gauge::Identity,
                        GaugeJson::Scalar { slope, intercept } => Gauge::Scalar {
                            slope: slope.clone(),
                            intercept: *intercept,
                        },
                        GaugeJson::Rotation { slope, intercept } => Gauge::Rotation {
                            slope: slope.clone(),
                            intercept: *intercept,
                        },
                    })
                    .collect(),
            },
            other => {
                return Err(WkitError::Config(format!(
                    "bundle transitions {other:?} cannot be read; use \"trivial\" or \"gauges\""
                )))
            }
        };
        Ok(AtlasBundle::new(charts, transitions, bundle)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use wkit_core::patching::circle_two_chart;

    #[test]
    fn circle_dump_rebuilds_the_same_atlas() {
        let atlas = circle_two_chart(0.4, PouProfile::Smooth, 2).unwrap();
        let json = AtlasJson::from(&atlas);
        assert_eq!(json.charts.len(), 2);
        assert_eq!(json.charts[0].transition_to[&1].len(), 2);
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.contains("\"box\""));
        let back: AtlasJson = serde_json::from_str(&text).unwrap();
        let rebuilt = back.build().unwrap();
        assert_eq!(rebuilt.transitions(), atlas.transitions());
        assert_eq!(rebuilt.charts(), atlas.charts());
        assert_eq!(rebuilt.rank(), 2);
    }

    #[test]
    fn gauged_bundles_round_trip_and_frames_are_refused() {
        let atlas = circle_two_chart(0.3, PouProfile::Hat, 2).unwrap();
        let gauged = atlas
            .clone()
            .with_bundle(Bundle::Gauged {
                rank: 2,
                gauges: vec![Gauge::Identity, Gauge::Rotation { slope: vec![0.5], intercept: 0.1 }],
            })
            .unwrap();
        let json = AtlasJson::from(&gauged);
        assert_eq!(json.bundle.transitions, "gauges");
        assert!(json.build().is_ok());
        let mut frames = json.clone();
        frames.bundle.transitions = "frames".into();
        assert!(frames.build().unwrap_err().is_config());
    }
}
