//! Domain description files `{generator, params, resolution}`.

use serde::{Deserialize, Serialize};
use wkit_core::geometry::generators;
use wkit_core::geometry::SampledClosedSet;

use crate::error::{Result, WkitError};

fn two() -> usize {
    2
}

fn one() -> f64 {
    1.0
}

fn quarter() -> f64 {
    0.25
}

fn four() -> usize {
    4
}

/// A test-domain generator with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", content = "params", rename_all = "snake_case")]
pub enum Generator {
    HalfSpace {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "one")]
        half_width: f64,
    },
    ClosedBall {
        #[serde(default = "two")]
        dim: usize,
        #[serde(default = "one")]
        radius: f64,
    },
    ConvexPolytope { vertices: Vec<[f64; 2]> },
    KochSnowflake {
        #[serde(default = "four")]
        iterations: usize,
    },
    ExpCuspDomain {
        #[serde(default = "quarter")]
        half_width: f64,
    },
    ExpCuspEpigraph {
        #[serde(default = "quarter")]
        half_width: f64,
    },
}

impl Generator {
    /// Diameter of the sampled region, used for the default resolution.
    pub fn diameter(&self) -> f64 {
        match self {
            Generator::HalfSpace { dim, half_width } => 2.0 * half_width * (*dim as f64).sqrt(),
            Generator::ClosedBall { radius, .. } => 2.0 * radius,
            Generator::ConvexPolytope { vertices } => vertices
                .iter()
                .flat_map(|a| vertices.iter().map(move |b| (a[0] - b[0]).hypot(a[1] - b[1])))
                .fold(0.0, f64::max),
            // The snowflake lies in the disk of radius 1/sqrt(3).
            Generator::KochSnowflake { .. } => 2.0 / 3f64.sqrt(),
            Generator::ExpCuspDomain { half_width } | Generator::ExpCuspEpigraph { half_width } => {
                2.0 * half_width * 2f64.sqrt()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub generator: Generator,
    /// Sample spacing; defaults to 1e-2 of the diameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
}

impl DomainSpec {
    pub fn new(generator: Generator, resolution: f64) -> Self {
        DomainSpec {
            generator,
            resolution: Some(resolution),
        }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution.unwrap_or(1e-2 * self.generator.diameter())
    }

    /// The spec with its resolution made explicit.
    pub fn resolved(&self) -> DomainSpec {
        DomainSpec::new(self.generator.clone(), self.resolution())
    }

    pub fn build(&self) -> Result<SampledClosedSet> {
        let h = self.resolution();
        if !(h > 0.0 && h.is_finite()) {
            return Err(WkitError::Config(format!("resolution must be positive, got {h}")));
        }
        let set = match &self.generator {
            Generator::HalfSpace { dim, half_width } => generators::half_space(*dim, h, *half_width)?,
            Generator::ClosedBall { dim, radius } => generators::closed_ball(*dim, *radius, h)?,
            Generator::ConvexPolytope { vertices } => generators::convex_polytope(vertices.clone(), h)?,
            Generator::KochSnowflake { iterations } => generators::koch_snowflake(*iterations, h)?,
            Generator::ExpCuspDomain { half_width } => generators::exp_cusp_domain(h, *half_width)?,
            Generator::ExpCuspEpigraph { half_width } => generators::exp_cusp_epigraph(h, *half_width)?,
        };
        Ok(set)
    }
}
