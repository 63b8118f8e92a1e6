//! Certificate files: constants, witnesses and paths, the resolution they
//! were found at, and a SHA-256 checksum for replay.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wkit_core::geometry::{
    replay_cusp_certificate, replay_fjord_certificate, CuspCertificate, CuspConstants, CuspWitness, FjordCertificate,
    FjordPath,
};

use super::domain::DomainSpec;
use crate::error::{Result, WkitError};

/// Non-finite floats are written as `null` and read back as `+inf`.
pub(crate) mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantsJson {
    pub epsilon0: f64,
    pub rho: f64,
    pub r: f64,
}

impl From<CuspConstants> for ConstantsJson {
    fn from(c: CuspConstants) -> Self {
        ConstantsJson {
            epsilon0: c.epsilon0,
            rho: c.rho,
            r: c.r,
        }
    }
}

impl TryFrom<ConstantsJson> for CuspConstants {
    type Error = WkitError;

    fn try_from(c: ConstantsJson) -> Result<Self> {
        Ok(CuspConstants::new(c.epsilon0, c.rho, c.r)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspWitnessJson {
    pub z: Vec<f64>,
    pub epsilon: f64,
    pub x: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspCertificateJson {
    pub set: String,
    pub resolution: f64,
    pub constants: ConstantsJson,
    pub eps_grid: Vec<f64>,
    pub probe_count: usize,
    pub vacuous: bool,
    pub witnesses: Vec<CuspWitnessJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FjordPathJson {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub distance: f64,
    #[serde(with = "inf_as_null")]
    pub length: f64,
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FjordCertificateJson {
    pub set: String,
    pub base: Vec<f64>,
    pub p: u32,
    pub constant: f64,
    pub resolution: f64,
    pub graph_nodes: usize,
    #[serde(with = "inf_as_null")]
    pub worst_ratio: f64,
    pub paths: Vec<FjordPathJson>,
}

impl From<&CuspCertificate> for CuspCertificateJson {
    fn from(c: &CuspCertificate) -> Self {
        CuspCertificateJson {
            set: c.set_label.clone(),
            resolution: c.resolution,
            constants: c.constants.into(),
            eps_grid: c.eps_grid.clone(),
            probe_count: c.probe_count,
            vacuous: c.vacuous,
            witnesses: c
                .witnesses
                .iter()
                .map(|w| CuspWitnessJson {
                    z: w.z.clone(),
                    epsilon: w.epsilon,
                    x: w.x.clone(),
                    radius: w.radius,
                })
                .collect(),
        }
    }
}

impl TryFrom<&CuspCertificateJson> for CuspCertificate {
    type Error = WkitError;

    fn try_from(c: &CuspCertificateJson) -> Result<Self> {
        Ok(CuspCertificate {
            set_label: c.set.clone(),
            resolution: c.resolution,
            constants: c.constants.try_into()?,
            eps_grid: c.eps_grid.clone(),
            probe_count: c.probe_count,
            vacuous: c.vacuous,
            witnesses: c
                .witnesses
                .iter()
                .map(|w| CuspWitness {
                    z: w.z.clone(),
                    epsilon: w.epsilon,
                    x: w.x.clone(),
                    radius: w.radius,
                })
                .collect(),
        })
    }
}

impl From<&FjordCertificate> for FjordCertificateJson {
    fn from(c: &FjordCertificate) -> Self {
        FjordCertificateJson {
            set: c.set_label.clone(),
            base: c.base.clone(),
            p: c.p,
            constant: c.constant,
            resolution: c.resolution,
            graph_nodes: c.graph_nodes,
            worst_ratio: c.worst_ratio,
            paths: c
                .paths
                .iter()
                .map(|p| FjordPathJson {
                    x: p.x.clone(),
                    y: p.y.clone(),
                    distance: p.distance,
                    length: p.length,
                    vertices: p.vertices.clone(),
                })
                .collect(),
        }
    }
}

impl From<&FjordCertificateJson> for FjordCertificate {
    fn from(c: &FjordCertificateJson) -> Self {
        FjordCertificate {
            set_label: c.set.clone(),
            base: c.base.clone(),
            p: c.p,
            constant: c.constant,
            resolution: c.resolution,
            graph_nodes: c.graph_nodes,
            worst_ratio: c.worst_ratio,
            paths: c
                .paths
                .iter()
                .map(|p| FjordPath {
                    x: p.x.clone(),
                    y: p.y.clone(),
                    distance: p.distance,
                    length: p.length,
                    vertices: p.vertices.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum CertificateBody {
    OutwardCusps(CuspCertificateJson),
    NoNarrowFjords(FjordCertificateJson),
}

/// Sampled certificates say nothing about the set between samples.
pub const CAVEAT: &str = "verified on samples at the stated resolution; \
no bound relates the resolution to the constants, so the verdict is evidence, not proof";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub schema: u32,
    pub domain: DomainSpec,
    pub certificate: CertificateBody,
    pub caveat: String,
    /// Lower-case hex SHA-256 of the compact JSON of the other fields.
    pub checksum: String,
}

#[derive(Serialize)]
struct Payload<'a> {
    schema: u32,
    domain: &'a DomainSpec,
    certificate: &'a CertificateBody,
    caveat: &'a str,
}

impl CertificateFile {
    pub fn new(domain: &DomainSpec, certificate: CertificateBody) -> Result<Self> {
        let mut file = CertificateFile {
            schema: 1,
            domain: domain.resolved(),
            certificate,
            caveat: CAVEAT.into(),
            checksum: String::new(),
        };
        file.checksum = file.compute_checksum()?;
        Ok(file)
    }

    pub fn compute_checksum(&self) -> Result<String> {
        let bytes = serde_json::to_vec(&Payload {
            schema: self.schema,
            domain: &self.domain,
            certificate: &self.certificate,
            caveat: &self.caveat,
        })?;
        Ok(format!("{:x}", Sha256::digest(&bytes)))
    }

    pub fn verify_checksum(&self) -> Result<()> {
        let computed = self.compute_checksum()?;
        if computed == self.checksum {
            Ok(())
        } else {
            Err(WkitError::Checksum {
                stored: self.checksum.clone(),
                computed,
            })
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Checks the checksum, regenerates the domain and re-verifies every
    /// recorded witness or path. `Ok(Err(k))` names the first entry that no
    /// longer holds.
    pub fn replay(&self) -> Result<std::result::Result<(), usize>> {
        self.verify_checksum()?;
        let set = self.domain.build()?;
        Ok(match &self.certificate {
            CertificateBody::OutwardCusps(c) => replay_cusp_certificate(&set, &c.try_into()?),
            CertificateBody::NoNarrowFjords(c) => replay_fjord_certificate(&set, &c.into()),
        })
    }
}
