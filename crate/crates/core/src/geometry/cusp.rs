//! Sampled verification of the polynomial outward-cusp condition.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use super::constants::CuspConstants;
use super::set::SampledClosedSet;
use crate::kdtree::{dist, lex_cmp};
use crate::{Error, Result};

/// Probe points are placed at this fraction of the ball radius at most.
const PROBE_SHRINK: f64 = 0.999;

pub const MIN_PROBES: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct CuspCheckConfig {
    pub constants: CuspConstants,
    /// Scales `eps` to test, each in `(0, epsilon0)`.
    pub eps_grid: Vec<f64>,
    pub probe_count: usize,
}

impl CuspCheckConfig {
    pub fn new(constants: CuspConstants, eps_grid: Vec<f64>, probe_count: usize) -> Result<Self> {
        let cfg = Self {
            constants,
            eps_grid,
            probe_count,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eps_grid.is_empty() {
            return Err(Error::Config("empty eps grid".into()));
        }
        if let Some(e) = self
            .eps_grid
            .iter()
            .find(|&&e| !(e > 0.0 && e < self.constants.epsilon0))
        {
            return Err(Error::Config(format!(
                "eps {e} is outside (0, {})",
                self.constants.epsilon0
            )));
        }
        if self.probe_count < MIN_PROBES {
            return Err(Error::Config(format!(
                "probe_count must be at least {MIN_PROBES}, got {}",
                self.probe_count
            )));
        }
        Ok(())
    }
}

/// A verified pair `(z, eps)` with its corkscrew point `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspWitness {
    pub z: Vec<f64>,
    pub epsilon: f64,
    pub x: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CuspCertificate {
    pub set_label: String,
    pub resolution: f64,
    pub constants: CuspConstants,
    pub eps_grid: Vec<f64>,
    pub probe_count: usize,
    /// No boundary samples: the condition holds vacuously.
    pub vacuous: bool,
    pub witnesses: Vec<CuspWitness>,
}

/// The first `(z, eps)` for which no sampled candidate works.
#[derive(Debug, Clone, PartialEq)]
pub struct CuspViolation {
    pub z: Vec<f64>,
    pub epsilon: f64,
    pub candidates_tried: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CuspOutcome {
    Certified(CuspCertificate),
    Violated(CuspViolation),
}

impl CuspOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, CuspOutcome::Certified(_))
    }
}

/// Checks, for each `z` in `k_points` (flat) and each `eps` in the grid,
/// that some interior sample `x` with `d(x, z) < eps` has every probe `y` with
/// `d(x, y) < rho eps^r` inside the set and within `eps` of `z`.
///
/// Candidates are tried by increasing distance to `z` (ties
/// lexicographically); the first that passes is recorded. For the Euclidean
/// metric a candidate is discarded outright when a boundary sample lies in
/// its open ball, since the ball then reaches the complement.
pub fn check_outward_cusps(set: &SampledClosedSet, k_points: &[f64], config: &CuspCheckConfig) -> Result<CuspOutcome> {
    config.validate()?;
    let d = set.dim();
    let mut cert = CuspCertificate {
        set_label: set.label().into(),
        resolution: set.resolution(),
        constants: config.constants,
        eps_grid: config.eps_grid.clone(),
        probe_count: config.probe_count,
        vacuous: false,
        witnesses: Vec::new(),
    };
    if set.boundary_len() == 0 {
        cert.vacuous = true;
        return Ok(CuspOutcome::Certified(cert));
    }
    if k_points.is_empty() || !k_points.len().is_multiple_of(d) {
        return Err(Error::EmptyInput("no boundary points to test".into()));
    }
    let probes = ProbeSet::new(d, config.probe_count);
    let mut near = Vec::new();
    for z in k_points.chunks_exact(d) {
        for &eps in &config.eps_grid {
            let radius = config.constants.radius(eps);
            set.interior_tree().within_into(z, eps, &mut near);
            near.sort_by(|a, b| {
                a.1.partial_cmp(&b.1)
                    .unwrap()
                    .then_with(|| lex_cmp(set.interior_point(a.0), set.interior_point(b.0)))
            });
            let mut found = None;
            let mut tried = 0;
            for &(i, _) in &near {
                let x = set.interior_point(i);
                tried += 1;
                if admissible(set, &probes, z, x, eps, radius) {
                    found = Some(x.to_vec());
                    break;
                }
            }
            match found {
                Some(x) => cert.witnesses.push(CuspWitness {
                    z: z.to_vec(),
                    epsilon: eps,
                    x,
                    radius,
                }),
                None => {
                    return Ok(CuspOutcome::Violated(CuspViolation {
                        z: z.to_vec(),
                        epsilon: eps,
                        candidates_tried: tried,
                    }))
                }
            }
        }
    }
    Ok(CuspOutcome::Certified(cert))
}

/// Re-runs the verification of every stored witness. Returns the index of
/// the first witness that no longer verifies.
pub fn replay_cusp_certificate(set: &SampledClosedSet, cert: &CuspCertificate) -> core::result::Result<(), usize> {
    let probes = ProbeSet::new(set.dim(), cert.probe_count);
    for (k, w) in cert.witnesses.iter().enumerate() {
        let radius = cert.constants.radius(w.epsilon);
        if radius != w.radius || !admissible(set, &probes, &w.z, &w.x, w.epsilon, radius) {
            return Err(k);
        }
    }
    Ok(())
}

fn admissible(set: &SampledClosedSet, probes: &ProbeSet, z: &[f64], x: &[f64], eps: f64, radius: f64) -> bool {
    if !(set.distance(x, z) < eps) {
        return false;
    }
    let euclidean = set.metric().is_euclidean();
    if euclidean {
        if let Some((_, r)) = set.boundary_tree().nearest(x) {
            if r < radius {
                return false;
            }
        }
    }
    let mut y = alloc::vec![0.0; x.len()];
    for u in probes.points() {
        for i in 0..x.len() {
            y[i] = x[i] + PROBE_SHRINK * radius * u[i];
        }
        if !euclidean && !(set.distance(x, &y) < radius) {
            continue;
        }
        if !set.contains(&y) || !(set.distance(z, &y) < eps) {
            return false;
        }
    }
    true
}

/// Points of the closed unit ball: the `2d` axis points followed by Halton
/// points of the cube kept when inside the ball.
#[derive(Debug, Clone)]
struct ProbeSet {
    dim: usize,
    coords: Vec<f64>,
}

impl ProbeSet {
    fn new(dim: usize, count: usize) -> Self {
        let mut coords = Vec::with_capacity(count * dim);
        for axis in 0..dim {
            for sign in [1.0, -1.0] {
                let mut e = alloc::vec![0.0; dim];
                e[axis] = sign;
                coords.extend(e);
            }
        }
        let mut index = 1u64;
        let mut p = alloc::vec![0.0; dim];
        while coords.len() < count * dim {
            for (i, v) in p.iter_mut().enumerate() {
                *v = 2.0 * halton(index, PRIMES[i % PRIMES.len()]) - 1.0;
            }
            index += 1;
            if p.iter().map(|v| v * v).sum::<f64>() < 1.0 {
                coords.extend_from_slice(&p);
            }
        }
        coords.truncate(count.max(2 * dim) * dim);
        Self { dim, coords }
    }

    fn points(&self) -> core::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical inverse of `index` in `base`.
pub(crate) fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

/// Every `stride`-th boundary sample within `radius` of `center`; a
/// convenience for choosing `K`.
pub fn boundary_subset(set: &SampledClosedSet, stride: usize, center: &[f64], radius: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let stride = stride.max(1);
    for i in (0..set.boundary_len()).step_by(stride) {
        let z = set.boundary_point(i);
        if dist(z, center) <= radius {
            out.extend_from_slice(z);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generators::{closed_ball, exp_cusp_domain, half_space};
    use alloc::vec;

    fn constants(e: f64, rho: f64, r: f64) -> CuspConstants {
        CuspConstants::new(e, rho, r).unwrap()
    }

    #[test]
    fn halton_base_two() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(2, 2), 0.25);
        assert_eq!(halton(3, 2), 0.75);
    }

    #[test]
    fn probes_lie_in_the_ball() {
        let p = ProbeSet::new(3, 150);
        assert_eq!(p.points().count(), 150);
        assert!(p.points().all(|u| u.iter().map(|v| v * v).sum::<f64>() <= 1.0));
    }

    #[test]
    fn half_space_picks_the_hand_witness() {
        // Oracle: the ball about z + (eps/2) e_1 of radius eps/2 touches the
        // boundary only at z; any closer grid point has a boundary sample in
        // its ball. Grid spacing 1/64 puts the witness on the grid.
        let set = half_space(2, 1.0 / 64.0, 1.0).unwrap();
        let k = vec![0.0, 0.0, 0.0, 0.5, 0.0, -0.25];
        let cfg = CuspCheckConfig::new(constants(0.5, 0.5, 1.0), vec![0.25, 0.125, 0.0625], 100).unwrap();
        let CuspOutcome::Certified(cert) = check_outward_cusps(&set, &k, &cfg).unwrap() else {
            panic!("half-space must be certified");
        };
        assert_eq!(cert.witnesses.len(), 9);
        for w in &cert.witnesses {
            assert_eq!(w.x, vec![w.z[0] + w.epsilon / 2.0, w.z[1]]);
        }
        assert_eq!(replay_cusp_certificate(&set, &cert), Ok(()));
    }

    #[test]
    fn empty_boundary_is_vacuous() {
        let set = SampledClosedSet::new(
            "plane",
            alloc::sync::Arc::new(crate::geometry::generators::HalfSpace { dim: 2 }),
            Vec::new(),
            vec![1.0, 0.0],
            0.1,
        )
        .unwrap();
        let cfg = CuspCheckConfig::new(constants(0.5, 0.5, 1.0), vec![0.1], 100).unwrap();
        let CuspOutcome::Certified(cert) = check_outward_cusps(&set, &[], &cfg).unwrap() else {
            panic!()
        };
        assert!(cert.vacuous && cert.witnesses.is_empty());
    }

    #[test]
    fn missing_k_is_an_error() {
        let set = half_space(2, 0.1, 1.0).unwrap();
        let cfg = CuspCheckConfig::new(constants(0.5, 0.5, 1.0), vec![0.1], 100).unwrap();
        assert!(matches!(check_outward_cusps(&set, &[], &cfg), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn config_validation() {
        assert!(CuspCheckConfig::new(constants(0.5, 0.5, 1.0), vec![0.5], 100).is_err());
        assert!(CuspCheckConfig::new(constants(0.5, 0.5, 1.0), vec![0.1], 99).is_err());
        assert!(CuspCheckConfig::new(constants(0.5, 0.5, 1.0), vec![], 100).is_err());
    }

    #[test]
    fn too_large_balls_are_violations() {
        // A ball of radius 0.9 eps within eps of a boundary point would need
        // its centre within 0.1 eps of z, so it crosses the boundary.
        let set = closed_ball(2, 1.0, 0.02).unwrap();
        let k = vec![1.0, 0.0];
        let cfg = CuspCheckConfig::new(constants(0.5, 0.9, 1.0), vec![0.2], 100).unwrap();
        let out = check_outward_cusps(&set, &k, &cfg).unwrap();
        assert!(matches!(out, CuspOutcome::Violated(v) if v.epsilon == 0.2 && v.candidates_tried > 0));
    }

    #[test]
    fn exp_cusp_tip_has_outward_room() {
        let set = exp_cusp_domain(1.0 / 256.0, 0.3).unwrap();
        let k = boundary_subset(&set, 8, &[0.0, 0.0], 0.2);
        assert!(k.len() >= 2 * 10);
        let cfg = CuspCheckConfig::new(constants(0.2, 0.25, 1.0), vec![0.1, 0.05], 100).unwrap();
        let out = check_outward_cusps(&set, &k, &cfg).unwrap();
        assert!(out.is_certified(), "{out:?}");
    }

    #[test]
    fn tampered_certificate_fails_replay() {
        let set = half_space(2, 1.0 / 64.0, 1.0).unwrap();
        let cfg = CuspCheckConfig::new(constants(0.5, 0.5, 1.0), vec![0.25], 100).unwrap();
        let CuspOutcome::Certified(mut cert) = check_outward_cusps(&set, &[0.0, 0.0], &cfg).unwrap() else {
            panic!()
        };
        cert.witnesses[0].x[0] = 1.0 / 64.0;
        assert_eq!(replay_cusp_certificate(&set, &cert), Err(0));
    }
}
