//! Radial bumps attached to Whitney cubes and the partition of unity they
//! induce on the covered region.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use super::decomposition::WhitneyDecomposition;
use crate::kdtree::KdTree;
use crate::{Error, Result};

/// Support radius of a cube's bump in units of its half diagonal.
pub const SUPPORT_FACTOR: f64 = 1.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpProfile {
    /// `exp(1 - 1/(1 - t^2))`, smooth.
    Mollifier,
    /// `(1 - t^2)^(k+1)`, of class `C^k`.
    Polynomial { k: u32 },
}

impl BumpProfile {
    /// Profile value at normalized radius `t >= 0`; peaks at `1` for `t = 0`.
    pub fn eval(&self, t: f64) -> f64 {
        if t >= 1.0 {
            return 0.0;
        }
        let s = 1.0 - t * t;
        match *self {
            BumpProfile::Mollifier => (1.0 - 1.0 / s).exp(),
            BumpProfile::Polynomial { k } => s.powi(k as i32 + 1),
        }
    }
}

/// One group of equally sized cubes with a spatial index over their centers.
#[derive(Debug, Clone)]
struct Level {
    radius: f64,
    tree: KdTree,
    cubes: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct BumpSystem {
    profile: BumpProfile,
    dim: usize,
    radii: Vec<f64>,
    centers: Vec<f64>,
    levels: Vec<Level>,
}

impl BumpSystem {
    pub fn new(decomp: &WhitneyDecomposition, profile: BumpProfile) -> Result<Self> {
        if let BumpProfile::Polynomial { k } = profile {
            if k > 32 {
                return Err(Error::Argument(alloc::format!("polynomial bump order {k} is too large")));
            }
        }
        let d = decomp.dim();
        let half_diag = (d as f64).sqrt() / 2.0;
        let mut radii = Vec::with_capacity(decomp.len());
        let mut centers = Vec::with_capacity(decomp.len() * d);
        let mut by_side: Vec<(u64, usize)> = Vec::with_capacity(decomp.len());
        for (i, q) in decomp.cubes.iter().enumerate() {
            radii.push(SUPPORT_FACTOR * q.side * half_diag);
            centers.extend_from_slice(&q.center);
            by_side.push((q.side.to_bits(), i));
        }
        by_side.sort_unstable();
        let mut levels = Vec::new();
        for group in by_side.chunk_by(|a, b| a.0 == b.0) {
            let cubes: Vec<usize> = group.iter().map(|g| g.1).collect();
            let mut coords = Vec::with_capacity(cubes.len() * d);
            for &c in &cubes {
                coords.extend_from_slice(&centers[c * d..(c + 1) * d]);
            }
            levels.push(Level {
                radius: radii[cubes[0]],
                tree: KdTree::new(d, coords),
                cubes,
            });
        }
        Ok(Self {
            profile,
            dim: d,
            radii,
            centers,
            levels,
        })
    }

    pub fn profile(&self) -> BumpProfile {
        self.profile
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn support_radius(&self, cube: usize) -> f64 {
        self.radii[cube]
    }

    pub fn center(&self, cube: usize) -> &[f64] {
        &self.centers[cube * self.dim..(cube + 1) * self.dim]
    }

    /// Raw bump values `(cube, phi_Q(x))` of all cubes whose support holds
    /// `x`, in increasing cube order.
    pub fn bumps_at(&self, x: &[f64], out: &mut Vec<(usize, f64)>) {
        out.clear();
        let mut hits = Vec::new();
        for level in &self.levels {
            level.tree.within_into(x, level.radius, &mut hits);
            for &(j, dist) in &hits {
                let v = self.profile.eval(dist / level.radius);
                if v > 0.0 {
                    out.push((level.cubes[j], v));
                }
            }
        }
        out.sort_unstable_by_key(|e| e.0);
    }

    /// Normalized weights `phi_Q(x) / sum_R phi_R(x)`; empty when no
    /// support holds `x`.
    pub fn partition_at(&self, x: &[f64], out: &mut Vec<(usize, f64)>) {
        self.bumps_at(x, out);
        let total: f64 = out.iter().map(|e| e.1).sum();
        if total > 0.0 {
            for e in out.iter_mut() {
                e.1 /= total;
            }
        }
    }
}
