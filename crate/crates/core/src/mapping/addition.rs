//! Local additions on flat space and on round spheres.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::{Error, Result};

/// A local addition `(q, v) -> q + v` on a target manifold `N` given in
/// ambient coordinates `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalAddition {
    /// `N = R^n`, `q + v`.
    Flat { ambient: usize },
    /// Unit sphere in `R^n` with the Riemannian exponential.
    SphereExp { ambient: usize },
    /// Unit sphere in `R^n` with `(q + v) / |q + v|`.
    SphereProjection { ambient: usize },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl LocalAddition {
    pub fn ambient(&self) -> usize {
        match *self {
            LocalAddition::Flat { ambient }
            | LocalAddition::SphereExp { ambient }
            | LocalAddition::SphereProjection { ambient } => ambient,
        }
    }

    pub fn is_sphere(&self) -> bool {
        !matches!(self, LocalAddition::Flat { .. })
    }

    /// Bound on the geodesic distance from `q` within which the addition is
    /// a diffeomorphism onto its image.
    pub fn injectivity_bound(&self) -> f64 {
        match self {
            LocalAddition::Flat { .. } => f64::INFINITY,
            LocalAddition::SphereExp { .. } => PI,
            LocalAddition::SphereProjection { .. } => PI / 2.0,
        }
    }

    /// Geodesic distance on `N`.
    pub fn distance(&self, p: &[f64], q: &[f64]) -> f64 {
        if self.is_sphere() {
            let c = dot(p, q);
            let s: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - c * b).collect();
            norm(&s).atan2(c)
        } else {
            p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        }
    }

    /// Geodesic distance from `q` to `add(q, v)`.
    pub fn reach(&self, v: &[f64]) -> f64 {
        match self {
            LocalAddition::Flat { .. } | LocalAddition::SphereExp { .. } => norm(v),
            LocalAddition::SphereProjection { .. } => norm(v).atan(),
        }
    }

    /// Whether `q` lies on `N` within `tol`.
    pub fn on_manifold(&self, q: &[f64], tol: f64) -> bool {
        q.len() == self.ambient() && (!self.is_sphere() || (norm(q) - 1.0).abs() <= tol)
    }

    /// Tangent projection of `w` at `q`.
    pub fn project(&self, q: &[f64], w: &[f64]) -> Vec<f64> {
        if self.is_sphere() {
            let c = dot(q, w);
            w.iter().zip(q).map(|(a, b)| a - c * b).collect()
        } else {
            w.to_vec()
        }
    }

    /// `Sigma(q, v)`; `Sigma(q, 0) = q` exactly.
    pub fn add(&self, q: &[f64], v: &[f64]) -> Vec<f64> {
        if v.iter().all(|x| *x == 0.0) {
            return q.to_vec();
        }
        match self {
            LocalAddition::Flat { .. } => q.iter().zip(v).map(|(a, b)| a + b).collect(),
            LocalAddition::SphereExp { .. } => {
                let t = norm(v);
                let (s, c) = t.sin_cos();
                q.iter().zip(v).map(|(a, b)| c * a + s * b / t).collect()
            }
            LocalAddition::SphereProjection { .. } => {
                let w: Vec<f64> = q.iter().zip(v).map(|(a, b)| a + b).collect();
                let n = norm(&w);
                w.into_iter().map(|x| x / n).collect()
            }
        }
    }

    /// The tangent vector `v` at `q` with `Sigma(q, v) = p`; `None` outside
    /// the injectivity domain.
    pub fn inverse(&self, q: &[f64], p: &[f64]) -> Option<Vec<f64>> {
        if p == q {
            return Some(alloc::vec![0.0; q.len()]);
        }
        match self {
            LocalAddition::Flat { .. } => Some(p.iter().zip(q).map(|(a, b)| a - b).collect()),
            LocalAddition::SphereExp { .. } => {
                let c = dot(q, p);
                let w: Vec<f64> = p.iter().zip(q).map(|(a, b)| a - c * b).collect();
                let s = norm(&w);
                let t = s.atan2(c);
                if !(t < PI) || s == 0.0 {
                    return (s == 0.0 && c > 0.0).then(|| alloc::vec![0.0; q.len()]);
                }
                Some(w.into_iter().map(|x| t * x / s).collect())
            }
            LocalAddition::SphereProjection { .. } => {
                let c = dot(q, p);
                if !(c > 0.0) {
                    return None;
                }
                Some(p.iter().zip(q).map(|(a, b)| a / c - b).collect())
            }
        }
    }

    pub(crate) fn check_point(&self, q: &[f64]) -> Result<()> {
        if self.on_manifold(q, 1e-12) {
            Ok(())
        } else {
            Err(Error::Argument(alloc::format!("{q:?} does not lie on the target manifold")))
        }
    }
}
