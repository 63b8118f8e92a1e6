//! Graph approximation of the geodesic distance of a Riemannian metric on a
//! regular grid.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use nalgebra::{DMatrix, SymmetricEigen};

use super::set::Metric;
use crate::graph::Graph;
use crate::{Error, Result};

pub const MAX_GRID_NODES: usize = 1_000_000;

/// Smallest admissible eigenvalue of a metric tensor.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

/// Shortest-path distance over the grid graph whose neighbours differ by a
/// vector in `{-1, 0, 1}^d` (axis and diagonal steps). An edge weighs the
/// Riemannian length of its straight segment under the mean of the two
/// endpoint tensors.
#[derive(Debug, Clone)]
pub struct GridGeodesic {
    origin: Vec<f64>,
    spacing: f64,
    counts: Vec<usize>,
    graph: Graph,
}

impl GridGeodesic {
    /// `tensor(x)` returns the `d x d` metric at `x` in row-major order.
    pub fn new(origin: Vec<f64>, spacing: f64, counts: Vec<usize>, tensor: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let d = origin.len();
        if d == 0 || counts.len() != d || counts.contains(&0) {
            return Err(Error::Config("grid needs a positive node count per axis".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Argument(format!("grid spacing must be positive, got {spacing}")));
        }
        let total = counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c)).unwrap_or(usize::MAX);
        if total > MAX_GRID_NODES {
            return Err(Error::Size {
                limit: MAX_GRID_NODES,
                detail: format!("{total} grid nodes"),
            });
        }
        let mut this = Self {
            origin,
            spacing,
            counts,
            graph: Graph::default(),
        };
        let mut tensors = Vec::with_capacity(total * d * d);
        let mut x = vec![0.0; d];
        for node in 0..total {
            this.coords_into(node, &mut x);
            let g = tensor(&x);
            if g.len() != d * d {
                return Err(Error::Geometry {
                    node,
                    detail: format!("tensor has {} entries, expected {}", g.len(), d * d),
                });
            }
            check_spd(node, d, &g)?;
            tensors.extend(g);
        }
        let offsets = neighbor_offsets(d);
        let mut edges = Vec::new();
        let mut idx = vec![0usize; d];
        for node in 0..total {
            this.multi_index_into(node, &mut idx);
            for off in offsets.chunks_exact(d) {
                // Each undirected edge once: lexicographically positive offsets.
                if off.iter().find(|&&o| o != 0) != Some(&1) {
                    continue;
                }
                let Some(other) = this.shifted(&idx, off) else { continue };
                let ga = &tensors[node * d * d..(node + 1) * d * d];
                let gb = &tensors[other * d * d..(other + 1) * d * d];
                let mut q = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        let g = 0.5 * (ga[i * d + j] + gb[i * d + j]);
                        q += g * off[i] as f64 * off[j] as f64;
                    }
                }
                edges.push((node as u32, other as u32, spacing * q.sqrt()));
            }
        }
        this.graph = Graph::from_edges(total, &edges);
        Ok(this)
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn node_count(&self) -> usize {
        self.graph.len()
    }

    fn multi_index_into(&self, mut node: usize, out: &mut [usize]) {
        for (i, &c) in self.counts.iter().enumerate() {
            out[i] = node % c;
            node /= c;
        }
    }

    pub fn coords_into(&self, node: usize, out: &mut [f64]) {
        let mut n = node;
        for (i, &c) in self.counts.iter().enumerate() {
            out[i] = self.origin[i] + (n % c) as f64 * self.spacing;
            n /= c;
        }
    }

    fn shifted(&self, idx: &[usize], off: &[i64]) -> Option<usize> {
        let mut node = 0usize;
        let mut stride = 1usize;
        for i in 0..idx.len() {
            let k = idx[i] as i64 + off[i];
            if k < 0 || k >= self.counts[i] as i64 {
                return None;
            }
            node += k as usize * stride;
            stride *= self.counts[i];
        }
        Some(node)
    }

    /// Nearest grid node to `x` (coordinates clamped to the grid).
    pub fn node_of(&self, x: &[f64]) -> usize {
        let mut node = 0usize;
        let mut stride = 1usize;
        for i in 0..self.dim() {
            let k = ((x[i] - self.origin[i]) / self.spacing).round();
            let k = k.clamp(0.0, (self.counts[i] - 1) as f64) as usize;
            node += k * stride;
            stride *= self.counts[i];
        }
        node
    }

    pub fn node_distance(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        // Searching from the smaller index makes the result symmetric bit for bit.
        let (s, t) = if a < b { (a, b) } else { (b, a) };
        self.graph.shortest_paths(&[(s, 0.0)], Some(&[t])).dist[t]
    }

    /// Distances from node `a` to every node.
    pub fn distances_from(&self, a: usize) -> Vec<f64> {
        self.graph.shortest_paths(&[(a, 0.0)], None).dist
    }
}

impl Metric for GridGeodesic {
    /// Distance between the grid nodes nearest to `a` and `b`.
    fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.node_distance(self.node_of(a), self.node_of(b))
    }
}

fn check_spd(node: usize, d: usize, g: &[f64]) -> Result<()> {
    let m = DMatrix::from_row_slice(d, d, g);
    let scale = g.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    for i in 0..d {
        for j in 0..i {
            if !((m[(i, j)] - m[(j, i)]).abs() <= 1e-12 * scale) {
                return Err(Error::Geometry {
                    node,
                    detail: "metric tensor is not symmetric".into(),
                });
            }
        }
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Geometry {
            node,
            detail: "metric tensor has non-finite entries".into(),
        });
    }
    let eig = SymmetricEigen::new(m);
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > EIGENVALUE_FLOOR) {
        return Err(Error::Geometry {
            node,
            detail: format!("metric tensor is not positive definite (smallest eigenvalue {min})"),
        });
    }
    Ok(())
}

/// All of `{-1, 0, 1}^d` except zero, flat.
fn neighbor_offsets(d: usize) -> Vec<i64> {
    let mut out = Vec::new();
    for code in 0..3usize.pow(d as u32) {
        let mut c = code;
        let v: Vec<i64> = (0..d)
            .map(|_| {
                let o = (c % 3) as i64 - 1;
                c /= 3;
                o
            })
            .collect();
        if v.iter().any(|&o| o != 0) {
            out.extend(v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kdtree::dist;

    fn identity(d: usize) -> impl Fn(&[f64]) -> Vec<f64> {
        move |_| {
            let mut g = vec![0.0; d * d];
            for i in 0..d {
                g[i * d + i] = 1.0;
            }
            g
        }
    }

    #[test]
    fn constant_one_dimensional_tensor() {
        // Length of [0, 1] under g = 4 is the integral of sqrt(4), i.e. 2.
        let geo = GridGeodesic::new(vec![0.0], 0.1, vec![11], |_| vec![4.0]).unwrap();
        assert!((geo.distance(&[0.0], &[1.0]) - 2.0).abs() < 1e-9);
        assert_eq!(geo.distance(&[0.3], &[0.3]), 0.0);
    }

    #[test]
    fn euclidean_grid_distortion_is_bounded() {
        let geo = GridGeodesic::new(vec![0.0, 0.0], 0.1, vec![11, 11], identity(2)).unwrap();
        let mut x = [0.0; 2];
        let mut y = [0.0; 2];
        for a in (0..121).step_by(7) {
            for b in (0..121).step_by(5) {
                geo.coords_into(a, &mut x);
                geo.coords_into(b, &mut y);
                let e = dist(&x, &y);
                let g = geo.node_distance(a, b);
                assert!(g >= e - 1e-12 && g <= 2f64.sqrt() * e + 1e-12, "{g} vs {e}");
            }
        }
    }

    #[test]
    fn non_spd_tensor_names_the_node() {
        let err = GridGeodesic::new(vec![0.0, 0.0], 0.5, vec![3, 3], |x| {
            if x == [0.5, 0.5] {
                vec![1.0, 0.0, 0.0, -1.0]
            } else {
                vec![1.0, 0.0, 0.0, 1.0]
            }
        })
        .unwrap_err();
        assert!(matches!(err, Error::Geometry { node: 4, .. }), "{err:?}");
    }

    #[test]
    fn size_guard() {
        let err = GridGeodesic::new(vec![0.0; 2], 0.1, vec![2000, 2000], identity(2)).unwrap_err();
        assert!(matches!(err, Error::Size { .. }));
    }

    #[test]
    fn anisotropic_tensor_scales_axes() {
        // g = diag(1, 9): moving along the second axis costs three times more.
        let geo = GridGeodesic::new(vec![0.0, 0.0], 0.25, vec![5, 5], |_| vec![1.0, 0.0, 0.0, 9.0]).unwrap();
        assert!((geo.distance(&[0.0, 0.0], &[1.0, 0.0]) - 1.0).abs() < 1e-12);
        assert!((geo.distance(&[0.0, 0.0], &[0.0, 1.0]) - 3.0).abs() < 1e-12);
    }
}

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;

    fn bumpy() -> GridGeodesic {
        GridGeodesic::new(vec![-1.0, -1.0], 0.2, vec![11, 11], |x| {
            let s = 1.0 + 0.5 * (3.0 * x[0]).sin() * (2.0 * x[1]).cos();
            vec![s, 0.2, 0.2, 2.0 - 0.5 * s]
        })
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn metric_axioms(a in 0usize..121, b in 0usize..121, c in 0usize..121) {
            let g = bumpy();
            let ab = g.node_distance(a, b);
            prop_assert_eq!(ab, g.node_distance(b, a));
            // Path sums are rounded independently, so allow a few ulps.
            prop_assert!(ab <= (g.node_distance(a, c) + g.node_distance(c, b)) * (1.0 + 1e-12));
            prop_assert_eq!(ab == 0.0, a == b);
        }
    }
}
