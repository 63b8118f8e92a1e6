//! Test domains with closed-form oracles and grid samples.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use super::polygon::Polygon;
use super::set::{add_regularity_witnesses, SampledClosedSet, SetOracle};
use crate::jet::functions::{fjord_wall, fjord_wall_derivative};
use crate::{Error, Result};

/// Guard on the number of grid nodes scanned by a generator.
pub const MAX_GRID_NODES: usize = 4_000_000;

pub const MAX_KOCH_ITERATIONS: usize = 8;

/// `{x : x_1 >= 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfSpace {
    pub dim: usize,
}

impl SetOracle for HalfSpace {
    fn dim(&self) -> usize {
        self.dim
    }
    fn contains(&self, x: &[f64]) -> bool {
        x[0] >= 0.0
    }
    fn interior(&self, x: &[f64]) -> bool {
        x[0] > 0.0
    }
    fn open_segment_interior(&self, a: &[f64], b: &[f64], _step: f64) -> bool {
        a[0] >= 0.0 && b[0] >= 0.0 && (a[0] > 0.0 || b[0] > 0.0)
    }
}

/// Closed Euclidean ball about the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub dim: usize,
    pub radius: f64,
}

impl Ball {
    fn norm2(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }
}

impl SetOracle for Ball {
    fn dim(&self) -> usize {
        self.dim
    }
    fn contains(&self, x: &[f64]) -> bool {
        Self::norm2(x).sqrt() <= self.radius * (1.0 + 1e-12)
    }
    fn interior(&self, x: &[f64]) -> bool {
        Self::norm2(x).sqrt() < self.radius * (1.0 - 1e-12)
    }
    fn open_segment_interior(&self, a: &[f64], b: &[f64], _step: f64) -> bool {
        // Strict convexity: distinct points of the closed ball span an open
        // chord inside the open ball.
        self.contains(a) && self.contains(b) && a != b
    }
}

/// Convex polygon `{x : <n_k, x> <= c_k}` built from its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
    facets: Vec<([f64; 2], f64)>,
    tol: f64,
}

impl ConvexPolygon {
    /// Vertices in counter-clockwise or clockwise order; the polygon must be
    /// strictly convex.
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::Config("a convex polygon needs at least three vertices".into()));
        }
        let area2: f64 = (0..n)
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum();
        if area2 < 0.0 {
            vertices.reverse();
        }
        let mut facets = Vec::with_capacity(n);
        let mut scale: f64 = 0.0;
        for i in 0..n {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            let turn = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if !(turn > 0.0) {
                return Err(Error::Config(format!("vertices are not strictly convex at index {}", (i + 1) % n)));
            }
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = dx.hypot(dy);
            let normal = [dy / len, -dx / len];
            facets.push((normal, normal[0] * a[0] + normal[1] * a[1]));
            scale = scale.max(a[0].abs()).max(a[1].abs());
        }
        Ok(Self {
            vertices,
            facets,
            tol: 1e-12 * scale.max(1.0),
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    /// Largest facet value `<n_k, x> - c_k`; non-positive inside.
    fn excess(&self, x: &[f64]) -> f64 {
        self.facets
            .iter()
            .map(|(n, c)| n[0] * x[0] + n[1] * x[1] - c)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl SetOracle for ConvexPolygon {
    fn dim(&self) -> usize {
        2
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.excess(x) <= self.tol
    }
    fn interior(&self, x: &[f64]) -> bool {
        self.excess(x) < -self.tol
    }
    fn open_segment_interior(&self, a: &[f64], b: &[f64], _step: f64) -> bool {
        self.facets.iter().all(|(n, c)| {
            let va = n[0] * a[0] + n[1] * a[1] - c;
            let vb = n[0] * b[0] + n[1] * b[1] - c;
            va <= self.tol && vb <= self.tol && (va < -self.tol || vb < -self.tol)
        })
    }
}

/// The closed region bounded by a Koch snowflake polygon.
#[derive(Debug, Clone)]
pub struct KochRegion {
    iterations: usize,
    polygon: Polygon,
}

impl KochRegion {
    /// Snowflake on an equilateral triangle of side one centred at the origin.
    pub fn new(iterations: usize) -> Result<Self> {
        if iterations > MAX_KOCH_ITERATIONS {
            return Err(Error::Size {
                limit: MAX_KOCH_ITERATIONS,
                detail: format!("koch snowflake with {iterations} iterations"),
            });
        }
        let h = 3f64.sqrt() / 2.0;
        // Counter-clockwise, centroid at the origin.
        let mut pts: Vec<[f64; 2]> = vec![[-0.5, -h / 3.0], [0.5, -h / 3.0], [0.0, 2.0 * h / 3.0]];
        let (c, s) = ((-core::f64::consts::FRAC_PI_3).cos(), (-core::f64::consts::FRAC_PI_3).sin());
        for _ in 0..iterations {
            let mut next = Vec::with_capacity(pts.len() * 4);
            for i in 0..pts.len() {
                let p = pts[i];
                let q = pts[(i + 1) % pts.len()];
                let d = [(q[0] - p[0]) / 3.0, (q[1] - p[1]) / 3.0];
                let a = [p[0] + d[0], p[1] + d[1]];
                let b = [p[0] + 2.0 * d[0], p[1] + 2.0 * d[1]];
                // Rotating by -60 degrees points outward for a ccw boundary.
                let peak = [a[0] + c * d[0] - s * d[1], a[1] + s * d[0] + c * d[1]];
                next.extend_from_slice(&[p, a, peak, b]);
            }
            pts = next;
        }
        Ok(Self {
            iterations,
            polygon: Polygon::new(pts),
        })
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }
}

impl SetOracle for KochRegion {
    fn dim(&self) -> usize {
        2
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.polygon.contains([x[0], x[1]])
    }
    fn interior(&self, x: &[f64]) -> bool {
        self.polygon.strictly_inside([x[0], x[1]])
    }
    fn open_segment_interior(&self, a: &[f64], b: &[f64], _step: f64) -> bool {
        self.polygon.open_segment_inside([a[0], a[1]], [b[0], b[1]])
    }
}

/// `R^2` minus the open fjord `{(x, y) : x > 0, 0 < y < exp(-1/x^2)}`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExpCuspRegion;

impl ExpCuspRegion {
    /// Membership in the closed fjord `{x >= 0, 0 <= y <= phi(x)}`.
    fn in_closed_fjord(x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && y <= fjord_wall(x)
    }
}

impl SetOracle for ExpCuspRegion {
    fn dim(&self) -> usize {
        2
    }
    fn contains(&self, p: &[f64]) -> bool {
        !(p[0] > 0.0 && p[1] > 0.0 && p[1] < fjord_wall(p[0]))
    }
    fn interior(&self, p: &[f64]) -> bool {
        !Self::in_closed_fjord(p[0], p[1])
    }
    fn open_segment_interior(&self, a: &[f64], b: &[f64], step: f64) -> bool {
        // Along or across the lower wall y = 0 at x >= 0.
        if a[1] == 0.0 && b[1] == 0.0 {
            return a[0].max(b[0]) <= 0.0;
        }
        if (a[1] < 0.0 && b[1] > 0.0) || (a[1] > 0.0 && b[1] < 0.0) {
            let t = a[1] / (a[1] - b[1]);
            if a[0] + t * (b[0] - a[0]) >= 0.0 {
                return false;
            }
        }
        if a[1].max(b[1]) <= 0.0 {
            return true;
        }
        // Leaving a wall point into the fjord.
        for (e, o) in [(a, b), (b, a)] {
            let (ux, uy) = (o[0] - e[0], o[1] - e[1]);
            if e[0] > 0.0 && e[1] == 0.0 && uy > 0.0 {
                return false;
            }
            if e[0] > 0.0 && e[1] == fjord_wall(e[0]) && uy < fjord_wall_derivative(1, e[0]) * ux {
                return false;
            }
        }
        // The part with y >= 0 joins points on or above the wall; where the
        // wall is convex the chord stays above it.
        if a[0].max(b[0]) <= CONVEX_LIMIT {
            return true;
        }
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let n = ((len / step).ceil() as usize).max(2);
        (1..n).all(|k| {
            let t = k as f64 / n as f64;
            !Self::in_closed_fjord(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        })
    }
}

/// The fjord wall is convex on `x < sqrt(2/3)`.
const CONVEX_LIMIT: f64 = 0.816;

/// The closed epigraph `{y >= phi(x)}` of the fjord wall, with `phi = 0` for
/// `x <= 0`. It has the same upper boundary as [`ExpCuspRegion`] but no fjord.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExpCuspEpigraph;

impl SetOracle for ExpCuspEpigraph {
    fn dim(&self) -> usize {
        2
    }
    fn contains(&self, p: &[f64]) -> bool {
        p[1] >= fjord_wall(p[0])
    }
    fn interior(&self, p: &[f64]) -> bool {
        p[1] > fjord_wall(p[0])
    }
}

fn grid_count(half_width: f64, h: f64, dim: usize) -> Result<usize> {
    let per_axis = (2.0 * (half_width / h).floor() + 1.0) as usize;
    let total = (per_axis as f64).powi(dim as i32);
    if !(total <= MAX_GRID_NODES as f64) {
        return Err(Error::Size {
            limit: MAX_GRID_NODES,
            detail: format!("{total} grid nodes at spacing {h}"),
        });
    }
    Ok(per_axis)
}

/// Calls `visit` on every node `h * k`, `k` in `[-n, n]^dim`.
fn for_each_node(dim: usize, n: i64, h: f64, mut visit: impl FnMut(&[f64])) {
    let mut k = vec![-n; dim];
    let mut p = vec![0.0; dim];
    loop {
        for i in 0..dim {
            p[i] = k[i] as f64 * h;
        }
        visit(&p);
        let mut axis = 0;
        loop {
            if axis == dim {
                return;
            }
            if k[axis] < n {
                k[axis] += 1;
                break;
            }
            k[axis] = -n;
            axis += 1;
        }
    }
}

fn check_params(resolution: f64, extent: f64) -> Result<()> {
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::Argument(format!("resolution must be positive, got {resolution}")));
    }
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::Argument(format!("extent must be positive, got {extent}")));
    }
    Ok(())
}

/// Half-space `{x_1 >= 0}` sampled on the grid of spacing `resolution` inside
/// the window `[0, 2w] x [-w, w]^(d-1)`.
pub fn half_space(dim: usize, resolution: f64, half_width: f64) -> Result<SampledClosedSet> {
    check_params(resolution, half_width)?;
    if dim == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let n = (half_width / resolution).floor() as i64;
    grid_count(half_width, resolution, dim)?;
    let (mut boundary, mut interior) = (Vec::new(), Vec::new());
    for_each_node(dim, n, resolution, |p| {
        // Shift the first axis from [-w, w] to [0, 2w].
        let x0 = p[0] + n as f64 * resolution;
        let mut q = p.to_vec();
        q[0] = x0;
        if x0 == 0.0 {
            boundary.extend_from_slice(&q);
        } else {
            interior.extend_from_slice(&q);
        }
    });
    SampledClosedSet::new(format!("half_space({dim})"), Arc::new(HalfSpace { dim }), boundary, interior, resolution)
}

/// Closed ball of the given radius about the origin.
pub fn closed_ball(dim: usize, radius: f64, resolution: f64) -> Result<SampledClosedSet> {
    check_params(resolution, radius)?;
    if dim == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    let ball = Ball { dim, radius };
    let h = resolution;
    let n = (radius / h).ceil() as i64 + 1;
    grid_count(n as f64 * h, h, dim)?;
    let mut boundary = Vec::new();
    let mut interior = Vec::new();
    match dim {
        1 => boundary.extend_from_slice(&[-radius, radius]),
        2 => {
            let count = ((core::f64::consts::TAU * radius / h).ceil() as usize).max(8);
            for k in 0..count {
                let t = core::f64::consts::TAU * k as f64 / count as f64;
                boundary.extend_from_slice(&[radius * t.cos(), radius * t.sin()]);
            }
        }
        _ => {}
    }
    for_each_node(dim, n, h, |p| {
        let r = Ball::norm2(p).sqrt();
        if dim > 2 && (r - radius).abs() < h / 2.0 && r > 0.0 {
            boundary.extend(p.iter().map(|v| v * radius / r));
        }
        if r < radius - h / 4.0 {
            interior.extend_from_slice(p);
        }
    });
    add_regularity_witnesses(&ball, &boundary, &mut interior, h);
    SampledClosedSet::new(format!("closed_ball({dim}, {radius})"), Arc::new(ball), boundary, interior, resolution)
}

/// Convex polygon in the plane.
pub fn convex_polytope(vertices: Vec<[f64; 2]>, resolution: f64) -> Result<SampledClosedSet> {
    check_params(resolution, 1.0)?;
    let poly = ConvexPolygon::new(vertices)?;
    let verts = poly.vertices().to_vec();
    let boundary = edge_samples(&verts, resolution);
    let extent = verts.iter().fold(0.0f64, |m, v| m.max(v[0].abs()).max(v[1].abs()));
    let n = (extent / resolution).ceil() as i64;
    grid_count(n as f64 * resolution, resolution, 2)?;
    let mut interior = Vec::new();
    for_each_node(2, n, resolution, |p| {
        if poly.excess(p) < -resolution / 4.0 {
            interior.extend_from_slice(p);
        }
    });
    add_regularity_witnesses(&poly, &boundary, &mut interior, resolution);
    SampledClosedSet::new(
        format!("convex_polytope({} vertices)", verts.len()),
        Arc::new(poly),
        boundary,
        interior,
        resolution,
    )
}

/// Koch snowflake on a unit triangle.
pub fn koch_snowflake(iterations: usize, resolution: f64) -> Result<SampledClosedSet> {
    check_params(resolution, 1.0)?;
    let region = KochRegion::new(iterations)?;
    let boundary = edge_samples(region.polygon().vertices(), resolution);
    // The snowflake lies in the disk of radius 1/sqrt(3) about the centroid.
    let n = (0.58 / resolution).ceil() as i64;
    grid_count(n as f64 * resolution, resolution, 2)?;
    let mut interior = Vec::new();
    let margin = resolution / 4.0;
    for_each_node(2, n, resolution, |p| {
        let q = [p[0], p[1]];
        if region.polygon().strictly_inside(q) && region.polygon().boundary_distance_within(q, margin).is_none() {
            interior.extend_from_slice(p);
        }
    });
    add_regularity_witnesses(&region, &boundary, &mut interior, resolution);
    SampledClosedSet::new(format!("koch_snowflake({iterations})"), Arc::new(region), boundary, interior, resolution)
}

/// Points along the closed polygon through `verts` at spacing at most `h`,
/// starting with every vertex.
fn edge_samples(verts: &[[f64; 2]], h: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..verts.len() {
        let (a, b) = (verts[i], verts[(i + 1) % verts.len()]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        let k = ((len / h).ceil() as usize).max(1);
        for j in 0..k {
            let t = j as f64 / k as f64;
            out.extend_from_slice(&[a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    out
}

/// Smallest fjord height kept as a separate upper-wall sample; below it the
/// two walls coincide numerically.
const MIN_WALL_GAP: f64 = 1e-200;

/// The exponential-fjord domain sampled on `[-w, w]^2`: both fjord walls at
/// abscissae `k * resolution`, and interior grid nodes outside the closed fjord.
pub fn exp_cusp_domain(resolution: f64, half_width: f64) -> Result<SampledClosedSet> {
    check_params(resolution, half_width)?;
    let h = resolution;
    let n = (half_width / h).floor() as i64;
    grid_count(half_width, h, 2)?;
    let mut boundary = Vec::new();
    for k in 0..=n {
        let x = k as f64 * h;
        boundary.extend_from_slice(&[x, 0.0]);
        let wall = fjord_wall(x);
        if wall > MIN_WALL_GAP {
            boundary.extend_from_slice(&[x, wall]);
        }
    }
    let region = ExpCuspRegion;
    let mut interior = Vec::new();
    for_each_node(2, n, h, |p| {
        if region.interior(p) {
            interior.extend_from_slice(p);
        }
    });
    add_regularity_witnesses(&region, &boundary, &mut interior, h);
    SampledClosedSet::new(format!("exp_cusp_domain({h})"), Arc::new(region), boundary, interior, h)
}

/// The epigraph of the fjord wall sampled on `[-w, w]^2`.
pub fn exp_cusp_epigraph(resolution: f64, half_width: f64) -> Result<SampledClosedSet> {
    check_params(resolution, half_width)?;
    let h = resolution;
    let n = (half_width / h).floor() as i64;
    grid_count(half_width, h, 2)?;
    let mut boundary = Vec::new();
    for k in -n..=n {
        let x = k as f64 * h;
        boundary.extend_from_slice(&[x, fjord_wall(x)]);
    }
    let region = ExpCuspEpigraph;
    let mut interior = Vec::new();
    for_each_node(2, n, h, |p| {
        if region.interior(p) {
            interior.extend_from_slice(p);
        }
    });
    add_regularity_witnesses(&region, &boundary, &mut interior, h);
    SampledClosedSet::new(format!("exp_cusp_epigraph({h})"), Arc::new(region), boundary, interior, h)
}
