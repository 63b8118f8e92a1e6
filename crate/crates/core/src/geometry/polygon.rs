//! Simple closed polygons with edges bucketed into horizontal bands.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

#[derive(Debug, Clone)]
pub struct Polygon {
    verts: Vec<[f64; 2]>,
    y0: f64,
    band_h: f64,
    bands: Vec<Vec<u32>>,
    tol: f64,
}

impl Polygon {
    /// `verts` lists the vertices once, in order; the last connects to the first.
    pub fn new(verts: Vec<[f64; 2]>) -> Self {
        assert!(verts.len() >= 3, "a polygon needs at least three vertices");
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &verts {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let diam = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
        let tol = 1e-12 * diam;
        let n_bands = ((verts.len() as f64).sqrt() as usize).clamp(1, 4096);
        let band_h = (hi[1] - lo[1]).max(tol) / n_bands as f64;
        let mut poly = Self {
            verts,
            y0: lo[1],
            band_h,
            bands: vec![Vec::new(); n_bands],
            tol,
        };
        for e in 0..poly.verts.len() {
            let (a, b) = poly.edge(e);
            let (b0, b1) = poly.band_range(a[1].min(b[1]) - tol, a[1].max(b[1]) + tol);
            for band in &mut poly.bands[b0..=b1] {
                band.push(e as u32);
            }
        }
        poly
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.verts
    }

    pub fn edge(&self, e: usize) -> ([f64; 2], [f64; 2]) {
        (self.verts[e], self.verts[(e + 1) % self.verts.len()])
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    fn band_of(&self, y: f64) -> usize {
        let k = ((y - self.y0) / self.band_h).floor();
        if k < 0.0 {
            0
        } else {
            (k as usize).min(self.bands.len() - 1)
        }
    }

    fn band_range(&self, ylo: f64, yhi: f64) -> (usize, usize) {
        (self.band_of(ylo), self.band_of(yhi))
    }

    fn edges_in(&self, ylo: f64, yhi: f64, out: &mut Vec<u32>) {
        out.clear();
        let (b0, b1) = self.band_range(ylo, yhi);
        for band in &self.bands[b0..=b1] {
            out.extend_from_slice(band);
        }
        if b1 > b0 {
            out.sort_unstable();
            out.dedup();
        }
    }

    /// Even-odd point location, ignoring the boundary tolerance.
    fn crossing_inside(&self, p: [f64; 2]) -> bool {
        let band = &self.bands[self.band_of(p[1])];
        let mut inside = false;
        for &e in band {
            let (a, b) = self.edge(e as usize);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if x > p[0] {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the boundary if it is at most `r`.
    pub fn boundary_distance_within(&self, p: [f64; 2], r: f64) -> Option<f64> {
        let mut cand = Vec::new();
        self.edges_in(p[1] - r, p[1] + r, &mut cand);
        let mut best = f64::INFINITY;
        for &e in &cand {
            let (a, b) = self.edge(e as usize);
            best = best.min(point_segment_distance(p, a, b));
        }
        (best <= r).then_some(best)
    }

    pub fn on_boundary(&self, p: [f64; 2]) -> bool {
        self.boundary_distance_within(p, self.tol).is_some()
    }

    /// Closed polygon membership.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.on_boundary(p) || self.crossing_inside(p)
    }

    pub fn strictly_inside(&self, p: [f64; 2]) -> bool {
        !self.on_boundary(p) && self.crossing_inside(p)
    }

    /// Whether the open segment `(a, b)` avoids the boundary and lies inside.
    pub fn open_segment_inside(&self, a: [f64; 2], b: [f64; 2]) -> bool {
        let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
        if len == 0.0 {
            return false;
        }
        let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
        if !self.strictly_inside(mid) {
            return false;
        }
        let eta = self.tol / len;
        let mut cand = Vec::new();
        self.edges_in(a[1].min(b[1]) - self.tol, a[1].max(b[1]) + self.tol, &mut cand);
        for &e in &cand {
            let (c, d) = self.edge(e as usize);
            if touches_open_segment(a, b, c, d, eta, self.tol) {
                return false;
            }
        }
        true
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Parameter of the projection of `p` onto segment `ab`, clamped to `[0, 1]`.
fn project(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let l2 = dx * dx + dy * dy;
    if l2 == 0.0 {
        return 0.0;
    }
    (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / l2).clamp(0.0, 1.0)
}

pub(crate) fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let t = project(p, a, b);
    let q = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    (p[0] - q[0]).hypot(p[1] - q[1])
}

/// Whether the closed edge `cd` meets the open segment `ab` (parameters in
/// `(eta, 1 - eta)`), with distance tolerance `tol`.
fn touches_open_segment(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2], eta: f64, tol: f64) -> bool {
    let inner = |t: f64| t > eta && t < 1.0 - eta;
    // Edge endpoints grazing the segment.
    for p in [c, d] {
        let t = project(p, a, b);
        if inner(t) && point_segment_distance(p, a, b) <= tol {
            return true;
        }
    }
    // Proper crossing.
    let d1 = cross(a, b, c);
    let d2 = cross(a, b, d);
    let d3 = cross(c, d, a);
    let d4 = cross(c, d, b);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        let t = d3 / (d3 - d4);
        return inner(t);
    }
    false
}
