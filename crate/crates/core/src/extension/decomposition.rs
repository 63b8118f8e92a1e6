//! Dyadic Whitney cubes covering a box minus a sampled closed set.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use crate::geometry::{SampledClosedSet, SetOracle};
use crate::kdtree::lex_cmp;
use crate::{Error, Result};

pub const DEFAULT_CUBE_BUDGET: usize = 1_000_000;

/// Lower proximity factor: a kept cube satisfies `s sqrt(d) <= dist`.
pub const PROXIMITY_LOW: f64 = 1.0;
/// Upper proximity factor: a kept cube satisfies `dist <= 6 s sqrt(d)`.
pub const PROXIMITY_HIGH: f64 = 6.0;

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Aabb {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Aabb {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::Config("box corners must have the same positive dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::Config(format!("degenerate box {lo:?} .. {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    /// Bounding box of the samples of `set`, widened by `margin` on each side.
    pub fn around(set: &SampledClosedSet, margin: f64) -> Result<Self> {
        let d = set.dim();
        let pts = set.sample_points();
        if pts.is_empty() {
            return Err(Error::EmptyInput("set has no samples".into()));
        }
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in pts.chunks_exact(d) {
            for i in 0..d {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        for i in 0..d {
            lo[i] -= margin;
            hi[i] += margin;
        }
        Self::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    pub center: Vec<f64>,
    pub side: f64,
    /// Subdivision depth below the root tiling.
    pub level: u32,
    /// Nearest sample of the set to the center.
    pub anchor: Vec<f64>,
    /// Sampled distance from the center to the set.
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct WhitneyDecomposition {
    pub set_label: String,
    pub bounds: Aabb,
    pub min_side: f64,
    pub max_side: f64,
    pub cubes: Vec<Cube>,
    /// Cubes dropped at the minimum side because they were still too close.
    pub discarded: usize,
    oracle: Arc<dyn SetOracle>,
}

impl WhitneyDecomposition {
    pub fn dim(&self) -> usize {
        self.bounds.dim()
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn oracle(&self) -> &Arc<dyn SetOracle> {
        &self.oracle
    }

    /// Cubes violating the proximity invariant (should be empty).
    pub fn proximity_violations(&self) -> Vec<usize> {
        let root_d = (self.dim() as f64).sqrt();
        self.cubes
            .iter()
            .enumerate()
            .filter(|(_, q)| {
                let diag = q.side * root_d;
                !(PROXIMITY_LOW * diag <= q.distance && q.distance <= PROXIMITY_HIGH * diag)
            })
            .map(|(i, _)| i)
            .collect()
    }
}

/// Nearest sample of `set` to `x` over boundary and interior samples, ties
/// broken lexicographically. Returns the coordinates and the distance.
pub fn nearest_sample(set: &SampledClosedSet, x: &[f64]) -> Option<(Vec<f64>, f64)> {
    let b = set.boundary_tree().nearest(x).map(|(i, d)| (set.boundary_point(i), d));
    let n = set.interior_tree().nearest(x).map(|(i, d)| (set.interior_point(i), d));
    let best = match (b, n) {
        (Some(b), Some(n)) => match b.1.partial_cmp(&n.1) {
            Some(Ordering::Less) => b,
            Some(Ordering::Greater) => n,
            _ if lex_cmp(n.0, b.0) == Ordering::Less => n,
            _ => b,
        },
        (b, n) => b.or(n)?,
    };
    Some((best.0.to_vec(), best.1))
}

/// A cube with center in the set and no boundary sample within half a
/// diagonal plus the sampling resolution is taken to lie inside the set.
fn inside_set(set: &SampledClosedSet, center: &[f64], half_diag: f64) -> bool {
    let gap = set.boundary_tree().nearest(center).map_or(f64::INFINITY, |n| n.1);
    gap > half_diag + set.resolution()
}

/// Recursive dyadic subdivision of a tiling of `bounds` by cubes of side
/// `max_side`. A cube is kept once `s sqrt(d) <= dist(center, C) <= 6 s sqrt(d)`,
/// subdivided while it is too close, and discarded when it is still too
/// close at `min_side` or lies inside the set.
pub fn whitney_decompose(
    set: &SampledClosedSet,
    bounds: &Aabb,
    min_side: f64,
    max_side: f64,
    budget: usize,
) -> Result<WhitneyDecomposition> {
    let d = set.dim();
    if bounds.dim() != d {
        return Err(Error::Config(format!("box has dimension {}, set has {d}", bounds.dim())));
    }
    if !(min_side > 0.0 && min_side < max_side && max_side.is_finite()) {
        return Err(Error::Config(format!("need 0 < min_side < max_side, got {min_side} and {max_side}")));
    }
    if set.sample_len() == 0 {
        return Err(Error::EmptyInput("set has no samples to anchor cubes".into()));
    }
    let root_d = (d as f64).sqrt();
    let counts: Vec<usize> = (0..d)
        .map(|i| ((bounds.hi[i] - bounds.lo[i]) / max_side).ceil().max(1.0) as usize)
        .collect();
    let roots: usize = counts.iter().product();
    if roots > budget {
        return Err(Error::Size {
            limit: budget,
            detail: format!("{roots} root cubes"),
        });
    }

    let mut cubes = Vec::new();
    let mut discarded = 0;
    let mut visited = 0usize;
    let mut stack: Vec<(Vec<f64>, f64, u32)> = Vec::new();
    for r in (0..roots).rev() {
        let mut k = r;
        let center: Vec<f64> = (0..d)
            .map(|i| {
                let c = bounds.lo[i] + ((k % counts[i]) as f64 + 0.5) * max_side;
                k /= counts[i];
                c
            })
            .collect();
        stack.push((center, max_side, 0));
    }
    while let Some((center, side, level)) = stack.pop() {
        visited += 1;
        if visited > budget {
            return Err(Error::Size {
                limit: budget,
                detail: format!("more than {budget} cubes visited"),
            });
        }
        let dist = set.distance_to_set(&center);
        let diag = side * root_d;
        if dist == 0.0 && inside_set(set, &center, diag / 2.0) {
            continue;
        }
        if dist > PROXIMITY_HIGH * diag {
            return Err(Error::Config(format!(
                "root cube at {center:?} lies {dist} from the set, beyond {PROXIMITY_HIGH} diagonals; increase max_side"
            )));
        }
        if dist >= PROXIMITY_LOW * diag {
            let (anchor, _) = nearest_sample(set, &center).expect("set has samples");
            cubes.push(Cube {
                center,
                side,
                level,
                anchor,
                distance: dist,
            });
            continue;
        }
        let half = side / 2.0;
        if half < min_side {
            discarded += 1;
            continue;
        }
        // Children pushed in reverse so they are visited in index order.
        for c in (0..1usize << d).rev() {
            let child: Vec<f64> = (0..d)
                .map(|i| center[i] + if c >> i & 1 == 1 { half / 2.0 } else { -half / 2.0 })
                .collect();
            stack.push((child, half, level + 1));
        }
    }
    Ok(WhitneyDecomposition {
        set_label: set.label().into(),
        bounds: bounds.clone(),
        min_side,
        max_side,
        cubes,
        discarded,
        oracle: set.oracle().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generators::{closed_ball, half_space};
    use crate::geometry::{SampledClosedSet, SetOracle};
    use alloc::vec;

    #[derive(Debug)]
    struct Everything;
    impl SetOracle for Everything {
        fn dim(&self) -> usize {
            2
        }
        fn contains(&self, _: &[f64]) -> bool {
            true
        }
        fn interior(&self, _: &[f64]) -> bool {
            true
        }
    }

    #[derive(Debug)]
    struct Origin;
    impl SetOracle for Origin {
        fn dim(&self) -> usize {
            2
        }
        fn contains(&self, x: &[f64]) -> bool {
            x == [0.0, 0.0]
        }
        fn interior(&self, _: &[f64]) -> bool {
            false
        }
    }

    fn point_set() -> SampledClosedSet {
        SampledClosedSet::new("origin", Arc::new(Origin), vec![0.0, 0.0], vec![], 1.0).unwrap()
    }

    fn overlap(a: &Cube, b: &Cube) -> bool {
        a.center
            .iter()
            .zip(&b.center)
            .all(|(x, y)| (x - y).abs() < (a.side + b.side) / 2.0 - 1e-12)
    }

    #[test]
    fn half_space_cubes_shrink_toward_the_wall() {
        // Reflect: the generator's half-space is x0 >= 0, so decompose (-1, 0) x (0, 1).
        let set = half_space(2, 1.0 / 64.0, 1.0).unwrap();
        let bounds = Aabb::new(vec![-1.0, 0.0], vec![0.0, 1.0]).unwrap();
        let dec = whitney_decompose(&set, &bounds, 1.0 / 256.0, 0.5, DEFAULT_CUBE_BUDGET).unwrap();
        assert!(!dec.is_empty());
        assert!(dec.proximity_violations().is_empty());
        // Sides are monotone in the distance to the wall across levels.
        for q in &dec.cubes {
            let wall = -q.center[0];
            assert!(q.side * 2f64.sqrt() <= wall + 1.0 / 64.0);
        }
        let smallest = dec.cubes.iter().map(|q| q.side).fold(f64::INFINITY, f64::min);
        let largest = dec.cubes.iter().map(|q| q.side).fold(0.0, f64::max);
        assert!(largest / smallest >= 16.0);
        for (i, a) in dec.cubes.iter().enumerate() {
            for b in &dec.cubes[i + 1..] {
                assert!(!overlap(a, b), "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn set_filling_the_box_gives_no_cubes() {
        let set = SampledClosedSet::new("all", Arc::new(Everything), vec![], vec![0.5, 0.5], 0.1).unwrap();
        let bounds = Aabb::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let dec = whitney_decompose(&set, &bounds, 0.01, 0.5, DEFAULT_CUBE_BUDGET).unwrap();
        assert!(dec.is_empty());
    }

    #[test]
    fn point_set_count_grows_logarithmically() {
        let set = point_set();
        let bounds = Aabb::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let mut counts = Vec::new();
        for k in [6, 8, 10, 12] {
            let dec = whitney_decompose(&set, &bounds, 2f64.powi(-k), 1.0, DEFAULT_CUBE_BUDGET).unwrap();
            assert!(dec.proximity_violations().is_empty());
            for q in &dec.cubes {
                assert_eq!(q.anchor, vec![0.0, 0.0]);
            }
            counts.push(dec.len());
        }
        // Two more levels add the same number of rings each time.
        let steps: Vec<usize> = counts.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.iter().all(|&s| s == steps[0] && s > 0), "{counts:?}");
    }

    #[test]
    fn anchors_are_nearest_samples() {
        let set = closed_ball(2, 1.0, 0.05).unwrap();
        let bounds = Aabb::around(&set, 0.5).unwrap();
        let dec = whitney_decompose(&set, &bounds, 0.01, 0.5, DEFAULT_CUBE_BUDGET).unwrap();
        let samples = set.sample_points();
        for q in dec.cubes.iter().step_by(7) {
            let brute = samples
                .chunks_exact(2)
                .map(|p| crate::kdtree::dist(p, &q.center))
                .fold(f64::INFINITY, f64::min);
            assert_eq!(crate::kdtree::dist(&q.anchor, &q.center), brute);
        }
    }

    #[test]
    fn budget_and_argument_errors() {
        let set = point_set();
        let bounds = Aabb::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            whitney_decompose(&set, &bounds, 1e-6, 1.0, 50),
            Err(Error::Size { .. })
        ));
        assert!(matches!(
            whitney_decompose(&set, &bounds, 0.5, 0.1, 50),
            Err(Error::Config(_))
        ));
        let far = Aabb::new(vec![-10.0, -10.0], vec![10.0, 10.0]).unwrap();
        assert!(matches!(
            whitney_decompose(&set, &far, 0.01, 0.1, DEFAULT_CUBE_BUDGET),
            Err(Error::Config(_))
        ));
    }
}
