//! Static k-d tree over a flat point array.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;
use core::cmp::Ordering;

/// Immutable k-d tree. Points are stored flat (`len * dim` coordinates) and
/// referred to by their index in the original array.
#[derive(Debug, Clone)]
pub struct KdTree {
    dim: usize,
    coords: Vec<f64>,
    order: Vec<usize>,
}

impl KdTree {
    pub fn new(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0, "dimension must be positive");
        assert_eq!(coords.len() % dim, 0, "coordinate array is not a multiple of dim");
        let n = coords.len() / dim;
        let mut order: Vec<usize> = (0..n).collect();
        build(&coords, dim, &mut order, 0);
        Self { dim, coords, order }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Nearest point (Euclidean), ties broken by lexicographic order of the
    /// coordinates and then by index. Returns `(index, distance)`.
    pub fn nearest(&self, q: &[f64]) -> Option<(usize, f64)> {
        if self.order.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(q, 0, self.order.len(), 0, &mut best, &|_| true);
        Some((best.0, best.1.sqrt()))
    }

    /// Nearest point among those accepted by `keep`.
    pub fn nearest_filtered(&self, q: &[f64], keep: impl Fn(usize) -> bool) -> Option<(usize, f64)> {
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(q, 0, self.order.len(), 0, &mut best, &keep);
        (best.0 != usize::MAX).then(|| (best.0, best.1.sqrt()))
    }

    fn better(&self, cand: usize, d2: f64, best: &(usize, f64)) -> bool {
        if best.0 == usize::MAX || d2 < best.1 {
            return true;
        }
        if d2 > best.1 {
            return false;
        }
        match lex_cmp(self.point(cand), self.point(best.0)) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => cand < best.0,
        }
    }

    fn nearest_rec(
        &self,
        q: &[f64],
        lo: usize,
        hi: usize,
        depth: usize,
        best: &mut (usize, f64),
        keep: &dyn Fn(usize) -> bool,
    ) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.order[mid];
        let d2 = dist2(q, self.point(idx));
        if keep(idx) && self.better(idx, d2, best) {
            *best = (idx, d2);
        }
        let axis = depth % self.dim;
        let diff = q[axis] - self.point(idx)[axis];
        let (first, second) = if diff <= 0.0 {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.nearest_rec(q, first.0, first.1, depth + 1, best, keep);
        // `<=` keeps equidistant candidates reachable for the tie-break.
        if diff * diff <= best.1 {
            self.nearest_rec(q, second.0, second.1, depth + 1, best, keep);
        }
    }

    /// All points with Euclidean distance `<= radius`, as `(index, distance)`
    /// in unspecified order.
    pub fn within(&self, q: &[f64], radius: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.within_into(q, radius, &mut out);
        out
    }

    pub fn within_into(&self, q: &[f64], radius: f64, out: &mut Vec<(usize, f64)>) {
        out.clear();
        let r2 = radius * radius;
        self.within_rec(q, r2, 0, self.order.len(), 0, out);
        for e in out.iter_mut() {
            e.1 = e.1.sqrt();
        }
    }

    fn within_rec(&self, q: &[f64], r2: f64, lo: usize, hi: usize, depth: usize, out: &mut Vec<(usize, f64)>) {
        if lo >= hi {
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let idx = self.order[mid];
        let d2 = dist2(q, self.point(idx));
        if d2 <= r2 {
            out.push((idx, d2));
        }
        let axis = depth % self.dim;
        let diff = q[axis] - self.point(idx)[axis];
        if diff <= 0.0 || diff * diff <= r2 {
            self.within_rec(q, r2, lo, mid, depth + 1, out);
        }
        if diff >= 0.0 || diff * diff <= r2 {
            self.within_rec(q, r2, mid + 1, hi, depth + 1, out);
        }
    }
}

fn build(coords: &[f64], dim: usize, order: &mut [usize], depth: usize) {
    if order.len() <= 1 {
        return;
    }
    let axis = depth % dim;
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        coords[a * dim + axis]
            .partial_cmp(&coords[b * dim + axis])
            .unwrap_or(Ordering::Equal)
    });
    let (left, right) = order.split_at_mut(mid);
    build(coords, dim, left, depth + 1);
    build(coords, dim, &mut right[1..], depth + 1);
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    Ordering::Equal
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_nearest(pts: &[f64], dim: usize, q: &[f64]) -> (usize, f64) {
        let n = pts.len() / dim;
        let mut best = (0, f64::INFINITY);
        for i in 0..n {
            let p = &pts[i * dim..(i + 1) * dim];
            let d = dist2(q, p);
            let better = d < best.1
                || (d == best.1 && lex_cmp(p, &pts[best.0 * dim..(best.0 + 1) * dim]) == Ordering::Less);
            if better {
                best = (i, d);
            }
        }
        (best.0, best.1.sqrt())
    }

    #[test]
    fn nearest_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=3 {
            let pts: Vec<f64> = (0..300 * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let tree = KdTree::new(dim, pts.clone());
            for _ in 0..200 {
                let q: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.2..1.2)).collect();
                let (i, d) = tree.nearest(&q).unwrap();
                let (j, e) = brute_nearest(&pts, dim, &q);
                assert_eq!(i, j);
                assert!((d - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn filtered_nearest_skips_rejected_points() {
        let tree = KdTree::new(1, alloc::vec![0.0, 1.0, 3.0]);
        assert_eq!(tree.nearest_filtered(&[0.0], |i| i != 0), Some((1, 1.0)));
        assert_eq!(tree.nearest_filtered(&[0.0], |_| false), None);
    }

    #[test]
    fn ties_resolve_lexicographically() {
        // Four grid points equidistant from the origin.
        let pts = alloc::vec![1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0, -1.0];
        let tree = KdTree::new(2, pts);
        let (i, _) = tree.nearest(&[0.0, 0.0]).unwrap();
        assert_eq!(tree.point(i), &[-1.0, 0.0]);
    }

    #[test]
    fn within_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<f64> = (0..1000).map(|_| rng.gen_range(0.0..1.0)).collect();
        let tree = KdTree::new(2, pts.clone());
        let q = [0.4, 0.6];
        let mut got: Vec<usize> = tree.within(&q, 0.1).into_iter().map(|e| e.0).collect();
        got.sort_unstable();
        let want: Vec<usize> = (0..500).filter(|&i| dist(&q, &pts[2 * i..2 * i + 2]) <= 0.1).collect();
        assert_eq!(got, want);
    }
}
