//! Sampled verification of the no-narrow-fjords condition.
//!
//! Paths are polygonal: a direct or slightly bent chord when it stays in the
//! interior, otherwise endpoint legs into a graph on the interior samples
//! joined by a shortest graph path. Only the two endpoints of a path may lie
//! on the boundary.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use super::set::SampledClosedSet;
use crate::graph::Graph;
use crate::kdtree::{dist, KdTree};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FjordCheckConfig {
    /// Exponent `p >= 1`.
    pub p: u32,
    /// Constant `D > 0` in `d(x, y) >= D l^p`.
    pub constant: f64,
    pub pair_budget: usize,
    /// Interior samples farther than this from the base point are left out
    /// of the graph; `None` keeps all of them.
    pub graph_radius: Option<f64>,
    /// Graph edges join interior samples closer than this multiple of the
    /// resolution.
    pub neighbor_factor: f64,
}

impl FjordCheckConfig {
    pub fn new(p: u32, constant: f64, pair_budget: usize) -> Result<Self> {
        let cfg = Self {
            p,
            constant,
            pair_budget,
            graph_radius: None,
            neighbor_factor: 2.3,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_graph_radius(mut self, radius: f64) -> Self {
        self.graph_radius = Some(radius);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 1 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        if !(self.constant > 0.0 && self.constant.is_finite()) {
            return Err(Error::Config(format!("D must be positive, got {}", self.constant)));
        }
        if self.pair_budget == 0 {
            return Err(Error::Config("pair budget must be positive".into()));
        }
        if !(self.neighbor_factor >= 1.0) {
            return Err(Error::Config("neighbor factor must be at least 1".into()));
        }
        if let Some(r) = self.graph_radius {
            if !(r > 0.0) {
                return Err(Error::Config(format!("graph radius must be positive, got {r}")));
            }
        }
        Ok(())
    }
}

/// A tested pair with the polygonal interior path found for it.
#[derive(Debug, Clone, PartialEq)]
pub struct FjordPath {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub distance: f64,
    pub length: f64,
    /// Path vertices from `x` to `y` inclusive.
    pub vertices: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FjordCertificate {
    pub set_label: alloc::string::String,
    pub base: Vec<f64>,
    pub p: u32,
    pub constant: f64,
    pub resolution: f64,
    pub graph_nodes: usize,
    pub paths: Vec<FjordPath>,
    /// Smallest `d(x, y) / l^p` over the tested pairs.
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FjordOutcome {
    Certified(FjordCertificate),
    /// A pair whose best path is too long; `length` is infinite when no path
    /// was found.
    Violated {
        x: Vec<f64>,
        y: Vec<f64>,
        distance: f64,
        length: f64,
        vertices: Vec<Vec<f64>>,
    },
    /// The interior graph separates the two points at this resolution.
    Disconnected { a: Vec<f64>, b: Vec<f64> },
}

impl FjordOutcome {
    pub fn is_certified(&self) -> bool {
        matches!(self, FjordOutcome::Certified(_))
    }
}

/// Reusable interior-path finder: the interior graph near a base point.
#[derive(Debug, Clone)]
pub struct FjordProbe<'a> {
    set: &'a SampledClosedSet,
    base: Vec<f64>,
    /// Interior sample index of every graph node.
    nodes: Vec<usize>,
    tree: KdTree,
    graph: Graph,
    components: Vec<usize>,
    attach_radius: f64,
}

impl<'a> FjordProbe<'a> {
    pub fn new(set: &'a SampledClosedSet, base: &[f64], graph_radius: Option<f64>, neighbor_factor: f64) -> Result<Self> {
        let d = set.dim();
        if base.len() != d {
            return Err(Error::Config("base point has the wrong dimension".into()));
        }
        let nodes: Vec<usize> = match graph_radius {
            Some(r) => {
                let mut v: Vec<usize> = set.interior_tree().within(base, r).into_iter().map(|e| e.0).collect();
                v.sort_unstable();
                v
            }
            None => (0..set.interior_len()).collect(),
        };
        let coords: Vec<f64> = nodes.iter().flat_map(|&i| set.interior_point(i).iter().copied()).collect();
        let tree = KdTree::new(d, coords);
        let link = neighbor_factor * set.resolution();
        let mut edges = Vec::new();
        let mut near = Vec::new();
        for a in 0..nodes.len() {
            let pa = tree.point(a);
            tree.within_into(pa, link, &mut near);
            for &(b, _) in &near {
                if b <= a {
                    continue;
                }
                let pb = tree.point(b);
                if set.open_segment_interior(pa, pb) {
                    edges.push((a as u32, b as u32, set.distance(pa, pb)));
                }
            }
        }
        let graph = Graph::from_edges(nodes.len(), &edges);
        let components = graph.components();
        Ok(Self {
            set,
            base: base.to_vec(),
            nodes,
            tree,
            graph,
            components,
            attach_radius: link,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Graph nodes reachable from `x` by a straight interior leg, with the
    /// leg lengths. The search radius widens up to four times when empty.
    fn attach(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let mut near = Vec::new();
        let mut radius = self.attach_radius;
        for _ in 0..3 {
            self.tree.within_into(x, radius, &mut near);
            let mut out: Vec<(usize, f64)> = Vec::new();
            for &(v, r) in &near {
                if r == 0.0 {
                    return vec![(v, 0.0)];
                }
                let pv = self.tree.point(v);
                if self.set.open_segment_interior(x, pv) {
                    out.push((v, self.set.distance(x, pv)));
                }
            }
            if !out.is_empty() {
                out.sort_by_key(|e| e.0);
                return out;
            }
            radius *= 2.0;
        }
        Vec::new()
    }

    /// A short chord-like path when the straight or a slightly bent chord
    /// stays in the interior.
    fn chord(&self, x: &[f64], y: &[f64]) -> Option<(f64, Vec<Vec<f64>>)> {
        if self.set.open_segment_interior(x, y) {
            return Some((self.set.distance(x, y), vec![x.to_vec(), y.to_vec()]));
        }
        let d = x.len();
        let len = dist(x, y);
        for &eta in &[1e-3, 1e-2, 1e-1] {
            for dir in bend_directions(x, y) {
                let m: Vec<f64> = (0..d).map(|i| (x[i] + y[i]) / 2.0 + eta * len * dir[i]).collect();
                if self.set.interior(&m) && self.set.open_segment_interior(x, &m) && self.set.open_segment_interior(&m, y) {
                    let l = self.set.distance(x, &m) + self.set.distance(&m, y);
                    return Some((l, vec![x.to_vec(), m, y.to_vec()]));
                }
            }
        }
        None
    }

    /// Shortest found interior paths from `x` to every point of `ys`.
    /// Unreachable targets get `None`; `Err` carries a target separated from
    /// `x` by the graph.
    pub fn paths_from(&self, x: &[f64], ys: &[&[f64]]) -> core::result::Result<Vec<Option<(f64, Vec<Vec<f64>>)>>, usize> {
        let mut out: Vec<Option<(f64, Vec<Vec<f64>>)>> = ys.iter().map(|y| self.chord(x, y)).collect();
        if out.iter().all(Option::is_some) {
            return Ok(out);
        }
        let src = self.attach(x);
        let tgt: Vec<Vec<(usize, f64)>> = ys
            .iter()
            .zip(&out)
            .map(|(y, found)| if found.is_some() { Vec::new() } else { self.attach(y) })
            .collect();
        let targets: Vec<usize> = tgt.iter().flatten().map(|e| e.0).collect();
        let sp = self.graph.shortest_paths(&src, Some(&targets));
        for (k, y) in ys.iter().enumerate() {
            if out[k].is_some() {
                continue;
            }
            let best = tgt[k]
                .iter()
                .map(|&(v, leg)| (sp.dist[v] + leg, v))
                .filter(|e| e.0.is_finite())
                .min_by(|a, b| a.0.total_cmp(&b.0));
            match best {
                Some((len, v)) => {
                    let mut vertices = vec![x.to_vec()];
                    for node in sp.path_to(v) {
                        let p = self.tree.point(node);
                        if p != x {
                            vertices.push(p.to_vec());
                        }
                    }
                    if vertices.last().map(Vec::as_slice) != Some(*y) {
                        vertices.push(y.to_vec());
                    }
                    out[k] = Some((len, vertices));
                }
                None => {
                    let separated = !src.is_empty()
                        && !tgt[k].is_empty()
                        && src
                            .iter()
                            .all(|s| tgt[k].iter().all(|t| self.components[s.0] != self.components[t.0]));
                    if separated {
                        return Err(k);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Unit directions perpendicular-ish to `y - x` used to bend a chord off a
/// flat boundary piece.
fn bend_directions(x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
    let d = x.len();
    let len = dist(x, y);
    let u: Vec<f64> = (0..d).map(|i| (y[i] - x[i]) / len).collect();
    let mut out = Vec::new();
    for axis in 0..d {
        let mut v: Vec<f64> = (0..d).map(|i| if i == axis { 1.0 } else { 0.0 }).collect();
        let dot: f64 = v.iter().zip(&u).map(|(a, b)| a * b).sum();
        for (vi, ui) in v.iter_mut().zip(&u) {
            *vi -= dot * ui;
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-6 {
            let v: Vec<f64> = v.iter().map(|a| a / n).collect();
            out.push(v.iter().map(|a| -a).collect());
            out.push(v);
        }
    }
    out
}

/// Deterministic pair selection from the points of `K`: half of the budget
/// goes to the closest distinct pairs, the rest to evenly spaced distance
/// quantiles of a fixed pseudo-random pair family.
pub fn select_pairs(points: &[f64], dim: usize, budget: usize) -> Vec<(usize, usize)> {
    let n = points.len() / dim;
    if n < 2 {
        return Vec::new();
    }
    let p = |i: usize| &points[i * dim..(i + 1) * dim];
    let tree = KdTree::new(dim, points.to_vec());
    let mut close: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        let found = tree.nearest_filtered(p(i), |j| j != i && p(j) != p(i));
        if let Some((j, d)) = found {
            close.push((d, i.min(j), i.max(j)));
        }
    }
    close.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    close.dedup_by(|a, b| a.1 == b.1 && a.2 == b.2);
    let mut pairs: Vec<(usize, usize)> = close.iter().take(budget.div_ceil(2)).map(|e| (e.1, e.2)).collect();

    let mut family: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for k in 1..=4u64 {
            let j = ((i as u64 * 7919 + k * 104_729) % n as u64) as usize;
            let d = dist(p(i), p(j));
            if j != i && d > 0.0 {
                family.push((d, i.min(j), i.max(j)));
            }
        }
    }
    family.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    family.dedup_by(|a, b| a.1 == b.1 && a.2 == b.2);
    let rest = budget - pairs.len().min(budget);
    if rest > 0 && !family.is_empty() {
        for q in 0..rest {
            let idx = q * (family.len() - 1) / (rest - 1).max(1);
            let e = family[idx];
            if !pairs.contains(&(e.1, e.2)) {
                pairs.push((e.1, e.2));
            }
        }
    }
    pairs.truncate(budget);
    pairs
}

/// Checks `d(x, y) >= D l(gamma)^p` on selected pairs of `K` (flat points of
/// the set near `base`), where `gamma` is the best interior path found.
pub fn check_no_narrow_fjords(set: &SampledClosedSet, base: &[f64], k_points: &[f64], config: &FjordCheckConfig) -> Result<FjordOutcome> {
    config.validate()?;
    let d = set.dim();
    if !k_points.len().is_multiple_of(d) || k_points.len() < 2 * d {
        return Err(Error::EmptyInput("K needs at least two sample points".into()));
    }
    let probe = FjordProbe::new(set, base, config.graph_radius, config.neighbor_factor)?;
    probe.check(k_points, config)
}

impl FjordProbe<'_> {
    /// Runs the pair test on `K` with this probe's graph.
    pub fn check(&self, k_points: &[f64], config: &FjordCheckConfig) -> Result<FjordOutcome> {
        config.validate()?;
        let d = self.set.dim();
        let pairs = select_pairs(k_points, d, config.pair_budget);
        let pt = |i: usize| &k_points[i * d..(i + 1) * d];
        // Group by the first point so each source runs one search.
        let mut grouped: Vec<(usize, Vec<usize>)> = Vec::new();
        for &(i, j) in &pairs {
            match grouped.iter_mut().find(|g| g.0 == i) {
                Some(g) => g.1.push(j),
                None => grouped.push((i, vec![j])),
            }
        }
        let mut cert = FjordCertificate {
            set_label: self.set.label().into(),
            base: self.base.clone(),
            p: config.p,
            constant: config.constant,
            resolution: self.set.resolution(),
            graph_nodes: self.nodes.len(),
            paths: Vec::new(),
            worst_ratio: f64::INFINITY,
        };
        // Pairs are reported in selection order.
        let mut results: Vec<Option<FjordPath>> = vec![None; pairs.len()];
        for (i, js) in &grouped {
            let x = pt(*i);
            let ys: Vec<&[f64]> = js.iter().map(|&j| pt(j)).collect();
            let found = match self.paths_from(x, &ys) {
                Ok(f) => f,
                Err(k) => {
                    return Ok(FjordOutcome::Disconnected {
                        a: x.to_vec(),
                        b: ys[k].to_vec(),
                    })
                }
            };
            for (k, f) in found.into_iter().enumerate() {
                let pos = pairs.iter().position(|&pr| pr == (*i, js[k])).unwrap();
                let (length, vertices) = f.unwrap_or((f64::INFINITY, Vec::new()));
                results[pos] = Some(FjordPath {
                    x: x.to_vec(),
                    y: ys[k].to_vec(),
                    distance: self.set.distance(x, ys[k]),
                    length,
                    vertices,
                });
            }
        }
        for path in results.into_iter().flatten() {
            let need = config.constant * path.length.powi(config.p as i32);
            if !(path.distance >= need) {
                return Ok(FjordOutcome::Violated {
                    x: path.x,
                    y: path.y,
                    distance: path.distance,
                    length: path.length,
                    vertices: path.vertices,
                });
            }
            cert.worst_ratio = cert.worst_ratio.min(path.distance / path.length.powi(config.p as i32));
            cert.paths.push(path);
        }
        Ok(FjordOutcome::Certified(cert))
    }
}

/// Re-verifies every stored path: consecutive vertices are joined by open
/// interior segments, inner vertices are interior points, the length adds
/// up, and the inequality holds. Returns the index of the first bad path.
pub fn replay_fjord_certificate(set: &SampledClosedSet, cert: &FjordCertificate) -> core::result::Result<(), usize> {
    for (k, path) in cert.paths.iter().enumerate() {
        let v = &path.vertices;
        let ok = v.len() >= 2
            && v.first() == Some(&path.x)
            && v.last() == Some(&path.y)
            && v[1..v.len() - 1].iter().all(|p| set.interior(p))
            && v.windows(2).all(|w| set.open_segment_interior(&w[0], &w[1]))
            && {
                let len: f64 = v.windows(2).map(|w| set.distance(&w[0], &w[1])).sum();
                (len - path.length).abs() <= 1e-9 * path.length.max(1.0)
            }
            && path.distance >= cert.constant * path.length.powi(cert.p as i32);
        if !ok {
            return Err(k);
        }
    }
    Ok(())
}
