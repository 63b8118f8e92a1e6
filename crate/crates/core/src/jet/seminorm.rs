use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;


use super::field::{coordinate_powers, JetField};
use super::multi_index::MultiIndex;
use crate::kdtree::KdTree;
use crate::{Error, Result};

/// A pair of sample points and a multi-index attaining a remainder ratio
/// `|R_x^m f^alpha(y)| |y - x|^{|alpha| - m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RemainderWitness {
    pub base: usize,
    pub target: usize,
    pub alpha: MultiIndex,
    pub ratio: f64,
    pub distance: f64,
    pub base_point: Vec<f64>,
    pub target_point: Vec<f64>,
}

/// `q_m(f, t)` evaluated on a grid of `t` values.
#[derive(Debug, Clone, PartialEq)]
pub struct QProfile {
    pub m: usize,
    /// The `t` values in the order they were given.
    pub t_grid: Vec<f64>,
    pub q: Vec<f64>,
    /// `true` where no sampled pair satisfies `0 < |x - y| <= t` (the value
    /// is then 0 by convention).
    pub empty: Vec<bool>,
    pub witnesses: Vec<Option<RemainderWitness>>,
}

#[derive(Debug, Clone, Copy)]
struct PairMax {
    ratio: f64,
    base: usize,
    target: usize,
    alpha: usize,
    distance: f64,
}

/// Computes `q_m(f, t)` for every `t` in `t_grid` in one sweep over the
/// sampled pairs with `|x - y| <= max(t_grid)`.
pub fn q_profile(jet: &JetField, m: usize, t_grid: &[f64]) -> Result<QProfile> {
    if m > jet.order() {
        return Err(Error::Order {
            requested: m,
            available: jet.order(),
        });
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(Error::Argument(format!("t must be positive and finite, got {t}")));
    }
    if t_grid.is_empty() {
        return Err(Error::Argument("empty t grid".into()));
    }
    // Ascending copy of the grid; bucket k collects pairs with
    // sorted[k-1] < dist <= sorted[k].
    let mut order: Vec<usize> = (0..t_grid.len()).collect();
    order.sort_by(|&a, &b| t_grid[a].partial_cmp(&t_grid[b]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&k| t_grid[k]).collect();
    let t_max = *sorted.last().unwrap();

    let mut buckets: Vec<Option<PairMax>> = vec![None; sorted.len()];
    let idx = jet.indices();
    let count = idx.count_up_to(m);
    let tree = KdTree::new(jet.dim(), jet.points_flat().to_vec());
    let mut near = Vec::new();
    for i in 0..jet.len() {
        tree.within_into(jet.point(i), t_max, &mut near);
        for &(j, _) in &near {
            if j == i {
                continue;
            }
            let x = jet.point(i);
            let y = jet.point(j);
            let dist = euclid(x, y);
            if !(dist > 0.0) || dist > t_max {
                continue;
            }
            let pows = coordinate_powers(x, y, m);
            let mut best: Option<PairMax> = None;
            for a in 0..count {
                let r = jet.remainder_with_powers(i, j, m, a, &pows).abs();
                let ratio = r * dist.powi(idx.order_of(a) as i32 - m as i32);
                if best.is_none_or(|b| ratio > b.ratio) {
                    best = Some(PairMax {
                        ratio,
                        base: i,
                        target: j,
                        alpha: a,
                        distance: dist,
                    });
                }
            }
            let Some(best) = best else { continue };
            let k = sorted.partition_point(|&t| t < dist);
            let slot = &mut buckets[k];
            if slot.is_none_or(|b| best.ratio > b.ratio) {
                *slot = Some(best);
            }
        }
    }

    // Prefix maxima over ascending t.
    let mut running: Option<PairMax> = None;
    let mut q_sorted = Vec::with_capacity(sorted.len());
    for b in &buckets {
        if let Some(b) = b {
            if running.is_none_or(|r| b.ratio > r.ratio) {
                running = Some(*b);
            }
        }
        q_sorted.push(running);
    }
    let mut q = vec![0.0; t_grid.len()];
    let mut empty = vec![true; t_grid.len()];
    let mut witnesses = vec![None; t_grid.len()];
    for (pos, &orig) in order.iter().enumerate() {
        if let Some(pm) = q_sorted[pos] {
            q[orig] = pm.ratio;
            empty[orig] = false;
            witnesses[orig] = Some(RemainderWitness {
                base: pm.base,
                target: pm.target,
                alpha: idx.get(pm.alpha).clone(),
                ratio: pm.ratio,
                distance: pm.distance,
                base_point: jet.point(pm.base).to_vec(),
                target_point: jet.point(pm.target).to_vec(),
            });
        }
    }
    Ok(QProfile {
        m,
        t_grid: t_grid.to_vec(),
        q,
        empty,
        witnesses,
    })
}

/// `q_m(f, t)` for a single `t` together with the empty-supremum flag.
pub fn q_seminorm(jet: &JetField, m: usize, t: f64) -> Result<(f64, bool)> {
    let p = q_profile(jet, m, &[t])?;
    Ok((p.q[0], p.empty[0]))
}

/// `|f|_{m,K}`, the `q_m` profile, and `||f||_{m,K} = |f|_{m,K} + max_t q_m(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormReport {
    pub m: usize,
    pub abs: f64,
    /// `(t, q_m(t))` with `t` decreasing.
    pub q_values: Vec<(f64, f64)>,
    pub empty: Vec<bool>,
    pub whitney_norm: f64,
    pub sample_count: usize,
}

pub fn seminorm_report(jet: &JetField, m: usize, t_grid: &[f64]) -> Result<SeminormReport> {
    let abs = jet.seminorm_abs(m)?;
    let mut grid = t_grid.to_vec();
    grid.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let prof = q_profile(jet, m, &grid)?;
    let q_values: Vec<(f64, f64)> = grid.iter().copied().zip(prof.q.iter().copied()).collect();
    let sup_q = prof.q.iter().copied().fold(0.0, f64::max);
    Ok(SeminormReport {
        m,
        abs,
        q_values,
        empty: prof.empty,
        whitney_norm: abs + sup_q,
        sample_count: jet.len(),
    })
}

/// Settings for [`whitney_jet_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct JetCheckConfig {
    /// Strictly decreasing, at least three entries spanning two decades.
    pub t_grid: Vec<f64>,
    pub tol: f64,
}

impl JetCheckConfig {
    pub fn new(t_grid: Vec<f64>, tol: f64) -> Result<Self> {
        let cfg = Self { t_grid, tol };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Logarithmic grid from `t_max` down to `t_min` with `count` entries.
    pub fn geometric(t_max: f64, t_min: f64, count: usize, tol: f64) -> Result<Self> {
        if count < 2 || !(t_min > 0.0) || !(t_max > t_min) {
            return Err(Error::Config("geometric t grid needs count >= 2 and 0 < t_min < t_max".into()));
        }
        let ratio = (t_min / t_max).powf(1.0 / (count - 1) as f64);
        let mut grid: Vec<f64> = (0..count).map(|k| t_max * ratio.powi(k as i32)).collect();
        grid[count - 1] = t_min;
        Self::new(grid, tol)
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.t_grid;
        if g.len() < 3 {
            return Err(Error::Config(format!("t grid needs at least 3 entries, got {}", g.len())));
        }
        if g.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return Err(Error::Config("t grid entries must be positive and finite".into()));
        }
        if g.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("t grid must be strictly decreasing".into()));
        }
        if g[0] / g[g.len() - 1] < 100.0 * (1.0 - 1e-12) {
            return Err(Error::Config("t grid must span at least two decades".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum JetVerdict {
    /// `q_m` is below tolerance at the deciding `t`. `vacuous` is set when no
    /// grid value had a qualifying pair.
    Pass { vacuous: bool },
    Fail(RemainderWitness),
}

impl JetVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, JetVerdict::Pass { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JetCheck {
    pub m: usize,
    pub tol: f64,
    pub profile: QProfile,
    /// Position in the t grid used for the verdict: the smallest `t` whose
    /// pair set is non-empty.
    pub decided_at: Option<usize>,
    pub verdict: JetVerdict,
}

/// Sampled Whitney-jet test: PASS when `q_m(t)` at the smallest grid value
/// with at least one qualifying pair is below `tol`; FAIL with the maximising
/// pair otherwise.
pub fn whitney_jet_check(jet: &JetField, m: usize, config: &JetCheckConfig) -> Result<JetCheck> {
    config.validate()?;
    let profile = q_profile(jet, m, &config.t_grid)?;
    let decided_at = (0..config.t_grid.len()).rev().find(|&k| !profile.empty[k]);
    let verdict = match decided_at {
        None => JetVerdict::Pass { vacuous: true },
        Some(k) if profile.q[k] < config.tol => JetVerdict::Pass { vacuous: false },
        Some(k) => JetVerdict::Fail(profile.witnesses[k].clone().expect("non-empty bucket has a witness")),
    };
    Ok(JetCheck {
        m,
        tol: config.tol,
        profile,
        decided_at,
        verdict,
    })
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    // hypot keeps tiny separations (fjord pairs) accurate.
    a.iter().zip(b).fold(0.0, |acc: f64, (x, y)| acc.hypot(x - y))
}
