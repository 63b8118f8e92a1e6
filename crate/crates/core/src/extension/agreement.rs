//! Numerical comparison of an extension with the jet it extends.

use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;

use super::operator::WhitneyExtension;
use crate::jet::{central_difference_step, JetSource, MultiIndex};
use crate::kdtree::{dist, KdTree};

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub m: usize,
    pub step: f64,
    /// `max |d^alpha_h Ef(x) - f^alpha(x)|` per order `|alpha| = 0..=m`.
    pub discrepancy_by_order: Vec<f64>,
    pub max_discrepancy: f64,
    /// Sample point and multi-index of the largest discrepancy.
    pub worst: Option<(Vec<f64>, MultiIndex)>,
    pub points_checked: usize,
    /// Stencil evaluations the extension refused (outside its domain).
    pub failed_evaluations: usize,
    pub decay: DecayFit,
}

/// Fit of `log |Ef(y) - Tay_x^m f(y)|` against `log |y - x|`, with `x` the
/// jet sample nearest to the probe `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Slope of the least-squares line through the per-bin maxima.
    pub order: Option<f64>,
    /// `exp` of the intercept of that line.
    pub constant: Option<f64>,
    /// Slope of the least-squares line through all pairs.
    pub order_all_pairs: Option<f64>,
    pub pairs_used: usize,
    /// Probes with vanishing error or distance, or a refused evaluation.
    pub pairs_skipped: usize,
    /// Largest `|Ef(y) - Tay_x^m f(y)| / |y - x|^m` seen.
    pub max_scaled_error: f64,
}

/// Number of logarithmic bins for the envelope fit.
const DECAY_BINS: usize = 12;

struct Probe<'e, 'a> {
    ext: &'e WhitneyExtension<'a>,
    failures: Cell<usize>,
}

impl JetSource for Probe<'_, '_> {
    fn dim(&self) -> usize {
        self.ext.jet().dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        match self.ext.eval(x) {
            Ok(v) => v,
            Err(_) => {
                self.failures.set(self.failures.get() + 1);
                f64::NAN
            }
        }
    }
}

/// Compares finite differences of `Ef` at the jet samples with index
/// `stride * k` against the jet values, and fits the decay of
/// `Ef - Tay^m f` at the given probes (flat). Always produces a report.
pub fn verify_jet_agreement(ext: &WhitneyExtension<'_>, probes: &[f64], m: usize, step: f64, stride: usize) -> AgreementReport {
    let jet = ext.jet();
    let m = m.min(ext.order());
    let idx = jet.indices();
    let count = idx.count_up_to(m);
    let probe = Probe {
        ext,
        failures: Cell::new(0),
    };
    let mut by_order = vec![0.0f64; m + 1];
    let mut worst: Option<(Vec<f64>, MultiIndex)> = None;
    let mut max = 0.0f64;
    let mut checked = 0;
    for i in (0..jet.len()).step_by(stride.max(1)) {
        let x = jet.point(i);
        let vals = jet.values_at(i);
        checked += 1;
        for k in 0..count {
            let alpha = idx.get(k);
            let fd = if k == 0 {
                probe.value(x)
            } else {
                central_difference_step(&probe, alpha, x, step)
            };
            let err = (fd - vals[k]).abs();
            if !err.is_finite() {
                continue;
            }
            let o = alpha.order();
            by_order[o] = by_order[o].max(err);
            if err > max || worst.is_none() {
                max = max.max(err);
                worst = Some((x.to_vec(), alpha.clone()));
            }
        }
    }

    let decay = fit_decay(ext, probes, m);
    AgreementReport {
        m,
        step,
        discrepancy_by_order: by_order,
        max_discrepancy: max,
        worst,
        points_checked: checked,
        failed_evaluations: probe.failures.get(),
        decay,
    }
}

fn fit_decay(ext: &WhitneyExtension<'_>, probes: &[f64], m: usize) -> DecayFit {
    let jet = ext.jet();
    let d = jet.dim();
    let tree = KdTree::new(d, jet.points_flat().to_vec());
    let mut logs = Vec::new();
    let mut skipped = 0;
    let mut max_scaled = 0.0f64;
    for y in probes.chunks_exact(d) {
        let Some((i, _)) = tree.nearest(y) else {
            skipped += 1;
            continue;
        };
        let r = dist(jet.point(i), y);
        let Ok(ef) = ext.eval(y) else {
            skipped += 1;
            continue;
        };
        let err = (ef - jet.taylor_unchecked(i, m, y)).abs();
        if !(r > 0.0 && err > 0.0) {
            skipped += 1;
            continue;
        }
        max_scaled = max_scaled.max(err / r.powi(m as i32));
        logs.push((r.ln(), err.ln()));
    }
    let order_all = least_squares(&logs).map(|l| l.0);
    let envelope = bin_maxima(&logs, DECAY_BINS);
    let env = least_squares(&envelope);
    DecayFit {
        order: env.map(|l| l.0),
        constant: env.map(|l| l.1.exp()),
        order_all_pairs: order_all,
        pairs_used: logs.len(),
        pairs_skipped: skipped,
        max_scaled_error: max_scaled,
    }
}

/// Largest `y` in each of `bins` equal-width bins of `x`, placed at that
/// pair's `x`.
fn bin_maxima(pts: &[(f64, f64)], bins: usize) -> Vec<(f64, f64)> {
    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Vec::new();
    }
    let width = (hi - lo) / bins as f64;
    let mut best: Vec<Option<(f64, f64)>> = vec![None; bins];
    for &(x, y) in pts {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        if best[b].is_none_or(|p| y > p.1) {
            best[b] = Some((x, y));
        }
    }
    best.into_iter().flatten().collect()
}

/// Slope and intercept of the least-squares line; `None` for fewer than two
/// distinct abscissae.
fn least_squares(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}
