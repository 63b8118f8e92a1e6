//! Whitney extension of a finite-order jet: Taylor polynomials at cube
//! anchors blended by the bump partition of unity.

use alloc::boxed::Box;
use alloc::vec::Vec;

use super::bumps::BumpSystem;
use super::decomposition::WhitneyDecomposition;
use crate::jet::{whitney_jet_check, JetCheck, JetCheckConfig, JetField, JetVerdict};
use crate::kdtree::KdTree;
use crate::{Error, Result};

/// Which formula produced a value of the extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// The point lies in the set: Taylor polynomial at the nearest sample.
    Member,
    /// Blend over the cubes whose support holds the point.
    Blend,
    /// Outside the set but below the smallest cubes: nearest-sample Taylor
    /// polynomial.
    Collar,
}

/// The extension `Ef` of a jet; evaluate with [`eval`](Self::eval).
#[derive(Debug)]
pub struct WhitneyExtension<'a> {
    jet: &'a JetField,
    decomp: &'a WhitneyDecomposition,
    bumps: &'a BumpSystem,
    m: usize,
    anchors: Vec<usize>,
    samples: KdTree,
    check: Option<JetCheck>,
}

/// Builds `Ef` after running the sampled Whitney-jet test at order `m`; a
/// failing jet is refused with its witness.
pub fn extend_jet<'a>(
    jet: &'a JetField,
    m: usize,
    decomp: &'a WhitneyDecomposition,
    bumps: &'a BumpSystem,
    check: &JetCheckConfig,
) -> Result<WhitneyExtension<'a>> {
    let outcome = whitney_jet_check(jet, m, check)?;
    if let JetVerdict::Fail(w) = &outcome.verdict {
        return Err(Error::NotWhitneyJet(Box::new(w.clone())));
    }
    let mut ext = WhitneyExtension::new_unchecked(jet, m, decomp, bumps)?;
    ext.check = Some(outcome);
    Ok(ext)
}

impl<'a> WhitneyExtension<'a> {
    /// Builds `Ef` without the Whitney-jet test. Every cube anchor must be a
    /// sample point of the jet.
    pub fn new_unchecked(
        jet: &'a JetField,
        m: usize,
        decomp: &'a WhitneyDecomposition,
        bumps: &'a BumpSystem,
    ) -> Result<Self> {
        if m > jet.order() {
            return Err(Error::Order {
                requested: m,
                available: jet.order(),
            });
        }
        if jet.dim() != decomp.dim() {
            return Err(Error::Config("jet and decomposition dimensions differ".into()));
        }
        if bumps.len() != decomp.len() {
            return Err(Error::Config("bump system was built for another decomposition".into()));
        }
        if jet.is_empty() {
            return Err(Error::EmptyInput("jet has no sample points".into()));
        }
        let samples = KdTree::new(jet.dim(), jet.points_flat().to_vec());
        let mut anchors = Vec::with_capacity(decomp.len());
        for q in &decomp.cubes {
            match samples.nearest(&q.anchor) {
                Some((i, d)) if d <= 0.0 => anchors.push(i),
                _ => return Err(Error::MissingPoint(q.anchor.clone())),
            }
        }
        Ok(Self {
            jet,
            decomp,
            bumps,
            m,
            anchors,
            samples,
            check: None,
        })
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn jet(&self) -> &JetField {
        self.jet
    }

    pub fn decomposition(&self) -> &WhitneyDecomposition {
        self.decomp
    }

    /// Result of the Whitney-jet test run at construction, if any.
    pub fn jet_check(&self) -> Option<&JetCheck> {
        self.check.as_ref()
    }

    /// Jet sample index anchoring cube `q`.
    pub fn anchor_of(&self, q: usize) -> usize {
        self.anchors[q]
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.eval_with_branch(x).map(|v| v.0)
    }

    pub fn eval_with_branch(&self, x: &[f64]) -> Result<(f64, Branch)> {
        let mut w = Vec::new();
        self.eval_into(x, &mut w)
    }

    /// [`eval_with_branch`](Self::eval_with_branch) reusing a scratch buffer.
    pub fn eval_into(&self, x: &[f64], scratch: &mut Vec<(usize, f64)>) -> Result<(f64, Branch)> {
        if x.len() != self.jet.dim() {
            return Err(Error::Argument("point dimension does not match the jet".into()));
        }
        if self.decomp.oracle().contains(x) {
            return Ok((self.nearest_taylor(x), Branch::Member));
        }
        if !self.decomp.bounds.contains(x) {
            return Err(Error::Domain { point: x.to_vec() });
        }
        self.bumps.bumps_at(x, scratch);
        let total: f64 = scratch.iter().map(|e| e.1).sum();
        if !(total > 0.0) {
            return Ok((self.nearest_taylor(x), Branch::Collar));
        }
        let mut acc = 0.0;
        for &(q, phi) in scratch.iter() {
            acc += phi * self.jet.taylor_unchecked(self.anchors[q], self.m, x);
        }
        Ok((acc / total, Branch::Blend))
    }

    fn nearest_taylor(&self, x: &[f64]) -> f64 {
        let (i, _) = self.samples.nearest(x).expect("jet is non-empty");
        self.jet.taylor_unchecked(i, self.m, x)
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::jet::functions::Polynomial;
    use crate::jet::{jet_of_function, JetSource, MultiIndex};
    use alloc::vec;

    fn mi(a: u32, b: u32) -> MultiIndex {
        MultiIndex::new(vec![a, b])
    }

    #[test]
    fn zero_jet_extends_to_zero() {
        let d = disk(0.05);
        let jet = JetField::zeros(2, 2, d.set.sample_points()).unwrap();
        let ext = extend_jet(&jet, 2, &d.decomp, &d.bumps, &check(0.05)).unwrap();
        for x in probes(&d.set, 40, 0.6).chunks_exact(2) {
            assert_eq!(ext.eval(x).unwrap(), 0.0);
        }
    }

    #[test]
    fn affine_polynomial_is_reproduced() {
        // p(u, v) = 1 + u - v, compared with direct evaluation.
        let d = disk(0.05);
        let p = Polynomial::new(2, vec![(1.0, mi(0, 0)), (1.0, mi(1, 0)), (-1.0, mi(0, 1))]);
        let jet = jet_of_function(&p, &d.set.sample_points(), 1, None).unwrap();
        let ext = extend_jet(&jet, 1, &d.decomp, &d.bumps, &check(0.05)).unwrap();
        let mut branches = [0usize; 3];
        for x in probes(&d.set, 50, 0.5).chunks_exact(2) {
            let (v, b) = ext.eval_with_branch(x).unwrap();
            branches[b as usize] += 1;
            assert!((v - (1.0 + x[0] - x[1])).abs() <= 5e-3, "{v} at {x:?}");
        }
        assert!(branches[Branch::Member as usize] > 100 && branches[Branch::Blend as usize] > 100);
    }

    #[test]
    fn restriction_identity_is_exact() {
        let d = disk(0.05);
        let p = Polynomial::new(2, vec![(0.3, mi(2, 1)), (-1.7, mi(0, 1)), (2.0, mi(0, 0))]);
        let jet = jet_of_function(&p, &d.set.sample_points(), 3, None).unwrap();
        let ext = extend_jet(&jet, 3, &d.decomp, &d.bumps, &check(0.05)).unwrap();
        for i in 0..jet.len() {
            assert_eq!(ext.eval(jet.point(i)).unwrap(), jet.values_at(i)[0]);
        }
    }

    #[test]
    fn outside_the_box_is_a_domain_error() {
        let d = disk(0.1);
        let jet = JetField::zeros(1, 2, d.set.sample_points()).unwrap();
        let ext = extend_jet(&jet, 1, &d.decomp, &d.bumps, &check(0.1)).unwrap();
        assert!(matches!(ext.eval(&[3.0, 0.0]), Err(Error::Domain { .. })));
        assert_eq!(ext.eval_with_branch(&[0.0, 0.0]).unwrap().1, Branch::Member);
    }

    #[test]
    fn non_whitney_jet_is_refused_with_witness() {
        // f^0 jumps across u = 0 while the first derivatives vanish.
        let d = disk(0.05);
        let pts = d.set.sample_points();
        let values: Vec<f64> = pts
            .chunks_exact(2)
            .flat_map(|p| [if p[0] > 0.0 { 1.0 } else { 0.0 }, 0.0, 0.0])
            .collect();
        let jet = JetField::from_flat(1, 2, pts, values).unwrap();
        let err = extend_jet(&jet, 1, &d.decomp, &d.bumps, &check(0.05)).unwrap_err();
        let Error::NotWhitneyJet(w) = err else { panic!("{err:?}") };
        assert!(w.base_point[0] * w.target_point[0] <= 0.0, "{w:?}");
        assert!(w.ratio > 0.5);
    }

    #[test]
    fn anchors_must_be_jet_samples() {
        let d = disk(0.1);
        let jet = JetField::zeros(1, 2, vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            WhitneyExtension::new_unchecked(&jet, 1, &d.decomp, &d.bumps),
            Err(Error::MissingPoint(_))
        ));
    }

    #[test]
    fn evaluation_only_sees_nearby_samples() {
        let d = disk(0.05);
        let g = crate::jet::functions::SinCos;
        let jet = jet_of_function(&g, &d.set.sample_points(), 2, None).unwrap();
        let ext = WhitneyExtension::new_unchecked(&jet, 2, &d.decomp, &d.bumps).unwrap();
        let mut w = Vec::new();
        for x in [[1.03, 0.1], [-0.2, 1.02], [0.72, -0.72]] {
            let (before, branch) = ext.eval_into(&x, &mut w).unwrap();
            assert_eq!(branch, Branch::Blend);
            let dist = d.set.distance_to_set(&x);
            let anchor = jet.point(ext.samples.nearest(&x).unwrap().0).to_vec();
            let mut moved = jet.clone();
            let mut changed = 0;
            for i in 0..jet.len() {
                if crate::kdtree::dist(jet.point(i), &anchor) > 10.0 * dist {
                    for k in 0..jet.indices().len() {
                        moved.set_value(i, &jet.indices().get(k).clone(), 1e3 + g.value(&x)).unwrap();
                    }
                    changed += 1;
                }
            }
            assert!(changed > 0);
            let after = WhitneyExtension::new_unchecked(&moved, 2, &d.decomp, &d.bumps).unwrap().eval(&x).unwrap();
            assert_eq!(before, after);
        }
    }

    #[test]
    fn refinement_keeps_values_stable() {
        use crate::extension::{whitney_decompose, BumpProfile, DEFAULT_CUBE_BUDGET};
        let d = disk(0.05);
        let g = crate::jet::functions::SinCos;
        let jet = jet_of_function(&g, &d.set.sample_points(), 2, None).unwrap();
        let coarse = WhitneyExtension::new_unchecked(&jet, 2, &d.decomp, &d.bumps).unwrap();
        let fine_dec =
            whitney_decompose(&d.set, &d.decomp.bounds, d.decomp.min_side / 2.0, 0.5, DEFAULT_CUBE_BUDGET).unwrap();
        let fine_bumps = BumpSystem::new(&fine_dec, BumpProfile::Mollifier).unwrap();
        let fine = WhitneyExtension::new_unchecked(&jet, 2, &fine_dec, &fine_bumps).unwrap();
        let mut worst = 0.0f64;
        for x in probes(&d.set, 60, 0.3).chunks_exact(2) {
            worst = worst.max((coarse.eval(x).unwrap() - fine.eval(x).unwrap()).abs());
        }
        assert!(worst <= 1e-3, "refinement moved Ef by {worst}");
    }
}
