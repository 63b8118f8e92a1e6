use wkit_core::extension::*;
use wkit_core::geometry::generators::{closed_ball, koch_snowflake};
use wkit_core::geometry::SampledClosedSet;
use wkit_core::jet::functions::{Polynomial, SinCos};
use wkit_core::jet::{jet_of_function, JetCheckConfig, JetField, JetSource, MultiIndex};

fn operator(set: &SampledClosedSet, margin: f64, min_side: f64) -> (WhitneyDecomposition, BumpSystem) {
    let bounds = Aabb::around(set, margin).unwrap();
    let dec = whitney_decompose(set, &bounds, min_side, 0.25, DEFAULT_CUBE_BUDGET).unwrap();
    let bumps = BumpSystem::new(&dec, BumpProfile::Mollifier).unwrap();
    (dec, bumps)
}

fn band_probes(set: &SampledClosedSet, lo: [f64; 2], hi: [f64; 2], n: usize, reach: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = [
                lo[0] + (hi[0] - lo[0]) * (i as f64 + 0.37) / n as f64,
                lo[1] + (hi[1] - lo[1]) * (j as f64 + 0.61) / n as f64,
            ];
            let d = set.distance_to_set(&x);
            if d > 0.0 && d <= reach {
                out.extend_from_slice(&x);
            }
        }
    }
    out
}

#[test]
fn koch_sin_cos_remainder_decays_at_order_three() {
    let h = 0.005;
    let set = koch_snowflake(4, h).unwrap();
    let (dec, bumps) = operator(&set, 0.15, h / 10.0);
    let jet = jet_of_function(&SinCos, &set.sample_points(), 3, None).unwrap();
    let check = JetCheckConfig::geometric(4.0 * h, 0.04 * h, 5, 0.5).unwrap();
    let ext = extend_jet(&jet, 3, &dec, &bumps, &check).unwrap();
    let b = &dec.bounds;
    let probes = band_probes(&set, [b.lo[0], b.lo[1]], [b.hi[0], b.hi[1]], 200, 0.1);
    let report = verify_jet_agreement(&ext, &probes, 3, 1e-4, 50);
    let order = report.decay.order.unwrap();
    assert!(order >= 2.75, "decay order {order}");
    assert_eq!(report.failed_evaluations, 0);

    // Closed-form oracle: |Ef - g| <= C dist^3 with C <= 10.
    let mut worst = 0.0f64;
    for x in probes.chunks_exact(2) {
        let d = set.distance_to_set(x);
        worst = worst.max((ext.eval(x).unwrap() - SinCos.value(x)).abs() / d.powi(3));
    }
    assert!(worst <= 10.0, "constant {worst}");
}

#[test]
fn polynomial_jets_agree_with_finite_differences() {
    let set = closed_ball(2, 1.0, 0.05).unwrap();
    let (dec, bumps) = operator(&set, 0.5, 0.05 / 8.0);
    let mi = |a, b| MultiIndex::new(vec![a, b]);
    let p = Polynomial::new(
        2,
        vec![(0.5, mi(0, 0)), (-1.0, mi(1, 0)), (0.25, mi(1, 1)), (0.7, mi(3, 0)), (-0.4, mi(1, 2))],
    );
    let jet = jet_of_function(&p, &set.sample_points(), 3, None).unwrap();
    let check = JetCheckConfig::geometric(0.2, 0.002, 5, 0.5).unwrap();
    let ext = extend_jet(&jet, 3, &dec, &bumps, &check).unwrap();
    let probes = band_probes(&set, [-1.4, -1.4], [1.4, 1.4], 60, 0.3);
    let report = verify_jet_agreement(&ext, &probes, 3, 1e-4, 7);
    assert!(report.max_discrepancy <= 1e-6, "{report:?}");
    assert!(report.points_checked > 100);
}

#[test]
fn zero_jet_has_no_discrepancy() {
    let set = closed_ball(2, 1.0, 0.1).unwrap();
    let (dec, bumps) = operator(&set, 0.5, 0.1 / 8.0);
    let jet = JetField::zeros(2, 2, set.sample_points()).unwrap();
    let ext = WhitneyExtension::new_unchecked(&jet, 2, &dec, &bumps).unwrap();
    let probes = band_probes(&set, [-1.4, -1.4], [1.4, 1.4], 30, 0.3);
    let report = verify_jet_agreement(&ext, &probes, 2, 1e-4, 1);
    assert_eq!(report.max_discrepancy, 0.0);
    assert_eq!(report.decay.pairs_used, 0);
    assert!(report.decay.order.is_none());
}
