//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails. Runtime limits count toward the
//! verdict.

use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wkit::config::ExperimentConfig;
use wkit::run::{neighbourhood, random_polynomial, restriction_defect, run, Verdict};
use wkit::ExperimentKind;
use wkit_core::extension::{
    extend_jet, verify_jet_agreement, whitney_decompose, Aabb, BumpProfile, BumpSystem, WhitneyExtension,
    DEFAULT_CUBE_BUDGET,
};
use wkit_core::geometry::generators::{
    closed_ball, convex_polytope, exp_cusp_domain, exp_cusp_epigraph, half_space, koch_snowflake,
};
use wkit_core::geometry::{
    boundary_subset, check_no_narrow_fjords, check_outward_cusps, replay_cusp_certificate, replay_fjord_certificate,
    transfer_cusp_constants, CuspCheckConfig, CuspConstants, CuspOutcome, FjordCheckConfig, FjordOutcome,
    SampledClosedSet,
};
use wkit_core::jet::functions::{ExpCuspFunction, SinCos, TrigSum};
use wkit_core::jet::{jet_of_function, whitney_jet_check, JetCheckConfig, JetSource, JetVerdict};
use wkit_core::patching::{compatibility_check, mixing_map, model_boxes, Bundle, Gauge, LocalSectionFamily, PouProfile, Stage};

type Check = Result<String, String>;
type Criterion = (&'static str, u64, Box<dyn Fn() -> Check>);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn uniform_probes(rng: &mut ChaCha8Rng, set: &SampledClosedSet, bounds: &Aabb, count: usize, reach: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count * 2);
    while out.len() < count * 2 {
        let x = [
            rng.gen_range(bounds.lo[0]..bounds.hi[0]),
            rng.gen_range(bounds.lo[1]..bounds.hi[1]),
        ];
        if set.distance_to_set(&x) <= reach {
            out.extend_from_slice(&x);
        }
    }
    out
}

fn counterexample() -> Check {
    let h = 2e-3;
    let check = JetCheckConfig::geometric(4.0 * h, 0.04 * h, 5, 0.5).map_err(err)?;
    let cusp = exp_cusp_domain(h, 0.25).map_err(err)?;
    let jet = jet_of_function(&ExpCuspFunction, &cusp.sample_points(), 1, None).map_err(err)?;
    let ratio = match whitney_jet_check(&jet, 1, &check).map_err(err)?.verdict {
        JetVerdict::Fail(w) => w.ratio,
        JetVerdict::Pass { .. } => return Err("exp-cusp jet passed".into()),
    };
    let epi = exp_cusp_epigraph(h, 0.25).map_err(err)?;
    let jet = jet_of_function(&ExpCuspFunction, &epi.sample_points(), 1, None).map_err(err)?;
    let epi_pass = whitney_jet_check(&jet, 1, &check).map_err(err)?.verdict.is_pass();
    ensure(
        (0.99..=1.01).contains(&ratio) && epi_pass,
        format!("witness ratio {ratio:.6}, fjord-free variant passes: {epi_pass}"),
    )
}

fn polynomial_exactness() -> Check {
    let set = closed_ball(2, 1.0, 0.02).map_err(err)?;
    let h = set.resolution();
    let bounds = Aabb::around(&set, 0.6).map_err(err)?;
    let dec = whitney_decompose(&set, &bounds, h / 8.0, 0.5, DEFAULT_CUBE_BUDGET).map_err(err)?;
    let bumps = BumpSystem::new(&dec, BumpProfile::Mollifier).map_err(err)?;
    let check = JetCheckConfig::geometric(4.0 * h, 0.04 * h, 5, 0.5).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let probes = uniform_probes(&mut rng, &set, &bounds, 1000, 0.5);
    let pts = set.sample_points();
    let jobs: Vec<(usize, u64)> = (1..=3usize).flat_map(|m| (0..50u64).map(move |k| (m, k))).collect();
    let next = AtomicUsize::new(0);
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len());
    let worker = || -> Result<(f64, f64), String> {
        let (mut rel, mut defect) = (0.0f64, 0.0f64);
        while let Some(&(m, k)) = jobs.get(next.fetch_add(1, Ordering::Relaxed)) {
            let p = random_polynomial(2, m, 1000 * m as u64 + k);
            let jet = jet_of_function(&p, &pts, m, None).map_err(err)?;
            let ext = extend_jet(&jet, m, &dec, &bumps, &check).map_err(err)?;
            let (mut dev, mut scale) = (0.0f64, 0.0f64);
            for x in probes.chunks_exact(2) {
                let exact = p.value(x);
                dev = dev.max((ext.eval(x).map_err(err)? - exact).abs());
                scale = scale.max(exact.abs());
            }
            rel = rel.max(dev / scale);
            defect = defect.max(restriction_defect(&ext, &jet).map_err(err)?);
        }
        Ok((rel, defect))
    };
    let results: Vec<Result<(f64, f64), String>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..threads).map(|_| s.spawn(worker)).collect();
        handles.into_iter().map(|h| h.join().expect("worker thread")).collect()
    });
    let (mut rel, mut defect) = (0.0f64, 0.0f64);
    for r in results {
        let (a, b) = r?;
        rel = rel.max(a);
        defect = defect.max(b);
    }
    ensure(
        rel <= 5e-3 && defect == 0.0,
        format!("{} polynomials, max relative error {rel:.3e}, restriction defect {defect:e}", jobs.len()),
    )
}

fn linearity() -> Check {
    let set = closed_ball(2, 1.0, 0.05).map_err(err)?;
    let h = set.resolution();
    let bounds = Aabb::around(&set, 0.5).map_err(err)?;
    let dec = whitney_decompose(&set, &bounds, h / 8.0, 0.5, DEFAULT_CUBE_BUDGET).map_err(err)?;
    let bumps = BumpSystem::new(&dec, BumpProfile::Mollifier).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let probes = uniform_probes(&mut rng, &set, &bounds, 200, 0.5);
    let pts = set.sample_points();
    let m = 3;
    let mut worst = 0.0f64;
    for k in 0..100u64 {
        let f = jet_of_function(&random_polynomial(2, 3, 7000 + k), &pts, m, None).map_err(err)?;
        let modes = (0..3)
            .map(|_| {
                let freq = vec![rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
                (rng.gen_range(-1.0..1.0), freq, rng.gen_range(-3.0..3.0))
            })
            .collect();
        let g = jet_of_function(&TrigSum::new(2, modes), &pts, m, None).map_err(err)?;
        let (a, b) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let fg = f.linear_combination(a, &g, b).map_err(err)?;
        let ef = WhitneyExtension::new_unchecked(&f, m, &dec, &bumps).map_err(err)?;
        let eg = WhitneyExtension::new_unchecked(&g, m, &dec, &bumps).map_err(err)?;
        let efg = WhitneyExtension::new_unchecked(&fg, m, &dec, &bumps).map_err(err)?;
        let scale = a.abs() * f.seminorm_abs(m).map_err(err)? + b.abs() * g.seminorm_abs(m).map_err(err)?;
        for x in probes.chunks_exact(2) {
            let lhs = efg.eval(x).map_err(err)?;
            let rhs = a * ef.eval(x).map_err(err)? + b * eg.eval(x).map_err(err)?;
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    ensure(worst <= 1e-10, format!("max normalized defect {worst:.3e}"))
}

fn mixing() -> Check {
    let b = |x0: f64, x1: f64| Aabb::new(vec![x0, -1.2], vec![x1, 1.2]).unwrap();
    let v = |x0: f64, x1: f64| Aabb::new(vec![x0, -1.0], vec![x1, 1.0]).unwrap();
    let gauges = vec![
        Gauge::Rotation { slope: vec![0.7, -0.2], intercept: 0.1 },
        Gauge::Rotation { slope: vec![-1.1, 0.4], intercept: 2.0 },
        Gauge::Rotation { slope: vec![0.3, 0.9], intercept: -0.5 },
    ];
    let atlas = model_boxes(
        vec![(b(-1.2, -0.1), v(-1.0, -0.2)), (b(-0.5, 0.5), v(-0.4, 0.4)), (b(0.1, 1.2), v(0.2, 1.0))],
        vec![vec![1.0, 1.0], vec![2.0, -1.0], vec![0.5, 3.0]],
        vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![-0.3, 0.2]],
        PouProfile::Smooth,
        Bundle::Gauged { rank: 2, gauges },
    )
    .map_err(err)?;
    let pts = Arc::new(atlas.grid_points(0.05).map_err(err)?);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut before, mut after) = (f64::INFINITY, 0.0f64);
    for _ in 0..100 {
        let fam = LocalSectionFamily::from_fn(&atlas, pts.clone(), Stage::Domain, 0, |_, _, _| rng.gen_range(-1.0..1.0));
        before = before.min(compatibility_check(&fam, &atlas, 1e-10).map_err(err)?.max_defect);
        let mixed = mixing_map(&fam, &atlas).map_err(err)?;
        after = after.max(compatibility_check(&mixed, &atlas, 1e-10).map_err(err)?.max_defect);
    }
    ensure(
        after <= 1e-10 && before > 1e-2,
        format!("input defect >= {before:.3e}, mixed defect <= {after:.3e}"),
    )
}

fn circle_round_trip(dir: &std::path::Path) -> Check {
    let mut cfg = ExperimentConfig::default();
    cfg.patch.trials = 20;
    let out = run(ExperimentKind::Patch, &cfg, Some(dir), Some(5)).map_err(err)?;
    let r = &out.report.results;
    let get = |k: &str| r[k].as_f64().ok_or_else(|| format!("missing {k}: {r}"));
    let restriction = get("restriction_defect_max")?;
    let value = get("seam_value_jump_max")?;
    let derivative = get("seam_derivative_jump_max")?;
    let kink = get("edge_kink_max")?;
    ensure(
        out.report.verdict == Verdict::Pass && restriction == 0.0 && value <= 1e-6 && derivative <= 1e-6,
        format!("20 sections: restriction defect {restriction:e}, seam jumps {value:.3e} / {derivative:.3e}, chart-edge kink {kink:.3e}"),
    )
}

fn cusp_verifiers() -> Check {
    let square = vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];
    let sets = [
        half_space(2, 0.02, 1.0),
        closed_ball(2, 1.0, 0.02),
        convex_polytope(square, 0.02),
        convex_polytope(vec![[0.0, 0.0], [1.0, 0.0], [0.3, 0.8]], 0.01),
        koch_snowflake(0, 0.01),
        koch_snowflake(2, 0.01),
        koch_snowflake(4, 0.005),
    ];
    let cusp_cfg =
        CuspCheckConfig::new(CuspConstants::new(0.25, 0.2, 1.0).map_err(err)?, vec![0.2, 0.1, 0.05], 100).map_err(err)?;
    let fjord_cfg = FjordCheckConfig::new(1, 0.1, 120).map_err(err)?;
    let mut certified = 0;
    for set in sets {
        let set = set.map_err(err)?;
        let k = boundary_subset(&set, 5, &[0.0, 0.0], f64::INFINITY);
        match check_outward_cusps(&set, &k, &cusp_cfg).map_err(err)? {
            CuspOutcome::Certified(c) => {
                replay_cusp_certificate(&set, &c).map_err(|i| format!("{}: cusp witness {i} does not replay", set.label()))?
            }
            CuspOutcome::Violated(v) => return Err(format!("{}: outward cusps violated at {:?}", set.label(), v.z)),
        }
        let base = set.interior_point(set.interior_len() / 2).to_vec();
        let k = neighbourhood(&set, &base, 10.0, 3);
        match check_no_narrow_fjords(&set, &base, &k, &fjord_cfg).map_err(err)? {
            FjordOutcome::Certified(c) => {
                replay_fjord_certificate(&set, &c).map_err(|i| format!("{}: fjord path {i} does not replay", set.label()))?
            }
            other => return Err(format!("{}: fjords not certified: {other:?}", set.label())),
        }
        certified += 1;
    }
    let cusp = exp_cusp_domain(2e-3, 0.25).map_err(err)?;
    let k = neighbourhood(&cusp, &[0.0, 0.0], 0.2, 1);
    let mut rejected = 0;
    for p in [1, 2, 4, 6] {
        for d in [1e-6, 1e-3, 0.1, 1.0] {
            let cfg = FjordCheckConfig::new(p, d, 40).map_err(err)?.with_graph_radius(0.24);
            if check_no_narrow_fjords(&cusp, &[0.0, 0.0], &k, &cfg).map_err(err)?.is_certified() {
                return Err(format!("exp cusp certified at p = {p}, D = {d}"));
            }
            rejected += 1;
        }
    }
    Ok(format!("{certified}/7 domains certified for both conditions, exp cusp rejected for {rejected}/16 (p, D)"))
}

fn constant_transfer() -> Check {
    let cc = |e: f64, rho: f64, r: f64| CuspConstants::new(e, rho, r).unwrap();
    let cases = [
        (cc(0.3, 1.0, 2.0), 1.0, 1.0, cc(0.3, 1.0, 2.0)),
        (cc(0.9, 1.0, 3.0), 1.0, 1.0, cc(0.5, 1.0, 3.0)),
        (cc(0.25, 1.0, 2.0), 2.0, 1.0, cc(0.5, 0.125, 2.0)),
        (cc(0.3, 1.0, 2.0), 1.0, 0.5, cc(0.5, 1.0, 8.0)),
    ];
    for (input, c, alpha, want) in cases {
        let got = transfer_cusp_constants(input, c, alpha).map_err(err)?;
        if got != want {
            return Err(format!("transfer({input:?}, {c}, {alpha}) = {got:?}, expected {want:?}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..1000 {
        let input = cc(rng.gen_range(0.01..2.0), 1.0, rng.gen_range(2..7) as f64);
        let got = transfer_cusp_constants(input, 1.0, 1.0).map_err(err)?;
        let want = cc(input.epsilon0.min(0.5), input.rho, input.r);
        if got != want {
            return Err(format!("identity transfer of {input:?} gave {got:?}"));
        }
    }
    Ok("4 hand examples exact, 1000 identity transfers exact".into())
}

fn submersion(dir: &std::path::Path) -> Check {
    let mut cfg = ExperimentConfig::default();
    cfg.submersion.trials = 50;
    cfg.submersion.grid_spacing = 1e-2;
    let out = run(ExperimentKind::Submersion, &cfg, Some(dir), Some(8)).map_err(err)?;
    let r = &out.report.results;
    let defect = r["diagram_defect_max"].as_f64().ok_or_else(|| format!("missing defect: {r}"))?;
    let trials = r["trials"].as_u64().unwrap_or(0);
    ensure(
        defect <= 1e-6 && trials == 50,
        format!("{trials} tangent fields, max diagram defect {defect:.3e}"),
    )
}

fn jet_agreement() -> Check {
    let h = 0.005;
    let set = koch_snowflake(4, h).map_err(err)?;
    let bounds = Aabb::around(&set, 0.15).map_err(err)?;
    let dec = whitney_decompose(&set, &bounds, h / 10.0, 0.25, DEFAULT_CUBE_BUDGET).map_err(err)?;
    let bumps = BumpSystem::new(&dec, BumpProfile::Mollifier).map_err(err)?;
    let jet = jet_of_function(&SinCos, &set.sample_points(), 3, None).map_err(err)?;
    let check = JetCheckConfig::geometric(4.0 * h, 0.04 * h, 5, 0.5).map_err(err)?;
    let ext = extend_jet(&jet, 3, &dec, &bumps, &check).map_err(err)?;
    let n = 200;
    let mut probes = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = [
                bounds.lo[0] + (bounds.hi[0] - bounds.lo[0]) * (i as f64 + 0.37) / n as f64,
                bounds.lo[1] + (bounds.hi[1] - bounds.lo[1]) * (j as f64 + 0.61) / n as f64,
            ];
            let d = set.distance_to_set(&x);
            if d > 0.0 && d <= 0.1 {
                probes.extend_from_slice(&x);
            }
        }
    }
    let report = verify_jet_agreement(&ext, &probes, 3, 1e-4, 50);
    let order = report.decay.order.ok_or("no decay fit")?;
    ensure(
        order >= 2.75 && report.failed_evaluations == 0,
        format!("fitted decay order {order:.3} over {} probes", probes.len() / 2),
    )
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let patch_dir = tmp.path().join("patch");
    let sub_dir = tmp.path().join("submersion");
    let criteria: Vec<Criterion> = vec![
        ("counterexample detection", 5, Box::new(counterexample)),
        ("polynomial exactness", 30, Box::new(polynomial_exactness)),
        ("operator linearity", 30, Box::new(linearity)),
        ("mixing map image", 10, Box::new(mixing)),
        ("circle round trip", 60, Box::new(move || circle_round_trip(&patch_dir))),
        ("cusp verifiers", 120, Box::new(cusp_verifiers)),
        ("constant transfer", 1, Box::new(constant_transfer)),
        ("submersion chart", 120, Box::new(move || submersion(&sub_dir))),
        ("jet agreement decay", 60, Box::new(jet_agreement)),
    ];
    let mut failed = 0;
    for (n, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let (ok, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {}: {} {name}: {detail} [{:.2} s, limit {limit} s]",
            n + 1,
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
