//! The experiment runner: one function per subcommand, each writing a JSON
//! report and its data files.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use wkit_core::extension::{whitney_decompose, Aabb, BumpSystem, WhitneyExtension};
use wkit_core::geometry::{
    boundary_subset, check_no_narrow_fjords, check_outward_cusps, CuspCheckConfig, CuspConstants, CuspOutcome,
    FjordCheckConfig, FjordOutcome, SampledClosedSet,
};
use wkit_core::jet::functions::Polynomial;
use wkit_core::jet::{jet_of_function, whitney_jet_check, IndexSet, JetCheck, JetField, JetVerdict, RemainderWitness};
use wkit_core::mapping::{submersion_chart_check, SubmersionSetup};
use wkit_core::patching::{
    circle_arc, circle_two_chart, global_extension_operator, restrict_section, seam_jumps, AtlasBundle,
    CircleTrigSection, ExtensionSettings, LocalSectionFamily, SectionEvaluator,
};

use crate::config::{ExperimentConfig, ExperimentKind, Tolerances};
use crate::error::{Result, WkitError};
use crate::formats::atlas::AtlasJson;
use crate::formats::certificate::{CertificateBody, CertificateFile};
use crate::formats::jet::{write_jet_json, write_jet_text};
use crate::formats::tables::{
    decomposition_dump, write_map, write_probes, write_samples, write_section_chart, ProbeRow,
};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// The JSON report of a run. It carries no timestamp, so equal inputs give
/// byte-identical reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub experiment: ExperimentKind,
    pub verdict: Verdict,
    pub seed: u64,
    /// Sampling resolution the verdict holds at.
    pub resolution: Option<f64>,
    pub tolerances: Tolerances,
    pub results: Value,
    /// Data files written next to the report.
    pub files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub report: Report,
    pub report_path: PathBuf,
}

impl RunOutcome {
    /// 0 on PASS, 1 on a failed property.
    pub fn exit_code(&self) -> i32 {
        match self.report.verdict {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
        }
    }
}

/// A JSON number, or a string for non-finite values.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| WkitError::io(dir, e))?;
        Ok(Output {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|e| WkitError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn write_with(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, buf)
    }
}

struct Finding {
    verdict: Verdict,
    resolution: Option<f64>,
    results: Value,
}

fn verdict(pass: bool) -> Verdict {
    if pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Runs one experiment. `out` and `seed` override the config. Configuration
/// problems are returned as errors; any other failure inside the experiment
/// becomes a FAIL report carrying the error message.
pub fn run(kind: ExperimentKind, config: &ExperimentConfig, out: Option<&Path>, seed: Option<u64>) -> Result<RunOutcome> {
    config.validate()?;
    if let Some(k) = config.kind {
        if k != kind {
            return Err(WkitError::Config(format!(
                "config is for {} but {} was requested",
                k.name(),
                kind.name()
            )));
        }
    }
    let seed = seed.unwrap_or(config.seed);
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from("wkit-out"));
    let mut output = Output::new(&dir)?;
    let found = match kind {
        ExperimentKind::GenDomain => gen_domain(config, &mut output),
        ExperimentKind::CheckCusp => check_cusp(config, &mut output),
        ExperimentKind::CheckFjords => check_fjords(config, &mut output),
        ExperimentKind::Extend => extend(config, seed, false, &mut output),
        ExperimentKind::Roundtrip => extend(config, seed, true, &mut output),
        ExperimentKind::Patch => patch(config, seed, &mut output),
        ExperimentKind::Submersion => submersion(config, seed, &mut output),
    };
    let found = match found {
        Ok(f) => f,
        Err(e) if e.is_config() => return Err(e),
        Err(e) => Finding {
            verdict: Verdict::Fail,
            resolution: config.domain.as_ref().map(|d| d.resolution()),
            results: json!({ "error": e.to_string() }),
        },
    };
    let report = Report {
        schema: SCHEMA,
        experiment: kind,
        verdict: found.verdict,
        seed,
        resolution: found.resolution,
        tolerances: config.tolerances.clone(),
        results: found.results,
        files: output.files.clone(),
    };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    let report_path = dir.join("report.json");
    fs::write(&report_path, text).map_err(|e| WkitError::io(&report_path, e))?;
    Ok(RunOutcome { report, report_path })
}

fn gen_domain(config: &ExperimentConfig, out: &mut Output) -> Result<Finding> {
    let spec = config.domain()?;
    let set = spec.build()?;
    let v = set.validate();
    out.write("domain.json", serde_json::to_string_pretty(&spec.resolved())?)?;
    out.write_with("samples.csv", |w| write_samples(w, &set))?;
    Ok(Finding {
        verdict: verdict(v.is_ok()),
        resolution: Some(set.resolution()),
        results: json!({
            "set": set.label(),
            "dimension": set.dim(),
            "boundary_samples": set.boundary_len(),
            "interior_samples": set.interior_len(),
            "regularity_gaps": v.regularity_gaps,
            "problems": v.problems,
        }),
    })
}

fn check_cusp(config: &ExperimentConfig, out: &mut Output) -> Result<Finding> {
    let spec = config.domain()?;
    let set = spec.build()?;
    let c = &config.cusp;
    let cfg = CuspCheckConfig::new(CuspConstants::new(c.epsilon0, c.rho, c.r)?, c.eps_grid.clone(), c.probe_count)?;
    let center = c.center.clone().unwrap_or_else(|| vec![0.0; set.dim()]);
    let k = boundary_subset(&set, c.stride.max(1), &center, c.radius.unwrap_or(f64::INFINITY));
    let outcome = check_outward_cusps(&set, &k, &cfg)?;
    let tested = k.len() / set.dim();
    let results = match &outcome {
        CuspOutcome::Certified(cert) => {
            let file = CertificateFile::new(spec, CertificateBody::OutwardCusps(cert.into()))?;
            out.write("certificate.json", file.to_json()?)?;
            json!({
                "certified": true,
                "boundary_points_tested": tested,
                "witnesses": cert.witnesses.len(),
                "vacuous": cert.vacuous,
                "checksum": file.checksum,
            })
        }
        CuspOutcome::Violated(v) => json!({
            "certified": false,
            "boundary_points_tested": tested,
            "violation": { "z": v.z, "epsilon": v.epsilon, "candidates_tried": v.candidates_tried },
        }),
    };
    Ok(Finding {
        verdict: verdict(outcome.is_certified()),
        resolution: Some(set.resolution()),
        results,
    })
}

/// Boundary samples (every `stride`-th) and interior samples (every
/// `7 stride`-th) within `radius` of `center`, flat.
pub fn neighbourhood(set: &SampledClosedSet, center: &[f64], radius: f64, stride: usize) -> Vec<f64> {
    let near = |p: &[f64]| p.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() <= radius;
    let mut out = Vec::new();
    for i in (0..set.boundary_len()).step_by(stride) {
        if near(set.boundary_point(i)) {
            out.extend_from_slice(set.boundary_point(i));
        }
    }
    for i in (0..set.interior_len()).step_by(stride * 7) {
        if near(set.interior_point(i)) {
            out.extend_from_slice(set.interior_point(i));
        }
    }
    out
}

fn check_fjords(config: &ExperimentConfig, out: &mut Output) -> Result<Finding> {
    let spec = config.domain()?;
    let set = spec.build()?;
    let f = &config.fjord;
    let base = match &f.base {
        Some(b) => b.clone(),
        None if set.interior_len() > 0 => set.interior_point(set.interior_len() / 2).to_vec(),
        None => return Err(WkitError::Config("the set has no interior samples to pick a base from".into())),
    };
    let mut cfg = FjordCheckConfig::new(f.p, f.constant, f.pairs)?;
    if let Some(r) = f.graph_radius {
        cfg = cfg.with_graph_radius(r);
    }
    let k = neighbourhood(&set, &base, f.radius.unwrap_or(f64::INFINITY), f.stride.max(1));
    let outcome = check_no_narrow_fjords(&set, &base, &k, &cfg)?;
    let results = match &outcome {
        FjordOutcome::Certified(cert) => {
            let file = CertificateFile::new(spec, CertificateBody::NoNarrowFjords(cert.into()))?;
            out.write("certificate.json", file.to_json()?)?;
            json!({
                "certified": true,
                "base": base,
                "pairs": cert.paths.len(),
                "graph_nodes": cert.graph_nodes,
                "worst_ratio": num(cert.worst_ratio),
                "checksum": file.checksum,
            })
        }
        FjordOutcome::Violated {
            x,
            y,
            distance,
            length,
            ..
        } => json!({
            "certified": false,
            "base": base,
            "violation": { "x": x, "y": y, "distance": distance, "path_length": num(*length) },
        }),
        FjordOutcome::Disconnected { a, b } => json!({
            "certified": false,
            "base": base,
            "disconnected": { "a": a, "b": b },
        }),
    };
    Ok(Finding {
        verdict: verdict(outcome.is_certified()),
        resolution: Some(set.resolution()),
        results,
    })
}

/// Random polynomial of the given degree, coefficients uniform in `[-1, 1]`.
pub fn random_polynomial(dim: usize, degree: usize, seed: u64) -> Polynomial {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let idx = IndexSet::new(dim, degree);
    Polynomial::new(dim, idx.iter().map(|a| (rng.gen_range(-1.0..1.0), a.clone())).collect())
}

fn witness_json(w: &RemainderWitness) -> Value {
    json!({
        "ratio": num(w.ratio),
        "alpha": w.alpha.entries(),
        "base_point": w.base_point,
        "target_point": w.target_point,
        "distance": w.distance,
    })
}

fn check_json(check: &JetCheck) -> Value {
    let verdict = match &check.verdict {
        JetVerdict::Pass { vacuous } => json!({ "pass": true, "vacuous": vacuous }),
        JetVerdict::Fail(w) => json!({ "pass": false, "witness": witness_json(w) }),
    };
    json!({
        "m": check.m,
        "tol": check.tol,
        "t_grid": check.profile.t_grid,
        "q": check.profile.q.iter().map(|v| num(*v)).collect::<Vec<_>>(),
        "empty": check.profile.empty,
        "decided_at": check.decided_at,
        "verdict": verdict,
    })
}

/// Cell-centre grid with `per_axis` nodes per axis in `bounds`, kept within
/// `reach` of the set.
pub fn probe_grid(set: &SampledClosedSet, bounds: &Aabb, per_axis: usize, reach: f64) -> Vec<f64> {
    let d = bounds.dim();
    let total = per_axis.pow(d as u32);
    let mut out = Vec::new();
    let mut x = vec![0.0; d];
    for mut k in 0..total {
        for (a, xa) in x.iter_mut().enumerate() {
            let i = k % per_axis;
            k /= per_axis;
            *xa = bounds.lo[a] + (bounds.hi[a] - bounds.lo[a]) * (i as f64 + 0.5) / per_axis as f64;
        }
        if set.distance_to_set(&x) <= reach {
            out.extend_from_slice(&x);
        }
    }
    out
}

fn extend(config: &ExperimentConfig, seed: u64, roundtrip: bool, out: &mut Output) -> Result<Finding> {
    let spec = config.domain()?;
    let set = spec.build()?;
    let h = set.resolution();
    let m = config.order;
    let function = config.function()?;
    let source = function.source(set.dim(), seed)?;
    let jet = jet_of_function(source.as_ref(), &set.sample_points(), m, None)?;
    out.write("jet.txt", write_jet_text(&jet))?;
    let check = whitney_jet_check(&jet, m, &config.jet_check.build(h, config.tolerances.jet)?)?;
    let mut results = json!({
        "set": set.label(),
        "samples": jet.len(),
        "order": m,
        "function": function,
        "jet_check": check_json(&check),
    });
    if !check.verdict.is_pass() {
        return Ok(Finding {
            verdict: Verdict::Fail,
            resolution: Some(h),
            results,
        });
    }
    let d = &config.decomposition;
    let bounds = Aabb::around(&set, d.margin)?;
    let decomp = whitney_decompose(&set, &bounds, d.min_side * h, d.max_side, d.budget)?;
    let bumps = BumpSystem::new(&decomp, d.profile.into())?;
    out.write("decomposition.json", serde_json::to_string(&decomposition_dump(&decomp))?)?;
    let ext = WhitneyExtension::new_unchecked(&jet, m, &decomp, &bumps)?;

    let probes = probe_grid(&set, &bounds, config.probes.per_axis, config.probes.reach);
    let mut rows = Vec::with_capacity(probes.len() / set.dim());
    let (mut deviation, mut scale) = (0.0f64, 0.0f64);
    for x in probes.chunks_exact(set.dim()) {
        let v = ext.eval(x)?;
        let exact = source.value(x);
        deviation = deviation.max((v - exact).abs());
        scale = scale.max(exact.abs());
        rows.push(ProbeRow {
            x: x.to_vec(),
            value: v,
            dist_to_set: set.distance_to_set(x),
        });
    }
    out.write_with("probes.csv", |w| write_probes(w, set.dim(), &rows))?;
    results["cubes"] = json!(decomp.len());
    results["probes"] = json!(rows.len());
    results["max_deviation_from_function"] = num(deviation);

    let mut pass = true;
    if roundtrip {
        let defect = restriction_defect(&ext, &jet)?;
        results["restriction_defect"] = num(defect);
        pass &= defect <= config.tolerances.restriction;
        if function.degree().is_some_and(|g| g <= m) {
            let rel = if scale > 0.0 { deviation / scale } else { deviation };
            results["polynomial_relative_error"] = num(rel);
            pass &= rel <= config.tolerances.relative;
        }
    }
    Ok(Finding {
        verdict: verdict(pass),
        resolution: Some(h),
        results,
    })
}

/// `max |Ef(x) - f^0(x)|` over the sample points of the jet.
pub fn restriction_defect(ext: &WhitneyExtension<'_>, jet: &JetField) -> Result<f64> {
    let mut worst = 0.0f64;
    for i in 0..jet.len() {
        worst = worst.max((ext.eval(jet.point(i))? - jet.values_at(i)[0]).abs());
    }
    Ok(worst)
}

/// Random section of the circle's trivial rank-`rank` bundle: `modes`
/// cosines per component with integer frequencies up to `max_frequency`.
pub fn random_circle_section(rng: &mut ChaCha8Rng, rank: usize, modes: usize, max_frequency: u32) -> CircleTrigSection {
    CircleTrigSection {
        components: (0..rank)
            .map(|_| {
                (0..modes)
                    .map(|_| {
                        (
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(0..=max_frequency) as f64,
                            rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                        )
                    })
                    .collect()
            })
            .collect(),
    }
}

/// Per-trial numbers of the circle round trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatchTrial {
    pub restriction_defect: f64,
    pub seam_value_jump: f64,
    pub seam_derivative_jump: f64,
    pub glue_defect: f64,
    pub edge_kink: f64,
}

/// Largest change of one-sided difference slopes of the section, read in a
/// neighbouring chart, across the edges of every chart domain.
pub fn edge_kinks(eval: &SectionEvaluator<'_>, atlas: &AtlasBundle, step: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for (j, chart) in atlas.charts().iter().enumerate() {
        let (lo, hi) = (&chart.domain.lo, &chart.domain.hi);
        let mid: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
        for a in 0..atlas.dim() {
            for edge in [lo[a] + 1e-9, hi[a] - 1e-9] {
                let mut u = mid.clone();
                u[a] = edge;
                let Ok(p) = atlas.locate(j, &u) else { continue };
                for i in p.charts().filter(|&i| i != j) {
                    let ui = p.coords_in(i).expect("chart of the point").to_vec();
                    for b in 0..atlas.dim() {
                        let shifted = |t: f64| {
                            let mut v = ui.clone();
                            v[b] += t;
                            v
                        };
                        let (Ok(plus), Ok(zero), Ok(minus)) =
                            (eval.eval(i, &shifted(step)), eval.eval(i, &ui), eval.eval(i, &shifted(-step)))
                        else {
                            continue;
                        };
                        for c in 0..zero.len() {
                            let kink = ((plus[c] - zero[c]) - (zero[c] - minus[c])).abs() / step;
                            worst = worst.max(kink);
                        }
                    }
                }
            }
        }
    }
    Ok(worst)
}

fn patch(config: &ExperimentConfig, seed: u64, out: &mut Output) -> Result<Finding> {
    let p = &config.patch;
    let atlas = circle_two_chart(p.overlap, p.pou.into(), p.rank)?;
    let arc = circle_arc(&atlas, p.arc_start, p.arc_length, p.arc_spacing)?;
    let grid = atlas.grid_points(p.grid_spacing)?;
    let mut settings = ExtensionSettings::new(config.order, p.min_side, p.max_side);
    settings.glue_tolerance = config.tolerances.glue;
    settings.cutoff_side = p.cutoff_side;
    out.write("atlas.json", serde_json::to_string_pretty(&AtlasJson::from(&atlas))?)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(p.trials);
    for t in 0..p.trials {
        let src = random_circle_section(&mut rng, p.rank, p.modes, p.max_frequency);
        let family = LocalSectionFamily::from_source(&atlas, arc.points().clone(), &src, config.order)?;
        let g = global_extension_operator(&family, &atlas, &arc, &grid, &settings)?;
        let back = restrict_section(&g.glued.section, arc.points())?;
        let mut defect = 0.0f64;
        for i in 0..atlas.len() {
            for (s, &k) in back.chart(i).samples.iter().enumerate() {
                let want = family.order0(i, k).expect("arc sample in chart");
                let got = &back.chart(i).values[s * p.rank..(s + 1) * p.rank];
                defect = got.iter().zip(&want).fold(defect, |m, (a, b)| m.max((a - b).abs()));
            }
        }
        let eval = g.evaluator(&atlas)?;
        let seams = seam_jumps(&eval, &grid, p.seam_step)?;
        let edge_kink = edge_kinks(&eval, &atlas, p.seam_step)?;
        if t == 0 {
            for i in 0..atlas.len() {
                out.write_with(&format!("section_chart{i}.csv"), |w| write_section_chart(w, &g.glued.section, i))?;
            }
        }
        trials.push(PatchTrial {
            restriction_defect: defect,
            seam_value_jump: seams.value_jump,
            seam_derivative_jump: seams.derivative_jump,
            glue_defect: g.glued.output.max_defect,
            edge_kink,
        });
    }
    let max = |f: fn(&PatchTrial) -> f64| trials.iter().map(f).fold(0.0f64, f64::max);
    let restriction = max(|t| t.restriction_defect);
    let seam_value = max(|t| t.seam_value_jump);
    let seam_derivative = max(|t| t.seam_derivative_jump);
    let tol = &config.tolerances;
    let pass = restriction <= tol.restriction && seam_value <= tol.seam && seam_derivative <= tol.seam;
    Ok(Finding {
        verdict: verdict(pass),
        resolution: Some(p.arc_spacing),
        results: json!({
            "trials": p.trials,
            "arc_samples": arc.points().len(),
            "grid_points": grid.len(),
            "restriction_defect_max": num(restriction),
            "seam_value_jump_max": num(seam_value),
            "seam_derivative_jump_max": num(seam_derivative),
            "glue_defect_max": num(max(|t| t.glue_defect)),
            "edge_kink_max": num(max(|t| t.edge_kink)),
            "per_trial": trials,
        }),
    })
}

fn submersion(config: &ExperimentConfig, seed: u64, out: &mut Output) -> Result<Finding> {
    let cfg = config.submersion.build(seed)?;
    let setup = SubmersionSetup::new(cfg.clone())?;
    out.write_with("map.csv", |w| write_map(w, &setup.map))?;
    let rep = submersion_chart_check(&cfg)?;
    let summary = json!({
        "schema": SCHEMA,
        "defect_max": num(rep.defect_max),
        "defect_mean": num(rep.defect_mean),
        "trials": rep.trials,
        "grid_spacing": rep.grid_spacing,
        "seed": seed,
    });
    out.write("submersion.json", serde_json::to_string_pretty(&summary)?)?;
    Ok(Finding {
        verdict: verdict(rep.defect_max <= config.tolerances.diagram),
        resolution: Some(rep.grid_spacing),
        results: json!({
            "defect_max": num(rep.defect_max),
            "defect_mean": num(rep.defect_mean),
            "trials": rep.trials,
            "grid_spacing": rep.grid_spacing,
            "diagram_defect_max": num(rep.diagram_defect_max),
            "right_inverse_defect_max": num(rep.right_inverse_defect_max),
            "arc_nodes": rep.arc_nodes,
            "grid_nodes": rep.grid_nodes,
        }),
    })
}

/// Writes a jet in both formats, e.g. for inspection.
pub fn write_jet_files(jet: &JetField, dir: &Path, stem: &str) -> Result<()> {
    let text = dir.join(format!("{stem}.txt"));
    fs::write(&text, write_jet_text(jet)).map_err(|e| WkitError::io(&text, e))?;
    let js = dir.join(format!("{stem}.json"));
    fs::write(&js, write_jet_json(jet)?).map_err(|e| WkitError::io(&js, e))?;
    Ok(())
}
