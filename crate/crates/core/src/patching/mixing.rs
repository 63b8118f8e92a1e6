//! Partition-of-unity mixing of a family and gluing of a compatible family.

use alloc::vec::Vec;

use super::atlas::AtlasBundle;
use super::section::{compatibility_check, ChartValues, CompatibilityReport, LocalSectionFamily, Stage};
use crate::{Error, Result};

fn coverage(family: &LocalSectionFamily, chart: usize, k: usize) -> Error {
    let p = &family.points()[k];
    Error::Coverage {
        chart,
        point: p.home_coords().to_vec(),
    }
}

/// Mixes a family on the chart domains into one on the shrunken boxes:
///
/// `h_i = f_i + sum_{j != i} chi_j (Phi_ij f_j - f_i)`,
///
/// which equals `sum_j chi_j Phi_ij f_j` wherever the partition sums to one
/// and reproduces a compatible family exactly at order 0. The output keeps
/// order 0 only.
pub fn mixing_map(family: &LocalSectionFamily, atlas: &AtlasBundle) -> Result<LocalSectionFamily> {
    if family.stage() != Stage::Domain {
        return Err(Error::Config("mixing expects a family on the chart domains".into()));
    }
    if family.chart_count() != atlas.len() || family.rank() != atlas.rank() {
        return Err(Error::Indexing("family does not match the atlas".into()));
    }
    let r = family.rank();
    let points = family.points().clone();
    let mut charts = Vec::with_capacity(atlas.len());
    for i in 0..atlas.len() {
        let mut samples = Vec::new();
        let mut values = Vec::new();
        for &k in &family.chart(i).samples {
            let p = &points[k];
            if !atlas.chart(i).in_shrunk(p.coords_in(i).expect("sample in chart")) {
                continue;
            }
            let fi = family.order0(i, k).ok_or_else(|| coverage(family, i, k))?;
            let mut h = fi.clone();
            for (j, chi) in atlas.pou(p) {
                if j == i || chi == 0.0 {
                    continue;
                }
                let fj = family.order0(j, k).ok_or_else(|| coverage(family, j, k))?;
                let moved = atlas.transport(i, j, p, &fj)?;
                for c in 0..r {
                    h[c] += chi * (moved[c] - fi[c]);
                }
            }
            samples.push(k);
            values.extend_from_slice(&h);
        }
        charts.push(ChartValues { samples, values });
    }
    Ok(LocalSectionFamily::with_parts(Stage::Shrunk, r, 0, 1, points, charts))
}

/// A glued section with its compatibility report.
#[derive(Debug, Clone, PartialEq)]
pub struct GluedSection {
    pub section: LocalSectionFamily,
    /// Input compatibility on the shrunken boxes.
    pub input: CompatibilityReport,
    /// Compatibility of the glued family on the chart domains.
    pub output: CompatibilityReport,
}

/// Glues a compatible family on the shrunken boxes into a family on the
/// chart domains. Each point takes its value from the chart with the largest
/// partition weight (lowest index on ties), transported to every chart
/// holding it. Fails with [`Error::Glue`] when the input overlaps disagree by
/// more than `tolerance`.
pub fn glue(family: &LocalSectionFamily, atlas: &AtlasBundle, tolerance: f64) -> Result<GluedSection> {
    if family.stage() != Stage::Shrunk {
        return Err(Error::Config("gluing expects a family on the shrunken boxes".into()));
    }
    let input = compatibility_check(family, atlas, tolerance)?;
    if !input.passed() {
        let w = input.worst().expect("a failing report has a pair");
        let k = w.worst_point.expect("a failing pair has a sample");
        return Err(Error::Glue {
            chart_a: w.chart_a,
            chart_b: w.chart_b,
            point: family.points()[k].home_coords().to_vec(),
            defect: w.max_defect,
        });
    }
    let points = family.points().clone();
    let mut out = LocalSectionFamily::zeros(atlas, points.clone(), Stage::Domain, 0);
    for (k, p) in points.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (j, chi) in atlas.pou(p) {
            if family.position(j, k).is_some() && best.is_none_or(|b| chi > b.1) {
                best = Some((j, chi));
            }
        }
        let Some((src, _)) = best else {
            return Err(coverage(family, p.home, k));
        };
        let h = family.order0(src, k).expect("source chart holds the point");
        for i in p.charts().collect::<Vec<_>>() {
            let v = atlas.transport(i, src, p, &h)?;
            let s = out.position(i, k).expect("domain stage holds every chart");
            out.set_order0(i, s, &v);
        }
    }
    let output = compatibility_check(&out, atlas, tolerance)?;
    Ok(GluedSection {
        section: out,
        input,
        output,
    })
}
