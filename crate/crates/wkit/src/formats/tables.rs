//! CSV data files and the decomposition dump. Column layouts are listed in
//! the README.

use std::io::Write;

use serde::{Deserialize, Serialize};
use wkit_core::extension::WhitneyDecomposition;
use wkit_core::geometry::{SampleKind, SampledClosedSet};
use wkit_core::mapping::MapGridFunction;
use wkit_core::patching::LocalSectionFamily;

use super::jet::fmt_f64;
use crate::error::Result;

fn numbered(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |k| format!("{prefix}{k}"))
}

/// One evaluation of an extension.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub x: Vec<f64>,
    pub value: f64,
    pub dist_to_set: f64,
}

/// Columns `x1..xd, ef, dist_to_c`.
pub fn write_probes<W: Write>(out: W, dim: usize, rows: &[ProbeRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = numbered("x", dim).chain(["ef".into(), "dist_to_c".into()]).collect();
    w.write_record(&header)?;
    for r in rows {
        let rec: Vec<String> = r.x.iter().chain([&r.value, &r.dist_to_set]).map(|v| fmt_f64(*v)).collect();
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads a probe file back.
pub fn read_probes<R: std::io::Read>(input: R) -> Result<Vec<ProbeRow>> {
    let mut r = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| crate::error::WkitError::Config(format!("probe csv: {e}")))?;
        let d = vals.len().saturating_sub(2);
        rows.push(ProbeRow {
            x: vals[..d].to_vec(),
            value: vals[d],
            dist_to_set: vals[d + 1],
        });
    }
    Ok(rows)
}

/// Columns `x1..xd, kind` with kind `boundary` or `interior`.
pub fn write_samples<W: Write>(out: W, set: &SampledClosedSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = numbered("x", set.dim()).chain(["kind".into()]).collect();
    w.write_record(&header)?;
    for i in 0..set.sample_len() {
        let (p, kind) = match set.sample_kind(i) {
            SampleKind::Boundary => (set.boundary_point(i), "boundary"),
            SampleKind::Interior => (set.interior_point(i - set.boundary_len()), "interior"),
        };
        let rec: Vec<String> = p.iter().map(|v| fmt_f64(*v)).chain([kind.to_string()]).collect();
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Columns `point, u1..ud, v1..vr`: the order-0 values of one chart of a
/// section family, in chart coordinates.
pub fn write_section_chart<W: Write>(out: W, family: &LocalSectionFamily, chart: usize) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let values = family.chart(chart);
    let dim = family
        .points()
        .first()
        .map_or(0, |p| p.home_coords().len());
    let header: Vec<String> = ["point".to_string()]
        .into_iter()
        .chain(numbered("u", dim))
        .chain(numbered("v", family.rank()))
        .collect();
    w.write_record(&header)?;
    for &k in &values.samples {
        let u = family.points()[k].coords_in(chart).expect("chart sample has coordinates");
        let v = family.order0(chart, k).expect("chart sample has a value");
        let rec: Vec<String> = [k.to_string()]
            .into_iter()
            .chain(u.iter().chain(&v).map(|x| fmt_f64(*x)))
            .collect();
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Columns `s1..sk, y1..yn`: node coordinates in the source, value in the
/// ambient coordinates of the target.
pub fn write_map<W: Write>(out: W, map: &MapGridFunction) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = map.target().ambient();
    let header: Vec<String> = numbered("s", map.source_dim()).chain(numbered("y", n)).collect();
    w.write_record(&header)?;
    for k in 0..map.len() {
        let rec: Vec<String> = map.node(k).iter().chain(map.value(k)).map(|v| fmt_f64(*v)).collect();
        w.write_record(&rec)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// One cube of a decomposition dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeJson {
    pub center: Vec<f64>,
    pub side: f64,
    pub anchor: Vec<f64>,
}

pub fn decomposition_dump(decomp: &WhitneyDecomposition) -> Vec<CubeJson> {
    decomp
        .cubes
        .iter()
        .map(|c| CubeJson {
            center: c.center.clone(),
            side: c.side,
            anchor: c.anchor.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use wkit_core::geometry::generators::closed_ball;

    #[test]
    fn probe_rows_round_trip() {
        let rows = vec![
            ProbeRow {
                x: vec![0.1, -2.0 / 3.0],
                value: 1e-300,
                dist_to_set: 0.25,
            },
            ProbeRow {
                x: vec![-0.0, 5.0],
                value: -3.5,
                dist_to_set: 0.0,
            },
        ];
        let mut buf = Vec::new();
        write_probes(&mut buf, 2, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,ef,dist_to_c\n"));
        let back = read_probes(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert_eq!(back[1].x[0].to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn sample_file_tags_kinds() {
        let set = closed_ball(2, 1.0, 0.25).unwrap();
        let mut buf = Vec::new();
        write_samples(&mut buf, &set).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + set.sample_len());
        assert_eq!(text.lines().filter(|l| l.ends_with(",boundary")).count(), set.boundary_len());
    }
}
