//! Jet fields as text lines and as JSON.
//!
//! Text: an optional header `# jet order <m> dimension <d>`, then one line per
//! sample point,
//!
//! ```text
//! x_1 ... x_d | a_1,...,a_d: value a_1,...,a_d: value ...
//! ```
//!
//! with every multi-index of order at most `m` present once. Numbers are
//! printed with 17 significant digits, so parsing reproduces every bit.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use wkit_core::jet::{IndexSet, JetField, MultiIndex};

use crate::error::{Result, WkitError};

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn alpha_token(alpha: &MultiIndex) -> String {
    let parts: Vec<String> = alpha.entries().iter().map(|a| a.to_string()).collect();
    format!("{}:", parts.join(","))
}

pub fn write_jet_text(jet: &JetField) -> String {
    let mut out = format!("# jet order {} dimension {}\n", jet.order(), jet.dim());
    let tokens: Vec<String> = jet.indices().iter().map(alpha_token).collect();
    for i in 0..jet.len() {
        let coords: Vec<String> = jet.point(i).iter().map(|x| fmt_f64(*x)).collect();
        out.push_str(&coords.join(" "));
        out.push_str(" |");
        for (tok, v) in tokens.iter().zip(jet.values_at(i)) {
            let _ = write!(out, " {tok} {}", fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, message: impl Into<String>) -> WkitError {
    WkitError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64(line: usize, tok: &str) -> Result<f64> {
    tok.parse().map_err(|_| parse_err(line, format!("not a number: {tok:?}")))
}

fn parse_header(line: usize, text: &str) -> Result<Option<(usize, usize)>> {
    let words: Vec<&str> = text.trim_start_matches('#').split_whitespace().collect();
    match words.as_slice() {
        ["jet", "order", m, "dimension", d] => {
            let m = m.parse().map_err(|_| parse_err(line, "bad order in header"))?;
            let d = d.parse().map_err(|_| parse_err(line, "bad dimension in header"))?;
            Ok(Some((m, d)))
        }
        _ => Ok(None),
    }
}

struct Row {
    line: usize,
    point: Vec<f64>,
    entries: Vec<(MultiIndex, f64)>,
}

fn parse_row(line: usize, text: &str) -> Result<Row> {
    let (left, right) = text.split_once('|').ok_or_else(|| parse_err(line, "missing '|'"))?;
    let point = left.split_whitespace().map(|t| parse_f64(line, t)).collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    let mut toks = right.split_whitespace();
    while let Some(tok) = toks.next() {
        let alpha = tok
            .strip_suffix(':')
            .ok_or_else(|| parse_err(line, format!("expected a multi-index, got {tok:?}")))?;
        let alpha = alpha
            .split(',')
            .map(|a| a.parse::<u32>().map_err(|_| parse_err(line, format!("bad multi-index {tok:?}"))))
            .collect::<Result<Vec<_>>>()?;
        let value = toks.next().ok_or_else(|| parse_err(line, format!("missing value after {tok}")))?;
        entries.push((MultiIndex::new(alpha), parse_f64(line, value)?));
    }
    Ok(Row { line, point, entries })
}

/// Parses the text format. Without a header the dimension comes from the
/// first row and the order from its largest multi-index.
pub fn parse_jet_text(text: &str) -> Result<JetField> {
    let mut header = None;
    let mut rows = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if t.starts_with('#') {
            if header.is_none() && rows.is_empty() {
                header = parse_header(line, t)?;
            }
            continue;
        }
        rows.push(parse_row(line, t)?);
    }
    let (order, dim) = match header {
        Some(h) => h,
        None => {
            let first = rows.first().ok_or_else(|| parse_err(0, "no header and no rows"))?;
            let order = first.entries.iter().map(|(a, _)| a.order()).max().unwrap_or(0);
            (order, first.point.len())
        }
    };
    let idx = IndexSet::new(dim, order);
    let mut points = Vec::with_capacity(rows.len() * dim);
    let mut values = vec![0.0; rows.len() * idx.len()];
    for (i, row) in rows.iter().enumerate() {
        if row.point.len() != dim {
            return Err(parse_err(row.line, format!("expected {dim} coordinates, got {}", row.point.len())));
        }
        let mut seen = vec![false; idx.len()];
        for (alpha, v) in &row.entries {
            let pos = (alpha.dim() == dim)
                .then(|| idx.position(alpha))
                .flatten()
                .ok_or_else(|| parse_err(row.line, format!("multi-index {alpha:?} outside order {order}")))?;
            if std::mem::replace(&mut seen[pos], true) {
                return Err(parse_err(row.line, format!("multi-index {alpha:?} repeated")));
            }
            values[i * idx.len() + pos] = *v;
        }
        if row.entries.len() != idx.len() {
            return Err(parse_err(row.line, format!("expected {} jet entries, got {}", idx.len(), row.entries.len())));
        }
        points.extend_from_slice(&row.point);
    }
    Ok(JetField::from_flat(order, dim, points, values)?)
}

/// JSON form of a jet field. `indices` lists the multi-indices in the order
/// of each `values` row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetFieldJson {
    pub order: usize,
    pub dimension: usize,
    #[serde(default)]
    pub indices: Vec<Vec<u32>>,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl From<&JetField> for JetFieldJson {
    fn from(jet: &JetField) -> Self {
        JetFieldJson {
            order: jet.order(),
            dimension: jet.dim(),
            indices: jet.indices().iter().map(|a| a.entries().to_vec()).collect(),
            points: (0..jet.len()).map(|i| jet.point(i).to_vec()).collect(),
            values: (0..jet.len()).map(|i| jet.values_at(i).to_vec()).collect(),
        }
    }
}

impl TryFrom<JetFieldJson> for JetField {
    type Error = WkitError;

    fn try_from(j: JetFieldJson) -> Result<JetField> {
        if !j.indices.is_empty() {
            let idx = IndexSet::new(j.dimension, j.order);
            let expected: Vec<Vec<u32>> = idx.iter().map(|a| a.entries().to_vec()).collect();
            if j.indices != expected {
                return Err(WkitError::Config("jet indices are not in graded order".into()));
            }
        }
        Ok(JetField::new(j.order, j.dimension, j.points, j.values)?)
    }
}

pub fn write_jet_json(jet: &JetField) -> Result<String> {
    Ok(serde_json::to_string_pretty(&JetFieldJson::from(jet))?)
}

pub fn parse_jet_json(text: &str) -> Result<JetField> {
    let j: JetFieldJson = serde_json::from_str(text)?;
    JetField::try_from(j)
}
