use alloc::format;
use alloc::vec::Vec;

use super::multi_index::{powi, IndexSet, MultiIndex};
use crate::{Error, Result};

/// A Whitney jet of finite order `m` sampled on a finite subset of `R^d`:
/// for every sample point `x` and every `|alpha| <= m` a value `f^alpha(x)`.
///
/// Values are stored per point in the graded order of [`IndexSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct JetField {
    indices: IndexSet,
    points: Vec<f64>,
    values: Vec<f64>,
}

impl JetField {
    /// Builds a jet from per-point coordinates and per-point value arrays.
    pub fn new(order: usize, dim: usize, points: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Result<Self> {
        let indices = IndexSet::new(dim, order);
        if points.len() != values.len() {
            return Err(Error::Config(format!(
                "{} points but {} value rows",
                points.len(),
                values.len()
            )));
        }
        let mut flat_p = Vec::with_capacity(points.len() * dim);
        let mut flat_v = Vec::with_capacity(points.len() * indices.len());
        for (p, v) in points.iter().zip(&values) {
            if p.len() != dim {
                return Err(Error::Config(format!("point {p:?} does not have dimension {dim}")));
            }
            if v.len() != indices.len() {
                return Err(Error::Config(format!(
                    "point {p:?} carries {} values, expected {}",
                    v.len(),
                    indices.len()
                )));
            }
            flat_p.extend_from_slice(p);
            flat_v.extend_from_slice(v);
        }
        Self::from_flat(order, dim, flat_p, flat_v)
    }

    /// Builds a jet from flat arrays (`n * dim` coordinates and
    /// `n * C(m + d, d)` values).
    pub fn from_flat(order: usize, dim: usize, points: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("jet dimension must be positive".into()));
        }
        let indices = IndexSet::new(dim, order);
        if !points.len().is_multiple_of(dim) || values.len() != (points.len() / dim) * indices.len() {
            return Err(Error::Config("flat jet arrays have inconsistent lengths".into()));
        }
        if let Some(bad) = points.iter().chain(&values).find(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite jet entry {bad}")));
        }
        Ok(Self {
            indices,
            points,
            values,
        })
    }

    /// The zero jet on the given points.
    pub fn zeros(order: usize, dim: usize, points: Vec<f64>) -> Result<Self> {
        let n = IndexSet::new(dim, order).len();
        let values = alloc::vec![0.0; (points.len() / dim.max(1)) * n];
        Self::from_flat(order, dim, points, values)
    }

    pub fn order(&self) -> usize {
        self.indices.order()
    }

    pub fn dim(&self) -> usize {
        self.indices.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn indices(&self) -> &IndexSet {
        &self.indices
    }

    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.points[i * d..(i + 1) * d]
    }

    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn values_flat(&self) -> &[f64] {
        &self.values
    }

    /// All values `f^alpha(x_i)` of one point, in graded order.
    pub fn values_at(&self, i: usize) -> &[f64] {
        let n = self.indices.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// `f^alpha(x_i)`.
    pub fn value(&self, i: usize, alpha: &MultiIndex) -> Result<f64> {
        let k = self.alpha_position(alpha)?;
        Ok(self.values_at(i)[k])
    }

    fn alpha_position(&self, alpha: &MultiIndex) -> Result<usize> {
        if alpha.dim() != self.dim() {
            return Err(Error::Argument(format!(
                "multi-index {alpha:?} has dimension {}, jet has {}",
                alpha.dim(),
                self.dim()
            )));
        }
        self.indices.position(alpha).ok_or(Error::Order {
            requested: alpha.order(),
            available: self.order(),
        })
    }

    /// Index of a sample point given by its exact coordinates.
    pub fn point_index(&self, x: &[f64]) -> Result<usize> {
        (0..self.len())
            .find(|&i| self.point(i) == x)
            .ok_or_else(|| Error::MissingPoint(x.to_vec()))
    }

    fn check_order(&self, m: usize) -> Result<()> {
        if m > self.order() {
            return Err(Error::Order {
                requested: m,
                available: self.order(),
            });
        }
        Ok(())
    }

    /// Formal Taylor polynomial `Tay_x^m f(y) = sum_{|a|<=m} f^a(x)/a! (y-x)^a`
    /// with `x` the sample point with index `base`.
    pub fn taylor_poly(&self, base: usize, m: usize, y: &[f64]) -> Result<f64> {
        self.check_order(m)?;
        Ok(self.taylor_unchecked(base, m, y))
    }

    /// [`taylor_poly`](Self::taylor_poly) with the base point given by coordinates.
    pub fn taylor_poly_at(&self, x: &[f64], m: usize, y: &[f64]) -> Result<f64> {
        let base = self.point_index(x)?;
        self.taylor_poly(base, m, y)
    }

    pub(crate) fn taylor_unchecked(&self, base: usize, m: usize, y: &[f64]) -> f64 {
        let x = self.point(base);
        let vals = self.values_at(base);
        let count = self.indices.count_up_to(m);
        let pows = coordinate_powers(x, y, m);
        let mut acc = 0.0;
        for k in 0..count {
            let v = vals[k];
            if v == 0.0 {
                continue;
            }
            acc += v / self.indices.factorial(k) * monomial_from_table(&pows, m, self.indices.get(k));
        }
        acc
    }

    /// Formal Taylor remainder `(R_x^m f)^alpha(y)`, computed through the
    /// shifted Taylor polynomial of `(f^{alpha+beta})_{|beta| <= m-|alpha|}`.
    pub fn taylor_remainder(&self, base: usize, m: usize, alpha: &MultiIndex, target: usize) -> Result<f64> {
        self.check_order(m)?;
        let a = self.alpha_position(alpha)?;
        if alpha.order() > m {
            return Err(Error::Order {
                requested: alpha.order(),
                available: m,
            });
        }
        let pows = coordinate_powers(self.point(base), self.point(target), m);
        Ok(self.remainder_with_powers(base, target, m, a, &pows))
    }

    pub(crate) fn remainder_with_powers(&self, base: usize, target: usize, m: usize, a: usize, pows: &[f64]) -> f64 {
        let vals_x = self.values_at(base);
        let rest = m - self.indices.order_of(a);
        let count = self.indices.count_up_to(rest);
        let mut shifted = 0.0;
        for b in 0..count {
            let ab = self.indices.sum(a, b).expect("alpha + beta within jet order");
            let v = vals_x[ab];
            if v == 0.0 {
                continue;
            }
            shifted += v / self.indices.factorial(b) * monomial_from_table(pows, m, self.indices.get(b));
        }
        self.values_at(target)[a] - shifted
    }

    /// `(R_x^m f)^alpha(y) = f^alpha(y) - d^alpha (Tay_x^m f)(y)`, computed by
    /// differentiating the full Taylor polynomial term by term. Independent
    /// of the shifted form used by [`taylor_remainder`](Self::taylor_remainder).
    pub fn taylor_remainder_direct(&self, base: usize, m: usize, alpha: &MultiIndex, target: usize) -> Result<f64> {
        self.check_order(m)?;
        let a = self.alpha_position(alpha)?;
        let x = self.point(base);
        let y = self.point(target);
        let vals_x = self.values_at(base);
        let mut deriv = 0.0;
        for g in 0..self.indices.count_up_to(m) {
            let gamma = self.indices.get(g);
            let Some(rest) = gamma.checked_sub(alpha) else {
                continue;
            };
            // d^alpha (y-x)^gamma = gamma!/(gamma-alpha)! (y-x)^(gamma-alpha)
            let falling: f64 = gamma
                .entries()
                .iter()
                .zip(rest.entries())
                .map(|(&gi, &ri)| ((ri + 1)..=gi).map(|k| k as f64).product::<f64>())
                .product();
            let mono: f64 = rest
                .entries()
                .iter()
                .zip(x.iter().zip(y))
                .map(|(&e, (xi, yi))| powi(yi - xi, e))
                .product();
            deriv += vals_x[g] / self.indices.factorial(g) * falling * mono;
        }
        Ok(self.values_at(target)[a] - deriv)
    }

    /// `|f|_{m,K}`: the largest `|f^alpha(x)|` over samples and `|alpha| <= m`.
    pub fn seminorm_abs(&self, m: usize) -> Result<f64> {
        self.check_order(m)?;
        let count = self.indices.count_up_to(m);
        let mut best = 0.0f64;
        for i in 0..self.len() {
            for v in &self.values_at(i)[..count] {
                best = best.max(v.abs());
            }
        }
        Ok(best)
    }

    /// `a * self + b * other` on identical sample points.
    pub fn linear_combination(&self, a: f64, other: &JetField, b: f64) -> Result<JetField> {
        if self.indices != other.indices || self.points != other.points {
            return Err(Error::Config("linear combination of jets on different samples".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        JetField::from_flat(self.order(), self.dim(), self.points.clone(), values)
    }

    /// Overwrites `f^alpha(x_i)`.
    pub fn set_value(&mut self, i: usize, alpha: &MultiIndex, value: f64) -> Result<()> {
        let k = self.alpha_position(alpha)?;
        if !value.is_finite() {
            return Err(Error::Argument(format!("non-finite jet entry {value}")));
        }
        let n = self.indices.len();
        self.values[i * n + k] = value;
        Ok(())
    }

    /// Keeps only the listed points (in the listed order).
    pub fn select(&self, keep: &[usize]) -> JetField {
        let d = self.dim();
        let n = self.indices.len();
        let mut points = Vec::with_capacity(keep.len() * d);
        let mut values = Vec::with_capacity(keep.len() * n);
        for &i in keep {
            points.extend_from_slice(self.point(i));
            values.extend_from_slice(self.values_at(i));
        }
        JetField {
            indices: self.indices.clone(),
            points,
            values,
        }
    }
}

/// Table `pows[axis * (m + 1) + k] = (y_axis - x_axis)^k`.
pub(crate) fn coordinate_powers(x: &[f64], y: &[f64], m: usize) -> Vec<f64> {
    let mut pows = Vec::with_capacity(x.len() * (m + 1));
    for (xi, yi) in x.iter().zip(y) {
        let h = yi - xi;
        let mut p = 1.0;
        for _ in 0..=m {
            pows.push(p);
            p *= h;
        }
    }
    pows
}

pub(crate) fn monomial_from_table(pows: &[f64], m: usize, alpha: &MultiIndex) -> f64 {
    alpha
        .entries()
        .iter()
        .enumerate()
        .map(|(axis, &e)| pows[axis * (m + 1) + e as usize])
        .product()
}
