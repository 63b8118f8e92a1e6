use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;


use super::field::JetField;
use super::multi_index::{binomial, IndexSet, MultiIndex};
use crate::{Error, Result};

/// A function on `R^d` whose partial derivatives can be sampled.
///
/// `partial` returns `None` when no closed form is available; derivatives
/// are then taken by central finite differences.
pub trait JetSource {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn partial(&self, _alpha: &MultiIndex, _x: &[f64]) -> Option<f64> {
        None
    }
}

impl<T: JetSource + ?Sized> JetSource for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn partial(&self, alpha: &MultiIndex, x: &[f64]) -> Option<f64> {
        (**self).partial(alpha, x)
    }
}

/// Finite-difference step along one axis for a derivative of total order
/// `order`: `max(1e-5, 1e-5 |x_i|)`, widened tenfold per order above one.
pub fn fd_step(x_i: f64, order: usize) -> f64 {
    let base = (1e-5 * x_i.abs()).max(1e-5);
    base * 10f64.powi(order.saturating_sub(1) as i32)
}

/// Samples `f^alpha(x) = d^alpha f(x)` for all `|alpha| <= m` at the given
/// points (flat, `dim` coordinates each).
///
/// When `stencil_domain` is given, every finite-difference stencil point must
/// satisfy it; otherwise a stencil error names the offending location.
pub fn jet_of_function<S: JetSource + ?Sized>(
    source: &S,
    points: &[f64],
    m: usize,
    stencil_domain: Option<&dyn Fn(&[f64]) -> bool>,
) -> Result<JetField> {
    let dim = source.dim();
    if dim == 0 || !points.len().is_multiple_of(dim) {
        return Err(Error::Config("points do not match the source dimension".into()));
    }
    let idx = IndexSet::new(dim, m);
    let n = points.len() / dim;
    let mut values = Vec::with_capacity(n * idx.len());
    for i in 0..n {
        let x = &points[i * dim..(i + 1) * dim];
        for k in 0..idx.len() {
            let alpha = idx.get(k);
            let v = if k == 0 {
                source.value(x)
            } else {
                match source.partial(alpha, x) {
                    Some(v) => v,
                    None => central_difference(source, alpha, x, stencil_domain)?,
                }
            };
            if !v.is_finite() {
                return Err(Error::Argument(format!(
                    "derivative {alpha:?} is not finite at {x:?}"
                )));
            }
            values.push(v);
        }
    }
    JetField::from_flat(m, dim, points.to_vec(), values)
}

/// Tensor-product central difference for `d^alpha f(x)`.
pub fn central_difference<S: JetSource + ?Sized>(
    source: &S,
    alpha: &MultiIndex,
    x: &[f64],
    domain: Option<&dyn Fn(&[f64]) -> bool>,
) -> Result<f64> {
    let order = alpha.order();
    let steps: Vec<f64> = x.iter().map(|&xi| fd_step(xi, order)).collect();
    tensor_difference(source, alpha, x, &steps, domain)
}

/// Central difference with the same step on every axis: `base` for first
/// derivatives, widened tenfold per order above one.
pub fn central_difference_step<S: JetSource + ?Sized>(source: &S, alpha: &MultiIndex, x: &[f64], base: f64) -> f64 {
    let step = base * 10f64.powi(alpha.order().saturating_sub(1) as i32);
    let steps: Vec<f64> = alloc::vec![step; x.len()];
    tensor_difference(source, alpha, x, &steps, None).expect("no domain restriction")
}

fn tensor_difference<S: JetSource + ?Sized>(
    source: &S,
    alpha: &MultiIndex,
    x: &[f64],
    steps: &[f64],
    domain: Option<&dyn Fn(&[f64]) -> bool>,
) -> Result<f64> {
    let a = alpha.entries();
    let mut counter: Vec<u32> = alloc::vec![0; a.len()];
    let mut acc = 0.0;
    let mut p = x.to_vec();
    loop {
        let mut weight = 1.0;
        for axis in 0..a.len() {
            let k = counter[axis];
            p[axis] = x[axis] + (a[axis] as f64 / 2.0 - k as f64) * steps[axis];
            let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            weight *= sign * binomial(a[axis], k);
        }
        if let Some(inside) = domain {
            if !inside(&p) {
                return Err(Error::Stencil { location: p });
            }
        }
        acc += weight * source.value(&p);
        // odometer over 0..=a[axis]
        let mut axis = 0;
        loop {
            if axis == a.len() {
                let scale: f64 = a
                    .iter()
                    .zip(steps)
                    .map(|(&e, h)| h.powi(e as i32))
                    .product();
                return Ok(acc / scale);
            }
            if counter[axis] < a[axis] {
                counter[axis] += 1;
                break;
            }
            counter[axis] = 0;
            axis += 1;
        }
    }
}

/// A function given only by its values; all derivatives by finite differences.
pub struct FnSource<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64> FnSource<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> core::fmt::Debug for FnSource<F> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FnSource").field("dim", &self.dim).finish()
    }
}

impl<F: Fn(&[f64]) -> f64> JetSource for FnSource<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}
