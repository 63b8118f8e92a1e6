//! Closed-form test functions with exact partial derivatives.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods need std
use num_traits::Float;


use super::multi_index::{powi, MultiIndex};
use super::source::JetSource;

/// `sum_k c_k x^{gamma_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<(f64, MultiIndex)>,
}

impl Polynomial {
    pub fn new(dim: usize, terms: Vec<(f64, MultiIndex)>) -> Self {
        assert!(terms.iter().all(|t| t.1.dim() == dim), "term dimension mismatch");
        Self { dim, terms }
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn terms(&self) -> &[(f64, MultiIndex)] {
        &self.terms
    }

    pub fn degree(&self) -> usize {
        self.terms.iter().map(|t| t.1.order()).max().unwrap_or(0)
    }
}

impl JetSource for Polynomial {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(c, g)| c * g.monomial(x)).sum()
    }

    fn partial(&self, alpha: &MultiIndex, x: &[f64]) -> Option<f64> {
        let mut acc = 0.0;
        for (c, gamma) in &self.terms {
            let Some(rest) = gamma.checked_sub(alpha) else {
                continue;
            };
            let mut term = *c;
            for ((&g, &r), &xi) in gamma.entries().iter().zip(rest.entries()).zip(x) {
                for k in (r + 1)..=g {
                    term *= k as f64;
                }
                term *= powi(xi, r);
            }
            acc += term;
        }
        Some(acc)
    }
}

/// `g(u, v) = sin(u) cos(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SinCos;

fn sin_derivative(k: u32, u: f64) -> f64 {
    match k % 4 {
        0 => u.sin(),
        1 => u.cos(),
        2 => -u.sin(),
        _ => -u.cos(),
    }
}

fn cos_derivative(k: u32, v: f64) -> f64 {
    match k % 4 {
        0 => v.cos(),
        1 => -v.sin(),
        2 => -v.cos(),
        _ => v.sin(),
    }
}

impl JetSource for SinCos {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        x[0].sin() * x[1].cos()
    }
    fn partial(&self, alpha: &MultiIndex, x: &[f64]) -> Option<f64> {
        let a = alpha.entries();
        Some(sin_derivative(a[0], x[0]) * cos_derivative(a[1], x[1]))
    }
}

/// `sum_k c_k cos(w_k . x + phase_k)`: a smooth function with exact partials,
/// used for randomized smooth jets.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSum {
    dim: usize,
    modes: Vec<(f64, Vec<f64>, f64)>,
}

impl TrigSum {
    pub fn new(dim: usize, modes: Vec<(f64, Vec<f64>, f64)>) -> Self {
        assert!(modes.iter().all(|m| m.1.len() == dim), "mode dimension mismatch");
        Self { dim, modes }
    }
}

impl JetSource for TrigSum {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.modes
            .iter()
            .map(|(c, w, ph)| c * (dot(w, x) + ph).cos())
            .sum()
    }
    fn partial(&self, alpha: &MultiIndex, x: &[f64]) -> Option<f64> {
        let k = alpha.order() as u32;
        Some(
            self.modes
                .iter()
                .map(|(c, w, ph)| c * alpha.monomial(w) * cos_derivative(k, dot(w, x) + ph))
                .sum(),
        )
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `phi(x) = exp(-1/x^2)` for `x > 0` and `0` otherwise; the upper wall of
/// the exponential fjord.
pub fn fjord_wall(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / (x * x)).exp()
    } else {
        0.0
    }
}

/// `phi^{(k)}(x) = P_k(1/x) phi(x)` with `P_0 = 1` and
/// `P_{k+1}(s) = -s^2 P_k'(s) + 2 s^3 P_k(s)`.
pub fn fjord_wall_derivative(k: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    // coefficients of P in powers of s
    let mut p: Vec<f64> = alloc::vec![1.0];
    for _ in 0..k {
        let mut next = alloc::vec![0.0; p.len() + 3];
        for (j, &c) in p.iter().enumerate() {
            if j > 0 {
                next[j + 1] -= c * j as f64;
            }
            next[j + 3] += 2.0 * c;
        }
        p = next;
    }
    let s = 1.0 / x;
    let poly: f64 = p.iter().rev().fold(0.0, |acc, &c| acc * s + c);
    poly * fjord_wall(x)
}

/// The function on the exponential-fjord domain that equals `phi(x)` above
/// the fjord (`x > 0`, `y >= phi(x)`) and `0` elsewhere. Its jet on the
/// domain is not a Whitney jet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ExpCuspFunction;

impl ExpCuspFunction {
    fn upper(x: &[f64]) -> bool {
        x[0] > 0.0 && x[1] >= fjord_wall(x[0])
    }
}

impl JetSource for ExpCuspFunction {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        if Self::upper(x) {
            fjord_wall(x[0])
        } else {
            0.0
        }
    }
    fn partial(&self, alpha: &MultiIndex, x: &[f64]) -> Option<f64> {
        let a = alpha.entries();
        if a[1] > 0 || !Self::upper(x) {
            return Some(0.0);
        }
        Some(fjord_wall_derivative(a[0], x[0]))
    }
}
