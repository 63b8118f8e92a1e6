use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// A multi-index `alpha` in `N_0^d`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// The unit multi-index `e_axis`.
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut e = vec![0; dim];
        e[axis] = 1;
        Self(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// `|alpha|`, the sum of the entries.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    /// `alpha!`, the product of the entry factorials.
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&a| factorial(a)).product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.dim(), other.dim());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other` when `other <= self` componentwise.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// `v^alpha = prod_i v_i^{alpha_i}`.
    pub fn monomial(&self, v: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(v)
            .map(|(&a, &x)| powi(x, a))
            .product()
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        Self(v)
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Repeated multiplication; exact for the small exponents used here.
pub(crate) fn powi(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// All multi-indices with `|alpha| <= order` in dimension `dim`, in graded
/// order: ascending `|alpha|`, and within one order lexicographically
/// descending, so that `(1,0)` precedes `(0,1)`.
///
/// The set also caches factorials and the addition table `alpha + beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    dim: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    factorials: Vec<f64>,
    orders: Vec<usize>,
    sum_table: Vec<Option<usize>>,
}

impl IndexSet {
    pub fn new(dim: usize, order: usize) -> Self {
        let mut indices = Vec::new();
        for k in 0..=order {
            let mut cur = vec![0u32; dim];
            push_compositions(dim, k as u32, 0, &mut cur, &mut indices);
        }
        let factorials = indices.iter().map(MultiIndex::factorial).collect();
        let orders: Vec<usize> = indices.iter().map(MultiIndex::order).collect();
        let n = indices.len();
        let mut sum_table = vec![None; n * n];
        for i in 0..n {
            for j in 0..n {
                if orders[i] + orders[j] <= order {
                    let s = indices[i].add(&indices[j]);
                    sum_table[i * n + j] = indices.iter().position(|x| *x == s);
                }
            }
        }
        Self {
            dim,
            order,
            indices,
            factorials,
            orders,
            sum_table,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of multi-indices, `C(order + dim, dim)`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, i: usize) -> &MultiIndex {
        &self.indices[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &MultiIndex> {
        self.indices.iter()
    }

    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        if alpha.dim() != self.dim || alpha.order() > self.order {
            return None;
        }
        self.indices.iter().position(|x| x == alpha)
    }

    pub fn factorial(&self, i: usize) -> f64 {
        self.factorials[i]
    }

    pub fn order_of(&self, i: usize) -> usize {
        self.orders[i]
    }

    /// Number of indices with `|alpha| <= m`; these form a prefix.
    pub fn count_up_to(&self, m: usize) -> usize {
        self.orders.partition_point(|&o| o <= m)
    }

    /// Position of `alpha_i + alpha_j`, if it lies in the set.
    pub fn sum(&self, i: usize, j: usize) -> Option<usize> {
        self.sum_table[i * self.indices.len() + j]
    }
}

fn push_compositions(dim: usize, remaining: u32, axis: usize, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if axis + 1 == dim {
        cur[axis] = remaining;
        out.push(MultiIndex(cur.clone()));
        cur[axis] = 0;
        return;
    }
    if dim == 0 {
        return;
    }
    for a in (0..=remaining).rev() {
        cur[axis] = a;
        push_compositions(dim, remaining - a, axis + 1, cur, out);
    }
    cur[axis] = 0;
}
