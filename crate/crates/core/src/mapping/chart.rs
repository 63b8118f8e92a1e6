//! Maps sampled on grids and the canonical charts of the mapping space.

use alloc::format;
use alloc::vec::Vec;

use super::addition::LocalAddition;
use crate::{Error, Result};

/// A map `M -> N` sampled at grid nodes: `nodes` holds `source_dim`
/// coordinates per node, `values` the ambient coordinates of the image.
#[derive(Debug, Clone, PartialEq)]
pub struct MapGridFunction {
    source_dim: usize,
    target: LocalAddition,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl MapGridFunction {
    /// Checks shapes and that every value lies on the target (unit norm
    /// within `1e-12` for spheres).
    pub fn new(source_dim: usize, target: LocalAddition, nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = target.ambient();
        if source_dim == 0 || n == 0 || !nodes.len().is_multiple_of(source_dim) || values.len() != nodes.len() / source_dim * n {
            return Err(Error::Config("grid nodes and values do not match".into()));
        }
        for q in values.chunks_exact(n) {
            target.check_point(q)?;
        }
        Ok(Self {
            source_dim,
            target,
            nodes,
            values,
        })
    }

    /// Samples `map` at `nodes`.
    pub fn from_fn(source_dim: usize, target: LocalAddition, nodes: Vec<f64>, map: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let values = nodes.chunks_exact(source_dim.max(1)).flat_map(map).collect();
        Self::new(source_dim, target, nodes, values)
    }

    pub fn len(&self) -> usize {
        self.nodes.len() / self.source_dim
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target(&self) -> LocalAddition {
        self.target
    }

    pub fn node(&self, k: usize) -> &[f64] {
        &self.nodes[k * self.source_dim..(k + 1) * self.source_dim]
    }

    pub fn value(&self, k: usize) -> &[f64] {
        let n = self.target.ambient();
        &self.values[k * n..(k + 1) * n]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The map on the nodes with the given indices.
    pub fn select(&self, keep: &[usize]) -> Self {
        Self {
            source_dim: self.source_dim,
            target: self.target,
            nodes: keep.iter().flat_map(|&k| self.node(k).iter().copied()).collect(),
            values: keep.iter().flat_map(|&k| self.value(k).iter().copied()).collect(),
        }
    }

    /// The same nodes with the target's local addition replaced.
    pub fn with_addition(&self, target: LocalAddition) -> Result<Self> {
        Self::new(self.source_dim, target, self.nodes.clone(), self.values.clone())
    }
}

/// A tangent field along a map: one ambient vector per node, flat.
pub type TangentField = Vec<f64>;

fn same_grid(f: &MapGridFunction, g: &MapGridFunction) -> Result<()> {
    if f.nodes != g.nodes || f.target.ambient() != g.target.ambient() {
        return Err(Error::Config("maps are sampled on different grids".into()));
    }
    Ok(())
}

/// `phi_f(g) = (pi, Sigma)^{-1}(f, g)`: the tangent field along `f` with
/// `Sigma(f(x), tau(x)) = g(x)`. Every `g(x)` must lie within half the
/// injectivity bound of `f(x)`.
pub fn chart_forward(f: &MapGridFunction, g: &MapGridFunction) -> Result<TangentField> {
    same_grid(f, g)?;
    let add = f.target;
    let bound = add.injectivity_bound() / 2.0;
    let mut out = Vec::with_capacity(f.values.len());
    for k in 0..f.len() {
        let (q, p) = (f.value(k), g.value(k));
        let distance = add.distance(q, p);
        let v = if distance <= bound { add.inverse(q, p) } else { None };
        match v {
            Some(v) => out.extend(v),
            None => return Err(Error::ChartDomain { node: k, distance, bound }),
        }
    }
    Ok(out)
}

/// `phi_f^{-1}(tau) = Sigma(f, tau)`. Each `tau(x)` must be tangent at
/// `f(x)` and reach at most half the injectivity bound.
pub fn chart_backward(f: &MapGridFunction, tau: &[f64]) -> Result<MapGridFunction> {
    let add = f.target;
    let n = add.ambient();
    if tau.len() != f.values.len() {
        return Err(Error::Config("tangent field does not match the grid".into()));
    }
    let bound = add.injectivity_bound() / 2.0;
    let mut values = Vec::with_capacity(f.values.len());
    for k in 0..f.len() {
        let (q, v) = (f.value(k), &tau[k * n..(k + 1) * n]);
        check_tangent(&add, q, v, k)?;
        let distance = add.reach(v);
        if !(distance <= bound) {
            return Err(Error::ChartDomain { node: k, distance, bound });
        }
        values.extend(add.add(q, v));
    }
    Ok(MapGridFunction {
        source_dim: f.source_dim,
        target: add,
        nodes: f.nodes.clone(),
        values,
    })
}

fn check_tangent(add: &LocalAddition, q: &[f64], v: &[f64], node: usize) -> Result<()> {
    if add.is_sphere() {
        let c: f64 = q.iter().zip(v).map(|(a, b)| a * b).sum();
        let scale = 1.0 + v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if c.abs() > 1e-9 * scale {
            return Err(Error::Argument(format!("vector at node {node} is not tangent (normal part {c})")));
        }
    }
    Ok(())
}

/// Change of charts `h(tau)(x) = (pi, Sigma_f)^{-1}(f(x), Sigma_g(g(x), tau(x)))`
/// from the chart at `g` to the chart at `f`. Each map carries its own local
/// addition, so this also switches between local additions.
pub fn change_of_charts(f: &MapGridFunction, g: &MapGridFunction, tau: &[f64]) -> Result<TangentField> {
    same_grid(f, g)?;
    let moved = chart_backward(g, tau)?;
    let moved = MapGridFunction {
        target: f.target,
        ..moved
    };
    chart_forward(f, &moved)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const EXP: LocalAddition = LocalAddition::SphereExp { ambient: 3 };
    const PROJ: LocalAddition = LocalAddition::SphereProjection { ambient: 3 };

    fn circle_nodes(n: usize) -> Vec<f64> {
        (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
    }

    fn tilted(t: &[f64]) -> Vec<f64> {
        let b = 0.3 * (2.0 * t[0]).sin();
        vec![t[0].cos() * b.cos(), t[0].sin() * b.cos(), b.sin()]
    }

    fn random_field(f: &MapGridFunction, rng: &mut ChaCha8Rng, amplitude: f64) -> TangentField {
        (0..f.len())
            .flat_map(|k| {
                let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let t = f.target().project(f.value(k), &w);
                let n = t.iter().map(|x| x * x).sum::<f64>().sqrt();
                let s = amplitude * rng.gen_range(0.0..1.0) / n;
                t.into_iter().map(move |x| x * s)
            })
            .collect()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn flat_charts_subtract() {
        let flat = LocalAddition::Flat { ambient: 2 };
        let nodes = circle_nodes(16);
        let f = MapGridFunction::from_fn(1, flat, nodes.clone(), |t| vec![t[0], 1.0]).unwrap();
        let g = MapGridFunction::from_fn(1, flat, nodes, |t| vec![t[0].sin(), t[0] * 2.0]).unwrap();
        let tau = chart_forward(&f, &g).unwrap();
        for k in 0..f.len() {
            assert_eq!(tau[2 * k], g.value(k)[0] - f.value(k)[0]);
            assert_eq!(tau[2 * k + 1], g.value(k)[1] - f.value(k)[1]);
        }
        let sum: Vec<f64> = f.values().iter().zip(&tau).map(|(a, b)| a + b).collect();
        assert_eq!(chart_backward(&f, &tau).unwrap().values(), sum.as_slice());
        assert_eq!(chart_forward(&f, &f).unwrap(), vec![0.0; 32]);
        // h(tau) = (g - f) + tau
        let sigma: Vec<f64> = (0..32).map(|k| 0.01 * k as f64).collect();
        let h = change_of_charts(&f, &g, &sigma).unwrap();
        for i in 0..32 {
            assert!((h[i] - (tau[i] + sigma[i])).abs() < 1e-14);
        }
    }

    #[test]
    fn sphere_chart_of_a_constant_pair() {
        let nodes = circle_nodes(8);
        let north = |_: &[f64]| vec![0.0, 0.0, 1.0];
        let f = MapGridFunction::from_fn(1, EXP, nodes.clone(), north).unwrap();
        let g = MapGridFunction::from_fn(1, EXP, nodes, |_| vec![0.3f64.sin(), 0.0, 0.3f64.cos()]).unwrap();
        let tau = chart_forward(&f, &g).unwrap();
        for v in tau.chunks_exact(3) {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 0.3).abs() < 1e-9);
        }
    }

    #[test]
    fn chart_domain_errors_name_the_node() {
        let nodes = circle_nodes(8);
        let f = MapGridFunction::from_fn(1, EXP, nodes.clone(), tilted).unwrap();
        let g = MapGridFunction::from_fn(1, EXP, nodes, |t| {
            if t[0] > 3.0 && t[0] < 3.5 {
                tilted(&[t[0] + 2.0])
            } else {
                tilted(t)
            }
        })
        .unwrap();
        match chart_forward(&f, &g) {
            Err(Error::ChartDomain { node, distance, bound }) => {
                assert_eq!(node, 4);
                assert!(distance > bound && bound == PI / 2.0);
            }
            other => panic!("expected a chart-domain error, got {other:?}"),
        }
        let mut tau = vec![0.0; 24];
        let big = f.target().project(f.value(2), &[0.0, 0.0, 10.0]);
        tau[6..9].copy_from_slice(&big);
        assert!(matches!(chart_backward(&f, &tau), Err(Error::ChartDomain { node: 2, .. })));
        assert!(MapGridFunction::new(1, EXP, vec![0.0], vec![1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn sphere_charts_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = MapGridFunction::from_fn(1, EXP, circle_nodes(200), tilted).unwrap();
        for _ in 0..10 {
            let tau = random_field(&f, &mut rng, 0.2);
            let g = chart_backward(&f, &tau).unwrap();
            assert!(max_diff(&chart_forward(&f, &g).unwrap(), &tau) <= 1e-9);
            assert!(max_diff(chart_backward(&f, &chart_forward(&f, &g).unwrap()).unwrap().values(), g.values()) <= 1e-9);
        }
    }

    #[test]
    fn switching_local_additions_is_a_bijection() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f_exp = MapGridFunction::from_fn(1, EXP, circle_nodes(100), tilted).unwrap();
        let f_proj = f_exp.with_addition(PROJ).unwrap();
        for _ in 0..10 {
            let tau = random_field(&f_exp, &mut rng, 0.6);
            let there = change_of_charts(&f_proj, &f_exp, &tau).unwrap();
            let back = change_of_charts(&f_exp, &f_proj, &there).unwrap();
            assert!(max_diff(&back, &tau) <= 1e-8);
            assert!(max_diff(&there, &tau) > 1e-3);
        }
    }

    #[test]
    fn change_of_charts_is_differentiable_in_the_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = MapGridFunction::from_fn(1, EXP, circle_nodes(50), tilted).unwrap();
        let g = chart_backward(&f, &random_field(&f, &mut rng, 0.1)).unwrap();
        let tau = random_field(&g, &mut rng, 0.2);
        let delta = random_field(&g, &mut rng, 1.0);
        let h = |s: f64| {
            let t: Vec<f64> = tau.iter().zip(&delta).map(|(a, b)| a + s * b).collect();
            change_of_charts(&f, &g, &t).unwrap()
        };
        let (eps, step) = (1e-7, 1e-4);
        let (h0, hf) = (h(0.0), h(eps));
        let (hp, hm) = (h(step), h(-step));
        for i in 0..h0.len() {
            let forward = (hf[i] - h0[i]) / eps;
            let central = (hp[i] - hm[i]) / (2.0 * step);
            assert!((forward - central).abs() <= 1e-6, "{i}: {forward} vs {central}");
        }
        assert_eq!(change_of_charts(&f, &f, &tau_on(&f, &tau)).unwrap().len(), tau.len());
    }

    fn tau_on(f: &MapGridFunction, tau: &[f64]) -> TangentField {
        (0..f.len()).flat_map(|k| f.target().project(f.value(k), &tau[3 * k..3 * k + 3])).collect()
    }

    #[test]
    fn identical_base_maps_give_the_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = MapGridFunction::from_fn(1, EXP, circle_nodes(64), tilted).unwrap();
        let tau = random_field(&f, &mut rng, 0.3);
        assert!(max_diff(&change_of_charts(&f, &f, &tau).unwrap(), &tau) <= 1e-12);
    }
}
