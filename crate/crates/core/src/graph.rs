//! Weighted undirected graphs in compressed form and Dijkstra's algorithm.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

#[derive(Debug, Clone, Default)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    weights: Vec<f64>,
}

impl Graph {
    /// Builds the graph from undirected edges `(a, b, w)`, each listed once.
    pub fn from_edges(nodes: usize, edges: &[(u32, u32, f64)]) -> Self {
        let mut degree = vec![0usize; nodes + 1];
        for &(a, b, _) in edges {
            degree[a as usize + 1] += 1;
            degree[b as usize + 1] += 1;
        }
        for i in 0..nodes {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; 2 * edges.len()];
        let mut weights = vec![0.0; 2 * edges.len()];
        for &(a, b, w) in edges {
            for (s, t) in [(a, b), (b, a)] {
                let slot = fill[s as usize];
                targets[slot] = t;
                weights[slot] = w;
                fill[s as usize] += 1;
            }
        }
        Self {
            offsets,
            targets,
            weights,
        }
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.offsets[v]..self.offsets[v + 1];
        self.targets[r.clone()]
            .iter()
            .zip(&self.weights[r])
            .map(|(&t, &w)| (t as usize, w))
    }

    /// Connected-component label of every node, labels in order of first
    /// appearance.
    pub fn components(&self) -> Vec<usize> {
        let n = self.len();
        let mut label = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = next;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for (t, _) in self.neighbors(v) {
                    if label[t] == usize::MAX {
                        label[t] = next;
                        stack.push(t);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Multi-source Dijkstra. `sources` carries initial distances. When
    /// `targets` is given the search stops once all of them are settled.
    pub fn shortest_paths(&self, sources: &[(usize, f64)], targets: Option<&[usize]>) -> ShortestPaths {
        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![u32::MAX; n];
        let mut settled = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &(s, d0) in sources {
            if d0 < dist[s] {
                dist[s] = d0;
                heap.push(Entry(d0, s));
            }
        }
        let mut remaining = targets.map(|t| {
            let mut t = t.to_vec();
            t.sort_unstable();
            t.dedup();
            t
        });
        while let Some(Entry(d, v)) = heap.pop() {
            if settled[v] || d > dist[v] {
                continue;
            }
            settled[v] = true;
            if let Some(rem) = remaining.as_mut() {
                if let Ok(pos) = rem.binary_search(&v) {
                    rem.remove(pos);
                    if rem.is_empty() {
                        break;
                    }
                }
            }
            for (t, w) in self.neighbors(v) {
                let nd = d + w;
                if nd < dist[t] {
                    dist[t] = nd;
                    pred[t] = v as u32;
                    heap.push(Entry(nd, t));
                }
            }
        }
        ShortestPaths { dist, pred }
    }
}

#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    pred: Vec<u32>,
}

impl ShortestPaths {
    /// Node sequence from a source to `v`, source first.
    pub fn path_to(&self, v: usize) -> Vec<usize> {
        let mut out = vec![v];
        let mut cur = v;
        while self.pred[cur] != u32::MAX {
            cur = self.pred[cur] as usize;
            out.push(cur);
        }
        out.reverse();
        out
    }
}

/// Min-heap entry ordered by distance, then node.
#[derive(Debug, Clone, Copy)]
struct Entry(f64, usize);

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}
