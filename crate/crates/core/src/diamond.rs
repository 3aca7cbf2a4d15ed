//! Diamond Percolation: keep the edges whose endpoints share at least
//! `threshold` common neighbors, then return the connected components.
//!
//! Common neighbors are always counted in the input graph; the filter is a
//! single pass. Counting is a merge of two sorted adjacency lists, which
//! bounds the total work by `O(n + Σ d_i²)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::graph::Graph;
use crate::partition::Partition;

/// Filter configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiamondConfig {
    /// Minimum number of common neighbors for an edge to survive.
    pub threshold: u32,
}

impl Default for DiamondConfig {
    fn default() -> Self {
        Self { threshold: 2 }
    }
}

impl DiamondConfig {
    pub fn new(threshold: u32) -> Result<Self> {
        if threshold < 1 {
            return Err(invalid("diamond threshold must be at least 1"));
        }
        Ok(Self { threshold })
    }
}

/// Work performed by the filter, counted in merge steps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FilterStats {
    pub merge_steps: u64,
    pub edges_examined: u64,
    pub edges_kept: u64,
}

/// Counts common elements of two sorted lists, stopping once `cap` is
/// reached.
#[inline]
fn merge_count(a: &[u32], b: &[u32], cap: usize, steps: &mut u64) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        *steps += 1;
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                if count >= cap {
                    break;
                }
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Number of common neighbors `W_ij` of two distinct vertices.
pub fn common_neighbors(g: &Graph, i: usize, j: usize) -> Result<usize> {
    if i == j {
        return Err(invalid("common_neighbors needs two distinct vertices"));
    }
    if i >= g.n() || j >= g.n() {
        return Err(invalid(format!("vertex out of range for n = {}", g.n())));
    }
    let mut steps = 0;
    Ok(merge_count(g.neighbors(i), g.neighbors(j), usize::MAX, &mut steps))
}

/// Calls `keep(u, v)` for every edge `u < v` (lexicographic order) with at
/// least `threshold` common neighbors.
fn for_each_kept_edge<F: FnMut(u32, u32)>(g: &Graph, cfg: DiamondConfig, mut keep: F) -> FilterStats {
    let t = cfg.threshold as usize;
    let mut stats = FilterStats::default();
    for u in 0..g.n() {
        let adj_u = g.neighbors(u);
        // An endpoint of degree <= t cannot have t common neighbors with the
        // other endpoint.
        if adj_u.len() <= t {
            let upper = adj_u.partition_point(|&v| (v as usize) <= u);
            stats.edges_examined += (adj_u.len() - upper) as u64;
            continue;
        }
        let start = adj_u.partition_point(|&v| (v as usize) <= u);
        for &v in &adj_u[start..] {
            stats.edges_examined += 1;
            let adj_v = g.neighbors(v as usize);
            if adj_v.len() <= t {
                continue;
            }
            if merge_count(adj_u, adj_v, t, &mut stats.merge_steps) >= t {
                stats.edges_kept += 1;
                keep(u as u32, v);
            }
        }
    }
    stats
}

/// The filtered graph `G*`: same vertices, edges with `W_ij ≥ threshold`.
pub fn filter_edges(g: &Graph, cfg: DiamondConfig) -> Graph {
    filter_edges_with_stats(g, cfg).0
}

/// [`filter_edges`] together with its operation counts.
pub fn filter_edges_with_stats(g: &Graph, cfg: DiamondConfig) -> (Graph, FilterStats) {
    let mut kept = Vec::new();
    let stats = for_each_kept_edge(g, cfg, |u, v| kept.push((u, v)));
    (Graph::from_sorted_edges(g.n(), &kept), stats)
}

/// Connected components, labelled in order of their smallest vertex.
pub fn connected_components(g: &Graph) -> Partition {
    let n = g.n();
    let mut labels = vec![u32::MAX; n];
    let mut queue = Vec::new();
    let mut next = 0u32;
    for s in 0..n {
        if labels[s] != u32::MAX {
            continue;
        }
        labels[s] = next;
        queue.clear();
        queue.push(s as u32);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head] as usize;
            head += 1;
            for &w in g.neighbors(v) {
                if labels[w as usize] == u32::MAX {
                    labels[w as usize] = next;
                    queue.push(w);
                }
            }
        }
        next += 1;
    }
    Partition::from_bounded_labels(labels, next as usize)
}

/// Disjoint-set forest with path halving and union by size.
struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }
}

/// Runs Diamond Percolation on `g`.
///
/// Equivalent to `connected_components(&filter_edges(g, cfg))`, but merges
/// kept edges into a union-find forest instead of materialising `G*`.
pub fn diamond_percolation(g: &Graph, cfg: DiamondConfig) -> Partition {
    diamond_percolation_with_stats(g, cfg).0
}

pub fn diamond_percolation_with_stats(g: &Graph, cfg: DiamondConfig) -> (Partition, FilterStats) {
    let n = g.n();
    let mut forest = UnionFind::new(n);
    let stats = for_each_kept_edge(g, cfg, |u, v| forest.union(u, v));
    let roots: Vec<u32> = (0..n as u32).map(|v| forest.find(v)).collect();
    (Partition::from_bounded_labels(roots, n), stats)
}
