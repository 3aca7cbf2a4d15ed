//! Undirected simple graphs and the planted partition / Erdős–Rényi
//! generators.
//!
//! Graphs are stored in CSR form with every adjacency list sorted, so that
//! common neighbors of an edge can be counted by a linear merge.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::partition::Partition;

/// Immutable undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Graph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            offsets: vec![0; n + 1],
            neighbors: Vec::new(),
        }
    }

    /// Builds a graph from an edge list. Self-loops, duplicate edges (in
    /// either orientation) and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n > u32::MAX as usize {
            return Err(invalid("n exceeds the 32-bit vertex id range"));
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(invalid(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(invalid(format!("self-loop at vertex {u}")));
            }
            list.push((u.min(v) as u32, u.max(v) as u32));
        }
        let g = Self::from_unique_edges(n, &list);
        for v in 0..n {
            if g.neighbors(v).windows(2).any(|w| w[0] == w[1]) {
                return Err(invalid(format!("duplicate edge at vertex {v}")));
            }
        }
        Ok(g)
    }

    /// CSR construction from edges that are already known to be unique and
    /// loop-free; adjacency lists are sorted afterwards.
    pub(crate) fn from_unique_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in edges {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        for &(u, v) in edges {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for i in 0..n {
            neighbors[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        Self { offsets, neighbors }
    }

    /// CSR construction from edges `(u, v)` with `u < v` given in
    /// lexicographic order; lists come out sorted without a sort pass.
    pub(crate) fn from_sorted_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in edges {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        for &(u, v) in edges {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        Self { offsets, neighbors }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    /// Sorted neighbors of `v`.
    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && v < self.n() && self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            let adj = self.neighbors(u);
            let start = adj.partition_point(|&v| (v as usize) <= u);
            adj[start..].iter().map(move |&v| (u, v as usize))
        })
    }

    /// True if every edge of `self` is an edge of `other` (same vertex set).
    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.n() == other.n() && self.edges().all(|(u, v)| other.has_edge(u, v))
    }

    /// Checks the structural invariants.
    pub fn check_invariants(&self) -> Result<()> {
        for v in 0..self.n() {
            let adj = self.neighbors(v);
            if adj.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid(format!("adjacency of {v} not strictly increasing")));
            }
            for &u in adj {
                if u as usize == v {
                    return Err(invalid(format!("self-loop at {v}")));
                }
                if u as usize >= self.n() || !self.has_edge(u as usize, v) {
                    return Err(invalid(format!("edge {v}-{u} is not symmetric")));
                }
            }
        }
        Ok(())
    }

    /// Relabels vertices: vertex `v` becomes `perm[v]`.
    pub fn permute_vertices(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(invalid("permutation length differs from n"));
        }
        Self::from_edges(self.n(), self.edges().map(|(u, v)| (perm[u], perm[v])))
    }

    /// Writes the edge-list format: a `# n=<n>` header, then one
    /// `u<TAB>v` line per edge with `u < v`, lexicographically sorted.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# n={}", self.n())?;
        for (u, v) in self.edges() {
            writeln!(w, "{u}\t{v}")?;
        }
        w.flush()
    }

    /// Parses the edge-list format written by [`Graph::write_edge_list`].
    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges: Vec<(u32, u32)> = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            let err = |msg: String| Error::Parse { line: line_no, msg };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if n.is_none() {
                    let value = rest
                        .trim()
                        .strip_prefix("n=")
                        .ok_or_else(|| err("expected header `# n=<n>`".into()))?;
                    let parsed: usize = value
                        .trim()
                        .parse()
                        .map_err(|_| err(format!("bad vertex count {value:?}")))?;
                    if parsed > u32::MAX as usize {
                        return Err(err("vertex count exceeds 32-bit range".into()));
                    }
                    n = Some(parsed);
                }
                continue;
            }
            let n = n.ok_or_else(|| err("edge before `# n=<n>` header".into()))?;
            let mut fields = line.split_whitespace();
            let (Some(u), Some(v), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(err("expected `<u>\\t<v>`".into()));
            };
            let u: usize = u.parse().map_err(|_| err(format!("bad vertex id {u:?}")))?;
            let v: usize = v.parse().map_err(|_| err(format!("bad vertex id {v:?}")))?;
            if u >= v {
                return Err(err(format!("edge ({u}, {v}) must satisfy u < v")));
            }
            if v >= n {
                return Err(err(format!("vertex {v} out of range for n = {n}")));
            }
            let e = (u as u32, v as u32);
            if let Some(&last) = edges.last() {
                if e <= last {
                    return Err(err("edges must be unique and sorted lexicographically".into()));
                }
            }
            edges.push(e);
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "missing `# n=<n>` header".into(),
        })?;
        Ok(Self::from_sorted_edges(n, &edges))
    }
}

/// Connection probabilities of the planted partition model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpmParams {
    /// Probability of an edge inside a community.
    pub p: f64,
    /// Probability of an edge between communities.
    pub q: f64,
}

impl PpmParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        let params = Self { p, q };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("p", self.p)?;
        check_probability("q", self.q)
    }
}

fn check_probability(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(invalid(format!("{name} = {x} is not a probability")))
    }
}

/// Visits every pair `(a, b)`, `a < b < m`, independently with probability
/// `prob`, using geometric skips so the cost is proportional to the number of
/// pairs emitted. Pairs are produced in column order (by `b`, then `a`).
pub(crate) fn for_each_random_pair<R, F>(m: usize, prob: f64, rng: &mut R, mut emit: F)
where
    R: Rng + ?Sized,
    F: FnMut(usize, usize),
{
    if m < 2 || prob <= 0.0 {
        return;
    }
    if prob >= 1.0 {
        for b in 1..m {
            for a in 0..b {
                emit(a, b);
            }
        }
        return;
    }
    let log_q = (-prob).ln_1p();
    let mut b: u64 = 1;
    let mut a: i64 = -1;
    let m = m as u64;
    while b < m {
        // 1 - U lies in (0, 1], so its logarithm is finite.
        let u: f64 = rng.random();
        let skip = ((1.0 - u).ln() / log_q).floor();
        let skip = if skip >= (i64::MAX / 2) as f64 {
            i64::MAX / 2
        } else {
            skip as i64
        };
        a = a.saturating_add(1).saturating_add(skip);
        while a >= b as i64 && b < m {
            a -= b as i64;
            b += 1;
        }
        if b < m {
            emit(a as usize, b as usize);
        }
    }
}

/// Samples `G ~ PPM(T, p, q)`.
pub fn sample_ppm<R: Rng + ?Sized>(t: &Partition, params: PpmParams, rng: &mut R) -> Result<Graph> {
    params.validate()?;
    let n = t.n();
    let labels = t.labels();
    let mut edges: Vec<(u32, u32)> = Vec::new();
    // Inter-community pairs: skip over all pairs, keep the cross ones.
    for_each_random_pair(n, params.q, rng, |a, b| {
        if labels[a] != labels[b] {
            edges.push((a as u32, b as u32));
        }
    });
    let members = t.members();
    for block in members.iter() {
        for_each_random_pair(block.len(), params.p, rng, |a, b| {
            edges.push((block[a], block[b]));
        });
    }
    Ok(Graph::from_unique_edges(n, &edges))
}

/// Samples an Erdős–Rényi graph `G(n, q)`.
pub fn sample_er<R: Rng + ?Sized>(n: usize, q: f64, rng: &mut R) -> Result<Graph> {
    check_probability("q", q)?;
    if n > u32::MAX as usize {
        return Err(invalid("n exceeds the 32-bit vertex id range"));
    }
    let mut edges = Vec::new();
    for_each_random_pair(n, q, rng, |a, b| edges.push((a as u32, b as u32)));
    Ok(Graph::from_unique_edges(n, &edges))
}

/// Degree sequence with `Σ d_i` and `Σ d_i²`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeStats {
    pub degrees: Vec<usize>,
    pub sum: u64,
    pub sum_sq: u64,
}

pub fn degree_stats(g: &Graph) -> DegreeStats {
    let degrees: Vec<usize> = (0..g.n()).map(|v| g.degree(v)).collect();
    let sum = degrees.iter().map(|&d| d as u64).sum();
    let sum_sq = degrees.iter().map(|&d| (d as u64) * (d as u64)).sum();
    DegreeStats {
        degrees,
        sum,
        sum_sq,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::balanced_partition;
    use crate::rng::seeded;

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    #[test]
    fn builder_rejects_bad_edges() {
        assert!(Graph::from_edges(3, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, [(0, 3)]).is_err());
        assert!(Graph::from_edges(3, [(0, 1), (1, 0)]).is_err());
        let g = Graph::from_edges(4, [(2, 1), (0, 3), (1, 0)]).unwrap();
        g.check_invariants().unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 3), (1, 2)]);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn degree_stats_examples() {
        let k4 = degree_stats(&complete(4));
        assert_eq!(k4.degrees, vec![3, 3, 3, 3]);
        assert_eq!(k4.sum_sq, 36);
        let e = degree_stats(&Graph::empty(5));
        assert_eq!((e.sum, e.sum_sq), (0, 0));
        let path = degree_stats(&Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap());
        assert_eq!(path.sum_sq, 6);
        assert_eq!(k4.sum, 2 * 6);
    }

    #[test]
    fn random_pairs_cover_everything_at_one_and_nothing_at_zero() {
        let mut rng = seeded(0);
        let mut seen = Vec::new();
        for_each_random_pair(5, 1.0, &mut rng, |a, b| seen.push((a, b)));
        assert_eq!(seen.len(), 10);
        seen.clear();
        for_each_random_pair(5, 0.0, &mut rng, |a, b| seen.push((a, b)));
        assert!(seen.is_empty());
        for_each_random_pair(200, 0.3, &mut rng, |a, b| seen.push((a, b)));
        assert!(seen.iter().all(|&(a, b)| a < b && b < 200));
        let mut sorted = seen.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), seen.len());
    }

    #[test]
    fn ppm_extremes() {
        let t = balanced_partition(100, 5, 10).unwrap();
        let mut rng = seeded(7);
        let g = sample_ppm(&t, PpmParams::new(1.0, 0.0).unwrap(), &mut rng).unwrap();
        assert_eq!(g.edge_count(), 5 * 45);
        for (u, v) in g.edges() {
            assert_eq!(t.label(u), t.label(v));
        }
        let g = sample_ppm(&t, PpmParams::new(0.0, 0.0).unwrap(), &mut rng).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert!(PpmParams::new(1.2, 0.0).is_err());
        assert!(PpmParams::new(0.5, -0.1).is_err());
        assert!(PpmParams::new(f64::NAN, 0.1).is_err());
    }

    #[test]
    fn er_extremes() {
        let mut rng = seeded(1);
        assert_eq!(sample_er(30, 1.0, &mut rng).unwrap(), complete(30));
        assert_eq!(sample_er(30, 0.0, &mut rng).unwrap().edge_count(), 0);
        assert_eq!(sample_er(0, 0.5, &mut rng).unwrap().n(), 0);
        assert!(sample_er(3, 2.0, &mut rng).is_err());
    }

    #[test]
    fn intra_density_close_to_p() {
        let t = balanced_partition(2000, 100, 20).unwrap();
        let g = sample_ppm(&t, PpmParams::new(0.4, 0.0).unwrap(), &mut seeded(5)).unwrap();
        let density = g.edge_count() as f64 / (100.0 * 190.0);
        assert!((density - 0.4).abs() <= 0.01, "density {density}");
    }

    #[test]
    fn er_mean_degree() {
        let n = 10_000;
        let g = sample_er(n, 5.0 / n as f64, &mut seeded(9)).unwrap();
        let mean = 2.0 * g.edge_count() as f64 / n as f64;
        assert!((mean - 5.0).abs() <= 0.2, "mean degree {mean}");
    }

    #[test]
    fn edge_list_round_trip_and_errors() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap();
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "# n=6\n0\t1\n0\t2\n1\t2\n3\t4\n"
        );
        assert_eq!(Graph::read_edge_list(&buf[..]).unwrap(), g);
        let empty = Graph::read_edge_list(&b"# n=5\n"[..]).unwrap();
        assert_eq!((empty.n(), empty.edge_count()), (5, 0));
        for (bad, line) in [
            ("# n=3\n0\t1\n1\t1\n", 3),
            ("# n=3\n0\t5\n", 2),
            ("# n=3\n1\t2\n0\t1\n", 3),
            ("# n=3\n0\t1\n0\t1\n", 3),
            ("0\t1\n", 1),
            ("# n=3\n0\tz\n", 2),
        ] {
            match Graph::read_edge_list(bad.as_bytes()) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{bad:?}"),
                other => panic!("{bad:?} gave {other:?}"),
            }
        }
    }
}
