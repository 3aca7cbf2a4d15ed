//! Vertex partitions and random partition samplers.
//!
//! A [`Partition`] stores one community id per vertex. Ids are dense and
//! canonical: community `c` is the `c`-th community to appear when scanning
//! vertices `0, 1, 2, ...`. Two partitions describing the same set partition
//! are therefore equal as values.

use std::io::{BufRead, Write};

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A partition of the vertex set `0..n` into nonempty communities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Vec<u32>,
    sizes: Vec<u32>,
}

/// Vertices of each community, stored contiguously (ascending within a block).
#[derive(Debug, Clone)]
pub struct BlockMembers {
    offsets: Vec<usize>,
    vertices: Vec<u32>,
}

impl BlockMembers {
    pub fn block(&self, c: usize) -> &[u32] {
        &self.vertices[self.offsets[c]..self.offsets[c + 1]]
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.len()).map(move |c| self.block(c))
    }
}

impl Partition {
    /// Builds a partition from arbitrary community ids (any `usize` values).
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        check_vertex_count(labels.len())?;
        let mut map = std::collections::HashMap::with_capacity(labels.len().min(1 << 16));
        let mut canon = Vec::with_capacity(labels.len());
        for &l in labels {
            let next = map.len() as u32;
            canon.push(*map.entry(l).or_insert(next));
        }
        Ok(Self::from_canonical(canon, map.len()))
    }

    /// Builds a partition from ids known to lie in `0..bound`.
    pub(crate) fn from_bounded_labels(labels: Vec<u32>, bound: usize) -> Self {
        let mut map = vec![u32::MAX; bound];
        let mut next = 0u32;
        let mut canon = labels;
        for l in canon.iter_mut() {
            let slot = &mut map[*l as usize];
            if *slot == u32::MAX {
                *slot = next;
                next += 1;
            }
            *l = *slot;
        }
        Self::from_canonical(canon, next as usize)
    }

    fn from_canonical(labels: Vec<u32>, blocks: usize) -> Self {
        let mut sizes = vec![0u32; blocks];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        Self { labels, sizes }
    }

    /// Builds a partition from explicit blocks; every vertex of `0..n` must
    /// appear in exactly one block.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        check_vertex_count(n)?;
        let mut labels = vec![u32::MAX; n];
        for (c, block) in blocks.iter().enumerate() {
            for &v in block {
                if v >= n {
                    return Err(invalid(format!("vertex {v} out of range for n = {n}")));
                }
                if labels[v] != u32::MAX {
                    return Err(invalid(format!("vertex {v} appears in two blocks")));
                }
                labels[v] = c as u32;
            }
        }
        if let Some(v) = labels.iter().position(|&l| l == u32::MAX) {
            return Err(invalid(format!("vertex {v} is not covered by any block")));
        }
        Ok(Self::from_bounded_labels(labels, blocks.len()))
    }

    /// `n` singleton communities.
    pub fn singletons(n: usize) -> Self {
        Self::from_canonical((0..n as u32).collect(), n)
    }

    /// A single community containing all `n` vertices.
    pub fn one_block(n: usize) -> Self {
        Self::from_canonical(vec![0; n], usize::from(n > 0))
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> usize {
        self.labels[v] as usize
    }

    pub fn block_sizes(&self) -> &[u32] {
        &self.sizes
    }

    /// Size of the community containing `v`.
    pub fn block_size_of(&self, v: usize) -> usize {
        self.sizes[self.labels[v] as usize] as usize
    }

    pub fn is_all_singletons(&self) -> bool {
        self.sizes.len() == self.labels.len()
    }

    pub fn is_one_block(&self) -> bool {
        self.sizes.len() == 1
    }

    /// Groups vertices by community with a counting sort.
    pub fn members(&self) -> BlockMembers {
        let mut offsets = Vec::with_capacity(self.sizes.len() + 1);
        offsets.push(0usize);
        for &s in &self.sizes {
            offsets.push(offsets.last().unwrap() + s as usize);
        }
        let mut cursor = offsets[..self.sizes.len()].to_vec();
        let mut vertices = vec![0u32; self.labels.len()];
        for (v, &l) in self.labels.iter().enumerate() {
            let slot = &mut cursor[l as usize];
            vertices[*slot] = v as u32;
            *slot += 1;
        }
        BlockMembers { offsets, vertices }
    }

    /// Number of vertex pairs that share a community, `m_T`.
    pub fn intra_pair_count(&self) -> u64 {
        self.sizes.iter().map(|&s| choose2(s as u64)).sum()
    }

    /// `E[S^r]` for the size `S` of the community of a uniformly random vertex,
    /// i.e. `(1/n) Σ_c size_c^(r+1)`.
    pub fn size_moment(&self, r: u32) -> Result<f64> {
        if r < 1 {
            return Err(invalid("size_moment requires r >= 1"));
        }
        if self.labels.is_empty() {
            return Err(invalid("size_moment of an empty partition"));
        }
        let n = self.labels.len() as f64;
        // Exact integer accumulation while it fits, float otherwise.
        let mut exact: Option<u128> = Some(0);
        for &s in &self.sizes {
            exact = exact.and_then(|acc| {
                (s as u128)
                    .checked_pow(r + 1)
                    .and_then(|v| acc.checked_add(v))
            });
        }
        Ok(match exact {
            Some(total) => total as f64 / n,
            None => self
                .sizes
                .iter()
                .map(|&s| (s as f64).powi(r as i32 + 1) / n)
                .sum(),
        })
    }

    /// Applies a vertex permutation: vertex `v` moves to `perm[v]`.
    pub fn permute_vertices(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n() {
            return Err(invalid("permutation length differs from n"));
        }
        let mut labels = vec![u32::MAX; self.n()];
        for (v, &w) in perm.iter().enumerate() {
            if w >= self.n() || labels[w] != u32::MAX {
                return Err(invalid("not a permutation"));
            }
            labels[w] = self.labels[v];
        }
        Ok(Self::from_bounded_labels(labels, self.num_blocks()))
    }

    /// Checks every structural invariant; used by tests and after parsing.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.labels.len();
        if n > 0 && self.sizes.is_empty() {
            return Err(invalid("nonempty vertex set with no blocks"));
        }
        let mut counts = vec![0u32; self.sizes.len()];
        let mut next = 0u32;
        for &l in &self.labels {
            let l = l as usize;
            if l >= self.sizes.len() {
                return Err(invalid(format!("label {l} out of range")));
            }
            if l as u32 > next {
                return Err(invalid("labels are not in first-occurrence order"));
            }
            if l as u32 == next {
                next += 1;
            }
            counts[l] += 1;
        }
        if counts != self.sizes || self.sizes.contains(&0) {
            return Err(invalid("block sizes disagree with labels"));
        }
        Ok(())
    }

    /// Writes `vertex<TAB>community` lines for vertices `0..n`.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (v, l) in self.labels.iter().enumerate() {
            writeln!(w, "{v}\t{l}")?;
        }
        w.flush()
    }

    /// Parses the partition file format. Vertex ids must be `0..n` in order;
    /// community ids must be dense from 0. Blank lines and `#` comments are
    /// skipped.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut raw: Vec<usize> = Vec::new();
        let mut max_label = 0usize;
        for (idx, line) in r.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |msg: &str| Error::Parse {
                line: line_no,
                msg: msg.to_string(),
            };
            let mut fields = line.split_whitespace();
            let (Some(v), Some(c), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(parse_err("expected `<vertex>\\t<community>`"));
            };
            let v: usize = v.parse().map_err(|_| parse_err("bad vertex id"))?;
            let c: usize = c.parse().map_err(|_| parse_err("bad community id"))?;
            if v != raw.len() {
                return Err(parse_err(&format!(
                    "expected vertex {}, found {v} (gap or duplicate)",
                    raw.len()
                )));
            }
            max_label = max_label.max(c);
            raw.push(c);
        }
        if raw.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "empty partition file".into(),
            });
        }
        let mut seen = vec![false; max_label + 1];
        for &c in &raw {
            seen[c] = true;
        }
        if let Some(gap) = seen.iter().position(|s| !s) {
            return Err(Error::Parse {
                line: 0,
                msg: format!("community ids are not dense: {gap} is unused"),
            });
        }
        check_vertex_count(raw.len())?;
        let labels = raw.into_iter().map(|c| c as u32).collect();
        Ok(Self::from_bounded_labels(labels, max_label + 1))
    }
}

fn check_vertex_count(n: usize) -> Result<()> {
    if n > u32::MAX as usize {
        return Err(invalid(format!("n = {n} exceeds the 32-bit vertex id range")));
    }
    Ok(())
}

pub(crate) fn choose2(s: u64) -> u64 {
    s * s.saturating_sub(1) / 2
}

/// Power-law community proportions `Π_a = e^{X_a/τ} / Σ_b e^{X_b/τ}` with
/// `X_a ~ Exp(1)` i.i.d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawSpec {
    pub tau: f64,
    pub k: usize,
    pub proportions: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `k` communities of size `s` on the first `k·s` vertices; the rest are
/// singletons.
pub fn balanced_partition(n: usize, k: usize, s: usize) -> Result<Partition> {
    if k < 1 || s < 1 {
        return Err(invalid("balanced partition needs k >= 1 and s >= 1"));
    }
    let used = k
        .checked_mul(s)
        .filter(|&u| u <= n)
        .ok_or_else(|| invalid(format!("k·s = {k}·{s} exceeds n = {n}")))?;
    check_vertex_count(n)?;
    let mut labels = Vec::with_capacity(n);
    for c in 0..k {
        labels.extend(std::iter::repeat_n(c as u32, s));
    }
    labels.extend(k as u32..(k + n - used) as u32);
    let blocks = k + n - used;
    Ok(Partition::from_canonical(labels, blocks))
}

/// Assigns every vertex independently to community `a` with probability
/// `probs[a]`. Empty communities are dropped.
pub fn multinomial_partition<R: Rng + ?Sized>(
    n: usize,
    probs: &[f64],
    rng: &mut R,
) -> Result<Partition> {
    if n == 0 {
        return Err(invalid("multinomial partition needs n >= 1"));
    }
    check_vertex_count(n)?;
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(invalid("probabilities must be finite and nonnegative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("probabilities sum to {total}, not 1")));
    }
    let dist = WeightedIndex::new(probs).map_err(|e| invalid(e.to_string()))?;
    let labels: Vec<u32> = (0..n).map(|_| dist.sample(rng) as u32).collect();
    Ok(Partition::from_bounded_labels(labels, probs.len()))
}

/// Draws power-law proportions for `k` communities with exponent `tau > 2`.
pub fn powerlaw_proportions<R: Rng + ?Sized>(tau: f64, k: usize, rng: &mut R) -> Result<PowerLawSpec> {
    if !(tau > 2.0) || !tau.is_finite() {
        return Err(invalid(format!("power-law exponent must exceed 2, got {tau}")));
    }
    if k < 1 {
        return Err(invalid("power-law partition needs k >= 1"));
    }
    let weights: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    // Shift by the maximum so that exp() cannot overflow.
    let max = weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut proportions: Vec<f64> = weights.iter().map(|x| ((x - max) / tau).exp()).collect();
    let total = neumaier_sum(&proportions);
    for p in proportions.iter_mut() {
        *p /= total;
    }
    Ok(PowerLawSpec {
        tau,
        k,
        proportions,
        weights,
    })
}

/// `Powerlaw(τ, k, n)`: a multinomial partition over freshly drawn power-law
/// proportions.
pub fn powerlaw_partition<R: Rng + ?Sized>(
    tau: f64,
    k: usize,
    n: usize,
    rng: &mut R,
) -> Result<Partition> {
    let props = powerlaw_proportions(tau, k, rng)?;
    multinomial_partition(n, &props.proportions, rng)
}

pub(crate) fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Solves `x·e^x = n_target` by Newton iteration.
pub fn boltzmann_parameter(n_target: f64) -> Result<f64> {
    if !(n_target > 0.0) || !n_target.is_finite() {
        return Err(invalid("Boltzmann target size must be positive"));
    }
    // ln(n) - ln ln(n) is a good start for large n; 0.5 otherwise.
    let mut x = if n_target > 3.0 {
        n_target.ln() - n_target.ln().ln()
    } else {
        0.5
    };
    for _ in 0..200 {
        let f = x * x.exp() - n_target;
        let step = f / ((1.0 + x) * x.exp());
        x -= step;
        if step.abs() <= 1e-12 * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::Numeric(format!(
        "Newton iteration for x·e^x = {n_target} did not converge"
    )))
}

/// Boltzmann sampler for set partitions tuned so that the expected number of
/// vertices is `n_target`. Conditioned on its vertex count `n'`, the output
/// is uniform over all set partitions of `0..n'`.
///
/// The block count is Poisson(e^x − 1) and every block size is a zero-truncated
/// Poisson(x). The (rare) empty outcome is rejected and redrawn.
pub fn uniform_partition_boltzmann<R: Rng + ?Sized>(n_target: usize, rng: &mut R) -> Result<Partition> {
    if n_target < 1 {
        return Err(invalid("Boltzmann sampler needs n_target >= 1"));
    }
    let x = boltzmann_parameter(n_target as f64)?;
    let blocks_dist = Poisson::new(x.exp_m1()).map_err(|e| Error::Numeric(e.to_string()))?;
    let size_dist = Poisson::new(x).map_err(|e| Error::Numeric(e.to_string()))?;
    loop {
        let blocks = blocks_dist.sample(rng) as usize;
        if blocks == 0 {
            continue;
        }
        let mut labels: Vec<u32> = Vec::new();
        for c in 0..blocks {
            let size = loop {
                let s = size_dist.sample(rng) as usize;
                if s > 0 {
                    break s;
                }
            };
            labels.extend(std::iter::repeat_n(c as u32, size));
        }
        check_vertex_count(labels.len())?;
        labels.shuffle(rng);
        return Ok(Partition::from_bounded_labels(labels, blocks));
    }
}
