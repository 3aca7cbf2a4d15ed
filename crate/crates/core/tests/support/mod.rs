//! Brute-force oracles and randomized invariant checks shared by the
//! integration tests and the acceptance harness.

#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use diamondperc::diamond::{diamond_percolation, diamond_percolation_with_stats, filter_edges, DiamondConfig};
use diamondperc::graph::{degree_stats, sample_er, sample_ppm, Graph, PpmParams};
use diamondperc::metrics::{correlation, is_refinement, pair_counts, refinement_correlation};
use diamondperc::partition::{
    balanced_partition, multinomial_partition, powerlaw_partition, uniform_partition_boltzmann, Partition,
};
use diamondperc::rng::seeded;
use diamondperc::Error;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------- oracles

/// Pair counts `(N, m_C, m_T, m_CT)` by looping over all vertex pairs.
pub fn pair_loop_counts(c: &Partition, t: &Partition) -> (u64, u64, u64, u64) {
    let (mut total, mut mc, mut mt, mut mct) = (0, 0, 0, 0);
    for i in 0..c.n() {
        for j in i + 1..c.n() {
            let (a, b) = (c.label(i) == c.label(j), t.label(i) == t.label(j));
            total += 1;
            mc += a as u64;
            mt += b as u64;
            mct += (a && b) as u64;
        }
    }
    (total, mc, mt, mct)
}

/// Pearson correlation of the two pair-indicator vectors; `None` when either
/// has zero variance.
pub fn pearson_oracle(c: &Partition, t: &Partition) -> Option<f64> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    for i in 0..c.n() {
        for j in i + 1..c.n() {
            x.push((c.label(i) == c.label(j)) as u8 as f64);
            y.push((t.label(i) == t.label(j)) as u8 as f64);
        }
    }
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(&y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

pub fn adjacency_matrix(g: &Graph) -> Vec<Vec<bool>> {
    let mut adj = vec![vec![false; g.n()]; g.n()];
    for (u, v) in g.edges() {
        adj[u][v] = true;
        adj[v][u] = true;
    }
    adj
}

/// Diamond Percolation by triangle enumeration over an adjacency matrix:
/// an edge survives when it lies in at least `t` triangles.
pub fn triangle_oracle(adj: &[Vec<bool>], t: usize) -> Partition {
    let n = adj.len();
    let mut kept = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            if adj[i][j] {
                let triangles = (0..n).filter(|&k| adj[i][k] && adj[j][k]).count();
                if triangles >= t {
                    kept[i][j] = true;
                    kept[j][i] = true;
                }
            }
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for s in 0..n {
        if labels[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        labels[s] = next;
        while let Some(v) = stack.pop() {
            for w in 0..n {
                if kept[v][w] && labels[w] == usize::MAX {
                    labels[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    Partition::from_labels(&labels).expect("oracle labels are dense")
}

/// Exact `(s′, Δ)` for `s = 4` by summing over all 64 labeled graphs on four
/// vertices.
pub fn enumerate_delta_s4(p: f64) -> (f64, f64) {
    let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    let mut s_prime = 0.0;
    for mask in 0u32..64 {
        let mut adj = vec![vec![false; 4]; 4];
        let mut weight = 1.0;
        for (bit, &(a, b)) in pairs.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                adj[a][b] = true;
                adj[b][a] = true;
                weight *= p;
            } else {
                weight *= 1.0 - p;
            }
        }
        s_prime += weight * triangle_oracle(&adj, 2).block_size_of(0) as f64;
    }
    (s_prime, ((s_prime - 1.0) / 3.0).sqrt())
}

// ------------------------------------------------------------- generators

pub fn random_partition<R: Rng>(n: usize, rng: &mut R) -> Partition {
    let k = rng.random_range(1..=n);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    Partition::from_labels(&labels).unwrap()
}

/// A random partition refining `t`: every block is split at random.
pub fn random_refinement<R: Rng>(t: &Partition, rng: &mut R) -> Partition {
    let mut labels = vec![0usize; t.n()];
    let mut offset = 0;
    for block in t.members().iter() {
        let pieces = rng.random_range(1..=block.len());
        for &v in block {
            labels[v as usize] = offset + rng.random_range(0..pieces);
        }
        offset += pieces;
    }
    Partition::from_labels(&labels).unwrap()
}

pub fn random_graph<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    sample_er(n, p, rng).unwrap()
}

pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

fn graph_input() -> impl Strategy<Value = (usize, f64, u64)> {
    (1usize..=30, 0.0f64..=0.8, any::<u64>())
}

// -------------------------------------------------------------- invariants

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(fail(format!($($fmt)+)));
        }
    };
}

/// Under `C ⪯ T` the correlation equals `sqrt((m_C/m_T)(N−m_T)/(N−m_C))`.
pub fn check_refinement_identity((n, seed): (usize, u64)) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let t = random_partition(n, &mut rng);
    let c = random_refinement(&t, &mut rng);
    ensure!(is_refinement(&c, &t).unwrap(), "generator produced a non-refinement");
    let pc = pair_counts(&c, &t).unwrap();
    if pc.m_t == 0 || pc.m_t == pc.pairs || pc.m_c == 0 {
        return Ok(());
    }
    let rho = correlation(&c, &t).unwrap();
    let closed = refinement_correlation(&c, &t).unwrap();
    ensure!((rho - closed).abs() <= 1e-12, "rho {rho} vs closed form {closed}");
    Ok(())
}

/// Raising the threshold removes edges and refines the output partition.
pub fn check_threshold_monotone((n, p, seed): (usize, f64, u64)) -> Result<(), TestCaseError> {
    let g = random_graph(n, p, &mut seeded(seed));
    let mut prev_graph = g.clone();
    let mut prev_part: Option<Partition> = None;
    for t in 1..=5 {
        let cfg = DiamondConfig::new(t).unwrap();
        let filtered = filter_edges(&g, cfg);
        ensure!(filtered.is_subgraph_of(&prev_graph), "G*_{t} not inside G*_{}", t - 1);
        let part = diamond_percolation(&g, cfg);
        if let Some(prev) = &prev_part {
            ensure!(is_refinement(&part, prev).unwrap(), "C_{t} does not refine C_{}", t - 1);
        }
        prev_graph = filtered;
        prev_part = Some(part);
    }
    Ok(())
}

/// `G* ⊆ G`, every kept edge has enough common neighbors, and the
/// union-find output matches components of `G*`.
pub fn check_filtered_subgraph((n, p, seed): (usize, f64, u64)) -> Result<(), TestCaseError> {
    let g = random_graph(n, p, &mut seeded(seed));
    for t in 1..=3 {
        let cfg = DiamondConfig::new(t).unwrap();
        let gs = filter_edges(&g, cfg);
        gs.check_invariants().map_err(|e| fail(e.to_string()))?;
        ensure!(gs.is_subgraph_of(&g), "G* not a subgraph");
        ensure!(gs.n() == g.n(), "vertex set changed");
        for (u, v) in g.edges() {
            let w = diamondperc::diamond::common_neighbors(&g, u, v).unwrap();
            ensure!(gs.has_edge(u, v) == (w >= t as usize), "edge {u}-{v} with W={w} mishandled");
        }
        let via_bfs = diamondperc::diamond::connected_components(&gs);
        ensure!(via_bfs == diamond_percolation(&g, cfg), "union-find and BFS disagree");
    }
    Ok(())
}

/// Relabeling vertices commutes with detection, and the correlation is
/// invariant under a joint relabeling.
pub fn check_permutation_equivariance((n, p, seed): (usize, f64, u64)) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let g = random_graph(n, p, &mut rng);
    let perm = random_permutation(n, &mut rng);
    let cfg = DiamondConfig::default();
    let direct = diamond_percolation(&g, cfg).permute_vertices(&perm).unwrap();
    let relabeled = diamond_percolation(&g.permute_vertices(&perm).unwrap(), cfg);
    ensure!(direct == relabeled, "detection is not permutation equivariant");
    if n >= 2 {
        let c = random_partition(n, &mut rng);
        let t = random_partition(n, &mut rng);
        let before = pair_counts(&c, &t).unwrap();
        let after = pair_counts(&c.permute_vertices(&perm).unwrap(), &t.permute_vertices(&perm).unwrap()).unwrap();
        ensure!(before == after, "pair counts changed under relabeling");
    }
    Ok(())
}

/// Vertices of degree at most `t` end up as singletons.
pub fn check_low_degree_singletons((n, p, seed): (usize, f64, u64)) -> Result<(), TestCaseError> {
    let g = random_graph(n, p, &mut seeded(seed));
    for t in 1..=3u32 {
        let c = diamond_percolation(&g, DiamondConfig::new(t).unwrap());
        for v in 0..n {
            if g.degree(v) <= t as usize {
                ensure!(c.block_size_of(v) == 1, "vertex {v} of degree {} not isolated at t={t}", g.degree(v));
            }
        }
    }
    Ok(())
}

/// Merge steps never exceed `n + Σ d_i²`.
pub fn check_complexity_counter((n, p, seed): (usize, f64, u64)) -> Result<(), TestCaseError> {
    let g = random_graph(n, p, &mut seeded(seed));
    let ds = degree_stats(&g);
    let (_, stats) = diamond_percolation_with_stats(&g, DiamondConfig::default());
    let budget = n as u64 + ds.sum_sq;
    ensure!(stats.merge_steps <= budget, "{} merge steps exceed {budget}", stats.merge_steps);
    Ok(())
}

/// Every sampler returns a valid canonical partition of the requested size.
pub fn check_sampler_invariants((n, seed): (usize, u64)) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let check = |p: &Partition, expect_n: Option<usize>, what: &str| -> Result<(), TestCaseError> {
        p.check_invariants().map_err(|e| fail(format!("{what}: {e}")))?;
        if let Some(m) = expect_n {
            ensure!(p.n() == m, "{what}: n = {} instead of {m}", p.n());
        }
        let relabeled = Partition::from_labels(&p.labels().iter().map(|&l| l as usize).collect::<Vec<_>>()).unwrap();
        ensure!(&relabeled == p, "{what}: labels not canonical");
        ensure!(
            (p.size_moment(1).unwrap() - (1.0 + 2.0 * p.intra_pair_count() as f64 / p.n() as f64)).abs() < 1e-9,
            "{what}: size moment identity"
        );
        Ok(())
    };
    let k = rng.random_range(1..=n);
    let s = rng.random_range(1..=n / k);
    check(&balanced_partition(n, k, s).unwrap(), Some(n), "balanced")?;
    let mut probs: Vec<f64> = (0..rng.random_range(1..6)).map(|_| rng.random::<f64>()).collect();
    probs.push(1.0);
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|x| *x /= total);
    check(&multinomial_partition(n, &probs, &mut rng).unwrap(), Some(n), "multinomial")?;
    let tau = rng.random_range(2.05..6.0);
    check(&powerlaw_partition(tau, k, n, &mut rng).unwrap(), Some(n), "powerlaw")?;
    check(&uniform_partition_boltzmann(n, &mut rng).unwrap(), None, "boltzmann")?;
    Ok(())
}

/// Sampled graphs are simple with sorted adjacency; `p = 1, q = 0` gives
/// disjoint cliques; edge lists round-trip through the file format.
pub fn check_graph_sampler((n, p, seed): (usize, f64, u64)) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let t = random_partition(n, &mut rng);
    let g = sample_ppm(&t, PpmParams::new(p, p / 4.0).unwrap(), &mut rng).unwrap();
    g.check_invariants().map_err(|e| fail(e.to_string()))?;
    let cliques = sample_ppm(&t, PpmParams::new(1.0, 0.0).unwrap(), &mut rng).unwrap();
    ensure!(cliques.edge_count() as u64 == t.intra_pair_count(), "clique edge count");
    for (u, v) in cliques.edges() {
        ensure!(t.label(u) == t.label(v), "cross edge with q = 0");
    }
    let mut buf = Vec::new();
    g.write_edge_list(&mut buf).unwrap();
    ensure!(Graph::read_edge_list(&buf[..]).unwrap() == g, "edge list round trip");
    let mut buf = Vec::new();
    t.write_to(&mut buf).unwrap();
    ensure!(Partition::read_from(&buf[..]).unwrap() == t, "partition file round trip");
    Ok(())
}

/// `pair_counts` equals the pair loop; the correlation is symmetric and lies
/// in `[−1, 1]` or follows the degenerate policy.
pub fn check_metric_oracle((n, seed): (usize, u64)) -> Result<(), TestCaseError> {
    let mut rng = seeded(seed);
    let c = random_partition(n, &mut rng);
    let t = random_partition(n, &mut rng);
    check_metric_pair(&c, &t)
}

pub fn check_metric_pair(c: &Partition, t: &Partition) -> Result<(), TestCaseError> {
    let pc = pair_counts(c, t).unwrap();
    ensure!(
        (pc.pairs, pc.m_c, pc.m_t, pc.m_ct) == pair_loop_counts(c, t),
        "pair counts {pc:?} differ from the pair loop"
    );
    match (correlation(c, t), pearson_oracle(c, t)) {
        (Ok(rho), Some(oracle)) => {
            ensure!((rho - oracle).abs() <= 1e-12, "rho {rho} vs Pearson {oracle}");
            ensure!((-1.0..=1.0).contains(&rho), "rho {rho} out of range");
            let back = correlation(t, c).unwrap();
            ensure!(back == rho, "asymmetric correlation");
        }
        (Ok(rho), None) => {
            let expected = if c == t { 1.0 } else { -1.0 };
            ensure!(rho == expected, "degenerate pair gave {rho}");
            ensure!(c == t || (c.is_all_singletons() && t.is_one_block()) || (c.is_one_block() && t.is_all_singletons()), "unexpected degenerate value");
        }
        (Err(Error::UndefinedCorrelation { .. }), None) => {
            ensure!(c != t, "identical partitions reported undefined");
        }
        (r, o) => return Err(fail(format!("correlation {r:?} vs oracle {o:?}"))),
    }
    Ok(())
}

/// The named invariant checks with their input strategies, each run for
/// `cases` randomized cases. Returns the failures.
pub fn run_invariant_suite(cases: u32) -> Vec<(String, String)> {
    let mut failures = Vec::new();
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    macro_rules! run {
        ($name:literal, $strategy:expr, $check:expr) => {
            let mut runner = TestRunner::new(config.clone());
            if let Err(e) = runner.run(&$strategy, $check) {
                failures.push(($name.to_string(), e.to_string()));
            }
        };
    }
    run!("refinement identity", (2usize..=40, any::<u64>()), check_refinement_identity);
    run!("threshold monotonicity", graph_input(), check_threshold_monotone);
    run!("filtered graph is a subgraph", graph_input(), check_filtered_subgraph);
    run!("permutation equivariance", graph_input(), check_permutation_equivariance);
    run!("low-degree singletons", graph_input(), check_low_degree_singletons);
    run!("complexity counter", graph_input(), check_complexity_counter);
    run!("sampler invariants", (1usize..=60, any::<u64>()), check_sampler_invariants);
    run!("graph sampler invariants", (1usize..=30, 0.0f64..=1.0, any::<u64>()), check_graph_sampler);
    run!("metric oracle", (2usize..=40, any::<u64>()), check_metric_oracle);
    failures
}

/// Names of the checks in [`run_invariant_suite`].
pub const INVARIANT_NAMES: [&str; 9] = [
    "refinement identity",
    "threshold monotonicity",
    "filtered graph is a subgraph",
    "permutation equivariance",
    "low-degree singletons",
    "complexity counter",
    "sampler invariants",
    "graph sampler invariants",
    "metric oracle",
];
