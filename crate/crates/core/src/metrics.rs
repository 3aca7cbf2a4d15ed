//! Pair-counting comparison of partitions.
//!
//! For partitions `C` and `T` of the same vertex set, `m_C` and `m_T` count
//! intra-community pairs and `m_CT` counts pairs that are together in both.
//! The correlation coefficient is the Pearson correlation of the two pair
//! indicators:
//!
//! ```text
//! ρ(C,T) = (m_CT·N − m_C·m_T) / sqrt(m_C·(N−m_C)·m_T·(N−m_T)),   N = n(n−1)/2
//! ```

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::partition::{choose2, Partition};

/// The four pair statistics behind the correlation coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairCounts {
    /// Total number of vertex pairs.
    #[serde(rename = "N")]
    pub pairs: u64,
    #[serde(rename = "m_C")]
    pub m_c: u64,
    #[serde(rename = "m_T")]
    pub m_t: u64,
    #[serde(rename = "m_CT")]
    pub m_ct: u64,
}

impl PairCounts {
    /// Correlation coefficient from the counts, with the degenerate-case
    /// policy of [`correlation`].
    pub fn correlation(&self) -> Result<f64> {
        let PairCounts {
            pairs: n,
            m_c,
            m_t,
            m_ct,
        } = *self;
        let degenerate = |m: u64| m == 0 || m == n;
        if degenerate(m_c) || degenerate(m_t) {
            if m_c == m_t && m_ct == m_c {
                return Ok(1.0);
            }
            if (m_c == 0 && m_t == n) || (m_c == n && m_t == 0) {
                return Ok(-1.0);
            }
            return Err(Error::UndefinedCorrelation { m_c, m_t, pairs: n });
        }
        if m_ct == m_c && m_ct == m_t {
            return Ok(1.0);
        }
        let (n, m_c, m_t, m_ct) = (n as i128, m_c as i128, m_t as i128, m_ct as i128);
        let numerator = m_ct * n - m_c * m_t;
        let var_c = (m_c * (n - m_c)) as f64;
        let var_t = (m_t * (n - m_t)) as f64;
        let rho = numerator as f64 / (var_c * var_t).sqrt();
        Ok(rho.clamp(-1.0, 1.0))
    }
}

fn check_same_size(c: &Partition, t: &Partition) -> Result<()> {
    if c.n() != t.n() {
        return Err(invalid(format!(
            "partitions have different vertex counts ({} vs {})",
            c.n(),
            t.n()
        )));
    }
    Ok(())
}

/// Exact pair counts in `O(n)` via the contingency table of block
/// intersections.
pub fn pair_counts(c: &Partition, t: &Partition) -> Result<PairCounts> {
    check_same_size(c, t)?;
    if c.n() < 2 {
        return Err(invalid("pair counts need at least two vertices"));
    }
    let members = c.members();
    let mut counts = vec![0u32; t.num_blocks()];
    let mut touched: Vec<u32> = Vec::new();
    let mut m_ct = 0u64;
    for block in members.iter() {
        for &v in block {
            let l = t.labels()[v as usize];
            if counts[l as usize] == 0 {
                touched.push(l);
            }
            counts[l as usize] += 1;
        }
        for &l in &touched {
            m_ct += choose2(counts[l as usize] as u64);
            counts[l as usize] = 0;
        }
        touched.clear();
    }
    Ok(PairCounts {
        pairs: choose2(c.n() as u64),
        m_c: c.intra_pair_count(),
        m_t: t.intra_pair_count(),
        m_ct,
    })
}

/// Correlation coefficient `ρ(C, T)`.
///
/// Degenerate partitions (all singletons or a single block) make the formula
/// 0/0. Identical partitions give 1; singletons against a single block gives
/// −1; every other degenerate combination is
/// [`Error::UndefinedCorrelation`].
pub fn correlation(c: &Partition, t: &Partition) -> Result<f64> {
    pair_counts(c, t)?.correlation()
}

/// `C ⪯ T`: every block of `C` lies inside one block of `T`.
pub fn is_refinement(c: &Partition, t: &Partition) -> Result<bool> {
    check_same_size(c, t)?;
    let mut image = vec![u32::MAX; c.num_blocks()];
    for (&lc, &lt) in c.labels().iter().zip(t.labels()) {
        let slot = &mut image[lc as usize];
        if *slot == u32::MAX {
            *slot = lt;
        } else if *slot != lt {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Closed form of the correlation when `C ⪯ T`:
/// `sqrt((m_C/m_T)·(N−m_T)/(N−m_C))`.
pub fn refinement_correlation(c: &Partition, t: &Partition) -> Result<f64> {
    if !is_refinement(c, t)? {
        return Err(invalid("refinement_correlation requires C ⪯ T"));
    }
    let counts = pair_counts(c, t)?;
    if counts.m_t == 0 || counts.m_t == counts.pairs {
        return Err(invalid("refinement_correlation requires 0 < m_T < N"));
    }
    let (n, m_c, m_t) = (counts.pairs as f64, counts.m_c as f64, counts.m_t as f64);
    Ok(((m_c / m_t) * ((n - m_t) / (n - m_c))).sqrt())
}

/// Correlations `ρ(π(T), T)` for `trials` uniformly random vertex
/// permutations `π`.
pub fn constant_baseline_samples<R: Rng + ?Sized>(
    t: &Partition,
    trials: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(invalid("constant baseline needs at least one trial"));
    }
    let m_t = t.intra_pair_count();
    if t.n() < 2 || m_t == 0 || m_t == choose2(t.n() as u64) {
        return Err(invalid("constant baseline requires 0 < m_T < N"));
    }
    let mut perm: Vec<usize> = (0..t.n()).collect();
    (0..trials)
        .map(|_| {
            perm.shuffle(rng);
            correlation(&t.permute_vertices(&perm)?, t)
        })
        .collect()
}

/// Mean of [`constant_baseline_samples`]; close to 0 for any nontrivial `T`.
pub fn constant_baseline_estimate<R: Rng + ?Sized>(t: &Partition, trials: usize, rng: &mut R) -> Result<f64> {
    let samples = constant_baseline_samples(t, trials, rng)?;
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Rounds to 15 significant digits.
pub fn round_sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

/// The JSON object emitted by `score`.
#[derive(Debug, Clone, Serialize)]
pub struct ScoreReport {
    pub n: usize,
    #[serde(flatten)]
    pub counts: PairCounts,
    /// `None` when the correlation is undefined for the pair.
    pub rho: Option<f64>,
    pub is_refinement: bool,
}

/// Scores a detected partition `c` against the truth `t`.
pub fn score(c: &Partition, t: &Partition) -> Result<ScoreReport> {
    let counts = pair_counts(c, t)?;
    let rho = match counts.correlation() {
        Ok(r) => Some(round_sig15(r)),
        Err(Error::UndefinedCorrelation { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(ScoreReport {
        n: c.n(),
        counts,
        rho,
        is_refinement: is_refinement(c, t)?,
    })
}
