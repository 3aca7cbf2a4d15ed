//! Closed-form recovery thresholds, bounds and limit laws, and the Monte
//! Carlo estimate of the weak-recovery constant `Δ`.
//!
//! Asymptotic statements (`ω(1)`, `≪`, `≫`) have no finite-`n` meaning. The
//! regime checkers therefore take the slack `omega` from the caller and use
//! fixed factors for `≪`/`≫` ([`MUCH_GREATER`], [`MUCH_LESS`]); every
//! clause is reported so a marginal condition is visible.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diamond::{diamond_percolation, DiamondConfig};
use crate::error::{invalid, Error, Result};
use crate::graph::sample_er;
use crate::quadrature::integrate;
use crate::rng::stream_rng;

/// Finite-`n` surrogate for `a ≫ b`: `a ≥ 10·b`.
pub const MUCH_GREATER: f64 = 10.0;
/// Finite-`n` surrogate for `a ≪ b`: `a ≤ 0.1·b`.
pub const MUCH_LESS: f64 = 0.1;

/// Model quantities used by the regime calculators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeInputs {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    /// `E[S_n]`.
    pub mean_s: f64,
    /// `E[S_n²]`.
    pub mean_s2: f64,
    /// `E[m_T]`.
    pub expected_mt: f64,
    /// Minimum community size `s_n^(min)`.
    pub s_min: f64,
    /// Finite-`n` stand-in for the `ω(1)` slack.
    pub omega: f64,
    pub epsilon: f64,
}

impl RegimeInputs {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [self.mean_s, self.mean_s2, self.expected_mt, self.omega, self.epsilon];
        if nonneg.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(invalid("regime inputs must be finite and nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.p) || !(0.0..=1.0).contains(&self.q) {
            return Err(invalid("p and q must be probabilities"));
        }
        if !(self.s_min >= 1.0) {
            return Err(invalid("s_min must be at least 1"));
        }
        Ok(())
    }
}

/// One inequality of a regime check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Per-clause outcome of a regime check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub clauses: Vec<Clause>,
    pub all_hold: bool,
}

impl Diagnostics {
    fn new(clauses: Vec<Clause>) -> Self {
        let all_hold = clauses.iter().all(|c| c.holds);
        Self { clauses, all_hold }
    }

    pub fn clause(&self, name: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.name == name)
    }
}

fn at_least(name: &str, lhs: f64, rhs: f64) -> Clause {
    Clause {
        name: name.into(),
        lhs,
        rhs,
        holds: lhs >= rhs,
    }
}

fn at_most(name: &str, lhs: f64, rhs: f64) -> Clause {
    Clause {
        name: name.into(),
        lhs,
        rhs,
        holds: lhs <= rhs,
    }
}

/// Order-of-magnitude bound on the expected number of inter-community edges
/// kept by the filter:
/// `n²·q·(2·p²q²·E[S²] + 2n·E[S]·p·q³ + n²·q⁴)` (constant omitted).
pub fn size_sparsity_score(inp: &RegimeInputs) -> Result<f64> {
    inp.validate()?;
    let (n, p, q) = (inp.n as f64, inp.p, inp.q);
    let terms = 2.0 * p * p * q * q * inp.mean_s2 + 2.0 * n * inp.mean_s * p * q.powi(3) + n * n * q.powi(4);
    Ok(n * n * q * terms)
}

/// Edge probability at which exact recovery is guaranteed:
/// `sqrt((log E[m_T] + log log E[m_T] + ω) / s_min)`.
pub fn exact_threshold_p(expected_mt: f64, s_min: f64, omega: f64) -> Result<f64> {
    if !(expected_mt > std::f64::consts::E) {
        return Err(invalid("exact threshold needs E[m_T] > e"));
    }
    if !(s_min >= 1.0) {
        return Err(invalid("s_min must be at least 1"));
    }
    let numer = expected_mt.ln() + expected_mt.ln().ln() + omega;
    if numer < 0.0 {
        return Err(invalid("omega makes the threshold numerator negative"));
    }
    Ok((numer / s_min).sqrt())
}

/// Edge probability at which almost exact recovery is guaranteed:
/// `sqrt((2 log s_min + log log s_min + ω) / s_min)`.
pub fn almost_exact_threshold_p(s_min: f64, omega: f64) -> Result<f64> {
    if !(s_min > std::f64::consts::E) {
        return Err(invalid("almost exact threshold needs s_min > e"));
    }
    let numer = 2.0 * s_min.ln() + s_min.ln().ln() + omega;
    if numer < 0.0 {
        return Err(invalid("omega makes the threshold numerator negative"));
    }
    Ok((numer / s_min).sqrt())
}

/// Threshold for weak recovery with an `ε`-fraction of small communities;
/// identical to the almost exact one.
pub fn weak_large_threshold_p(s_min: f64, omega: f64) -> Result<f64> {
    almost_exact_threshold_p(s_min, omega)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 2.0) || !tau.is_finite() {
        return Err(invalid(format!("power-law exponent must exceed 2, got {tau}")));
    }
    Ok(())
}

fn k_lower_limit(tau: f64, n: f64) -> f64 {
    n.sqrt().max(n.powf(1.0 / (tau - 1.0)))
}

/// Exact-recovery conditions for power-law partitions.
///
/// Clauses: `k ≫ max(√n, n^{1/(τ−1)})`,
/// `k ≤ (ε²/4)·((τ−1)/τ)·(n / log n)` and
/// `p² ≥ 3τ/(τ−1−ε) · k·log(n)/n`.
pub fn powerlaw_exact_condition(tau: f64, k: usize, n: usize, p: f64, eps: f64) -> Result<Diagnostics> {
    check_tau(tau)?;
    if !(eps > 0.0 && eps < tau - 1.0) {
        return Err(invalid("need 0 < eps < tau - 1"));
    }
    if k < 1 || n < 2 || !(0.0..=1.0).contains(&p) {
        return Err(invalid("need k >= 1, n >= 2 and p in [0, 1]"));
    }
    let (kf, nf) = (k as f64, n as f64);
    let ln_n = nf.ln();
    Ok(Diagnostics::new(vec![
        at_least("k >= 10*max(sqrt(n), n^(1/(tau-1)))", kf, MUCH_GREATER * k_lower_limit(tau, nf)),
        at_most(
            "k <= (eps^2/4)*((tau-1)/tau)*(n/log n)",
            kf,
            eps * eps / 4.0 * (tau - 1.0) / tau * nf / ln_n,
        ),
        at_least(
            "p^2 >= 3*tau/(tau-1-eps)*k*log(n)/n",
            p * p,
            3.0 * tau / (tau - 1.0 - eps) * kf * ln_n / nf,
        ),
    ]))
}

/// Almost-exact-recovery conditions for power-law partitions.
///
/// Clauses: `k ≫ max(√n, n^{1/(τ−1)})`, `k ≪ n` and
/// `p² ≥ 3τ/(τ−1) · k·log(n/k)/n`.
pub fn powerlaw_almost_exact_condition(tau: f64, k: usize, n: usize, p: f64) -> Result<Diagnostics> {
    check_tau(tau)?;
    if k < 1 || n < 2 || k > n || !(0.0..=1.0).contains(&p) {
        return Err(invalid("need 1 <= k <= n, n >= 2 and p in [0, 1]"));
    }
    let (kf, nf) = (k as f64, n as f64);
    Ok(Diagnostics::new(vec![
        at_least("k >= 10*max(sqrt(n), n^(1/(tau-1)))", kf, MUCH_GREATER * k_lower_limit(tau, nf)),
        at_most("k <= 0.1*n", kf, MUCH_LESS * nf),
        at_least(
            "p^2 >= 3*tau/(tau-1)*k*log(n/k)/n",
            p * p,
            3.0 * tau / (tau - 1.0) * kf * (nf / kf).ln() / nf,
        ),
    ]))
}

/// With high probability every power-law community is larger than
/// `(1−ε)·((τ−1)/τ)·(n/k)`.
pub fn min_size_bound_powerlaw(tau: f64, k: usize, n: usize, eps: f64) -> Result<f64> {
    check_tau(tau)?;
    if !(eps > 0.0 && eps < 1.0) || k < 1 {
        return Err(invalid("need 0 < eps < 1 and k >= 1"));
    }
    Ok((1.0 - eps) * (tau - 1.0) / tau * n as f64 / k as f64)
}

/// Asymptotic `E[m_T] ~ n²(τ−1)² / (2kτ(τ−2))` for `Powerlaw(τ, k, n)`.
pub fn expected_mt_powerlaw(tau: f64, k: usize, n: usize) -> Result<f64> {
    check_tau(tau)?;
    if k < 1 {
        return Err(invalid("k must be at least 1"));
    }
    let nf = n as f64;
    Ok(nf * nf * (tau - 1.0).powi(2) / (2.0 * k as f64 * tau * (tau - 2.0)))
}

/// Limit of `E[(kΠ*)^r]`: `(τ−1)^{1+r} / (τ^r (τ−1−r))`, finite for
/// `0 ≤ r < τ−1`.
pub fn biased_proportion_moment(tau: f64, r: f64) -> Result<f64> {
    check_tau(tau)?;
    if !(r >= 0.0) {
        return Err(invalid("moment order must be nonnegative"));
    }
    if r >= tau - 1.0 {
        return Err(invalid(format!("moment of order {r} diverges for tau = {tau}")));
    }
    Ok((tau - 1.0).powf(1.0 + r) / (tau.powf(r) * (tau - 1.0 - r)))
}

/// Pareto tail `P(Z > x) = min(1, (c/x)^β)`.
pub fn pareto_tail(c: f64, beta: f64, x: f64) -> Result<f64> {
    if !(c > 0.0 && beta > 0.0) {
        return Err(invalid("Pareto needs c > 0 and beta > 0"));
    }
    if !(x > 0.0) {
        return Err(invalid("Pareto tail needs x > 0"));
    }
    Ok((c / x).powf(beta).min(1.0))
}

/// Pareto CDF `P(Z ≤ x)`.
pub fn pareto_cdf(c: f64, beta: f64, x: f64) -> f64 {
    if x <= c {
        0.0
    } else {
        1.0 - (c / x).powf(beta)
    }
}

fn ln_factorial(r: u32) -> f64 {
    (2..=r as u64).map(|i| (i as f64).ln()).sum()
}

/// Limiting `P(S_n = r+1)` at linear community counts: the mixed Poisson
/// mass `E[Z^r e^{−Z} / r!]` with `Z ~ Pareto(s(1−1/τ), τ−1)`.
///
/// The expectation is integrated over `u ∈ (0, 1]` after substituting
/// `z = c·u^{−1/β}`, which maps the Pareto law onto the uniform one.
pub fn mixed_poisson_pmf(r: u32, s: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    if !(s > 1.0) || !s.is_finite() {
        return Err(invalid("mixed Poisson needs s > 1"));
    }
    let c = s * (1.0 - 1.0 / tau);
    let beta = tau - 1.0;
    let rf = r as f64;
    let log_norm = ln_factorial(r);
    let integrand = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let z = c * u.powf(-1.0 / beta);
        if !z.is_finite() {
            return 0.0;
        }
        let log_term = if r == 0 { -z } else { rf * z.ln() - z - log_norm };
        log_term.exp()
    };
    // Split the u-interval around the peak of z^r e^{-z} at z = r.
    let sd = (rf + 1.0).sqrt();
    let mut cuts: Vec<f64> = [
        rf - 10.0 * sd,
        rf - 3.0 * sd,
        rf,
        rf + 3.0 * sd,
        rf + 10.0 * sd,
        rf + 40.0 * (sd + 1.0),
    ]
    .into_iter()
    .filter(|&z| z > c)
    .map(|z| (c / z).powf(beta))
    .collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let tol = 1e-12 / cuts.len() as f64;
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate(&integrand, w[0], w[1], tol)?;
    }
    if !total.is_finite() || total < 0.0 {
        return Err(Error::Numeric(format!("mixed Poisson mass {total} for r = {r}")));
    }
    Ok(total)
}

/// Monte Carlo estimate of the weak-recovery constant for communities of
/// size `s` and internal density `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakRecoveryBound {
    /// Mean detected-community size of vertex 0 in `H ~ ER(s, p)`.
    pub s_prime: f64,
    /// `Δ = sqrt((s′ − 1)/(s − 1))`.
    pub delta: f64,
    /// Standard error of `s′` propagated to `Δ` (delta method).
    pub std_error: f64,
    pub trials: usize,
}

impl WeakRecoveryBound {
    /// Estimate from observed detected-community sizes of one vertex in
    /// graphs on `s` vertices.
    pub fn from_sizes(s: usize, sizes: &[usize]) -> Self {
        let trials = sizes.len();
        let t = trials as f64;
        let mean = sizes.iter().map(|&x| x as f64).sum::<f64>() / t;
        let var = if trials > 1 {
            sizes.iter().map(|&x| (x as f64 - mean).powi(2)).sum::<f64>() / (t - 1.0)
        } else {
            0.0
        };
        let se_mean = (var / t).sqrt();
        let span = (s - 1) as f64;
        let delta = ((mean - 1.0) / span).max(0.0).sqrt();
        let std_error = if delta > 0.0 {
            se_mean / (2.0 * delta * span)
        } else {
            (se_mean / span).sqrt()
        };
        Self {
            s_prime: mean,
            delta,
            std_error,
            trials,
        }
    }
}

fn check_delta_args(s: usize, p: f64, trials: usize) -> Result<()> {
    if s < 2 {
        return Err(invalid("delta estimate needs s >= 2"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p must be a probability"));
    }
    if trials < 1 {
        return Err(invalid("delta estimate needs at least one trial"));
    }
    Ok(())
}

/// Size of the detected community of vertex 0 in one `ER(s, p)` sample.
pub fn sample_detected_size<R: Rng + ?Sized>(s: usize, p: f64, rng: &mut R) -> Result<usize> {
    let h = sample_er(s, p, rng)?;
    Ok(diamond_percolation(&h, DiamondConfig::default()).block_size_of(0))
}

/// Estimates `Δ` from `trials` samples of `ER(s, p)` drawn from `rng`.
pub fn delta_lower_bound<R: Rng + ?Sized>(s: usize, p: f64, trials: usize, rng: &mut R) -> Result<WeakRecoveryBound> {
    check_delta_args(s, p, trials)?;
    let sizes = (0..trials)
        .map(|_| sample_detected_size(s, p, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeakRecoveryBound::from_sizes(s, &sizes))
}

/// Parallel variant of [`delta_lower_bound`]; trial `i` uses stream
/// `(base_seed, i)`, so the result does not depend on the thread count.
pub fn delta_lower_bound_seeded(s: usize, p: f64, trials: usize, base_seed: u64) -> Result<WeakRecoveryBound> {
    check_delta_args(s, p, trials)?;
    let sizes = (0..trials as u64)
        .into_par_iter()
        .map(|i| sample_detected_size(s, p, &mut stream_rng(base_seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(WeakRecoveryBound::from_sizes(s, &sizes))
}

/// Asymptotic floor `3p⁶·P(S ≥ 4) / (E[S] − 1)` of the weak-recovery bound.
pub fn weak_recovery_floor(prob_s_ge_4: f64, mean_s: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&prob_s_ge_4) || !(0.0..=1.0).contains(&p) {
        return Err(invalid("probabilities must lie in [0, 1]"));
    }
    if !(mean_s > 1.0) {
        return Err(invalid("weak recovery floor needs E[S] > 1"));
    }
    Ok(3.0 * p.powi(6) * prob_s_ge_4 / (mean_s - 1.0))
}
