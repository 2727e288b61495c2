//! Reproducible Monte Carlo drivers.
//!
//! Every experiment output is a pure function of its config (master seed
//! included): trials map to fixed per-trial streams, parallel workers only
//! partition work that is keyed and re-ordered deterministically, and all
//! aggregation runs over index-sorted records. Rerunning any experiment with
//! the same config reproduces its output byte for byte at any worker count.
//!
//! Three drivers:
//!
//! * [`run_distribution`] — per-trial words at each length, `W`/`U` values
//!   with witnesses, empirical CDFs against the predicted limit law;
//! * [`run_nested_trajectory`] — one growing word per seed evaluated at
//!   increasing checkpoints, exposing the almost-sure behavior of the two
//!   ratio sequences on a common probability space;
//! * [`lambda_n`] / [`second_moment_report`] — the lattice exceedance count
//!   `Λ(n) = Σ I(s,p,N)` over `N ∈ [n,2n]`, `s ∈ [1,N]`,
//!   `p ∈ [⌈N/6⌉, ⌊N/5⌋]`, with its exact first moment and the
//!   distribution-free second-moment inequality
//!   `P(Λ=0) <= Var(Λ)/E[Λ]^2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

use crate::apscan::{gcd, max_u, max_w, ApWitness};
use crate::limitlaw::{
    centering_u, centering_w, empirical_cdf, log2_exact, predicted_cdf_u, predicted_cdf_w,
    CdfComparison, Stat,
};
use crate::rngword::{derive_trial_seed, generate_word, BinaryWord, StreamSeed};
use crate::{Error, Result};

/// Cap on the lattice base length (the lattice scan is `O(n^3)` triples).
pub const LATTICE_CAP: usize = 2048;

/// Which statistics a distribution run evaluates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatSelection {
    W,
    U,
    Both,
}

impl StatSelection {
    pub fn wants_w(self) -> bool {
        matches!(self, StatSelection::W | StatSelection::Both)
    }
    pub fn wants_u(self) -> bool {
        matches!(self, StatSelection::U | StatSelection::Both)
    }
}

/// Full description of a distribution experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub master: u64,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub stats: StatSelection,
    /// Integer threshold window: offsets from the centering.
    pub x_lo: i32,
    pub x_hi: i32,
    pub eps: f64,
    pub beta: f64,
    /// Worker threads; 0 means one per logical CPU.
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            master: 1,
            ns: vec![256],
            trials: 100,
            stats: StatSelection::Both,
            x_lo: -2,
            x_hi: 4,
            eps: 0.1,
            beta: 0.5,
            workers: 1,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.ns.is_empty() {
            return Err(Error::Config("at least one n is required".into()));
        }
        if let Some(&bad) = self.ns.iter().find(|&&n| n < 2) {
            return Err(Error::Config(format!("n = {bad} must be >= 2")));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::Config(format!(
                "beta = {} must lie strictly between 0 and 1",
                self.beta
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!("eps = {} must be > 0", self.eps)));
        }
        if self.x_lo > self.x_hi {
            return Err(Error::Config(format!(
                "empty threshold window [{}, {}]",
                self.x_lo, self.x_hi
            )));
        }
        Ok(())
    }
}

/// One statistic of one trial: the value and its witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatOutcome {
    pub value: u64,
    pub witness: Option<ApWitness>,
}

/// Everything recorded about one `(trial, n)` evaluation; regenerating the
/// word from `(master, trial)` reproduces it bit-exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub trial: u64,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<StatOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<StatOutcome>,
    /// Derived per-trial seed.
    pub seed: u64,
}

/// A distribution run: config echo, all records, per-`(n, stat)` CDF
/// comparisons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    pub comparisons: Vec<CdfComparison>,
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))
}

fn evaluate_trial(master: u64, trial: u64, n: usize, stats: StatSelection) -> RunRecord {
    let seed = StreamSeed::new(master, trial);
    let word = generate_word(seed, n);
    let w = stats.wants_w().then(|| {
        let r = max_w(&word);
        StatOutcome {
            value: r.value as u64,
            witness: r.witness,
        }
    });
    let u = stats.wants_u().then(|| {
        let r = max_u(&word);
        StatOutcome {
            value: r.value as u64,
            witness: r.witness,
        }
    });
    RunRecord {
        trial,
        n,
        w,
        u,
        seed: derive_trial_seed(seed),
    }
}

/// Integer thresholds covering offsets `[x_lo, x_hi]` around `centering`.
fn threshold_window(centering: f64, x_lo: i32, x_hi: i32) -> Vec<i64> {
    let lo = (centering + x_lo as f64).ceil() as i64;
    let hi = (centering + x_hi as f64).floor() as i64;
    (lo.max(1)..=hi).collect()
}

/// Runs the distribution experiment: one word per `(trial, n)`, statistics
/// with witnesses, and empirical CDFs against the predicted limit law.
/// Output is independent of the worker count.
pub fn run_distribution(config: &ExperimentConfig) -> Result<DistributionReport> {
    config.validate()?;
    let pool = thread_pool(config.workers)?;
    let mut records = Vec::with_capacity(config.ns.len() * config.trials);
    for &n in &config.ns {
        let mut per_n: Vec<RunRecord> = pool.install(|| {
            (0..config.trials as u64)
                .into_par_iter()
                .map(|trial| evaluate_trial(config.master, trial, n, config.stats))
                .collect()
        });
        records.append(&mut per_n);
    }

    let mut comparisons = Vec::new();
    for &n in &config.ns {
        let of_n = records.iter().filter(|r| r.n == n);
        if config.stats.wants_w() {
            let samples: Vec<u64> = of_n.clone().filter_map(|r| r.w.map(|s| s.value)).collect();
            let ts = threshold_window(centering_w(n), config.x_lo, config.x_hi);
            comparisons.push(empirical_cdf(n, Stat::W, &samples, &ts, |t| {
                predicted_cdf_w(n, t).cdf
            })?);
        }
        if config.stats.wants_u() {
            let samples: Vec<u64> = of_n.clone().filter_map(|r| r.u.map(|s| s.value)).collect();
            let ts = threshold_window(centering_u(n), config.x_lo, config.x_hi);
            comparisons.push(empirical_cdf(n, Stat::U, &samples, &ts, |t| {
                predicted_cdf_u(n, t).cdf
            })?);
        }
    }

    Ok(DistributionReport {
        config: config.clone(),
        records,
        comparisons,
    })
}

/// Both statistics of one growing word at one checkpoint, with the ratios
/// to the common centering `C·ln N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub n: usize,
    pub w: u64,
    pub u: u64,
    pub w_ratio: f64,
    pub u_ratio: f64,
}

/// Extends one word through the checkpoints, evaluating both statistics at
/// each. The same stream realizes every length, so the `U` sequence is
/// non-decreasing along the trajectory.
pub fn run_nested_trajectory(seed: StreamSeed, checkpoints: &[usize]) -> Result<Vec<TrajectoryPoint>> {
    if checkpoints.is_empty() {
        return Err(Error::Config("no checkpoints given".into()));
    }
    if checkpoints[0] < 2 {
        return Err(Error::Config("checkpoints must be >= 2".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("checkpoints must be strictly increasing".into()));
    }
    let mut word = generate_word(seed, checkpoints[0]);
    let mut out = Vec::with_capacity(checkpoints.len());
    for (i, &n) in checkpoints.iter().enumerate() {
        if i > 0 {
            word = crate::rngword::extend_word(&word, seed, n)?;
        }
        let w = max_w(&word).value as u64;
        let u = max_u(&word).value as u64;
        let denom = centering_w(n);
        out.push(TrajectoryPoint {
            n,
            w,
            u,
            w_ratio: w as f64 / denom,
            u_ratio: u as f64 / denom,
        });
    }
    Ok(out)
}

/// Trajectories of several trials of one master seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedReport {
    pub master: u64,
    pub seeds: u64,
    pub checkpoints: Vec<usize>,
    pub series: Vec<TrajectorySeries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySeries {
    pub trial: u64,
    pub points: Vec<TrajectoryPoint>,
}

/// Runs [`run_nested_trajectory`] for trials `0..seeds` of one master.
pub fn run_nested_trajectories(
    master: u64,
    seeds: u64,
    checkpoints: &[usize],
    workers: usize,
) -> Result<NestedReport> {
    let pool = thread_pool(workers)?;
    let series: Result<Vec<TrajectorySeries>> = pool.install(|| {
        (0..seeds)
            .into_par_iter()
            .map(|trial| {
                run_nested_trajectory(StreamSeed::new(master, trial), checkpoints).map(|points| {
                    TrajectorySeries { trial, points }
                })
            })
            .collect()
    });
    Ok(NestedReport {
        master,
        seeds,
        checkpoints: checkpoints.to_vec(),
        series: series?,
    })
}

/// The exceedance lattice: `N ∈ [n, 2n]`, `s ∈ [1, N]`,
/// `p ∈ [⌈N/6⌉, ⌊N/5⌋]`, with run requirement `M_N = ⌈(2+β)·log2 N⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n: usize,
    pub beta: f64,
}

impl LatticeSpec {
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("lattice base n = {n} must be >= 2")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::Config(format!(
                "beta = {beta} must lie strictly between 0 and 1"
            )));
        }
        Ok(Self { n, beta })
    }

    /// `M_N = ⌈(2+β)·log2 N⌉`; satisfies `N^(2+β) <= 2^(M_N) <= 2·N^(2+β)`.
    pub fn m_n(&self, nn: usize) -> usize {
        ((2.0 + self.beta) * log2_exact(nn)).ceil() as usize
    }

    pub fn p_lo(&self, nn: usize) -> usize {
        nn.div_ceil(6)
    }

    pub fn p_hi(&self, nn: usize) -> usize {
        nn / 5
    }

    pub fn contains(&self, s: usize, p: usize, nn: usize) -> bool {
        (self.n..=2 * self.n).contains(&nn)
            && (1..=nn).contains(&s)
            && (self.p_lo(nn)..=self.p_hi(nn)).contains(&p)
    }
}

/// `I(s,p,N) = 1{ ξ_s = 0 and ξ at s+ip (mod N), i = 1..=M_N, all 1 }`,
/// reading the first `N` bits of the stream word. Rejects triples outside
/// the lattice.
pub fn indicator_i_spn(
    word: &BinaryWord,
    s: usize,
    p: usize,
    nn: usize,
    spec: &LatticeSpec,
) -> Result<bool> {
    if !spec.contains(s, p, nn) {
        return Err(Error::InvalidArgument(format!(
            "(s,p,N) = ({s},{p},{nn}) outside the lattice of n = {}",
            spec.n
        )));
    }
    if word.len() < nn {
        return Err(Error::InvalidArgument(format!(
            "stream word of length {} cannot cover N = {nn}",
            word.len()
        )));
    }
    let m = spec.m_n(nn);
    Ok(probe_wrapped(word, s - 1, p, nn, m))
}

/// `ξ_s = 0` followed by `m` ones along the wrapped progression, 0-indexed
/// start, early exit on the first miss.
#[inline]
fn probe_wrapped(word: &BinaryWord, s0: usize, p: usize, nn: usize, m: usize) -> bool {
    if word.bit0(s0) {
        return false;
    }
    let mut j = s0;
    for _ in 0..m {
        j += p;
        if j >= nn {
            j -= nn;
        }
        if !word.bit0(j) {
            return false;
        }
    }
    true
}

/// `Λ(n)`: the exact number of lattice triples whose indicator fires on the
/// given stream. Needs `word.len() >= 2n`; the early exit makes the
/// expected per-triple cost constant.
pub fn lambda_n(word: &BinaryWord, spec: &LatticeSpec) -> Result<u64> {
    if spec.n > LATTICE_CAP {
        return Err(Error::CapExceeded {
            what: "n",
            got: spec.n,
            cap: LATTICE_CAP,
        });
    }
    if word.len() < 2 * spec.n {
        return Err(Error::InvalidArgument(format!(
            "stream word of length {} cannot cover N up to {}",
            word.len(),
            2 * spec.n
        )));
    }
    let mut count = 0u64;
    for nn in spec.n..=2 * spec.n {
        let m = spec.m_n(nn);
        for p in spec.p_lo(nn)..=spec.p_hi(nn) {
            // differences with a short cycle can never realize the run
            if nn / gcd(nn, p) < m + 1 {
                continue;
            }
            for s0 in 0..nn {
                if probe_wrapped(word, s0, p, nn, m) {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// Exact `E[Λ(n)]`:
/// `Σ_{N=n}^{2n} 2^-(M_N+1) · N · #{p in range : N/gcd(N,p) >= M_N+1}`.
pub fn expected_lambda_n(n: usize, beta: f64) -> f64 {
    let spec = LatticeSpec { n, beta };
    let mut total = 0.0;
    for nn in n..=2 * n {
        let m = spec.m_n(nn);
        let good = (spec.p_lo(nn)..=spec.p_hi(nn))
            .filter(|&p| nn / gcd(nn, p) >= m + 1)
            .count();
        total += (nn as f64) * (good as f64) * (-((m + 1) as f64)).exp2();
    }
    total
}

/// Empirical second-moment summary of `Λ(n)` over independent streams.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondMomentReport {
    pub n: usize,
    pub beta: f64,
    pub master: u64,
    pub streams: usize,
    pub values: Vec<u64>,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub p_zero: f64,
    /// `Var̂ / mean^2`, the distribution-free bound on `P(Λ = 0)`.
    pub chebyshev: f64,
    /// Combined Monte Carlo error: binomial SE of `p_zero` plus the
    /// delta-method SE of `Var̂/mean^2`.
    pub mc_error: f64,
    pub expected_mean: f64,
}

/// Evaluates `Λ(n)` on `streams` independent streams (trials `0..streams`
/// of the master seed) and reports the second-moment inequality inputs.
pub fn second_moment_report(
    streams: usize,
    n: usize,
    beta: f64,
    master: u64,
) -> Result<SecondMomentReport> {
    if streams < 2 {
        return Err(Error::Config("need at least 2 streams".into()));
    }
    let spec = LatticeSpec::new(n, beta)?;
    let values: Result<Vec<u64>> = (0..streams as u64)
        .into_par_iter()
        .map(|trial| {
            let word = generate_word(StreamSeed::new(master, trial), 2 * n);
            lambda_n(&word, &spec)
        })
        .collect();
    let values = values?;

    let s = streams as f64;
    let sum: u64 = values.iter().sum();
    let sumsq: u128 = values.iter().map(|&v| (v as u128) * (v as u128)).sum();
    let mean = sum as f64 / s;
    let variance = (sumsq as f64 - s * mean * mean) / (s - 1.0);
    let zeros = values.iter().filter(|&&v| v == 0).count();
    let p_zero = zeros as f64 / s;
    let chebyshev = if mean > 0.0 {
        variance / (mean * mean)
    } else {
        f64::INFINITY
    };

    // delta-method error for Var̂/mean²: SE(Var̂)/mean² + 2·Var̂·SE(mean)/mean³
    let m4: f64 = values
        .iter()
        .map(|&v| {
            let d = v as f64 - mean;
            d * d * d * d
        })
        .sum::<f64>()
        / s;
    let se_var = ((m4 - variance * variance).max(0.0) / s).sqrt();
    let se_mean = (variance / s).sqrt();
    let se_ratio = if mean > 0.0 {
        se_var / (mean * mean) + 2.0 * variance * se_mean / (mean * mean * mean)
    } else {
        f64::INFINITY
    };
    let se_pzero = (p_zero * (1.0 - p_zero) / s).sqrt();

    Ok(SecondMomentReport {
        n,
        beta,
        master,
        streams,
        mean,
        variance,
        p_zero,
        chebyshev,
        mc_error: se_pzero + se_ratio,
        expected_mean: expected_lambda_n(n, beta),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.beta = 1.0;
        assert!(cfg.validate().is_err());
        cfg.beta = 0.5;
        cfg.ns = vec![1];
        assert!(cfg.validate().is_err());
        cfg.ns = vec![16];
        cfg.x_lo = 5;
        cfg.x_hi = 4;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn single_trial_matches_direct_calls() {
        let cfg = ExperimentConfig {
            ns: vec![32],
            trials: 1,
            master: 7,
            ..Default::default()
        };
        let report = run_distribution(&cfg).unwrap();
        assert_eq!(report.records.len(), 1);
        let rec = &report.records[0];
        let word = generate_word(StreamSeed::new(7, 0), 32);
        assert_eq!(rec.w.unwrap().value, max_w(&word).value as u64);
        assert_eq!(rec.u.unwrap().value, max_u(&word).value as u64);
        assert_eq!(rec.w.unwrap().witness, max_w(&word).witness);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let base = ExperimentConfig {
            ns: vec![64, 96],
            trials: 40,
            master: 5,
            workers: 1,
            ..Default::default()
        };
        let r1 = run_distribution(&base).unwrap();
        for workers in [4usize, 8] {
            let cfg = ExperimentConfig { workers, ..base.clone() };
            let r = run_distribution(&cfg).unwrap();
            assert_eq!(r.records, r1.records);
            assert_eq!(r.comparisons, r1.comparisons);
        }
    }

    #[test]
    fn trajectory_checkpoint_rules() {
        let seed = StreamSeed::new(1, 0);
        assert!(run_nested_trajectory(seed, &[]).is_err());
        assert!(run_nested_trajectory(seed, &[8, 8]).is_err());
        assert!(run_nested_trajectory(seed, &[16, 8]).is_err());
        assert!(run_nested_trajectory(seed, &[1, 8]).is_err());
    }

    #[test]
    fn trajectory_u_monotone_and_matches_distribution() {
        let seed = StreamSeed::new(9, 4);
        let points = run_nested_trajectory(seed, &[16, 32, 64, 128, 256]).unwrap();
        for w in points.windows(2) {
            assert!(w[0].u <= w[1].u, "U must not decrease on a common stream");
        }
        // a single checkpoint equals a single-trial distribution record
        let single = run_nested_trajectory(seed, &[64]).unwrap();
        let word = generate_word(seed, 64);
        assert_eq!(single[0].w, max_w(&word).value as u64);
        assert_eq!(single[0].u, max_u(&word).value as u64);
        assert_relative_eq!(single[0].w_ratio, single[0].w as f64 / centering_w(64));
    }

    #[test]
    fn lattice_sandwich_exact_at_beta_half() {
        // N^(2+β) <= 2^(M_N) <= 2·N^(2+β) checked in integers for β = 1/2:
        // squaring gives N^5 <= 2^(2M) <= 4·N^5
        let spec = LatticeSpec::new(512, 0.5).unwrap();
        for nn in 512..=1024usize {
            let m = spec.m_n(nn) as u32;
            let n5 = (nn as u128).pow(5);
            assert!(n5 <= 1u128 << (2 * m), "lower sandwich at N={nn}");
            assert!(1u128 << (2 * m) <= 4 * n5, "upper sandwich at N={nn}");
        }
    }

    #[test]
    fn lattice_sandwich_float_general_beta() {
        for beta in [0.25, 0.5, 0.75] {
            let spec = LatticeSpec::new(100, beta).unwrap();
            for nn in 100..=200usize {
                let m = spec.m_n(nn) as f64;
                let target = (2.0 + beta) * (nn as f64).log2();
                assert!(m >= target - 1e-9 && m <= target + 1.0 + 1e-9);
            }
        }
    }

    #[test]
    fn indicator_rejects_outside_lattice() {
        let spec = LatticeSpec::new(64, 0.5).unwrap();
        let word = generate_word(StreamSeed::new(1, 0), 256);
        // p below the window
        assert!(indicator_i_spn(&word, 1, 1, 64, &spec).is_err());
        // N outside [n, 2n]
        assert!(indicator_i_spn(&word, 1, 12, 63, &spec).is_err());
        assert!(indicator_i_spn(&word, 1, 12, 129, &spec).is_err());
        // valid triple
        assert!(indicator_i_spn(&word, 1, 12, 64, &spec).is_ok());
    }

    #[test]
    fn indicator_fires_on_planted_progression() {
        let spec = LatticeSpec::new(64, 0.5).unwrap();
        let nn = 64usize;
        let m = spec.m_n(nn); // 15
        let p = 11; // inside [ceil(64/6), floor(64/5)] = [11, 12]
        let s = 3usize;
        let mut bits = vec![0u8; 256];
        for i in 1..=m {
            bits[(s - 1 + i * p) % nn] = 1;
        }
        let word = BinaryWord::from_bits(&bits).unwrap();
        assert!(indicator_i_spn(&word, s, p, nn, &spec).unwrap());
        // all-zeros stream never fires
        let zeros = BinaryWord::from_bits(&vec![0u8; 256]).unwrap();
        assert!(!indicator_i_spn(&zeros, s, p, nn, &spec).unwrap());
        // and the planted triple is found by the lattice scan
        assert!(lambda_n(&word, &spec).unwrap() >= 1);
        assert_eq!(lambda_n(&zeros, &spec).unwrap(), 0);
    }

    #[test]
    fn lambda_n_matches_indicator_sum() {
        let spec = LatticeSpec::new(48, 0.5).unwrap();
        let word = generate_word(StreamSeed::new(77, 0), 96);
        let mut direct = 0u64;
        for nn in 48..=96usize {
            for p in spec.p_lo(nn)..=spec.p_hi(nn) {
                for s in 1..=nn {
                    if indicator_i_spn(&word, s, p, nn, &spec).unwrap() {
                        direct += 1;
                    }
                }
            }
        }
        assert_eq!(lambda_n(&word, &spec).unwrap(), direct);
    }

    #[test]
    fn lambda_n_cap() {
        let spec = LatticeSpec::new(LATTICE_CAP + 1, 0.5).unwrap();
        let word = generate_word(StreamSeed::new(1, 0), 2 * (LATTICE_CAP + 1));
        assert!(matches!(
            lambda_n(&word, &spec),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn expected_lambda_decreases_in_beta() {
        let a = expected_lambda_n(256, 0.3);
        let b = expected_lambda_n(256, 0.6);
        let c = expected_lambda_n(256, 0.9);
        assert!(a > b && b > c, "{a} {b} {c}");
    }

    // Frozen from an independent closed-form evaluation (Python reference).
    #[test]
    fn expected_lambda_golden_value() {
        assert_eq!(expected_lambda_n(512, 0.5), 963555.0 / 4194304.0);
    }

    #[test]
    fn expected_lambda_doubling_ratio() {
        // E[Λ] scales like n^(1-β): doubling multiplies by ~2^(1-β)
        let target = (1.0f64 - 0.5).exp2();
        for n in [512usize, 1024, 2048, 4096] {
            let ratio = expected_lambda_n(2 * n, 0.5) / expected_lambda_n(n, 0.5);
            assert!(
                (ratio / target - 1.0).abs() <= 0.20,
                "n={n}: ratio {ratio} more than 20% from {target}"
            );
        }
    }

    #[test]
    fn second_moment_report_small_run() {
        let report = second_moment_report(40, 64, 0.5, 3).unwrap();
        assert_eq!(report.values.len(), 40);
        assert!(report.mean >= 0.0);
        assert!(report.variance >= 0.0);
        assert!((0.0..=1.0).contains(&report.p_zero));
        // distinct trials by construction
        assert!(second_moment_report(1, 64, 0.5, 3).is_err());
    }
}
