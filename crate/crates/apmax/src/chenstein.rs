//! Poisson-approximation machinery for the threshold indicator family.
//!
//! Fix a length `n`, a truncation slack `eps > 0` and a threshold offset
//! `x < eps·ln n`. With `M = floor((C+eps)·ln n)` and
//! `m = floor(C·ln n + x) + 1`, the indicator of the pair `(s,p)` is
//!
//! ```text
//! I_{s,p}(x) = 1{ ξ_s = 0 and ξ at s+p, s+2p, ..., s+mp (mod n) all 1 }
//! ```
//!
//! i.e. the truncated statistic `W'_{s,p} = min(W_{s,p}, M)` exceeds
//! `C·ln n + x`. `S(x)` sums the indicators over all `(s,p)`; two indicators
//! are dependent only if their progression sets
//! `A(s,p) = {s, s+p, ..., s+Mp}` intersect, which makes the pair graph a
//! dependency graph and puts the Arratia-Goldstein-Gordon bound
//! `|P(S ∈ A) - P(Poisson(E S) ∈ A)| <= B1 + B2` in reach.
//!
//! Everything here is exact: expectations are dyadic rationals (zero where a
//! progression revisits its start and forces a 0/1 contradiction), `B1`/`B2`
//! are exact finite sums computed with integer arithmetic, and the closed
//! bound chains of the combinatorial estimates are evaluated verbatim for
//! comparison. Progression sets intersect either as integer sets (the
//! combinatorics of the `D_{s,p}(k)` bounds) or as residue sets mod `n` (the
//! dependency neighborhood actually read by the indicators); both modes are
//! implemented and nothing canonizes one of them.

use serde::{Deserialize, Serialize};

use crate::apscan::{self, gcd, pos};
use crate::limitlaw::{centering_w, C};
use crate::rngword::BinaryWord;
use crate::{Error, Result};

/// Cap on exact `D_{s,p}(k)` enumeration (it is `O(n·M^2)` per pair).
pub const D_CAP: usize = 512;
/// Cap on exact `B1`/`B2` enumeration.
pub const B_EXACT_CAP: usize = 128;

/// How two progression sets are intersected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntersectMode {
    /// `A(s,p)` as a set of integers; reproduces the combinatorial bounds.
    Integer,
    /// `A(s,p)` reduced mod `n`; the dependency neighborhood the indicators
    /// actually see.
    Residue,
}

/// Truncation parameters: length `n` and slack `eps`, fixing
/// `M = floor((C+eps)·ln n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationParams {
    pub n: usize,
    pub eps: f64,
}

impl TruncationParams {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n = {n} must be >= 2")));
        }
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps = {eps} must be > 0")));
        }
        Ok(Self { n, eps })
    }

    /// `M = floor((C+eps)·ln n)`, recomputed on demand so it can never go
    /// stale against `n` or `eps`.
    pub fn truncation(&self) -> usize {
        ((C + self.eps) * (self.n as f64).ln()).floor() as usize
    }

    /// Largest admissible threshold offset: `x` must stay below `eps·ln n`.
    pub fn x_limit(&self) -> f64 {
        self.eps * (self.n as f64).ln()
    }
}

/// A threshold `C·ln n + x` resolved to the integer number of ones `m`
/// required to exceed it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub n: usize,
    pub x: f64,
}

impl ThresholdSpec {
    pub fn new(n: usize, x: f64) -> Self {
        Self { n, x }
    }

    /// `m = floor(C·ln n + x) + 1`: an integer-valued statistic exceeds
    /// `C·ln n + x` iff it is at least `m`.
    pub fn m_ones(&self) -> i64 {
        (centering_w(self.n) + self.x).floor() as i64 + 1
    }

    fn m_ones_checked(&self) -> Result<usize> {
        let m = self.m_ones();
        if m < 1 {
            return Err(Error::InvalidArgument(format!(
                "threshold x = {} puts m_ones = {m} below 1",
                self.x
            )));
        }
        Ok(m as usize)
    }
}

fn check_threshold(spec: &ThresholdSpec, params: &TruncationParams) -> Result<usize> {
    debug_assert_eq!(spec.n, params.n, "threshold and truncation disagree on n");
    if spec.x >= params.x_limit() {
        return Err(Error::ThresholdAboveTruncation {
            x: spec.x,
            limit: params.x_limit(),
        });
    }
    spec.m_ones_checked()
}

/// `W'_{s,p} = min(W_{s,p}, M)`.
pub fn truncated_w_sp(
    w: &BinaryWord,
    s: usize,
    p: usize,
    params: &TruncationParams,
) -> Result<usize> {
    Ok(apscan::w_sp(w, s, p)?.min(params.truncation()))
}

/// The threshold indicator `I_{s,p}(x)`.
pub fn indicator(
    w: &BinaryWord,
    s: usize,
    p: usize,
    spec: &ThresholdSpec,
    params: &TruncationParams,
) -> Result<bool> {
    let m = check_threshold(spec, params)?;
    let n = w.len();
    if s < 1 || s > n {
        return Err(Error::OutOfRange {
            what: "s",
            got: s,
            max: n,
        });
    }
    if p < 1 || p > n {
        return Err(Error::OutOfRange {
            what: "p",
            got: p,
            max: n,
        });
    }
    if w.bit(s) {
        return Ok(false);
    }
    Ok((1..=m).all(|i| w.bit(pos(s, i, p, n))))
}

/// `S(x)`: the number of pairs `(s,p)` with `I_{s,p}(x) = 1`. Positive iff
/// the truncated maximum exceeds `C·ln n + x` (whenever `m <= M`).
pub fn s_count(w: &BinaryWord, spec: &ThresholdSpec, params: &TruncationParams) -> Result<u64> {
    let m = check_threshold(spec, params)?;
    Ok(apscan::count_wrapped_at_least(w, m))
}

/// The progression set `A(s,p) = {s + i·p : i = 0..=m}` in either mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressionSet {
    pub s: usize,
    pub p: usize,
    pub m: usize,
    pub mode: IntersectMode,
    elements: Vec<u64>,
}

impl ProgressionSet {
    /// Integer-mode set: exactly `m+1` distinct integers.
    pub fn new_integer(s: usize, p: usize, m: usize) -> Self {
        let elements = (0..=m as u64).map(|i| s as u64 + i * p as u64).collect();
        Self {
            s,
            p,
            m,
            mode: IntersectMode::Integer,
            elements,
        }
    }

    /// Residue-mode set: `min(m+1, cycle length)` distinct residues in `1..=n`.
    pub fn new_residue(s: usize, p: usize, m: usize, n: usize) -> Self {
        let mut elements: Vec<u64> = (0..=m).map(|i| pos(s, i, p, n) as u64).collect();
        elements.sort_unstable();
        elements.dedup();
        Self {
            s,
            p,
            m,
            mode: IntersectMode::Residue,
            elements,
        }
    }

    pub fn new(s: usize, p: usize, m: usize, n: usize, mode: IntersectMode) -> Self {
        match mode {
            IntersectMode::Integer => Self::new_integer(s, p, m),
            IntersectMode::Residue => Self::new_residue(s, p, m, n),
        }
    }

    /// Sorted distinct elements.
    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `|A ∩ B|` by sorted merge.
    pub fn intersection_size(&self, other: &Self) -> usize {
        debug_assert_eq!(self.mode, other.mode);
        let (a, b) = (&self.elements, &other.elements);
        let (mut i, mut j, mut k) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    k += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        k
    }
}

/// Exact table of `D_{s,p}(k)`: for each `k`, the number of pairs `(t,q)`
/// with `q != p` and `|A(s,p) ∩ A(t,q)| = k`. Index `k` runs `0..=M+1`;
/// entry 0 is unused.
pub fn d_table(
    s: usize,
    p: usize,
    params: &TruncationParams,
    mode: IntersectMode,
) -> Result<Vec<u64>> {
    let n = params.n;
    if n > D_CAP {
        return Err(Error::CapExceeded {
            what: "n",
            got: n,
            cap: D_CAP,
        });
    }
    if s < 1 || s > n || p < 1 || p > n {
        return Err(Error::OutOfRange {
            what: if s < 1 || s > n { "s" } else { "p" },
            got: if s < 1 || s > n { s } else { p },
            max: n,
        });
    }
    let m = params.truncation();
    let mut table = vec![0u64; m + 2];
    match mode {
        IntersectMode::Integer => {
            // |A(s,p) ∩ A(t,q)| = #{(i,j) : s+ip = t+jq}; tally solutions per t
            let mut counts = vec![0u32; n + 1];
            let mut touched: Vec<usize> = Vec::with_capacity((m + 1) * (m + 1));
            for q in 1..=n {
                if q == p {
                    continue;
                }
                for i in 0..=m as i64 {
                    for j in 0..=m as i64 {
                        let t = s as i64 + i * p as i64 - j * q as i64;
                        if t >= 1 && t <= n as i64 {
                            let t = t as usize;
                            if counts[t] == 0 {
                                touched.push(t);
                            }
                            counts[t] += 1;
                        }
                    }
                }
                for &t in &touched {
                    table[counts[t] as usize] += 1;
                    counts[t] = 0;
                }
                touched.clear();
            }
        }
        IntersectMode::Residue => {
            let a = ProgressionSet::new_residue(s, p, m, n);
            let mut marked = vec![false; n + 1];
            for &e in a.elements() {
                marked[e as usize] = true;
            }
            for q in 1..=n {
                if q == p {
                    continue;
                }
                let cyc = n / gcd(n, q);
                let reach = m.min(cyc - 1);
                for t in 1..=n {
                    let mut k = 0usize;
                    // the first min(m+1, cycle) positions are pairwise distinct
                    for i in 0..=reach {
                        if marked[pos(t, i, q, n)] {
                            k += 1;
                        }
                    }
                    if k > 0 {
                        table[k] += 1;
                    }
                }
            }
        }
    }
    Ok(table)
}

/// `D_{s,p}(k)` for a single `k` (0 for `k > M+1`).
pub fn count_d(
    s: usize,
    p: usize,
    params: &TruncationParams,
    k: usize,
    mode: IntersectMode,
) -> Result<u64> {
    let table = d_table(s, p, params, mode)?;
    Ok(table.get(k).copied().unwrap_or(0))
}

/// The combinatorial bound on `D_{s,p}(k)`:
/// `(M+1)^2·n` at `k = 1`, `(M+1)^2·M^2` for `2 <= k <= M/2+1`, 0 beyond.
pub fn d_bound(params: &TruncationParams, k: usize) -> u64 {
    assert!(k >= 1, "d_bound is defined for k >= 1");
    let m = params.truncation() as u64;
    if k == 1 {
        (m + 1) * (m + 1) * params.n as u64
    } else if 2 * (k as u64 - 1) <= m {
        // k <= M/2 + 1 without leaving integers
        (m + 1) * (m + 1) * m * m
    } else {
        0
    }
}

/// `E[S(x)]` as displayed in the first-moment computation:
/// `n^2 · 2^-floor(C·ln n + x + 2)`. Counts every pair at the generic
/// probability, including differences whose cycle is too short to realize
/// the progression.
pub fn lambda_paper(n: usize, x: f64) -> f64 {
    let e = (centering_w(n) + x + 2.0).floor();
    (n as f64) * (n as f64) * (-e).exp2()
}

/// The exact `E[S(x)]`: pairs whose wrapped progression revisits its start
/// contribute zero, so only differences with cycle length `>= m+1` count.
///
/// `n · #{p : n/gcd(n,p) >= m+1} · 2^-(m+1)`.
pub fn lambda_exact_w(n: usize, x: f64) -> f64 {
    let m = ThresholdSpec::new(n, x).m_ones();
    assert!(m >= 1, "x = {x} puts the required run below 1");
    let m = m as usize;
    let good = (1..=n).filter(|&p| n / gcd(n, p) >= m + 1).count();
    (n as f64) * (good as f64) * (-((m + 1) as f64)).exp2()
}

/// Exact first moment of the straight-progression indicator count: the
/// number of `(s,p)` pairs whose zero-then-`m`-ones pattern fits in `1..=n`,
/// times `2^-(m+1)`.
pub fn lambda_exact_u(n: usize, m_ones: usize) -> f64 {
    assert!(m_ones >= 1, "m_ones must be >= 1");
    if m_ones >= n {
        return 0.0;
    }
    let mut pairs = 0u64;
    for p in 1..=(n - 1) / m_ones {
        pairs += (n - m_ones * p) as u64;
    }
    pairs as f64 * (-((m_ones + 1) as f64)).exp2()
}

/// A dyadic rational `num · 2^-exp` (expectations here are exactly these).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Dyadic {
    num: u64,
    exp: u32,
}

impl Dyadic {
    const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };

    fn pow2_neg(exp: u32) -> Self {
        Dyadic { num: 1, exp }
    }

    fn is_zero(&self) -> bool {
        self.num == 0
    }

    fn to_f64(self) -> f64 {
        self.num as f64 * (-(self.exp as f64)).exp2()
    }
}

/// Exact accumulator over a fixed scale `2^-scale`.
struct DyadicSum {
    num: u128,
    scale: u32,
}

impl DyadicSum {
    fn new(scale: u32) -> Self {
        Self { num: 0, scale }
    }

    fn add(&mut self, weight: u64, term: Dyadic) {
        if term.num == 0 {
            return;
        }
        debug_assert!(term.exp <= self.scale, "term finer than the accumulator scale");
        self.num += (weight as u128) * (term.num as u128) << (self.scale - term.exp);
    }

    fn to_f64(&self) -> f64 {
        // exact as long as the numerator fits the f64 mantissa
        debug_assert!(self.num < (1u128 << 53), "dyadic sum exceeds exact f64 range");
        self.num as f64 * (-(self.scale as f64)).exp2()
    }
}

/// `E[I_{s,p}]` (independent of `s`): `2^-(m+1)` when the cycle of `p` has
/// length at least `m+1`, else 0 (the revisit of `s` forces ξ_s = 0 and 1).
fn expectation_dyadic(p: usize, n: usize, m: usize) -> Dyadic {
    if n / gcd(n, p) >= m + 1 {
        Dyadic::pow2_neg(m as u32 + 1)
    } else {
        Dyadic::ZERO
    }
}

/// `E[I_{s,p}]` as an exact floating-point dyadic.
pub fn indicator_expectation(p: usize, n: usize, m_ones: usize) -> f64 {
    assert!(m_ones >= 1);
    expectation_dyadic(p, n, m_ones).to_f64()
}

/// Scratch space for repeated joint-expectation evaluations.
struct JointScratch {
    stamp: Vec<u32>,
    epoch: u32,
}

impl JointScratch {
    fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            epoch: 0,
        }
    }

    /// Exact `E[I_{s,p} I_{t,q}]` with `s = 1`, `t = 1 + d` (0-indexed `d`).
    fn joint(&mut self, p: usize, q: usize, d: usize, n: usize, m: usize) -> Dyadic {
        self.epoch += 1;
        let e = self.epoch;
        let s0 = 0usize;
        let t0 = d % n;
        let mut distinct = if t0 == s0 { 1u32 } else { 2u32 };
        // walk both one-constraint progressions, deduplicating positions
        for (start, step) in [(s0, p), (t0, q)] {
            let mut j = start;
            for _ in 0..m {
                j += step;
                if j >= n {
                    j -= n;
                }
                if j == s0 || j == t0 {
                    return Dyadic::ZERO; // constrained both to 0 and to 1
                }
                if self.stamp[j] != e {
                    self.stamp[j] = e;
                    distinct += 1;
                }
            }
        }
        Dyadic::pow2_neg(distinct)
    }
}

/// Exact `E[I_{s,p} I_{t,q}]` for `(s,p) != (t,q)`: zero if some position is
/// constrained both ways, else `2^-(#distinct constrained positions)`.
pub fn joint_expectation(
    s: usize,
    p: usize,
    t: usize,
    q: usize,
    n: usize,
    m_ones: usize,
) -> f64 {
    assert!((s, p) != (t, q), "joint expectation needs distinct pairs");
    assert!(s >= 1 && s <= n && t >= 1 && t <= n && p >= 1 && p <= n && q >= 1 && q <= n);
    let mut scratch = JointScratch::new(n);
    // translation invariant mod n: shift so the first start sits at 1
    let d = (t + n - s) % n;
    scratch.joint(p, q, d, n, m_ones).to_f64()
}

/// Which route produced a [`DependencySummary`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryKind {
    Exact,
    PaperBound,
}

/// `B1`/`B2` for the indicator family at `(n, x, eps)`, either exact or via
/// the closed bound chains.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependencySummary {
    pub n: usize,
    pub x: f64,
    pub eps: f64,
    pub b1: f64,
    pub b2: f64,
    pub kind: SummaryKind,
    pub mode: IntersectMode,
}

impl DependencySummary {
    pub fn total(&self) -> f64 {
        self.b1 + self.b2
    }
}

/// Exact `B1` and `B2` over the neighbor relation `A(s,p) ∩ A(t,q) != ∅`
/// in the chosen mode. `B1` sums `E[I]·E[I]` over neighbor pairs including
/// the pair with itself; `B2` sums the joint expectation over distinct
/// neighbor pairs.
///
/// Translation invariance collapses the enumeration: the neighbor relation
/// and the joint expectation depend on `(s,t)` only through `t-s` (integer
/// mode) or `(t-s) mod n` (residue mode), so offsets are enumerated once per
/// `(p,q)` and weighted by the number of `(s,t)` pairs realizing them.
pub fn b1_b2_exact(
    n: usize,
    x: f64,
    eps: f64,
    mode: IntersectMode,
) -> Result<DependencySummary> {
    if n > B_EXACT_CAP {
        return Err(Error::CapExceeded {
            what: "n",
            got: n,
            cap: B_EXACT_CAP,
        });
    }
    let params = TruncationParams::new(n, eps)?;
    let spec = ThresholdSpec::new(n, x);
    let m = check_threshold(&spec, &params)?;
    let big_m = params.truncation();

    let expectations: Vec<Dyadic> = (0..=n)
        .map(|p| {
            if p == 0 {
                Dyadic::ZERO
            } else {
                expectation_dyadic(p, n, m)
            }
        })
        .collect();

    let scale = 2 * (m as u32 + 1);
    let mut b1 = DyadicSum::new(scale);
    let mut b2 = DyadicSum::new(scale);
    let mut scratch = JointScratch::new(n);

    // offset dedup, epoch-stamped; integer offsets shifted by n-1 into 0..=2n-2
    let mut seen = vec![0u32; 2 * n - 1];
    let mut residue_seen = vec![0u32; n];
    let mut epoch = 0u32;
    let mut offsets: Vec<i64> = Vec::new();

    for p in 1..=n {
        for q in 1..=n {
            epoch += 1;
            offsets.clear();
            match mode {
                IntersectMode::Integer => {
                    for i in 0..=big_m as i64 {
                        for j in 0..=big_m as i64 {
                            let d = i * p as i64 - j * q as i64;
                            if d.unsigned_abs() as usize <= n - 1 {
                                let idx = (d + (n as i64 - 1)) as usize;
                                if seen[idx] != epoch {
                                    seen[idx] = epoch;
                                    offsets.push(d);
                                }
                            }
                        }
                    }
                }
                IntersectMode::Residue => {
                    for i in 0..=big_m as i64 {
                        for j in 0..=big_m as i64 {
                            let d = (i * p as i64 - j * q as i64).rem_euclid(n as i64);
                            if residue_seen[d as usize] != epoch {
                                residue_seen[d as usize] = epoch;
                                offsets.push(d);
                            }
                        }
                    }
                }
            }

            let e_pair = {
                let (ep, eq) = (expectations[p], expectations[q]);
                if ep.is_zero() || eq.is_zero() {
                    Dyadic::ZERO
                } else {
                    Dyadic {
                        num: ep.num * eq.num,
                        exp: ep.exp + eq.exp,
                    }
                }
            };

            for &d in &offsets {
                let weight = match mode {
                    IntersectMode::Integer => (n as i64 - d.abs()) as u64,
                    IntersectMode::Residue => n as u64,
                };
                b1.add(weight, e_pair);
                let diagonal = q == p && d == 0;
                if !diagonal {
                    let d_res = d.rem_euclid(n as i64) as usize;
                    let j = scratch.joint(p, q, d_res, n, m);
                    b2.add(weight, j);
                }
            }
        }
    }

    Ok(DependencySummary {
        n,
        x,
        eps,
        b1: b1.to_f64(),
        b2: b2.to_f64(),
        kind: SummaryKind::Exact,
        mode,
    })
}

/// The closed-form bound chains, evaluated verbatim:
///
/// ```text
/// B1 <= 2^-2(x+1) n^-4 Σ_{s,p} [ (M+1)^2 n + 1 + Σ_{2<=k<=M/2+1} ((M+1)^2 M^2 + 1) ]
/// B2 <= 2^-2(x+1) n^-4 Σ_{s,p} [ 2(M+1)^2 n + (M+1)^2 M^2 Σ_{2<=k<=M/2+1} 2^k ]
/// ```
///
/// The summands are `(s,p)`-independent, so each sum is `n^2` times its
/// bracket. The intersection arithmetic behind these chains is integer-mode.
pub fn b1_b2_paper_bound(n: usize, x: f64, eps: f64) -> DependencySummary {
    let params = TruncationParams {
        n,
        eps,
    };
    let m = params.truncation() as u128;
    let k_max = m / 2 + 1; // floor(M/2 + 1)
    let k_count = k_max.saturating_sub(1); // # of integers in [2, k_max]
    let geo: u128 = if k_max >= 2 {
        (1u128 << (k_max + 1)) - 4 // Σ_{k=2}^{k_max} 2^k
    } else {
        0
    };
    let msq = (m + 1) * (m + 1);
    let bracket1 = msq * n as u128 + 1 + k_count * (msq * m * m + 1);
    let bracket2 = 2 * msq * n as u128 + msq * m * m * geo;
    let pref = (-2.0 * (x + 1.0)).exp2() / ((n as f64) * (n as f64));
    DependencySummary {
        n,
        x,
        eps,
        b1: pref * bracket1 as f64,
        b2: pref * bracket2 as f64,
        kind: SummaryKind::PaperBound,
        mode: IntersectMode::Integer,
    }
}
