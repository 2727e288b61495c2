//! The core statistics `W_{s,p}`, `U_{s,p}`, `W^(N)`, `U^(N)`.
//!
//! `W_{s,p}` is the largest `k <= N` with `ξ_s = 0` and ones at the `k`
//! positions `s+p, s+2p, ..., s+kp` taken mod `N` into `1..=N`; the leading
//! zero rules out periodic progressions. `U_{s,p}` is the straight variant,
//! confined to `1..=N` (so `k <= floor((N-s)/p)`). The maxima over all
//! `(s,p)` are `W^(N)` and `U^(N)`.
//!
//! Two evaluation routes are provided and tested against each other:
//!
//! * `max_w` / `max_u` — stride-chain scanners. For each difference `p` the
//!   positions decompose into `gcd(p,N)` cycles (or `p` straight chains);
//!   one sweep per cycle reads off the run of ones following every zero, so
//!   the total work is `O(N)` per difference.
//! * `max_w_naive` / `max_u_naive` — the literal double loop over `(s,p)`,
//!   capped at `N <= 4096`, kept as the brute-force oracle.
//!
//! A value of 0 means the defining set is empty (e.g. the all-ones word has
//! no admissible start); witnesses exist only for values >= 1 and are the
//! lexicographically smallest `(s,p)` attaining the maximum.

use serde::{Deserialize, Serialize};

use crate::rngword::BinaryWord;
use crate::{Error, Result};

/// Brute-force oracle cap: keeps a single naive evaluation under a second.
pub const NAIVE_CAP: usize = 4096;

/// Progression flavor: wrapped (mod `N`) or straight.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApMode {
    Wrapped,
    Straight,
}

/// A witnessing triple: start `s`, difference `p`, length `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApWitness {
    pub s: usize,
    pub p: usize,
    pub k: usize,
}

/// A statistic value plus the lexicographically smallest witness attaining
/// it (present iff the value is >= 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApResult {
    pub value: usize,
    pub witness: Option<ApWitness>,
    pub mode: ApMode,
}

/// The `i`-th position of the wrapped progression: `((s + i*p - 1) mod n) + 1`.
#[inline]
pub fn pos(s: usize, i: usize, p: usize, n: usize) -> usize {
    debug_assert!(n >= 1 && s >= 1 && s <= n && p >= 1);
    (s + i * p - 1) % n + 1
}

fn check_sp(n: usize, s: usize, p: usize) -> Result<()> {
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
    Ok(())
}

/// `W_{s,p}`: largest `k <= N` with `ξ_s = 0` and ones at `s+ip (mod N)`,
/// `i = 1..=k`; 0 when the defining set is empty.
pub fn w_sp(w: &BinaryWord, s: usize, p: usize) -> Result<usize> {
    let n = w.len();
    check_sp(n, s, p)?;
    if w.bit(s) {
        return Ok(0);
    }
    let mut k = 0;
    for i in 1..=n {
        if w.bit(pos(s, i, p, n)) {
            k = i;
        } else {
            break;
        }
    }
    Ok(k)
}

/// `U_{s,p}`: largest `k <= floor((N-s)/p)` with `ξ_s = 0` and ones at
/// `s+ip`, `i = 1..=k`; 0 when the defining set is empty.
pub fn u_sp(w: &BinaryWord, s: usize, p: usize) -> Result<usize> {
    let n = w.len();
    check_sp(n, s, p)?;
    if w.bit(s) {
        return Ok(0);
    }
    let kmax = (n - s) / p;
    let mut k = 0;
    for i in 1..=kmax {
        if w.bit(s + i * p) {
            k = i;
        } else {
            break;
        }
    }
    Ok(k)
}

/// Running best: max value, ties broken by lexicographically smallest (s,p).
struct Best {
    value: usize,
    s: usize,
    p: usize,
}

impl Best {
    fn new() -> Self {
        Best {
            value: 0,
            s: usize::MAX,
            p: usize::MAX,
        }
    }

    #[inline]
    fn offer(&mut self, value: usize, s: usize, p: usize) {
        if value > self.value
            || (value == self.value && value > 0 && (s, p) < (self.s, self.p))
        {
            self.value = value;
            self.s = s;
            self.p = p;
        }
    }

    fn into_result(self, mode: ApMode) -> ApResult {
        let witness = (self.value > 0).then_some(ApWitness {
            s: self.s,
            p: self.p,
            k: self.value,
        });
        ApResult {
            value: self.value,
            witness,
            mode,
        }
    }
}

/// One byte per bit; the scanners are probe-bound and byte loads beat
/// shift-and-mask extraction in their inner loops.
fn unpack_bytes(w: &BinaryWord) -> Vec<u8> {
    (0..w.len()).map(|i| w.bit0(i) as u8).collect()
}

/// Sweeps every residue cycle of difference `p`, reporting the run of ones
/// after each zero to `visit(s0, run)` (`s0` 0-indexed). Skips all-ones
/// cycles (no admissible start exists there).
#[inline]
fn sweep_cycles_mod_p(bits: &[u8], p: usize, mut visit: impl FnMut(usize, usize)) {
    let n = bits.len();
    let g = gcd(n, p);
    let c = n / g;
    for start in 0..g {
        // locate the first zero, counting the ones before it
        let mut j = start;
        let mut lead = 0usize;
        let mut found = false;
        for _ in 0..c {
            if bits[j] == 1 {
                lead += 1;
                j += p;
                if j >= n {
                    j -= n;
                }
            } else {
                found = true;
                break;
            }
        }
        if !found {
            continue;
        }
        let first_zero = j;
        // one pass over the rest of the cycle; each zero owns the run after it
        let mut zero_at = first_zero;
        let mut run = 0usize;
        let mut q = first_zero + p;
        if q >= n {
            q -= n;
        }
        for _ in 0..c - lead - 1 {
            if bits[q] == 1 {
                run += 1;
            } else {
                visit(zero_at, run);
                zero_at = q;
                run = 0;
            }
            q += p;
            if q >= n {
                q -= n;
            }
        }
        // the final run wraps into the leading ones and stops at first_zero
        visit(zero_at, run + lead);
    }
}

/// `W^(N) = max_{s,p} W_{s,p}` via the stride-chain scanner.
///
/// Wrapped runs pair up under reversal: a maximal run of `k` ones after the
/// zero at `s` along difference `p` is also a run of `k` ones after the zero
/// at `s + (k+1)p (mod n)` along difference `n - p`. Scanning `p <= n/2` and
/// offering each candidate together with its mirror therefore covers every
/// pair at half the work (`p = n` alone supports no run at all).
pub fn max_w(w: &BinaryWord) -> ApResult {
    let n = w.len();
    let bits = unpack_bytes(w);
    let mut best = Best::new();
    for p in 1..=n / 2 {
        // a cycle of length c caps the value at c-1
        if n / gcd(n, p) <= best.value {
            continue;
        }
        sweep_cycles_mod_p(&bits, p, |s0, run| {
            // cheap reject before deriving the mirror
            if run > best.value || (run == best.value && run > 0) {
                best.offer(run, s0 + 1, p);
                let mirror_s0 = (s0 + (run + 1) * p) % n;
                best.offer(run, mirror_s0 + 1, n - p);
            }
        });
    }
    best.into_result(ApMode::Wrapped)
}

/// `U^(N) = max_{s,p} U_{s,p}` via straight-chain sweeps.
///
/// Differences are scanned in increasing order; once `floor((n-1)/p)` drops
/// below the best value no later difference can attain or tie it.
pub fn max_u(w: &BinaryWord) -> ApResult {
    let n = w.len();
    let bits = unpack_bytes(w);
    let mut best = Best::new();
    for p in 1..=n {
        if (n - 1) / p < best.value {
            break;
        }
        for start in 1..=p.min(n) {
            let mut zero_at = None;
            let mut run = 0usize;
            let mut q = start;
            loop {
                if bits[q - 1] == 1 {
                    run += 1;
                } else {
                    if let Some(z) = zero_at {
                        best.offer(run, z, p);
                    }
                    zero_at = Some(q);
                    run = 0;
                }
                q += p;
                if q > n {
                    break;
                }
            }
            if let Some(z) = zero_at {
                best.offer(run, z, p);
            }
        }
    }
    best.into_result(ApMode::Straight)
}

/// Brute-force `W^(N)`: double loop over `(s,p)`, same tie-breaking.
pub fn max_w_naive(w: &BinaryWord) -> Result<ApResult> {
    let n = w.len();
    if n > NAIVE_CAP {
        return Err(Error::CapExceeded {
            what: "n",
            got: n,
            cap: NAIVE_CAP,
        });
    }
    let mut best = Best::new();
    for s in 1..=n {
        for p in 1..=n {
            best.offer(w_sp(w, s, p)?, s, p);
        }
    }
    Ok(best.into_result(ApMode::Wrapped))
}

/// Brute-force `U^(N)`: double loop over `(s,p)`, same tie-breaking.
pub fn max_u_naive(w: &BinaryWord) -> Result<ApResult> {
    let n = w.len();
    if n > NAIVE_CAP {
        return Err(Error::CapExceeded {
            what: "n",
            got: n,
            cap: NAIVE_CAP,
        });
    }
    let mut best = Best::new();
    for s in 1..=n {
        for p in 1..=n {
            best.offer(u_sp(w, s, p)?, s, p);
        }
    }
    Ok(best.into_result(ApMode::Straight))
}

/// Counts pairs `(s,p)` whose wrapped progression has `ξ_s = 0` followed by
/// at least `m >= 1` ones (i.e. `W_{s,p} >= m`). One cycle sweep per
/// difference, `O(N)` each.
pub fn count_wrapped_at_least(w: &BinaryWord, m: usize) -> u64 {
    debug_assert!(m >= 1);
    let n = w.len();
    let mut count = 0u64;
    for p in 1..=n {
        if n / gcd(n, p) <= m {
            continue;
        }
        sweep_cycles_mod_p(w, p, |_, run| {
            if run >= m {
                count += 1;
            }
        });
    }
    count
}

/// Counts pairs `(s,p)` whose straight progression has `ξ_s = 0` followed by
/// at least `m >= 1` ones within `1..=N` (i.e. `U_{s,p} >= m`).
pub fn count_straight_at_least(w: &BinaryWord, m: usize) -> u64 {
    debug_assert!(m >= 1);
    let n = w.len();
    if n == 0 || m >= n {
        return 0;
    }
    let mut count = 0u64;
    for p in 1..=(n - 1) / m {
        for start in 1..=p {
            let mut zero_at = false;
            let mut run = 0usize;
            let mut q = start;
            loop {
                if w.bit0(q - 1) {
                    run += 1;
                } else {
                    if zero_at && run >= m {
                        count += 1;
                    }
                    zero_at = true;
                    run = 0;
                }
                q += p;
                if q > n {
                    break;
                }
            }
            if zero_at && run >= m {
                count += 1;
            }
        }
    }
    count
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngword::{generate_word, StreamSeed};

    fn word01(s: &str) -> BinaryWord {
        BinaryWord::from_str01(s).unwrap()
    }

    #[test]
    fn pos_examples() {
        assert_eq!(pos(4, 1, 3, 5), 2);
        assert_eq!(pos(9, 0, 4, 10), 9);
        assert_eq!(pos(1, 2, 5, 5), 1); // full wrap back to the start
    }

    #[test]
    fn w_sp_hand_cases() {
        let w = word01("01101");
        assert_eq!(w_sp(&w, 1, 1).unwrap(), 2);
        assert_eq!(w_sp(&w, 4, 3).unwrap(), 3); // positions 2,5,3 hold ones
        assert_eq!(w_sp(&w, 1, 2).unwrap(), 3);
        assert_eq!(w_sp(&w, 2, 1).unwrap(), 0); // ξ_2 = 1
    }

    #[test]
    fn w_sp_full_difference_is_zero() {
        // p = N revisits s at every step; the leading zero forbids k >= 1
        for s01 in ["00000", "01111", "10111", "01101"] {
            let w = word01(s01);
            for s in 1..=5 {
                assert_eq!(w_sp(&w, s, 5).unwrap(), 0);
            }
        }
    }

    #[test]
    fn u_sp_hand_cases() {
        let w = word01("01101");
        assert_eq!(u_sp(&w, 1, 1).unwrap(), 2);
        assert_eq!(u_sp(&w, 4, 1).unwrap(), 1);
        assert_eq!(u_sp(&w, 1, 2).unwrap(), 2);
    }

    #[test]
    fn u_sp_all_zeros() {
        let w = word01("00000");
        for s in 1..=5 {
            for p in 1..=5 {
                assert_eq!(u_sp(&w, s, p).unwrap(), 0);
            }
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let w = word01("01101");
        assert!(w_sp(&w, 0, 1).is_err());
        assert!(w_sp(&w, 6, 1).is_err());
        assert!(w_sp(&w, 1, 0).is_err());
        assert!(u_sp(&w, 1, 6).is_err());
    }

    #[test]
    fn max_hand_word() {
        let w = word01("01101");
        let rw = max_w(&w);
        assert_eq!(rw.value, 3);
        assert_eq!(rw.witness, Some(ApWitness { s: 1, p: 2, k: 3 }));
        let ru = max_u(&w);
        assert_eq!(ru.value, 2);
        assert_eq!(ru.witness, Some(ApWitness { s: 1, p: 1, k: 2 }));
        assert_eq!(max_w_naive(&w).unwrap(), rw);
        assert_eq!(max_u_naive(&w).unwrap(), ru);
    }

    #[test]
    fn all_ones_has_no_witness() {
        let w = word01("11111111");
        let r = max_w(&w);
        assert_eq!(r.value, 0);
        assert!(r.witness.is_none());
        assert_eq!(max_u(&w).value, 0);
    }

    #[test]
    fn single_zero_word() {
        let w = word01("0");
        assert_eq!(max_w(&w).value, 0);
        assert_eq!(max_u(&w).value, 0);
        assert_eq!(max_w_naive(&w).unwrap().value, 0);
    }

    #[test]
    fn naive_cap_enforced() {
        let w = generate_word(StreamSeed::new(1, 0), NAIVE_CAP + 1);
        assert!(matches!(
            max_w_naive(&w),
            Err(Error::CapExceeded { cap: NAIVE_CAP, .. })
        ));
    }

    #[test]
    fn scanner_matches_oracle_on_random_words() {
        for trial in 0..200u64 {
            let n = 1 + (trial as usize * 7919) % 128;
            let w = generate_word(StreamSeed::new(5, trial), n);
            assert_eq!(max_w(&w), max_w_naive(&w).unwrap(), "W mismatch at n={n} trial={trial}");
            assert_eq!(max_u(&w), max_u_naive(&w).unwrap(), "U mismatch at n={n} trial={trial}");
        }
    }

    #[test]
    fn u_never_exceeds_w() {
        for trial in 0..50u64 {
            let w = generate_word(StreamSeed::new(11, trial), 96);
            assert!(max_u(&w).value <= max_w(&w).value);
        }
    }

    #[test]
    fn witness_bounded_by_cycle_length() {
        for trial in 0..50u64 {
            let w = generate_word(StreamSeed::new(13, trial), 60);
            let r = max_w(&w);
            if let Some(wit) = r.witness {
                let c = 60 / gcd(60, wit.p);
                assert!(wit.k < c, "k={} not below cycle {c}", wit.k);
            }
        }
    }

    #[test]
    fn u_monotone_under_extension() {
        for trial in 0..20u64 {
            let seed = StreamSeed::new(17, trial);
            let mut prev = 0;
            let mut w = generate_word(seed, 1);
            for n in 1..=256usize {
                w = extend(seed, w, n);
                let u = max_u(&w).value;
                assert!(u >= prev, "U dropped {prev}->{u} at n={n}");
                prev = u;
            }
        }
    }

    fn extend(seed: StreamSeed, w: BinaryWord, n: usize) -> BinaryWord {
        crate::rngword::extend_word(&w, seed, n).unwrap()
    }

    #[test]
    fn counts_match_definitions() {
        for trial in 0..30u64 {
            let w = generate_word(StreamSeed::new(23, trial), 48);
            let n = w.len();
            for m in 1..=4usize {
                let mut wrapped = 0u64;
                let mut straight = 0u64;
                for s in 1..=n {
                    for p in 1..=n {
                        if w_sp(&w, s, p).unwrap() >= m {
                            wrapped += 1;
                        }
                        if u_sp(&w, s, p).unwrap() >= m {
                            straight += 1;
                        }
                    }
                }
                assert_eq!(count_wrapped_at_least(&w, m), wrapped, "m={m}");
                assert_eq!(count_straight_at_least(&w, m), straight, "m={m}");
            }
        }
    }
}
