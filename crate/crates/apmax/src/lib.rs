//! Maximal arithmetic-progression statistics of random binary words.
//!
//! A random word `ξ_1..ξ_N` of fair coin flips induces the random set
//! `Ξ_N = {i : ξ_i = 1}`. This crate computes, exactly and by reproducible
//! Monte Carlo, the two extremal statistics of that set:
//!
//! * `W` — the longest arithmetic progression mod `N` of ones preceded by a
//!   zero (the zero at the start rules out periodic progressions), and
//! * `U` — the same for straight progressions confined to `1..=N`.
//!
//! Both grow like `2·log2(N)`, and their centered laws are of extreme type:
//! `P(stat ≤ centering + x) → exp(-2^-(x+2))`, with an exponential upper
//! tail and a doubly exponential lower tail. The crate provides
//!
//! * deterministic, prefix-consistent word generation so that all lengths
//!   live on one probability space per seed ([`rngword`]),
//! * exact scanners and brute-force oracles for `W` and `U` ([`apscan`]),
//! * the Poisson-approximation machinery: threshold indicators, exact first
//!   moments, progression-set intersection counts, and exact/bounded
//!   dependency sums `B1`/`B2` ([`chenstein`]),
//! * the predicted limit law and empirical-CDF comparisons ([`limitlaw`]),
//! * reproducible experiment drivers: distribution runs, nested common-seed
//!   trajectories, and the lattice exceedance count `Λ(n)` used in the
//!   second-moment argument ([`experiments`]).
//!
//! The `apmax` binary exposes all of it behind subcommands; the `examples/`
//! directory has one runnable program per capability.

pub mod apscan;
pub mod chenstein;
pub mod cli;
mod error;
pub mod experiments;
pub mod io;
pub mod limitlaw;
pub mod rngword;

pub use error::{Error, Result};
