//! Laboratory for the random-squares stopping problem: draw uniform integers
//! from `[1, x]` until some subsequence has square product, analyse the first
//! square dependence, count pseudosmooths through the k-large-prime hypergraph
//! machinery, and evaluate the limit functions that govern the threshold.
//!
//! The crate is organised around the pipeline:
//!
//! * [`arith`] — prime sieves and complete 64-bit factorization,
//! * [`smooth`] — Dickman rho, exact and estimated smooth counts Psi(x,y),
//!   saddle points, and the (y0, J0) parameter solver,
//! * [`gf2`] — incremental GF(2) elimination with provenance,
//! * [`process`] — the sampling process itself and large-prime classes,
//! * [`witness`] — the culled tree-like hypergraphs that witness pseudosmooths,
//! * [`limit`] — the gamma/theta recursions, the Poisson limit sampler, and
//!   the eta threshold table.

pub mod arith;
pub mod gf2;
pub mod limit;
pub mod process;
pub mod quad;
pub mod smooth;
pub mod witness;

use serde::{Deserialize, Serialize};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("bound {0} outside supported range [{1}, {2}]")]
    BoundRange(u64, u64, u64),
    #[error("argument {0} exceeds table bound {1}")]
    AboveTableBound(u64, u64),
    #[error("x = {0} too large for exact enumeration (max {1})")]
    EnumerationRange(u64, u64),
    #[error("cannot factor zero")]
    FactorZero,
    #[error("failed to split composite {0} within the retry budget")]
    SplitFailed(u64),
    #[error("duplicate row id {0}")]
    DuplicateId(u64),
    #[error("no root in bracket [{lo}, {hi}] (f(lo) = {flo}, f(hi) = {fhi})")]
    NoRoot { lo: f64, hi: f64, flo: f64, fhi: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Cutoff for the number of large primes tracked per sample: a finite `k`
/// or no cutoff at all. Serialized as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KBound {
    Finite(u32),
    Inf,
}

impl KBound {
    /// True when a class of `len` large primes passes the `|S| <= k` filter.
    pub fn admits(self, len: usize) -> bool {
        match self {
            KBound::Finite(k) => len <= k as usize,
            KBound::Inf => true,
        }
    }
}

impl std::fmt::Display for KBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KBound::Finite(k) => write!(f, "{k}"),
            KBound::Inf => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for KBound {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            Ok(KBound::Inf)
        } else {
            s.parse::<u32>().map(KBound::Finite).map_err(|e| e.to_string())
        }
    }
}

impl Serialize for KBound {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            KBound::Finite(k) => ser.serialize_u32(*k),
            KBound::Inf => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for KBound {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u32),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(k) => Ok(KBound::Finite(k)),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
