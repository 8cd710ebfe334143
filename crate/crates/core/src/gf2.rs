//! Incremental GF(2) elimination over prime-indexed parity vectors, with
//! provenance: when an inserted vector reduces to zero, the returned id set
//! names exactly the original vectors whose XOR vanishes, i.e. the subset
//! whose product is a square.
//!
//! Rows are hybrid: a dense bitset over the primes below a configurable
//! bound (where most of the mass lives) and a sorted sparse set above it.
//! Pivots are chosen on the largest prime of a row; large primes are rare
//! across rows, which keeps the reduced rows short.

use crate::arith::Factorization;
use crate::{Error, Result};
use std::collections::BTreeMap;

/// Primes dividing the source integer to an odd power, sorted ascending.
/// Empty iff the source is a perfect square.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExponentVector {
    primes: Vec<u64>,
}

impl ExponentVector {
    /// From a sorted, duplicate-free list of primes.
    pub fn new(primes: Vec<u64>) -> Self {
        debug_assert!(primes.windows(2).all(|w| w[0] < w[1]));
        ExponentVector { primes }
    }

    pub fn from_factorization(f: &Factorization) -> Self {
        ExponentVector { primes: f.odd_primes() }
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Symmetric difference (XOR over GF(2)).
    pub fn xor(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector { primes: sym_diff(&self.primes, &other.primes) }
    }
}

fn sym_diff(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Outcome of inserting one vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InsertOutcome {
    Independent,
    /// The inserted vector closed a dependence; XOR of the original vectors
    /// over this id set is empty. Always contains the id just inserted.
    Dependent(Vec<u64>),
}

/// Working row: dense words below the dense prime bound, sparse set above.
#[derive(Debug, Clone)]
struct Row {
    dense: Vec<u64>,
    sparse: Vec<u64>,
}

impl Row {
    fn is_empty(&self) -> bool {
        self.sparse.is_empty() && self.dense.iter().all(|&w| w == 0)
    }
}

#[derive(Debug, Clone)]
struct Entry {
    row: Row,
    provenance: Vec<u64>, // sorted id set
}

/// Incremental eliminator. Single-owner mutable state: one per trial.
#[derive(Debug, Clone)]
pub struct Eliminator {
    dense_primes: Vec<u64>,
    pivots: BTreeMap<u64, Entry>,
    inserted: u64,
    dependents: u64,
    seen_ids: std::collections::HashSet<u64>,
    originals: Option<Vec<(u64, ExponentVector)>>,
}

impl Eliminator {
    /// `dense_primes`: ascending primes indexed by the dense bitset
    /// (typically the table primes below ~10^4). May be empty.
    pub fn new(dense_primes: Vec<u64>) -> Self {
        debug_assert!(dense_primes.windows(2).all(|w| w[0] < w[1]));
        Eliminator {
            dense_primes,
            pivots: BTreeMap::new(),
            inserted: 0,
            dependents: 0,
            seen_ids: Default::default(),
            originals: None,
        }
    }

    /// Keep original vectors and re-verify every Dependent result against
    /// them before returning it.
    pub fn with_verification(mut self) -> Self {
        self.originals = Some(Vec::new());
        self
    }

    fn encode(&self, v: &ExponentVector) -> Row {
        let words = self.dense_primes.len().div_ceil(64);
        let mut dense = vec![0u64; words];
        let mut sparse = Vec::new();
        let bound = self.dense_primes.last().copied().unwrap_or(0);
        for &p in v.primes() {
            if p <= bound {
                match self.dense_primes.binary_search(&p) {
                    Ok(idx) => dense[idx / 64] ^= 1 << (idx % 64),
                    Err(_) => sparse.push(p), // not in the dense index set
                }
            } else {
                sparse.push(p);
            }
        }
        Row { dense, sparse }
    }

    /// Largest prime with an odd entry, the pivot position.
    fn max_prime(&self, row: &Row) -> Option<u64> {
        if let Some(&p) = row.sparse.last() {
            return Some(p);
        }
        for (w, &word) in row.dense.iter().enumerate().rev() {
            if word != 0 {
                let bit = 63 - word.leading_zeros() as usize;
                return Some(self.dense_primes[w * 64 + bit]);
            }
        }
        None
    }

    fn xor_into(dst: &mut Row, src: &Row) {
        for (d, s) in dst.dense.iter_mut().zip(&src.dense) {
            *d ^= s;
        }
        dst.sparse = sym_diff(&dst.sparse, &src.sparse);
    }

    /// Reduce `v` against the stored pivot rows. Returns the dependence id
    /// set when the reduction empties, otherwise stores the reduced row.
    pub fn insert(&mut self, v: &ExponentVector, id: u64) -> Result<InsertOutcome> {
        if !self.seen_ids.insert(id) {
            return Err(Error::DuplicateId(id));
        }
        if let Some(orig) = self.originals.as_mut() {
            orig.push((id, v.clone()));
        }
        self.inserted += 1;
        let mut row = self.encode(v);
        let mut provenance = vec![id];
        while let Some(p) = self.max_prime(&row) {
            match self.pivots.get(&p) {
                Some(entry) => {
                    Self::xor_into(&mut row, &entry.row);
                    provenance = sym_diff(&provenance, &entry.provenance);
                }
                None => {
                    self.pivots.insert(p, Entry { row, provenance });
                    return Ok(InsertOutcome::Independent);
                }
            }
        }
        debug_assert!(row.is_empty());
        self.dependents += 1;
        if let Some(originals) = &self.originals {
            let mut acc = ExponentVector::default();
            for (oid, ov) in originals {
                if provenance.binary_search(oid).is_ok() {
                    acc = acc.xor(ov);
                }
            }
            if !acc.is_empty() {
                return Err(Error::Internal(format!(
                    "provenance set {provenance:?} does not XOR to zero"
                )));
            }
        }
        Ok(InsertOutcome::Dependent(provenance))
    }

    pub fn inserted(&self) -> u64 {
        self.inserted
    }

    pub fn rank(&self) -> u64 {
        self.pivots.len() as u64
    }

    /// `inserted - rank`: the number of Dependent outcomes so far.
    pub fn rank_deficiency(&self) -> u64 {
        self.inserted - self.rank()
    }
}
