use std::ops::{Add, AddAssign, Sub};
use std::sync::atomic::{AtomicU64, Ordering};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::hash::{self, check_index};
use super::{CryptoError, Digest, HashMode, HashOutput, PairingGroup};

/// Tally of expensive operations, in the usual cost notation:
/// `T_M` scalar multiplications, `T_BP` pairings, `T_E` target-group
/// exponentiations and `T_H` hash evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OpCounts {
    pub scalar_mults: u64,
    pub pairings: u64,
    pub exponentiations: u64,
    pub hashes: u64,
}

impl OpCounts {
    pub const fn new(scalar_mults: u64, pairings: u64, exponentiations: u64, hashes: u64) -> Self {
        Self {
            scalar_mults,
            pairings,
            exponentiations,
            hashes,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::default()
    }
}

impl Add for OpCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            scalar_mults: self.scalar_mults + o.scalar_mults,
            pairings: self.pairings + o.pairings,
            exponentiations: self.exponentiations + o.exponentiations,
            hashes: self.hashes + o.hashes,
        }
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for OpCounts {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            scalar_mults: self.scalar_mults - o.scalar_mults,
            pairings: self.pairings - o.pairings,
            exponentiations: self.exponentiations - o.exponentiations,
            hashes: self.hashes - o.hashes,
        }
    }
}

impl std::fmt::Display for OpCounts {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}T_M + {}T_BP + {}T_E + {}T_H",
            self.scalar_mults, self.pairings, self.exponentiations, self.hashes
        )
    }
}

#[derive(Debug, Default)]
struct Counters {
    mults: AtomicU64,
    pairings: AtomicU64,
    exps: AtomicU64,
    hashes: AtomicU64,
}

/// A group backend plus the operation counters for one session or entity.
#[derive(Debug)]
pub struct CryptoContext<G: PairingGroup> {
    group: G,
    counters: Counters,
}

impl<G: PairingGroup> Clone for CryptoContext<G> {
    /// Clones the backend with fresh counters.
    fn clone(&self) -> Self {
        Self::new(self.group.clone())
    }
}

impl<G: PairingGroup> CryptoContext<G> {
    pub fn new(group: G) -> Self {
        Self {
            group,
            counters: Counters::default(),
        }
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn counts(&self) -> OpCounts {
        OpCounts {
            scalar_mults: self.counters.mults.load(Ordering::Relaxed),
            pairings: self.counters.pairings.load(Ordering::Relaxed),
            exponentiations: self.counters.exps.load(Ordering::Relaxed),
            hashes: self.counters.hashes.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.counters.mults.store(0, Ordering::Relaxed);
        self.counters.pairings.store(0, Ordering::Relaxed);
        self.counters.exps.store(0, Ordering::Relaxed);
        self.counters.hashes.store(0, Ordering::Relaxed);
    }

    /// Runs `f` and returns its result with the operations it performed.
    pub fn measure<R>(&self, f: impl FnOnce(&Self) -> R) -> (R, OpCounts) {
        let before = self.counts();
        let out = f(self);
        (out, self.counts() - before)
    }

    pub fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> G::Scalar {
        self.group.random_scalar(rng)
    }

    pub fn scalar_mul(&self, k: &G::Scalar, a: &G::Element) -> G::Element {
        self.counters.mults.fetch_add(1, Ordering::Relaxed);
        self.group.mul(k, a)
    }

    pub fn pairing(&self, a: &G::Element, b: &G::Element) -> G::Target {
        self.counters.pairings.fetch_add(1, Ordering::Relaxed);
        self.group.pair(a, b)
    }

    /// `e(a, b) == e(c, d)`; counted as two pairings.
    pub fn pairing_eq(
        &self,
        a: &G::Element,
        b: &G::Element,
        c: &G::Element,
        d: &G::Element,
    ) -> bool {
        self.counters.pairings.fetch_add(2, Ordering::Relaxed);
        self.group.pairing_eq(a, b, c, d)
    }

    pub fn target_pow(&self, t: &G::Target, k: &G::Scalar) -> G::Target {
        self.counters.exps.fetch_add(1, Ordering::Relaxed);
        self.group.target_pow(t, k)
    }

    /// Evaluates `h_index` over the ordered inputs.
    pub fn hash(
        &self,
        index: u8,
        mode: HashMode,
        inputs: &[&[u8]],
    ) -> Result<HashOutput<G::Element>, CryptoError> {
        check_index(index, mode)?;
        self.counters.hashes.fetch_add(1, Ordering::Relaxed);
        Ok(match mode {
            HashMode::Bytes => HashOutput::Digest(hash::digest(index, inputs)),
            HashMode::Group => {
                HashOutput::Element(self.group.hash_to_element(&hash::wide(index, inputs)))
            }
        })
    }

    /// Byte-mode hash for a fixed, known-valid index.
    pub(crate) fn h(&self, index: u8, inputs: &[&[u8]]) -> Digest {
        match self.hash(index, HashMode::Bytes, inputs) {
            Ok(HashOutput::Digest(d)) => d,
            _ => unreachable!("byte-mode hash with constant index"),
        }
    }

    /// Group-valued `h6`.
    pub(crate) fn h6_group(&self, inputs: &[&[u8]]) -> G::Element {
        match self.hash(6, HashMode::Group, inputs) {
            Ok(HashOutput::Element(e)) => e,
            _ => unreachable!("h6 supports group mode"),
        }
    }

    pub fn encode(&self, a: &G::Element) -> Vec<u8> {
        self.group.encode_element(a)
    }

    pub fn encode_scalar(&self, k: &G::Scalar) -> Vec<u8> {
        self.group.encode_scalar(k)
    }

    pub fn encode_target(&self, t: &G::Target) -> Vec<u8> {
        self.group.encode_target(t)
    }
}
