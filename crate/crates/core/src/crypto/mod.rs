//! Group, pairing and hashing primitives.
//!
//! Two backends implement [`PairingGroup`]:
//!
//! * [`Bls12Dual`], the production backend, wraps BLS12-381 and represents a
//!   source-group element as the pair `(a·G1, a·G2)`. Pairing the G1 half of
//!   one element with the G2 half of another gives a symmetric map, which is
//!   what the protocol's point-by-point products need.
//! * [`ToyGroup`], the additive group `Z_p` with `e(a, b) = a·b mod p`. It is
//!   only meant as a brute-force oracle: with `p` near `2^13` every scalar can
//!   be enumerated.
//!
//! All operations go through a [`CryptoContext`], which also counts scalar
//! multiplications, pairings, exponentiations and hashes.

mod bls;
mod bytes;
mod context;
mod group;
pub(crate) mod hash;
mod toy;

use thiserror::Error;

pub use bls::Bls12Dual;
pub use bytes::{to_block, xor_block, xor_mask, Block, BLOCK_LEN};
pub use context::{CryptoContext, OpCounts};
pub use group::PairingGroup;
pub use hash::{Digest, HashMode, HashOutput, HASH_COUNT};
pub use toy::{ToyElement, ToyGroup, ToyScalar, ToyTarget};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("length mismatch: {left} vs {right} bytes")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid group element encoding")]
    InvalidElement,
    #[error("invalid scalar encoding")]
    InvalidScalar,
    #[error("hash index {0} out of range 1..=7")]
    HashIndex(u8),
    #[error("group-valued output is only defined for h6, not h{0}")]
    GroupModeUnsupported(u8),
    #[error("toy group modulus {0} is not a prime in 3..65536")]
    ToyModulus(u32),
    #[error("toy group generator {0} is not in 1..p")]
    ToyGenerator(u32),
}
