use sha2::{Digest as _, Sha256, Sha512};

use super::{Block, CryptoError, BLOCK_LEN};

/// Number of hash functions in the family (`h1` through `h7`).
pub const HASH_COUNT: u8 = 7;

const TAG_PREFIX: &[u8] = b"RCM-h";

/// A 20-byte hash output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(pub Block);

impl Digest {
    pub fn as_bytes(&self) -> &Block {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashMode {
    Bytes,
    /// Hash onto the source group. Only `h6` has this form.
    Group,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HashOutput<E> {
    Digest(Digest),
    Element(E),
}

pub(crate) fn check_index(index: u8, mode: HashMode) -> Result<(), CryptoError> {
    if !(1..=HASH_COUNT).contains(&index) {
        return Err(CryptoError::HashIndex(index));
    }
    if mode == HashMode::Group && index != 6 {
        return Err(CryptoError::GroupModeUnsupported(index));
    }
    Ok(())
}

/// Feeds `tag_i ‖ mode ‖ (len ‖ input)*` into `hasher`. Length prefixes keep
/// distinct input lists from colliding through concatenation.
fn absorb<H: sha2::Digest>(hasher: &mut H, index: u8, mode: HashMode, inputs: &[&[u8]]) {
    hasher.update(TAG_PREFIX);
    hasher.update([b'0' + index]);
    hasher.update([mode as u8]);
    for input in inputs {
        hasher.update((input.len() as u32).to_be_bytes());
        hasher.update(input);
    }
}

pub(crate) fn digest(index: u8, inputs: &[&[u8]]) -> Digest {
    let mut hasher = Sha256::new();
    absorb(&mut hasher, index, HashMode::Bytes, inputs);
    let full = hasher.finalize();
    let mut out = [0u8; BLOCK_LEN];
    out.copy_from_slice(&full[..BLOCK_LEN]);
    Digest(out)
}

pub(crate) fn wide(index: u8, inputs: &[&[u8]]) -> [u8; 64] {
    let mut hasher = Sha512::new();
    absorb(&mut hasher, index, HashMode::Group, inputs);
    hasher.finalize().into()
}
