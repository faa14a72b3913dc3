use super::CryptoError;

/// Length of identities, registration keys, digests and every XOR-masked
/// token on the wire.
pub const BLOCK_LEN: usize = 20;

/// A fixed 20-byte token.
pub type Block = [u8; BLOCK_LEN];

/// Bytewise XOR of two equal-length strings.
pub fn xor_mask(a: &[u8], b: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if a.len() != b.len() {
        return Err(CryptoError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| x ^ y).collect())
}

pub fn xor_block(a: &Block, b: &Block) -> Block {
    let mut out = [0u8; BLOCK_LEN];
    for (o, (x, y)) in out.iter_mut().zip(a.iter().zip(b)) {
        *o = x ^ y;
    }
    out
}

/// Copies a slice into a block, rejecting any other length.
pub fn to_block(bytes: &[u8]) -> Result<Block, CryptoError> {
    bytes.try_into().map_err(|_| CryptoError::LengthMismatch {
        left: bytes.len(),
        right: BLOCK_LEN,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn self_xor_is_zero() {
        let a = [0xa5u8; 20];
        assert_eq!(xor_mask(&a, &a).unwrap(), vec![0u8; 20]);
    }

    #[test]
    fn xor_is_an_involution() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for _ in 0..100 {
            let a: Block = rng.gen();
            let b: Block = rng.gen();
            let masked = xor_mask(&a, &b).unwrap();
            assert_eq!(xor_mask(&masked, &b).unwrap(), a.to_vec());
            assert_eq!(xor_block(&xor_block(&a, &b), &b), a);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let err = xor_mask(&[0u8; 20], &[0u8; 21]).unwrap_err();
        assert_eq!(
            err,
            CryptoError::LengthMismatch {
                left: 20,
                right: 21
            }
        );
        assert!(to_block(&[0u8; 19]).is_err());
    }
}
