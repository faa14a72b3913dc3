use std::fmt;

use rand::RngCore;

use super::CryptoError;

/// A prime-order additive group equipped with a symmetric bilinear map
/// `e: G x G -> G_T`.
///
/// Protocol code is generic over this trait so that every algebraic check can
/// run both on the production backend and on the small toy group used for
/// exhaustive verification.
pub trait PairingGroup: Clone + PartialEq + Send + Sync + fmt::Debug + 'static {
    /// Nonzero element of `Z_q`.
    type Scalar: Clone + PartialEq + Send + Sync + fmt::Debug;
    /// Element of the source group `G`.
    type Element: Clone + PartialEq + Send + Sync + fmt::Debug;
    /// Element of the target group `G_T`.
    type Target: Clone + PartialEq + Send + Sync + fmt::Debug;

    /// Short identifier written into parameter dumps and store snapshots.
    fn group_id(&self) -> String;

    /// Big-endian encoding of the group order `q`.
    fn order_be_bytes(&self) -> Vec<u8>;

    /// Width of the canonical element encoding in bytes.
    fn element_len(&self) -> usize;

    /// Width of the canonical scalar encoding in bytes.
    fn scalar_len(&self) -> usize;

    fn generator(&self) -> Self::Element;

    fn identity(&self) -> Self::Element;

    /// Uniform draw from `Z_q^*`. Consumes the generator deterministically.
    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Self::Scalar;

    /// `v mod q`, or `None` when that is zero.
    fn scalar_from_u64(&self, v: u64) -> Option<Self::Scalar>;

    /// `a + b mod q`, or `None` when the sum is zero.
    fn scalar_add(&self, a: &Self::Scalar, b: &Self::Scalar) -> Option<Self::Scalar>;

    fn scalar_neg(&self, a: &Self::Scalar) -> Self::Scalar;

    fn mul(&self, k: &Self::Scalar, a: &Self::Element) -> Self::Element;

    fn add(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;

    fn neg(&self, a: &Self::Element) -> Self::Element;

    fn pair(&self, a: &Self::Element, b: &Self::Element) -> Self::Target;

    fn target_pow(&self, t: &Self::Target, k: &Self::Scalar) -> Self::Target;

    /// `e(a, b) == e(c, d)`. Backends may override with a cheaper combined
    /// evaluation.
    fn pairing_eq(
        &self,
        a: &Self::Element,
        b: &Self::Element,
        c: &Self::Element,
        d: &Self::Element,
    ) -> bool {
        self.pair(a, b) == self.pair(c, d)
    }

    /// Maps 64 uniformly random bytes to a non-identity group element.
    fn hash_to_element(&self, wide: &[u8; 64]) -> Self::Element;

    fn encode_element(&self, a: &Self::Element) -> Vec<u8>;

    fn decode_element(&self, bytes: &[u8]) -> Result<Self::Element, CryptoError>;

    fn encode_scalar(&self, k: &Self::Scalar) -> Vec<u8>;

    fn decode_scalar(&self, bytes: &[u8]) -> Result<Self::Scalar, CryptoError>;

    fn encode_target(&self, t: &Self::Target) -> Vec<u8>;
}
