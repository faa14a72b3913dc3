use rand::{Rng, RngCore};

use super::{CryptoError, PairingGroup};

/// Additive group `Z_p` with the bilinear map `e(a, b) = a·b mod p`.
///
/// Discrete logarithms are trivial here, so this backend has no security at
/// all. It exists so protocol identities can be checked exhaustively.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyGroup {
    p: u32,
    g: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToyScalar(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ToyElement(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ToyTarget(pub u32);

impl ToyGroup {
    /// Largest prime below `2^13`.
    pub const DEFAULT_MODULUS: u32 = 8191;
    pub const DEFAULT_GENERATOR: u32 = 3;

    pub fn new(p: u32, g: u32) -> Result<Self, CryptoError> {
        if !(3..=u16::MAX as u32).contains(&p) || !is_prime(p) {
            return Err(CryptoError::ToyModulus(p));
        }
        if g == 0 || g >= p {
            return Err(CryptoError::ToyGenerator(g));
        }
        Ok(Self { p, g })
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    fn mulmod(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }
}

impl Default for ToyGroup {
    fn default() -> Self {
        Self {
            p: Self::DEFAULT_MODULUS,
            g: Self::DEFAULT_GENERATOR,
        }
    }
}

fn is_prime(n: u32) -> bool {
    n >= 2
        && (2..)
            .take_while(|d| d * d <= n)
            .all(|d| !n.is_multiple_of(d))
}

impl PairingGroup for ToyGroup {
    type Scalar = ToyScalar;
    type Element = ToyElement;
    type Target = ToyTarget;

    fn group_id(&self) -> String {
        format!("toy-z{}-g{}", self.p, self.g)
    }

    fn order_be_bytes(&self) -> Vec<u8> {
        (self.p as u16).to_be_bytes().to_vec()
    }

    fn element_len(&self) -> usize {
        2
    }

    fn scalar_len(&self) -> usize {
        2
    }

    fn generator(&self) -> ToyElement {
        ToyElement(self.g)
    }

    fn identity(&self) -> ToyElement {
        ToyElement(0)
    }

    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> ToyScalar {
        ToyScalar(rng.gen_range(1..self.p))
    }

    fn scalar_from_u64(&self, v: u64) -> Option<ToyScalar> {
        let r = (v % self.p as u64) as u32;
        (r != 0).then_some(ToyScalar(r))
    }

    fn scalar_add(&self, a: &ToyScalar, b: &ToyScalar) -> Option<ToyScalar> {
        self.scalar_from_u64(a.0 as u64 + b.0 as u64)
    }

    fn scalar_neg(&self, a: &ToyScalar) -> ToyScalar {
        ToyScalar(self.p - a.0)
    }

    fn mul(&self, k: &ToyScalar, a: &ToyElement) -> ToyElement {
        ToyElement(self.mulmod(k.0, a.0))
    }

    fn add(&self, a: &ToyElement, b: &ToyElement) -> ToyElement {
        ToyElement((a.0 + b.0) % self.p)
    }

    fn neg(&self, a: &ToyElement) -> ToyElement {
        ToyElement((self.p - a.0) % self.p)
    }

    fn pair(&self, a: &ToyElement, b: &ToyElement) -> ToyTarget {
        ToyTarget(self.mulmod(a.0, b.0))
    }

    fn target_pow(&self, t: &ToyTarget, k: &ToyScalar) -> ToyTarget {
        // G_T is written additively here as well.
        ToyTarget(self.mulmod(t.0, k.0))
    }

    fn hash_to_element(&self, wide: &[u8; 64]) -> ToyElement {
        let mut head = [0u8; 8];
        head.copy_from_slice(&wide[..8]);
        let v = u64::from_be_bytes(head) % (self.p as u64 - 1);
        ToyElement(v as u32 + 1)
    }

    fn encode_element(&self, a: &ToyElement) -> Vec<u8> {
        (a.0 as u16).to_be_bytes().to_vec()
    }

    fn decode_element(&self, bytes: &[u8]) -> Result<ToyElement, CryptoError> {
        let raw: [u8; 2] = bytes.try_into().map_err(|_| CryptoError::InvalidElement)?;
        let v = u16::from_be_bytes(raw) as u32;
        if v >= self.p {
            return Err(CryptoError::InvalidElement);
        }
        Ok(ToyElement(v))
    }

    fn encode_scalar(&self, k: &ToyScalar) -> Vec<u8> {
        (k.0 as u16).to_be_bytes().to_vec()
    }

    fn decode_scalar(&self, bytes: &[u8]) -> Result<ToyScalar, CryptoError> {
        let raw: [u8; 2] = bytes.try_into().map_err(|_| CryptoError::InvalidScalar)?;
        let v = u16::from_be_bytes(raw) as u32;
        if v == 0 || v >= self.p {
            return Err(CryptoError::InvalidScalar);
        }
        Ok(ToyScalar(v))
    }

    fn encode_target(&self, t: &ToyTarget) -> Vec<u8> {
        (t.0 as u16).to_be_bytes().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `k·a` by k-fold repeated addition; independent of `mul`.
    fn repeated_add(g: &ToyGroup, k: u32, a: ToyElement) -> ToyElement {
        (0..k).fold(g.identity(), |acc, _| g.add(&acc, &a))
    }

    #[test]
    fn scalar_mul_distributes_over_scalar_addition() {
        let g = ToyGroup::default();
        let p = g.generator();
        for k1 in 1..50u32 {
            for k2 in 1..50u32 {
                let sum = g.scalar_add(&ToyScalar(k1), &ToyScalar(k2)).unwrap();
                let lhs = g.mul(&sum, &p);
                let rhs = g.add(&g.mul(&ToyScalar(k1), &p), &g.mul(&ToyScalar(k2), &p));
                assert_eq!(lhs, rhs);
                assert_eq!(lhs, repeated_add(&g, k1 + k2, p));
            }
        }
    }

    #[test]
    fn order_minus_one_negates() {
        let g = ToyGroup::default();
        let p = g.generator();
        let minus_one = g.scalar_neg(&ToyScalar(1));
        assert_eq!(g.mul(&minus_one, &p), g.neg(&p));
        assert_eq!(g.add(&g.mul(&minus_one, &p), &p), g.identity());
    }

    #[test]
    fn pairing_is_bilinear_by_enumeration() {
        let g = ToyGroup::new(101, 2).unwrap();
        let p = g.generator();
        // e(a·P, b·P) against the brute-force product of repeated additions.
        for a in 1..101u32 {
            for b in 1..101u32 {
                let lhs = g.pair(&g.mul(&ToyScalar(a), &p), &g.mul(&ToyScalar(b), &p));
                let ab = repeated_add(&g, a, p).0 as u64 * repeated_add(&g, b, p).0 as u64;
                assert_eq!(lhs.0 as u64, ab % 101);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(ToyGroup::new(8190, 3), Err(CryptoError::ToyModulus(8190)));
        assert_eq!(ToyGroup::new(8191, 0), Err(CryptoError::ToyGenerator(0)));
        assert!(ToyGroup::new(8191, 8191).is_err());
    }

    #[test]
    fn decode_rejects_out_of_range() {
        let g = ToyGroup::default();
        assert!(g.decode_element(&8191u16.to_be_bytes()).is_err());
        assert!(g.decode_scalar(&0u16.to_be_bytes()).is_err());
        assert_eq!(g.decode_element(&[0x1f, 0xfe]).unwrap(), ToyElement(8190));
    }
}
