use std::sync::LazyLock;

use bls12_381::{
    multi_miller_loop, pairing, G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt,
    Scalar,
};
use ff::Field;
use group::{Curve, Wnaf};
use rand::RngCore;

use super::{CryptoError, PairingGroup};

const G1_LEN: usize = 48;
const G2_LEN: usize = 96;

/// Order of the BLS12-381 prime-order subgroups.
const ORDER_HEX: &str = "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";

static G2_GENERATOR_PREPARED: LazyLock<G2Prepared> =
    LazyLock::new(|| G2Prepared::from(G2Affine::generator()));

/// BLS12-381 used as a symmetric pairing group.
///
/// An element with discrete log `a` is stored as `(a·g1, a·g2)`. Every element
/// the protocol creates is a scalar multiple of the generator, so both halves
/// always share a discrete log and `e(A, B) = e(A.g1, B.g2)` is symmetric.
/// Decoding enforces that invariant with one pairing-product check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Bls12Dual;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualPoint {
    g1: G1Projective,
    g2: G2Projective,
}

impl DualPoint {
    fn from_scalar(k: &Scalar) -> Self {
        Self::wnaf_mul(k, G1Projective::generator(), G2Projective::generator())
    }

    // Window-4 NAF; variable time in the scalar.
    fn wnaf_mul(k: &Scalar, g1: G1Projective, g2: G2Projective) -> Self {
        let mut w1 = Wnaf::new();
        let mut w2 = Wnaf::new();
        Self {
            g1: w1.scalar(k).base(g1),
            g2: w2.scalar(k).base(g2),
        }
    }
}

impl PairingGroup for Bls12Dual {
    type Scalar = Scalar;
    type Element = DualPoint;
    type Target = Gt;

    fn group_id(&self) -> String {
        "bls12-381-dual".to_string()
    }

    fn order_be_bytes(&self) -> Vec<u8> {
        hex::decode(ORDER_HEX).expect("constant is valid hex")
    }

    fn element_len(&self) -> usize {
        G1_LEN + G2_LEN
    }

    fn scalar_len(&self) -> usize {
        32
    }

    fn generator(&self) -> DualPoint {
        DualPoint {
            g1: G1Projective::generator(),
            g2: G2Projective::generator(),
        }
    }

    fn identity(&self) -> DualPoint {
        DualPoint {
            g1: G1Projective::identity(),
            g2: G2Projective::identity(),
        }
    }

    fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        loop {
            let mut wide = [0u8; 64];
            rng.fill_bytes(&mut wide);
            let k = Scalar::from_bytes_wide(&wide);
            if !bool::from(k.is_zero()) {
                return k;
            }
        }
    }

    fn scalar_from_u64(&self, v: u64) -> Option<Scalar> {
        (v != 0).then(|| Scalar::from(v))
    }

    fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Option<Scalar> {
        let s = a + b;
        (!bool::from(s.is_zero())).then_some(s)
    }

    fn scalar_neg(&self, a: &Scalar) -> Scalar {
        -a
    }

    fn mul(&self, k: &Scalar, a: &DualPoint) -> DualPoint {
        DualPoint::wnaf_mul(k, a.g1, a.g2)
    }

    fn add(&self, a: &DualPoint, b: &DualPoint) -> DualPoint {
        DualPoint {
            g1: a.g1 + b.g1,
            g2: a.g2 + b.g2,
        }
    }

    fn neg(&self, a: &DualPoint) -> DualPoint {
        DualPoint {
            g1: -a.g1,
            g2: -a.g2,
        }
    }

    fn pair(&self, a: &DualPoint, b: &DualPoint) -> Gt {
        pairing(&a.g1.to_affine(), &b.g2.to_affine())
    }

    fn target_pow(&self, t: &Gt, k: &Scalar) -> Gt {
        t * k
    }

    fn pairing_eq(&self, a: &DualPoint, b: &DualPoint, c: &DualPoint, d: &DualPoint) -> bool {
        // e(a, b) · e(-c, d) == 1 with a single final exponentiation.
        let a1 = a.g1.to_affine();
        let c1 = (-c.g1).to_affine();
        let b2 = G2Prepared::from(b.g2.to_affine());
        let d2 = G2Prepared::from(d.g2.to_affine());
        let product = multi_miller_loop(&[(&a1, &b2), (&c1, &d2)]).final_exponentiation();
        product == Gt::identity()
    }

    fn hash_to_element(&self, wide: &[u8; 64]) -> DualPoint {
        let mut h = Scalar::from_bytes_wide(wide);
        if bool::from(h.is_zero()) {
            h = Scalar::ONE;
        }
        DualPoint::from_scalar(&h)
    }

    fn encode_element(&self, a: &DualPoint) -> Vec<u8> {
        let mut out = Vec::with_capacity(G1_LEN + G2_LEN);
        out.extend_from_slice(&a.g1.to_affine().to_compressed());
        out.extend_from_slice(&a.g2.to_affine().to_compressed());
        out
    }

    fn decode_element(&self, bytes: &[u8]) -> Result<DualPoint, CryptoError> {
        if bytes.len() != G1_LEN + G2_LEN {
            return Err(CryptoError::InvalidElement);
        }
        let (b1, b2) = bytes.split_at(G1_LEN);
        let g1 = Option::<G1Affine>::from(G1Affine::from_compressed(
            b1.try_into().expect("split at G1_LEN"),
        ))
        .ok_or(CryptoError::InvalidElement)?;
        let g2 = Option::<G2Affine>::from(G2Affine::from_compressed(
            b2.try_into().expect("remaining G2_LEN bytes"),
        ))
        .ok_or(CryptoError::InvalidElement)?;

        // Both halves must carry the same discrete log:
        // e(g1_part, G2) == e(G1, g2_part).
        let neg_gen = (-G1Projective::generator()).to_affine();
        let g2_prepared = G2Prepared::from(g2);
        let check = multi_miller_loop(&[(&g1, &G2_GENERATOR_PREPARED), (&neg_gen, &g2_prepared)])
            .final_exponentiation();
        if check != Gt::identity() {
            return Err(CryptoError::InvalidElement);
        }
        Ok(DualPoint {
            g1: g1.into(),
            g2: g2.into(),
        })
    }

    fn encode_scalar(&self, k: &Scalar) -> Vec<u8> {
        let mut be = k.to_bytes();
        be.reverse();
        be.to_vec()
    }

    fn decode_scalar(&self, bytes: &[u8]) -> Result<Scalar, CryptoError> {
        let mut le: [u8; 32] = bytes.try_into().map_err(|_| CryptoError::InvalidScalar)?;
        le.reverse();
        let k =
            Option::<Scalar>::from(Scalar::from_bytes(&le)).ok_or(CryptoError::InvalidScalar)?;
        if bool::from(k.is_zero()) {
            return Err(CryptoError::InvalidScalar);
        }
        Ok(k)
    }

    fn encode_target(&self, t: &Gt) -> Vec<u8> {
        // The Debug form prints every Fp coefficient in canonical big-endian
        // hex, which makes it a stable (if verbose) byte encoding.
        format!("{t:?}").into_bytes()
    }
}
