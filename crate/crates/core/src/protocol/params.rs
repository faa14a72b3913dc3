use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::crypto::{CryptoContext, PairingGroup};

use super::types::{Identity, RegistrationKey, Timestamp};
use super::ProtocolError;

/// Default freshness window in milliseconds.
pub const DEFAULT_DELTA_T_MS: u64 = 300;

/// Published system parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicParams<G: PairingGroup> {
    pub group: G,
    pub generator: G::Element,
    pub p_pub: G::Element,
    /// Alert threshold: a class alerts once it holds more than `tau` reports.
    pub tau: u32,
    pub delta_t_ms: u64,
}

impl<G: PairingGroup> PublicParams<G> {
    pub fn new(
        group: G,
        p_pub: G::Element,
        tau: u32,
        delta_t_ms: u64,
    ) -> Result<Self, ProtocolError> {
        if tau == 0 {
            return Err(ProtocolError::InvalidParams(
                "tau must be at least 1".into(),
            ));
        }
        if delta_t_ms == 0 {
            return Err(ProtocolError::InvalidParams(
                "delta_t must be positive".into(),
            ));
        }
        Ok(Self {
            generator: group.generator(),
            group,
            p_pub,
            tau,
            delta_t_ms,
        })
    }

    pub fn order_be_bytes(&self) -> Vec<u8> {
        self.group.order_be_bytes()
    }

    pub fn hash_family(&self) -> &'static str {
        "sha256/20 tagged RCM-h1..RCM-h7; h6 group mode via sha512 wide reduction"
    }

    /// Accepts `sent` when `now - sent <= delta_t`.
    pub fn check_fresh(&self, sent: Timestamp, now: Timestamp) -> Result<(), ProtocolError> {
        let age_ms = sent.age_at(now);
        if age_ms > self.delta_t_ms {
            return Err(ProtocolError::FreshnessViolation {
                age_ms,
                window_ms: self.delta_t_ms,
            });
        }
        Ok(())
    }

    /// Canonical byte serialization, stable across runs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let mut put = |b: &[u8]| {
            out.extend_from_slice(&(b.len() as u32).to_be_bytes());
            out.extend_from_slice(b);
        };
        put(self.group.group_id().as_bytes());
        put(&self.order_be_bytes());
        put(&self.group.encode_element(&self.generator));
        put(&self.group.encode_element(&self.p_pub));
        put(self.hash_family().as_bytes());
        put(&self.tau.to_be_bytes());
        put(&self.delta_t_ms.to_be_bytes());
        out
    }
}

/// The master secret `msk`.
#[derive(Clone, PartialEq)]
pub struct MasterKey<G: PairingGroup>(G::Scalar);

impl<G: PairingGroup> MasterKey<G> {
    pub fn from_scalar(k: G::Scalar) -> Self {
        Self(k)
    }

    pub fn scalar(&self) -> &G::Scalar {
        &self.0
    }

    pub fn public_key(&self, group: &G) -> G::Element {
        group.mul(&self.0, &group.generator())
    }
}

impl<G: PairingGroup> fmt::Debug for MasterKey<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MasterKey(..)")
    }
}

/// Named group backends selectable from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SecurityProfile {
    #[serde(rename = "bls12-381")]
    Bls12_381,
    #[serde(rename = "toy")]
    Toy,
}

impl SecurityProfile {
    pub fn name(self) -> &'static str {
        match self {
            Self::Bls12_381 => "bls12-381",
            Self::Toy => "toy",
        }
    }
}

impl FromStr for SecurityProfile {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bls12-381" => Ok(Self::Bls12_381),
            "toy" => Ok(Self::Toy),
            other => Err(ProtocolError::UnknownProfile(other.to_string())),
        }
    }
}

impl fmt::Display for SecurityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Draws `msk` from a generator seeded with `seed` and publishes
/// `P_pub = msk·P`.
pub fn setup<G: PairingGroup>(
    group: G,
    tau: u32,
    delta_t_ms: u64,
    seed: u64,
) -> Result<(PublicParams<G>, MasterKey<G>), ProtocolError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let msk = MasterKey(group.random_scalar(&mut rng));
    let p_pub = msk.public_key(&group);
    let params = PublicParams::new(group, p_pub, tau, delta_t_ms)?;
    Ok((params, msk))
}

/// `h1(msk, id)`.
pub fn gen_key<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    msk: &MasterKey<G>,
    id: &[u8],
) -> Result<RegistrationKey, ProtocolError> {
    let id = Identity::from_bytes(id)?;
    Ok(key_for(ctx, msk, &id))
}

pub(crate) fn key_for<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    msk: &MasterKey<G>,
    id: &Identity,
) -> RegistrationKey {
    let msk_bytes = ctx.encode_scalar(msk.scalar());
    RegistrationKey(ctx.h(1, &[&msk_bytes, id.as_bytes()]).0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VehicleCredential {
    pub id: Identity,
    pub key: RegistrationKey,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RsuCredential<G: PairingGroup> {
    pub id: Identity,
    pub key: RegistrationKey,
    pub msk: MasterKey<G>,
}

/// Registers vehicles and RSUs under one master key.
#[derive(Debug, Clone)]
pub struct TrustedAuthority<G: PairingGroup> {
    params: PublicParams<G>,
    msk: MasterKey<G>,
}

impl<G: PairingGroup> TrustedAuthority<G> {
    pub fn new(params: PublicParams<G>, msk: MasterKey<G>) -> Self {
        Self { params, msk }
    }

    pub fn params(&self) -> &PublicParams<G> {
        &self.params
    }

    pub fn master_key(&self) -> &MasterKey<G> {
        &self.msk
    }

    pub fn register_vehicle(&self, ctx: &CryptoContext<G>, id: Identity) -> VehicleCredential {
        VehicleCredential {
            id,
            key: key_for(ctx, &self.msk, &id),
        }
    }

    pub fn register_rsu(&self, ctx: &CryptoContext<G>, id: Identity) -> RsuCredential<G> {
        RsuCredential {
            id,
            key: key_for(ctx, &self.msk, &id),
            msk: self.msk.clone(),
        }
    }
}
