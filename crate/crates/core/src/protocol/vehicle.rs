use std::fmt;

use rand::RngCore;

use crate::crypto::{xor_block, Block, CryptoContext, Digest, PairingGroup};

use super::messages::{AuthRequest, AuthResponse, InitialReport};
use super::params::{PublicParams, VehicleCredential};
use super::types::{Identity, RoadConditionInfo, Timestamp};
use super::{ProtocolError, Role, SessionState};

/// Vehicle state between sending M1 and receiving M2.
#[derive(Clone)]
pub struct PendingAuth<G: PairingGroup> {
    pub vehicle: VehicleCredential,
    pub rsu: Identity,
    pub x1: G::Element,
    pub t_ui: Timestamp,
    r_i: G::Scalar,
    x2: G::Element,
}

impl<G: PairingGroup> fmt::Debug for PendingAuth<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PendingAuth")
            .field("vehicle", &self.vehicle.id)
            .field("rsu", &self.rsu)
            .field("t_ui", &self.t_ui)
            .finish_non_exhaustive()
    }
}

pub(crate) fn h2<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    x1: &G::Element,
    x2: &G::Element,
    t: Timestamp,
) -> Digest {
    ctx.h(2, &[&ctx.encode(x1), &ctx.encode(x2), &t.to_be_bytes()])
}

pub(crate) fn h3<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    vehicle: &Identity,
    rsu: &Identity,
    key: &[u8],
    x1: &G::Element,
    x2: &G::Element,
    t: Timestamp,
) -> Digest {
    ctx.h(
        3,
        &[
            vehicle.as_bytes(),
            rsu.as_bytes(),
            key,
            &ctx.encode(x1),
            &ctx.encode(x2),
            &t.to_be_bytes(),
        ],
    )
}

pub(crate) fn h4<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    vehicle: &Identity,
    key: &[u8],
    rsu: &Identity,
    y1: &G::Element,
    y2: &G::Target,
    t: Timestamp,
) -> Digest {
    ctx.h(
        4,
        &[
            vehicle.as_bytes(),
            key,
            rsu.as_bytes(),
            &ctx.encode(y1),
            &ctx.encode_target(y2),
            &t.to_be_bytes(),
        ],
    )
}

pub(crate) fn h5<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    t_hat: Timestamp,
    snky: &G::Element,
    rsu: &Identity,
    q2: &Block,
) -> Digest {
    ctx.h(
        5,
        &[&t_hat.to_be_bytes(), &ctx.encode(snky), rsu.as_bytes(), q2],
    )
}

/// Builds M1 for `rsu` with a fresh `r_i` drawn from `rng`.
pub fn auth_request<G: PairingGroup, R: RngCore + ?Sized>(
    ctx: &CryptoContext<G>,
    params: &PublicParams<G>,
    vehicle: &VehicleCredential,
    rsu: &Identity,
    rng: &mut R,
    now: Timestamp,
) -> (AuthRequest<G>, PendingAuth<G>) {
    let r_i = ctx.random_scalar(rng);
    auth_request_with_nonce(ctx, params, vehicle, rsu, r_i, now)
}

/// [`auth_request`] with a caller-chosen `r_i`.
pub fn auth_request_with_nonce<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    params: &PublicParams<G>,
    vehicle: &VehicleCredential,
    rsu: &Identity,
    r_i: G::Scalar,
    now: Timestamp,
) -> (AuthRequest<G>, PendingAuth<G>) {
    let x1 = ctx.scalar_mul(&r_i, &params.generator);
    let x2 = ctx.scalar_mul(&r_i, &params.p_pub);
    let x3 = xor_block(&h2(ctx, &x1, &x2, now).0, vehicle.id.as_bytes());
    let ci = h3(ctx, &vehicle.id, rsu, &vehicle.key.0, &x1, &x2, now);
    let m1 = AuthRequest {
        x1: x1.clone(),
        x3,
        ci,
        t_ui: now,
    };
    let pending = PendingAuth {
        vehicle: *vehicle,
        rsu: *rsu,
        x1,
        t_ui: now,
        r_i,
        x2,
    };
    (m1, pending)
}

/// Verifies M2 and derives `snky = r_i·Y1`.
pub fn auth_finalize<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    params: &PublicParams<G>,
    pending: &PendingAuth<G>,
    m2: &AuthResponse<G>,
    now: Timestamp,
) -> Result<SessionState<G>, ProtocolError> {
    params.check_fresh(m2.t_rj, now)?;
    let y1_x2 = ctx.pairing(&m2.y1, &pending.x2);
    let expected = h4(
        ctx,
        &pending.vehicle.id,
        &pending.vehicle.key.0,
        &pending.rsu,
        &m2.y1,
        &y1_x2,
        m2.t_rj,
    );
    if expected != m2.cj {
        return Err(ProtocolError::AuthResponseInvalid);
    }
    Ok(SessionState {
        snky: ctx.scalar_mul(&pending.r_i, &m2.y1),
        peer: pending.rsu,
        established_at: now,
        role: Role::Vehicle,
    })
}

/// Masks the vehicle identity and `info` into M3.
pub fn make_initial_report<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    session: &SessionState<G>,
    vehicle: &VehicleCredential,
    info: &RoadConditionInfo,
    now: Timestamp,
) -> Result<InitialReport, ProtocolError> {
    if session.role != Role::Vehicle {
        return Err(ProtocolError::NotAuthenticated);
    }
    let rsu = &session.peer;
    let q2 = xor_block(&xor_block(rsu.as_bytes(), &info.to_block()), &vehicle.key.0);
    // Q2 feeds the Q1 mask, so a modified Q2 recovers the wrong identity.
    let q1 = xor_block(
        &h5(ctx, now, &session.snky, rsu, &q2).0,
        vehicle.id.as_bytes(),
    );
    Ok(InitialReport {
        q1,
        q2,
        t_hat_ui: now,
    })
}
