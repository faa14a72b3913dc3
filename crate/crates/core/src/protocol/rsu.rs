use rand::RngCore;

use crate::crypto::{xor_block, CryptoContext, Digest, PairingGroup};

use super::messages::{AuthRequest, AuthResponse, FinalReport, InitialReport};
use super::params::{key_for, PublicParams, RsuCredential};
use super::types::{Identity, RoadConditionInfo, Timestamp};
use super::vehicle::{h2, h3, h4, h5};
use super::{ProtocolError, Role, SessionState};

/// What the RSU learns from an initial report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecoveredReport {
    pub vehicle: Identity,
    pub info: RoadConditionInfo,
}

/// Verifies M1, recovers the sender's identity and answers with M2.
///
/// `Y2` is computed as `e(r_j·X1, P_pub)`, the same value as
/// `e(X1, P_pub)^{r_j}`, reusing the session key multiplication.
pub fn auth_respond<G: PairingGroup, R: RngCore + ?Sized>(
    ctx: &CryptoContext<G>,
    params: &PublicParams<G>,
    rsu: &RsuCredential<G>,
    m1: &AuthRequest<G>,
    rng: &mut R,
    now: Timestamp,
) -> Result<(AuthResponse<G>, SessionState<G>), ProtocolError> {
    let r_j = ctx.random_scalar(rng);
    auth_respond_with_nonce(ctx, params, rsu, m1, r_j, now)
}

/// [`auth_respond`] with a caller-chosen `r_j`.
pub fn auth_respond_with_nonce<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    params: &PublicParams<G>,
    rsu: &RsuCredential<G>,
    m1: &AuthRequest<G>,
    r_j: G::Scalar,
    now: Timestamp,
) -> Result<(AuthResponse<G>, SessionState<G>), ProtocolError> {
    params.check_fresh(m1.t_ui, now)?;
    let x1_msk = ctx.scalar_mul(rsu.msk.scalar(), &m1.x1);
    let vehicle = Identity(xor_block(&h2(ctx, &m1.x1, &x1_msk, m1.t_ui).0, &m1.x3));
    let vehicle_key = key_for(ctx, &rsu.msk, &vehicle);
    let expected = h3(
        ctx,
        &vehicle,
        &rsu.id,
        &vehicle_key.0,
        &m1.x1,
        &x1_msk,
        m1.t_ui,
    );
    if expected != m1.ci {
        return Err(ProtocolError::AuthRequestInvalid);
    }

    let y1 = ctx.scalar_mul(&r_j, &params.generator);
    let snky = ctx.scalar_mul(&r_j, &m1.x1);
    let y2 = ctx.pairing(&snky, &params.p_pub);
    let cj = h4(ctx, &vehicle, &vehicle_key.0, &rsu.id, &y1, &y2, now);
    let session = SessionState {
        snky,
        peer: vehicle,
        established_at: now,
        role: Role::Rsu,
    };
    Ok((AuthResponse { y1, cj, t_rj: now }, session))
}

/// Unmasks M3 and produces the anonymized final report M4.
///
/// The identity recovered from `Q1` must match the vehicle that
/// authenticated the session.
pub fn make_final_report<G: PairingGroup, R: RngCore + ?Sized>(
    ctx: &CryptoContext<G>,
    params: &PublicParams<G>,
    session: &SessionState<G>,
    rsu: &RsuCredential<G>,
    m3: &InitialReport,
    rng: &mut R,
    now: Timestamp,
) -> Result<(FinalReport<G>, RecoveredReport), ProtocolError> {
    let s = ctx.random_scalar(rng);
    make_final_report_with_nonce(ctx, params, session, rsu, m3, s, now)
}

/// [`make_final_report`] with a caller-chosen `s`.
pub fn make_final_report_with_nonce<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    params: &PublicParams<G>,
    session: &SessionState<G>,
    rsu: &RsuCredential<G>,
    m3: &InitialReport,
    s: G::Scalar,
    now: Timestamp,
) -> Result<(FinalReport<G>, RecoveredReport), ProtocolError> {
    if session.role != Role::Rsu {
        return Err(ProtocolError::NotAuthenticated);
    }
    params.check_fresh(m3.t_hat_ui, now)?;
    let vehicle = Identity(xor_block(
        &h5(ctx, m3.t_hat_ui, &session.snky, &rsu.id, &m3.q2).0,
        &m3.q1,
    ));
    let vehicle_key = key_for(ctx, &rsu.msk, &vehicle);
    if vehicle != session.peer {
        return Err(ProtocolError::InitialReportInvalid(
            "identity does not match session",
        ));
    }
    let info_block = xor_block(&xor_block(&m3.q2, rsu.id.as_bytes()), &vehicle_key.0);
    let info = RoadConditionInfo::from_block(&info_block)
        .map_err(|_| ProtocolError::InitialReportInvalid("malformed road condition info"))?;

    let l1 = ctx.scalar_mul(&s, &params.generator);
    let h6_point = ctx.h6_group(&[rsu.id.as_bytes(), &rsu.key.0, &info_block]);
    let l2 = ctx.scalar_mul(&s, &h6_point);
    // msk·P is the published P_pub.
    let l3 = xor_block(
        &ctx.h(6, &[&ctx.encode(&params.p_pub)]).0,
        rsu.id.as_bytes(),
    );
    let msk_bytes = ctx.encode_scalar(rsu.msk.scalar());
    let l4 = xor_block(&ctx.h(6, &[rsu.id.as_bytes(), &msk_bytes]).0, &info_block);
    let mut report = FinalReport {
        l1,
        l2,
        l3,
        l4,
        l5: Digest([0; 20]),
        t_hat_ui: m3.t_hat_ui,
        t_hat_rj: now,
    };
    report.l5 = report.binding(ctx);
    Ok((report, RecoveredReport { vehicle, info }))
}
