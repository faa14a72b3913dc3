use rand::RngCore;

use crate::backend::AlertDecision;
use crate::crypto::{xor_block, PairingGroup, BLOCK_LEN};
use crate::protocol::params::key_for;
use crate::protocol::vehicle::{h2, h4};
use crate::protocol::{
    auth_finalize, auth_request, auth_respond, make_final_report, AuthResponse, Identity,
    MessageKind, RegistrationKey, RsuCredential, Timestamp, VehicleCredential,
};

use super::{AdversaryContext, AttackOutcome, Captured, HonestRun, Rejection, Testbed};

/// An unregistered attacker claims `fake_id` with a made-up registration
/// key (or `key`, for the control case) and sends M1 to an honest RSU.
pub fn forge_auth_request<G: PairingGroup, R: RngCore + ?Sized>(
    world: &Testbed<G>,
    adv: &AdversaryContext<G>,
    fake_id: Identity,
    key: Option<RegistrationKey>,
    target: &RsuCredential<G>,
    rng: &mut R,
    now: Timestamp,
) -> AttackOutcome {
    let key = key.unwrap_or_else(|| {
        let mut k = [0u8; BLOCK_LEN];
        rng.fill_bytes(&mut k);
        RegistrationKey(k)
    });
    let forged = VehicleCredential { id: fake_id, key };
    let (m1, _) = auth_request(&world.ctx, &adv.params, &forged, &target.id, rng, now);
    match auth_respond(&world.ctx, &world.params, target, &m1, rng, now.plus(1)) {
        Ok(_) => AttackOutcome {
            attack: "forge_auth_request",
            succeeded: true,
            rejection: None,
        },
        Err(e) => AttackOutcome {
            attack: "forge_auth_request",
            succeeded: false,
            rejection: Some(Rejection::protocol("auth_respond", &e)),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InternalForgeOutcome {
    pub outcome: AttackOutcome,
    /// The identity the adversary unmasked from X3 with its key guess.
    pub extracted: Identity,
    pub identity_recovered: bool,
}

/// An adversary sitting in place of RSU `rsu` answers an honest vehicle's M1
/// using its guessed master key.
pub fn internal_forge_response<G: PairingGroup, R: RngCore + ?Sized>(
    world: &Testbed<G>,
    adv: &mut AdversaryContext<G>,
    vehicle: &VehicleCredential,
    rsu: Identity,
    rng: &mut R,
    now: Timestamp,
) -> InternalForgeOutcome {
    let ctx = &world.ctx;
    let (m1, pending) = auth_request(ctx, &world.params, vehicle, &rsu, rng, now);
    adv.capture(Captured::M1(m1.clone()));

    let p = &adv.params;
    let guess = &adv.guessed_msk;
    let x1_guess = ctx.scalar_mul(guess.scalar(), &m1.x1);
    let extracted = Identity(xor_block(&h2(ctx, &m1.x1, &x1_guess, m1.t_ui).0, &m1.x3));
    let key_guess = key_for(ctx, guess, &extracted);
    let r_j = ctx.random_scalar(rng);
    let y1 = ctx.scalar_mul(&r_j, &p.generator);
    let p_pub_guess = ctx.scalar_mul(guess.scalar(), &p.generator);
    let y2 = ctx.pairing(&ctx.scalar_mul(&r_j, &m1.x1), &p_pub_guess);
    let t_rj = now.plus(1);
    let cj = h4(ctx, &extracted, &key_guess.0, &rsu, &y1, &y2, t_rj);
    let forged = AuthResponse { y1, cj, t_rj };
    adv.capture(Captured::M2(forged.clone()));

    let outcome = match auth_finalize(ctx, &world.params, &pending, &forged, t_rj.plus(1)) {
        Ok(_) => AttackOutcome {
            attack: "internal_forge_response",
            succeeded: true,
            rejection: None,
        },
        Err(e) => AttackOutcome {
            attack: "internal_forge_response",
            succeeded: false,
            rejection: Some(Rejection::protocol("auth_finalize", &e)),
        },
    };
    InternalForgeOutcome {
        outcome,
        extracted,
        identity_recovered: extracted == vehicle.id,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub outcome: AttackOutcome,
    /// The target processed the replay without error.
    pub accepted_by_target: bool,
}

fn replay_name(kind: MessageKind) -> &'static str {
    match kind {
        MessageKind::AuthRequest => "replay_m1",
        MessageKind::AuthResponse => "replay_m2",
        MessageKind::InitialReport => "replay_m3",
        MessageKind::FinalReport => "replay_m4",
    }
}

/// Re-delivers one message of `run` to its original recipient `delay_ms`
/// after it was first sent.
///
/// A replay succeeds when it gains the attacker something: a usable session
/// key (M1, M2) or a duplicate report entering the pipeline (M3, M4).
pub fn replay_attack<G: PairingGroup, R: RngCore + ?Sized>(
    world: &Testbed<G>,
    run: &HonestRun<G>,
    kind: MessageKind,
    delay_ms: u64,
    rng: &mut R,
) -> ReplayOutcome {
    let ctx = &world.ctx;
    let p = &world.params;
    let attack = replay_name(kind);
    let idx = MessageKind::ALL
        .iter()
        .position(|k| *k == kind)
        .expect("known kind");
    let at = run.sent_at[idx].plus(delay_ms);
    let (accepted, succeeded, rejection) = match kind {
        MessageKind::AuthRequest => match auth_respond(ctx, p, &run.rsu, &run.m1, rng, at) {
            Ok((m2, session)) => {
                // Without r_i the replayer can only guess the session key.
                let r_guess = ctx.random_scalar(rng);
                let usable = ctx.scalar_mul(&r_guess, &m2.y1) == session.snky;
                (true, usable, None)
            }
            Err(e) => (false, false, Some(Rejection::protocol("auth_respond", &e))),
        },
        MessageKind::AuthResponse => match auth_finalize(ctx, p, &run.pending, &run.m2, at) {
            Ok(_) => (true, false, None),
            Err(e) => (false, false, Some(Rejection::protocol("auth_finalize", &e))),
        },
        MessageKind::InitialReport => {
            match make_final_report(ctx, p, &run.rsu_session, &run.rsu, &run.m3, rng, at) {
                Ok(_) => (true, true, None),
                Err(e) => (
                    false,
                    false,
                    Some(Rejection::protocol("make_final_report", &e)),
                ),
            }
        }
        MessageKind::FinalReport => {
            let mut store = world.store();
            store.ingest(ctx, p, run.m4.clone(), run.sent_at[3]);
            match store.ingest(ctx, p, run.m4.clone(), at) {
                AlertDecision::Rejected(r) => (
                    false,
                    false,
                    Some(Rejection {
                        phase: "ingest_report",
                        kind: r.name(),
                    }),
                ),
                _ => (true, true, None),
            }
        }
    };
    ReplayOutcome {
        outcome: AttackOutcome {
            attack,
            succeeded,
            rejection,
        },
        accepted_by_target: accepted,
    }
}
