use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::backend::AlertDecision;
use crate::crypto::PairingGroup;
use crate::protocol::{
    auth_finalize, auth_respond, make_final_report, AuthRequest, AuthResponse, FinalReport,
    InitialReport, MessageKind, SizingProfile, WireMessage,
};

use super::{HonestRun, Rejection, Testbed};

/// One flipped bit and what the recipient made of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TamperTrial {
    pub kind: MessageKind,
    pub byte: usize,
    pub bit: u8,
    pub field: &'static str,
    /// `None` when the tampered message was accepted.
    pub rejection: Option<Rejection>,
}

impl TamperTrial {
    pub fn accepted(&self) -> bool {
        self.rejection.is_none()
    }
}

/// Flips every bit after the tag byte of `kind`'s wire encoding, one at a
/// time, and delivers each variant to the honest recipient at the original
/// receive time.
pub fn tamper_fuzz<G: PairingGroup>(
    world: &Testbed<G>,
    run: &HonestRun<G>,
    kind: MessageKind,
) -> Vec<TamperTrial> {
    let group = &world.params.group;
    let wire = match kind {
        MessageKind::AuthRequest => run.m1.to_wire(group),
        MessageKind::AuthResponse => run.m2.to_wire(group),
        MessageKind::InitialReport => WireMessage::<G>::to_wire(&run.m3, group),
        MessageKind::FinalReport => run.m4.to_wire(group),
    };
    let ranges = SizingProfile::wire(group).field_ranges(kind);
    let positions: Vec<(usize, u8)> = (1..wire.len())
        .flat_map(|byte| (0..8u8).map(move |bit| (byte, bit)))
        .collect();
    positions
        .into_par_iter()
        .map(|(byte, bit)| {
            let mut bytes = wire.clone();
            bytes[byte] ^= 1 << bit;
            let field = ranges
                .iter()
                .find(|(_, r)| r.contains(&byte))
                .map(|(f, _)| f.name)
                .expect("fields cover the payload");
            // Per-flip generator so results do not depend on scheduling.
            let mut rng = ChaCha20Rng::seed_from_u64(((byte as u64) << 3) | bit as u64);
            TamperTrial {
                kind,
                byte,
                bit,
                field,
                rejection: deliver(world, run, kind, &bytes, &mut rng),
            }
        })
        .collect()
}

fn deliver<G: PairingGroup>(
    world: &Testbed<G>,
    run: &HonestRun<G>,
    kind: MessageKind,
    bytes: &[u8],
    rng: &mut ChaCha20Rng,
) -> Option<Rejection> {
    let ctx = &world.ctx;
    let p = &world.params;
    let g = &p.group;
    let malformed = |phase| Rejection {
        phase,
        kind: "malformed",
    };
    match kind {
        MessageKind::AuthRequest => {
            let at = run.sent_at[1];
            let m1 = match AuthRequest::from_wire(g, bytes, at) {
                Ok(m) => m,
                Err(_) => return Some(malformed("auth_respond")),
            };
            auth_respond(ctx, p, &run.rsu, &m1, rng, at)
                .err()
                .map(|e| Rejection::protocol("auth_respond", &e))
        }
        MessageKind::AuthResponse => {
            let at = run.sent_at[2];
            let m2 = match AuthResponse::from_wire(g, bytes, at) {
                Ok(m) => m,
                Err(_) => return Some(malformed("auth_finalize")),
            };
            auth_finalize(ctx, p, &run.pending, &m2, at)
                .err()
                .map(|e| Rejection::protocol("auth_finalize", &e))
        }
        MessageKind::InitialReport => {
            let at = run.sent_at[3];
            let m3 = match <InitialReport as WireMessage<G>>::from_wire(g, bytes, at) {
                Ok(m) => m,
                Err(_) => return Some(malformed("make_final_report")),
            };
            make_final_report(ctx, p, &run.rsu_session, &run.rsu, &m3, rng, at)
                .err()
                .map(|e| Rejection::protocol("make_final_report", &e))
        }
        MessageKind::FinalReport => {
            let at = run.sent_at[3].plus(1);
            let m4 = match FinalReport::from_wire(g, bytes, at) {
                Ok(m) => m,
                Err(_) => return Some(malformed("ingest_report")),
            };
            match world.store().ingest(ctx, p, m4, at) {
                AlertDecision::Rejected(r) => Some(Rejection {
                    phase: "ingest_report",
                    kind: r.name(),
                }),
                _ => None,
            }
        }
    }
}
