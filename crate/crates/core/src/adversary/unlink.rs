use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::crypto::PairingGroup;
use crate::protocol::{auth_request_with_nonce, AuthRequest, Timestamp, VehicleCredential};

use super::{AdversaryError, Testbed};

pub const MIN_TRIALS: usize = 100;

/// How vehicles pick `r_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonceSource {
    Fresh,
    /// Each vehicle reuses one fixed `r_i`. A deliberately broken control.
    ReusedPerVehicle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnlinkabilityResult {
    pub trials: usize,
    pub correct: usize,
    /// `|accuracy - 0.5| * 2`.
    pub advantage: f64,
}

/// Guesses "same vehicle" iff any of `X1`, `X3`, `Ci` coincide.
pub fn fields_linked<G: PairingGroup>(a: &AuthRequest<G>, b: &AuthRequest<G>) -> bool {
    a.x1 == b.x1 || a.x3 == b.x3 || a.ci == b.ci
}

/// Two-RSU linking game. Each trial flips a coin: heads, one vehicle
/// authenticates to both RSUs; tails, two different vehicles do. The
/// distinguisher sees both M1 messages and guesses with [`fields_linked`].
pub fn unlinkability_experiment<G: PairingGroup>(
    world: &Testbed<G>,
    trials: usize,
    seed: u64,
    nonces: NonceSource,
) -> Result<UnlinkabilityResult, AdversaryError> {
    if trials < MIN_TRIALS {
        return Err(AdversaryError::TooFewTrials {
            min: MIN_TRIALS,
            got: trials,
        });
    }
    let a = world.vehicle("unlink-a");
    let b = world.vehicle("unlink-b");
    let rsu_j = world.rsu("unlink-rsu-j").id;
    let rsu_k = world.rsu("unlink-rsu-k").id;
    let fixed_nonce = |v: &VehicleCredential| {
        let mut rng = ChaCha20Rng::from_seed(pad_seed(v.id.as_bytes()));
        world.ctx.random_scalar(&mut rng)
    };

    let correct: usize = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let same = rng.gen_bool(0.5);
            let second = if same { &a } else { &b };
            let now = Timestamp(10_000 + trial as u64);
            let mut request = |v: &VehicleCredential, rsu, t| {
                let r_i = match nonces {
                    NonceSource::Fresh => world.ctx.random_scalar(&mut rng),
                    NonceSource::ReusedPerVehicle => fixed_nonce(v),
                };
                auth_request_with_nonce(&world.ctx, &world.params, v, rsu, r_i, t).0
            };
            let m_j = request(&a, &rsu_j, now);
            let m_k = request(second, &rsu_k, now.plus(5));
            usize::from(fields_linked(&m_j, &m_k) == same)
        })
        .sum();
    let accuracy = correct as f64 / trials as f64;
    Ok(UnlinkabilityResult {
        trials,
        correct,
        advantage: (accuracy - 0.5).abs() * 2.0,
    })
}

fn pad_seed(bytes: &[u8]) -> [u8; 32] {
    let mut seed = [0u8; 32];
    seed[..bytes.len()].copy_from_slice(bytes);
    seed
}
