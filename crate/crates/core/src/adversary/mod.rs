//! Executable attacks against the protocol and the statistics around them.
//!
//! Attacks run against a [`Testbed`], the honest world with real keys. The
//! attacker's own knowledge is confined to an [`AdversaryContext`], which has
//! no field for the master key or any registration key.

mod attacks;
mod crack;
mod suite;
mod tamper;
mod testbed;
mod unlink;

use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::crypto::PairingGroup;
use crate::protocol::{
    AuthRequest, AuthResponse, FinalReport, Identity, InitialReport, MasterKey, ProtocolError,
    PublicParams,
};

pub use attacks::{
    forge_auth_request, internal_forge_response, replay_attack, InternalForgeOutcome, ReplayOutcome,
};
pub use crack::{crack_probability, crack_probability_exact};
pub use suite::{run_attack_suite, write_summary_csv, AttackSummary, SuiteConfig};
pub use tamper::{tamper_fuzz, TamperTrial};
pub use testbed::{HonestRun, Testbed};
pub use unlink::{unlinkability_experiment, NonceSource, UnlinkabilityResult, MIN_TRIALS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdversaryError {
    #[error("token length must be at least 1 bit")]
    ZeroBits,
    #[error("at least {min} trials are required, got {got}")]
    TooFewTrials { min: usize, got: usize },
    #[error("honest setup failed: {0}")]
    Setup(#[from] ProtocolError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    External,
    /// Controls an RSU's message flow but holds none of its keys.
    Internal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Captured<G: PairingGroup> {
    M1(AuthRequest<G>),
    M2(AuthResponse<G>),
    M3(InitialReport),
    M4(FinalReport<G>),
}

/// What an attacker knows: public parameters, captured traffic and its own
/// guess at the master key.
#[derive(Debug, Clone)]
pub struct AdversaryContext<G: PairingGroup> {
    pub kind: AdversaryKind,
    pub params: PublicParams<G>,
    pub captured: Vec<Captured<G>>,
    pub controlled_rsu: Option<Identity>,
    pub guessed_msk: MasterKey<G>,
}

impl<G: PairingGroup> AdversaryContext<G> {
    pub fn external<R: RngCore + ?Sized>(params: PublicParams<G>, rng: &mut R) -> Self {
        let guessed_msk = MasterKey::from_scalar(params.group.random_scalar(rng));
        Self {
            kind: AdversaryKind::External,
            params,
            captured: Vec::new(),
            controlled_rsu: None,
            guessed_msk,
        }
    }

    pub fn internal<R: RngCore + ?Sized>(
        params: PublicParams<G>,
        rsu: Identity,
        rng: &mut R,
    ) -> Self {
        Self {
            kind: AdversaryKind::Internal,
            controlled_rsu: Some(rsu),
            ..Self::external(params, rng)
        }
    }

    /// Replaces the key guess. Supplying the real key gives the control case.
    pub fn with_guess(mut self, msk: MasterKey<G>) -> Self {
        self.guessed_msk = msk;
        self
    }

    pub fn capture(&mut self, message: Captured<G>) {
        self.captured.push(message);
    }
}

/// Where and why a message was refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rejection {
    pub phase: &'static str,
    pub kind: &'static str,
}

impl Rejection {
    pub(crate) fn protocol(phase: &'static str, e: &ProtocolError) -> Self {
        Self {
            phase,
            kind: e.kind(),
        }
    }
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.phase, self.kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttackOutcome {
    pub attack: &'static str,
    pub succeeded: bool,
    pub rejection: Option<Rejection>,
}
