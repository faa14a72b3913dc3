use std::collections::BTreeMap;

use rand::RngCore;

use crate::crypto::{CryptoContext, PairingGroup};

use super::messages::{AuthRequest, AuthResponse, FinalReport, InitialReport};
use super::params::{PublicParams, RsuCredential, VehicleCredential};
use super::rsu::{auth_respond, make_final_report, RecoveredReport};
use super::types::{Identity, RoadConditionInfo, Timestamp};
use super::vehicle::{auth_finalize, auth_request, make_initial_report, PendingAuth};
use super::{ProtocolError, SessionState};

/// A vehicle's handshakes and sessions, keyed by RSU identity.
///
/// At most one pending handshake and one session exist per RSU; starting a
/// new handshake discards both.
#[derive(Debug, Clone)]
pub struct VehicleAgent<G: PairingGroup> {
    cred: VehicleCredential,
    pending_timeout_ms: u64,
    pending: BTreeMap<Identity, PendingAuth<G>>,
    sessions: BTreeMap<Identity, SessionState<G>>,
}

impl<G: PairingGroup> VehicleAgent<G> {
    /// Pending handshakes expire after twice the freshness window.
    pub fn new(cred: VehicleCredential, params: &PublicParams<G>) -> Self {
        Self::with_pending_timeout(cred, 2 * params.delta_t_ms)
    }

    pub fn with_pending_timeout(cred: VehicleCredential, pending_timeout_ms: u64) -> Self {
        Self {
            cred,
            pending_timeout_ms,
            pending: BTreeMap::new(),
            sessions: BTreeMap::new(),
        }
    }

    pub fn credential(&self) -> &VehicleCredential {
        &self.cred
    }

    pub fn session(&self, rsu: &Identity) -> Option<&SessionState<G>> {
        self.sessions.get(rsu)
    }

    pub fn has_pending(&self, rsu: &Identity) -> bool {
        self.pending.contains_key(rsu)
    }

    pub fn start_auth<R: RngCore + ?Sized>(
        &mut self,
        ctx: &CryptoContext<G>,
        params: &PublicParams<G>,
        rsu: Identity,
        rng: &mut R,
        now: Timestamp,
    ) -> AuthRequest<G> {
        self.sessions.remove(&rsu);
        let (m1, pending) = auth_request(ctx, params, &self.cred, &rsu, rng, now);
        self.pending.insert(rsu, pending);
        m1
    }

    /// Consumes the pending handshake with `rsu`, successful or not.
    pub fn handle_response(
        &mut self,
        ctx: &CryptoContext<G>,
        params: &PublicParams<G>,
        rsu: Identity,
        m2: &AuthResponse<G>,
        now: Timestamp,
    ) -> Result<&SessionState<G>, ProtocolError> {
        let pending = self
            .pending
            .remove(&rsu)
            .ok_or(ProtocolError::NoPendingAuth(rsu))?;
        if pending.t_ui.age_at(now) > self.pending_timeout_ms {
            return Err(ProtocolError::PendingExpired(rsu));
        }
        let session = auth_finalize(ctx, params, &pending, m2, now)?;
        Ok(self.sessions.entry(rsu).insert_entry(session).into_mut())
    }

    pub fn report(
        &self,
        ctx: &CryptoContext<G>,
        rsu: &Identity,
        info: &RoadConditionInfo,
        now: Timestamp,
    ) -> Result<InitialReport, ProtocolError> {
        let session = self
            .sessions
            .get(rsu)
            .ok_or(ProtocolError::NotAuthenticated)?;
        make_initial_report(ctx, session, &self.cred, info, now)
    }

    /// Drops the session with `rsu` but lets a pending handshake complete.
    pub fn end_session(&mut self, rsu: &Identity) {
        self.sessions.remove(rsu);
    }

    /// Forgets all state held for `rsu`.
    pub fn leave(&mut self, rsu: &Identity) {
        self.pending.remove(rsu);
        self.sessions.remove(rsu);
    }

    /// Drops pending handshakes older than the timeout; returns how many.
    pub fn expire_pending(&mut self, now: Timestamp) -> usize {
        let before = self.pending.len();
        let timeout = self.pending_timeout_ms;
        self.pending.retain(|_, p| p.t_ui.age_at(now) <= timeout);
        before - self.pending.len()
    }
}

/// An RSU's sessions, keyed by an opaque link handle for each vehicle.
#[derive(Debug, Clone)]
pub struct RsuAgent<G: PairingGroup> {
    cred: RsuCredential<G>,
    sessions: BTreeMap<u64, SessionState<G>>,
}

impl<G: PairingGroup> RsuAgent<G> {
    pub fn new(cred: RsuCredential<G>) -> Self {
        Self {
            cred,
            sessions: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> Identity {
        self.cred.id
    }

    pub fn credential(&self) -> &RsuCredential<G> {
        &self.cred
    }

    pub fn session(&self, link: u64) -> Option<&SessionState<G>> {
        self.sessions.get(&link)
    }

    /// Any existing session on `link` is dropped before verification.
    pub fn handle_request<R: RngCore + ?Sized>(
        &mut self,
        ctx: &CryptoContext<G>,
        params: &PublicParams<G>,
        link: u64,
        m1: &AuthRequest<G>,
        rng: &mut R,
        now: Timestamp,
    ) -> Result<AuthResponse<G>, ProtocolError> {
        self.sessions.remove(&link);
        let (m2, session) = auth_respond(ctx, params, &self.cred, m1, rng, now)?;
        self.sessions.insert(link, session);
        Ok(m2)
    }

    pub fn handle_report<R: RngCore + ?Sized>(
        &self,
        ctx: &CryptoContext<G>,
        params: &PublicParams<G>,
        link: u64,
        m3: &InitialReport,
        rng: &mut R,
        now: Timestamp,
    ) -> Result<(FinalReport<G>, RecoveredReport), ProtocolError> {
        let session = self
            .sessions
            .get(&link)
            .ok_or(ProtocolError::NotAuthenticated)?;
        make_final_report(ctx, params, session, &self.cred, m3, rng, now)
    }

    pub fn drop_link(&mut self, link: u64) {
        self.sessions.remove(&link);
    }

    pub fn session_count(&self) -> usize {
        self.sessions.len()
    }
}
