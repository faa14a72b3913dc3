use rand::RngCore;

use crate::backend::{ApplicationAuthority, EquivalenceStore, StoreConfig};
use crate::crypto::{CryptoContext, PairingGroup};
use crate::protocol::{
    auth_finalize, auth_request, auth_respond, make_final_report, make_initial_report, setup,
    AuthRequest, AuthResponse, FinalReport, Identity, InitialReport, PendingAuth, ProtocolError,
    PublicParams, RecoveredReport, RoadConditionInfo, RsuCredential, SessionState, Timestamp,
    TrustedAuthority, VehicleCredential,
};

use super::AdversaryContext;

/// The honest world an attack runs against. Holds the real keys, which an
/// [`AdversaryContext`] never sees.
#[derive(Debug, Clone)]
pub struct Testbed<G: PairingGroup> {
    pub ctx: CryptoContext<G>,
    pub params: PublicParams<G>,
    pub ta: TrustedAuthority<G>,
    pub aa: ApplicationAuthority<G>,
}

/// Everything produced by one honest M1 to M4 exchange.
#[derive(Debug, Clone)]
pub struct HonestRun<G: PairingGroup> {
    pub vehicle: VehicleCredential,
    pub rsu: RsuCredential<G>,
    pub pending: PendingAuth<G>,
    pub m1: AuthRequest<G>,
    pub m2: AuthResponse<G>,
    pub m3: InitialReport,
    pub m4: FinalReport<G>,
    pub vehicle_session: SessionState<G>,
    pub rsu_session: SessionState<G>,
    pub recovered: RecoveredReport,
    /// Send time of each message; each step is 1 ms after the previous.
    pub sent_at: [Timestamp; 4],
}

impl<G: PairingGroup> Testbed<G> {
    pub fn new(group: G, tau: u32, delta_t_ms: u64, seed: u64) -> Result<Self, ProtocolError> {
        let ctx = CryptoContext::new(group.clone());
        let (params, msk) = setup(group, tau, delta_t_ms, seed)?;
        Ok(Self {
            ta: TrustedAuthority::new(params.clone(), msk.clone()),
            aa: ApplicationAuthority::new(params.clone(), msk),
            params,
            ctx,
        })
    }

    pub fn vehicle(&self, label: &str) -> VehicleCredential {
        let id = Identity::from_label(label).expect("label fits an identity");
        self.ta.register_vehicle(&self.ctx, id)
    }

    pub fn rsu(&self, label: &str) -> RsuCredential<G> {
        let id = Identity::from_label(label).expect("label fits an identity");
        self.ta.register_rsu(&self.ctx, id)
    }

    pub fn store(&self) -> EquivalenceStore<G> {
        EquivalenceStore::new(StoreConfig::from_params(&self.params))
    }

    /// An adversary that knows only the public parameters and guesses
    /// `msk` at random.
    pub fn adversary<R: RngCore + ?Sized>(&self, rng: &mut R) -> AdversaryContext<G> {
        AdversaryContext::external(self.params.clone(), rng)
    }

    pub fn honest_run<R: RngCore + ?Sized>(
        &self,
        vehicle: &VehicleCredential,
        rsu: &RsuCredential<G>,
        info: &RoadConditionInfo,
        rng: &mut R,
        now: Timestamp,
    ) -> Result<HonestRun<G>, ProtocolError> {
        let ctx = &self.ctx;
        let p = &self.params;
        let sent_at = [now, now.plus(1), now.plus(2), now.plus(3)];
        let (m1, pending) = auth_request(ctx, p, vehicle, &rsu.id, rng, sent_at[0]);
        let (m2, rsu_session) = auth_respond(ctx, p, rsu, &m1, rng, sent_at[1])?;
        let vehicle_session = auth_finalize(ctx, p, &pending, &m2, sent_at[2])?;
        let m3 = make_initial_report(ctx, &vehicle_session, vehicle, info, sent_at[2])?;
        let (m4, recovered) = make_final_report(ctx, p, &rsu_session, rsu, &m3, rng, sent_at[3])?;
        Ok(HonestRun {
            vehicle: *vehicle,
            rsu: rsu.clone(),
            pending,
            m1,
            m2,
            m3,
            m4,
            vehicle_session,
            rsu_session,
            recovered,
            sent_at,
        })
    }
}
