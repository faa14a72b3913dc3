//! Registration, mutual authentication and two-stage report generation.
//!
//! The free functions in [`vehicle`] and [`rsu`] are the individual protocol
//! steps; [`VehicleAgent`] and [`RsuAgent`] keep per-peer state on top of
//! them. Every step takes a [`CryptoContext`](crate::crypto::CryptoContext)
//! so its operations are counted.

mod agent;
mod error;
pub mod messages;
pub(crate) mod params;
pub mod rsu;
mod types;
pub mod vehicle;

use std::fmt;

use crate::crypto::PairingGroup;

pub use agent::{RsuAgent, VehicleAgent};
pub use error::ProtocolError;
pub use messages::{
    AuthRequest, AuthResponse, FinalReport, InitialReport, MessageKind, SizingProfile, WireError,
    WireMessage,
};
pub use params::{
    gen_key, setup, MasterKey, PublicParams, RsuCredential, SecurityProfile, TrustedAuthority,
    VehicleCredential, DEFAULT_DELTA_T_MS,
};
pub use rsu::{
    auth_respond, auth_respond_with_nonce, make_final_report, make_final_report_with_nonce,
    RecoveredReport,
};
pub use types::{GridCell, Identity, RegistrationKey, RoadCondition, RoadConditionInfo, Timestamp};
pub use vehicle::{
    auth_finalize, auth_request, auth_request_with_nonce, make_initial_report, PendingAuth,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Vehicle,
    Rsu,
}

/// An established session with one peer.
#[derive(Clone, PartialEq)]
pub struct SessionState<G: PairingGroup> {
    /// `r_i·r_j·P`.
    pub snky: G::Element,
    pub peer: Identity,
    pub established_at: Timestamp,
    pub role: Role,
}

impl<G: PairingGroup> fmt::Debug for SessionState<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SessionState")
            .field("peer", &self.peer)
            .field("established_at", &self.established_at)
            .field("role", &self.role)
            .finish_non_exhaustive()
    }
}
