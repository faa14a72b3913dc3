use thiserror::Error;

use crate::crypto::CryptoError;

use super::messages::WireError;
use super::types::Identity;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("message is {age_ms} ms old, freshness window is {window_ms} ms")]
    FreshnessViolation { age_ms: u64, window_ms: u64 },
    #[error("authentication request rejected")]
    AuthRequestInvalid,
    #[error("authentication response rejected")]
    AuthResponseInvalid,
    #[error("initial report rejected: {0}")]
    InitialReportInvalid(&'static str),
    #[error("no established session")]
    NotAuthenticated,
    #[error("no pending authentication with {0}")]
    NoPendingAuth(Identity),
    #[error("pending authentication with {0} expired")]
    PendingExpired(Identity),
    #[error("identity of {0} bytes is not valid")]
    IdentityLength(usize),
    #[error("invalid road condition info: {0}")]
    InvalidInfo(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("unknown security profile `{0}`")]
    UnknownProfile(String),
    #[error(transparent)]
    Wire(#[from] WireError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

impl ProtocolError {
    /// Stable short name used in logs and CSV output.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::FreshnessViolation { .. } => "freshness",
            Self::AuthRequestInvalid => "auth_request_invalid",
            Self::AuthResponseInvalid => "auth_response_invalid",
            Self::InitialReportInvalid(_) => "initial_report_invalid",
            Self::NotAuthenticated => "not_authenticated",
            Self::NoPendingAuth(_) => "no_pending_auth",
            Self::PendingExpired(_) => "pending_expired",
            Self::IdentityLength(_) => "identity_length",
            Self::InvalidInfo(_) => "invalid_info",
            Self::InvalidParams(_) => "invalid_params",
            Self::UnknownProfile(_) => "unknown_profile",
            Self::Wire(_) => "malformed",
            Self::Crypto(_) => "crypto",
        }
    }
}
