//! Cloud-side report clustering and authority-side report opening.

mod authority;
mod snapshot;
mod store;

pub use authority::{ApplicationAuthority, AuthorityError, ExtractedReport};
pub use snapshot::SnapshotError;
pub use store::{
    same_condition, AlertDecision, EquivalenceClass, EquivalenceStore, ForwardPolicy, RejectReason,
    StoreConfig, StoredReport,
};
