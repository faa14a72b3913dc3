//! Privacy-preserving road-condition reporting for fog-assisted vehicular
//! networks.
//!
//! - [`crypto`]: pairing-group backends with operation counting.
//! - [`protocol`]: registration, mutual authentication and report generation.
//! - [`backend`]: cloud-side equivalence classes and authority verification.
//! - [`adversary`]: attack harness against the protocol.
//! - [`sim`]: discrete-event simulation of a street with RSUs.
//! - [`accounting`]: per-phase operation and byte totals.

pub mod accounting;
pub mod adversary;
pub mod backend;
pub mod crypto;
pub mod protocol;
pub mod sim;
