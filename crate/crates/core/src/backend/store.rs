use serde::{Deserialize, Serialize};

use crate::crypto::{CryptoContext, PairingGroup};
use crate::protocol::{FinalReport, PublicParams, Timestamp};

/// Which member of an alerting class is forwarded to the authority.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ForwardPolicy {
    /// The report whose insertion triggered the alert.
    #[default]
    Newest,
    /// The first report of the class.
    Representative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoreConfig {
    pub tau: u32,
    /// Alert at most once per class.
    pub dedupe_alerts: bool,
    pub forward: ForwardPolicy,
    /// Classes created longer ago than this are dropped. `None` keeps them.
    pub eviction_horizon_ms: Option<u64>,
}

impl StoreConfig {
    pub const DEFAULT_EVICTION_HORIZON_MS: u64 = 10 * 60 * 1000;

    pub fn new(tau: u32) -> Self {
        Self {
            tau,
            dedupe_alerts: false,
            forward: ForwardPolicy::Newest,
            eviction_horizon_ms: Some(Self::DEFAULT_EVICTION_HORIZON_MS),
        }
    }

    pub fn from_params<G: PairingGroup>(params: &PublicParams<G>) -> Self {
        Self::new(params.tau)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredReport<G: PairingGroup> {
    pub report: FinalReport<G>,
    pub ingested_at: Timestamp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClass<G: PairingGroup> {
    pub id: u64,
    pub members: Vec<StoredReport<G>>,
    pub created_at: Timestamp,
    pub alerted: bool,
}

impl<G: PairingGroup> EquivalenceClass<G> {
    pub fn representative(&self) -> &FinalReport<G> {
        &self.members[0].report
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RejectReason {
    Freshness,
    Invalid,
}

impl RejectReason {
    pub fn name(self) -> &'static str {
        match self {
            Self::Freshness => "freshness",
            Self::Invalid => "invalid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlertDecision<G: PairingGroup> {
    Alert { class: u64, report: FinalReport<G> },
    Stored { class: u64 },
    Rejected(RejectReason),
}

impl<G: PairingGroup> AlertDecision<G> {
    pub fn is_alert(&self) -> bool {
        matches!(self, Self::Alert { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Alert { .. } => "alert",
            Self::Stored { .. } => "stored",
            Self::Rejected(r) => r.name(),
        }
    }
}

/// `e(a.l1, b.l2) == e(b.l1, a.l2)`: both reports carry `s·P` and
/// `s·H` for the same point `H`.
pub fn same_condition<G: PairingGroup>(
    ctx: &CryptoContext<G>,
    a: &FinalReport<G>,
    b: &FinalReport<G>,
) -> bool {
    ctx.pairing_eq(&a.l1, &b.l2, &b.l1, &a.l2)
}

/// Final reports grouped by the condition they attest.
///
/// Ingestion is single-writer; wrap the store in a lock to share it.
#[derive(Debug, Clone)]
pub struct EquivalenceStore<G: PairingGroup> {
    config: StoreConfig,
    classes: Vec<EquivalenceClass<G>>,
    next_id: u64,
}

impl<G: PairingGroup> EquivalenceStore<G> {
    pub fn new(config: StoreConfig) -> Self {
        Self {
            config,
            classes: Vec::new(),
            next_id: 0,
        }
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    /// Classes in creation order.
    pub fn classes(&self) -> &[EquivalenceClass<G>] {
        &self.classes
    }

    pub fn report_count(&self) -> usize {
        self.classes.iter().map(|c| c.len()).sum()
    }

    /// Checks freshness of both timestamps and the `l5` binding, then files
    /// the report into the first matching class or a new one.
    pub fn ingest(
        &mut self,
        ctx: &CryptoContext<G>,
        params: &PublicParams<G>,
        report: FinalReport<G>,
        now: Timestamp,
    ) -> AlertDecision<G> {
        if params.check_fresh(report.t_hat_ui, now).is_err()
            || params.check_fresh(report.t_hat_rj, now).is_err()
        {
            return AlertDecision::Rejected(RejectReason::Freshness);
        }
        self.verify_and_insert(ctx, report, now)
    }

    /// Ingest without the freshness guard, used when restoring snapshots.
    pub(crate) fn verify_and_insert(
        &mut self,
        ctx: &CryptoContext<G>,
        report: FinalReport<G>,
        now: Timestamp,
    ) -> AlertDecision<G> {
        if report.binding(ctx) != report.l5 {
            return AlertDecision::Rejected(RejectReason::Invalid);
        }
        self.evict(now);
        self.insert(ctx, report, now)
    }

    fn insert(
        &mut self,
        ctx: &CryptoContext<G>,
        report: FinalReport<G>,
        now: Timestamp,
    ) -> AlertDecision<G> {
        let found = self
            .classes
            .iter()
            .position(|c| same_condition(ctx, &report, c.representative()));
        let stored = StoredReport {
            report,
            ingested_at: now,
        };
        let Some(idx) = found else {
            let id = self.next_id;
            self.next_id += 1;
            self.classes.push(EquivalenceClass {
                id,
                members: vec![stored],
                created_at: now,
                alerted: false,
            });
            return self.decide(self.classes.len() - 1);
        };
        self.classes[idx].members.push(stored);
        self.decide(idx)
    }

    fn decide(&mut self, idx: usize) -> AlertDecision<G> {
        let tau = self.config.tau as usize;
        let class = &mut self.classes[idx];
        if class.len() <= tau || (self.config.dedupe_alerts && class.alerted) {
            return AlertDecision::Stored { class: class.id };
        }
        class.alerted = true;
        let report = match self.config.forward {
            ForwardPolicy::Newest => class.members.last(),
            ForwardPolicy::Representative => class.members.first(),
        }
        .expect("class is non-empty")
        .report
        .clone();
        AlertDecision::Alert {
            class: class.id,
            report,
        }
    }

    /// Drops classes older than the eviction horizon; returns how many.
    pub fn evict(&mut self, now: Timestamp) -> usize {
        let Some(horizon) = self.config.eviction_horizon_ms else {
            return 0;
        };
        let before = self.classes.len();
        self.classes.retain(|c| c.created_at.age_at(now) <= horizon);
        before - self.classes.len()
    }
}
