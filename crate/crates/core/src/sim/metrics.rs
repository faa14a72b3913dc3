use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::crypto::OpCounts;

use super::log::{EventKind, EventLog, PacketKind};
use super::scenario::ScenarioError;

/// Abstract cost of one operation of each kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnitCosts {
    pub t_m: f64,
    pub t_bp: f64,
    pub t_e: f64,
    pub t_h: f64,
}

impl Default for UnitCosts {
    /// Pairings priced like scalar multiplications.
    fn default() -> Self {
        Self {
            t_m: 1.0,
            t_bp: 1.0,
            t_e: 1.0,
            t_h: 0.1,
        }
    }
}

impl UnitCosts {
    pub fn cost(&self, ops: &OpCounts) -> f64 {
        self.t_m * ops.scalar_mults as f64
            + self.t_bp * ops.pairings as f64
            + self.t_e * ops.exponentiations as f64
            + self.t_h * ops.hashes as f64
    }

    pub(crate) fn validate(&self) -> Result<(), ScenarioError> {
        for (key, v) in [
            ("costs.t_m", self.t_m),
            ("costs.t_bp", self.t_bp),
            ("costs.t_e", self.t_e),
            ("costs.t_h", self.t_h),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ScenarioError::Invalid {
                    key,
                    reason: format!("must be non-negative, got {v}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubtaskCost {
    pub runs: u64,
    pub ops: OpCounts,
    pub mean_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub packets_sent: u64,
    pub packets_delivered: u64,
    pub packets_dropped: u64,
    pub dropped_by_loss: u64,
    /// `None` when nothing was delivered.
    pub avg_delay_ms: Option<f64>,
    /// `None` when nothing was sent.
    pub pdr: Option<f64>,
    pub auths_completed: u64,
    pub reports_sent: u64,
    pub alerts: u64,
    pub reports_extracted: u64,
    /// Keyed by step name. `vehicle_auth` combines the vehicle's two steps.
    pub subtasks: BTreeMap<String, SubtaskCost>,
    /// Total weighted cost per entity kind.
    pub entity_costs: BTreeMap<String, f64>,
}

/// Subtask names used in protocol-step events.
pub mod steps {
    pub const VEHICLE_AUTH_REQUEST: &str = "vehicle_auth_request";
    pub const VEHICLE_AUTH_FINALIZE: &str = "vehicle_auth_finalize";
    pub const VEHICLE_AUTH: &str = "vehicle_auth";
    pub const RSU_AUTH: &str = "rsu_auth";
    pub const VEHICLE_REPORT: &str = "vehicle_report";
    pub const RSU_REPORT: &str = "rsu_report";
    pub const CS_PROCESS: &str = "cs_process";
    pub const AA_PROCESS: &str = "aa_process";
}

/// Average delay is the summed delay of delivered packets over the number
/// delivered; PDR is delivered over sent.
pub fn compute_metrics(log: &EventLog, costs: &UnitCosts) -> Metrics {
    let mut sent_at = BTreeMap::new();
    let (mut sent, mut delivered, mut dropped, mut lost) = (0u64, 0u64, 0u64, 0u64);
    let mut delay_us: u128 = 0;
    let (mut auths, mut reports, mut alerts, mut extracted) = (0u64, 0u64, 0u64, 0u64);
    let mut subtasks: BTreeMap<String, SubtaskCost> = BTreeMap::new();
    let mut entity_costs: BTreeMap<String, f64> = BTreeMap::new();

    for e in &log.events {
        match e.kind {
            EventKind::Send => {
                sent += 1;
                if let Some(id) = e.packet {
                    sent_at.insert(id, e.time_us);
                }
                match e.message {
                    Some(PacketKind::M3) => reports += 1,
                    Some(PacketKind::Alert) => alerts += 1,
                    _ => {}
                }
            }
            EventKind::Deliver => {
                delivered += 1;
                if let Some(t0) = e.packet.and_then(|id| sent_at.get(&id)) {
                    delay_us += u128::from(e.time_us - t0);
                }
                match e.message {
                    Some(PacketKind::M2) => auths += 1,
                    Some(PacketKind::Alert) => extracted += 1,
                    _ => {}
                }
            }
            EventKind::Drop => {
                dropped += 1;
                lost += u64::from(e.detail == "loss");
            }
            EventKind::ProtocolStep => {
                let s = subtasks.entry(e.detail.clone()).or_insert(SubtaskCost {
                    runs: 0,
                    ops: OpCounts::default(),
                    mean_cost: 0.0,
                });
                s.runs += 1;
                s.ops += e.ops;
                *entity_costs.entry(e.src.entity().to_string()).or_default() += costs.cost(&e.ops);
            }
            EventKind::Beacon => {}
        }
    }
    for s in subtasks.values_mut() {
        s.mean_cost = costs.cost(&s.ops) / s.runs as f64;
    }
    if let (Some(req), Some(fin)) = (
        subtasks.get(steps::VEHICLE_AUTH_REQUEST),
        subtasks.get(steps::VEHICLE_AUTH_FINALIZE),
    ) {
        let combined = SubtaskCost {
            runs: fin.runs,
            ops: req.ops + fin.ops,
            mean_cost: req.mean_cost + fin.mean_cost,
        };
        subtasks.insert(steps::VEHICLE_AUTH.to_string(), combined);
    }

    Metrics {
        packets_sent: sent,
        packets_delivered: delivered,
        packets_dropped: dropped,
        dropped_by_loss: lost,
        avg_delay_ms: (delivered > 0).then(|| delay_us as f64 / delivered as f64 / 1000.0),
        pdr: (sent > 0).then(|| delivered as f64 / sent as f64),
        auths_completed: auths,
        reports_sent: reports,
        alerts,
        reports_extracted: extracted,
        subtasks,
        entity_costs,
    }
}
