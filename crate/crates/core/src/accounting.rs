//! Per-phase, per-entity operation and byte accounting.
//!
//! Operation counts come from running one honest exchange on the BLS12-381
//! backend and reading the context counters. Byte figures are sums of field
//! widths from the message tables under a [`SizingProfile`]. Each record
//! carries the reference figures it is expected to reproduce, where pairings
//! are written as scalar multiplications; mismatches are reported rather
//! than hidden.

use std::fmt::Write as _;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::adversary::Testbed;
use crate::backend::{AlertDecision, EquivalenceStore, StoreConfig};
use crate::crypto::{Bls12Dual, OpCounts};
use crate::protocol::{
    auth_finalize, auth_request, auth_respond, make_final_report, make_initial_report, GridCell,
    Identity, MessageKind, RoadCondition, RoadConditionInfo, SizingProfile, Timestamp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    VehicleRegistration,
    RsuRegistration,
    MutualAuthentication,
    ReportGeneration,
    ReportProcessing,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Self::VehicleRegistration => "vehicle_registration",
            Self::RsuRegistration => "rsu_registration",
            Self::MutualAuthentication => "mutual_authentication",
            Self::ReportGeneration => "report_generation",
            Self::ReportProcessing => "report_processing",
        }
    }
}

/// Expected figures for one record. `None` means the entity does nothing
/// of that kind in the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reference {
    /// Pairings folded into `scalar_mults`.
    pub ops: Option<OpCounts>,
    pub transmitted: Option<usize>,
    pub received: Option<usize>,
    pub stored: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverheadRecord {
    pub phase: Phase,
    pub entity: &'static str,
    pub ops: OpCounts,
    pub transmitted_bytes: usize,
    pub received_bytes: usize,
    /// State the entity keeps after the phase.
    pub stored_bytes: usize,
    pub reference: Reference,
}

impl OverheadRecord {
    /// Counts with pairings written as scalar multiplications.
    pub fn folded_ops(&self) -> OpCounts {
        OpCounts {
            scalar_mults: self.ops.scalar_mults + self.ops.pairings,
            pairings: 0,
            ..self.ops
        }
    }

    pub fn ops_match(&self) -> bool {
        self.folded_ops() == self.reference.ops.unwrap_or_default()
    }

    fn bytes_match(measured: usize, reference: Option<usize>) -> bool {
        measured == reference.unwrap_or(0)
    }

    /// Names of the quantities that differ from the reference.
    pub fn divergences(&self) -> Vec<&'static str> {
        let r = &self.reference;
        let mut out = Vec::new();
        if !self.ops_match() {
            out.push("ops");
        }
        if !Self::bytes_match(self.transmitted_bytes, r.transmitted) {
            out.push("transmitted");
        }
        if !Self::bytes_match(self.received_bytes, r.received) {
            out.push("received");
        }
        if !Self::bytes_match(self.stored_bytes, r.stored) {
            out.push("stored");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverheadReport {
    pub profile: SizingProfile,
    pub n_classes: usize,
    pub records: Vec<OverheadRecord>,
}

impl OverheadReport {
    pub fn record(&self, phase: Phase, entity: &str) -> Option<&OverheadRecord> {
        self.records
            .iter()
            .find(|r| r.phase == phase && r.entity == entity)
    }

    /// `(phase, entity, quantity)` for every mismatch.
    pub fn divergences(&self) -> Vec<(Phase, &'static str, &'static str)> {
        self.records
            .iter()
            .flat_map(|r| {
                r.divergences()
                    .into_iter()
                    .map(move |d| (r.phase, r.entity, d))
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |b| b.to_string());
        for r in &self.records {
            let diverged = r.divergences();
            w.serialize(CsvRow {
                phase: r.phase.name(),
                entity: r.entity,
                t_m: r.ops.scalar_mults,
                t_bp: r.ops.pairings,
                t_e: r.ops.exponentiations,
                t_h: r.ops.hashes,
                folded_ops: notation(&r.folded_ops()),
                reference_ops: r.reference.ops.map_or_else(|| "-".into(), |o| notation(&o)),
                transmitted_bytes: r.transmitted_bytes,
                reference_transmitted: opt(r.reference.transmitted),
                received_bytes: r.received_bytes,
                reference_received: opt(r.reference.received),
                stored_bytes: r.stored_bytes,
                reference_stored: opt(r.reference.stored),
                status: if diverged.is_empty() {
                    "match".to_string()
                } else {
                    format!("divergent:{}", diverged.join("+"))
                },
            })?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct CsvRow {
    phase: &'static str,
    entity: &'static str,
    t_m: u64,
    t_bp: u64,
    t_e: u64,
    t_h: u64,
    folded_ops: String,
    reference_ops: String,
    transmitted_bytes: usize,
    reference_transmitted: String,
    received_bytes: usize,
    reference_received: String,
    stored_bytes: usize,
    reference_stored: String,
    status: String,
}

/// Compact cost notation, e.g. `2T_M + 6T_H`; `-` for no operations.
pub fn notation(ops: &OpCounts) -> String {
    let mut s = String::new();
    for (n, sym) in [
        (ops.scalar_mults, "T_M"),
        (ops.pairings, "T_BP"),
        (ops.exponentiations, "T_E"),
        (ops.hashes, "T_H"),
    ] {
        if n == 0 {
            continue;
        }
        if !s.is_empty() {
            s.push_str(" + ");
        }
        if n > 1 {
            write!(s, "{n}").expect("string write");
        }
        s.push_str(sym);
    }
    if s.is_empty() {
        s.push('-');
    }
    s
}

const fn ops(m: u64, h: u64) -> Option<OpCounts> {
    Some(OpCounts::new(m, 0, 0, h))
}

/// Measures one honest exchange and prices its messages under `profile`.
/// The cloud row scans `n_classes` existing classes before filing the
/// report.
pub fn account_overheads(profile: SizingProfile, n_classes: usize) -> OverheadReport {
    let world = Testbed::new(Bls12Dual, 1, 300, 0x0b5e_55ed).expect("valid parameters");
    let (ctx, params) = (&world.ctx, &world.params);
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let size = |k| profile.payload_bytes(k);
    let (m1b, m2b, m3b, m4b) = (
        size(MessageKind::AuthRequest),
        size(MessageKind::AuthResponse),
        size(MessageKind::InitialReport),
        size(MessageKind::FinalReport),
    );

    let (vehicle, reg_v) = ctx.measure(|c| {
        world.ta.register_vehicle(
            c,
            Identity::from_label("acct-vehicle").expect("short label"),
        )
    });
    let (rsu, reg_r) = ctx.measure(|c| {
        world
            .ta
            .register_rsu(c, Identity::from_label("acct-rsu").expect("short label"))
    });

    let t0 = Timestamp(1_000);
    let ((m1, pending), v_req) =
        ctx.measure(|c| auth_request(c, params, &vehicle, &rsu.id, &mut rng, t0));
    let (resp, r_auth) = ctx.measure(|c| auth_respond(c, params, &rsu, &m1, &mut rng, t0.plus(1)));
    let (m2, rsu_session) = resp.expect("honest request verifies");
    let (fin, v_fin) = ctx.measure(|c| auth_finalize(c, params, &pending, &m2, t0.plus(2)));
    let vehicle_session = fin.expect("honest response verifies");

    let info = RoadConditionInfo::new(RoadCondition::Accident, GridCell { x: 0, y: 0 });
    let (m3, v_rep) =
        ctx.measure(|c| make_initial_report(c, &vehicle_session, &vehicle, &info, t0.plus(3)));
    let m3 = m3.expect("vehicle session");
    let (fr, r_rep) = ctx
        .measure(|c| make_final_report(c, params, &rsu_session, &rsu, &m3, &mut rng, t0.plus(4)));
    let (m4, _) = fr.expect("honest report verifies");

    // Fill the store with classes the measured report matches none of.
    let mut store = EquivalenceStore::new(StoreConfig::new(params.tau));
    for k in 0..n_classes {
        let other = RoadConditionInfo::new(
            RoadCondition::Pothole,
            GridCell {
                x: k as i32 + 1,
                y: 0,
            },
        );
        let m3k = make_initial_report(ctx, &vehicle_session, &vehicle, &other, t0.plus(3))
            .expect("vehicle session");
        let (m4k, _) =
            make_final_report(ctx, params, &rsu_session, &rsu, &m3k, &mut rng, t0.plus(4))
                .expect("honest report verifies");
        let decision = store.ingest(ctx, params, m4k, t0.plus(5));
        debug_assert!(matches!(decision, AlertDecision::Stored { .. }));
    }
    let (decision, cs) = ctx.measure(|c| store.ingest(c, params, m4.clone(), t0.plus(5)));
    debug_assert!(matches!(decision, AlertDecision::Stored { .. }));
    debug_assert_eq!(store.classes().len(), n_classes + 1);
    let (opened, aa) = ctx.measure(|c| world.aa.process_alert(c, &m4));
    debug_assert_eq!(opened.map(|e| e.info), Ok(info));

    let n = n_classes as u64;
    let e = profile.element_bytes;
    let rec = |phase, entity, ops, tx, rx, stored, reference| OverheadRecord {
        phase,
        entity,
        ops,
        transmitted_bytes: tx,
        received_bytes: rx,
        stored_bytes: stored,
        reference,
    };
    let reference = |ops, transmitted, received, stored| Reference {
        ops,
        transmitted,
        received,
        stored,
    };
    let records = vec![
        rec(
            Phase::VehicleRegistration,
            "ta",
            reg_v,
            0,
            0,
            0,
            reference(ops(0, 1), None, None, None),
        ),
        rec(
            Phase::RsuRegistration,
            "ta",
            reg_r,
            0,
            0,
            0,
            reference(ops(0, 1), None, None, None),
        ),
        rec(
            Phase::MutualAuthentication,
            "vehicle",
            v_req + v_fin,
            m1b,
            m2b,
            e,
            reference(ops(3, 3), Some(280), Some(152), Some(20)),
        ),
        rec(
            Phase::MutualAuthentication,
            "rsu",
            r_auth,
            m2b,
            m1b,
            e,
            reference(ops(4, 4), Some(152), Some(280), Some(20)),
        ),
        rec(
            Phase::ReportGeneration,
            "vehicle",
            v_rep,
            m3b,
            0,
            0,
            reference(ops(0, 1), Some(44), None, Some(404)),
        ),
        rec(
            Phase::ReportGeneration,
            "rsu",
            r_rep,
            m4b,
            m3b,
            0,
            reference(ops(2, 6), Some(216), Some(44), Some(128)),
        ),
        rec(
            Phase::ReportGeneration,
            "cs",
            OpCounts::default(),
            0,
            m4b,
            0,
            reference(None, None, Some(216), None),
        ),
        rec(
            Phase::ReportProcessing,
            "cs",
            cs,
            m4b,
            0,
            (n_classes + 1) * m4b,
            reference(ops(2 * n, 1), Some(216), None, Some((n_classes + 1) * 216)),
        ),
        rec(
            Phase::ReportProcessing,
            "aa",
            aa,
            0,
            m4b,
            0,
            reference(ops(2, 3), None, Some(216), None),
        ),
    ];
    OverheadReport {
        profile,
        n_classes,
        records,
    }
}
