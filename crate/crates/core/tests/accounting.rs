use rcm_core::accounting::{account_overheads, Phase};
use rcm_core::crypto::OpCounts;
use rcm_core::protocol::messages::FieldKind;
use rcm_core::protocol::{MessageKind, SizingProfile};

fn nominal_width(kind: FieldKind) -> usize {
    match kind {
        FieldKind::Element => 128,
        FieldKind::Block => 20,
        FieldKind::Timestamp => 4,
    }
}

#[test]
fn byte_totals_are_field_sums() {
    let report = account_overheads(SizingProfile::NOMINAL, 3);
    let sum = |k: MessageKind| -> usize { k.fields().iter().map(|f| nominal_width(f.kind)).sum() };
    let m1 = sum(MessageKind::AuthRequest);
    let m2 = sum(MessageKind::AuthResponse);
    let m3 = sum(MessageKind::InitialReport);
    let m4 = sum(MessageKind::FinalReport);
    assert_eq!((m2, m3), (152, 44));

    let v = report
        .record(Phase::MutualAuthentication, "vehicle")
        .unwrap();
    assert_eq!((v.transmitted_bytes, v.received_bytes), (m1, m2));
    let r = report.record(Phase::MutualAuthentication, "rsu").unwrap();
    assert_eq!((r.transmitted_bytes, r.received_bytes), (m2, m1));
    let vr = report.record(Phase::ReportGeneration, "vehicle").unwrap();
    assert_eq!(vr.transmitted_bytes, m3);
    let rr = report.record(Phase::ReportGeneration, "rsu").unwrap();
    assert_eq!((rr.transmitted_bytes, rr.received_bytes), (m4, m3));
    let cs = report.record(Phase::ReportProcessing, "cs").unwrap();
    assert_eq!(cs.stored_bytes, 4 * m4);
}

#[test]
fn measured_counters() {
    for n in [0usize, 1, 5] {
        let report = account_overheads(SizingProfile::NOMINAL, n);
        let get = |p, e| report.record(p, e).unwrap().ops;
        assert_eq!(
            get(Phase::VehicleRegistration, "ta"),
            OpCounts::new(0, 0, 0, 1)
        );
        assert_eq!(
            get(Phase::MutualAuthentication, "vehicle"),
            OpCounts::new(3, 1, 0, 3)
        );
        assert_eq!(
            get(Phase::MutualAuthentication, "rsu"),
            OpCounts::new(3, 1, 0, 4)
        );
        assert_eq!(
            get(Phase::ReportGeneration, "vehicle"),
            OpCounts::new(0, 0, 0, 1)
        );
        assert_eq!(
            get(Phase::ReportGeneration, "rsu"),
            OpCounts::new(2, 0, 0, 6)
        );
        assert_eq!(
            get(Phase::ReportProcessing, "cs"),
            OpCounts::new(0, 2 * n as u64, 0, 1)
        );
        assert_eq!(
            get(Phase::ReportProcessing, "aa"),
            OpCounts::new(0, 2, 0, 4)
        );
    }
}

#[test]
fn divergences_are_reported() {
    let report = account_overheads(SizingProfile::NOMINAL, 2);
    let ops: Vec<_> = report
        .divergences()
        .into_iter()
        .filter(|d| d.2 == "ops")
        .map(|d| (d.0, d.1))
        .collect();
    assert_eq!(
        ops,
        vec![
            (Phase::MutualAuthentication, "vehicle"),
            (Phase::ReportProcessing, "aa")
        ]
    );
    let m1 = SizingProfile::NOMINAL.payload_bytes(MessageKind::AuthRequest);
    let m4 = SizingProfile::NOMINAL.payload_bytes(MessageKind::FinalReport);
    assert_eq!((m1, m4), (172, 324));
    for (phase, entity, what) in report.divergences() {
        if what == "transmitted" || what == "received" {
            let r = report.record(phase, entity).unwrap();
            let bytes = if what == "transmitted" {
                r.transmitted_bytes
            } else {
                r.received_bytes
            };
            assert!(bytes == m1 || bytes == m4, "{phase:?} {entity} {what}");
        }
    }
    for (phase, entity) in [
        (Phase::MutualAuthentication, "rsu"),
        (Phase::ReportGeneration, "vehicle"),
        (Phase::ReportGeneration, "rsu"),
        (Phase::ReportProcessing, "cs"),
    ] {
        assert!(
            report.record(phase, entity).unwrap().ops_match(),
            "{phase:?} {entity}"
        );
    }

    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("phase,entity,t_m,t_bp,t_e,t_h,folded_ops,reference_ops"));
    assert_eq!(text.lines().count(), 1 + report.records.len());
    assert!(text.contains("mutual_authentication,vehicle,3,1,0,3,4T_M + 3T_H,3T_M + 3T_H"));
    assert!(text.contains("divergent:ops"));
}

#[test]
fn wire_profile_prices_actual_encodings() {
    let wire = SizingProfile::wire(&rcm_core::crypto::Bls12Dual);
    let report = account_overheads(wire, 1);
    let v = report
        .record(Phase::MutualAuthentication, "vehicle")
        .unwrap();
    assert_eq!(v.transmitted_bytes, 144 + 20 + 20 + 4);
}
