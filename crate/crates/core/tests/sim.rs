use std::collections::HashSet;

use rcm_core::protocol::SecurityProfile;
use rcm_core::sim::{
    run, steps, summarize, sweep, EventKind, LossConfig, Node, PacketKind, Scenario, UnitCosts,
};

fn short(vehicles: usize, duration_s: f64) -> Scenario {
    let mut s = Scenario::default();
    s.vehicles.count = vehicles;
    s.sim.duration_s = duration_s;
    s
}

#[test]
fn same_seed_same_log() {
    let sc = short(20, 60.0);
    let a = run(&sc).unwrap();
    let b = run(&sc).unwrap();
    assert_eq!(a.log.digest_hex(), b.log.digest_hex());
    assert_eq!(a.metrics, b.metrics);
    let mut other = sc.clone();
    other.sim.seed = 2;
    assert_ne!(run(&other).unwrap().log.digest_hex(), a.log.digest_hex());
}

#[test]
fn log_is_ordered_and_conserves_packets() {
    let out = run(&short(40, 120.0)).unwrap();
    let ev = &out.log.events;
    assert!(ev.windows(2).all(|w| w[0].time_us <= w[1].time_us));
    let m = &out.metrics;
    assert!(m.packets_sent > 0);
    assert_eq!(m.packets_delivered + m.packets_dropped, m.packets_sent);
    let sent: HashSet<u64> = ev
        .iter()
        .filter(|e| e.kind == EventKind::Send)
        .filter_map(|e| e.packet)
        .collect();
    let done: Vec<u64> = ev
        .iter()
        .filter(|e| matches!(e.kind, EventKind::Deliver | EventKind::Drop))
        .filter_map(|e| e.packet)
        .collect();
    assert_eq!(done.len(), sent.len());
    assert_eq!(done.iter().copied().collect::<HashSet<_>>(), sent);
    let pdr = m.pdr.unwrap();
    assert!((0.0..=1.0).contains(&pdr));
    let base = Scenario::default();
    let floor = base
        .radio
        .base_latency_ms
        .min(base.backbone.rsu_cs_ms)
        .min(base.backbone.cs_aa_ms);
    assert!(m.avg_delay_ms.unwrap() >= floor);
}

#[test]
fn zero_loss_delivers_everything() {
    let mut sc = short(10, 120.0);
    sc.loss = LossConfig::zero();
    let m = run(&sc).unwrap().metrics;
    assert_eq!(m.pdr, Some(1.0));
    assert!(m.reports_extracted > 0, "{m:?}");
}

#[test]
fn reports_follow_a_completed_handshake() {
    let out = run(&short(30, 120.0)).unwrap();
    let mut authed: HashSet<(Node, Node)> = HashSet::new();
    let mut reports = 0;
    for e in &out.log.events {
        match (e.kind, e.message) {
            (EventKind::Deliver, Some(PacketKind::M2)) => {
                authed.insert((e.dst, e.src));
            }
            (EventKind::Send, Some(PacketKind::M3)) => {
                reports += 1;
                assert!(authed.contains(&(e.src, e.dst)), "{e:?}");
            }
            _ => {}
        }
    }
    assert!(reports > 0);
}

#[test]
fn every_zone_entry_starts_with_a_beacon() {
    let out = run(&short(10, 60.0)).unwrap();
    let mut heard: HashSet<(Node, Node)> = HashSet::new();
    for e in &out.log.events {
        match e.kind {
            EventKind::Beacon => {
                heard.insert((e.dst, e.src));
            }
            EventKind::Send if e.message == Some(PacketKind::M1) => {
                assert!(heard.contains(&(e.src, e.dst)));
            }
            _ => {}
        }
    }
}

#[test]
fn honest_pipeline_reaches_the_authority() {
    let out = run(&short(30, 120.0)).unwrap();
    let kinds: HashSet<PacketKind> = out
        .log
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Deliver)
        .filter_map(|e| e.message)
        .collect();
    for k in [
        PacketKind::M1,
        PacketKind::M2,
        PacketKind::M3,
        PacketKind::M4,
        PacketKind::Alert,
    ] {
        assert!(kinds.contains(&k), "{k:?}");
    }
    let drops: HashSet<&str> = out
        .log
        .events
        .iter()
        .filter(|e| e.kind == EventKind::Drop)
        .map(|e| e.detail.as_str())
        .collect();
    assert!(drops.iter().all(|d| *d == "loss"), "{drops:?}");
}

#[test]
fn step_costs_use_measured_counts() {
    let mut sc = short(10, 60.0);
    sc.costs = UnitCosts {
        t_m: 1.0,
        t_bp: 1.0,
        t_e: 1.0,
        t_h: 0.1,
    };
    let m = run(&sc).unwrap().metrics;
    let close = |k: &str, v: f64| (m.subtasks[k].mean_cost - v).abs() < 1e-9;
    assert!(close(steps::VEHICLE_AUTH, 4.3));
    assert!(close(steps::RSU_AUTH, 4.4));
    assert!(close(steps::VEHICLE_REPORT, 0.1));
    assert!(close(steps::RSU_REPORT, 2.6));
    let total: f64 = m.entity_costs.values().sum();
    let by_step: f64 = [
        "vehicle_auth_request",
        "vehicle_auth_finalize",
        "rsu_auth",
        "vehicle_report",
        "rsu_report",
        "cs_process",
        "aa_process",
    ]
    .iter()
    .filter_map(|k| m.subtasks.get(*k))
    .map(|s| s.mean_cost * s.runs as f64)
    .sum();
    assert!((total - by_step).abs() < 1e-6);
}

#[test]
fn bls_backend_runs_a_short_scenario() {
    let mut sc = short(4, 30.0);
    sc.protocol.backend = SecurityProfile::Bls12_381;
    sc.loss = LossConfig::zero();
    sc.reports.period_ms = 5000.0;
    let m = run(&sc).unwrap().metrics;
    assert_eq!(m.pdr, Some(1.0));
    assert!(m.auths_completed > 0);
}

#[test]
fn load_sweep_trends() {
    let base = Scenario::default();
    let records = sweep(&base, &[30, 90, 150], &[1, 2]).unwrap();
    assert_eq!(records.len(), 6);
    let points = summarize(&records);
    for w in points.windows(2) {
        assert!(w[1].mean_delay_ms >= w[0].mean_delay_ms, "{points:?}");
        assert!(w[1].mean_pdr <= w[0].mean_pdr, "{points:?}");
    }
    for r in &records {
        assert_eq!(r.packets_delivered + r.packets_dropped, r.packets_sent);
    }
}

#[test]
fn documented_example_matches_defaults() {
    let text = include_str!("../../../docs/scenario.example.toml");
    assert_eq!(Scenario::from_toml_str(text).unwrap(), Scenario::default());
}
