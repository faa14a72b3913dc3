use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::backend::{AlertDecision, ApplicationAuthority, EquivalenceStore, StoreConfig};
use crate::crypto::{Bls12Dual, CryptoContext, OpCounts, PairingGroup, ToyGroup};
use crate::protocol::{
    setup, AuthRequest, AuthResponse, FinalReport, Identity, InitialReport, PublicParams,
    RoadCondition, RoadConditionInfo, RsuAgent, SecurityProfile, Timestamp, TrustedAuthority,
    VehicleAgent, WireMessage,
};

use super::log::{EventKind, EventLog, Node, PacketKind, SimEvent};
use super::metrics::{compute_metrics, steps, Metrics};
use super::scenario::{Scenario, ScenarioError};

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub metrics: Metrics,
    pub log: EventLog,
}

/// Runs one scenario to completion. Packets still in flight at the end of
/// the configured duration are delivered or dropped before returning.
pub fn run(scenario: &Scenario) -> Result<SimOutput, ScenarioError> {
    scenario.validate()?;
    let log = match scenario.protocol.backend {
        SecurityProfile::Toy => Engine::new(scenario, ToyGroup::default())?.run(),
        SecurityProfile::Bls12_381 => Engine::new(scenario, Bls12Dual)?.run(),
    };
    Ok(SimOutput {
        metrics: compute_metrics(&log, &scenario.costs),
        log,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Action {
    Spawn(usize),
    Cross(usize),
    Beacon { v: usize, rsu: usize, epoch: u64 },
    AuthRetry { v: usize, rsu: usize, epoch: u64 },
    ReportTick(usize),
    Arrive(u64),
}

struct Vehicle<G: PairingGroup> {
    agent: VehicleAgent<G>,
    dir: f64,
    speed: f64,
    x0: f64,
    spawn_us: u64,
    report_offset_us: u64,
    active: bool,
    zone: usize,
    /// Bumped on every zone change; stale beacons and retries compare it.
    epoch: u64,
    /// Seconds after spawn at which the current zone is left.
    leave_s: f64,
}

struct Packet {
    kind: PacketKind,
    src: Node,
    dst: Node,
    wire: Vec<u8>,
    lost: bool,
}

struct Engine<'a, G: PairingGroup> {
    sc: &'a Scenario,
    ctx: CryptoContext<G>,
    params: PublicParams<G>,
    vehicles: Vec<Vehicle<G>>,
    rsus: Vec<RsuAgent<G>>,
    rsu_x: Vec<f64>,
    store: EquivalenceStore<G>,
    aa: ApplicationAuthority<G>,
    incidents: Vec<(f64, RoadConditionInfo)>,
    queue: BinaryHeap<Reverse<(u64, u64, Action)>>,
    seq: u64,
    packets: HashMap<u64, Packet>,
    next_packet: u64,
    radio_rng: ChaCha20Rng,
    proto_rng: ChaCha20Rng,
    log: EventLog,
    end_us: u64,
}

fn ms_to_us(ms: f64) -> u64 {
    (ms * 1000.0).round() as u64
}

fn label_id(label: String) -> Identity {
    Identity::from_label(&label).expect("generated labels fit an identity")
}

impl<'a, G: PairingGroup> Engine<'a, G> {
    fn new(sc: &'a Scenario, group: G) -> Result<Self, ScenarioError> {
        let p = &sc.protocol;
        let (params, msk) =
            setup(group.clone(), p.tau, p.delta_t_ms, sc.sim.seed).map_err(|e| {
                ScenarioError::Invalid {
                    key: "protocol",
                    reason: e.to_string(),
                }
            })?;
        let ctx = CryptoContext::new(group);
        let ta = TrustedAuthority::new(params.clone(), msk.clone());

        let mut mobility = ChaCha20Rng::seed_from_u64(sc.sim.seed);
        mobility.set_stream(0);
        let mut radio_rng = ChaCha20Rng::seed_from_u64(sc.sim.seed);
        radio_rng.set_stream(1);
        let mut proto_rng = ChaCha20Rng::seed_from_u64(sc.sim.seed);
        proto_rng.set_stream(2);

        let rsu_x: Vec<f64> = (0..sc.rsu_count()).map(|j| sc.rsu_position(j)).collect();
        let rsus = (0..rsu_x.len())
            .map(|j| RsuAgent::new(ta.register_rsu(&ctx, label_id(format!("rsu-{j}")))))
            .collect();
        let vc = &sc.vehicles;
        let vehicles = (0..vc.count)
            .map(|i| {
                let cred = ta.register_vehicle(&ctx, label_id(format!("veh-{i}")));
                let forward = (i as u32 % sc.street.lanes).is_multiple_of(2);
                let speed = vc.min_speed_mps
                    + (vc.max_speed_mps - vc.min_speed_mps) * mobility.gen::<f64>();
                let report_offset_us = ms_to_us(sc.reports.period_ms * mobility.gen::<f64>());
                Vehicle {
                    agent: VehicleAgent::new(cred, &params),
                    dir: if forward { 1.0 } else { -1.0 },
                    speed,
                    x0: if forward { 0.0 } else { sc.street.length_m },
                    spawn_us: ms_to_us(i as f64 * vc.spawn_interval_ms),
                    report_offset_us,
                    active: false,
                    zone: 0,
                    epoch: 0,
                    leave_s: 0.0,
                }
            })
            .collect();
        let incidents = sc
            .reports
            .incidents
            .iter()
            .map(|inc| {
                let c: RoadCondition = inc.condition.parse().expect("validated");
                (inc.x_m, RoadConditionInfo::at_position(c, inc.x_m, 0.0))
            })
            .collect();
        let store = EquivalenceStore::new(StoreConfig {
            tau: p.tau,
            dedupe_alerts: p.dedupe_alerts,
            forward: p.forward,
            eviction_horizon_ms: Some(p.eviction_horizon_ms),
        });

        Ok(Self {
            sc,
            aa: ApplicationAuthority::new(params.clone(), msk),
            ctx,
            params,
            vehicles,
            rsus,
            rsu_x,
            store,
            incidents,
            queue: BinaryHeap::new(),
            seq: 0,
            packets: HashMap::new(),
            next_packet: 0,
            radio_rng,
            proto_rng,
            log: EventLog::default(),
            end_us: ms_to_us(sc.sim.duration_s * 1000.0),
        })
    }

    fn run(mut self) -> EventLog {
        for v in 0..self.vehicles.len() {
            let t = self.vehicles[v].spawn_us;
            if t < self.end_us {
                self.schedule(t, Action::Spawn(v));
            }
        }
        while let Some(Reverse((now, _, action))) = self.queue.pop() {
            self.handle(now, action);
        }
        self.log
    }

    fn schedule(&mut self, at: u64, action: Action) {
        self.queue.push(Reverse((at, self.seq, action)));
        self.seq += 1;
    }

    fn handle(&mut self, now: u64, action: Action) {
        let open = now < self.end_us;
        match action {
            Action::Arrive(id) => self.arrive(now, id),
            Action::Spawn(v) if open => self.spawn(now, v),
            Action::Cross(v) if open => self.cross(now, v),
            Action::Beacon { v, rsu, epoch } if open && self.vehicles[v].epoch == epoch => {
                self.log.push(SimEvent {
                    time_us: now,
                    kind: EventKind::Beacon,
                    packet: None,
                    message: None,
                    src: Node::Rsu(rsu as u32),
                    dst: Node::Vehicle(v as u32),
                    bytes: 0,
                    detail: String::new(),
                    ops: OpCounts::default(),
                });
                self.start_auth(now, v, rsu);
            }
            Action::AuthRetry { v, rsu, epoch } if open && self.vehicles[v].epoch == epoch => {
                let rid = self.rsus[rsu].id();
                if self.vehicles[v].agent.session(&rid).is_none() {
                    self.start_auth(now, v, rsu);
                }
            }
            Action::ReportTick(v) if open => self.report_tick(now, v),
            _ => {}
        }
    }

    // Mobility

    fn position(&self, v: usize, now: u64) -> f64 {
        let veh = &self.vehicles[v];
        let t = now.saturating_sub(veh.spawn_us) as f64 / 1e6;
        (veh.x0 + veh.dir * veh.speed * t).rem_euclid(self.sc.street.length_m)
    }

    fn zone_of(&self, x: f64) -> usize {
        ((x / self.sc.rsu.spacing_m) as usize).min(self.rsu_x.len() - 1)
    }

    fn zone_width(&self, z: usize) -> f64 {
        let s = self.sc.rsu.spacing_m;
        (self.sc.street.length_m - z as f64 * s).min(s)
    }

    fn schedule_leave(&mut self, v: usize) {
        let veh = &self.vehicles[v];
        let at = veh.spawn_us + (veh.leave_s * 1e6).round() as u64;
        if at < self.end_us {
            self.schedule(at, Action::Cross(v));
        }
    }

    fn spawn(&mut self, now: u64, v: usize) {
        let x = self.vehicles[v].x0;
        let z = self.zone_of(x);
        let s = self.sc.rsu.spacing_m;
        let veh = &mut self.vehicles[v];
        veh.active = true;
        veh.zone = z;
        let dist = if veh.dir > 0.0 {
            ((z + 1) as f64 * s).min(self.sc.street.length_m) - x
        } else {
            x - z as f64 * s
        };
        veh.leave_s = dist / veh.speed;
        let first_tick = now + veh.report_offset_us;
        self.schedule_leave(v);
        self.schedule(first_tick, Action::ReportTick(v));
        self.enter_zone(now, v);
    }

    fn cross(&mut self, now: u64, v: usize) {
        let n = self.rsu_x.len();
        let old = self.vehicles[v].zone;
        let new = if self.vehicles[v].dir > 0.0 {
            (old + 1) % n
        } else {
            (old + n - 1) % n
        };
        let old_id = self.rsus[old].id();
        let width = self.zone_width(new);
        let veh = &mut self.vehicles[v];
        veh.agent.end_session(&old_id);
        veh.zone = new;
        veh.leave_s += width / veh.speed;
        self.schedule_leave(v);
        self.enter_zone(now, v);
    }

    /// The vehicle authenticates after the first beacon heard in the zone.
    fn enter_zone(&mut self, now: u64, v: usize) {
        let period = ms_to_us(self.sc.beacon.period_ms).max(1);
        let beacon_at = now.div_ceil(period) * period;
        let veh = &mut self.vehicles[v];
        veh.epoch += 1;
        let (rsu, epoch) = (veh.zone, veh.epoch);
        self.schedule(beacon_at, Action::Beacon { v, rsu, epoch });
    }

    fn stations_near(&self, rsu: usize, now: u64) -> usize {
        let x = self.rsu_x[rsu];
        (0..self.vehicles.len())
            .filter(|&v| self.vehicles[v].active)
            .filter(|&v| (self.position(v, now) - x).abs() <= self.sc.radio.range_m)
            .count()
    }

    // Vehicle behaviour

    fn start_auth(&mut self, now: u64, v: usize, rsu: usize) {
        let ts = Timestamp(now / 1000);
        let rid = self.rsus[rsu].id();
        let (m1, ops) = self.ctx.measure(|c| {
            self.vehicles[v]
                .agent
                .start_auth(c, &self.params, rid, &mut self.proto_rng, ts)
        });
        let (src, dst) = (Node::Vehicle(v as u32), Node::Rsu(rsu as u32));
        self.step(now, steps::VEHICLE_AUTH_REQUEST, src, dst, ops);
        self.send(now, PacketKind::M1, src, dst, m1.to_wire(self.ctx.group()));
        let epoch = self.vehicles[v].epoch;
        let retry = now + 2 * self.params.delta_t_ms * 1000;
        self.schedule(retry, Action::AuthRetry { v, rsu, epoch });
    }

    fn report_tick(&mut self, now: u64, v: usize) {
        let period = ms_to_us(self.sc.reports.period_ms).max(1);
        self.schedule(now + period, Action::ReportTick(v));
        let x = self.position(v, now);
        let Some(&(_, info)) = self
            .incidents
            .iter()
            .find(|(ix, _)| (ix - x).abs() <= self.sc.reports.radius_m)
        else {
            return;
        };
        let rsu = self.vehicles[v].zone;
        let rid = self.rsus[rsu].id();
        if self.vehicles[v].agent.session(&rid).is_none() {
            return;
        }
        let ts = Timestamp(now / 1000);
        let (m3, ops) = self
            .ctx
            .measure(|c| self.vehicles[v].agent.report(c, &rid, &info, ts));
        let (src, dst) = (Node::Vehicle(v as u32), Node::Rsu(rsu as u32));
        self.step(now, steps::VEHICLE_REPORT, src, dst, ops);
        if let Ok(m3) = m3 {
            self.send(now, PacketKind::M3, src, dst, m3.to_wire(self.ctx.group()));
        }
    }

    // Network

    fn send(&mut self, now: u64, kind: PacketKind, src: Node, dst: Node, wire: Vec<u8>) {
        let (delay_ms, lost) = match (src, dst) {
            (Node::Vehicle(_), Node::Rsu(j)) | (Node::Rsu(j), Node::Vehicle(_)) => {
                let radio = &self.sc.radio;
                let stations = self.stations_near(j as usize, now);
                let jitter = radio.jitter_ms * self.radio_rng.gen::<f64>();
                let p = self.sc.loss.probability(stations);
                let lost = self.radio_rng.gen::<f64>() < p;
                (
                    radio.base_latency_ms + radio.per_station_ms * stations as f64 + jitter,
                    lost,
                )
            }
            (_, Node::Cloud) => (self.sc.backbone.rsu_cs_ms, false),
            _ => (self.sc.backbone.cs_aa_ms, false),
        };
        let id = self.next_packet;
        self.next_packet += 1;
        self.log.push(SimEvent {
            time_us: now,
            kind: EventKind::Send,
            packet: Some(id),
            message: Some(kind),
            src,
            dst,
            bytes: wire.len(),
            detail: String::new(),
            ops: OpCounts::default(),
        });
        self.packets.insert(
            id,
            Packet {
                kind,
                src,
                dst,
                wire,
                lost,
            },
        );
        self.schedule(now + ms_to_us(delay_ms), Action::Arrive(id));
    }

    fn step(&mut self, now: u64, name: &str, src: Node, dst: Node, ops: OpCounts) {
        self.log.push(SimEvent {
            time_us: now,
            kind: EventKind::ProtocolStep,
            packet: None,
            message: None,
            src,
            dst,
            bytes: 0,
            detail: name.to_string(),
            ops,
        });
    }

    fn finish(&mut self, now: u64, id: u64, p: &Packet, outcome: Result<(), String>) {
        let (kind, detail) = match outcome {
            Ok(()) => (EventKind::Deliver, String::new()),
            Err(reason) => (EventKind::Drop, reason),
        };
        self.log.push(SimEvent {
            time_us: now,
            kind,
            packet: Some(id),
            message: Some(p.kind),
            src: p.src,
            dst: p.dst,
            bytes: p.wire.len(),
            detail,
            ops: OpCounts::default(),
        });
    }

    fn arrive(&mut self, now: u64, id: u64) {
        let p = self.packets.remove(&id).expect("packet scheduled once");
        if p.lost {
            return self.finish(now, id, &p, Err("loss".into()));
        }
        let outcome = match (p.kind, p.src, p.dst) {
            (PacketKind::M1, Node::Vehicle(v), Node::Rsu(j)) => self.at_rsu_m1(now, &p, v, j),
            (PacketKind::M2, Node::Rsu(j), Node::Vehicle(v)) => self.at_vehicle_m2(now, &p, v, j),
            (PacketKind::M3, Node::Vehicle(v), Node::Rsu(j)) => self.at_rsu_m3(now, &p, v, j),
            (PacketKind::M4, _, Node::Cloud) => self.at_cloud(now, &p),
            (PacketKind::Alert, _, Node::Authority) => self.at_authority(now, &p),
            _ => unreachable!("packets are only addressed along protocol links"),
        };
        match outcome {
            Ok(follow_up) => {
                self.finish(now, id, &p, Ok(()));
                if let Some((kind, src, dst, wire)) = follow_up {
                    self.send(now, kind, src, dst, wire);
                }
            }
            Err(reason) => self.finish(now, id, &p, Err(reason)),
        }
    }

    fn at_rsu_m1(&mut self, now: u64, p: &Packet, v: u32, j: u32) -> Arrival {
        let ts = Timestamp(now / 1000);
        let group = self.ctx.group();
        let m1 = AuthRequest::<G>::from_wire(group, &p.wire, ts).map_err(|_| malformed())?;
        let (m2, ops) = self.ctx.measure(|c| {
            self.rsus[j as usize].handle_request(
                c,
                &self.params,
                u64::from(v),
                &m1,
                &mut self.proto_rng,
                ts,
            )
        });
        self.step(now, steps::RSU_AUTH, p.dst, p.src, ops);
        let m2 = m2.map_err(|e| e.kind().to_string())?;
        Ok(Some((
            PacketKind::M2,
            p.dst,
            p.src,
            m2.to_wire(self.ctx.group()),
        )))
    }

    fn at_vehicle_m2(&mut self, now: u64, p: &Packet, v: u32, j: u32) -> Arrival {
        let ts = Timestamp(now / 1000);
        let m2 =
            AuthResponse::<G>::from_wire(self.ctx.group(), &p.wire, ts).map_err(|_| malformed())?;
        let rid = self.rsus[j as usize].id();
        let (res, ops) = self.ctx.measure(|c| {
            self.vehicles[v as usize]
                .agent
                .handle_response(c, &self.params, rid, &m2, ts)
                .map(|_| ())
        });
        self.step(now, steps::VEHICLE_AUTH_FINALIZE, p.dst, p.src, ops);
        res.map_err(|e| e.kind().to_string())?;
        Ok(None)
    }

    fn at_rsu_m3(&mut self, now: u64, p: &Packet, v: u32, j: u32) -> Arrival {
        let ts = Timestamp(now / 1000);
        let m3 = <InitialReport as WireMessage<G>>::from_wire(self.ctx.group(), &p.wire, ts)
            .map_err(|_| malformed())?;
        let (res, ops) = self.ctx.measure(|c| {
            self.rsus[j as usize].handle_report(
                c,
                &self.params,
                u64::from(v),
                &m3,
                &mut self.proto_rng,
                ts,
            )
        });
        self.step(now, steps::RSU_REPORT, p.dst, Node::Cloud, ops);
        let (m4, _) = res.map_err(|e| e.kind().to_string())?;
        Ok(Some((
            PacketKind::M4,
            p.dst,
            Node::Cloud,
            m4.to_wire(self.ctx.group()),
        )))
    }

    fn at_cloud(&mut self, now: u64, p: &Packet) -> Arrival {
        let ts = Timestamp(now / 1000);
        let m4 =
            FinalReport::<G>::from_wire(self.ctx.group(), &p.wire, ts).map_err(|_| malformed())?;
        let (decision, ops) = self
            .ctx
            .measure(|c| self.store.ingest(c, &self.params, m4, ts));
        self.step(now, steps::CS_PROCESS, Node::Cloud, p.src, ops);
        match decision {
            AlertDecision::Alert { report, .. } => Ok(Some((
                PacketKind::Alert,
                Node::Cloud,
                Node::Authority,
                report.to_wire(self.ctx.group()),
            ))),
            AlertDecision::Stored { .. } => Ok(None),
            AlertDecision::Rejected(r) => Err(r.name().to_string()),
        }
    }

    fn at_authority(&mut self, now: u64, p: &Packet) -> Arrival {
        let ts = Timestamp(now / 1000);
        let report =
            FinalReport::<G>::from_wire(self.ctx.group(), &p.wire, ts).map_err(|_| malformed())?;
        let (res, ops) = self.ctx.measure(|c| self.aa.process_alert(c, &report));
        self.step(now, steps::AA_PROCESS, Node::Authority, Node::Cloud, ops);
        res.map(|_| None)
            .map_err(|_| "verification_failed".to_string())
    }
}

type Arrival = Result<Option<(PacketKind, Node, Node, Vec<u8>)>, String>;

fn malformed() -> String {
    "malformed".to_string()
}
