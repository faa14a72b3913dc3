use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use rcm_core::adversary::Testbed;
use rcm_core::backend::AlertDecision;
use rcm_core::crypto::PairingGroup;
use rcm_core::protocol::{
    auth_finalize, auth_request, auth_respond, make_final_report, make_initial_report, MessageKind,
    ProtocolError, RoadCondition, RoadConditionInfo, SizingProfile, Timestamp, WireMessage,
};

/// A single-bit flip: the lowest bit of the last byte of one field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tamper {
    pub kind: MessageKind,
    pub field: &'static str,
}

impl FromStr for Tamper {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (msg, field) = s
            .split_once('.')
            .ok_or_else(|| format!("expected MESSAGE.FIELD such as m2.Y1, got {s:?}"))?;
        let kind = MessageKind::from_label(&msg.to_uppercase())
            .ok_or_else(|| format!("unknown message {msg:?}; use m1..m4"))?;
        let field = kind
            .fields()
            .iter()
            .find(|f| f.name.eq_ignore_ascii_case(field))
            .ok_or_else(|| {
                let names: Vec<_> = kind.fields().iter().map(|f| f.name).collect();
                format!(
                    "{} has no field {field:?}; fields: {}",
                    kind.label(),
                    names.join(", ")
                )
            })?
            .name;
        Ok(Self { kind, field })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub lines: Vec<String>,
    /// Set when a check failed and the run stopped.
    pub rejection: Option<String>,
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

fn variant(e: &ProtocolError) -> String {
    let dbg = format!("{e:?}");
    dbg.split(['(', ' ', '{'])
        .next()
        .unwrap_or(&dbg)
        .to_string()
}

fn decode_rejection(kind: MessageKind) -> &'static str {
    match kind {
        MessageKind::AuthRequest => "AuthRequestInvalid",
        MessageKind::AuthResponse => "AuthResponseInvalid",
        MessageKind::InitialReport => "InitialReportInvalid",
        MessageKind::FinalReport => "ReportRejected",
    }
}

struct Tracer<'a, G: PairingGroup> {
    world: &'a Testbed<G>,
    tamper: Option<Tamper>,
    lines: Vec<String>,
}

impl<G: PairingGroup> Tracer<'_, G> {
    fn say(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn check(&mut self, who: &str, what: &str) {
        self.say(format!("  check {who}: {what}: pass"));
    }

    /// Prints the message, applies the tamper flip if it targets `M`, and
    /// decodes it with the receiver's clock.
    fn transmit<M: WireMessage<G>>(
        &mut self,
        msg: &M,
        route: &str,
        receiver: &str,
        recv: Timestamp,
    ) -> Result<M, String> {
        let group = self.world.params.group.clone();
        let mut wire = msg.to_wire(&group);
        self.say(format!(
            "{} {route} ({} bytes)",
            M::KIND.label(),
            wire.len()
        ));
        let profile = SizingProfile::wire(&group);
        if let Some(t) = self.tamper.filter(|t| t.kind == M::KIND) {
            let range = profile
                .field_range(t.kind, t.field)
                .expect("field validated");
            wire[range.end - 1] ^= 1;
            self.say(format!(
                "  ! flipped lowest bit of {}.{} in transit",
                t.kind.label(),
                t.field
            ));
        }
        for (field, range) in profile.field_ranges(M::KIND) {
            self.say(format!("  {} = {}", field.name, hex::encode(&wire[range])));
        }
        M::from_wire(&group, &wire, recv).map_err(|e| {
            format!(
                "rejected at {} by {receiver}: {} ({e})",
                M::KIND.label(),
                decode_rejection(M::KIND)
            )
        })
    }
}

fn reject(kind: MessageKind, who: &str, e: &ProtocolError) -> String {
    format!(
        "rejected at {} by {who}: {} ({e})",
        kind.label(),
        variant(e)
    )
}

fn describe(info: &RoadConditionInfo) -> String {
    format!(
        "{} at cell ({}, {})",
        info.condition.name(),
        info.cell.x,
        info.cell.y
    )
}

/// One honest run from registration to the authority, printing every token.
/// Two untraced vehicles report the same condition first, so the traced
/// report is the one that crosses the alert threshold.
pub fn run_trace<G: PairingGroup>(group: G, seed: u64, tamper: Option<Tamper>) -> Trace {
    let world = Testbed::new(group, 2, 300, seed).expect("fixed parameters are valid");
    let mut t = Tracer {
        world: &world,
        tamper,
        lines: Vec::new(),
    };
    let rejection = trace_steps(&mut t, seed).err();
    if let Some(r) = &rejection {
        t.say(format!("result: {r}"));
    }
    Trace {
        lines: t.lines,
        rejection,
    }
}

fn trace_steps<G: PairingGroup>(t: &mut Tracer<'_, G>, seed: u64) -> Result<(), String> {
    let world = t.world;
    let (ctx, params) = (&world.ctx, &world.params);
    let enc = |e: &G::Element| hex::encode(ctx.encode(e));
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);

    t.say(format!(
        "# handshake trace seed={seed} group={}",
        params.group.group_id()
    ));
    t.say(format!(
        "setup: tau = {}, delta_t = {} ms",
        params.tau, params.delta_t_ms
    ));
    t.say(format!("setup: P = {}", enc(&params.generator)));
    t.say(format!("setup: P_pub = {}", enc(&params.p_pub)));
    let vehicle = world.vehicle("trace-vehicle");
    let rsu = world.rsu("trace-rsu");
    t.say(format!(
        "register: ID_U = {}, P_U = {}",
        vehicle.id,
        hex::encode(vehicle.key.0)
    ));
    t.say(format!(
        "register: ID_R = {}, P_R = {}",
        rsu.id,
        hex::encode(rsu.key.0)
    ));
    let info = RoadConditionInfo::at_position(RoadCondition::Accident, 420.0, 5.0);

    let mut store = world.store();
    let mut witness_rng = ChaCha20Rng::seed_from_u64(seed);
    witness_rng.set_stream(2);
    for w in 0..2u64 {
        let v = world.vehicle(&format!("witness-{w}"));
        let run = world
            .honest_run(&v, &rsu, &info, &mut witness_rng, Timestamp(9_000 + 10 * w))
            .expect("honest witness run");
        let d = store.ingest(ctx, params, run.m4, Timestamp(9_005 + 10 * w));
        t.say(format!(
            "cs: earlier report from {} (untraced): {}",
            v.id,
            d.name()
        ));
    }

    let t0 = Timestamp(10_000);
    let (m1, pending) = auth_request(ctx, params, &vehicle, &rsu.id, &mut rng, t0);
    let m1 = t.transmit(&m1, "vehicle -> rsu", "rsu", t0.plus(1))?;
    let (m2, rsu_session) = auth_respond(ctx, params, &rsu, &m1, &mut rng, t0.plus(1))
        .map_err(|e| reject(MessageKind::AuthRequest, "rsu", &e))?;
    t.check(
        "rsu",
        &format!(
            "t_Ui fresh (age {} ms <= {} ms)",
            m1.t_ui.age_at(t0.plus(1)),
            params.delta_t_ms
        ),
    );
    t.check("rsu", &format!("ID_U recovered as {}", rsu_session.peer));
    t.check("rsu", "C_i = h3(ID_U, ID_R, P_U, X1, X2, t_Ui)");

    let m2 = t.transmit(&m2, "rsu -> vehicle", "vehicle", t0.plus(2))?;
    let v_session = auth_finalize(ctx, params, &pending, &m2, t0.plus(2))
        .map_err(|e| reject(MessageKind::AuthResponse, "vehicle", &e))?;
    t.check(
        "vehicle",
        &format!(
            "t_Rj fresh (age {} ms <= {} ms)",
            m2.t_rj.age_at(t0.plus(2)),
            params.delta_t_ms
        ),
    );
    t.check("vehicle", "C_j = h4(ID_U, P_U, ID_R, Y1, Y2, t_Rj)");
    t.say(format!("  vehicle snky = {}", enc(&v_session.snky)));
    t.say(format!("  rsu     snky = {}", enc(&rsu_session.snky)));
    let agreed = v_session.snky == rsu_session.snky;
    t.say(format!("mutualAuth = {agreed}"));
    if !agreed {
        return Err("rejected after M2: session keys differ".into());
    }

    let m3 = make_initial_report(ctx, &v_session, &vehicle, &info, t0.plus(3))
        .map_err(|e| reject(MessageKind::InitialReport, "vehicle", &e))?;
    t.say(format!("vehicle: reporting {}", describe(&info)));
    let m3 = t.transmit(&m3, "vehicle -> rsu", "rsu", t0.plus(4))?;
    let (m4, recovered) =
        make_final_report(ctx, params, &rsu_session, &rsu, &m3, &mut rng, t0.plus(4))
            .map_err(|e| reject(MessageKind::InitialReport, "rsu", &e))?;
    t.check(
        "rsu",
        &format!("ID_U from Q1 is {}, the session peer", recovered.vehicle),
    );
    t.check(
        "rsu",
        &format!("I from Q2 is {}", describe(&recovered.info)),
    );

    let m4 = t.transmit(&m4, "rsu -> cs", "cs", t0.plus(5))?;
    let forwarded = match store.ingest(ctx, params, m4, t0.plus(5)) {
        AlertDecision::Alert { class, report } => {
            t.check(
                "cs",
                "t_hat fresh and l5 = h7(l1, l2, l3, l4, t_hat_Ui, t_hat_Rj)",
            );
            t.say(format!(
                "cs: class {class} exceeds tau = {}: alert",
                params.tau
            ));
            report
        }
        AlertDecision::Stored { class } => {
            return Err(format!(
                "stopped at cs: class {class} is below the alert threshold"
            ));
        }
        AlertDecision::Rejected(r) => {
            return Err(format!(
                "rejected at M4 by cs: ReportRejected ({})",
                r.name()
            ));
        }
    };

    t.say(format!(
        "ALERT cs -> aa ({} bytes)",
        forwarded.to_wire(&params.group).len()
    ));
    let opened = world
        .aa
        .process_alert(ctx, &forwarded)
        .map_err(|e| format!("rejected at ALERT by aa: VerificationFailed ({e})"))?;
    t.check("aa", "e(l1, h6(ID_R, P_R, I)) = e(l2, P)");
    t.say(format!(
        "aa: ID_R = {}, I = {}",
        opened.rsu,
        describe(&opened.info)
    ));
    let accepted = opened.rsu == rsu.id && opened.info == info;
    t.say(format!("reportAccepted = {accepted}"));
    if !accepted {
        return Err("rejected at ALERT by aa: extracted report differs from the original".into());
    }
    Ok(())
}
