use std::fmt;
use std::io::Write;

use serde::Serialize;
use sha2::{Digest as _, Sha256};

use crate::crypto::OpCounts;

/// A simulated host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Vehicle(u32),
    Rsu(u32),
    Cloud,
    Authority,
}

impl Node {
    /// Cost bucket for per-entity totals.
    pub fn entity(self) -> &'static str {
        match self {
            Self::Vehicle(_) => "vehicle",
            Self::Rsu(_) => "rsu",
            Self::Cloud => "cs",
            Self::Authority => "aa",
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Vehicle(i) => write!(f, "V{i}"),
            Self::Rsu(j) => write!(f, "R{j}"),
            Self::Cloud => f.write_str("CS"),
            Self::Authority => f.write_str("AA"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PacketKind {
    M1,
    M2,
    M3,
    M4,
    /// A final report forwarded by the cloud to the authority.
    Alert,
}

impl PacketKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::M1 => "M1",
            Self::M2 => "M2",
            Self::M3 => "M3",
            Self::M4 => "M4",
            Self::Alert => "ALERT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    Beacon,
    Send,
    Deliver,
    Drop,
    ProtocolStep,
}

impl EventKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Beacon => "beacon",
            Self::Send => "send",
            Self::Deliver => "deliver",
            Self::Drop => "drop",
            Self::ProtocolStep => "step",
        }
    }
}

/// One log line.
///
/// `detail` holds the subtask name for protocol steps and the reason for
/// drops (`loss` or a protocol error kind).
#[derive(Debug, Clone, PartialEq)]
pub struct SimEvent {
    pub time_us: u64,
    pub kind: EventKind,
    pub packet: Option<u64>,
    pub message: Option<PacketKind>,
    pub src: Node,
    pub dst: Node,
    pub bytes: usize,
    pub detail: String,
    pub ops: OpCounts,
}

#[derive(Serialize)]
struct Row<'a> {
    time_us: u64,
    event: &'static str,
    packet: Option<u64>,
    message: &'static str,
    src: String,
    dst: String,
    bytes: usize,
    detail: &'a str,
    t_m: u64,
    t_bp: u64,
    t_e: u64,
    t_h: u64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub events: Vec<SimEvent>,
}

impl EventLog {
    pub fn push(&mut self, e: SimEvent) {
        debug_assert!(self.events.last().is_none_or(|l| l.time_us <= e.time_us));
        self.events.push(e);
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.events {
            w.serialize(Row {
                time_us: e.time_us,
                event: e.kind.name(),
                packet: e.packet,
                message: e.message.map_or("", PacketKind::name),
                src: e.src.to_string(),
                dst: e.dst.to_string(),
                bytes: e.bytes,
                detail: &e.detail,
                t_m: e.ops.scalar_mults,
                t_bp: e.ops.pairings,
                t_e: e.ops.exponentiations,
                t_h: e.ops.hashes,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    /// SHA-256 of the CSV rendering, hex encoded.
    pub fn digest_hex(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv().as_bytes()))
    }
}
