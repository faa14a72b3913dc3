use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::crypto::{to_block, Block, BLOCK_LEN};

use super::ProtocolError;

/// A 20-byte entity identity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Identity(pub Block);

impl Identity {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ProtocolError> {
        to_block(bytes)
            .map(Self)
            .map_err(|_| ProtocolError::IdentityLength(bytes.len()))
    }

    /// Identity holding `label` left-aligned and zero padded.
    pub fn from_label(label: &str) -> Result<Self, ProtocolError> {
        let raw = label.as_bytes();
        if raw.is_empty() || raw.len() > BLOCK_LEN {
            return Err(ProtocolError::IdentityLength(raw.len()));
        }
        let mut block = [0u8; BLOCK_LEN];
        block[..raw.len()].copy_from_slice(raw);
        Ok(Self(block))
    }

    pub fn as_bytes(&self) -> &Block {
        &self.0
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let trimmed: Vec<u8> = self.0.iter().copied().take_while(|b| *b != 0).collect();
        let tail_zero = self.0[trimmed.len()..].iter().all(|b| *b == 0);
        match std::str::from_utf8(&trimmed) {
            Ok(s) if tail_zero && !s.is_empty() && s.chars().all(|c| c.is_ascii_graphic()) => {
                f.write_str(s)
            }
            _ => f.write_str(&hex::encode(self.0)),
        }
    }
}

impl fmt::Debug for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Identity({self})")
    }
}

/// Registration key `h1(msk, ID)` issued by the trusted authority.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegistrationKey(pub Block);

impl fmt::Debug for RegistrationKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("RegistrationKey(..)")
    }
}

/// Milliseconds since the scenario epoch.
///
/// Held as 64 bits; only the low 32 bits travel on the wire and the receiver
/// restores the rest from its own clock.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn millis(self) -> u64 {
        self.0
    }

    pub fn plus(self, ms: u64) -> Self {
        Self(self.0 + ms)
    }

    /// Canonical hash-input encoding.
    pub fn to_be_bytes(self) -> [u8; 8] {
        self.0.to_be_bytes()
    }

    pub fn to_wire(self) -> [u8; 4] {
        (self.0 as u32).to_be_bytes()
    }

    /// The value whose low 32 bits are `wire` that lies closest to
    /// `reference`.
    pub fn from_wire(wire: [u8; 4], reference: Timestamp) -> Self {
        const SPAN: i128 = 1 << 32;
        let low = u32::from_be_bytes(wire) as i128;
        let r = reference.0 as i128;
        let base = r - r.rem_euclid(SPAN) + low;
        let best = [base - SPAN, base, base + SPAN]
            .into_iter()
            .filter(|c| *c >= 0 && *c <= u64::MAX as i128)
            .min_by_key(|c| (c - r).abs())
            .unwrap_or(low);
        Self(best as u64)
    }

    /// `now - self`, or zero for timestamps in the future.
    pub fn age_at(self, now: Timestamp) -> u64 {
        now.0.saturating_sub(self.0)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}ms", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum RoadCondition {
    Clear = 0,
    Accident = 1,
    Congestion = 2,
    Pothole = 3,
    Ice = 4,
    Flood = 5,
    Roadwork = 6,
}

impl RoadCondition {
    pub const ALL: [RoadCondition; 7] = [
        Self::Clear,
        Self::Accident,
        Self::Congestion,
        Self::Pothole,
        Self::Ice,
        Self::Flood,
        Self::Roadwork,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Clear => "clear",
            Self::Accident => "accident",
            Self::Congestion => "congestion",
            Self::Pothole => "pothole",
            Self::Ice => "ice",
            Self::Flood => "flood",
            Self::Roadwork => "roadwork",
        }
    }
}

impl FromStr for RoadCondition {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ProtocolError::InvalidInfo(format!("unknown condition `{s}`")))
    }
}

/// Location quantized to a square grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridCell {
    pub x: i32,
    pub y: i32,
}

/// Road condition report payload `I`.
///
/// Encoded as exactly 20 bytes: condition code, x and y grid indices as
/// big-endian `i32`, then 11 zero bytes. Two vehicles observing the same
/// condition in the same cell produce identical bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RoadConditionInfo {
    pub condition: RoadCondition,
    pub cell: GridCell,
}

impl RoadConditionInfo {
    pub const GRID_M: f64 = 10.0;

    pub fn new(condition: RoadCondition, cell: GridCell) -> Self {
        Self { condition, cell }
    }

    pub fn at_position(condition: RoadCondition, x_m: f64, y_m: f64) -> Self {
        let quantize = |v: f64| (v / Self::GRID_M).floor() as i32;
        Self {
            condition,
            cell: GridCell {
                x: quantize(x_m),
                y: quantize(y_m),
            },
        }
    }

    pub fn to_block(&self) -> Block {
        let mut b = [0u8; BLOCK_LEN];
        b[0] = self.condition.code();
        b[1..5].copy_from_slice(&self.cell.x.to_be_bytes());
        b[5..9].copy_from_slice(&self.cell.y.to_be_bytes());
        b
    }

    pub fn from_block(b: &Block) -> Result<Self, ProtocolError> {
        let condition = RoadCondition::from_code(b[0])
            .ok_or_else(|| ProtocolError::InvalidInfo(format!("condition code {}", b[0])))?;
        if b[9..].iter().any(|x| *x != 0) {
            return Err(ProtocolError::InvalidInfo("nonzero padding".into()));
        }
        let x = i32::from_be_bytes(b[1..5].try_into().expect("4 bytes"));
        let y = i32::from_be_bytes(b[5..9].try_into().expect("4 bytes"));
        Ok(Self {
            condition,
            cell: GridCell { x, y },
        })
    }
}

impl fmt::Display for RoadConditionInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}@({},{})",
            self.condition.name(),
            self.cell.x,
            self.cell.y
        )
    }
}
