//! The four protocol messages and their wire codec.
//!
//! A message on the wire is one tag byte followed by its fields in the order
//! given by [`MessageKind::fields`]. Group elements use the backend's
//! canonical encoding, digests and masked tokens are 20 bytes, and timestamps
//! carry the low 32 bits of the millisecond clock. The same field table drives
//! the encoder, the decoder and the byte accounting.

use std::fmt;
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use crate::crypto::{Block, CryptoContext, Digest, PairingGroup, BLOCK_LEN};

use super::types::Timestamp;

pub const TIMESTAMP_WIRE_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MessageKind {
    AuthRequest,
    AuthResponse,
    InitialReport,
    FinalReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Element,
    Block,
    Timestamp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    pub name: &'static str,
    pub kind: FieldKind,
}

const fn field(name: &'static str, kind: FieldKind) -> Field {
    Field { name, kind }
}

const M1_FIELDS: &[Field] = &[
    field("X1", FieldKind::Element),
    field("X3", FieldKind::Block),
    field("Ci", FieldKind::Block),
    field("t_Ui", FieldKind::Timestamp),
];
const M2_FIELDS: &[Field] = &[
    field("Y1", FieldKind::Element),
    field("Cj", FieldKind::Block),
    field("t_Rj", FieldKind::Timestamp),
];
const M3_FIELDS: &[Field] = &[
    field("Q1", FieldKind::Block),
    field("Q2", FieldKind::Block),
    field("t_hat_Ui", FieldKind::Timestamp),
];
const M4_FIELDS: &[Field] = &[
    field("l1", FieldKind::Element),
    field("l2", FieldKind::Element),
    field("l3", FieldKind::Block),
    field("l4", FieldKind::Block),
    field("l5", FieldKind::Block),
    field("t_hat_Ui", FieldKind::Timestamp),
    field("t_hat_Rj", FieldKind::Timestamp),
];

impl MessageKind {
    pub const ALL: [MessageKind; 4] = [
        Self::AuthRequest,
        Self::AuthResponse,
        Self::InitialReport,
        Self::FinalReport,
    ];

    pub fn tag(self) -> u8 {
        match self {
            Self::AuthRequest => 0x01,
            Self::AuthResponse => 0x02,
            Self::InitialReport => 0x03,
            Self::FinalReport => 0x04,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// Short label, `M1` through `M4`.
    pub fn label(self) -> &'static str {
        match self {
            Self::AuthRequest => "M1",
            Self::AuthResponse => "M2",
            Self::InitialReport => "M3",
            Self::FinalReport => "M4",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.label().eq_ignore_ascii_case(label))
    }

    pub fn fields(self) -> &'static [Field] {
        match self {
            Self::AuthRequest => M1_FIELDS,
            Self::AuthResponse => M2_FIELDS,
            Self::InitialReport => M3_FIELDS,
            Self::FinalReport => M4_FIELDS,
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Byte widths assigned to each field kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizingProfile {
    pub element_bytes: usize,
    pub block_bytes: usize,
    pub timestamp_bytes: usize,
}

impl SizingProfile {
    /// 128-byte group elements, 20-byte scalars and digests, 4-byte
    /// timestamps.
    pub const NOMINAL: SizingProfile = SizingProfile {
        element_bytes: 128,
        block_bytes: 20,
        timestamp_bytes: 4,
    };

    /// Widths of the actual wire encoding for `group`.
    pub fn wire<G: PairingGroup>(group: &G) -> Self {
        Self {
            element_bytes: group.element_len(),
            block_bytes: BLOCK_LEN,
            timestamp_bytes: TIMESTAMP_WIRE_LEN,
        }
    }

    pub fn width(&self, kind: FieldKind) -> usize {
        match kind {
            FieldKind::Element => self.element_bytes,
            FieldKind::Block => self.block_bytes,
            FieldKind::Timestamp => self.timestamp_bytes,
        }
    }

    /// Sum of field widths, excluding the tag byte.
    pub fn payload_bytes(&self, kind: MessageKind) -> usize {
        kind.fields().iter().map(|f| self.width(f.kind)).sum()
    }

    /// Payload plus the tag byte.
    pub fn wire_bytes(&self, kind: MessageKind) -> usize {
        1 + self.payload_bytes(kind)
    }

    /// Byte range of each field within the full wire message.
    pub fn field_ranges(&self, kind: MessageKind) -> Vec<(Field, Range<usize>)> {
        let mut at = 1;
        kind.fields()
            .iter()
            .map(|f| {
                let w = self.width(f.kind);
                let r = at..at + w;
                at += w;
                (*f, r)
            })
            .collect()
    }

    pub fn field_range(&self, kind: MessageKind, name: &str) -> Option<Range<usize>> {
        self.field_ranges(kind)
            .into_iter()
            .find(|(f, _)| f.name == name)
            .map(|(_, r)| r)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WireError {
    #[error("empty message")]
    Empty,
    #[error("unknown message tag {0:#04x}")]
    UnknownTag(u8),
    #[error("expected {expected} tag, found {found:#04x}")]
    WrongTag { expected: MessageKind, found: u8 },
    #[error("{kind} must be {expected} bytes, got {found}")]
    Length {
        kind: MessageKind,
        expected: usize,
        found: usize,
    },
    #[error("field {field} of {kind} is not a valid group element")]
    Element {
        kind: MessageKind,
        field: &'static str,
    },
}

/// Tag of a raw wire message.
pub fn peek_kind(bytes: &[u8]) -> Result<MessageKind, WireError> {
    let tag = *bytes.first().ok_or(WireError::Empty)?;
    MessageKind::from_tag(tag).ok_or(WireError::UnknownTag(tag))
}

/// Sequential field writer that enforces the field table.
pub struct Writer<'g, G: PairingGroup> {
    group: &'g G,
    kind: MessageKind,
    next: usize,
    buf: Vec<u8>,
}

impl<'g, G: PairingGroup> Writer<'g, G> {
    fn new(group: &'g G, kind: MessageKind) -> Self {
        let mut buf = Vec::with_capacity(SizingProfile::wire(group).wire_bytes(kind));
        buf.push(kind.tag());
        Self {
            group,
            kind,
            next: 0,
            buf,
        }
    }

    fn advance(&mut self, kind: FieldKind) {
        let f = self.kind.fields()[self.next];
        assert_eq!(
            f.kind, kind,
            "{} field {} written out of order",
            self.kind, f.name
        );
        self.next += 1;
    }

    pub fn element(&mut self, e: &G::Element) {
        self.advance(FieldKind::Element);
        self.buf.extend_from_slice(&self.group.encode_element(e));
    }

    pub fn block(&mut self, b: &Block) {
        self.advance(FieldKind::Block);
        self.buf.extend_from_slice(b);
    }

    pub fn timestamp(&mut self, t: Timestamp) {
        self.advance(FieldKind::Timestamp);
        self.buf.extend_from_slice(&t.to_wire());
    }

    fn finish(self) -> Vec<u8> {
        assert_eq!(
            self.next,
            self.kind.fields().len(),
            "{} is missing fields",
            self.kind
        );
        self.buf
    }
}

/// Sequential field reader over a length-checked message.
pub struct Reader<'a, G: PairingGroup> {
    group: &'a G,
    kind: MessageKind,
    bytes: &'a [u8],
    pos: usize,
    next: usize,
    reference: Timestamp,
}

impl<'a, G: PairingGroup> Reader<'a, G> {
    fn new(
        group: &'a G,
        kind: MessageKind,
        bytes: &'a [u8],
        reference: Timestamp,
    ) -> Result<Self, WireError> {
        let found = peek_kind(bytes).map_err(|e| match e {
            WireError::UnknownTag(t) => WireError::WrongTag {
                expected: kind,
                found: t,
            },
            other => other,
        })?;
        if found != kind {
            return Err(WireError::WrongTag {
                expected: kind,
                found: bytes[0],
            });
        }
        let expected = SizingProfile::wire(group).wire_bytes(kind);
        if bytes.len() != expected {
            return Err(WireError::Length {
                kind,
                expected,
                found: bytes.len(),
            });
        }
        Ok(Self {
            group,
            kind,
            bytes,
            pos: 1,
            next: 0,
            reference,
        })
    }

    fn take(&mut self, kind: FieldKind, width: usize) -> (&'static str, &'a [u8]) {
        let f = self.kind.fields()[self.next];
        assert_eq!(
            f.kind, kind,
            "{} field {} read out of order",
            self.kind, f.name
        );
        self.next += 1;
        let out = &self.bytes[self.pos..self.pos + width];
        self.pos += width;
        (f.name, out)
    }

    pub fn element(&mut self) -> Result<G::Element, WireError> {
        let (name, raw) = self.take(FieldKind::Element, self.group.element_len());
        self.group
            .decode_element(raw)
            .map_err(|_| WireError::Element {
                kind: self.kind,
                field: name,
            })
    }

    pub fn block(&mut self) -> Block {
        let (_, raw) = self.take(FieldKind::Block, BLOCK_LEN);
        raw.try_into().expect("length checked on construction")
    }

    pub fn digest(&mut self) -> Digest {
        Digest(self.block())
    }

    pub fn timestamp(&mut self) -> Timestamp {
        let (_, raw) = self.take(FieldKind::Timestamp, TIMESTAMP_WIRE_LEN);
        Timestamp::from_wire(raw.try_into().expect("4 bytes"), self.reference)
    }
}

/// Conversion between a message and its wire bytes.
pub trait WireMessage<G: PairingGroup>: Sized {
    const KIND: MessageKind;

    fn write_fields(&self, w: &mut Writer<'_, G>);

    fn read_fields(r: &mut Reader<'_, G>) -> Result<Self, WireError>;

    fn to_wire(&self, group: &G) -> Vec<u8> {
        let mut w = Writer::new(group, Self::KIND);
        self.write_fields(&mut w);
        w.finish()
    }

    /// Decodes `bytes`, restoring full timestamps relative to `reference`
    /// (normally the receiver's clock).
    fn from_wire(group: &G, bytes: &[u8], reference: Timestamp) -> Result<Self, WireError> {
        let mut r = Reader::new(group, Self::KIND, bytes, reference)?;
        Self::read_fields(&mut r)
    }
}

/// `M1 = {X1, X3, Ci, t_Ui}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthRequest<G: PairingGroup> {
    pub x1: G::Element,
    pub x3: Block,
    pub ci: Digest,
    pub t_ui: Timestamp,
}

/// `M2 = {Y1, Cj, t_Rj}`.
#[derive(Debug, Clone, PartialEq)]
pub struct AuthResponse<G: PairingGroup> {
    pub y1: G::Element,
    pub cj: Digest,
    pub t_rj: Timestamp,
}

/// `M3 = {Q1, Q2, t̂_Ui}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitialReport {
    pub q1: Block,
    pub q2: Block,
    pub t_hat_ui: Timestamp,
}

/// `M4 = {l1..l5, t̂_Ui, t̂_Rj}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalReport<G: PairingGroup> {
    pub l1: G::Element,
    pub l2: G::Element,
    pub l3: Block,
    pub l4: Block,
    pub l5: Digest,
    pub t_hat_ui: Timestamp,
    pub t_hat_rj: Timestamp,
}

impl<G: PairingGroup> FinalReport<G> {
    /// `h7(l1, l2, l3, l4, t̂_Ui, t̂_Rj)`.
    pub fn binding(&self, ctx: &CryptoContext<G>) -> Digest {
        let l1 = ctx.encode(&self.l1);
        let l2 = ctx.encode(&self.l2);
        ctx.h(
            7,
            &[
                &l1,
                &l2,
                &self.l3,
                &self.l4,
                &self.t_hat_ui.to_be_bytes(),
                &self.t_hat_rj.to_be_bytes(),
            ],
        )
    }
}

impl<G: PairingGroup> WireMessage<G> for AuthRequest<G> {
    const KIND: MessageKind = MessageKind::AuthRequest;

    fn write_fields(&self, w: &mut Writer<'_, G>) {
        w.element(&self.x1);
        w.block(&self.x3);
        w.block(&self.ci.0);
        w.timestamp(self.t_ui);
    }

    fn read_fields(r: &mut Reader<'_, G>) -> Result<Self, WireError> {
        Ok(Self {
            x1: r.element()?,
            x3: r.block(),
            ci: r.digest(),
            t_ui: r.timestamp(),
        })
    }
}

impl<G: PairingGroup> WireMessage<G> for AuthResponse<G> {
    const KIND: MessageKind = MessageKind::AuthResponse;

    fn write_fields(&self, w: &mut Writer<'_, G>) {
        w.element(&self.y1);
        w.block(&self.cj.0);
        w.timestamp(self.t_rj);
    }

    fn read_fields(r: &mut Reader<'_, G>) -> Result<Self, WireError> {
        Ok(Self {
            y1: r.element()?,
            cj: r.digest(),
            t_rj: r.timestamp(),
        })
    }
}

impl<G: PairingGroup> WireMessage<G> for InitialReport {
    const KIND: MessageKind = MessageKind::InitialReport;

    fn write_fields(&self, w: &mut Writer<'_, G>) {
        w.block(&self.q1);
        w.block(&self.q2);
        w.timestamp(self.t_hat_ui);
    }

    fn read_fields(r: &mut Reader<'_, G>) -> Result<Self, WireError> {
        Ok(Self {
            q1: r.block(),
            q2: r.block(),
            t_hat_ui: r.timestamp(),
        })
    }
}

impl<G: PairingGroup> WireMessage<G> for FinalReport<G> {
    const KIND: MessageKind = MessageKind::FinalReport;

    fn write_fields(&self, w: &mut Writer<'_, G>) {
        w.element(&self.l1);
        w.element(&self.l2);
        w.block(&self.l3);
        w.block(&self.l4);
        w.block(&self.l5.0);
        w.timestamp(self.t_hat_ui);
        w.timestamp(self.t_hat_rj);
    }

    fn read_fields(r: &mut Reader<'_, G>) -> Result<Self, WireError> {
        Ok(Self {
            l1: r.element()?,
            l2: r.element()?,
            l3: r.block(),
            l4: r.block(),
            l5: r.digest(),
            t_hat_ui: r.timestamp(),
            t_hat_rj: r.timestamp(),
        })
    }
}
