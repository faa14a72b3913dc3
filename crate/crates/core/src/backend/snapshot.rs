use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::crypto::{CryptoContext, PairingGroup};
use crate::protocol::{FinalReport, PublicParams, Timestamp, WireMessage};

use super::store::{AlertDecision, EquivalenceStore, StoreConfig};

const MAGIC: &str = "rcm-store";
const VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("bad snapshot header: {0}")]
    Header(String),
    #[error("snapshot line {line}: {reason}")]
    Record { line: usize, reason: String },
}

impl<G: PairingGroup> EquivalenceStore<G> {
    /// Writes a header line and one hex record per stored report, in class
    /// order. A record is the 8-byte ingestion time followed by the report's
    /// wire encoding.
    pub fn dump<W: Write>(&self, group: &G, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "{MAGIC} {VERSION} tau={} group={}",
            self.config().tau,
            group.group_id()
        )?;
        for class in self.classes() {
            for member in &class.members {
                let mut record = member.ingested_at.to_be_bytes().to_vec();
                record.extend_from_slice(&member.report.to_wire(group));
                writeln!(out, "{}", hex::encode(record))?;
            }
        }
        Ok(())
    }

    /// Rebuilds a store from [`dump`](Self::dump) output. Classes are
    /// re-derived by re-ingesting every record in file order; freshness is
    /// not rechecked but the `l5` binding is.
    ///
    /// `tau` comes from the header; other settings from `config`.
    pub fn load<R: BufRead>(
        ctx: &CryptoContext<G>,
        params: &PublicParams<G>,
        config: StoreConfig,
        input: R,
    ) -> Result<Self, SnapshotError> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| SnapshotError::Header("empty file".into()))??;
        let tau = parse_header(&header, &params.group.group_id())?;
        let mut store = Self::new(StoreConfig { tau, ..config });
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line_no = i + 2;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| SnapshotError::Record {
                line: line_no,
                reason,
            };
            let raw = hex::decode(line.trim()).map_err(|e| bad(e.to_string()))?;
            if raw.len() < 8 {
                return Err(bad("record too short".into()));
            }
            let (time, wire) = raw.split_at(8);
            let ingested_at = Timestamp(u64::from_be_bytes(time.try_into().expect("8 bytes")));
            let report = FinalReport::from_wire(&params.group, wire, ingested_at)
                .map_err(|e| bad(e.to_string()))?;
            if let AlertDecision::Rejected(r) = store.verify_and_insert(ctx, report, ingested_at) {
                return Err(bad(format!("report rejected: {}", r.name())));
            }
        }
        Ok(store)
    }
}

fn parse_header(header: &str, group_id: &str) -> Result<u32, SnapshotError> {
    let bad = || SnapshotError::Header(header.to_string());
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) || parts.next() != Some(VERSION) {
        return Err(bad());
    }
    let tau = parts
        .next()
        .and_then(|p| p.strip_prefix("tau="))
        .and_then(|v| v.parse::<u32>().ok())
        .filter(|t| *t >= 1)
        .ok_or_else(bad)?;
    let group = parts
        .next()
        .and_then(|p| p.strip_prefix("group="))
        .ok_or_else(bad)?;
    if group != group_id {
        return Err(SnapshotError::Header(format!(
            "snapshot is for group {group}, parameters use {group_id}"
        )));
    }
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(tau)
}
