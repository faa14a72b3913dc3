use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::engine::run;
use super::metrics::{steps, Metrics};
use super::scenario::{Scenario, ScenarioError};

/// Default vehicle counts for a load sweep.
pub const SWEEP_COUNTS: [usize; 5] = [30, 60, 90, 120, 150];

/// One row of the per-run metrics CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub vehicles: usize,
    pub seed: u64,
    pub backend: String,
    pub packets_sent: u64,
    pub packets_delivered: u64,
    pub packets_dropped: u64,
    pub dropped_by_loss: u64,
    pub pdr: Option<f64>,
    pub avg_delay_ms: Option<f64>,
    pub auths_completed: u64,
    pub reports_sent: u64,
    pub alerts: u64,
    pub reports_extracted: u64,
    pub vehicle_auth_cost: Option<f64>,
    pub rsu_auth_cost: Option<f64>,
    pub vehicle_report_cost: Option<f64>,
    pub rsu_report_cost: Option<f64>,
    pub cs_process_cost: Option<f64>,
    pub aa_process_cost: Option<f64>,
    pub vehicle_total_cost: f64,
    pub rsu_total_cost: f64,
    pub cs_total_cost: f64,
    pub aa_total_cost: f64,
    pub log_sha256: String,
}

impl RunRecord {
    pub fn new(scenario: &Scenario, m: &Metrics, log_sha256: String) -> Self {
        let mean = |k: &str| m.subtasks.get(k).map(|s| s.mean_cost);
        let total = |k: &str| m.entity_costs.get(k).copied().unwrap_or(0.0);
        Self {
            vehicles: scenario.vehicles.count,
            seed: scenario.sim.seed,
            backend: scenario.protocol.backend.name().to_string(),
            packets_sent: m.packets_sent,
            packets_delivered: m.packets_delivered,
            packets_dropped: m.packets_dropped,
            dropped_by_loss: m.dropped_by_loss,
            pdr: m.pdr,
            avg_delay_ms: m.avg_delay_ms,
            auths_completed: m.auths_completed,
            reports_sent: m.reports_sent,
            alerts: m.alerts,
            reports_extracted: m.reports_extracted,
            vehicle_auth_cost: mean(steps::VEHICLE_AUTH),
            rsu_auth_cost: mean(steps::RSU_AUTH),
            vehicle_report_cost: mean(steps::VEHICLE_REPORT),
            rsu_report_cost: mean(steps::RSU_REPORT),
            cs_process_cost: mean(steps::CS_PROCESS),
            aa_process_cost: mean(steps::AA_PROCESS),
            vehicle_total_cost: total("vehicle"),
            rsu_total_cost: total("rsu"),
            cs_total_cost: total("cs"),
            aa_total_cost: total("aa"),
            log_sha256,
        }
    }
}

/// Seed-averaged metrics for one vehicle count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub vehicles: usize,
    pub runs: usize,
    pub mean_pdr: f64,
    pub mean_delay_ms: f64,
}

/// Runs `base` once per (count, seed) pair in parallel. Records come back
/// ordered by count, then seed.
pub fn sweep(
    base: &Scenario,
    counts: &[usize],
    seeds: &[u64],
) -> Result<Vec<RunRecord>, ScenarioError> {
    base.validate()?;
    let jobs: Vec<(usize, u64)> = counts
        .iter()
        .flat_map(|&n| seeds.iter().map(move |&s| (n, s)))
        .collect();
    jobs.into_par_iter()
        .map(|(n, seed)| {
            let mut sc = base.clone();
            sc.vehicles.count = n;
            sc.sim.seed = seed;
            let out = run(&sc)?;
            Ok(RunRecord::new(&sc, &out.metrics, out.log.digest_hex()))
        })
        .collect()
}

/// Averages records sharing a vehicle count. Runs without a defined PDR or
/// delay are left out of that mean.
pub fn summarize(records: &[RunRecord]) -> Vec<SweepPoint> {
    let mut counts: Vec<usize> = records.iter().map(|r| r.vehicles).collect();
    counts.dedup();
    counts
        .into_iter()
        .map(|n| {
            let rows: Vec<&RunRecord> = records.iter().filter(|r| r.vehicles == n).collect();
            let mean = |xs: Vec<f64>| {
                if xs.is_empty() {
                    f64::NAN
                } else {
                    xs.iter().sum::<f64>() / xs.len() as f64
                }
            };
            SweepPoint {
                vehicles: n,
                runs: rows.len(),
                mean_pdr: mean(rows.iter().filter_map(|r| r.pdr).collect()),
                mean_delay_ms: mean(rows.iter().filter_map(|r| r.avg_delay_ms).collect()),
            }
        })
        .collect()
}

pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
