use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::ForwardPolicy;
use crate::protocol::{RoadCondition, SecurityProfile, DEFAULT_DELTA_T_MS};

use super::metrics::UnitCosts;

/// Environment variable naming the default scenario file.
pub const CONFIG_ENV: &str = "RCM_CONFIG";

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid scenario: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StreetConfig {
    pub length_m: f64,
    pub lanes: u32,
}

impl Default for StreetConfig {
    fn default() -> Self {
        Self {
            length_m: 1000.0,
            lanes: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RsuConfig {
    pub spacing_m: f64,
}

impl Default for RsuConfig {
    fn default() -> Self {
        Self { spacing_m: 200.0 }
    }
}

/// Per-packet wireless delay is
/// `base_latency_ms + per_station_ms * stations + U(0, jitter_ms)`, where
/// `stations` counts vehicles within range of the RSU end of the link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioConfig {
    pub range_m: f64,
    pub base_latency_ms: f64,
    pub per_station_ms: f64,
    pub jitter_ms: f64,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            range_m: 300.0,
            base_latency_ms: 2.0,
            per_station_ms: 0.05,
            jitter_ms: 1.0,
        }
    }
}

/// Drop probability as a piecewise-linear function of the station count,
/// given as `[stations, probability]` points. An empty curve never drops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossConfig {
    pub curve: Vec<[f64; 2]>,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            curve: vec![[0.0, 0.0], [20.0, 0.01], [100.0, 0.1]],
        }
    }
}

impl LossConfig {
    pub fn zero() -> Self {
        Self { curve: Vec::new() }
    }

    pub fn probability(&self, stations: usize) -> f64 {
        let x = stations as f64;
        let Some(first) = self.curve.first() else {
            return 0.0;
        };
        if x <= first[0] {
            return first[1];
        }
        for w in self.curve.windows(2) {
            let ([x0, y0], [x1, y1]) = (w[0], w[1]);
            if x <= x1 {
                return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
            }
        }
        self.curve.last().map_or(0.0, |p| p[1])
    }
}

/// Wired links are lossless with a fixed latency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackboneConfig {
    pub rsu_cs_ms: f64,
    pub cs_aa_ms: f64,
}

impl Default for BackboneConfig {
    fn default() -> Self {
        Self {
            rsu_cs_ms: 2.0,
            cs_aa_ms: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VehicleConfig {
    pub count: usize,
    pub min_speed_mps: f64,
    pub max_speed_mps: f64,
    /// Vehicle `i` enters the street at `i * spawn_interval_ms`.
    pub spawn_interval_ms: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        Self {
            count: 30,
            min_speed_mps: 10.0,
            max_speed_mps: 20.0,
            spawn_interval_ms: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BeaconConfig {
    /// 100 ms is a more usual 802.11 beacon interval.
    pub period_ms: f64,
}

impl Default for BeaconConfig {
    fn default() -> Self {
        Self { period_ms: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Incident {
    pub x_m: f64,
    pub condition: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReportConfig {
    /// How often each vehicle checks for a nearby incident to report.
    pub period_ms: f64,
    pub radius_m: f64,
    pub incidents: Vec<Incident>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            period_ms: 2000.0,
            radius_m: 50.0,
            incidents: vec![
                Incident {
                    x_m: 450.0,
                    condition: "accident".into(),
                },
                Incident {
                    x_m: 720.0,
                    condition: "pothole".into(),
                },
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolConfig {
    pub backend: SecurityProfile,
    pub tau: u32,
    pub delta_t_ms: u64,
    pub dedupe_alerts: bool,
    pub forward: ForwardPolicy,
    pub eviction_horizon_ms: u64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            backend: SecurityProfile::Toy,
            tau: 2,
            delta_t_ms: DEFAULT_DELTA_T_MS,
            dedupe_alerts: false,
            forward: ForwardPolicy::Newest,
            eviction_horizon_ms: 10 * 60 * 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub duration_s: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            duration_s: 300.0,
            seed: 1,
        }
    }
}

/// A complete simulation setup. Every section and key is optional in the
/// file form.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Scenario {
    pub street: StreetConfig,
    pub rsu: RsuConfig,
    pub radio: RadioConfig,
    pub loss: LossConfig,
    pub backbone: BackboneConfig,
    pub vehicles: VehicleConfig,
    pub beacon: BeaconConfig,
    pub reports: ReportConfig,
    pub protocol: ProtocolConfig,
    pub costs: UnitCosts,
    pub sim: RunConfig,
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        key,
        reason: reason.into(),
    }
}

fn positive(key: &'static str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(key: &'static str, v: f64) -> Result<(), ScenarioError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("must be non-negative, got {v}")))
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn rsu_count(&self) -> usize {
        (self.street.length_m / self.rsu.spacing_m).ceil() as usize
    }

    /// RSU `j` sits in the middle of its zone `[j*spacing, (j+1)*spacing)`.
    pub fn rsu_position(&self, j: usize) -> f64 {
        let s = self.rsu.spacing_m;
        let lo = j as f64 * s;
        (lo + (lo + s).min(self.street.length_m)) / 2.0
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        positive("street.length_m", self.street.length_m)?;
        if self.street.lanes == 0 {
            return Err(invalid("street.lanes", "at least one lane is required"));
        }
        positive("rsu.spacing_m", self.rsu.spacing_m)?;
        positive("radio.range_m", self.radio.range_m)?;
        if self.rsu.spacing_m > 2.0 * self.radio.range_m {
            return Err(invalid(
                "rsu.spacing_m",
                format!(
                    "spacing {} m leaves gaps: it exceeds twice the radio range ({} m)",
                    self.rsu.spacing_m,
                    2.0 * self.radio.range_m
                ),
            ));
        }
        non_negative("radio.base_latency_ms", self.radio.base_latency_ms)?;
        non_negative("radio.per_station_ms", self.radio.per_station_ms)?;
        non_negative("radio.jitter_ms", self.radio.jitter_ms)?;
        let mut prev: Option<[f64; 2]> = None;
        for &[x, p] in &self.loss.curve {
            if !(x.is_finite() && x >= 0.0 && (0.0..=1.0).contains(&p)) {
                return Err(invalid("loss.curve", format!("bad point [{x}, {p}]")));
            }
            if let Some([px, pp]) = prev {
                if x <= px || p < pp {
                    return Err(invalid(
                        "loss.curve",
                        "points must have increasing station counts and non-decreasing probability",
                    ));
                }
            }
            prev = Some([x, p]);
        }
        non_negative("backbone.rsu_cs_ms", self.backbone.rsu_cs_ms)?;
        non_negative("backbone.cs_aa_ms", self.backbone.cs_aa_ms)?;
        positive("vehicles.min_speed_mps", self.vehicles.min_speed_mps)?;
        if self.vehicles.max_speed_mps < self.vehicles.min_speed_mps
            || !self.vehicles.max_speed_mps.is_finite()
        {
            return Err(invalid(
                "vehicles.max_speed_mps",
                "must be at least min_speed_mps",
            ));
        }
        non_negative(
            "vehicles.spawn_interval_ms",
            self.vehicles.spawn_interval_ms,
        )?;
        if !(self.beacon.period_ms.is_finite() && self.beacon.period_ms >= 0.001) {
            return Err(invalid("beacon.period_ms", "must be at least 0.001 ms"));
        }
        positive("reports.period_ms", self.reports.period_ms)?;
        non_negative("reports.radius_m", self.reports.radius_m)?;
        for inc in &self.reports.incidents {
            if inc.condition.parse::<RoadCondition>().is_err() {
                return Err(invalid(
                    "reports.incidents.condition",
                    format!("unknown condition {:?}", inc.condition),
                ));
            }
            if !(0.0..=self.street.length_m).contains(&inc.x_m) {
                return Err(invalid("reports.incidents.x_m", "must lie on the street"));
            }
        }
        if self.protocol.tau == 0 {
            return Err(invalid("protocol.tau", "must be positive"));
        }
        if self.protocol.delta_t_ms == 0 {
            return Err(invalid("protocol.delta_t_ms", "must be positive"));
        }
        self.costs.validate()?;
        positive("sim.duration_s", self.sim.duration_s)?;
        Ok(())
    }
}

/// Reads and validates a TOML scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_toml_str(&text)
}
