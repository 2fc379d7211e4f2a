//! Run configuration: one TOML file carrying every module threshold,
//! validated exhaustively at load time (every violation reported, not
//! just the first), hashed for output provenance.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// master seed for every stochastic component
    pub seed: u64,
    pub association: AssociationConfig,
    pub kinematics: KinematicsConfig,
    pub filter: FilterConfig,
    pub density: DensityConfig,
    pub anomaly: AnomalyConfig,
    pub assess: AssessConfig,
    pub netrisk: NetriskConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssociationConfig {
    /// association gate, km
    pub gate_km: f64,
    /// longest AIS hole that still interpolates, seconds
    pub max_gap_s: i64,
    /// half-width of the scene-relevance window around the image time
    pub window_s: i64,
    /// how far to look for a gap that explains an unmatched detection, km
    pub bracket_search_km: f64,
    /// fall back to long-term prediction for blacked-out tracks
    pub use_predictions: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KinematicsConfig {
    pub drift_threshold_kn: f64,
    pub turn_threshold_deg: f64,
    pub dedup_window_s: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub d_max_km: f64,
    pub t_min_s: i64,
    pub s_max_kn: f64,
    pub manoeuvre_rate_min: Option<f64>,
    pub min_length_m: Option<f64>,
    pub depth_gate_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensityConfig {
    pub cell_deg: f64,
    pub eps_m: f64,
    pub min_pts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnomalyConfig {
    pub min_gap_s: i64,
    pub report_floor: f64,
    pub loiter_normalcy_max: f64,
    pub search_min_cycles: usize,
    pub route_dev_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssessConfig {
    pub rule_file: String,
    /// cap on the status-inconsistency mass
    pub status_cap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetriskConfig {
    /// cascade tolerance: capacity = alpha * initial load
    pub alpha: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            association: AssociationConfig::default(),
            kinematics: KinematicsConfig::default(),
            filter: FilterConfig::default(),
            density: DensityConfig::default(),
            anomaly: AnomalyConfig::default(),
            assess: AssessConfig::default(),
            netrisk: NetriskConfig::default(),
        }
    }
}

impl Default for AssociationConfig {
    fn default() -> Self {
        AssociationConfig {
            gate_km: 3.0,
            max_gap_s: 21_600,
            window_s: 600,
            bracket_search_km: 50.0,
            use_predictions: false,
        }
    }
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        KinematicsConfig {
            drift_threshold_kn: 3.0,
            turn_threshold_deg: 30.0,
            dedup_window_s: 0,
        }
    }
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            d_max_km: 5.0,
            t_min_s: 3600,
            s_max_kn: 3.0,
            manoeuvre_rate_min: None,
            min_length_m: None,
            depth_gate_m: None,
        }
    }
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            cell_deg: 0.05,
            eps_m: 1000.0,
            min_pts: 5,
        }
    }
}

impl Default for AnomalyConfig {
    fn default() -> Self {
        AnomalyConfig {
            min_gap_s: 21_600,
            report_floor: 0.1,
            loiter_normalcy_max: 0.2,
            search_min_cycles: 3,
            route_dev_threshold: 0.05,
        }
    }
}

impl Default for AssessConfig {
    fn default() -> Self {
        AssessConfig {
            rule_file: "data/default.rules".into(),
            status_cap: 0.9,
        }
    }
}

impl Default for NetriskConfig {
    fn default() -> Self {
        NetriskConfig { alpha: 1.25 }
    }
}

impl RunConfig {
    /// Loads the TOML file (or defaults when `path` is `None`) and
    /// applies the seed override. Every validation violation is
    /// reported.
    pub fn load(path: Option<&Path>, seed_override: Option<u64>) -> Result<RunConfig, CliError> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| {
                    CliError::Input(format!("cannot read config {}: {e}", p.display()))
                })?;
                toml::from_str(&text).map_err(|e| {
                    CliError::Input(format!("bad config {}: {e}", p.display()))
                })?
            }
            None => RunConfig::default(),
        };
        if let Some(seed) = seed_override {
            cfg.seed = seed;
        }
        let violations = cfg.validate();
        if !violations.is_empty() {
            return Err(CliError::Input(format!(
                "invalid configuration:\n  - {}",
                violations.join("\n  - ")
            )));
        }
        Ok(cfg)
    }

    /// All violations, not just the first.
    pub fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut require = |ok: bool, msg: &str| {
            if !ok {
                v.push(msg.to_string());
            }
        };
        require(self.association.gate_km > 0.0, "association.gate_km must be > 0");
        require(self.association.max_gap_s > 0, "association.max_gap_s must be > 0");
        require(self.association.window_s > 0, "association.window_s must be > 0");
        require(
            self.association.bracket_search_km > 0.0,
            "association.bracket_search_km must be > 0",
        );
        require(
            self.kinematics.drift_threshold_kn > 0.0,
            "kinematics.drift_threshold_kn must be > 0",
        );
        require(
            self.kinematics.turn_threshold_deg > 0.0,
            "kinematics.turn_threshold_deg must be > 0",
        );
        require(
            self.kinematics.dedup_window_s >= 0,
            "kinematics.dedup_window_s must be >= 0",
        );
        require(self.filter.d_max_km > 0.0, "filter.d_max_km must be > 0");
        require(self.filter.t_min_s > 0, "filter.t_min_s must be > 0");
        require(self.filter.s_max_kn >= 0.0, "filter.s_max_kn must be >= 0");
        if let Some(r) = self.filter.manoeuvre_rate_min {
            require(r > 0.0, "filter.manoeuvre_rate_min must be > 0 when set");
        }
        if let Some(l) = self.filter.min_length_m {
            require(l > 0.0, "filter.min_length_m must be > 0 when set");
        }
        if let Some(d) = self.filter.depth_gate_m {
            require(d > 0.0, "filter.depth_gate_m must be > 0 when set");
        }
        require(self.density.cell_deg > 0.0, "density.cell_deg must be > 0");
        require(self.density.eps_m > 0.0, "density.eps_m must be > 0");
        require(self.density.min_pts >= 1, "density.min_pts must be >= 1");
        require(self.anomaly.min_gap_s > 0, "anomaly.min_gap_s must be > 0");
        require(
            (0.0..=1.0).contains(&self.anomaly.report_floor),
            "anomaly.report_floor must be in [0, 1]",
        );
        require(
            (0.0..=1.0).contains(&self.anomaly.loiter_normalcy_max),
            "anomaly.loiter_normalcy_max must be in [0, 1]",
        );
        require(
            self.anomaly.search_min_cycles >= 1,
            "anomaly.search_min_cycles must be >= 1",
        );
        require(
            (0.0..=1.0).contains(&self.anomaly.route_dev_threshold),
            "anomaly.route_dev_threshold must be in [0, 1]",
        );
        require(!self.assess.rule_file.is_empty(), "assess.rule_file must be set");
        require(
            (0.0..=1.0).contains(&self.assess.status_cap),
            "assess.status_cap must be in [0, 1]",
        );
        require(self.netrisk.alpha >= 1.0, "netrisk.alpha must be >= 1");
        v
    }

    /// Canonical serialization used for hashing and provenance.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical_toml().as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Short prefix used in run-directory names.
    pub fn short_hash(&self) -> String {
        self.hash()[..12].to_string()
    }

    pub fn detector_config(&self) -> uciwatch_core::anomaly::DetectorConfig {
        uciwatch_core::anomaly::DetectorConfig {
            min_gap_s: self.anomaly.min_gap_s,
            report_floor: self.anomaly.report_floor,
            loiter_normalcy_max: self.anomaly.loiter_normalcy_max,
            search_min_cycles: self.anomaly.search_min_cycles,
            route_dev_threshold: self.anomaly.route_dev_threshold,
            ..uciwatch_core::anomaly::DetectorConfig::default()
        }
    }

    pub fn filter_criteria(&self) -> uciwatch_core::uci::FilterCriteria {
        uciwatch_core::uci::FilterCriteria {
            d_max_km: self.filter.d_max_km,
            t_min_s: self.filter.t_min_s,
            s_max_kn: self.filter.s_max_kn,
            manoeuvre_rate_min: self.filter.manoeuvre_rate_min,
            min_length_m: self.filter.min_length_m,
            depth_gate_m: self.filter.depth_gate_m,
            turn_threshold_deg: self.kinematics.turn_threshold_deg,
            drift_threshold_kn: self.kinematics.drift_threshold_kn,
        }
    }
}
