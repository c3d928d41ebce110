//! JSON node configuration documents and the built-in presets.
//!
//! ```json
//! {"sensing": {"mode": "plateau", "plateau_j_per_bit": 7e-10},
//!  "comm": {"name": "wir", "energy_per_bit_j": 1e-10, "max_rate_bps": 1e8},
//!  "system_efficiency": 0.4,
//!  "battery": {"capacity_mah": 1000, "voltage_v": 3.0},
//!  "harvest": {"p_min_w": 5e-5, "p_max_w": 4e-4}}
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ModelError};
use crate::model::{Battery, CommProtocol, EfficiencyModel, HarvestBand, NodeConfig, SensingModel};

/// Valid rate range assumed for a fitted model when the document omits it.
pub const DEFAULT_FIT_RANGE: (f64, f64) = (1.0, 1e8);

/// Link rate cap used by the presets; wide enough to sweep 1 bit/s to 100 Mbit/s.
pub const PRESET_MAX_RATE: f64 = 1e8;

pub const PRESET_NAMES: [&str; 3] = ["bluetooth", "wir", "wir-future"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensingMode {
    Fitted,
    Plateau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingSpec {
    pub mode: SensingMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept_c: Option<f64>,
    pub plateau_j_per_bit: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_min_bps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_max_bps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CommSpec {
    pub name: String,
    pub energy_per_bit_j: f64,
    pub max_rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatterySpec {
    pub capacity_mah: f64,
    #[serde(default = "default_voltage")]
    pub voltage_v: f64,
}

fn default_voltage() -> f64 {
    Battery::DEFAULT_VOLTAGE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarvestSpec {
    pub p_min_w: f64,
    pub p_max_w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfigFile {
    pub sensing: SensingSpec,
    pub comm: CommSpec,
    pub system_efficiency: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery: Option<BatterySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub harvest: Option<HarvestSpec>,
}

fn invalid(path: &str) -> impl FnOnce(ModelError) -> ConfigError + '_ {
    move |source| ConfigError::Invalid {
        path: path.to_string(),
        source,
    }
}

fn required(path: &str, v: Option<f64>) -> Result<f64, ConfigError> {
    v.ok_or_else(|| ConfigError::Parse {
        path: path.to_string(),
        message: "required when sensing.mode is \"fitted\"".into(),
    })
}

impl NodeConfigFile {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ConfigError::Parse {
                path: if path.is_empty() { ".".into() } else { path },
                message: e.into_inner().to_string(),
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config documents always serialize")
    }

    /// Validates every field and builds the model configuration.
    pub fn build(&self) -> Result<NodeConfig, ConfigError> {
        let s = &self.sensing;
        let sensing = match s.mode {
            SensingMode::Plateau => {
                SensingModel::plateau(s.plateau_j_per_bit).map_err(invalid("sensing.plateau_j_per_bit"))?
            }
            SensingMode::Fitted => {
                let slope = required("sensing.slope_m", s.slope_m)?;
                let intercept = required("sensing.intercept_c", s.intercept_c)?;
                let lo = s.rate_min_bps.unwrap_or(DEFAULT_FIT_RANGE.0);
                let hi = s.rate_max_bps.unwrap_or(DEFAULT_FIT_RANGE.1);
                let path = match () {
                    _ if !(s.plateau_j_per_bit > 0.0) => "sensing.plateau_j_per_bit",
                    _ if !(lo > 0.0) => "sensing.rate_min_bps",
                    _ if !slope.is_finite() => "sensing.slope_m",
                    _ if !intercept.is_finite() => "sensing.intercept_c",
                    _ => "sensing.rate_max_bps",
                };
                SensingModel::Fitted(
                    EfficiencyModel::new(slope, intercept, s.plateau_j_per_bit, lo, hi).map_err(invalid(path))?,
                )
            }
        };
        let comm = CommProtocol::new(&self.comm.name, self.comm.energy_per_bit_j, self.comm.max_rate_bps)
            .map_err(|e| {
                let path = if matches!(e, ModelError::Domain { what: "link maximum rate", .. }) {
                    "comm.max_rate_bps"
                } else {
                    "comm.energy_per_bit_j"
                };
                invalid(path)(e)
            })?;
        let mut cfg = NodeConfig::new(sensing, comm, self.system_efficiency).map_err(invalid("system_efficiency"))?;
        if let Some(b) = &self.battery {
            let battery = Battery::new(b.capacity_mah, b.voltage_v).map_err(|e| {
                let path = if b.capacity_mah > 0.0 && b.capacity_mah.is_finite() {
                    "battery.voltage_v"
                } else {
                    "battery.capacity_mah"
                };
                invalid(path)(e)
            })?;
            cfg = cfg.with_battery(battery);
        }
        if let Some(h) = &self.harvest {
            let band = HarvestBand::new(h.p_min_w, h.p_max_w).map_err(|e| {
                let path = if h.p_min_w >= 0.0 && h.p_min_w.is_finite() {
                    "harvest.p_max_w"
                } else {
                    "harvest.p_min_w"
                };
                invalid(path)(e)
            })?;
            cfg = cfg.with_harvest(band);
        }
        Ok(cfg)
    }

    /// Document describing an existing configuration.
    pub fn from_config(cfg: &NodeConfig) -> Self {
        let sensing = match cfg.sensing() {
            SensingModel::Plateau { floor } => SensingSpec {
                mode: SensingMode::Plateau,
                slope_m: None,
                intercept_c: None,
                plateau_j_per_bit: *floor,
                rate_min_bps: None,
                rate_max_bps: None,
            },
            SensingModel::Fitted(m) => SensingSpec {
                mode: SensingMode::Fitted,
                slope_m: Some(m.slope()),
                intercept_c: Some(m.intercept()),
                plateau_j_per_bit: m.plateau_floor(),
                rate_min_bps: Some(m.rate_min()),
                rate_max_bps: Some(m.rate_max()),
            },
        };
        NodeConfigFile {
            sensing,
            comm: CommSpec {
                name: cfg.comm().name().to_string(),
                energy_per_bit_j: cfg.comm().energy_per_bit(),
                max_rate_bps: cfg.comm().max_rate(),
            },
            system_efficiency: cfg.system_efficiency(),
            battery: cfg.battery().map(|b| BatterySpec {
                capacity_mah: b.capacity_mah(),
                voltage_v: b.voltage(),
            }),
            harvest: cfg.harvest().map(|h| HarvestSpec {
                p_min_w: h.p_min(),
                p_max_w: h.p_max(),
            }),
        }
    }
}

pub fn parse_config(text: &str) -> Result<NodeConfig, ConfigError> {
    NodeConfigFile::from_json(text)?.build()
}

/// Built-in preset document: plateau sensing at 0.7 nJ/bit, 40 % system
/// efficiency, a 1000 mAh 3 V cell and the indoor harvest band.
pub fn preset_file(name: &str) -> Option<NodeConfigFile> {
    let energy_per_bit_j = match name {
        "bluetooth" => 15e-9,
        "wir" => 100e-12,
        "wir-future" => 10e-12,
        _ => return None,
    };
    Some(NodeConfigFile {
        sensing: SensingSpec {
            mode: SensingMode::Plateau,
            slope_m: None,
            intercept_c: None,
            plateau_j_per_bit: 0.7e-9,
            rate_min_bps: None,
            rate_max_bps: None,
        },
        comm: CommSpec {
            name: name.to_string(),
            energy_per_bit_j,
            max_rate_bps: PRESET_MAX_RATE,
        },
        system_efficiency: 0.4,
        battery: Some(BatterySpec {
            capacity_mah: 1000.0,
            voltage_v: 3.0,
        }),
        harvest: Some(HarvestSpec {
            p_min_w: 50e-6,
            p_max_w: 400e-6,
        }),
    })
}

pub fn preset(name: &str) -> Result<NodeConfig, ConfigError> {
    preset_file(name)
        .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))?
        .build()
}
