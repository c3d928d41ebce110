//! Node energy model: per-bit sensing and link costs, power budget and
//! battery lifetime.
//!
//! Total energy for a block of sensed bits is
//! `bits * (eta_sensing + eta_comm)`; in rate form the node draws
//! `rate * (eta_sensing(rate) + eta_comm) / system_efficiency` watts, where
//! `system_efficiency` accounts for regulator and platform losses.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::units;

fn check_positive(what: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(ModelError::domain(what, value, "must be finite"));
    }
    if value <= 0.0 {
        return Err(ModelError::domain(what, value, "must be positive"));
    }
    Ok(value)
}

fn check_non_negative(what: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(ModelError::domain(what, value, "must be finite"));
    }
    if value < 0.0 {
        return Err(ModelError::domain(what, value, "must not be negative"));
    }
    Ok(value)
}

/// Per-bit sensing energy as a function of data rate: a straight line in
/// log10/log10 space, clamped from below by a plateau floor.
///
/// `log10(eta) = slope * log10(rate) + intercept` with `eta` in J/bit and
/// `rate` in bit/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyModel {
    slope: f64,
    intercept: f64,
    plateau_floor: f64,
    rate_min: f64,
    rate_max: f64,
}

impl EfficiencyModel {
    pub fn new(
        slope: f64,
        intercept: f64,
        plateau_floor: f64,
        rate_min: f64,
        rate_max: f64,
    ) -> Result<Self> {
        if !slope.is_finite() {
            return Err(ModelError::domain("slope", slope, "must be finite"));
        }
        if !intercept.is_finite() {
            return Err(ModelError::domain("intercept", intercept, "must be finite"));
        }
        check_positive("plateau floor", plateau_floor)?;
        check_positive("valid rate minimum", rate_min)?;
        if rate_max.is_nan() || rate_max <= rate_min {
            return Err(ModelError::domain(
                "valid rate maximum",
                rate_max,
                "must exceed the valid rate minimum",
            ));
        }
        Ok(EfficiencyModel {
            slope,
            intercept,
            plateau_floor,
            rate_min,
            rate_max,
        })
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn plateau_floor(&self) -> f64 {
        self.plateau_floor
    }

    pub fn rate_min(&self) -> f64 {
        self.rate_min
    }

    pub fn rate_max(&self) -> f64 {
        self.rate_max
    }

    /// The fitted line without the plateau clamp.
    pub fn line_value(&self, rate: f64) -> f64 {
        10f64.powf(self.slope * rate.log10() + self.intercept)
    }

    pub fn efficiency(&self, rate: f64) -> Result<f64> {
        check_positive("rate", rate)?;
        Ok(self.line_value(rate).max(self.plateau_floor))
    }

    /// Node power grows with rate only while `slope > -1`; steeper lines
    /// make the sensing power fall with rate until the plateau.
    pub fn power_is_monotone(&self) -> bool {
        self.slope > -1.0
    }
}

/// Sensing cost used by a node: either a fitted curve or a constant
/// per-bit figure (the plateau alone).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SensingModel {
    Fitted(EfficiencyModel),
    Plateau { floor: f64 },
}

impl SensingModel {
    pub fn plateau(floor: f64) -> Result<Self> {
        check_positive("plateau floor", floor)?;
        Ok(SensingModel::Plateau { floor })
    }

    pub fn efficiency(&self, rate: f64) -> Result<f64> {
        match self {
            SensingModel::Fitted(m) => m.efficiency(rate),
            SensingModel::Plateau { floor } => {
                check_positive("rate", rate)?;
                Ok(*floor)
            }
        }
    }

    pub fn plateau_floor(&self) -> f64 {
        match self {
            SensingModel::Fitted(m) => m.plateau_floor,
            SensingModel::Plateau { floor } => *floor,
        }
    }

    /// Rates over which the model is meaningful. A constant model has no
    /// bounds of its own.
    pub fn valid_range(&self) -> (f64, f64) {
        match self {
            SensingModel::Fitted(m) => (m.rate_min, m.rate_max),
            SensingModel::Plateau { .. } => (f64::MIN_POSITIVE, f64::INFINITY),
        }
    }

    pub fn power_is_monotone(&self) -> bool {
        match self {
            SensingModel::Fitted(m) => m.power_is_monotone(),
            SensingModel::Plateau { .. } => true,
        }
    }
}

impl From<EfficiencyModel> for SensingModel {
    fn from(m: EfficiencyModel) -> Self {
        SensingModel::Fitted(m)
    }
}

/// A communication link with a constant per-bit energy cost.
#[derive(Debug, Clone, PartialEq)]
pub struct CommProtocol {
    name: String,
    energy_per_bit: f64,
    max_rate: f64,
    range_note: String,
}

impl CommProtocol {
    pub fn new(name: impl Into<String>, energy_per_bit: f64, max_rate: f64) -> Result<Self> {
        check_positive("link energy per bit", energy_per_bit)?;
        if max_rate.is_nan() || max_rate <= 0.0 {
            return Err(ModelError::domain("link maximum rate", max_rate, "must be positive"));
        }
        Ok(CommProtocol {
            name: name.into(),
            energy_per_bit,
            max_rate,
            range_note: String::new(),
        })
    }

    pub fn with_range_note(mut self, note: impl Into<String>) -> Self {
        self.range_note = note.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn energy_per_bit(&self) -> f64 {
        self.energy_per_bit
    }

    pub fn max_rate(&self) -> f64 {
        self.max_rate
    }

    pub fn range_note(&self) -> &str {
        &self.range_note
    }
}

/// Ideal energy reservoir described the way coin cells are sold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Battery {
    capacity_mah: f64,
    voltage: f64,
}

impl Battery {
    pub const DEFAULT_VOLTAGE: f64 = 3.0;

    pub fn new(capacity_mah: f64, voltage: f64) -> Result<Self> {
        check_positive("battery capacity", capacity_mah)?;
        check_positive("battery voltage", voltage)?;
        Ok(Battery {
            capacity_mah,
            voltage,
        })
    }

    /// A 3 V lithium coin cell of the given capacity.
    pub fn coin_cell(capacity_mah: f64) -> Result<Self> {
        Self::new(capacity_mah, Self::DEFAULT_VOLTAGE)
    }

    pub fn capacity_mah(&self) -> f64 {
        self.capacity_mah
    }

    pub fn voltage(&self) -> f64 {
        self.voltage
    }

    pub fn energy(&self) -> f64 {
        units::mah_volts_to_joules(self.capacity_mah, self.voltage)
    }
}

/// Range of harvested power a node can count on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestBand {
    p_min: f64,
    p_max: f64,
}

impl HarvestBand {
    pub fn new(p_min: f64, p_max: f64) -> Result<Self> {
        check_non_negative("harvest minimum", p_min)?;
        check_non_negative("harvest maximum", p_max)?;
        if p_max < p_min {
            return Err(ModelError::domain(
                "harvest maximum",
                p_max,
                "must not be below the harvest minimum",
            ));
        }
        Ok(HarvestBand { p_min, p_max })
    }

    /// Indoor body-worn harvesting, 50 uW to 400 uW.
    pub fn indoor() -> Self {
        HarvestBand {
            p_min: 50e-6,
            p_max: 400e-6,
        }
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeConfig {
    sensing: SensingModel,
    comm: CommProtocol,
    system_efficiency: f64,
    battery: Option<Battery>,
    harvest: Option<HarvestBand>,
}

impl NodeConfig {
    pub fn new(sensing: SensingModel, comm: CommProtocol, system_efficiency: f64) -> Result<Self> {
        if !(system_efficiency > 0.0 && system_efficiency <= 1.0) {
            return Err(ModelError::domain(
                "system efficiency",
                system_efficiency,
                "must lie in (0, 1]",
            ));
        }
        Ok(NodeConfig {
            sensing,
            comm,
            system_efficiency,
            battery: None,
            harvest: None,
        })
    }

    pub fn with_battery(mut self, battery: Battery) -> Self {
        self.battery = Some(battery);
        self
    }

    pub fn with_harvest(mut self, harvest: HarvestBand) -> Self {
        self.harvest = Some(harvest);
        self
    }

    pub fn sensing(&self) -> &SensingModel {
        &self.sensing
    }

    pub fn comm(&self) -> &CommProtocol {
        &self.comm
    }

    pub fn system_efficiency(&self) -> f64 {
        self.system_efficiency
    }

    pub fn battery(&self) -> Option<&Battery> {
        self.battery.as_ref()
    }

    pub fn harvest(&self) -> Option<&HarvestBand> {
        self.harvest.as_ref()
    }

    /// Returns a copy with a different system efficiency, validated.
    pub fn with_system_efficiency(&self, system_efficiency: f64) -> Result<Self> {
        let mut out = NodeConfig::new(self.sensing, self.comm.clone(), system_efficiency)?;
        out.battery = self.battery;
        out.harvest = self.harvest;
        Ok(out)
    }

    pub fn node_power(&self, rate: f64) -> Result<f64> {
        node_power(rate, self)
    }
}

/// Sensing energy per bit at `rate`: the fitted line, never below the plateau.
pub fn sensing_efficiency(rate: f64, model: &EfficiencyModel) -> Result<f64> {
    model.efficiency(rate)
}

/// Energy to sense and ship `bits_sensed` bits.
pub fn total_energy(bits_sensed: f64, eta_sensing: f64, eta_comm: f64) -> Result<f64> {
    check_non_negative("bits sensed", bits_sensed)?;
    check_non_negative("sensing energy per bit", eta_sensing)?;
    check_non_negative("link energy per bit", eta_comm)?;
    Ok(bits_sensed * (eta_sensing + eta_comm))
}

/// Power drawn from the battery/harvester to sustain `rate`.
pub fn node_power(rate: f64, config: &NodeConfig) -> Result<f64> {
    check_positive("rate", rate)?;
    let comm = &config.comm;
    if rate > comm.max_rate {
        return Err(ModelError::Capability {
            protocol: comm.name.clone(),
            rate,
            max_rate: comm.max_rate,
        });
    }
    let eta_s = config.sensing.efficiency(rate)?;
    Ok(rate * (eta_s + comm.energy_per_bit) / config.system_efficiency)
}

pub fn battery_energy(battery: &Battery) -> f64 {
    battery.energy()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lifetime {
    /// Seconds until the battery is empty.
    Finite(f64),
    Perpetual,
}

impl Lifetime {
    pub fn seconds(&self) -> Option<f64> {
        match self {
            Lifetime::Finite(s) => Some(*s),
            Lifetime::Perpetual => None,
        }
    }

    pub fn hours(&self) -> Option<f64> {
        self.seconds().map(units::seconds_to_hours)
    }

    pub fn is_perpetual(&self) -> bool {
        matches!(self, Lifetime::Perpetual)
    }
}

/// Battery life under a constant load, net of any constant harvest.
pub fn lifetime(battery: &Battery, load_power: f64, harvest_power: f64) -> Result<Lifetime> {
    check_positive("load power", load_power)?;
    check_non_negative("harvest power", harvest_power)?;
    if harvest_power >= load_power {
        return Ok(Lifetime::Perpetual);
    }
    Ok(Lifetime::Finite(battery.energy() / (load_power - harvest_power)))
}
