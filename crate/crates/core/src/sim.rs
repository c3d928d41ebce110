//! Discrete-time battery simulator.
//!
//! Forward Euler with piecewise-constant power over each step:
//! `E(t+dt) = clamp(E(t) + (P_h(t) - P_load) * dt, 0, E_cap)`, starting
//! full. It shares no code with the closed-form lifetime in [`crate::model`]
//! beyond [`node_power`], so the two can check each other.

use std::io::{Read, Write};

use crate::error::{IngestError, ModelError, Result};
use crate::model::{node_power, Lifetime, NodeConfig};
use crate::numfmt::sci;

/// Default step, seconds.
pub const DEFAULT_DT: f64 = 1.0;

/// Upper bound on steps for a single run.
pub const MAX_STEPS: u64 = 2_000_000_000;

/// Relative slack when comparing storage at consecutive period boundaries.
const STEADY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum HarvestProfile {
    Constant(f64),
    /// `(start time, power)` breakpoints, piecewise constant and left-closed.
    /// The last power holds forever unless `period` is set, in which case
    /// the whole table repeats every `period` seconds.
    Stepwise {
        steps: Vec<(f64, f64)>,
        period: Option<f64>,
    },
}

impl HarvestProfile {
    pub fn constant(power: f64) -> Result<Self> {
        if !(power.is_finite() && power >= 0.0) {
            return Err(ModelError::domain("harvest power", power, "must be finite and non-negative"));
        }
        Ok(HarvestProfile::Constant(power))
    }

    pub fn stepwise(steps: Vec<(f64, f64)>, period: Option<f64>) -> Result<Self> {
        match steps.first() {
            None => return Err(ModelError::SimParameter("profile has no breakpoints".into())),
            Some(&(t0, _)) if t0 != 0.0 => {
                return Err(ModelError::domain("first profile time", t0, "must be 0"))
            }
            _ => {}
        }
        if steps.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(ModelError::SimParameter("profile times must be strictly increasing".into()));
        }
        for &(t, p) in &steps {
            if !t.is_finite() {
                return Err(ModelError::domain("profile time", t, "must be finite"));
            }
            if !(p.is_finite() && p >= 0.0) {
                return Err(ModelError::domain("profile power", p, "must be finite and non-negative"));
            }
        }
        if let Some(period) = period {
            let last = steps.last().map(|s| s.0).unwrap_or(0.0);
            if !(period.is_finite() && period > last) {
                return Err(ModelError::domain(
                    "profile period",
                    period,
                    "must exceed the last breakpoint time",
                ));
            }
        }
        Ok(HarvestProfile::Stepwise { steps, period })
    }

    /// A repeating on/off wave: `low` for `low_s` seconds then `high` for `high_s`.
    pub fn square_wave(low: f64, low_s: f64, high: f64, high_s: f64) -> Result<Self> {
        Self::stepwise(vec![(0.0, low), (low_s, high)], Some(low_s + high_s))
    }

    pub fn period(&self) -> Option<f64> {
        match self {
            HarvestProfile::Constant(_) => None,
            HarvestProfile::Stepwise { period, .. } => *period,
        }
    }

    /// Harvested power at time `t` (left-closed segments).
    pub fn power_at(&self, t: f64) -> f64 {
        match self {
            HarvestProfile::Constant(p) => *p,
            HarvestProfile::Stepwise { steps, period } => {
                let t = match period {
                    Some(p) => t.rem_euclid(*p),
                    None => t,
                };
                let idx = steps.partition_point(|&(start, _)| start <= t);
                steps[idx.saturating_sub(1)].1
            }
        }
    }

    /// Reads `time_s,power_w` rows. Errors carry the file line number.
    pub fn from_csv<R: Read>(input: R, period: Option<f64>) -> std::result::Result<Self, IngestError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
        };
        let (ti, pi) = (col("time_s")?, col("power_w")?);
        let mut steps: Vec<(f64, f64)> = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
            let num = |i: usize, name: &str| -> std::result::Result<f64, IngestError> {
                let raw = row.get(i).unwrap_or("");
                raw.parse().map_err(|_| IngestError::Field {
                    row: line,
                    column: name.into(),
                    message: format!("cannot parse `{raw}` as a number"),
                })
            };
            let (t, p) = (num(ti, "time_s")?, num(pi, "power_w")?);
            let bad = |column: &str, message: &str| IngestError::Field {
                row: line,
                column: column.into(),
                message: message.into(),
            };
            match steps.last() {
                None if t != 0.0 => return Err(bad("time_s", "first time must be 0")),
                Some(&(prev, _)) if !(t > prev) => return Err(bad("time_s", "times must be strictly increasing")),
                _ => {}
            }
            if !(p.is_finite() && p >= 0.0) {
                return Err(bad("power_w", "power must be finite and non-negative"));
            }
            steps.push((t, p));
        }
        HarvestProfile::stepwise(steps, period).map_err(|e| IngestError::Row {
            row: 0,
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Terminal {
    /// Storage ran out during the step starting at `time`; the exact
    /// crossing lies in `[time, time + dt]`.
    Depleted { time: f64 },
    Survived { horizon: f64 },
    /// Storage reached capacity inside a period of a periodic profile and
    /// ended the period where it began, so the cycle repeats.
    SteadyStatePerpetual,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub dt: f64,
    pub capacity: f64,
    pub load_power: f64,
    /// Stored energy at `k * dt`, starting with the full battery at `k = 0`.
    pub samples: Vec<f64>,
    pub terminal: Terminal,
}

impl SimTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |k| k as f64 * self.dt)
    }

    /// CSV `time_s,energy_j`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::result::Result<(), IngestError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time_s", "energy_j"])?;
        for (t, e) in self.times().zip(&self.samples) {
            w.write_record([sci(t), sci(*e)])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(ModelError::SimParameter(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

fn step(energy: f64, harvest: f64, load: f64, dt: f64, capacity: f64) -> f64 {
    (energy + (harvest - load) * dt).clamp(0.0, capacity)
}

/// Runs the node at a constant `rate` against `profile` for `horizon` seconds.
pub fn simulate(
    config: &NodeConfig,
    rate: f64,
    profile: &HarvestProfile,
    dt: f64,
    horizon: f64,
) -> Result<SimTrace> {
    check_dt(dt)?;
    if !(horizon.is_finite() && horizon > dt) {
        return Err(ModelError::SimParameter(format!(
            "horizon ({horizon} s) must exceed dt ({dt} s)"
        )));
    }
    let battery = config.battery().ok_or(ModelError::MissingBattery)?;
    let load = node_power(rate, config)?;
    let capacity = battery.energy();
    let n_steps = (horizon / dt).ceil();
    if n_steps > MAX_STEPS as f64 {
        return Err(ModelError::SimParameter(format!(
            "{n_steps} steps exceeds the limit of {MAX_STEPS}"
        )));
    }
    let n_steps = n_steps as usize;

    // period boundaries in whole steps, when the period is a multiple of dt
    let period_steps = profile.period().and_then(|p| {
        let k = (p / dt).round();
        ((k * dt - p).abs() <= 1e-9 * p && k >= 1.0).then_some(k as usize)
    });

    let mut samples = Vec::with_capacity(n_steps + 1);
    let mut energy = capacity;
    samples.push(energy);
    let mut terminal = Terminal::Survived {
        horizon: n_steps as f64 * dt,
    };
    let mut steady = false;
    // a clamp at capacity inside a period pins the state, so a repeated
    // boundary value means the cycle repeats from then on
    let mut clamped = false;
    for k in 0..n_steps {
        let t = k as f64 * dt;
        energy = step(energy, profile.power_at(t), load, dt, capacity);
        samples.push(energy);
        if energy <= 0.0 {
            terminal = Terminal::Depleted { time: t };
            break;
        }
        clamped |= energy >= capacity;
        if let Some(ps) = period_steps {
            let end = k + 1;
            if !steady && end % ps == 0 {
                let start = samples[end - ps];
                steady = clamped && (energy - start).abs() <= STEADY_TOL * capacity;
                clamped = false;
            }
        }
    }
    if steady && !matches!(terminal, Terminal::Depleted { .. }) {
        terminal = Terminal::SteadyStatePerpetual;
    }
    Ok(SimTrace {
        dt,
        capacity,
        load_power: load,
        samples,
        terminal,
    })
}

/// Steps a constant-harvest scenario until the battery empties or stops
/// draining. Returns the start of the depleting step.
pub fn sim_lifetime(config: &NodeConfig, rate: f64, constant_harvest: f64, dt: f64) -> Result<Lifetime> {
    check_dt(dt)?;
    let profile = HarvestProfile::constant(constant_harvest)?;
    let battery = config.battery().ok_or(ModelError::MissingBattery)?;
    let load = node_power(rate, config)?;
    let capacity = battery.energy();
    let harvest = profile.power_at(0.0);

    let mut energy = capacity;
    for k in 0..MAX_STEPS {
        let next = step(energy, harvest, load, dt, capacity);
        if next <= 0.0 {
            return Ok(Lifetime::Finite(k as f64 * dt));
        }
        if next >= energy {
            return Ok(Lifetime::Perpetual);
        }
        energy = next;
    }
    Err(ModelError::SimParameter(format!(
        "no depletion within {MAX_STEPS} steps of {dt} s; use a larger dt"
    )))
}
