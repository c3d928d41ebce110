//! JSON documents printed by the commands. Schemas live in `schemas/`.

use serde::Serialize;

use iob_energy::benchfit::{FitReport, FitWarning};
use iob_energy::feasibility::{Classification, FeasibilityVerdict, LifetimeComparison, PerpetualRate, SolveMethod};
use iob_energy::model::Lifetime;
use iob_energy::numfmt::Sci;
use iob_energy::sim::{SimTrace, Terminal};
use iob_energy::units::seconds_to_hours;

fn version(stamp: bool) -> Option<&'static str> {
    stamp.then_some(env!("CARGO_PKG_VERSION"))
}

fn opt(x: Option<f64>) -> Option<Sci> {
    x.map(Sci)
}

#[derive(Serialize)]
pub struct FitDoc {
    pub slope_m: Sci,
    pub intercept_c: Sci,
    pub plateau_j_per_bit: Sci,
    pub rate_min_bps: Sci,
    pub rate_max_bps: Sci,
    pub r_squared: Sci,
    pub n_points: usize,
    pub residuals: Vec<Sci>,
    pub cohort_filter: String,
    pub warnings: Vec<FitWarning>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<&'static str>,
}

impl FitDoc {
    pub fn new(r: &FitReport, stamp: bool) -> Self {
        FitDoc {
            slope_m: Sci(r.model.slope()),
            intercept_c: Sci(r.model.intercept()),
            plateau_j_per_bit: Sci(r.model.plateau_floor()),
            rate_min_bps: Sci(r.model.rate_min()),
            rate_max_bps: Sci(r.model.rate_max()),
            r_squared: Sci(r.r_squared),
            n_points: r.n_points,
            residuals: r.residuals.iter().copied().map(Sci).collect(),
            cohort_filter: r.cohort_filter.clone(),
            warnings: r.warnings.clone(),
            version: version(stamp),
        }
    }
}

#[derive(Serialize)]
pub struct LifetimeDoc {
    pub power_w: Sci,
    pub lifetime_s: Option<Sci>,
    pub lifetime_h: Option<Sci>,
    pub perpetual: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<&'static str>,
}

impl LifetimeDoc {
    pub fn new(power: f64, life: Lifetime, stamp: bool) -> Self {
        LifetimeDoc {
            power_w: Sci(power),
            lifetime_s: opt(life.seconds()),
            lifetime_h: opt(life.hours()),
            perpetual: life.is_perpetual(),
            version: version(stamp),
        }
    }
}

#[derive(Serialize)]
pub struct FeasibleDoc {
    pub harvest_w: Sci,
    pub feasible: bool,
    pub max_perpetual_rate_bps: Option<Sci>,
    pub method: Option<SolveMethod>,
    pub range_limited: bool,
    pub power_at_min_w: Option<Sci>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<&'static str>,
}

impl FeasibleDoc {
    pub fn new(harvest: f64, v: &PerpetualRate, stamp: bool) -> Self {
        let (range_limited, power_at_min) = match v {
            PerpetualRate::Rate { range_limited, .. } => (*range_limited, None),
            PerpetualRate::Infeasible { power_at_min } => (false, Some(*power_at_min)),
        };
        FeasibleDoc {
            harvest_w: Sci(harvest),
            feasible: v.rate().is_some(),
            max_perpetual_rate_bps: opt(v.rate()),
            method: v.method(),
            range_limited,
            power_at_min_w: opt(power_at_min),
            version: version(stamp),
        }
    }
}

#[derive(Serialize)]
pub struct CompareDoc {
    pub lifetime_a_s: Option<Sci>,
    pub lifetime_b_s: Option<Sci>,
    pub lifetime_a_h: Option<Sci>,
    pub lifetime_b_h: Option<Sci>,
    /// `lifetime_b / lifetime_a`
    pub ratio: Option<Sci>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<&'static str>,
}

impl CompareDoc {
    pub fn new(c: &LifetimeComparison, stamp: bool) -> Self {
        let note = c.ratio.is_none().then(|| {
            let side = match (c.lifetime_a.is_perpetual(), c.lifetime_b.is_perpetual()) {
                (true, true) => "both configurations are",
                (true, false) => "configuration a is",
                _ => "configuration b is",
            };
            format!("{side} perpetual at this rate; the lifetime ratio is undefined")
        });
        CompareDoc {
            lifetime_a_s: opt(c.lifetime_a.seconds()),
            lifetime_b_s: opt(c.lifetime_b.seconds()),
            lifetime_a_h: opt(c.lifetime_a.hours()),
            lifetime_b_h: opt(c.lifetime_b.hours()),
            ratio: opt(c.ratio),
            note,
            version: version(stamp),
        }
    }
}

#[derive(Serialize)]
pub struct WorkloadDoc {
    pub name: String,
    pub rate_bps: Sci,
    pub power_w: Option<Sci>,
    pub classification: &'static str,
    pub lifetime_s: Option<Sci>,
}

#[derive(Serialize)]
pub struct ClassifyDoc {
    pub binding_harvest_w: Sci,
    pub worst_case_harvest_w: Sci,
    pub max_perpetual_rate_bps: Option<Sci>,
    pub worst_case_rate_bps: Option<Sci>,
    pub workloads: Vec<WorkloadDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<&'static str>,
}

impl ClassifyDoc {
    pub fn new(v: &FeasibilityVerdict, worst_case_harvest: f64, stamp: bool) -> Self {
        ClassifyDoc {
            binding_harvest_w: Sci(v.binding_harvest),
            worst_case_harvest_w: Sci(worst_case_harvest),
            max_perpetual_rate_bps: opt(v.max_perpetual_rate.rate()),
            worst_case_rate_bps: opt(v.worst_case_rate.and_then(|r| r.rate())),
            workloads: v
                .workloads
                .iter()
                .map(|w| WorkloadDoc {
                    name: w.name.clone(),
                    rate_bps: Sci(w.rate),
                    power_w: opt(w.power),
                    classification: w.classification.label(),
                    lifetime_s: match w.classification {
                        Classification::BatteryLimited { lifetime } => opt(lifetime),
                        _ => None,
                    },
                })
                .collect(),
            version: version(stamp),
        }
    }
}

#[derive(Serialize)]
pub struct SimulateDoc {
    pub terminal: &'static str,
    pub depleted_at_s: Option<Sci>,
    pub depleted_at_h: Option<Sci>,
    pub horizon_s: Option<Sci>,
    pub dt_s: Sci,
    pub load_power_w: Sci,
    pub final_energy_j: Sci,
    pub closed_form_lifetime_s: Option<Sci>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub version: Option<&'static str>,
}

impl SimulateDoc {
    pub fn new(t: &SimTrace, closed_form: Option<f64>, stamp: bool) -> Self {
        let (terminal, depleted, horizon) = match t.terminal {
            Terminal::Depleted { time } => ("depleted", Some(time), None),
            Terminal::Survived { horizon } => ("survived", None, Some(horizon)),
            Terminal::SteadyStatePerpetual => ("steady_state_perpetual", None, None),
        };
        SimulateDoc {
            terminal,
            depleted_at_s: opt(depleted),
            depleted_at_h: opt(depleted.map(seconds_to_hours)),
            horizon_s: opt(horizon),
            dt_s: Sci(t.dt),
            load_power_w: Sci(t.load_power),
            final_energy_j: Sci(*t.samples.last().unwrap_or(&t.capacity)),
            closed_form_lifetime_s: opt(closed_form),
            version: version(stamp),
        }
    }
}
