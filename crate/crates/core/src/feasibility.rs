//! Rate sweeps, knee points, perpetual-operation thresholds and lifetime
//! comparisons built on the node model.

use std::fmt;
use std::io::Write;

use serde::Serialize;

use crate::error::{IngestError, ModelError, Result};
use crate::model::{lifetime, node_power, Battery, EfficiencyModel, HarvestBand, Lifetime, NodeConfig, SensingModel};
use crate::numfmt::sci;

/// Bundled workload table (name, bandwidth, optional explicit rate).
pub const BUNDLED_WORKLOADS: &str = include_str!("../data/workloads.csv");

/// ADC width used to turn a signal bandwidth into a bit rate.
pub const WORKLOAD_ADC_BITS: f64 = 16.0;

/// Grid size used when node power is not monotone in rate.
pub const SCAN_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// `n` rates from `min` to `max` inclusive; endpoints are exact.
pub fn rate_grid(min: f64, max: f64, n: usize, spacing: Spacing) -> Result<Vec<f64>> {
    if !(min.is_finite() && min > 0.0) {
        return Err(ModelError::domain("sweep minimum rate", min, "must be positive"));
    }
    if !(max.is_finite() && max > min) {
        return Err(ModelError::domain("sweep maximum rate", max, "must exceed the minimum"));
    }
    if n < 2 {
        return Err(ModelError::domain("sweep points", n as f64, "need at least 2"));
    }
    let last = (n - 1) as f64;
    let mut grid: Vec<f64> = match spacing {
        Spacing::Log => {
            let (a, b) = (min.log10(), max.log10());
            (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / last)).collect()
        }
        Spacing::Linear => (0..n).map(|i| min + (max - min) * i as f64 / last).collect(),
    };
    grid[0] = min;
    grid[n - 1] = max;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ModelError::domain(
            "sweep points",
            n as f64,
            "too many points for the range to stay strictly increasing",
        ));
    }
    Ok(grid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSeries {
    pub label: String,
    /// Node power per grid rate; `None` where the link cannot carry the rate.
    pub power: Vec<Option<f64>>,
    /// Zero-harvest lifetime per grid rate, present when the config has a battery.
    pub lifetime: Option<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rates: Vec<f64>,
    pub series: Vec<SweepSeries>,
}

/// A grid rate rejected by a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGap {
    pub label: String,
    pub rate: f64,
    pub reason: String,
}

impl SweepResult {
    pub fn labels(&self) -> Vec<&str> {
        self.series.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn gaps(&self) -> Vec<SweepGap> {
        let mut out = Vec::new();
        for s in &self.series {
            for (rate, p) in self.rates.iter().zip(&s.power) {
                if p.is_none() {
                    out.push(SweepGap {
                        label: s.label.clone(),
                        rate: *rate,
                        reason: "rate above link maximum".into(),
                    });
                }
            }
        }
        out
    }

    /// CSV: `rate_bps,<label>_power_w[,<label>_lifetime_s],...`; missing points are empty cells.
    pub fn write_csv<W: Write>(&self, out: W) -> std::result::Result<(), IngestError> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["rate_bps".to_string()];
        for s in &self.series {
            header.push(format!("{}_power_w", s.label));
            if s.lifetime.is_some() {
                header.push(format!("{}_lifetime_s", s.label));
            }
        }
        w.write_record(&header)?;
        let cell = |v: Option<f64>| v.map(sci).unwrap_or_default();
        for (i, rate) in self.rates.iter().enumerate() {
            let mut row = vec![sci(*rate)];
            for s in &self.series {
                row.push(cell(s.power[i]));
                if let Some(l) = &s.lifetime {
                    row.push(cell(l[i]));
                }
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates node power (and zero-harvest lifetime when a battery is set)
/// for every config over a rate grid.
pub fn power_sweep(
    configs: &[(&str, &NodeConfig)],
    rate_min: f64,
    rate_max: f64,
    n_points: usize,
    spacing: Spacing,
) -> Result<SweepResult> {
    let rates = rate_grid(rate_min, rate_max, n_points, spacing)?;
    let series = configs
        .iter()
        .map(|(label, cfg)| {
            let power: Vec<Option<f64>> = rates.iter().map(|&r| node_power(r, cfg).ok()).collect();
            let lifetime = cfg.battery().map(|b| {
                power
                    .iter()
                    .map(|p| p.and_then(|p| lifetime(b, p, 0.0).ok()).and_then(|l| l.seconds()))
                    .collect()
            });
            SweepSeries {
                label: label.to_string(),
                power,
                lifetime,
            }
        })
        .collect();
    Ok(SweepResult { rates, series })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knee {
    /// Where the fitted line meets the plateau.
    pub rate: f64,
    pub within_range: bool,
    /// `rate` clamped into the model's valid range.
    pub clamped: f64,
}

/// Rate at which the fitted line reaches the plateau floor.
pub fn knee_rate(model: &EfficiencyModel) -> Result<Knee> {
    let m = model.slope();
    if m >= 0.0 {
        return Err(ModelError::NoKnee { slope: m });
    }
    let rate = 10f64.powf((model.plateau_floor().log10() - model.intercept()) / m);
    let clamped = rate.clamp(model.rate_min(), model.rate_max());
    Ok(Knee {
        rate,
        within_range: rate >= model.rate_min() && rate <= model.rate_max(),
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Constant per-bit costs: `harvest * system_efficiency / (eta_s + eta_c)`.
    ClosedForm,
    Bisection,
    Scan,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::ClosedForm => "closed_form",
            SolveMethod::Bisection => "bisection",
            SolveMethod::Scan => "scan",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerpetualRate {
    Rate {
        rate: f64,
        method: SolveMethod,
        /// True when even the top of the valid range fits the harvest.
        range_limited: bool,
    },
    /// The node needs more than the harvest even at its lowest valid rate.
    Infeasible { power_at_min: f64 },
}

impl PerpetualRate {
    pub fn rate(&self) -> Option<f64> {
        match self {
            PerpetualRate::Rate { rate, .. } => Some(*rate),
            PerpetualRate::Infeasible { .. } => None,
        }
    }

    pub fn method(&self) -> Option<SolveMethod> {
        match self {
            PerpetualRate::Rate { method, .. } => Some(*method),
            PerpetualRate::Infeasible { .. } => None,
        }
    }
}

/// Rates the node can actually run at: the sensing model's valid range
/// capped by the link maximum.
pub fn operating_range(config: &NodeConfig) -> (f64, f64) {
    let (lo, hi) = config.sensing().valid_range();
    (lo, hi.min(config.comm().max_rate()))
}

const BISECTION_MAX_ITER: usize = 400;
const BISECTION_REL_TOL: f64 = 1e-13;

/// Bisection on a geometric midpoint. `lo` must satisfy `feasible`, `hi`
/// must not; returns the feasible end of the final bracket.
fn bisect<F: Fn(f64) -> bool>(mut lo: f64, mut hi: f64, feasible: F) -> f64 {
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_REL_TOL * hi {
            break;
        }
        let mid = if hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest rate the harvest alone can sustain, choosing the solver from
/// the sensing model: closed form for constant costs, bisection when power
/// is monotone in rate, a log grid scan otherwise.
pub fn max_perpetual_rate(config: &NodeConfig, harvest_power: f64) -> Result<PerpetualRate> {
    let method = match config.sensing() {
        SensingModel::Plateau { .. } => SolveMethod::ClosedForm,
        s if s.power_is_monotone() => SolveMethod::Bisection,
        _ => SolveMethod::Scan,
    };
    max_perpetual_rate_using(config, harvest_power, method)
}

/// [`max_perpetual_rate`] with an explicit solver.
pub fn max_perpetual_rate_using(
    config: &NodeConfig,
    harvest_power: f64,
    method: SolveMethod,
) -> Result<PerpetualRate> {
    if !(harvest_power.is_finite() && harvest_power > 0.0) {
        return Err(ModelError::domain("harvest power", harvest_power, "must be positive"));
    }
    let (lo, hi) = operating_range(config);
    let power = |r: f64| node_power(r, config);
    let fits = |r: f64| power(r).map(|p| p <= harvest_power).unwrap_or(false);

    let p_lo = power(lo)?;
    if p_lo > harvest_power {
        return Ok(PerpetualRate::Infeasible { power_at_min: p_lo });
    }
    if hi.is_finite() && fits(hi) {
        return Ok(PerpetualRate::Rate {
            rate: hi,
            method,
            range_limited: true,
        });
    }

    let rate = match method {
        SolveMethod::ClosedForm => {
            let SensingModel::Plateau { floor } = config.sensing() else {
                return Err(ModelError::domain(
                    "solver",
                    f64::NAN,
                    "closed form needs constant per-bit sensing",
                ));
            };
            harvest_power * config.system_efficiency() / (floor + config.comm().energy_per_bit())
        }
        SolveMethod::Bisection => {
            let hi = if hi.is_finite() { hi } else { grow_until_infeasible(lo, &fits) };
            bisect(lo, hi, fits)
        }
        SolveMethod::Scan => {
            let hi = if hi.is_finite() { hi } else { grow_until_infeasible(lo, &fits) };
            let grid = rate_grid(lo, hi, SCAN_POINTS, Spacing::Log)?;
            // last feasible grid point; the point after it is infeasible
            let last_ok = grid.iter().rposition(|&r| fits(r)).unwrap_or(0);
            bisect(grid[last_ok], grid[last_ok + 1], fits)
        }
    };
    Ok(PerpetualRate::Rate {
        rate,
        method,
        range_limited: false,
    })
}

fn grow_until_infeasible<F: Fn(f64) -> bool>(lo: f64, fits: &F) -> f64 {
    let mut hi = lo.max(1.0);
    while fits(hi) {
        hi *= 10.0;
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeComparison {
    pub lifetime_a: Lifetime,
    pub lifetime_b: Lifetime,
    /// `lifetime_b / lifetime_a`; `None` when either side is perpetual.
    pub ratio: Option<f64>,
}

/// Zero-harvest lifetimes of two configs sharing a battery.
pub fn compare_lifetime(a: &NodeConfig, b: &NodeConfig, rate: f64) -> Result<LifetimeComparison> {
    let (ba, bb) = match (a.battery(), b.battery()) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(ModelError::MissingBattery),
    };
    if ba != bb {
        return Err(ModelError::BatteryMismatch);
    }
    compare_lifetime_on(ba, a, b, rate)
}

/// As [`compare_lifetime`] with the battery supplied explicitly.
pub fn compare_lifetime_on(
    battery: &Battery,
    a: &NodeConfig,
    b: &NodeConfig,
    rate: f64,
) -> Result<LifetimeComparison> {
    let lifetime_a = lifetime(battery, node_power(rate, a)?, 0.0)?;
    let lifetime_b = lifetime(battery, node_power(rate, b)?, 0.0)?;
    let ratio = match (lifetime_a, lifetime_b) {
        (Lifetime::Finite(x), Lifetime::Finite(y)) => Some(y / x),
        _ => None,
    };
    Ok(LifetimeComparison {
        lifetime_a,
        lifetime_b,
        ratio,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Workload {
    pub name: String,
    /// bit/s
    pub rate: f64,
}

impl Workload {
    pub fn new(name: impl Into<String>, rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(ModelError::domain("workload rate", rate, "must be positive"));
        }
        Ok(Workload {
            name: name.into(),
            rate,
        })
    }

    /// Nyquist-sampled signal of the given bandwidth through a 16-bit ADC.
    pub fn from_bandwidth(name: impl Into<String>, bandwidth_hz: f64) -> Result<Self> {
        Self::new(name, 2.0 * bandwidth_hz * WORKLOAD_ADC_BITS)
    }
}

/// Parses `name,bandwidth_hz,rate_bps`; `rate_bps` overrides the bandwidth when set.
pub fn parse_workloads(text: &str) -> std::result::Result<Vec<Workload>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        let num = |i: usize, col: &str| -> std::result::Result<Option<f64>, IngestError> {
            match row.get(i).unwrap_or("") {
                "" => Ok(None),
                s => s.parse().map(Some).map_err(|_| IngestError::Field {
                    row: line,
                    column: col.into(),
                    message: format!("cannot parse `{s}` as a number"),
                }),
            }
        };
        let name = row.get(0).unwrap_or("").to_string();
        let w = match (num(1, "bandwidth_hz")?, num(2, "rate_bps")?) {
            (_, Some(rate)) => Workload::new(name, rate),
            (Some(bw), None) => Workload::from_bandwidth(name, bw),
            (None, None) => {
                return Err(IngestError::Row {
                    row: line,
                    message: "workload needs bandwidth_hz or rate_bps".into(),
                })
            }
        }
        .map_err(|e| IngestError::Row {
            row: line,
            message: e.to_string(),
        })?;
        out.push(w);
    }
    Ok(out)
}

pub fn bundled_workloads() -> Vec<Workload> {
    parse_workloads(BUNDLED_WORKLOADS).expect("bundled workloads are valid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    /// Fits inside the low end of the harvest band.
    PerpetualWorstCase,
    /// Fits inside the high end only.
    Perpetual,
    /// Runs on the battery; lifetime at zero harvest if a battery is known.
    BatteryLimited { lifetime: Option<f64> },
    /// The link cannot carry the rate.
    Unsupported,
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::PerpetualWorstCase => "perpetual_worst_case",
            Classification::Perpetual => "perpetual",
            Classification::BatteryLimited { .. } => "battery_limited",
            Classification::Unsupported => "unsupported",
        }
    }

    pub fn is_perpetual(&self) -> bool {
        matches!(self, Classification::Perpetual | Classification::PerpetualWorstCase)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadVerdict {
    pub name: String,
    pub rate: f64,
    pub power: Option<f64>,
    pub classification: Classification,
}

pub fn classify_workloads(
    config: &NodeConfig,
    workloads: &[Workload],
    band: &HarvestBand,
) -> Result<Vec<WorkloadVerdict>> {
    workloads
        .iter()
        .map(|w| {
            if !(w.rate.is_finite() && w.rate > 0.0) {
                return Err(ModelError::domain("workload rate", w.rate, "must be positive"));
            }
            let (power, classification) = match node_power(w.rate, config) {
                Ok(p) if p <= band.p_min() => (Some(p), Classification::PerpetualWorstCase),
                Ok(p) if p <= band.p_max() => (Some(p), Classification::Perpetual),
                Ok(p) => {
                    let lifetime = match config.battery() {
                        Some(b) => lifetime(b, p, 0.0)?.seconds(),
                        None => None,
                    };
                    (Some(p), Classification::BatteryLimited { lifetime })
                }
                Err(ModelError::Capability { .. }) => (None, Classification::Unsupported),
                Err(e) => return Err(e),
            };
            Ok(WorkloadVerdict {
                name: w.name.clone(),
                rate: w.rate,
                power,
                classification,
            })
        })
        .collect()
}

/// Perpetual-operation summary of one config against a harvest band.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityVerdict {
    /// Threshold at the band's upper end.
    pub max_perpetual_rate: PerpetualRate,
    /// Threshold at the band's lower end, when that end is positive.
    pub worst_case_rate: Option<PerpetualRate>,
    pub binding_harvest: f64,
    pub workloads: Vec<WorkloadVerdict>,
}

pub fn assess(config: &NodeConfig, band: &HarvestBand, workloads: &[Workload]) -> Result<FeasibilityVerdict> {
    let best = max_perpetual_rate(config, band.p_max())?;
    let worst_case_rate = if band.p_min() > 0.0 {
        Some(max_perpetual_rate(config, band.p_min())?)
    } else {
        None
    };
    Ok(FeasibilityVerdict {
        max_perpetual_rate: best,
        worst_case_rate,
        binding_harvest: band.p_max(),
        workloads: classify_workloads(config, workloads, band)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CommProtocol;
    use approx::assert_relative_eq;

    fn cfg(eta_comm: f64) -> NodeConfig {
        NodeConfig::new(
            SensingModel::plateau(0.7e-9).unwrap(),
            CommProtocol::new("link", eta_comm, 1e8).unwrap(),
            0.4,
        )
        .unwrap()
        .with_battery(Battery::coin_cell(1000.0).unwrap())
    }

    fn synthetic() -> EfficiencyModel {
        EfficiencyModel::new(-0.5, 7e-7f64.log10(), 0.7e-9, 1.0, 1e8).unwrap()
    }

    #[test]
    fn grid_endpoints_exact() {
        let g = rate_grid(1.0, 1e8, 200, Spacing::Log).unwrap();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[199], 1e8);
        let l = rate_grid(3.0, 7.0, 5, Spacing::Linear).unwrap();
        assert_eq!(l, [3.0, 4.0, 5.0, 6.0, 7.0]);
        assert!(rate_grid(0.0, 1.0, 2, Spacing::Log).is_err());
        assert!(rate_grid(2.0, 1.0, 2, Spacing::Log).is_err());
        assert!(rate_grid(1.0, 2.0, 1, Spacing::Log).is_err());
    }

    #[test]
    fn sweep_at_one_mbps() {
        let (bt, wir) = (cfg(15e-9), cfg(0.1e-9));
        let s = power_sweep(&[("bluetooth", &bt), ("wir", &wir)], 1e5, 1e7, 3, Spacing::Log).unwrap();
        assert_eq!(s.rates[1], 1e6);
        assert_relative_eq!(s.series[0].power[1].unwrap(), 39.25e-3, max_relative = 1e-12);
        assert_relative_eq!(s.series[1].power[1].unwrap(), 2.0e-3, max_relative = 1e-12);
    }

    #[test]
    fn sweep_two_points_on_plateau_scale_linearly() {
        let c = cfg(15e-9);
        let s = power_sweep(&[("c", &c)], 5e6, 1e7, 2, Spacing::Linear).unwrap();
        let p = &s.series[0].power;
        assert_relative_eq!(p[1].unwrap() / p[0].unwrap(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn sweep_marks_unsupported_rates() {
        let c = NodeConfig::new(
            SensingModel::plateau(0.7e-9).unwrap(),
            CommProtocol::new("slow", 1e-9, 1e3).unwrap(),
            0.4,
        )
        .unwrap();
        let s = power_sweep(&[("slow", &c)], 1e2, 1e4, 3, Spacing::Log).unwrap();
        assert!(s.series[0].power[0].is_some());
        assert!(s.series[0].power[2].is_none());
        assert_eq!(s.gaps().len(), 1);
        assert!(s.series[0].lifetime.is_none());
    }

    #[test]
    fn sweep_csv_layout() {
        let c = cfg(0.1e-9);
        let s = power_sweep(&[("wir", &c)], 1e6, 2e6, 2, Spacing::Linear).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("rate_bps,wir_power_w,wir_lifetime_s"));
        assert_eq!(lines.next(), Some("1.00000000e6,2.00000000e-3,5.40000000e6"));
    }

    #[test]
    fn knee_examples() {
        let k = knee_rate(&synthetic()).unwrap();
        assert_relative_eq!(k.rate, 1e6, max_relative = 1e-12);
        assert!(k.within_range);

        // floor equal to the line at rate_min
        let m = EfficiencyModel::new(-0.5, 7e-7f64.log10(), 7e-8, 100.0, 1e8).unwrap();
        let k = knee_rate(&m).unwrap();
        assert_relative_eq!(k.rate, 100.0, max_relative = 1e-12);
        assert_relative_eq!(k.clamped, 100.0, max_relative = 1e-12);

        let up = EfficiencyModel::new(0.1, -8.0, 1e-9, 1.0, 10.0).unwrap();
        assert!(matches!(knee_rate(&up), Err(ModelError::NoKnee { .. })));

        let out = EfficiencyModel::new(-0.5, 7e-7f64.log10(), 0.7e-9, 1.0, 1e4).unwrap();
        let k = knee_rate(&out).unwrap();
        assert!(!k.within_range);
        assert_eq!(k.clamped, 1e4);
    }

    #[test]
    fn perpetual_rate_examples() {
        let wir = cfg(0.1e-9);
        let r = max_perpetual_rate(&wir, 400e-6).unwrap();
        assert_eq!(r.rate().unwrap(), 400e-6 * 0.4 / (0.7e-9 + 0.1e-9));
        assert_relative_eq!(r.rate().unwrap(), 2e5, max_relative = 1e-12);
        assert_relative_eq!(max_perpetual_rate(&wir, 100e-6).unwrap().rate().unwrap(), 5e4, max_relative = 1e-12);
        let bt = max_perpetual_rate(&cfg(15e-9), 100e-6).unwrap().rate().unwrap();
        assert_relative_eq!(bt, 100e-6 * 0.4 / 15.7e-9, max_relative = 1e-12);
        assert!((bt - 2547.77).abs() < 0.01);
    }

    #[test]
    fn bisection_matches_closed_form() {
        for (eta, h) in [(0.1e-9, 400e-6), (15e-9, 100e-6), (10e-12, 50e-6)] {
            let c = cfg(eta);
            let exact = max_perpetual_rate(&c, h).unwrap().rate().unwrap();
            let bis = max_perpetual_rate_using(&c, h, SolveMethod::Bisection).unwrap().rate().unwrap();
            let scan = max_perpetual_rate_using(&c, h, SolveMethod::Scan).unwrap().rate().unwrap();
            assert_relative_eq!(bis, exact, max_relative = 1e-6);
            assert_relative_eq!(scan, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn perpetual_rate_fitted_models() {
        let c = NodeConfig::new(synthetic().into(), CommProtocol::new("wir", 0.1e-9, 1e8).unwrap(), 0.4).unwrap();
        let r = max_perpetual_rate(&c, 400e-6).unwrap();
        assert_eq!(r.method(), Some(SolveMethod::Bisection));
        let rate = r.rate().unwrap();
        assert!(c.node_power(rate).unwrap() <= 400e-6);
        assert!(c.node_power(rate * 1.001).unwrap() > 400e-6);

        // steep line: power falls with rate before the knee
        let steep = EfficiencyModel::new(-1.5, -5.0, 0.7e-9, 1.0, 1e8).unwrap();
        let c = NodeConfig::new(steep.into(), CommProtocol::new("wir", 0.1e-9, 1e8).unwrap(), 0.4).unwrap();
        let r = max_perpetual_rate(&c, 400e-6).unwrap();
        assert_eq!(r.method(), Some(SolveMethod::Scan));
        let rate = r.rate().unwrap();
        assert!(c.node_power(rate).unwrap() <= 400e-6);
        assert!(c.node_power(rate * 1.001).unwrap() > 400e-6);
    }

    #[test]
    fn perpetual_rate_edges() {
        let c = NodeConfig::new(synthetic().into(), CommProtocol::new("bt", 15e-9, 1e8).unwrap(), 0.4).unwrap();
        // at 1 bit/s sensing alone costs 7e-7 / 0.4 W
        assert!(matches!(max_perpetual_rate(&c, 1e-7).unwrap(), PerpetualRate::Infeasible { .. }));
        let top = max_perpetual_rate(&c, 100.0).unwrap();
        assert!(matches!(top, PerpetualRate::Rate { range_limited: true, rate, .. } if rate == 1e8));
        assert!(max_perpetual_rate(&c, 0.0).is_err());
    }

    #[test]
    fn compare_examples() {
        let (bt, wir) = (cfg(15e-9), cfg(0.1e-9));
        let c = compare_lifetime(&bt, &wir, 1e6).unwrap();
        assert_relative_eq!(c.lifetime_a.hours().unwrap(), 76.433, max_relative = 1e-4);
        assert_relative_eq!(c.lifetime_b.hours().unwrap(), 1500.0, max_relative = 1e-12);
        assert_relative_eq!(c.ratio.unwrap(), 19.625, max_relative = 1e-12);
        assert_eq!(compare_lifetime(&bt, &bt, 1e6).unwrap().ratio, Some(1.0));

        let v = compare_lifetime(&bt, &wir, 400.0 * 400.0 * 10.0 * 8.0).unwrap();
        assert_relative_eq!(v.lifetime_a.hours().unwrap(), 5.97, max_relative = 1e-3);
        assert_relative_eq!(v.lifetime_b.hours().unwrap(), 117.1875, max_relative = 1e-12);
        assert_relative_eq!(v.ratio.unwrap(), 19.625, max_relative = 1e-12);

        let small = cfg(0.1e-9).with_battery(Battery::coin_cell(200.0).unwrap());
        assert!(matches!(compare_lifetime(&bt, &small, 1e6), Err(ModelError::BatteryMismatch)));
    }

    #[test]
    fn classify_examples() {
        let band = HarvestBand::new(50e-6, 400e-6).unwrap();
        let wir = cfg(0.1e-9);
        let v = classify_workloads(&wir, &[Workload::new("biopotential", 8e3).unwrap()], &band).unwrap();
        assert_eq!(v[0].classification, Classification::PerpetualWorstCase);
        assert_relative_eq!(v[0].power.unwrap(), 16e-6, max_relative = 1e-12);

        let v = classify_workloads(&wir, &[Workload::new("audio", 1e5).unwrap()], &band).unwrap();
        assert_eq!(v[0].classification, Classification::Perpetual);

        let bt = cfg(15e-9);
        let v = classify_workloads(&bt, &[Workload::new("stream", 1e6).unwrap()], &band).unwrap();
        match v[0].classification {
            Classification::BatteryLimited { lifetime: Some(s) } => {
                assert_relative_eq!(s / 3600.0, 76.433, max_relative = 1e-4)
            }
            other => panic!("{other:?}"),
        }
        assert!(Workload::new("none", 0.0).is_err());
        let bad = Workload { name: "x".into(), rate: 0.0 };
        assert!(classify_workloads(&bt, &[bad], &band).is_err());
    }

    #[test]
    fn bundled_workload_rates() {
        let w = bundled_workloads();
        let ecg = w.iter().find(|w| w.name == "ecg").unwrap();
        assert_eq!(ecg.rate, 4800.0);
        let video = w.iter().find(|w| w.name.starts_with("video")).unwrap();
        assert_eq!(video.rate, 12.8e6);
        assert!(parse_workloads("name,bandwidth_hz,rate_bps\nx,,\n").is_err());
    }

    #[test]
    fn assess_wir_indoor() {
        let v = assess(&cfg(0.1e-9), &HarvestBand::indoor(), &bundled_workloads()).unwrap();
        assert_relative_eq!(v.max_perpetual_rate.rate().unwrap(), 2e5, max_relative = 1e-12);
        assert_relative_eq!(v.worst_case_rate.unwrap().rate().unwrap(), 2.5e4, max_relative = 1e-12);
        let ecg = v.workloads.iter().find(|w| w.name == "ecg").unwrap();
        assert!(ecg.classification.is_perpetual());
    }
}
