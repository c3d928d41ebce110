//! Python bindings. Built with maturin as the `iob_energy` module.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use iob_energy::benchfit::{self, CohortFilter, FitReport};
use iob_energy::config;
use iob_energy::feasibility::{self, PerpetualRate, SolveMethod, Spacing};
use iob_energy::sim::{self, HarvestProfile, Terminal};
use iob_energy::{Battery, CommProtocol, EfficiencyModel, Lifetime, NodeConfig, SensingModel};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "EfficiencyModel", frozen, from_py_object)]
#[derive(Clone)]
struct PyEfficiencyModel(EfficiencyModel);

#[pymethods]
impl PyEfficiencyModel {
    #[new]
    #[pyo3(signature = (slope, intercept, plateau_floor, rate_min=1.0, rate_max=1e8))]
    fn new(slope: f64, intercept: f64, plateau_floor: f64, rate_min: f64, rate_max: f64) -> PyResult<Self> {
        EfficiencyModel::new(slope, intercept, plateau_floor, rate_min, rate_max)
            .map(Self)
            .map_err(value_err)
    }

    #[getter]
    fn slope(&self) -> f64 {
        self.0.slope()
    }

    #[getter]
    fn intercept(&self) -> f64 {
        self.0.intercept()
    }

    #[getter]
    fn plateau_floor(&self) -> f64 {
        self.0.plateau_floor()
    }

    #[getter]
    fn rate_min(&self) -> f64 {
        self.0.rate_min()
    }

    #[getter]
    fn rate_max(&self) -> f64 {
        self.0.rate_max()
    }

    /// Sensing energy per bit (J/bit) at `rate`.
    fn efficiency(&self, rate: f64) -> PyResult<f64> {
        self.0.efficiency(rate).map_err(value_err)
    }

    /// Rate where the fitted line meets the plateau floor.
    fn knee_rate(&self) -> PyResult<f64> {
        feasibility::knee_rate(&self.0).map(|k| k.rate).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "EfficiencyModel(slope={}, intercept={}, plateau_floor={}, rate_min={}, rate_max={})",
            self.0.slope(),
            self.0.intercept(),
            self.0.plateau_floor(),
            self.0.rate_min(),
            self.0.rate_max()
        )
    }
}

#[pyclass(name = "NodeConfig", frozen, from_py_object)]
#[derive(Clone)]
struct PyNodeConfig(NodeConfig);

fn build_node(sensing: SensingModel, link: &str, energy_per_bit: f64, max_rate: f64, eff: f64) -> PyResult<PyNodeConfig> {
    let comm = CommProtocol::new(link, energy_per_bit, max_rate).map_err(value_err)?;
    NodeConfig::new(sensing, comm, eff).map(PyNodeConfig).map_err(value_err)
}

#[pymethods]
impl PyNodeConfig {
    /// One of `bluetooth`, `wir`, `wir-future`.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        config::preset(name).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        config::parse_config(text).map(Self).map_err(value_err)
    }

    #[staticmethod]
    #[pyo3(signature = (floor, link, energy_per_bit, max_rate, system_efficiency))]
    fn plateau(floor: f64, link: &str, energy_per_bit: f64, max_rate: f64, system_efficiency: f64) -> PyResult<Self> {
        let sensing = SensingModel::plateau(floor).map_err(value_err)?;
        build_node(sensing, link, energy_per_bit, max_rate, system_efficiency)
    }

    #[staticmethod]
    #[pyo3(signature = (model, link, energy_per_bit, max_rate, system_efficiency))]
    fn fitted(
        model: PyEfficiencyModel,
        link: &str,
        energy_per_bit: f64,
        max_rate: f64,
        system_efficiency: f64,
    ) -> PyResult<Self> {
        build_node(SensingModel::Fitted(model.0), link, energy_per_bit, max_rate, system_efficiency)
    }

    #[pyo3(signature = (capacity_mah, voltage=Battery::DEFAULT_VOLTAGE))]
    fn with_battery(&self, capacity_mah: f64, voltage: f64) -> PyResult<Self> {
        let b = Battery::new(capacity_mah, voltage).map_err(value_err)?;
        Ok(Self(self.0.clone().with_battery(b)))
    }

    fn with_system_efficiency(&self, system_efficiency: f64) -> PyResult<Self> {
        self.0.with_system_efficiency(system_efficiency).map(Self).map_err(value_err)
    }

    #[getter]
    fn system_efficiency(&self) -> f64 {
        self.0.system_efficiency()
    }

    #[getter]
    fn link(&self) -> String {
        self.0.comm().name().to_string()
    }

    /// Battery energy in J, or None when no battery is set.
    #[getter]
    fn battery_energy(&self) -> Option<f64> {
        self.0.battery().map(|b| b.energy())
    }

    /// Average power draw (W) at `rate` bit/s.
    fn node_power(&self, rate: f64) -> PyResult<f64> {
        self.0.node_power(rate).map_err(value_err)
    }
}

#[pyclass(name = "FitReport", frozen)]
struct PyFitReport(FitReport);

#[pymethods]
impl PyFitReport {
    #[getter]
    fn model(&self) -> PyEfficiencyModel {
        PyEfficiencyModel(self.0.model)
    }

    #[getter]
    fn r_squared(&self) -> f64 {
        self.0.r_squared
    }

    #[getter]
    fn n_points(&self) -> usize {
        self.0.n_points
    }

    #[getter]
    fn residuals(&self) -> Vec<f64> {
        self.0.residuals.clone()
    }

    #[getter]
    fn cohort_filter(&self) -> String {
        self.0.cohort_filter.clone()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.0.warnings.iter().map(|w| w.to_string()).collect()
    }
}

/// Fits the log-log efficiency line to survey CSV text.
#[pyfunction]
#[pyo3(signature = (csv_text, plateau=benchfit::DEFAULT_PLATEAU, sensitivity_band=None, resolution_bits=None))]
fn fit_loglog(
    csv_text: &str,
    plateau: f64,
    sensitivity_band: Option<(f64, f64)>,
    resolution_bits: Option<u8>,
) -> PyResult<PyFitReport> {
    let ingested = benchfit::ingest_records(csv_text.as_bytes(), false).map_err(value_err)?;
    let filter = CohortFilter::new(sensitivity_band, resolution_bits).map_err(value_err)?;
    benchfit::fit_loglog_with(&ingested.records, plateau, filter)
        .map(PyFitReport)
        .map_err(value_err)
}

/// The bundled front-end survey as CSV text.
#[pyfunction]
fn bundled_survey_csv() -> &'static str {
    benchfit::BUNDLED_SURVEY
}

/// Battery lifetime in seconds at `rate`, or None when the harvest covers the load.
#[pyfunction]
#[pyo3(signature = (config, rate, harvest=0.0))]
fn lifetime(config: &PyNodeConfig, rate: f64, harvest: f64) -> PyResult<Option<f64>> {
    let battery = config.0.battery().ok_or_else(|| value_err("configuration has no battery"))?;
    let load = config.0.node_power(rate).map_err(value_err)?;
    let life = iob_energy::lifetime(battery, load, harvest).map_err(value_err)?;
    Ok(match life {
        Lifetime::Finite(s) => Some(s),
        Lifetime::Perpetual => None,
    })
}

#[pyfunction]
#[pyo3(signature = (config, harvest, method=None))]
fn max_perpetual_rate<'py>(
    py: Python<'py>,
    config: &PyNodeConfig,
    harvest: f64,
    method: Option<&str>,
) -> PyResult<Bound<'py, PyDict>> {
    let v = match method {
        None => feasibility::max_perpetual_rate(&config.0, harvest),
        Some(m) => {
            let m = match m {
                "closed_form" => SolveMethod::ClosedForm,
                "bisection" => SolveMethod::Bisection,
                "scan" => SolveMethod::Scan,
                other => return Err(value_err(format!("unknown method `{other}`"))),
            };
            feasibility::max_perpetual_rate_using(&config.0, harvest, m)
        }
    }
    .map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("feasible", v.rate().is_some())?;
    d.set_item("rate", v.rate())?;
    d.set_item("method", v.method().map(|m| m.to_string()))?;
    match v {
        PerpetualRate::Rate { range_limited, .. } => {
            d.set_item("range_limited", range_limited)?;
            d.set_item("power_at_min", None::<f64>)?;
        }
        PerpetualRate::Infeasible { power_at_min } => {
            d.set_item("range_limited", false)?;
            d.set_item("power_at_min", power_at_min)?;
        }
    }
    Ok(d)
}

#[pyfunction]
fn compare_lifetime<'py>(py: Python<'py>, a: &PyNodeConfig, b: &PyNodeConfig, rate: f64) -> PyResult<Bound<'py, PyDict>> {
    let c = feasibility::compare_lifetime(&a.0, &b.0, rate).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("lifetime_a", c.lifetime_a.seconds())?;
    d.set_item("lifetime_b", c.lifetime_b.seconds())?;
    d.set_item("ratio", c.ratio)?;
    Ok(d)
}

/// Node power per configuration over a rate grid. Gaps (rate above the
/// link maximum) come back as None.
#[pyfunction]
#[pyo3(signature = (configs, rate_min=1.0, rate_max=1e8, points=200, log=true))]
fn power_sweep<'py>(
    py: Python<'py>,
    configs: Vec<(String, PyNodeConfig)>,
    rate_min: f64,
    rate_max: f64,
    points: usize,
    log: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let refs: Vec<(&str, &NodeConfig)> = configs.iter().map(|(l, c)| (l.as_str(), &c.0)).collect();
    let spacing = if log { Spacing::Log } else { Spacing::Linear };
    let sweep = feasibility::power_sweep(&refs, rate_min, rate_max, points, spacing).map_err(value_err)?;
    let series = PyDict::new(py);
    for s in &sweep.series {
        series.set_item(&s.label, s.power.clone())?;
    }
    let d = PyDict::new(py);
    d.set_item("rates", sweep.rates.clone())?;
    d.set_item("power", series)?;
    Ok(d)
}

/// Runs the battery simulator against a constant harvest or a stepwise
/// profile given as `[(time_s, power_w), ...]`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (config, rate, horizon, harvest=0.0, profile=None, period=None, dt=sim::DEFAULT_DT))]
fn simulate<'py>(
    py: Python<'py>,
    config: &PyNodeConfig,
    rate: f64,
    horizon: f64,
    harvest: f64,
    profile: Option<Vec<(f64, f64)>>,
    period: Option<f64>,
    dt: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let profile = match profile {
        Some(steps) => HarvestProfile::stepwise(steps, period),
        None => HarvestProfile::constant(harvest),
    }
    .map_err(value_err)?;
    let trace = sim::simulate(&config.0, rate, &profile, dt, horizon).map_err(value_err)?;
    let d = PyDict::new(py);
    let (terminal, time) = match trace.terminal {
        Terminal::Depleted { time } => ("depleted", Some(time)),
        Terminal::Survived { horizon } => ("survived", Some(horizon)),
        Terminal::SteadyStatePerpetual => ("steady_state_perpetual", None),
    };
    d.set_item("terminal", terminal)?;
    d.set_item("time", time)?;
    d.set_item("load_power", trace.load_power)?;
    d.set_item("energy", trace.samples)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "iob_energy")]
fn iob_energy_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEfficiencyModel>()?;
    m.add_class::<PyNodeConfig>()?;
    m.add_class::<PyFitReport>()?;
    m.add_function(wrap_pyfunction!(fit_loglog, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_survey_csv, m)?)?;
    m.add_function(wrap_pyfunction!(lifetime, m)?)?;
    m.add_function(wrap_pyfunction!(max_perpetual_rate, m)?)?;
    m.add_function(wrap_pyfunction!(compare_lifetime, m)?)?;
    m.add_function(wrap_pyfunction!(power_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrappers_forward_to_core() {
        let wir = PyNodeConfig::preset("wir").unwrap();
        assert!((wir.node_power(1e6).unwrap() / 2.0e-3 - 1.0).abs() < 1e-12);
        assert!(PyNodeConfig::preset("zigbee").is_err());
        assert!(build_node(SensingModel::plateau(1e-9).unwrap(), "l", 1e-9, 1e6, 1.5).is_err());
        let m = PyEfficiencyModel::new(-0.5, 7e-7f64.log10(), 0.7e-9, 1.0, 1e8).unwrap();
        assert!((m.knee_rate().unwrap() / 1e6 - 1.0).abs() < 1e-9);
    }
}
