//! `iobenergy`: fits, sweeps, lifetimes and perpetual-operation checks for
//! body-worn sensor nodes.
//!
//! Results go to stdout as JSON (or to files via `--out`); warnings go to
//! stderr. Exit codes: 0 success, 1 internal error, 2 input or validation
//! error.

mod nodes;
mod output;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use iob_energy::benchfit::{self, CohortFilter};
use iob_energy::feasibility::{self, PerpetualRate, Spacing};
use iob_energy::model::{lifetime, Battery, HarvestBand, NodeConfig};
use iob_energy::sim::{self, HarvestProfile};

use nodes::{resolve, NodeSource};
use output::*;

#[derive(Debug, Parser)]
#[command(name = "iobenergy", version, about = "Energy-per-bit analysis for body-worn sensor nodes")]
struct Cli {
    /// Add the tool version to JSON outputs.
    #[arg(long, global = true)]
    stamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the log-log sensing-efficiency line to a survey CSV.
    Fit(FitArgs),
    /// Sweep node power (and lifetime when a battery is set) over data rate.
    Power(PowerArgs),
    /// Battery lifetime at one data rate.
    Lifetime(LifetimeArgs),
    /// Highest data rate a constant harvest can sustain.
    Feasible(FeasibleArgs),
    /// Lifetime of two configurations on the same battery.
    Compare(CompareArgs),
    /// Classify workloads as perpetual or battery-limited against a harvest band.
    Classify(ClassifyArgs),
    /// Run the discrete-time battery simulator.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct NodeArgs {
    /// Node configuration JSON file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in preset (bluetooth, wir, wir-future) or a name in the preset directory.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,
}

#[derive(Debug, Args)]
struct BatteryArgs {
    /// Battery capacity in mAh; replaces the configured battery.
    #[arg(long)]
    battery_mah: Option<f64>,
    /// Battery voltage; defaults to the configured voltage or 3.0 V.
    #[arg(long)]
    voltage: Option<f64>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Plateau floor in J/bit.
    #[arg(long, default_value_t = benchfit::DEFAULT_PLATEAU)]
    plateau: f64,
    /// Sensitivity band in volts, `MIN,MAX`.
    #[arg(long, value_name = "MIN,MAX")]
    sens_band: Option<String>,
    /// Keep only records with this ADC resolution.
    #[arg(long)]
    bits: Option<u8>,
    /// Skip invalid rows (reported on stderr) instead of failing.
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PowerArgs {
    #[arg(long = "config")]
    configs: Vec<PathBuf>,
    #[arg(long = "preset")]
    presets: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    rate_min: f64,
    #[arg(long, default_value_t = 1e8)]
    rate_max: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Logarithmic grid (default).
    #[arg(long, conflicts_with = "linear")]
    log: bool,
    #[arg(long)]
    linear: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LifetimeArgs {
    #[command(flatten)]
    node: NodeArgs,
    #[arg(long)]
    rate: f64,
    /// Constant harvested power in W.
    #[arg(long, default_value_t = 0.0)]
    harvest: f64,
    #[command(flatten)]
    battery: BatteryArgs,
}

#[derive(Debug, Args)]
struct FeasibleArgs {
    #[command(flatten)]
    node: NodeArgs,
    /// Harvested power in W.
    #[arg(long)]
    harvest: f64,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Config file or preset name.
    #[arg(long)]
    config_a: String,
    /// Config file or preset name.
    #[arg(long)]
    config_b: String,
    #[arg(long)]
    rate: f64,
    #[command(flatten)]
    battery: BatteryArgs,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    node: NodeArgs,
    /// Workload CSV `name,bandwidth_hz,rate_bps`; defaults to the bundled table.
    #[arg(long)]
    workloads: Option<PathBuf>,
    #[arg(long)]
    harvest_min: Option<f64>,
    #[arg(long)]
    harvest_max: Option<f64>,
    #[command(flatten)]
    battery: BatteryArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    node: NodeArgs,
    #[arg(long)]
    rate: f64,
    /// Harvest profile CSV `time_s,power_w`.
    #[arg(long, conflicts_with = "harvest")]
    profile: Option<PathBuf>,
    /// Repeat the profile every PERIOD seconds.
    #[arg(long, requires = "profile")]
    period: Option<f64>,
    /// Constant harvested power in W.
    #[arg(long)]
    harvest: Option<f64>,
    #[arg(long, default_value_t = sim::DEFAULT_DT)]
    dt: f64,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    battery: BatteryArgs,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Internal(_) => 1,
        }
    }
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Input(e.into())
}

fn internal<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Internal(e.into())
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stamp = cli.stamp;
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a, stamp),
        Command::Power(a) => cmd_power(a),
        Command::Lifetime(a) => cmd_lifetime(a, stamp),
        Command::Feasible(a) => cmd_feasible(a, stamp),
        Command::Compare(a) => cmd_compare(a, stamp),
        Command::Classify(a) => cmd_classify(a, stamp),
        Command::Simulate(a) => cmd_simulate(a, stamp),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(e) | Failure::Internal(e)) = &f;
            eprintln!("error: {e:#}");
            ExitCode::from(f.code())
        }
    }
}

/// Writes via a temporary file in the destination directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> CmdResult {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))
        .map_err(input)?;
    tmp.write_all(bytes).map_err(internal)?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(input)?;
    Ok(())
}

fn emit_json<T: serde::Serialize>(doc: &T, out: Option<&Path>) -> CmdResult {
    let text = serde_json::to_string_pretty(doc).map_err(internal)? + "\n";
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn positive(name: &str, v: f64) -> CmdResult {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(input(anyhow!("--{name} must be a positive number, got {v}")))
    }
}

fn load_node(args: &NodeArgs) -> Result<(String, NodeConfig), Failure> {
    let source = match (&args.config, &args.preset) {
        (Some(p), _) => NodeSource::File(p.clone()),
        (None, Some(name)) => NodeSource::Named(name.clone()),
        (None, None) => return Err(input(anyhow!("one of --config or --preset is required"))),
    };
    resolve(&source).map_err(input)
}

fn apply_battery(cfg: NodeConfig, args: &BatteryArgs) -> Result<NodeConfig, Failure> {
    match (args.battery_mah, args.voltage) {
        (None, None) => Ok(cfg),
        (mah, v) => {
            let mah = mah
                .or(cfg.battery().map(|b| b.capacity_mah()))
                .ok_or_else(|| input(anyhow!("--voltage given without a battery capacity")))?;
            let v = v.or(cfg.battery().map(|b| b.voltage())).unwrap_or(Battery::DEFAULT_VOLTAGE);
            let battery = Battery::new(mah, v).context("invalid battery").map_err(input)?;
            Ok(cfg.with_battery(battery))
        }
    }
}

fn parse_band(text: &str) -> Result<(f64, f64), Failure> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| input(anyhow!("--sens-band expects MIN,MAX, got `{text}`")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| input(anyhow!("--sens-band: cannot parse `{s}`")))
    };
    Ok((parse(a)?, parse(b)?))
}

fn cmd_fit(args: FitArgs, stamp: bool) -> CmdResult {
    let file = fs::File::open(&args.input)
        .with_context(|| format!("cannot open {}", args.input.display()))
        .map_err(input)?;
    let ingested = benchfit::ingest_records(file, args.lenient).map_err(input)?;
    for e in &ingested.rejected {
        eprintln!("warning: skipped {e}");
    }
    let band = args.sens_band.as_deref().map(parse_band).transpose()?;
    let filter = CohortFilter::new(band, args.bits).map_err(input)?;
    let cohort = filter.apply(&ingested.records);
    if cohort.is_empty() {
        return Err(input(anyhow!("empty cohort: no records match filter `{filter}`")));
    }
    let report = benchfit::fit_loglog_with(&ingested.records, args.plateau, filter).map_err(input)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    emit_json(&FitDoc::new(&report, stamp), args.out.as_deref())
}

fn cmd_power(args: PowerArgs) -> CmdResult {
    let mut nodes = Vec::new();
    for p in &args.configs {
        nodes.push(resolve(&NodeSource::File(p.clone())).map_err(input)?);
    }
    for name in &args.presets {
        nodes.push(resolve(&NodeSource::Named(name.clone())).map_err(input)?);
    }
    if nodes.is_empty() {
        return Err(input(anyhow!("give at least one --config or --preset")));
    }
    let spacing = if args.linear { Spacing::Linear } else { Spacing::Log };
    let refs: Vec<(&str, &NodeConfig)> = nodes.iter().map(|(l, c)| (l.as_str(), c)).collect();
    let sweep =
        feasibility::power_sweep(&refs, args.rate_min, args.rate_max, args.points, spacing).map_err(input)?;
    for gap in sweep.gaps() {
        eprintln!("warning: {} at {} bit/s: {}", gap.label, gap.rate, gap.reason);
    }
    let mut csv = Vec::new();
    sweep.write_csv(&mut csv).map_err(internal)?;
    match &args.out {
        Some(p) => write_atomic(p, &csv)?,
        None => print!("{}", String::from_utf8(csv).map_err(internal)?),
    }
    if let Some(path) = &args.svg {
        let series: Vec<svg::Series> = sweep
            .series
            .iter()
            .map(|s| svg::Series {
                label: &s.label,
                points: sweep.rates.iter().copied().zip(s.power.iter().copied()).collect(),
            })
            .collect();
        let chart = svg::loglog_chart("data rate (bit/s)", "node power (W)", &series);
        write_atomic(path, chart.as_bytes())?;
    }
    Ok(())
}

fn cmd_lifetime(args: LifetimeArgs, stamp: bool) -> CmdResult {
    let (_, cfg) = load_node(&args.node)?;
    let cfg = apply_battery(cfg, &args.battery)?;
    let battery = *cfg
        .battery()
        .ok_or_else(|| input(anyhow!("no battery: set one in the config or pass --battery-mah")))?;
    positive("rate", args.rate)?;
    let power = cfg.node_power(args.rate).map_err(input)?;
    let life = lifetime(&battery, power, args.harvest).map_err(input)?;
    emit_json(&LifetimeDoc::new(power, life, stamp), None)
}

fn cmd_feasible(args: FeasibleArgs, stamp: bool) -> CmdResult {
    let (_, cfg) = load_node(&args.node)?;
    positive("harvest", args.harvest)?;
    let verdict = feasibility::max_perpetual_rate(&cfg, args.harvest).map_err(input)?;
    if let PerpetualRate::Infeasible { power_at_min } = verdict {
        eprintln!("warning: needs {power_at_min} W at the lowest valid rate, above the harvest");
    }
    emit_json(&FeasibleDoc::new(args.harvest, &verdict, stamp), None)
}

fn cmd_compare(args: CompareArgs, stamp: bool) -> CmdResult {
    let (_, a) = resolve(&NodeSource::parse(&args.config_a)).map_err(input)?;
    let (_, b) = resolve(&NodeSource::parse(&args.config_b)).map_err(input)?;
    let a = apply_battery(a, &args.battery)?;
    let b = apply_battery(b, &args.battery)?;
    positive("rate", args.rate)?;
    let cmp = feasibility::compare_lifetime(&a, &b, args.rate).map_err(input)?;
    emit_json(&CompareDoc::new(&cmp, stamp), None)
}

fn cmd_classify(args: ClassifyArgs, stamp: bool) -> CmdResult {
    let (_, cfg) = load_node(&args.node)?;
    let cfg = apply_battery(cfg, &args.battery)?;
    let default_band = cfg.harvest().copied().unwrap_or_else(HarvestBand::indoor);
    let band = HarvestBand::new(
        args.harvest_min.unwrap_or(default_band.p_min()),
        args.harvest_max.unwrap_or(default_band.p_max()),
    )
    .context("invalid harvest band")
    .map_err(input)?;
    let workloads = match &args.workloads {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("cannot read {}", p.display()))
                .map_err(input)?;
            feasibility::parse_workloads(&text).map_err(input)?
        }
        None => feasibility::bundled_workloads(),
    };
    let verdict = feasibility::assess(&cfg, &band, &workloads).map_err(input)?;
    emit_json(&ClassifyDoc::new(&verdict, band.p_min(), stamp), None)
}

fn cmd_simulate(args: SimulateArgs, stamp: bool) -> CmdResult {
    let (_, cfg) = load_node(&args.node)?;
    let cfg = apply_battery(cfg, &args.battery)?;
    let profile = match (&args.profile, args.harvest) {
        (Some(p), _) => {
            let file = fs::File::open(p)
                .with_context(|| format!("cannot open {}", p.display()))
                .map_err(input)?;
            HarvestProfile::from_csv(file, args.period)
                .with_context(|| format!("bad profile {}", p.display()))
                .map_err(input)?
        }
        (None, h) => HarvestProfile::constant(h.unwrap_or(0.0)).map_err(input)?,
    };
    let trace = sim::simulate(&cfg, args.rate, &profile, args.dt, args.horizon).map_err(input)?;
    if let Some(path) = &args.out {
        let mut csv = Vec::new();
        trace.write_csv(&mut csv).map_err(internal)?;
        write_atomic(path, &csv)?;
    }
    let closed_form = match &profile {
        HarvestProfile::Constant(h) => cfg
            .battery()
            .and_then(|b| lifetime(b, trace.load_power, *h).ok())
            .and_then(|l| l.seconds()),
        _ => None,
    };
    emit_json(&SimulateDoc::new(&trace, closed_form, stamp), None)
}
