//! Surveyed analog-front-end benchmarks and the log-log efficiency fit.
//!
//! Each record is reduced to a point `(rate, power / rate)`. Records are
//! first narrowed to a comparable cohort (sensitivity band and ADC
//! resolution), then `log10(eta)` is regressed on `log10(rate)` by ordinary
//! least squares. The plateau floor is a parameter, not an estimate: it is
//! applied when the resulting model is evaluated, never to the fit inputs.

use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{IngestError, ModelError, Result};
use crate::model::EfficiencyModel;

/// Column order of the survey CSV.
pub const CSV_COLUMNS: [&str; 7] = [
    "source_id",
    "kind",
    "power_w",
    "data_rate_bps",
    "sensitivity_v",
    "resolution_bits",
    "notes",
];

/// Transcribed front-end survey shipped with the crate.
pub const BUNDLED_SURVEY: &str = include_str!("../data/afe_survey.csv");

/// Default sensing plateau in J/bit.
pub const DEFAULT_PLATEAU: f64 = 0.7e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub source_id: String,
    pub kind: String,
    /// Front-end power, W.
    pub power: f64,
    /// Output data rate, bit/s.
    pub data_rate: f64,
    /// Input-referred sensitivity, V.
    pub sensitivity: f64,
    pub resolution_bits: u8,
    pub notes: String,
}

impl BenchmarkRecord {
    /// Checks the record invariants, naming the offending column.
    pub fn validate(&self) -> std::result::Result<(), (&'static str, String)> {
        fn positive(col: &'static str, v: f64) -> std::result::Result<(), (&'static str, String)> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err((col, format!("{v} must be positive and finite")))
            }
        }
        positive("power_w", self.power)?;
        positive("data_rate_bps", self.data_rate)?;
        positive("sensitivity_v", self.sensitivity)?;
        if !(1..=32).contains(&self.resolution_bits) {
            return Err((
                "resolution_bits",
                format!("{} outside 1..=32", self.resolution_bits),
            ));
        }
        Ok(())
    }

    /// `(rate, eta)`: the record as a per-bit energy point.
    pub fn to_efficiency(&self) -> (f64, f64) {
        to_efficiency(self)
    }
}

pub fn to_efficiency(record: &BenchmarkRecord) -> (f64, f64) {
    (record.data_rate, record.power / record.data_rate)
}

/// Result of ingesting a survey file.
#[derive(Debug, Default)]
pub struct Ingested {
    pub records: Vec<BenchmarkRecord>,
    /// Rejected rows; only populated in lenient mode.
    pub rejected: Vec<IngestError>,
}

/// Reads survey records. Strict mode stops at the first bad row; lenient
/// mode collects the failure and moves on.
pub fn ingest_records<R: Read>(input: R, lenient: bool) -> std::result::Result<Ingested, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut index = HashMap::new();
    for col in CSV_COLUMNS {
        let pos = headers
            .iter()
            .position(|h| h == col)
            .ok_or_else(|| IngestError::MissingColumn(col.to_string()))?;
        index.insert(col, pos);
    }

    let mut out = Ingested::default();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map(|p| p.line() as usize).unwrap_or(0);
        match parse_row(&row, &index, line) {
            Ok(rec) => out.records.push(rec),
            Err(e) if lenient => out.rejected.push(e),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn parse_row(
    row: &csv::StringRecord,
    index: &HashMap<&'static str, usize>,
    line: usize,
) -> std::result::Result<BenchmarkRecord, IngestError> {
    let field = |col: &'static str| -> std::result::Result<&str, IngestError> {
        row.get(index[col]).ok_or_else(|| IngestError::Field {
            row: line,
            column: col.to_string(),
            message: "missing value".into(),
        })
    };
    let number = |col: &'static str| -> std::result::Result<f64, IngestError> {
        let raw = field(col)?;
        raw.parse::<f64>().map_err(|_| IngestError::Field {
            row: line,
            column: col.to_string(),
            message: format!("cannot parse `{raw}` as a number"),
        })
    };
    let resolution_raw = field("resolution_bits")?;
    let resolution_bits = resolution_raw.parse::<u8>().map_err(|_| IngestError::Field {
        row: line,
        column: "resolution_bits".into(),
        message: format!("cannot parse `{resolution_raw}` as an integer in 1..=32"),
    })?;
    let rec = BenchmarkRecord {
        source_id: field("source_id")?.to_string(),
        kind: field("kind")?.to_string(),
        power: number("power_w")?,
        data_rate: number("data_rate_bps")?,
        sensitivity: number("sensitivity_v")?,
        resolution_bits,
        notes: field("notes")?.to_string(),
    };
    rec.validate().map_err(|(column, message)| IngestError::Field {
        row: line,
        column: column.to_string(),
        message,
    })?;
    Ok(rec)
}

/// Writes records in the survey schema. Output re-ingests to the same records.
pub fn write_records<W: Write>(out: W, records: &[BenchmarkRecord]) -> std::result::Result<(), IngestError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.write_record([
            r.source_id.clone(),
            r.kind.clone(),
            r.power.to_string(),
            r.data_rate.to_string(),
            r.sensitivity.to_string(),
            r.resolution_bits.to_string(),
            r.notes.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Iso-sensitivity / iso-resolution cohort selection.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CohortFilter {
    /// Inclusive sensitivity band in volts.
    pub sensitivity_band: Option<(f64, f64)>,
    pub resolution_bits: Option<u8>,
}

impl CohortFilter {
    pub fn any() -> Self {
        Self::default()
    }

    pub fn new(sensitivity_band: Option<(f64, f64)>, resolution_bits: Option<u8>) -> Result<Self> {
        if let Some((lo, hi)) = sensitivity_band {
            if lo.is_nan() || hi.is_nan() || lo > hi {
                return Err(ModelError::domain(
                    "sensitivity band",
                    lo,
                    "band minimum must not exceed band maximum",
                ));
            }
        }
        Ok(CohortFilter {
            sensitivity_band,
            resolution_bits,
        })
    }

    pub fn matches(&self, r: &BenchmarkRecord) -> bool {
        let in_band = self
            .sensitivity_band
            .is_none_or(|(lo, hi)| r.sensitivity >= lo && r.sensitivity <= hi);
        let res_ok = self.resolution_bits.is_none_or(|b| r.resolution_bits == b);
        in_band && res_ok
    }

    pub fn apply(&self, records: &[BenchmarkRecord]) -> Vec<BenchmarkRecord> {
        records.iter().filter(|r| self.matches(r)).cloned().collect()
    }
}

impl fmt::Display for CohortFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sensitivity_band {
            Some((lo, hi)) => write!(f, "sensitivity in [{lo:e}, {hi:e}] V")?,
            None => write!(f, "sensitivity any")?,
        }
        match self.resolution_bits {
            Some(b) => write!(f, "; resolution {b} bits"),
            None => write!(f, "; resolution any"),
        }
    }
}

pub fn cohort_filter(
    records: &[BenchmarkRecord],
    sensitivity_band: Option<(f64, f64)>,
    resolution_bits: Option<u8>,
) -> Result<Vec<BenchmarkRecord>> {
    Ok(CohortFilter::new(sensitivity_band, resolution_bits)?.apply(records))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWarning {
    /// Efficiency does not improve with rate.
    NonNegativeSlope,
    /// Node power is not monotone in rate below the knee.
    SteepSlope,
}

impl fmt::Display for FitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitWarning::NonNegativeSlope => f.write_str("fitted slope is not negative; efficiency does not improve with rate"),
            FitWarning::SteepSlope => f.write_str("fitted slope is at or below -1; node power is non-monotone below the knee"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub model: EfficiencyModel,
    pub n_points: usize,
    pub r_squared: f64,
    /// `log10(eta) - fitted`, in input order.
    pub residuals: Vec<f64>,
    pub cohort_filter: String,
    pub warnings: Vec<FitWarning>,
}

/// Least-squares line through `(x, y)` pairs. Returns `(slope, intercept)`.
///
/// Sums are taken over the points sorted by `(x, y)` so the result does not
/// depend on input order.
pub(crate) fn least_squares_line(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(x, y) in &pts {
        let dx = x - mean_x;
        sxx += dx * dx;
        sxy += dx * (y - mean_y);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, mean_y - slope * mean_x))
}

/// Fits the log-log efficiency line to `records`.
pub fn fit_loglog(records: &[BenchmarkRecord], plateau_floor: f64) -> Result<FitReport> {
    fit_loglog_with(records, plateau_floor, CohortFilter::any())
}

/// Applies `filter` and fits what remains.
pub fn fit_loglog_with(
    records: &[BenchmarkRecord],
    plateau_floor: f64,
    filter: CohortFilter,
) -> Result<FitReport> {
    let cohort = filter.apply(records);
    let points: Vec<(f64, f64)> = cohort
        .iter()
        .map(|r| {
            let (rate, eta) = to_efficiency(r);
            (rate.log10(), eta.log10())
        })
        .collect();

    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(ModelError::Fit(format!(
            "fewer than 2 distinct rates ({} records after filter: {filter})",
            cohort.len()
        )));
    }

    let (slope, intercept) =
        least_squares_line(&points).ok_or_else(|| ModelError::Fit("degenerate abscissae".into()))?;

    let residual = |&(x, y): &(f64, f64)| y - (slope * x + intercept);
    let residuals: Vec<f64> = points.iter().map(residual).collect();
    let mut sorted = points.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mean_y = sorted.iter().map(|p| p.1).sum::<f64>() / sorted.len() as f64;
    let ss_res: f64 = sorted.iter().map(|p| residual(p).powi(2)).sum();
    let ss_tot: f64 = sorted.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };

    let rate_min = cohort.iter().map(|r| r.data_rate).fold(f64::INFINITY, f64::min);
    let rate_max = cohort.iter().map(|r| r.data_rate).fold(0.0, f64::max);
    let model = EfficiencyModel::new(slope, intercept, plateau_floor, rate_min, rate_max)?;

    let mut warnings = Vec::new();
    if slope >= 0.0 {
        warnings.push(FitWarning::NonNegativeSlope);
    } else if !model.power_is_monotone() {
        warnings.push(FitWarning::SteepSlope);
    }

    Ok(FitReport {
        model,
        n_points: cohort.len(),
        r_squared,
        residuals,
        cohort_filter: filter.to_string(),
        warnings,
    })
}

/// The bundled survey, parsed.
pub fn bundled_records() -> Vec<BenchmarkRecord> {
    ingest_records(BUNDLED_SURVEY.as_bytes(), false)
        .expect("bundled survey is valid")
        .records
}
