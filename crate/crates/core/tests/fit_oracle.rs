use iob_energy::benchfit::{self, fit_loglog, fit_loglog_with, BenchmarkRecord, CohortFilter, DEFAULT_PLATEAU};
use iob_energy::config::preset;
use iob_energy::feasibility::{knee_rate, max_perpetual_rate};
use iob_energy::{CommProtocol, NodeConfig, SensingModel};
use proptest::prelude::*;

/// Raw normal equations `[n Sx; Sx Sxx] [c m]' = [Sy Sxy]'` solved by
/// Cramer's rule, with no centering.
fn normal_equations(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    let m = (n * sxy - sx * sy) / det;
    let c = (sxx * sy - sx * sxy) / det;
    (m, c)
}

fn record(rate: f64, eta: f64) -> BenchmarkRecord {
    BenchmarkRecord {
        source_id: format!("r{rate}"),
        kind: "synthetic".into(),
        power: eta * rate,
        data_rate: rate,
        sensitivity: 1e-6,
        resolution_bits: 16,
        notes: String::new(),
    }
}

fn log_points(records: &[BenchmarkRecord]) -> Vec<(f64, f64)> {
    records
        .iter()
        .map(|r| (r.data_rate.log10(), (r.power / r.data_rate).log10()))
        .collect()
}

fn generator(m: f64, c: f64) -> impl Fn(f64) -> f64 {
    move |rate: f64| 10f64.powf(m * rate.log10() + c)
}

#[test]
fn fit_inverts_its_generator() {
    let c = 7e-7f64.log10();
    let eta = generator(-0.5, c);
    let recs: Vec<_> = [1e2, 1e3, 1e4, 1e5].iter().map(|&r| record(r, eta(r))).collect();
    let rep = fit_loglog(&recs, DEFAULT_PLATEAU).unwrap();
    assert!((rep.model.slope() + 0.5).abs() < 1e-9);
    assert!((rep.model.intercept() - c).abs() < 1e-9);
    assert!((rep.r_squared - 1.0).abs() < 1e-12);
    assert_eq!(rep.n_points, 4);
    assert!(rep.warnings.is_empty());
}

#[test]
fn alternating_noise_stays_near_generator() {
    let eta = generator(-0.5, 7e-7f64.log10());
    let recs: Vec<_> = [1e2, 1e3, 1e4, 1e5]
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            record(r, eta(r) * 10f64.powf(0.1 * sign))
        })
        .collect();
    let rep = fit_loglog(&recs, DEFAULT_PLATEAU).unwrap();
    assert!((rep.model.slope() + 0.5).abs() <= 0.1);
    let mean: f64 = rep.residuals.iter().sum::<f64>() / rep.residuals.len() as f64;
    assert!(mean.abs() < 1e-9);
    let (m, c) = normal_equations(&log_points(&recs));
    assert!((rep.model.slope() - m).abs() < 1e-9);
    assert!((rep.model.intercept() - c).abs() < 1e-9);
}

#[test]
fn bundled_survey_matches_oracle_and_has_expected_shape() {
    let all = benchfit::bundled_records();
    let filter = CohortFilter::new(None, Some(16)).unwrap();
    let cohort = filter.apply(&all);
    assert!(cohort.len() < all.len());

    for recs in [&all, &cohort] {
        let rep = fit_loglog(recs, DEFAULT_PLATEAU).unwrap();
        let (m, c) = normal_equations(&log_points(recs));
        assert!((rep.model.slope() - m).abs() < 1e-9);
        assert!((rep.model.intercept() - c).abs() < 1e-9);
    }

    let rep = fit_loglog_with(&all, DEFAULT_PLATEAU, filter).unwrap();
    assert!(rep.model.slope() < 0.0);
    let knee = knee_rate(&rep.model).unwrap();
    assert!(knee.within_range, "knee {} outside [{}, {}]", knee.rate, rep.model.rate_min(), rep.model.rate_max());

    let bt = preset("bluetooth").unwrap();
    let fitted = NodeConfig::new(
        SensingModel::Fitted(rep.model),
        CommProtocol::new("bluetooth", bt.comm().energy_per_bit(), bt.comm().max_rate()).unwrap(),
        0.4,
    )
    .unwrap();
    let threshold = max_perpetual_rate(&fitted, 100e-6).unwrap().rate().unwrap();
    assert!(threshold < 10e3, "{threshold}");
}

fn dataset() -> impl Strategy<Value = Vec<(f64, f64)>> {
    // (log10 rate, log10 eta) pairs; at least two distinct rates
    prop::collection::vec((0.0f64..8.0, -11.0f64..-5.0), 2..40)
        .prop_filter("two distinct rates", |v| v.iter().any(|p| (p.0 - v[0].0).abs() > 1e-3))
}

fn to_records(pts: &[(f64, f64)]) -> Vec<BenchmarkRecord> {
    pts.iter()
        .map(|&(lx, ly)| record(10f64.powf(lx), 10f64.powf(ly)))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn fit_matches_normal_equations(pts in dataset()) {
        let recs = to_records(&pts);
        let rep = fit_loglog(&recs, DEFAULT_PLATEAU).unwrap();
        let (m, c) = normal_equations(&log_points(&recs));
        prop_assert!((rep.model.slope() - m).abs() < 1e-9, "{} vs {}", rep.model.slope(), m);
        prop_assert!((rep.model.intercept() - c).abs() < 1e-9);
        prop_assert!(rep.r_squared <= 1.0 + 1e-12);
    }

    #[test]
    fn residuals_sum_to_zero(pts in dataset()) {
        let rep = fit_loglog(&to_records(&pts), DEFAULT_PLATEAU).unwrap();
        prop_assert!(rep.residuals.iter().sum::<f64>().abs() < 1e-9);
    }

    #[test]
    fn fit_ignores_record_order(pts in dataset(), seed in any::<u64>()) {
        let recs = to_records(&pts);
        let mut shuffled = recs.clone();
        // deterministic Fisher-Yates from the seed
        let mut s = seed;
        for i in (1..shuffled.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            shuffled.swap(i, (s >> 33) as usize % (i + 1));
        }
        let a = fit_loglog(&recs, DEFAULT_PLATEAU).unwrap();
        let b = fit_loglog(&shuffled, DEFAULT_PLATEAU).unwrap();
        prop_assert_eq!(a.model, b.model);
        prop_assert_eq!(a.r_squared.to_bits(), b.r_squared.to_bits());
        let mut ra = a.residuals.clone();
        let mut rb = b.residuals.clone();
        ra.sort_by(f64::total_cmp);
        rb.sort_by(f64::total_cmp);
        prop_assert_eq!(ra, rb);
    }

    #[test]
    fn power_scaling_shifts_intercept(pts in dataset(), log_k in -3.0f64..3.0) {
        let k = 10f64.powf(log_k);
        let recs = to_records(&pts);
        let scaled: Vec<_> = recs.iter().map(|r| BenchmarkRecord { power: r.power * k, ..r.clone() }).collect();
        let a = fit_loglog(&recs, DEFAULT_PLATEAU).unwrap();
        let b = fit_loglog(&scaled, DEFAULT_PLATEAU).unwrap();
        prop_assert!((b.model.slope() - a.model.slope()).abs() < 1e-9);
        prop_assert!((b.model.intercept() - a.model.intercept() - k.log10()).abs() < 1e-9);
    }

    #[test]
    fn survey_csv_round_trips(pts in dataset()) {
        let recs = to_records(&pts);
        let mut buf = Vec::new();
        benchfit::write_records(&mut buf, &recs).unwrap();
        let back = benchfit::ingest_records(buf.as_slice(), false).unwrap().records;
        prop_assert_eq!(back, recs);
    }
}
