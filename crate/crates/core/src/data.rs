//! Price ingestion, weekly smoothing, percentage-change normalisation and
//! the synthetic dataset generators used by the benchmarks.

use std::collections::HashMap;
use std::f64::consts::PI;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Name of the trailing column that marks a CSV as already-prepared samples.
pub const TARGET_COLUMN: &str = "target";

const DEFAULT_FEATURES: [&str; 6] = ["platinum", "palladium", "rhodium", "gold", "brent", "zar_usd"];

#[derive(Debug, Clone, PartialEq)]
pub struct PriceRow {
    pub date: NaiveDate,
    pub values: Vec<f64>,
}

/// Daily (or weekly, after [`weekly_average`]) prices, sorted by date.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub feature_names: Vec<String>,
    pub rows: Vec<PriceRow>,
}

impl RawSeries {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeekChanges {
    pub week_index: usize,
    /// Fractional change per feature (0.10 means +10 %).
    pub changes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    pub weeks: Vec<WeekChanges>,
}

impl FeatureMatrix {
    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

/// One supervised step: this week's changes and next week's target change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Vec<f64>,
    pub t: f64,
}

impl Sample {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        Self { x, t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub x: [f64; 2],
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub length: usize,
    pub coeffs: Vec<f64>,
    pub noise_sd: f64,
}

/// Recipe for a piecewise-stationary synthetic series.
///
/// Features follow independent AR(1) processes
/// `x_w = ar_coeff * x_{w-1} + N(0, feature_sd)`; the target paired with
/// week `w` is `clamp(coeffs · x_w + N(0, noise_sd), -0.2, 0.2)` using the
/// coefficients of the regime that week falls in.
///
/// With `min_signal > 0` a week's innovations are redrawn until
/// `|coeffs · x_w| >= min_signal`. The relative error measure is unbounded
/// for targets near zero, so this keeps one near-flat week from
/// dominating an average over a short test span.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub n_weeks: usize,
    pub regimes: Vec<Regime>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ar_coeff")]
    pub ar_coeff: f64,
    #[serde(default = "default_feature_sd")]
    pub feature_sd: f64,
    #[serde(default)]
    pub min_signal: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_names: Option<Vec<String>>,
}

/// Redraw budget per week when enforcing `min_signal`.
const MAX_REDRAWS: usize = 10_000;

fn default_ar_coeff() -> f64 {
    0.3
}

fn default_feature_sd() -> f64 {
    0.03
}

impl DriftSpec {
    /// Two single-driver regimes over six features: a palladium-driven
    /// stretch, a gold-driven stretch, then a return to palladium. Laid out
    /// as 100 training weeks followed by a 20-week test span whose last
    /// eight weeks switch regime.
    pub fn two_regime(seed: u64) -> Self {
        let gold = vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0];
        let palladium = vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        let regime = |length, coeffs: &Vec<f64>| Regime {
            length,
            coeffs: coeffs.clone(),
            noise_sd: 0.002,
        };
        let regimes = vec![regime(50, &palladium), regime(62, &gold), regime(8, &palladium)];
        Self {
            n_weeks: regimes.iter().map(|r| r.length).sum(),
            regimes,
            seed,
            ar_coeff: default_ar_coeff(),
            feature_sd: 0.05,
            min_signal: 0.02,
            feature_names: None,
        }
    }

    pub fn n_features(&self) -> usize {
        self.regimes.first().map_or(0, |r| r.coeffs.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.regimes.is_empty() {
            return Err(Error::invalid("drift spec needs at least one regime"));
        }
        let f = self.n_features();
        if f == 0 {
            return Err(Error::invalid("regime coefficients must be non-empty"));
        }
        let total: usize = self.regimes.iter().map(|r| r.length).sum();
        if total != self.n_weeks {
            return Err(Error::invalid(format!(
                "regime lengths sum to {total}, expected n_weeks = {}",
                self.n_weeks
            )));
        }
        for r in &self.regimes {
            if r.coeffs.len() != f {
                return Err(Error::invalid("all regimes must have the same number of coefficients"));
            }
            if !(r.noise_sd >= 0.0 && r.noise_sd.is_finite()) {
                return Err(Error::invalid("noise_sd must be finite and >= 0"));
            }
            if r.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid("regime coefficients must be finite"));
            }
        }
        if !(self.feature_sd >= 0.0 && self.feature_sd.is_finite()) {
            return Err(Error::invalid("feature_sd must be finite and >= 0"));
        }
        if !(self.min_signal >= 0.0 && self.min_signal < 0.2) {
            return Err(Error::invalid("min_signal must lie in [0, 0.2)"));
        }
        if !self.ar_coeff.is_finite() || self.ar_coeff.abs() >= 1.0 {
            return Err(Error::invalid("ar_coeff must lie in (-1, 1)"));
        }
        if let Some(names) = &self.feature_names {
            if names.len() != f {
                return Err(Error::invalid("feature_names length must match coefficient count"));
            }
        }
        Ok(())
    }

    pub fn resolved_feature_names(&self) -> Vec<String> {
        match &self.feature_names {
            Some(names) => names.clone(),
            None => default_feature_names(self.n_features()),
        }
    }
}

pub fn default_feature_names(f: usize) -> Vec<String> {
    if f == DEFAULT_FEATURES.len() {
        DEFAULT_FEATURES.iter().map(|s| s.to_string()).collect()
    } else {
        (1..=f).map(|i| format!("f{i}")).collect()
    }
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::Parse {
        line,
        msg: format!("malformed csv ({e})"),
    }
}

fn parse_value(field: &str, line: u64) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid number {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value {field:?}"),
        });
    }
    Ok(v)
}

/// Parse `date,<f1>,...,<fF>` price CSV text into a date-sorted series.
pub fn load_csv(text: &str) -> Result<RawSeries> {
    let mut reader = csv_reader(text);
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            msg: "header needs a date column and at least one feature".into(),
        });
    }
    let feature_names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let f = feature_names.len();

    let mut rows = Vec::new();
    let mut seen: HashMap<NaiveDate, u64> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != f + 1 {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", f + 1, record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|_| Error::Parse {
            line,
            msg: format!("invalid date {:?}", &record[0]),
        })?;
        if seen.insert(date, line).is_some() {
            return Err(Error::DuplicateDate {
                line,
                date: date.to_string(),
            });
        }
        let mut values = Vec::with_capacity(f);
        for field in record.iter().skip(1) {
            let v = parse_value(field, line)?;
            if v <= 0.0 {
                return Err(Error::NonPositive { line });
            }
            values.push(v);
        }
        rows.push(PriceRow { date, values });
    }
    rows.sort_by_key(|r| r.date);
    Ok(RawSeries { feature_names, rows })
}

/// Collapse daily rows into one row per ISO-8601 week, dated on its Monday.
pub fn weekly_average(series: &RawSeries) -> Result<RawSeries> {
    if series.rows.is_empty() {
        return Err(Error::Empty);
    }
    let f = series.n_features();
    let mut out: Vec<PriceRow> = Vec::new();
    let mut sums = vec![0.0; f];
    let mut count = 0usize;
    let mut current: Option<(i32, u32)> = None;

    let mut flush = |key: (i32, u32), sums: &mut Vec<f64>, count: usize| {
        let monday = NaiveDate::from_isoywd_opt(key.0, key.1, Weekday::Mon)
            .expect("iso week taken from a valid date");
        out.push(PriceRow {
            date: monday,
            values: sums.iter().map(|s| s / count as f64).collect(),
        });
        sums.iter_mut().for_each(|s| *s = 0.0);
    };

    for row in &series.rows {
        let iso = row.date.iso_week();
        let key = (iso.year(), iso.week());
        if let Some(prev) = current {
            if prev != key {
                flush(prev, &mut sums, count);
                count = 0;
            }
        }
        current = Some(key);
        for (s, v) in sums.iter_mut().zip(&row.values) {
            *s += v;
        }
        count += 1;
    }
    if let Some(key) = current {
        flush(key, &mut sums, count);
    }
    Ok(RawSeries {
        feature_names: series.feature_names.clone(),
        rows: out,
    })
}

pub fn to_percent_changes(series: &RawSeries) -> Result<FeatureMatrix> {
    if series.rows.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            available: series.rows.len(),
        });
    }
    let weeks = series
        .rows
        .windows(2)
        .enumerate()
        .map(|(i, pair)| WeekChanges {
            week_index: i,
            changes: pair[0]
                .values
                .iter()
                .zip(&pair[1].values)
                .map(|(prev, cur)| (cur - prev) / prev)
                .collect(),
        })
        .collect();
    Ok(FeatureMatrix {
        feature_names: series.feature_names.clone(),
        weeks,
    })
}

/// Inverse of [`to_percent_changes`]: rebuild prices from a starting row.
pub fn reconstruct_prices(first: &[f64], m: &FeatureMatrix) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(m.weeks.len() + 1);
    out.push(first.to_vec());
    for week in &m.weeks {
        let prev = out.last().expect("non-empty");
        let next = prev.iter().zip(&week.changes).map(|(p, c)| p * (1.0 + c)).collect();
        out.push(next);
    }
    out
}

/// Pair each week's changes with the following week's `target_feature` change.
pub fn make_samples(m: &FeatureMatrix, target_feature: usize) -> Result<Vec<Sample>> {
    if target_feature >= m.n_features() {
        return Err(Error::invalid(format!(
            "target feature {target_feature} out of range for {} features",
            m.n_features()
        )));
    }
    if m.weeks.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            available: m.weeks.len(),
        });
    }
    Ok(m.weeks
        .windows(2)
        .map(|pair| Sample::new(pair[0].changes.clone(), pair[1].changes[target_feature]))
        .collect())
}

/// Two interleaving half-circle arcs with isotropic Gaussian noise.
///
/// Class 0 lies on `(cos s, sin s)`, class 1 on `(1 - cos s, 0.5 - sin s)`
/// for `s` uniform on `[0, pi]`. Labels alternate so every prefix is
/// balanced to within one point.
pub fn gen_crescents(n: usize, noise_sd: f64, seed: u64) -> Result<Vec<LabeledPoint>> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::invalid("crescent count must be even and >= 2"));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::invalid("noise_sd must be finite and >= 0"));
    }
    let mut rng = rng_from_seed(seed);
    let noise = Normal::new(0.0, noise_sd).expect("validated sd");
    Ok((0..n)
        .map(|i| {
            let label = (i % 2) as u8;
            let s = rng.random_range(0.0..=PI);
            let base = crescent_arc(label, s);
            let x = [base[0] + noise.sample(&mut rng), base[1] + noise.sample(&mut rng)];
            LabeledPoint { x, label }
        })
        .collect())
}

pub fn crescent_arc(label: u8, s: f64) -> [f64; 2] {
    if label == 0 {
        [s.cos(), s.sin()]
    } else {
        [1.0 - s.cos(), 0.5 - s.sin()]
    }
}

/// Generate features and aligned targets: `targets[w]` is the change that
/// follows week `w`, so `(weeks[w].changes, targets[w])` is one sample.
pub fn gen_drifting_series(spec: &DriftSpec) -> Result<(FeatureMatrix, Vec<f64>)> {
    spec.validate()?;
    let f = spec.n_features();
    let mut rng = rng_from_seed(spec.seed);
    let feature_noise = Normal::new(0.0, spec.feature_sd).expect("validated sd");

    let mut weeks = Vec::with_capacity(spec.n_weeks);
    let mut targets = Vec::with_capacity(spec.n_weeks);
    let mut x = vec![0.0; f];
    let mut w = 0usize;
    for regime in &spec.regimes {
        let target_noise = Normal::new(0.0, regime.noise_sd).expect("validated sd");
        for _ in 0..regime.length {
            let prev = x.clone();
            let mut signal;
            let mut redraws = 0;
            loop {
                for (v, p) in x.iter_mut().zip(&prev) {
                    *v = spec.ar_coeff * p + feature_noise.sample(&mut rng);
                }
                signal = regime.coeffs.iter().zip(&x).map(|(c, v)| c * v).sum::<f64>();
                if signal.abs() >= spec.min_signal {
                    break;
                }
                redraws += 1;
                if redraws == MAX_REDRAWS {
                    return Err(Error::invalid(format!(
                        "min_signal {} unreachable in week {w}",
                        spec.min_signal
                    )));
                }
            }
            let t = (signal + target_noise.sample(&mut rng)).clamp(-0.2, 0.2);
            weeks.push(WeekChanges {
                week_index: w,
                changes: x.clone(),
            });
            targets.push(t);
            w += 1;
        }
    }
    Ok((
        FeatureMatrix {
            feature_names: spec.resolved_feature_names(),
            weeks,
        },
        targets,
    ))
}

pub fn drift_samples(m: &FeatureMatrix, targets: &[f64]) -> Vec<Sample> {
    m.weeks
        .iter()
        .zip(targets)
        .map(|(w, &t)| Sample::new(w.changes.clone(), t))
        .collect()
}

/// A table of prepared samples as read from a CSV with a trailing
/// `target` column.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    pub key_column: String,
    pub keys: Vec<String>,
    pub feature_names: Vec<String>,
    pub samples: Vec<Sample>,
}

pub fn write_samples_csv(table: &SampleTable) -> String {
    let mut out = String::new();
    out.push_str(&table.key_column);
    for name in &table.feature_names {
        out.push(',');
        out.push_str(name);
    }
    out.push(',');
    out.push_str(TARGET_COLUMN);
    out.push('\n');
    for (key, s) in table.keys.iter().zip(&table.samples) {
        out.push_str(key);
        for v in &s.x {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(",{}\n", s.t));
    }
    out
}

pub fn load_samples_csv(text: &str) -> Result<SampleTable> {
    let mut reader = csv_reader(text);
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.len() < 3 || &header[header.len() - 1] != TARGET_COLUMN {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header needs a key column, features and a final {TARGET_COLUMN:?} column"),
        });
    }
    let f = header.len() - 2;
    let feature_names = header.iter().skip(1).take(f).map(str::to_string).collect();
    let mut keys = Vec::new();
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != f + 2 {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", f + 2, record.len()),
            });
        }
        let x = record
            .iter()
            .skip(1)
            .take(f)
            .map(|v| parse_value(v, line))
            .collect::<Result<Vec<_>>>()?;
        let t = parse_value(&record[f + 1], line)?;
        keys.push(record[0].to_string());
        samples.push(Sample::new(x, t));
    }
    Ok(SampleTable {
        key_column: header[0].to_string(),
        keys,
        feature_names,
        samples,
    })
}

/// Load either a prepared sample table or a raw price CSV. Raw prices go
/// through weekly averaging, percentage changes and [`make_samples`].
pub fn load_dataset(text: &str, target_feature: usize) -> Result<Vec<Sample>> {
    let first_line = text.lines().next().unwrap_or_default();
    let is_table = first_line
        .rsplit(',')
        .next()
        .is_some_and(|last| last.trim() == TARGET_COLUMN);
    if is_table {
        return Ok(load_samples_csv(text)?.samples);
    }
    let weekly = weekly_average(&load_csv(text)?)?;
    make_samples(&to_percent_changes(&weekly)?, target_feature)
}

/// Synthetic weekly dates (Mondays) starting 2001-01-01 for exported tables.
pub fn synthetic_dates(n: usize) -> Vec<String> {
    let start = NaiveDate::from_ymd_opt(2001, 1, 1).expect("valid date");
    (0..n)
        .map(|i| (start + chrono::Duration::weeks(i as i64)).to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(rows: &[(&str, f64)]) -> RawSeries {
        RawSeries {
            feature_names: vec!["p".into()],
            rows: rows
                .iter()
                .map(|(d, v)| PriceRow {
                    date: d.parse().unwrap(),
                    values: vec![*v],
                })
                .collect(),
        }
    }

    #[test]
    fn load_two_rows() {
        let s = load_csv("date,pt,au\n2020-01-06,900,1500\n2020-01-07,910,1490\n").unwrap();
        assert_eq!(s.rows.len(), 2);
        assert_eq!(s.feature_names, vec!["pt", "au"]);
        assert_eq!(s.rows[1].values, vec![910.0, 1490.0]);
    }

    #[test]
    fn zero_price_names_line() {
        let err = load_csv("date,pt\n2020-01-06,900\n2020-01-07,0\n").unwrap_err();
        assert_eq!(err.to_string(), "non-positive value, line 3");
    }

    #[test]
    fn duplicate_date_rejected() {
        let err = load_csv("date,pt\n2020-01-06,900\n2020-01-06,901\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateDate { line: 3, .. }), "{err}");
    }

    #[test]
    fn malformed_rows_rejected() {
        assert!(matches!(
            load_csv("date,pt\n2020-01-06,abc\n").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        assert!(matches!(
            load_csv("date,pt\nnot-a-date,1\n").unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        assert!(load_csv("date,pt\n2020-01-06,1,2\n").is_err());
    }

    #[test]
    fn weekly_constant_and_mean() {
        let s = series(&[
            ("2020-01-06", 100.0),
            ("2020-01-07", 100.0),
            ("2020-01-08", 100.0),
            ("2020-01-09", 100.0),
            ("2020-01-10", 100.0),
        ]);
        let w = weekly_average(&s).unwrap();
        assert_eq!(w.rows.len(), 1);
        assert_eq!(w.rows[0].values, vec![100.0]);

        let s = series(&[("2020-01-07", 90.0), ("2020-01-09", 110.0)]);
        let w = weekly_average(&s).unwrap();
        assert_eq!(w.rows[0].values, vec![100.0]);
        assert_eq!(w.rows[0].date, "2020-01-06".parse::<NaiveDate>().unwrap());
    }

    #[test]
    fn weekly_two_weeks_across_year_boundary() {
        // 2019-12-30 is the Monday of ISO week 2020-W01.
        let s = series(&[
            ("2019-12-27", 1.0),
            ("2019-12-31", 2.0),
            ("2020-01-03", 4.0),
        ]);
        let w = weekly_average(&s).unwrap();
        assert_eq!(w.rows.len(), 2);
        assert_eq!(w.rows[1].date, "2019-12-30".parse::<NaiveDate>().unwrap());
        assert_eq!(w.rows[1].values, vec![3.0]);
    }

    #[test]
    fn weekly_rejects_empty() {
        assert!(weekly_average(&series(&[])).is_err());
    }

    #[test]
    fn percent_changes_by_hand() {
        let s = series(&[("2020-01-06", 100.0), ("2020-01-13", 110.0), ("2020-01-20", 99.0)]);
        let m = to_percent_changes(&s).unwrap();
        assert_eq!(m.weeks.len(), 2);
        assert!((m.weeks[0].changes[0] - 0.10).abs() < 1e-12);
        assert!((m.weeks[1].changes[0] + 0.10).abs() < 1e-12);

        let flat = series(&[("2020-01-06", 5.0), ("2020-01-13", 5.0)]);
        assert_eq!(to_percent_changes(&flat).unwrap().weeks[0].changes, vec![0.0]);
        assert!(to_percent_changes(&series(&[("2020-01-06", 5.0)])).is_err());
    }

    #[test]
    fn samples_pair_with_next_week() {
        let m = FeatureMatrix {
            feature_names: vec!["a".into(), "b".into()],
            weeks: vec![
                WeekChanges { week_index: 0, changes: vec![0.1, 1.0] },
                WeekChanges { week_index: 1, changes: vec![0.2, 2.0] },
                WeekChanges { week_index: 2, changes: vec![0.3, 3.0] },
            ],
        };
        let s = make_samples(&m, 0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0], Sample::new(vec![0.1, 1.0], 0.2));
        assert!(make_samples(&m, 2).is_err());
    }

    #[test]
    fn crescent_validation() {
        assert!(gen_crescents(3, 0.1, 0).is_err());
        assert!(gen_crescents(0, 0.1, 0).is_err());
        assert!(gen_crescents(4, -1.0, 0).is_err());
        let pts = gen_crescents(10, 0.0, 1).unwrap();
        assert_eq!(pts.iter().filter(|p| p.label == 1).count(), 5);
    }

    #[test]
    fn zero_coefficient_drift_has_zero_targets() {
        let spec = DriftSpec {
            n_weeks: 30,
            regimes: vec![Regime { length: 30, coeffs: vec![0.0; 3], noise_sd: 0.0 }],
            seed: 3,
            ar_coeff: 0.3,
            feature_sd: 0.03,
            min_signal: 0.0,
            feature_names: None,
        };
        let (m, t) = gen_drifting_series(&spec).unwrap();
        assert_eq!(m.weeks.len(), 30);
        assert!(t.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn drift_spec_validation() {
        let mut spec = DriftSpec::two_regime(0);
        spec.n_weeks += 1;
        assert!(gen_drifting_series(&spec).is_err());
        let mut spec = DriftSpec::two_regime(0);
        spec.regimes[0].noise_sd = -0.1;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn sample_table_round_trip_and_dispatch() {
        let table = SampleTable {
            key_column: "date".into(),
            keys: synthetic_dates(2),
            feature_names: vec!["a".into(), "b".into()],
            samples: vec![Sample::new(vec![0.1, -0.2], 0.05), Sample::new(vec![1e-17, 3.0], -0.1)],
        };
        let text = write_samples_csv(&table);
        assert_eq!(load_samples_csv(&text).unwrap(), table);
        assert_eq!(load_dataset(&text, 0).unwrap(), table.samples);
    }

    #[test]
    fn raw_prices_dispatch_through_weekly_pipeline() {
        let text = "date,pt,au\n2020-01-06,100,10\n2020-01-13,110,10\n2020-01-20,121,11\n";
        let s = load_dataset(text, 0).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].x[0] - 0.1).abs() < 1e-12);
        assert!((s[0].t - 0.1).abs() < 1e-12);
    }
}
