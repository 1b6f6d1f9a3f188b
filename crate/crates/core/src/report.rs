//! Walk-forward evaluation and per-step report output.

use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::ensemble::{Ensemble, Scheme};
use crate::error::{Error, Result};
use crate::metrics::{direction_accuracy, nse_error};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub predicted: f64,
    pub actual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub nse: f64,
    pub direction_accuracy: f64,
    pub per_step: Vec<Step>,
    pub horizon: usize,
}

impl EvalReport {
    pub fn from_steps(per_step: Vec<Step>) -> Result<Self> {
        let (preds, actual): (Vec<f64>, Vec<f64>) = per_step.iter().map(|s| (s.predicted, s.actual)).unzip();
        Ok(Self {
            nse: nse_error(&preds, &actual)?,
            direction_accuracy: direction_accuracy(&preds, &actual)?,
            horizon: per_step.len(),
            per_step,
        })
    }

    /// Metrics over the first `horizon` steps only.
    pub fn truncated(&self, horizon: usize) -> Result<Self> {
        if horizon > self.per_step.len() {
            return Err(Error::InsufficientData {
                needed: horizon,
                available: self.per_step.len(),
            });
        }
        Self::from_steps(self.per_step[..horizon].to_vec())
    }

    /// Root of the normalised error, i.e. a typical relative miss.
    pub fn rms_relative_error(&self) -> f64 {
        self.nse.sqrt()
    }
}

/// Evaluate `scheme` on `test` after showing the ensemble `warmup`.
///
/// The ensemble restarts from all-ones weights. Dynamic weights adapt
/// through warm-up and test; static weights are those reached at the end
/// of warm-up and stay fixed; unweighted ignores every revealed target.
pub fn evaluate_scheme(base: &Ensemble, scheme: Scheme, warmup: &[Sample], test: &[Sample]) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Empty);
    }
    let mut ensemble = match scheme {
        Scheme::Unweighted => base.reset_as(Scheme::Unweighted),
        Scheme::Dynamic | Scheme::Static => base.reset_as(Scheme::Dynamic),
    };
    for s in warmup {
        ensemble.observe(&s.x, s.t)?;
    }
    if scheme == Scheme::Static {
        ensemble = ensemble.freeze_static()?;
    }
    let mut steps = Vec::with_capacity(test.len());
    for s in test {
        if s.x.len() != ensemble.inputs() {
            return Err(Error::LengthMismatch {
                left: s.x.len(),
                right: ensemble.inputs(),
            });
        }
        steps.push(Step {
            predicted: ensemble.step_online(&s.x),
            actual: s.t,
        });
        ensemble.observe(&s.x, s.t)?;
    }
    EvalReport::from_steps(steps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid(format!("unknown report format {other:?}"))),
        }
    }
}

/// CSV layout: `step,predicted,actual` rows followed by two summary rows,
/// `nse,<value>,` and `direction_accuracy,<value>,`.
pub fn emit_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serialises");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut out = String::from("step,predicted,actual\n");
            for (i, step) in report.per_step.iter().enumerate() {
                out.push_str(&format!("{i},{},{}\n", step.predicted, step.actual));
            }
            out.push_str(&format!("nse,{},\n", report.nse));
            out.push_str(&format!("direction_accuracy,{},\n", report.direction_accuracy));
            out
        }
    }
}

pub fn parse_report(text: &str, format: ReportFormat) -> Result<EvalReport> {
    match format {
        ReportFormat::Json => Ok(serde_json::from_str(text)?),
        ReportFormat::Csv => parse_report_csv(text),
    }
}

fn parse_report_csv(text: &str) -> Result<EvalReport> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut per_step = Vec::new();
    let (mut nse, mut direction) = (None, None);
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            msg: format!("malformed report ({e})"),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse {
                    line,
                    msg: "invalid report field".into(),
                })
        };
        match record.get(0) {
            Some("nse") => nse = Some(num(1)?),
            Some("direction_accuracy") => direction = Some(num(1)?),
            _ => per_step.push(Step {
                predicted: num(1)?,
                actual: num(2)?,
            }),
        }
    }
    let missing = |what: &str| Error::Parse {
        line: 0,
        msg: format!("report is missing the {what} summary row"),
    };
    Ok(EvalReport {
        nse: nse.ok_or_else(|| missing("nse"))?,
        direction_accuracy: direction.ok_or_else(|| missing("direction_accuracy"))?,
        horizon: per_step.len(),
        per_step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_csv_has_header_and_summary() {
        let r = EvalReport {
            nse: 1.0,
            direction_accuracy: 0.5,
            per_step: vec![],
            horizon: 0,
        };
        let text = emit_report(&r, ReportFormat::Csv);
        assert_eq!(text.lines().count(), 3);
        assert_eq!(parse_report(&text, ReportFormat::Csv).unwrap(), r);
    }

    #[test]
    fn truncation_recomputes_metrics() {
        let steps = vec![
            Step { predicted: 0.1, actual: 0.1 },
            Step { predicted: 0.0, actual: 0.2 },
        ];
        let r = EvalReport::from_steps(steps).unwrap();
        assert!((r.nse - 0.5).abs() < 1e-15);
        let first = r.truncated(1).unwrap();
        assert_eq!(first.nse, 0.0);
        assert_eq!(first.horizon, 1);
        assert!(r.truncated(3).is_err());
    }

    #[test]
    fn static_needs_warmup() {
        let e = crate::expert::MlpExpert::init_random(2, 2, 1).unwrap();
        let ens = Ensemble::new(
            vec![e],
            crate::partition::Partition::whole(),
            Scheme::Dynamic,
            Default::default(),
        )
        .unwrap();
        let test = vec![Sample::new(vec![0.0, 0.0], 0.1)];
        assert!(evaluate_scheme(&ens, Scheme::Static, &[], &test).is_err());
        assert!(evaluate_scheme(&ens, Scheme::Dynamic, &[], &test).is_ok());
    }
}
