use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::estimators::{component_names, EstimatorKind, FullEstimate};
use crate::sim::TruthRecord;

/// Running sums of squared errors per component, for pooled RMSE.
#[derive(Clone, Debug, PartialEq)]
pub struct RmseAccumulator {
    pub sum_squares: Vec<f64>,
    pub count: usize,
}

impl RmseAccumulator {
    pub fn new(components: usize) -> Self {
        Self {
            sum_squares: vec![0.0; components],
            count: 0,
        }
    }

    /// Adds every timestep of one run. The two sequences must share their
    /// timestamps.
    pub fn add_run(&mut self, estimates: &[FullEstimate], truth: &[TruthRecord]) -> Result<()> {
        if estimates.len() != truth.len() {
            return Err(Error::Misaligned(format!(
                "{} estimates for {} truth records",
                estimates.len(),
                truth.len()
            )));
        }
        for (k, (e, r)) in estimates.iter().zip(truth).enumerate() {
            if (e.t - r.t).abs() > 1e-12 * r.t.abs().max(1.0) {
                return Err(Error::Misaligned(format!(
                    "step {k}: estimate at t={} vs truth at t={}",
                    e.t, r.t
                )));
            }
            let actual = FullEstimate {
                t: r.t,
                q: r.state.q.clone(),
                qdot: r.state.qdot.clone(),
            };
            self.add_errors(e.components().iter().zip(actual.components()).map(|(a, b)| a - b))?;
        }
        Ok(())
    }

    pub fn add_errors(&mut self, errors: impl ExactSizeIterator<Item = f64>) -> Result<()> {
        if errors.len() != self.sum_squares.len() {
            return Err(Error::Misaligned(format!(
                "{} error components, expected {}",
                errors.len(),
                self.sum_squares.len()
            )));
        }
        for (s, e) in self.sum_squares.iter_mut().zip(errors) {
            *s += e * e;
        }
        self.count += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &RmseAccumulator) {
        for (s, o) in self.sum_squares.iter_mut().zip(&other.sum_squares) {
            *s += o;
        }
        self.count += other.count;
    }

    pub fn rmse(&self) -> Vec<f64> {
        self.sum_squares
            .iter()
            .map(|s| (s / self.count.max(1) as f64).sqrt())
            .collect()
    }
}

/// Component-wise RMSE of one estimate sequence against its truth.
pub fn compute_rmse(estimates: &[FullEstimate], truth: &[TruthRecord]) -> Result<Vec<f64>> {
    let n = truth
        .first()
        .map(|r| r.state.n_links())
        .ok_or_else(|| Error::Misaligned("empty truth sequence".into()))?;
    let mut acc = RmseAccumulator::new(2 * n + 4);
    acc.add_run(estimates, truth)?;
    Ok(acc.rmse())
}

/// Per-estimator RMSE and, for timing runs, mean step time.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub kinds: Vec<EstimatorKind>,
    /// `(name, unit)` of each RMSE row.
    pub components: Vec<(String, &'static str)>,
    /// `rmse[k][c]`: estimator `k`, component `c`.
    pub rmse: Vec<Vec<f64>>,
    /// µs per step, only for timing runs (wall-clock data is not reproducible).
    pub step_time_us: Option<Vec<f64>>,
    pub trials: usize,
    pub seed: u64,
    pub config_digest: String,
}

impl MetricsReport {
    pub fn new(n_links: usize, seed: u64, trials: usize, config_digest: String) -> Self {
        Self {
            kinds: Vec::new(),
            components: component_names(n_links),
            rmse: Vec::new(),
            step_time_us: None,
            trials,
            seed,
            config_digest,
        }
    }

    /// RMSE of `kind` for the named component.
    pub fn get(&self, kind: EstimatorKind, component: &str) -> Option<f64> {
        let k = self.kinds.iter().position(|&x| x == kind)?;
        let c = self.components.iter().position(|(name, _)| name == component)?;
        Some(self.rmse[k][c])
    }

    pub fn step_time(&self, kind: EstimatorKind) -> Option<f64> {
        let k = self.kinds.iter().position(|&x| x == kind)?;
        self.step_time_us.as_ref().map(|t| t[k])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,unit");
        for k in &self.kinds {
            out.push(',');
            out.push_str(k.as_str());
        }
        out.push('\n');
        for (c, (name, unit)) in self.components.iter().enumerate() {
            out.push_str(&format!("{name},{unit}"));
            for row in &self.rmse {
                out.push_str(&format!(",{}", six_digits(row[c])));
            }
            out.push('\n');
        }
        out.push_str("step_time_us,us");
        for k in 0..self.kinds.len() {
            match &self.step_time_us {
                Some(t) => out.push_str(&format!(",{}", six_digits(t[k]))),
                None => out.push_str(",NA"),
            }
        }
        out.push('\n');
        out
    }

    pub fn to_json(&self) -> Value {
        let mut metrics = Map::new();
        for (k, kind) in self.kinds.iter().enumerate() {
            let row: Map<String, Value> = self
                .components
                .iter()
                .zip(&self.rmse[k])
                .map(|((name, _), v)| (name.clone(), json!(round6(*v))))
                .collect();
            metrics.insert(kind.to_string(), Value::Object(row));
        }
        let timing: Map<String, Value> = self
            .kinds
            .iter()
            .enumerate()
            .map(|(k, kind)| {
                let v = self.step_time_us.as_ref().map_or(Value::Null, |t| json!(round6(t[k])));
                (kind.to_string(), v)
            })
            .collect();
        let units: BTreeMap<&str, &str> = self.components.iter().map(|(n, u)| (n.as_str(), *u)).collect();
        json!({
            "metrics": metrics,
            "units": units,
            "timing": timing,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "trials": self.trials,
            "pooling": "RMSE pooled over every timestep of every trial",
        })
    }
}

fn six_digits(v: f64) -> String {
    format!("{v:.5e}")
}

fn round6(v: f64) -> f64 {
    six_digits(v).parse().unwrap_or(v)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::Config(format!("unknown report format {s:?}"))),
        }
    }
}

pub fn emit_report(report: &MetricsReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&report.to_json())?;
            s.push('\n');
            s
        }
    };
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ChainParameters, FullState};

    fn record(t: f64, q: Vec<f64>, qdot: Vec<f64>) -> TruthRecord {
        let params = ChainParameters::two_link_default();
        TruthRecord::new(&params, t, FullState { q, qdot }, vec![0.0; 4], vec![0.0]).unwrap()
    }

    fn estimate(t: f64, q: Vec<f64>, qdot: Vec<f64>) -> FullEstimate {
        FullEstimate { t, q, qdot }
    }

    #[test]
    fn rmse_cases() {
        let truth = vec![
            record(0.0, vec![0.0; 4], vec![0.0; 4]),
            record(0.1, vec![0.0; 4], vec![0.0; 4]),
        ];
        let est = vec![
            estimate(0.0, vec![1.0, 0.0, 0.0, 0.3], vec![0.0; 4]),
            estimate(0.1, vec![-1.0, 0.0, 0.0, 0.3], vec![0.0; 4]),
        ];
        let rmse = compute_rmse(&est, &truth).unwrap();
        assert_eq!(rmse.len(), 8);
        assert_eq!(rmse[0], 1.0);
        assert_eq!(rmse[1], 0.0);
        assert!((rmse[5] - 0.3).abs() < 1e-15);

        let perfect: Vec<FullEstimate> = truth
            .iter()
            .map(|r| estimate(r.t, r.state.q.clone(), r.state.qdot.clone()))
            .collect();
        assert!(compute_rmse(&perfect, &truth).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn misalignment_is_reported() {
        let truth = vec![record(0.0, vec![0.0; 4], vec![0.0; 4])];
        let est = vec![estimate(0.5, vec![0.0; 4], vec![0.0; 4])];
        assert!(matches!(compute_rmse(&est, &truth), Err(Error::Misaligned(_))));
        assert!(matches!(compute_rmse(&[], &truth), Err(Error::Misaligned(_))));
    }

    fn sample_report() -> MetricsReport {
        let mut r = MetricsReport::new(2, 7, 3, "abc".into());
        r.kinds = vec![EstimatorKind::Bme, EstimatorKind::FullEkf];
        r.rmse = vec![
            (0..8).map(|i| 1.23456789e-3 * (i + 1) as f64).collect(),
            (0..8).map(|i| 9.87654321e-2 / (i + 1) as f64).collect(),
        ];
        r
    }

    #[test]
    fn csv_layout() {
        let csv = sample_report().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[0], "metric,unit,bme,ekf");
        assert_eq!(lines[1], "alpha_0,rad,1.23457e-3,9.87654e-2");
        assert_eq!(lines[9], "step_time_us,us,NA,NA");
    }

    #[test]
    fn json_round_trips_at_six_digits() {
        let mut report = sample_report();
        report.step_time_us = Some(vec![12.345678, 150.0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.json");
        emit_report(&report, ReportFormat::Json, &path).unwrap();
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        for (k, kind) in report.kinds.iter().enumerate() {
            for (c, (name, _)) in report.components.iter().enumerate() {
                let got = v["metrics"][kind.as_str()][name].as_f64().unwrap();
                assert_eq!(got, round6(report.rmse[k][c]));
                assert!((got - report.rmse[k][c]).abs() <= 5e-6 * report.rmse[k][c]);
            }
        }
        assert_eq!(v["timing"]["bme"].as_f64().unwrap(), 12.3457);
        assert_eq!(v["seed"], 7);
        assert_eq!(v["config_digest"], "abc");
    }

    #[test]
    fn io_errors_name_the_path() {
        let err = emit_report(&sample_report(), ReportFormat::Csv, Path::new("/nonexistent/dir/r.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/r.csv"));
    }
}
