//! Truth and sensor streams as one CSV table, one row per estimator step.

use std::path::Path;

use super::{SensorSample, TruthRecord};
use crate::chain::{ChainParameters, FullState};
use crate::error::{Error, Result};

fn header(n: usize) -> Vec<String> {
    let mut names: Vec<String> = (0..n).map(|i| format!("alpha_{i}")).collect();
    names.extend(["d".to_string(), "h".to_string()]);
    let mut cols = vec!["t".to_string()];
    for suffix in ["", "_dot", "_ddot"] {
        cols.extend(names.iter().map(|c| format!("{c}{suffix}")));
    }
    cols.extend((1..n).map(|j| format!("tau_{j}")));
    cols.extend(["z_g", "z_ax", "z_ay"].map(String::from));
    for j in 1..n {
        cols.push(format!("z_e{j}_pos"));
        cols.push(format!("z_e{j}_vel"));
    }
    cols
}

/// Writes aligned truth and sensor streams. Numbers use the shortest
/// representation that reads back to the same `f64`.
pub fn write_stream_csv(path: &Path, truth: &[TruthRecord], sensors: &[SensorSample]) -> Result<()> {
    if truth.len() != sensors.len() {
        return Err(Error::Misaligned(format!(
            "{} truth records but {} sensor samples",
            truth.len(),
            sensors.len()
        )));
    }
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let n = truth.first().map_or(1, |r| r.state.n_links());
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header(n)).map_err(csv_err)?;
    for (r, s) in truth.iter().zip(sensors) {
        if r.t != s.t {
            return Err(Error::Misaligned(format!(
                "truth at t={} paired with sample at t={}",
                r.t, s.t
            )));
        }
        let mut row = vec![r.t];
        row.extend(&r.state.q);
        row.extend(&r.state.qdot);
        row.extend(&r.qddot);
        row.extend(&r.torques);
        row.extend([s.gyro, s.accel[0], s.accel[1]]);
        row.extend(s.encoders.iter().flatten());
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a table written by [`write_stream_csv`]. The chain parameters are
/// needed to rebuild the CoM part of each truth record.
pub fn read_stream_csv(path: &Path, params: &ChainParameters) -> Result<(Vec<TruthRecord>, Vec<SensorSample>)> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let bad = |msg: String| Error::Config(format!("{}: {msg}", path.display()));
    let n = params.n_links();
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let expected = header(n);
    let found: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if found != expected {
        return Err(bad(format!("header does not match a {n}-link stream")));
    }

    let dim = n + 2;
    let mut truth = Vec::new();
    let mut sensors = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let values = record
            .iter()
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", line + 1)))?;
        let mut it = values.into_iter();
        let mut take = |k: usize| -> Vec<f64> { it.by_ref().take(k).collect() };
        let t = take(1)[0];
        let state = FullState {
            q: take(dim),
            qdot: take(dim),
        };
        let qddot = take(dim);
        let torques = take(n - 1);
        let z = take(3);
        let enc = take(2 * (n - 1));
        sensors.push(SensorSample {
            t,
            gyro: z[0],
            accel: [z[1], z[2]],
            encoders: enc.chunks(2).map(|c| [c[0], c[1]]).collect(),
        });
        truth.push(TruthRecord::new(params, t, state, qddot, torques)?);
    }
    Ok((truth, sensors))
}
