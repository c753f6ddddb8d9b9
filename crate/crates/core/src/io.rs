//! CSV files exchanged between the subcommands. Floats are written with the
//! shortest representation that parses back to the same bits.

use std::path::Path;

use crate::inverse::ObservationSet;
use crate::trainer::TrainingSample;
use crate::{Error, Result};

pub const DATASET_HEADER: [&str; 7] = ["px_km", "py_km", "qx_km", "qy_km", "u", "gx", "gy"];
pub const OBSERVATION_HEADER: [&str; 3] = ["x_km", "y_km", "value"];

/// Reads a numeric CSV whose header must equal `header`.
pub fn read_table(path: &Path, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let found: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
    if found != header {
        return Err(Error::format(
            path,
            format!("expected header {}, found {}", header.join(","), found.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::format(path, format!("row {}: {e}", line + 1)))?;
        if row.len() != header.len() {
            return Err(Error::format(path, format!("row {} has {} fields", line + 1, row.len())));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_dataset(path: impl AsRef<Path>, samples: &[TrainingSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(DATASET_HEADER)?;
    for s in samples {
        w.write_record(
            [s.p[0], s.p[1], s.q[0], s.q[1], s.u_ref, s.grad_ref[0], s.grad_ref[1]].map(|v| v.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<TrainingSample>> {
    let rows = read_table(path.as_ref(), &DATASET_HEADER)?;
    Ok(rows
        .into_iter()
        .map(|r| TrainingSample {
            p: [r[0], r[1]],
            q: [r[2], r[3]],
            u_ref: r[4],
            grad_ref: [r[5], r[6]],
        })
        .collect())
}

pub fn write_observations(path: impl AsRef<Path>, obs: &ObservationSet) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(OBSERVATION_HEADER)?;
    for (x, y) in obs.points().iter().zip(obs.values()) {
        w.write_record([x[0].to_string(), x[1].to_string(), y.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads measurements; geometry is validated against `p_box` by
/// [`ObservationSet::new`].
pub fn read_observations(path: impl AsRef<Path>, p_box: &crate::Rect) -> Result<ObservationSet> {
    let rows = read_table(path.as_ref(), &OBSERVATION_HEADER)?;
    let points = rows.iter().map(|r| [r[0], r[1]]).collect();
    let values = rows.iter().map(|r| r[2]).collect();
    ObservationSet::new(points, values, 0.0, p_box)
}
