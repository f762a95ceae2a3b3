//! CSV emission and atomic file writes.

use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;
use trigger_sim_core::{ClosedLoopRun, Scenario};

use crate::CliError;

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn csv_bytes(rows: Vec<Vec<String>>) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Engine(e.to_string()))?;
    }
    w.into_inner().map_err(|e| CliError::Engine(e.to_string()))
}

/// `t,date,<compartments>,u,indicator,regime`, one row per day
/// `t0..=horizon+1`. The last day has no control.
pub fn trajectory_csv(scenario: &Scenario, run: &ClosedLoopRun) -> Result<Vec<u8>, CliError> {
    let mut header = vec!["t".to_string(), "date".to_string()];
    header.extend(scenario.compartment_labels().iter().map(|s| s.to_string()));
    header.extend(["u", "indicator", "regime"].map(String::from));
    let mut rows = vec![header];
    let traj = &run.trajectory;
    for (k, x) in traj.states().iter().enumerate() {
        let t = traj.t0() + k;
        let mut row = vec![t.to_string(), scenario.date_of(t).to_string()];
        row.extend(x.values().iter().map(|v| format!("{v:?}")));
        row.push(traj.control_at(t).map(|u| format!("{u:?}")).unwrap_or_default());
        row.push(format!("{:?}", run.indicator[k]));
        row.push(run.log.regime_on(t).as_str().to_string());
        rows.push(row);
    }
    csv_bytes(rows)
}

/// `k,t,date,regime`: trigger times and the regime each one starts.
pub fn switches_csv(scenario: &Scenario, run: &ClosedLoopRun) -> Result<Vec<u8>, CliError> {
    let mut rows = vec![["k", "t", "date", "regime"].map(String::from).to_vec()];
    for (k, t) in run.log.trigger_times.iter().enumerate() {
        rows.push(vec![
            k.to_string(),
            t.to_string(),
            scenario.date_of(*t).to_string(),
            run.log.regime(k).as_str().to_string(),
        ]);
    }
    csv_bytes(rows)
}
