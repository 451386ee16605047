//! Per-trial CSV rows and the JSON summary written next to them.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const SCHEMA_VERSION: u32 = 1;

/// One Monte-Carlo trial as written to the trials CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: u64,
    pub seed: u64,
    pub scale: u64,
    #[serde(rename = "E_or_grid")]
    pub e_or_grid: String,
    pub verdicts: String,
    pub measure: Option<f64>,
    pub flags: String,
}

pub fn write_trials_csv(path: &Path, rows: &[TrialRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record(["trial", "seed", "scale", "E_or_grid", "verdicts", "measure", "flags"])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trials_csv(path: &Path) -> Result<Vec<TrialRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

/// Summary document: schema version, the echoed configuration and the experiment payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub config: serde_json::Value,
    pub result: serde_json::Value,
    pub invariant_violations: Vec<String>,
}

impl Summary {
    pub fn new(config: serde_json::Value, result: serde_json::Value) -> Self {
        Summary { schema_version: SCHEMA_VERSION, config, result, invariant_violations: Vec::new() }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(File::open(path)?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trials.csv");
        let rows = vec![
            TrialRow { trial: 0, seed: 7, scale: 16, e_or_grid: "1.5".into(), verdicts: "NR;NS".into(), measure: None, flags: String::new() },
            TrialRow { trial: 1, seed: 9, scale: 16, e_or_grid: "1.5".into(), verdicts: "R".into(), measure: Some(0.25), flags: "x".into() },
        ];
        write_trials_csv(&path, &rows).unwrap();
        let header = std::fs::read_to_string(&path).unwrap();
        assert!(header.starts_with("trial,seed,scale,E_or_grid,verdicts,measure,flags"));
        assert_eq!(read_trials_csv(&path).unwrap(), rows);
    }

    #[test]
    fn summary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("summary.json");
        let s = Summary::new(serde_json::json!({"kind": "estimate"}), serde_json::json!({"p": 0.5}));
        s.write(&path).unwrap();
        assert_eq!(Summary::read(&path).unwrap(), s);
    }
}
