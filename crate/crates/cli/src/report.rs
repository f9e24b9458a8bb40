use std::io::Write;

use integral_geometry::estimate::Estimate;
use serde::{Deserialize, Serialize};

/// Rounds to 12 significant digits so JSON and CSV carry the same numbers.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedResult {
    pub name: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub inputs: serde_json::Value,
    pub results: Vec<NamedResult>,
    pub runtime_s: f64,
}

impl ExperimentReport {
    pub fn new(command: &str, seed: Option<u64>, inputs: serde_json::Value) -> Self {
        ExperimentReport {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            inputs,
            results: Vec::new(),
            runtime_s: 0.0,
        }
    }

    pub fn exact(&mut self, name: &str, value: f64) {
        self.results.push(NamedResult { name: name.into(), value: round12(value), std_error: None, trials: None });
    }

    pub fn estimate(&mut self, name: &str, e: &Estimate) {
        self.results.push(NamedResult {
            name: name.into(),
            value: round12(e.value),
            std_error: Some(round12(e.std_error)),
            trials: Some(e.samples),
        });
    }

    pub fn count(&mut self, name: &str, n: u64) {
        self.exact(name, n as f64);
    }

    pub fn write_json(&self, out: &mut dyn Write) -> anyhow::Result<()> {
        serde_json::to_writer_pretty(&mut *out, self)?;
        writeln!(out)?;
        Ok(())
    }

    /// Columns: command, name, value, std_error, trials, seed, runtime_s.
    pub fn write_csv(&self, out: &mut dyn Write) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["command", "name", "value", "std_error", "trials", "seed", "runtime_s"])?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.results {
            w.write_record([
                self.command.clone(),
                r.name.clone(),
                r.value.to_string(),
                opt(r.std_error.map(|v| v.to_string())),
                opt(r.trials.map(|v| v.to_string())),
                opt(self.seed.map(|v| v.to_string())),
                self.runtime_s.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
