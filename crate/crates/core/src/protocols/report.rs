use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Per-trial samples with their means. Maps are ordered so serialization
/// is byte-stable.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub kind: String,
    pub master_seed: u64,
    pub trials: usize,
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// Mean of each sample series.
    pub estimates: BTreeMap<String, f64>,
    /// Standard error of each mean (sample s.d. / √trials), or the
    /// message-sampling error when a single trial was sampled.
    pub standard_errors: BTreeMap<String, f64>,
    pub samples: BTreeMap<String, Vec<f64>>,
    pub flags: Vec<String>,
    pub violations: Vec<String>,
}

impl SimulationReport {
    pub fn new(kind: &str, master_seed: u64) -> Self {
        Self {
            kind: kind.to_string(),
            master_seed,
            ..Self::default()
        }
    }

    pub fn parameter(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.parameters.insert(name.to_string(), v);
    }

    pub fn push_sample(&mut self, metric: &str, value: f64) {
        self.samples.entry(metric.to_string()).or_default().push(value);
    }

    pub fn flag(&mut self, flag: &str) {
        if !self.flags.iter().any(|f| f == flag) {
            self.flags.push(flag.to_string());
        }
    }

    pub fn violation(&mut self, message: String) {
        self.violations.push(message);
    }

    /// Recomputes `trials`, means and standard errors from the samples.
    /// Standard errors already present for single-trial series are kept.
    pub fn finalize(&mut self) {
        self.trials = self.samples.values().map(Vec::len).max().unwrap_or(0);
        for (name, xs) in &self.samples {
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            self.estimates.insert(name.clone(), mean);
            if xs.len() > 1 {
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                self.standard_errors.insert(name.clone(), (var / n).sqrt());
            }
        }
    }

    pub fn estimate(&self, name: &str) -> Option<f64> {
        self.estimates.get(name).copied()
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per sample: `trial_index,metric_name,value`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["trial_index", "metric_name", "value"])?;
        for (name, xs) in &self.samples {
            for (i, x) in xs.iter().enumerate() {
                w.write_record([i.to_string(), name.clone(), format!("{x:e}")])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write_files(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.json")), self.to_json()?)?;
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimates_are_means() {
        let mut r = SimulationReport::new("t", 1);
        for x in [1.0, 2.0, 3.0] {
            r.push_sample("a", x);
        }
        r.finalize();
        assert_eq!(r.trials, 3);
        assert_eq!(r.estimate("a"), Some(2.0));
        assert!((r.standard_errors["a"] - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn csv_rows() {
        let mut r = SimulationReport::new("t", 1);
        r.push_sample("b", 0.5);
        r.push_sample("a", 0.25);
        let csv = r.to_csv().unwrap();
        assert_eq!(csv, "trial_index,metric_name,value\n0,a,2.5e-1\n0,b,5e-1\n");
    }

    #[test]
    fn json_round_trip() {
        let mut r = SimulationReport::new("t", 7);
        r.parameter("n", 2);
        r.push_sample("x", 0.1);
        r.finalize();
        let back: SimulationReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
