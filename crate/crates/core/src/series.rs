//! Equally spaced time series and simulated paths.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Equally spaced observations with sampling interval `delta`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeSeries {
    pub delta: f64,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(delta: f64, values: Vec<f64>) -> Result<Self> {
        if !(delta > 0.0) {
            return Err(Error::Invalid(format!("delta must be positive, got {delta}")));
        }
        if values.is_empty() {
            return Err(Error::Invalid("empty series".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Invalid(format!("non-finite value at index {i}")));
        }
        Ok(Self { delta, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A simulated path: sampling interval, values, and the rng seed that
/// produced it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Path {
    pub delta: f64,
    pub values: Vec<f64>,
    pub seed: u64,
}

impl Path {
    pub fn new(delta: f64, values: Vec<f64>, seed: u64) -> Self {
        debug_assert!(delta > 0.0 && !values.is_empty());
        Self { delta, values, seed }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_series(&self) -> TimeSeries {
        TimeSeries { delta: self.delta, values: self.values.clone() }
    }

    /// CSV with header `index,time,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,time,value")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{},{}", i, i as f64 * self.delta, v)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert!(TimeSeries::new(0.0, vec![1.0]).is_err());
        assert!(TimeSeries::new(1.0, vec![]).is_err());
        assert!(TimeSeries::new(1.0, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn csv_layout() {
        let p = Path::new(0.5, vec![1.0, 2.5], 9);
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "index,time,value\n0,0,1\n1,0.5,2.5\n");
    }
}
