//! Uniformly sampled simulation output.

use std::collections::BTreeMap;

use super::EngineError;
use crate::netlist::Signal;

/// Signals sampled every `dt`, with `time[k] = k * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    dt: f64,
    time: Vec<f64>,
    columns: BTreeMap<Signal, Vec<f64>>,
}

/// Column order of the CSV export.
const CSV_COLUMNS: [Signal; 6] = Signal::ALL;

impl Trace {
    /// Builds a trace from equal-length columns; the time axis is generated.
    pub fn from_columns(
        dt: f64,
        columns: impl IntoIterator<Item = (Signal, Vec<f64>)>,
    ) -> Result<Self, EngineError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(EngineError::Domain(format!(
                "trace dt must be > 0, got {dt}"
            )));
        }
        let mut map = BTreeMap::new();
        let mut len = None;
        for (signal, values) in columns {
            if signal == Signal::Time {
                continue;
            }
            match len {
                None => len = Some(values.len()),
                Some(n) if n != values.len() => {
                    return Err(EngineError::Domain(format!(
                        "column `{signal}` has {} samples, expected {n}",
                        values.len()
                    )))
                }
                _ => {}
            }
            map.insert(signal, values);
        }
        let n = len.unwrap_or(0);
        Ok(Self {
            dt,
            time: (0..n).map(|k| k as f64 * dt).collect(),
            columns: map,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn signal(&self, signal: Signal) -> Option<&[f64]> {
        match signal {
            Signal::Time => Some(&self.time),
            other => self.columns.get(&other).map(Vec::as_slice),
        }
    }

    pub(crate) fn require(&self, signal: Signal) -> Result<&[f64], EngineError> {
        self.signal(signal)
            .ok_or_else(|| EngineError::UnknownSignal(signal.name().to_string()))
    }

    /// Index of the first sample at or after `t`.
    pub fn index_at(&self, t: f64) -> usize {
        ((t / self.dt) - 1e-9).ceil().max(0.0) as usize
    }

    /// CSV with header `time,v_in,i,v_out,q,l_eff`; missing columns are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 96);
        let header: Vec<&str> = CSV_COLUMNS.iter().map(|s| s.name()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for k in 0..self.len() {
            for (n, s) in CSV_COLUMNS.iter().enumerate() {
                if n > 0 {
                    out.push(',');
                }
                if let Some(col) = self.signal(*s) {
                    out.push_str(&format!("{:.12e}", col[k]));
                }
            }
            out.push('\n');
        }
        out
    }
}
