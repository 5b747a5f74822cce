//! Declarative source and stimulus descriptions.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveformError {
    #[error("waveform parameter `{name}` must be finite")]
    NonFinite { name: &'static str },
    #[error("invalid waveform: {0}")]
    Invalid(String),
}

/// A time-domain drive, in volts for sources or amperes for device drives.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    /// Constant level.
    Dc(f64),
    /// `offset + amplitude * sin(2 pi freq t)`.
    Sine {
        offset: f64,
        amplitude: f64,
        freq: f64,
    },
    /// Rectangular pulses of height `v1` over a `v0` baseline. The k-th pulse
    /// occupies `[delay + k period, delay + k period + width)`. A `count` of
    /// zero repeats forever.
    Pulse {
        v0: f64,
        v1: f64,
        delay: f64,
        width: f64,
        period: f64,
        count: u32,
    },
    /// `v0` before `at`, `v1` from `at` onward.
    Step { v0: f64, v1: f64, at: f64 },
    /// Piecewise-linear through `(time, value)` points, held flat outside.
    Pwl(Vec<(f64, f64)>),
}

impl Waveform {
    pub fn sine(amplitude: f64, freq: f64) -> Self {
        Waveform::Sine {
            offset: 0.0,
            amplitude,
            freq,
        }
    }

    /// Checks finiteness and shape constraints.
    pub fn validate(&self) -> Result<(), WaveformError> {
        fn finite(name: &'static str, v: f64) -> Result<(), WaveformError> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(WaveformError::NonFinite { name })
            }
        }
        match self {
            Waveform::Dc(v) => finite("value", *v),
            Waveform::Sine {
                offset,
                amplitude,
                freq,
            } => {
                finite("offset", *offset)?;
                finite("amplitude", *amplitude)?;
                finite("freq", *freq)?;
                if *freq < 0.0 {
                    return Err(WaveformError::Invalid("SIN frequency must be >= 0".into()));
                }
                Ok(())
            }
            Waveform::Pulse {
                v0,
                v1,
                delay,
                width,
                period,
                count,
            } => {
                finite("v0", *v0)?;
                finite("v1", *v1)?;
                finite("delay", *delay)?;
                finite("width", *width)?;
                finite("period", *period)?;
                if *delay < 0.0 {
                    return Err(WaveformError::Invalid("PULSE delay must be >= 0".into()));
                }
                if *width <= 0.0 {
                    return Err(WaveformError::Invalid("PULSE width must be > 0".into()));
                }
                if *count != 1 && *width >= *period {
                    return Err(WaveformError::Invalid(
                        "PULSE width must be shorter than its period".into(),
                    ));
                }
                Ok(())
            }
            Waveform::Step { v0, v1, at } => {
                finite("v0", *v0)?;
                finite("v1", *v1)?;
                finite("at", *at)
            }
            Waveform::Pwl(points) => {
                if points.is_empty() {
                    return Err(WaveformError::Invalid(
                        "PWL needs at least one point".into(),
                    ));
                }
                for (t, v) in points {
                    finite("time", *t)?;
                    finite("value", *v)?;
                }
                if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(WaveformError::Invalid(
                        "PWL times must be strictly increasing".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Waveform::Dc(v) => *v,
            Waveform::Sine {
                offset,
                amplitude,
                freq,
            } => offset + amplitude * (2.0 * PI * freq * t).sin(),
            Waveform::Pulse {
                v0,
                v1,
                delay,
                width,
                period,
                count,
            } => {
                if t < *delay {
                    return *v0;
                }
                let rel = t - delay;
                let k = if *period > 0.0 {
                    (rel / period).floor()
                } else {
                    0.0
                };
                if *count > 0 && k >= *count as f64 {
                    return *v0;
                }
                let phase = rel - k * period;
                if phase < *width {
                    *v1
                } else {
                    *v0
                }
            }
            Waveform::Step { v0, v1, at } => {
                if t < *at {
                    *v0
                } else {
                    *v1
                }
            }
            Waveform::Pwl(points) => pwl_value(points, t),
        }
    }

    /// Period of a strictly repeating drive, if any.
    pub fn period(&self) -> Option<f64> {
        match self {
            Waveform::Sine { freq, .. } if *freq > 0.0 => Some(1.0 / freq),
            Waveform::Pulse {
                period, count: 0, ..
            } if *period > 0.0 => Some(*period),
            _ => None,
        }
    }

    /// Start times of the rectangular pulses that begin before `t_stop`.
    /// Empty for every other shape.
    pub fn pulse_starts(&self, t_stop: f64) -> Vec<f64> {
        let Waveform::Pulse {
            delay,
            period,
            count,
            ..
        } = self
        else {
            return Vec::new();
        };
        let mut starts = Vec::new();
        let mut k = 0u32;
        loop {
            if *count > 0 && k >= *count {
                break;
            }
            let start = delay + k as f64 * period;
            if start > t_stop || (k > 0 && *period <= 0.0) {
                break;
            }
            starts.push(start);
            k += 1;
        }
        starts
    }

    /// Largest absolute value the drive ever takes.
    pub fn peak_abs(&self) -> f64 {
        match self {
            Waveform::Dc(v) => v.abs(),
            Waveform::Sine {
                offset, amplitude, ..
            } => offset.abs() + amplitude.abs(),
            Waveform::Pulse { v0, v1, .. } | Waveform::Step { v0, v1, .. } => {
                v0.abs().max(v1.abs())
            }
            Waveform::Pwl(points) => points.iter().map(|p| p.1.abs()).fold(0.0, f64::max),
        }
    }
}

fn pwl_value(points: &[(f64, f64)], t: f64) -> f64 {
    let Some(first) = points.first() else {
        return 0.0;
    };
    if t <= first.0 {
        return first.1;
    }
    for w in points.windows(2) {
        let (t0, v0) = w[0];
        let (t1, v1) = w[1];
        if t <= t1 {
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
        }
    }
    points[points.len() - 1].1
}

/// Netlist spelling, e.g. `SIN(0 1 100)`.
impl fmt::Display for Waveform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Waveform::Dc(v) => write!(f, "{v:?}"),
            Waveform::Sine {
                offset,
                amplitude,
                freq,
            } => write!(f, "SIN({offset:?} {amplitude:?} {freq:?})"),
            Waveform::Pulse {
                v0,
                v1,
                delay,
                width,
                period,
                count,
            } => write!(
                f,
                "PULSE({v0:?} {v1:?} {delay:?} {width:?} {period:?} {count})"
            ),
            Waveform::Step { v0, v1, at } => write!(f, "STEP({v0:?} {v1:?} {at:?})"),
            Waveform::Pwl(points) => {
                f.write_str("PWL(")?;
                for (n, (t, v)) in points.iter().enumerate() {
                    if n > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{t:?} {v:?}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn train() -> Waveform {
        Waveform::Pulse {
            v0: 0.0,
            v1: 1.0,
            delay: 0.01,
            width: 0.001,
            period: 0.01,
            count: 3,
        }
    }

    #[test]
    fn pulse_train_levels() {
        let w = train();
        assert_eq!(w.value(0.0), 0.0);
        assert_eq!(w.value(0.0105), 1.0);
        assert_eq!(w.value(0.0115), 0.0);
        assert_eq!(w.value(0.0305), 1.0);
        // fourth pulse slot is past the count
        assert_eq!(w.value(0.0405), 0.0);
        assert_eq!(w.pulse_starts(1.0), vec![0.01, 0.02, 0.03]);
        assert_eq!(w.period(), None);
    }

    #[test]
    fn unbounded_pulse_is_periodic() {
        let w = Waveform::Pulse {
            v0: -1.0,
            v1: 1.0,
            delay: 0.0,
            width: 0.5,
            period: 1.0,
            count: 0,
        };
        assert_eq!(w.period(), Some(1.0));
        assert_eq!(w.value(7.25), 1.0);
        assert_eq!(w.value(7.75), -1.0);
        assert_eq!(w.pulse_starts(2.5).len(), 3);
    }

    #[test]
    fn sine_and_step() {
        let s = Waveform::sine(2.0, 10.0);
        assert!((s.value(0.025) - 2.0).abs() < 1e-12);
        assert_eq!(s.period(), Some(0.1));
        assert_eq!(s.peak_abs(), 2.0);
        let st = Waveform::Step {
            v0: 0.0,
            v1: 3.0,
            at: 0.5,
        };
        assert_eq!(st.value(0.4999), 0.0);
        assert_eq!(st.value(0.5), 3.0);
        assert_eq!(st.period(), None);
    }

    #[test]
    fn pwl_interpolates_and_holds() {
        let w = Waveform::Pwl(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)]);
        assert_eq!(w.value(-1.0), 0.0);
        assert_eq!(w.value(0.5), 1.0);
        assert_eq!(w.value(1.5), 1.0);
        assert_eq!(w.value(5.0), 0.0);
        assert!(w.validate().is_ok());
        assert!(Waveform::Pwl(vec![(1.0, 0.0), (1.0, 1.0)])
            .validate()
            .is_err());
    }

    #[test]
    fn rejects_bad_pulses() {
        let bad = Waveform::Pulse {
            v0: 0.0,
            v1: 1.0,
            delay: 0.0,
            width: 2.0,
            period: 1.0,
            count: 3,
        };
        assert!(bad.validate().is_err());
        assert!(Waveform::Dc(f64::NAN).validate().is_err());
        assert!(train().validate().is_ok());
    }

    #[test]
    fn display_uses_netlist_spelling() {
        assert_eq!(train().to_string(), "PULSE(0.0 1.0 0.01 0.001 0.01 3)");
        assert_eq!(Waveform::sine(1.0, 100.0).to_string(), "SIN(0.0 1.0 100.0)");
    }
}
