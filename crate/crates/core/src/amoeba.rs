//! Stimulus-anticipation experiment on a staircase RLC loop.
//!
//! A train of `n_train` pulses at period `T = 1 / f_sti` steps the loop
//! inductance down after each pulse. With `C` tuned so the final resonance
//! equals `f_sti`, the free ring-down after training keeps peaking in phase
//! with the stimulus at the probe times `C_k = t(S_last) + k T`, although no
//! further pulses arrive.
//!
//! Peak timing is measured relative to the response latency: the delay of
//! the largest output extremum after the last training pulse. Probe windows
//! are centred on `C_k + latency`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    analyze_second_order, compile_circuit, local_extrema, simulate_transient, EngineError,
    InitialState, Trace, DEFAULT_STIFFNESS_FLOOR,
};
use crate::netlist::{CompiledCircuit, InductiveElement, Signal, Tran};
use crate::waveform::Waveform;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpsError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("expected time {t} s lies outside the trace span [0, {span}] s")]
    Range { t: f64, span: f64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Experiment settings. [`SpsConfig::tuned`] gives the standard protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpsConfig {
    /// Stimulus frequency, hertz.
    pub f_sti: f64,
    pub n_train: u32,
    pub n_probe: u32,
    /// Pulse width, seconds.
    pub pulse_width: f64,
    /// Pulse height, volts.
    pub amplitude: f64,
    pub resistance: f64,
    pub capacitance: f64,
    /// Staircase start value, henries.
    pub l0: f64,
    /// Fractional inductance drop per pulse.
    pub delta: f64,
    /// Integration steps per stimulus period.
    pub steps_per_period: u32,
    /// Half-width of the probe windows as a fraction of `T`.
    pub window: f64,
    /// Detection floor as a fraction of the peak training response.
    pub floor_fraction: f64,
}

impl SpsConfig {
    /// Standard protocol at `f_sti`, with `C` chosen so the inductance after
    /// the last pulse resonates at `f_sti`.
    pub fn tuned(f_sti: f64) -> Self {
        let mut cfg = Self {
            f_sti,
            n_train: 3,
            n_probe: 3,
            pulse_width: 0.1 / f_sti,
            amplitude: 1.0,
            resistance: 10.0,
            capacitance: 0.0,
            l0: 2.0,
            delta: 0.2,
            steps_per_period: 1000,
            window: 0.05,
            floor_fraction: 0.01,
        };
        cfg.capacitance = cfg.tuned_capacitance();
        cfg
    }

    pub fn period(&self) -> f64 {
        1.0 / self.f_sti
    }

    /// Inductance after the last training pulse.
    pub fn final_inductance(&self) -> f64 {
        self.l0 * (1.0 - self.delta).powi(self.n_train as i32)
    }

    /// `C = 1 / ((2 pi f_sti)^2 L_final)`.
    pub fn tuned_capacitance(&self) -> f64 {
        1.0 / ((2.0 * PI * self.f_sti).powi(2) * self.final_inductance())
    }

    pub fn validate(&self) -> Result<(), SpsError> {
        let bad = |msg: String| Err(SpsError::Config(msg));
        let positive = |name: &str, x: f64| -> Result<(), SpsError> {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(SpsError::Config(format!(
                    "{name} must be finite and > 0, got {x}"
                )))
            }
        };
        positive("f_sti", self.f_sti)?;
        positive("pulse_width", self.pulse_width)?;
        positive("capacitance", self.capacitance)?;
        positive("l0", self.l0)?;
        if self.n_train == 0 {
            return bad("n_train must be >= 1".into());
        }
        if self.pulse_width >= self.period() {
            return bad(format!(
                "pulse_width {} must be shorter than the period {}",
                self.pulse_width,
                self.period()
            ));
        }
        if !self.amplitude.is_finite() {
            return bad(format!("amplitude must be finite, got {}", self.amplitude));
        }
        if !(self.resistance.is_finite() && self.resistance >= 0.0) {
            return bad(format!("resistance must be >= 0, got {}", self.resistance));
        }
        if !(self.delta.is_finite() && (0.0..1.0).contains(&self.delta)) {
            return bad(format!("delta must lie in [0, 1), got {}", self.delta));
        }
        if self.steps_per_period < 10 {
            return bad(format!(
                "steps_per_period must be >= 10, got {}",
                self.steps_per_period
            ));
        }
        if !(self.window > 0.0 && self.window < 0.5) {
            return bad(format!("window must lie in (0, 0.5), got {}", self.window));
        }
        if !(self.floor_fraction >= 0.0 && self.floor_fraction < 1.0) {
            return bad(format!(
                "floor_fraction must lie in [0, 1), got {}",
                self.floor_fraction
            ));
        }
        Ok(())
    }
}

impl Default for SpsConfig {
    fn default() -> Self {
        Self::tuned(100.0)
    }
}

/// The pulse train and its timing metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SpsStimulus {
    pub waveform: Waveform,
    /// `S_1 .. S_n`.
    pub pulse_starts: Vec<f64>,
    /// `C_k = S_n + k T`.
    pub probe_times: Vec<f64>,
    /// `(n_train + n_probe + 1) T`.
    pub t_stop: f64,
}

/// Pulses at `T, 2T, .., n_train T`, zero drive afterwards.
pub fn build_sps_stimulus(cfg: &SpsConfig) -> Result<SpsStimulus, SpsError> {
    cfg.validate()?;
    let t = cfg.period();
    let waveform = Waveform::Pulse {
        v0: 0.0,
        v1: cfg.amplitude,
        delay: t,
        width: cfg.pulse_width,
        period: t,
        count: cfg.n_train,
    };
    let pulse_starts: Vec<f64> = (1..=cfg.n_train).map(|k| k as f64 * t).collect();
    let last = *pulse_starts.last().expect("n_train >= 1");
    let probe_times = (1..=cfg.n_probe).map(|k| last + k as f64 * t).collect();
    Ok(SpsStimulus {
        waveform,
        pulse_starts,
        probe_times,
        t_stop: (cfg.n_train + cfg.n_probe + 1) as f64 * t,
    })
}

/// The staircase loop driven by the stimulus.
pub fn sps_circuit(cfg: &SpsConfig) -> Result<CompiledCircuit, SpsError> {
    let stimulus = build_sps_stimulus(cfg)?;
    let mut circuit = CompiledCircuit::series(
        stimulus.waveform,
        cfg.resistance,
        InductiveElement::Staircase {
            l0: cfg.l0,
            delta: cfg.delta,
        },
        cfg.capacitance,
        Tran {
            step: cfg.period() / cfg.steps_per_period as f64,
            stop: stimulus.t_stop,
        },
    );
    circuit.outputs = vec![Signal::VOut, Signal::LEff];
    Ok(circuit)
}

/// One detected output extremum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseEvent {
    pub expected: f64,
    pub t: f64,
    /// Signed output voltage at the extremum.
    pub value: f64,
    pub amplitude: f64,
}

/// Largest `|v_out|` extremum in `[lo, hi]`, if any.
fn largest_extremum(trace: &Trace, v: &[f64], lo: f64, hi: f64) -> Option<(f64, f64)> {
    // one extra sample on each side so edge extrema are recognized
    let a = trace.index_at(lo).saturating_sub(1);
    let b = (trace.index_at(hi) + 1).min(trace.len());
    if b <= a {
        return None;
    }
    local_extrema(&trace.time()[a..b], &v[a..b])
        .into_iter()
        .filter(|e| e.t >= lo && e.t <= hi)
        .max_by(|x, y| x.value.abs().total_cmp(&y.value.abs()))
        .map(|e| (e.t, e.value))
}

/// For each expected time `t`, the largest `|v_out|` local extremum inside
/// `[t (1 - window), t (1 + window)]`, kept when its amplitude reaches `floor`.
pub fn detect_responses(
    trace: &Trace,
    expected_times: &[f64],
    window: f64,
    floor: f64,
) -> Result<Vec<ResponseEvent>, SpsError> {
    if !(window > 0.0 && window < 0.5) {
        return Err(SpsError::Config(format!(
            "window must lie in (0, 0.5), got {window}"
        )));
    }
    let v = trace.require(Signal::VOut)?;
    let span = trace.time().last().copied().unwrap_or(0.0);
    let mut events = Vec::new();
    for &t in expected_times {
        if !(t >= 0.0 && t <= span) {
            return Err(SpsError::Range { t, span });
        }
        if let Some((te, value)) =
            largest_extremum(trace, v, t * (1.0 - window), t * (1.0 + window))
        {
            if value.abs() >= floor {
                events.push(ResponseEvent {
                    expected: t,
                    t: te,
                    value,
                    amplitude: value.abs(),
                });
            }
        }
    }
    Ok(events)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpsReport {
    /// Inductance before training and after each pulse, henries.
    pub l_sequence: Vec<f64>,
    /// Resonance for each entry of `l_sequence`, hertz.
    pub f0_sequence: Vec<f64>,
    pub s_events: Vec<ResponseEvent>,
    pub c_events: Vec<ResponseEvent>,
    pub anticipation_detected: bool,
    /// `|t_detected - t_expected|` per probe, seconds; `None` when the probe
    /// period holds no extremum above the floor.
    pub timing_errors: Vec<Option<f64>>,
    /// Delay of the strongest response after the last pulse, seconds.
    pub latency: f64,
    /// Probe window centres `C_k + latency`, seconds.
    pub expected_c_times: Vec<f64>,
    pub noise_floor: f64,
    /// `R / (2 L_final)`, 1/s.
    pub alpha_final: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpsRun {
    pub report: SpsReport,
    pub trace: Trace,
}

/// Simulates the full protocol and scores the three signatures.
pub fn run_sps(cfg: &SpsConfig) -> Result<SpsRun, SpsError> {
    let stimulus = build_sps_stimulus(cfg)?;
    let circuit = sps_circuit(cfg)?;
    let system = compile_circuit(&circuit, DEFAULT_STIFFNESS_FLOOR)?;
    let trace = simulate_transient(&system, circuit.tran, InitialState::default())?;
    let v = trace.require(Signal::VOut)?;
    let period = cfg.period();

    let l_sequence = system.inductance_sequence();
    let f0_sequence = l_sequence
        .iter()
        .map(|&l| analyze_second_order(cfg.resistance, l, cfg.capacitance).map(|m| m.f0))
        .collect::<Result<Vec<_>, _>>()?;

    let first = stimulus.pulse_starts[0];
    let last = *stimulus.pulse_starts.last().expect("n_train >= 1");
    let (a, b) = (
        trace.index_at(first),
        trace.index_at(last + period).min(trace.len()),
    );
    let training_peak = v[a..b].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let noise_floor = cfg.floor_fraction * training_peak;

    let mut s_events = Vec::new();
    for &s in &stimulus.pulse_starts {
        let lo = s + cfg.pulse_width;
        let hi = s + period - trace.dt();
        if let Some((t, value)) = largest_extremum(&trace, v, lo, hi) {
            if value.abs() >= noise_floor {
                s_events.push(ResponseEvent {
                    expected: s,
                    t,
                    value,
                    amplitude: value.abs(),
                });
            }
        }
    }

    let latency = s_events
        .iter()
        .find(|e| e.expected == last)
        .map(|e| e.t - last)
        .unwrap_or(0.0);
    let half_window = cfg.window * period;
    let expected_c_times: Vec<f64> = stimulus.probe_times.iter().map(|c| c + latency).collect();
    let span = trace.time().last().copied().unwrap_or(0.0);

    let mut c_events = Vec::new();
    let mut timing_errors = Vec::new();
    for &te in &expected_c_times {
        if te > span {
            timing_errors.push(None);
            continue;
        }
        // the window is given as a fraction of the expected time
        c_events.extend(detect_responses(
            &trace,
            &[te],
            half_window / te,
            noise_floor,
        )?);
        let nearest = local_extrema(trace.time(), v)
            .into_iter()
            .filter(|e| (e.t - te).abs() <= 0.5 * period && e.value.abs() >= noise_floor)
            .map(|e| (e.t - te).abs())
            .min_by(f64::total_cmp);
        timing_errors.push(nearest);
    }
    let anticipation_detected = c_events.len() == cfg.n_probe as usize
        && timing_errors
            .iter()
            .all(|e| matches!(e, Some(x) if *x <= half_window));

    let report = SpsReport {
        l_sequence,
        f0_sequence,
        s_events,
        c_events,
        anticipation_detected,
        timing_errors,
        latency,
        expected_c_times,
        noise_floor,
        alpha_final: cfg.resistance / (2.0 * cfg.final_inductance()),
    };
    Ok(SpsRun { report, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stimulus_protocol_at_100_hz() {
        let cfg = SpsConfig::default();
        assert_relative_eq!(cfg.pulse_width, 1e-3, max_relative = 1e-12);
        let s = build_sps_stimulus(&cfg).unwrap();
        for (got, want) in s.pulse_starts.iter().zip([0.01, 0.02, 0.03]) {
            assert_relative_eq!(*got, want, max_relative = 1e-12);
        }
        for (got, want) in s.probe_times.iter().zip([0.04, 0.05, 0.06]) {
            assert_relative_eq!(*got, want, max_relative = 1e-12);
        }
        assert_relative_eq!(s.t_stop, 0.07, max_relative = 1e-12);
        assert_eq!(s.waveform.pulse_starts(s.t_stop).len(), 3);
    }

    #[test]
    fn invalid_configurations() {
        let cfg = SpsConfig {
            n_train: 0,
            ..SpsConfig::default()
        };
        assert!(matches!(build_sps_stimulus(&cfg), Err(SpsError::Config(_))));
        let cfg = SpsConfig {
            pulse_width: 0.01,
            ..SpsConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SpsConfig {
            delta: 1.0,
            ..SpsConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn tuned_capacitance_matches_the_declared_value() {
        assert_relative_eq!(
            SpsConfig::default().capacitance,
            2.474e-6,
            max_relative = 1e-3
        );
    }

    #[test]
    fn detection_on_constructed_sine() {
        let dt = 1e-4;
        let v: Vec<f64> = (0..10_000)
            .map(|k| (2.0 * PI * 5.0 * k as f64 * dt).sin())
            .collect();
        let trace = Trace::from_columns(dt, [(Signal::VOut, v)]).unwrap();
        let peaks = [0.05, 0.25, 0.45];
        let ev = detect_responses(&trace, &peaks, 0.1, 0.5).unwrap();
        assert_eq!(ev.len(), 3);
        for (e, p) in ev.iter().zip(peaks) {
            assert!((e.t - p).abs() < dt);
        }
        assert!(matches!(
            detect_responses(&trace, &[2.0], 0.1, 0.5),
            Err(SpsError::Range { .. })
        ));
        let flat = Trace::from_columns(dt, [(Signal::VOut, vec![0.0; 100])]).unwrap();
        assert!(detect_responses(&flat, &[0.005], 0.1, 0.0)
            .unwrap()
            .is_empty());
    }
}
