//! Transient simulation of the series loop, plus second-order analytics.
//!
//! Two reductions of the loop equation are used. An inertial element (linear
//! or staircase inductor) gives the states `(q, i, v_c)`:
//!
//! ```text
//! dq/dt = i,  di/dt = (v_in - R i - v_c) / L(t),  dv_c/dt = i / C
//! ```
//!
//! The coil-core element drops `phi'(q) i` instead of `L di/dt`, so the
//! current is algebraic and the states are `(q, v_c)`:
//!
//! ```text
//! i = (v_in - v_c) / (R + phi'(q)),  dv_c/dt = i / C
//! ```

pub mod ringdown;
pub mod trace;

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::device::{flux_slope, CoilCoreParams, MAX_STEPS};
use crate::netlist::{CompiledCircuit, InductiveElement, Signal, Tran};
use crate::ode::{rk4_step, step_count};
use crate::waveform::Waveform;

pub use ringdown::{
    envelope, local_extrema, measure_ringdown, measure_ringdown_after, Extremum, Ringdown,
};
pub use trace::Trace;

/// Default lower bound on `R + phi'(q)` for coil-core loops, ohms.
pub const DEFAULT_STIFFNESS_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid transient settings: {0}")]
    InvalidTran(String),
    #[error(
        "loop resistance R + phi'(q) = {denominator:e} ohm fell below the floor {floor:e} at t = {t:e} s; \
         increase R"
    )]
    Stiff {
        t: f64,
        denominator: f64,
        floor: f64,
    },
    #[error("state became non-finite at t = {t:e} s")]
    Divergence { t: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("unknown signal `{0}`")]
    UnknownSignal(String),
    #[error("simulation would take {0:e} steps (limit {MAX_STEPS:e})")]
    TooManySteps(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Underdamped,
    Critical,
    Overdamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondOrderMetrics {
    pub f0: f64,
    pub alpha: f64,
    /// Damped natural frequency; `None` unless underdamped.
    pub fd: Option<f64>,
    pub regime: Regime,
}

/// Natural frequency, damping factor and damped frequency of a series RLC.
pub fn analyze_second_order(r: f64, l: f64, c: f64) -> Result<SecondOrderMetrics, EngineError> {
    if !(l.is_finite() && l > 0.0) {
        return Err(EngineError::Domain(format!(
            "inductance must be > 0, got {l}"
        )));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(EngineError::Domain(format!(
            "capacitance must be > 0, got {c}"
        )));
    }
    if !(r.is_finite() && r >= 0.0) {
        return Err(EngineError::Domain(format!(
            "resistance must be >= 0, got {r}"
        )));
    }
    let f0 = 1.0 / (2.0 * PI * (l * c).sqrt());
    let alpha = r / (2.0 * l);
    let w0 = 2.0 * PI * f0;
    let regime = if (alpha - w0).abs() <= 1e-12 * w0 {
        Regime::Critical
    } else if alpha < w0 {
        Regime::Underdamped
    } else {
        Regime::Overdamped
    };
    let fd = (regime == Regime::Underdamped)
        .then(|| (f0 * f0 - (alpha / (2.0 * PI)).powi(2)).max(0.0).sqrt());
    Ok(SecondOrderMetrics {
        f0,
        alpha,
        fd,
        regime,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum LoopModel {
    /// Inductance `l0`, multiplied by `1 - delta` at every scheduled event.
    Inertial { l0: f64, delta: f64 },
    CoilCore {
        params: CoilCoreParams,
        orientation: f64,
    },
}

/// ODE form of a compiled loop, ready for [`simulate_transient`].
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitSystem {
    source: Waveform,
    resistance: f64,
    capacitance: f64,
    model: LoopModel,
    capacitor_orientation: f64,
    floor: f64,
    /// Staircase update times, ascending.
    events: Vec<f64>,
    tran: Tran,
}

impl CircuitSystem {
    pub fn tran(&self) -> Tran {
        self.tran
    }

    pub fn source(&self) -> &Waveform {
        &self.source
    }

    /// Times at which the staircase inductance steps down.
    pub fn staircase_schedule(&self) -> &[f64] {
        &self.events
    }

    pub fn is_inertial(&self) -> bool {
        matches!(self.model, LoopModel::Inertial { .. })
    }

    /// Inductance before any event and after each scheduled event.
    pub fn inductance_sequence(&self) -> Vec<f64> {
        match self.model {
            LoopModel::Inertial { l0, delta } => {
                let mut l = l0;
                let mut out = vec![l];
                for _ in &self.events {
                    l *= 1.0 - delta;
                    out.push(l);
                }
                out
            }
            LoopModel::CoilCore { .. } => Vec::new(),
        }
    }
}

/// Reduces a validated circuit to its state equations.
///
/// Staircase updates are scheduled at the source's declared pulse starts up
/// to the stop time. `floor` bounds `R + phi'(q)` for coil-core loops.
pub fn compile_circuit(
    circuit: &CompiledCircuit,
    floor: f64,
) -> Result<CircuitSystem, EngineError> {
    if !(floor.is_finite() && floor >= 0.0) {
        return Err(EngineError::Domain(format!(
            "stiffness floor must be >= 0, got {floor}"
        )));
    }
    if !(circuit.resistance.is_finite() && circuit.resistance >= 0.0) {
        return Err(EngineError::Domain(format!(
            "resistance must be >= 0, got {}",
            circuit.resistance
        )));
    }
    if !(circuit.capacitance.is_finite() && circuit.capacitance > 0.0) {
        return Err(EngineError::Domain(format!(
            "capacitance must be > 0, got {}",
            circuit.capacitance
        )));
    }
    circuit
        .source
        .validate()
        .map_err(|e| EngineError::Domain(e.to_string()))?;

    let (model, events) = match circuit.inductive {
        InductiveElement::Linear { henries } => (inertial(henries, 0.0)?, Vec::new()),
        InductiveElement::Staircase { l0, delta } => (
            inertial(l0, delta)?,
            circuit.source.pulse_starts(circuit.tran.stop),
        ),
        InductiveElement::CoilCore(params) => (
            LoopModel::CoilCore {
                params,
                orientation: circuit.inductive_orientation,
            },
            Vec::new(),
        ),
    };
    Ok(CircuitSystem {
        source: circuit.source.clone(),
        resistance: circuit.resistance,
        capacitance: circuit.capacitance,
        model,
        capacitor_orientation: circuit.capacitor_orientation,
        floor,
        events,
        tran: circuit.tran,
    })
}

fn inertial(l0: f64, delta: f64) -> Result<LoopModel, EngineError> {
    if !(l0.is_finite() && l0 > 0.0) {
        return Err(EngineError::Domain(format!(
            "inductance must be > 0, got {l0}"
        )));
    }
    if !(delta.is_finite() && (0.0..1.0).contains(&delta)) {
        return Err(EngineError::Domain(format!(
            "delta must lie in [0, 1), got {delta}"
        )));
    }
    Ok(LoopModel::Inertial { l0, delta })
}

/// Loop state at `t = 0`. `i` is ignored by coil-core loops, whose current
/// follows from the other states.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct InitialState {
    pub q: f64,
    pub i: f64,
    pub v_c: f64,
}

/// Fixed-step RK4 over `[0, tran.stop]`, sampling every step.
///
/// Staircase updates scheduled at or before a grid time (to within
/// `1e-6 dt`) are applied before that sample is recorded, so `l_eff` shows
/// the new value from the event onward.
pub fn simulate_transient(
    system: &CircuitSystem,
    tran: Tran,
    init: InitialState,
) -> Result<Trace, EngineError> {
    let Tran { step: dt, stop } = tran;
    if !(dt.is_finite() && dt > 0.0 && stop.is_finite() && stop > 0.0) {
        return Err(EngineError::InvalidTran(format!(
            "step and stop must be finite and > 0, got {dt} and {stop}"
        )));
    }
    if dt > stop / 10.0 {
        return Err(EngineError::InvalidTran(format!(
            "step {dt} exceeds a tenth of the stop time {stop}"
        )));
    }
    let steps = step_count(stop, dt);
    if steps > MAX_STEPS {
        return Err(EngineError::TooManySteps(steps));
    }
    if ![init.q, init.i, init.v_c].iter().all(|x| x.is_finite()) {
        return Err(EngineError::Domain("initial state must be finite".into()));
    }
    let n = steps as usize + 1;
    match system.model {
        LoopModel::Inertial { l0, delta } => run_inertial(system, dt, n, init, l0, delta),
        LoopModel::CoilCore {
            params,
            orientation,
        } => run_coil_core(system, dt, n, init, &params, orientation),
    }
}

struct Columns {
    v_in: Vec<f64>,
    i: Vec<f64>,
    v_out: Vec<f64>,
    q: Vec<f64>,
    l_eff: Vec<f64>,
}

impl Columns {
    fn new(n: usize) -> Self {
        let v = || Vec::with_capacity(n);
        Self {
            v_in: v(),
            i: v(),
            v_out: v(),
            q: v(),
            l_eff: v(),
        }
    }
}

fn run_inertial(
    sys: &CircuitSystem,
    dt: f64,
    n: usize,
    init: InitialState,
    l0: f64,
    delta: f64,
) -> Result<Trace, EngineError> {
    let (r, c) = (sys.resistance, sys.capacitance);
    let tol = 1e-6 * dt;
    let mut cols = Columns::new(n);
    let mut y = [init.q, init.i, init.v_c];
    let mut l = l0;
    let mut next_event = 0;

    for k in 0..n {
        let t = k as f64 * dt;
        while next_event < sys.events.len() && sys.events[next_event] <= t + tol {
            l *= 1.0 - delta;
            next_event += 1;
        }
        cols.v_in.push(sys.source.value(t));
        cols.q.push(y[0]);
        cols.i.push(y[1]);
        cols.v_out.push(sys.capacitor_orientation * y[2]);
        cols.l_eff.push(l);
        if k + 1 == n {
            break;
        }
        let rhs = |t: f64, s: &[f64; 3]| -> Result<[f64; 3], EngineError> {
            let v_in = sys.source.value(t);
            Ok([s[1], (v_in - r * s[1] - s[2]) / l, s[1] / c])
        };
        y = rk4_step(rhs, t, &y, dt)?;
        if !y.iter().all(|x| x.is_finite()) {
            return Err(EngineError::Divergence { t: t + dt });
        }
    }
    Trace::from_columns(
        dt,
        [
            (Signal::VIn, cols.v_in),
            (Signal::I, cols.i),
            (Signal::VOut, cols.v_out),
            (Signal::Q, cols.q),
            (Signal::LEff, cols.l_eff),
        ],
    )
}

fn run_coil_core(
    sys: &CircuitSystem,
    dt: f64,
    n: usize,
    init: InitialState,
    params: &CoilCoreParams,
    orientation: f64,
) -> Result<Trace, EngineError> {
    let (r, c, floor) = (sys.resistance, sys.capacitance, sys.floor);
    // The element sees charge `orientation * q`; its drop along the loop is
    // `phi'(orientation * q) * i` for either orientation.
    let current = |t: f64, q: f64, v_c: f64| -> Result<f64, EngineError> {
        let denominator = r + flux_slope(orientation * q, params);
        if denominator.is_nan() || denominator < floor || denominator == 0.0 {
            return Err(EngineError::Stiff {
                t,
                denominator,
                floor,
            });
        }
        Ok((sys.source.value(t) - v_c) / denominator)
    };
    let mut cols = Columns::new(n);
    let mut y = [init.q, init.v_c];

    for k in 0..n {
        let t = k as f64 * dt;
        cols.v_in.push(sys.source.value(t));
        cols.q.push(y[0]);
        cols.i.push(current(t, y[0], y[1])?);
        cols.v_out.push(sys.capacitor_orientation * y[1]);
        if k + 1 == n {
            break;
        }
        let rhs = |t: f64, s: &[f64; 2]| -> Result<[f64; 2], EngineError> {
            let i = current(t, s[0], s[1])?;
            Ok([i, i / c])
        };
        y = rk4_step(rhs, t, &y, dt)?;
        if !y.iter().all(|x| x.is_finite()) {
            return Err(EngineError::Divergence { t: t + dt });
        }
    }
    Trace::from_columns(
        dt,
        [
            (Signal::VIn, cols.v_in),
            (Signal::I, cols.i),
            (Signal::VOut, cols.v_out),
            (Signal::Q, cols.q),
        ],
    )
}
