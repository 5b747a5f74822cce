//! Ring-down frequency, damping and envelope extraction.

use serde::Serialize;

use super::trace::Trace;
use super::EngineError;
use crate::netlist::Signal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ringdown {
    pub frequency: f64,
    pub alpha: f64,
    pub crossings: usize,
}

/// A local extremum with parabolically refined time and value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum {
    pub t: f64,
    pub value: f64,
}

/// Fits a parabola through three equally spaced samples around `k`.
fn refine(time: &[f64], x: &[f64], k: usize) -> Extremum {
    if k == 0 || k + 1 >= x.len() {
        return Extremum {
            t: time[k],
            value: x[k],
        };
    }
    let (ym, y0, yp) = (x[k - 1], x[k], x[k + 1]);
    let curvature = ym - 2.0 * y0 + yp;
    if curvature == 0.0 {
        return Extremum {
            t: time[k],
            value: y0,
        };
    }
    let p = (0.5 * (ym - yp) / curvature).clamp(-0.5, 0.5);
    let dt = time[k + 1] - time[k];
    Extremum {
        t: time[k] + p * dt,
        value: y0 - 0.25 * (ym - yp) * p,
    }
}

/// Strict local maxima and minima of `x`, refined.
pub fn local_extrema(time: &[f64], x: &[f64]) -> Vec<Extremum> {
    let mut out = Vec::new();
    for k in 1..x.len().saturating_sub(1) {
        let rise = x[k] - x[k - 1];
        let next = x[k + 1] - x[k];
        if (rise > 0.0 && next <= 0.0) || (rise < 0.0 && next >= 0.0) {
            out.push(refine(time, x, k));
        }
    }
    out
}

/// Zero crossings of `x` by linear interpolation.
fn zero_crossings(time: &[f64], x: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for k in 0..x.len().saturating_sub(1) {
        let (a, b) = (x[k], x[k + 1]);
        if (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0) {
            out.push(time[k] + (time[k + 1] - time[k]) * a / (a - b));
        }
    }
    out
}

/// [`measure_ringdown_after`] over the whole trace.
pub fn measure_ringdown(trace: &Trace, signal: Signal) -> Result<Ringdown, EngineError> {
    measure_ringdown_after(trace, signal, 0.0)
}

/// Frequency from the mean zero-crossing spacing and damping from a
/// least-squares line through `ln |peak|`, using samples from `t_start` on.
///
/// One peak is taken per half cycle, between consecutive crossings.
pub fn measure_ringdown_after(
    trace: &Trace,
    signal: Signal,
    t_start: f64,
) -> Result<Ringdown, EngineError> {
    let x_all = trace.require(signal)?;
    let k0 = trace.index_at(t_start).min(trace.len());
    let time = &trace.time()[k0..];
    let x = &x_all[k0..];

    let crossings = zero_crossings(time, x);
    if crossings.len() < 4 {
        return Err(EngineError::InsufficientData(format!(
            "`{signal}` has {} zero crossings after t = {t_start}; need 4",
            crossings.len()
        )));
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    let frequency = (crossings.len() - 1) as f64 / (2.0 * span);

    let mut peaks = Vec::with_capacity(crossings.len());
    for w in crossings.windows(2) {
        let lo = ((w[0] - time[0]) / trace.dt()).ceil() as usize;
        let hi = (((w[1] - time[0]) / trace.dt()).floor() as usize).min(x.len() - 1);
        if lo > hi {
            continue;
        }
        let k = (lo..=hi)
            .max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs()))
            .expect("non-empty range");
        let p = refine(time, x, k);
        if p.value != 0.0 {
            peaks.push((p.t, p.value.abs().ln()));
        }
    }
    if peaks.len() < 2 {
        return Err(EngineError::InsufficientData(format!(
            "`{signal}` has fewer than two usable peaks"
        )));
    }
    let slope = least_squares_slope(&peaks);
    Ok(Ringdown {
        frequency,
        alpha: -slope,
        crossings: crossings.len(),
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `(t, |extremum|)` for every local extremum of the signal.
pub fn envelope(trace: &Trace, signal: Signal) -> Result<Vec<(f64, f64)>, EngineError> {
    let x = trace.require(signal)?;
    Ok(local_extrema(trace.time(), x)
        .into_iter()
        .map(|e| (e.t, e.value.abs()))
        .collect())
}
