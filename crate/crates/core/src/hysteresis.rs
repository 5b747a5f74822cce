//! m-H loops from the rotational model and the shifted-tanh branch model.
//!
//! Field units are arbitrary: the drive value is used directly as `h`, i.e.
//! the coil constant relating current to field is taken as one.

use serde::Serialize;
use thiserror::Error;

use crate::device::{magnetization_rate, CoilCoreParams, DeviceError};
use crate::ode::rk4_step;
use crate::waveform::Waveform;

/// Hard cap on RK4 steps spent on one loop.
const MAX_LOOP_STEPS: f64 = 1e7;
/// Largest charge increment per RK4 step, as a fraction of `sw_eff`.
const CHARGE_STEP_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HysteresisError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error(transparent)]
    Device(#[from] DeviceError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopSample {
    pub h: f64,
    pub m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LoopMetrics {
    pub area: f64,
    /// Field at the upward m = 0 crossing.
    pub hc_up: Option<f64>,
    /// Field at the downward m = 0 crossing.
    pub hc_down: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Ascending,
    Descending,
}

/// How much of a drive to simulate and how densely to sample it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSpec {
    pub cycles: usize,
    pub samples_per_cycle: usize,
    /// Length of one cycle in seconds. Defaults to the drive period; required
    /// for non-periodic drives.
    pub window: Option<f64>,
}

impl LoopSpec {
    pub fn periodic(cycles: usize, samples_per_cycle: usize) -> Self {
        Self {
            cycles,
            samples_per_cycle,
            window: None,
        }
    }
}

/// Integrates the rotational rate law under `drive` and returns the last
/// cycle as `samples_per_cycle + 1` points, both endpoints included.
///
/// Earlier cycles are discarded as transient. Each sample interval is
/// subdivided so that no RK4 step moves more than a thousandth of `sw_eff`
/// worth of charge.
pub fn simulate_mh_loop(
    drive: &Waveform,
    params: &CoilCoreParams,
    spec: &LoopSpec,
) -> Result<Vec<LoopSample>, HysteresisError> {
    if spec.cycles < 1 {
        return Err(HysteresisError::Config("cycles must be >= 1".into()));
    }
    if spec.samples_per_cycle < 16 {
        return Err(HysteresisError::Config(
            "samples_per_cycle must be >= 16".into(),
        ));
    }
    drive
        .validate()
        .map_err(|e| HysteresisError::Config(e.to_string()))?;
    let period = drive.period();
    if period.is_none() && spec.cycles > 1 {
        return Err(HysteresisError::Config(format!(
            "{} cycles requested for a non-periodic drive",
            spec.cycles
        )));
    }
    let cycle = match (spec.window, period) {
        (Some(w), _) => w,
        (None, Some(p)) => p,
        (None, None) => {
            return Err(HysteresisError::Config(
                "non-periodic drive needs an explicit window".into(),
            ))
        }
    };
    if !(cycle.is_finite() && cycle > 0.0) {
        return Err(HysteresisError::Config(format!(
            "cycle length must be > 0, got {cycle}"
        )));
    }

    let sw = params.sw_eff();
    let sample_dt = cycle / spec.samples_per_cycle as f64;
    let sub = (sample_dt * drive.peak_abs() / (CHARGE_STEP_FRACTION * sw))
        .ceil()
        .max(1.0);
    let total_samples = spec.cycles * spec.samples_per_cycle;
    if total_samples as f64 * sub > MAX_LOOP_STEPS {
        return Err(HysteresisError::Config(format!(
            "loop needs {:e} integration steps; reduce the drive or sample count",
            total_samples as f64 * sub
        )));
    }
    let sub = sub as usize;
    let h_sub = sample_dt / sub as f64;

    let rhs = |t: f64, y: &[f64; 2]| -> Result<[f64; 2], DeviceError> {
        let i = drive.value(t);
        Ok([magnetization_rate(y[0], i, sw)?, i])
    };

    let keep_from = total_samples - spec.samples_per_cycle;
    let mut out = Vec::with_capacity(spec.samples_per_cycle + 1);
    let mut y = [params.m0(), 0.0];
    for k in 0..=total_samples {
        let t = k as f64 * sample_dt;
        if k >= keep_from {
            out.push(LoopSample {
                h: drive.value(t),
                m: y[0],
            });
        }
        if k == total_samples {
            break;
        }
        for j in 0..sub {
            y = rk4_step(rhs, t + j as f64 * h_sub, &y, h_sub)?;
        }
    }
    Ok(out)
}

/// Shifted-tanh branch model: `tanh(a (h - hc))` on the ascending branch,
/// `tanh(a (h + hc))` on the descending one.
pub fn tanh_branch_model(h: f64, a: f64, hc: f64, branch: Branch) -> f64 {
    match branch {
        Branch::Ascending => (a * (h - hc)).tanh(),
        Branch::Descending => (a * (h + hc)).tanh(),
    }
}

/// Shoelace area and interpolated coercive fields of a closed loop.
pub fn loop_metrics(samples: &[LoopSample]) -> Result<LoopMetrics, HysteresisError> {
    check_closed(samples)?;

    let mut twice_area = 0.0;
    for w in samples.windows(2) {
        twice_area += w[0].h * w[1].m - w[1].h * w[0].m;
    }
    // close the polygon in case the endpoints differ slightly
    let (first, last) = (samples[0], samples[samples.len() - 1]);
    twice_area += last.h * first.m - first.h * last.m;

    let mut hc_up = None;
    let mut hc_down = None;
    for w in samples.windows(2) {
        let (p, n) = (w[0], w[1]);
        let up = p.m <= 0.0 && n.m > 0.0;
        let down = p.m >= 0.0 && n.m < 0.0;
        if !(up || down) {
            continue;
        }
        let h = p.h + (n.h - p.h) * (-p.m) / (n.m - p.m);
        if up && hc_up.is_none() {
            hc_up = Some(h);
        }
        if down && hc_down.is_none() {
            hc_down = Some(h);
        }
    }

    Ok(LoopMetrics {
        area: 0.5 * twice_area.abs(),
        hc_up,
        hc_down,
    })
}

fn check_closed(samples: &[LoopSample]) -> Result<(), HysteresisError> {
    if samples.len() < 8 {
        return Err(HysteresisError::Shape(format!(
            "a loop needs at least 8 samples, got {}",
            samples.len()
        )));
    }
    let (first, last) = (samples[0], samples[samples.len() - 1]);
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.h), hi.max(s.h))
        });
    let h_tol = 1e-3 * (hi - lo).max(f64::MIN_POSITIVE);
    if (first.m - last.m).abs() > 1e-3 || (first.h - last.h).abs() > h_tol {
        return Err(HysteresisError::Shape(format!(
            "curve is open: starts at ({}, {}) and ends at ({}, {})",
            first.h, first.m, last.h, last.m
        )));
    }
    Ok(())
}

/// Field-sweep direction at every sample of a closed loop.
///
/// Uses the central difference of `h` along the sequence, wrapping through
/// the duplicated endpoint.
pub fn branch_labels(samples: &[LoopSample]) -> Vec<Branch> {
    let n = samples.len();
    if n < 3 {
        return vec![Branch::Ascending; n];
    }
    // the last sample repeats the first, so wrap over n - 1 distinct points
    let distinct = n - 1;
    (0..n)
        .map(|k| {
            let k = k % distinct;
            let prev = samples[(k + distinct - 1) % distinct].h;
            let next = samples[(k + 1) % distinct].h;
            if next - prev >= 0.0 {
                Branch::Ascending
            } else {
                Branch::Descending
            }
        })
        .collect()
}

/// Least-squares fit of the shifted-tanh branch model to a sampled loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TanhBranchFit {
    pub a: f64,
    pub hc: f64,
    pub rms_residual: f64,
    pub max_abs_residual: f64,
}

/// Fits `(a, hc)` by a coarse grid search followed by Levenberg-Marquardt.
/// Branch membership comes from [`branch_labels`].
pub fn fit_tanh_branches(samples: &[LoopSample]) -> Result<TanhBranchFit, HysteresisError> {
    check_closed(samples)?;
    let branches = branch_labels(samples);
    let h_scale = samples.iter().map(|s| s.h.abs()).fold(0.0, f64::max);
    if h_scale == 0.0 {
        return Err(HysteresisError::Shape("loop has no field excursion".into()));
    }

    let cost = |a: f64, hc: f64| -> f64 {
        samples
            .iter()
            .zip(&branches)
            .map(|(s, &b)| (tanh_branch_model(s.h, a, hc, b) - s.m).powi(2))
            .sum()
    };

    let mut best = (f64::INFINITY, 1.0, 0.0);
    for ia in 0..=24 {
        let a = 0.1 * 10f64.powf(ia as f64 / 8.0) / h_scale;
        for ih in 0..=20 {
            let hc = 1.5 * h_scale * ih as f64 / 20.0;
            let c = cost(a, hc);
            if c < best.0 {
                best = (c, a, hc);
            }
        }
    }

    let (mut a, mut hc) = (best.1, best.2);
    let mut current = best.0;
    let mut lambda = 1e-3;
    for _ in 0..500 {
        // normal equations J^T J dx = -J^T r for the two parameters
        let (mut jaa, mut jah, mut jhh, mut ga, mut gh) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (s, &b) in samples.iter().zip(&branches) {
            let sign = match b {
                Branch::Ascending => -1.0,
                Branch::Descending => 1.0,
            };
            let x = s.h + sign * hc;
            let t = (a * x).tanh();
            let sech2 = 1.0 - t * t;
            let da = sech2 * x;
            let dh = sech2 * a * sign;
            let r = t - s.m;
            jaa += da * da;
            jah += da * dh;
            jhh += dh * dh;
            ga += da * r;
            gh += dh * r;
        }
        let m_aa = jaa * (1.0 + lambda);
        let m_hh = jhh * (1.0 + lambda);
        let det = m_aa * m_hh - jah * jah;
        if det.abs() < 1e-300 {
            break;
        }
        let step_a = -(m_hh * ga - jah * gh) / det;
        let step_h = -(m_aa * gh - jah * ga) / det;
        let na = (a + step_a).max(1e-12 / h_scale);
        let nh = (hc + step_h).max(0.0);
        let trial = cost(na, nh);
        if trial < current {
            let gain = current - trial;
            a = na;
            hc = nh;
            current = trial;
            lambda = (lambda * 0.3).max(1e-12);
            if gain < 1e-15 * current.max(1e-300) {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }

    let residuals: Vec<f64> = samples
        .iter()
        .zip(&branches)
        .map(|(s, &b)| tanh_branch_model(s.h, a, hc, b) - s.m)
        .collect();
    let rms = (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt();
    let max_abs = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    Ok(TanhBranchFit {
        a,
        hc,
        rms_residual: rms,
        max_abs_residual: max_abs,
    })
}

/// Sine amplitude whose charge swing `2 I0 / w` spans `2 sw_eff atanh|m0|`,
/// carrying `m` from `-|m0|` to `+|m0|` and back.
pub fn matched_sine_amplitude(params: &CoilCoreParams, freq: f64) -> f64 {
    2.0 * std::f64::consts::PI * freq * params.sw_eff() * params.m0().abs().atanh()
}

/// Writes `h,m` rows with a header.
pub fn loop_csv(samples: &[LoopSample]) -> String {
    let mut out = String::from("h,m\n");
    for s in samples {
        out.push_str(&format!("{:.12e},{:.12e}\n", s.h, s.m));
    }
    out
}
