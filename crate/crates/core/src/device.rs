//! Coil-core meminductor physics.
//!
//! The core is a single-domain body whose normalized axial magnetization
//! `m = M_z / M_s` obeys the scalar rotational rate law
//!
//! ```text
//! dm/dt = i(t) (1 - m^2) / sw_eff
//! ```
//!
//! which integrates in closed form to `m = tanh(q / sw_eff + atanh m0)` with
//! `q` the charge that has passed through the coil. The switched flux is
//! anchored so that `phi(q = 0) = 0`:
//!
//! ```text
//! phi(q) = flux_scale * (tanh(q / sw_eff + atanh m0) - m0)
//! ```
//!
//! Along a constant-current trajectory the time integral of flux `rho` is a
//! function of `q` alone, and `L(q) = d rho / d q = phi(q) / i0`.
//!
//! Voltages use the passive sign convention: the terminal drop is `+dphi/dt`.

use serde::Serialize;
use thiserror::Error;

use crate::ode::{rk4_step, step_count};
use crate::waveform::Waveform;

/// Upper bound on fixed steps for one device integration.
pub const MAX_STEPS: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeviceError {
    #[error("flux_scale must be finite and > 0, got {0}")]
    FluxScale(f64),
    #[error("sw_eff must be finite and > 0, got {0}")]
    SwitchingCoefficient(f64),
    #[error("m0 must lie strictly inside (-1, 1), got {0}")]
    InitialMagnetization(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integration would take {0:e} steps (limit {MAX_STEPS:e})")]
    TooManySteps(f64),
}

/// Constants of one coil-core meminductor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoilCoreParams {
    /// `mu0 * S * M_s`, webers.
    flux_scale: f64,
    /// Effective switching coefficient, ampere-seconds.
    sw_eff: f64,
    /// Initial normalized magnetization.
    m0: f64,
    #[serde(skip)]
    offset: f64,
}

impl CoilCoreParams {
    /// Default switching coefficient: 0.2 Oe us mapped through a unit coil
    /// constant.
    pub const DEFAULT_SW_EFF: f64 = 0.2e-6;
    /// Near-saturated starting state used for the constitutive curves.
    pub const DEFAULT_M0: f64 = -0.964;

    pub fn new(flux_scale: f64, sw_eff: f64, m0: f64) -> Result<Self, DeviceError> {
        if !(flux_scale.is_finite() && flux_scale > 0.0) {
            return Err(DeviceError::FluxScale(flux_scale));
        }
        if !(sw_eff.is_finite() && sw_eff > 0.0) {
            return Err(DeviceError::SwitchingCoefficient(sw_eff));
        }
        if !(m0.is_finite() && m0.abs() < 1.0) {
            return Err(DeviceError::InitialMagnetization(m0));
        }
        let offset = m0.atanh();
        if !offset.is_finite() {
            return Err(DeviceError::InitialMagnetization(m0));
        }
        Ok(Self {
            flux_scale,
            sw_eff,
            m0,
            offset,
        })
    }

    pub fn flux_scale(&self) -> f64 {
        self.flux_scale
    }

    pub fn sw_eff(&self) -> f64 {
        self.sw_eff
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    /// Integration constant `atanh(m0)`.
    pub fn integration_constant(&self) -> f64 {
        self.offset
    }

    /// Argument of the tanh law at charge `q`.
    #[inline]
    fn phase(&self, q: f64) -> f64 {
        q / self.sw_eff + self.offset
    }
}

impl Default for CoilCoreParams {
    fn default() -> Self {
        Self::new(1e-3, Self::DEFAULT_SW_EFF, Self::DEFAULT_M0).expect("valid defaults")
    }
}

/// Magnetization and accumulated charge at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagnetizationState {
    pub t: f64,
    pub m: f64,
    pub q: f64,
}

/// `dm/dt = i (1 - m^2) / sw_eff`.
pub fn magnetization_rate(m: f64, i: f64, sw_eff: f64) -> Result<f64, DeviceError> {
    if !m.is_finite() || !i.is_finite() || !sw_eff.is_finite() {
        return Err(DeviceError::Domain(format!(
            "non-finite input (m = {m}, i = {i}, sw_eff = {sw_eff})"
        )));
    }
    if sw_eff <= 0.0 {
        return Err(DeviceError::SwitchingCoefficient(sw_eff));
    }
    Ok(i * (1.0 - m * m) / sw_eff)
}

/// `m(q) = tanh(q / sw_eff + atanh m0)`.
pub fn magnetization_closed_form(q: f64, params: &CoilCoreParams) -> f64 {
    params.phase(q).tanh()
}

/// Integrates the rate law together with `dq/dt = i` from `t = 0`.
///
/// Samples are returned at every step, the last one exactly at `t_stop`.
pub fn integrate_magnetization(
    drive: &Waveform,
    params: &CoilCoreParams,
    dt: f64,
    t_stop: f64,
) -> Result<Vec<MagnetizationState>, DeviceError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(DeviceError::Domain(format!("dt must be > 0, got {dt}")));
    }
    if !(t_stop.is_finite() && t_stop >= dt) {
        return Err(DeviceError::Domain(format!(
            "t_stop must be >= dt, got {t_stop}"
        )));
    }
    let steps = step_count(t_stop, dt);
    if steps > MAX_STEPS {
        return Err(DeviceError::TooManySteps(steps));
    }
    let steps = steps as usize;
    let sw = params.sw_eff();

    let rhs = |t: f64, y: &[f64; 2]| -> Result<[f64; 2], DeviceError> {
        let i = drive.value(t);
        Ok([magnetization_rate(y[0], i, sw)?, i])
    };

    let mut out = Vec::with_capacity(steps + 1);
    let mut y = [params.m0(), 0.0];
    let mut t = 0.0;
    out.push(MagnetizationState {
        t,
        m: y[0],
        q: y[1],
    });
    for k in 0..steps {
        let t_next = if k + 1 == steps {
            t_stop
        } else {
            (k + 1) as f64 * dt
        };
        y = rk4_step(rhs, t, &y, t_next - t)?;
        t = t_next;
        out.push(MagnetizationState {
            t,
            m: y[0],
            q: y[1],
        });
    }
    Ok(out)
}

/// Switched flux `phi(q)`, anchored at `phi(0) = 0`.
pub fn flux_of_charge(q: f64, params: &CoilCoreParams) -> f64 {
    params.flux_scale() * (params.phase(q).tanh() - params.offset.tanh())
}

/// `dphi/dq = (flux_scale / sw_eff) sech^2(q / sw_eff + atanh m0)`, in ohms.
pub fn flux_slope(q: f64, params: &CoilCoreParams) -> f64 {
    let c = params.phase(q).cosh();
    params.flux_scale() / params.sw_eff() / (c * c)
}

/// Terminal voltage drop `v = (dphi/dq) i` under the passive sign convention.
pub fn element_voltage(q: f64, i: f64, params: &CoilCoreParams) -> f64 {
    flux_slope(q, params) * i
}

/// `ln cosh x` without overflow for large `|x|`.
pub fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Flux-time integral `rho` and meminductance `L` along `i = i0`.
///
/// With `q = i0 t` the time integral of `phi` becomes `(1 / i0) * integral of
/// phi dq`, so
///
/// ```text
/// rho(q) = (flux_scale / i0) [ sw_eff (ln cosh(q/sw_eff + c) - ln cosh c) - m0 q ]
/// L(q)   = phi(q) / i0
/// ```
///
/// with `c = atanh m0`, anchored at `rho(0) = 0`.
pub fn rho_and_l_constant_current(
    q: f64,
    i0: f64,
    params: &CoilCoreParams,
) -> Result<(f64, f64), DeviceError> {
    if !(i0.is_finite() && i0 > 0.0) {
        return Err(DeviceError::Domain(format!("i0 must be > 0, got {i0}")));
    }
    if !q.is_finite() {
        return Err(DeviceError::Domain(format!("q must be finite, got {q}")));
    }
    let sw = params.sw_eff();
    let c = params.integration_constant();
    let rho =
        params.flux_scale() / i0 * (sw * (ln_cosh(params.phase(q)) - ln_cosh(c)) - params.m0() * q);
    Ok((rho, flux_of_charge(q, params) / i0))
}

/// The flux-time integral in the literal printed arrangement
/// `flux_scale * ln cosh(tanh(q/sw_eff + c) - m0)`.
///
/// Only kept for side-by-side comparison with
/// [`rho_and_l_constant_current`]; its derivative is not `phi / i0`.
pub fn rho_as_printed(q: f64, params: &CoilCoreParams) -> f64 {
    params.flux_scale() * ln_cosh(params.phase(q).tanh() - params.m0())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn unit(m0: f64) -> CoilCoreParams {
        CoilCoreParams::new(1.0, 1.0, m0).unwrap()
    }

    #[test]
    fn construction_rejects_bad_constants() {
        assert_eq!(
            CoilCoreParams::new(0.0, 1.0, 0.0),
            Err(DeviceError::FluxScale(0.0))
        );
        assert!(matches!(
            CoilCoreParams::new(1.0, -1.0, 0.0),
            Err(DeviceError::SwitchingCoefficient(_))
        ));
        assert!(CoilCoreParams::new(1.0, 1.0, 1.0).is_err());
        assert!(CoilCoreParams::new(1.0, 1.0, -1.0).is_err());
        assert!(CoilCoreParams::new(1.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn integration_constant_round_trips() {
        for m0 in [-0.999999, -0.964, -0.5, 0.0, 0.3, 0.99] {
            let p = unit(m0);
            assert_abs_diff_eq!(p.integration_constant().tanh(), m0, epsilon = 1e-15);
        }
    }

    #[test]
    fn rate_examples() {
        assert_eq!(magnetization_rate(1.0, 5.0, 1.0).unwrap(), 0.0);
        assert_eq!(magnetization_rate(-1.0, 5.0, 1.0).unwrap(), 0.0);
        assert_eq!(magnetization_rate(0.0, 1.0, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            magnetization_rate(0.5, 2.0, 0.5).unwrap(),
            3.0,
            epsilon = 1e-15
        );
        assert!(magnetization_rate(f64::NAN, 1.0, 1.0).is_err());
        assert!(magnetization_rate(0.0, f64::INFINITY, 1.0).is_err());
        assert!(magnetization_rate(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(
            magnetization_closed_form(0.0, &unit(-0.964)),
            -0.964,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            magnetization_closed_form(1.0, &unit(0.0)),
            0.761_594_155_955_764_9,
            epsilon = 1e-15
        );
        assert_eq!(magnetization_closed_form(1e3, &unit(0.0)), 1.0);
    }

    #[test]
    fn zero_drive_holds_initial_state() {
        let p = unit(-0.964);
        let run = integrate_magnetization(&Waveform::Dc(0.0), &p, 1e-2, 1.0).unwrap();
        assert!(run.iter().all(|s| s.m == -0.964 && s.q == 0.0));
        assert_eq!(run.last().unwrap().t, 1.0);
    }

    #[test]
    fn constant_drive_reaches_tanh_one() {
        let run = integrate_magnetization(&Waveform::Dc(1.0), &unit(0.0), 1e-3, 1.0).unwrap();
        let last = run.last().unwrap();
        assert_eq!(last.t, 1.0);
        assert_abs_diff_eq!(last.m, 1f64.tanh(), epsilon = 1e-6);
        assert_abs_diff_eq!(last.q, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn integration_guards() {
        let p = unit(0.0);
        let dc = Waveform::Dc(1.0);
        assert!(integrate_magnetization(&dc, &p, 0.0, 1.0).is_err());
        assert!(integrate_magnetization(&dc, &p, 1.0, 0.5).is_err());
        assert!(matches!(
            integrate_magnetization(&dc, &p, 1e-9, 1.0),
            Err(DeviceError::TooManySteps(_))
        ));
    }

    #[test]
    fn flux_examples() {
        let p = unit(-0.964);
        assert_eq!(flux_of_charge(0.0, &p), 0.0);
        let expected = (2.0 + (-0.964f64).atanh()).tanh() + 0.964;
        assert_abs_diff_eq!(flux_of_charge(2.0, &p), expected, epsilon = 1e-15);
        assert_abs_diff_eq!(flux_of_charge(2.0, &p), 0.964, epsilon = 2e-3);
        assert_abs_diff_eq!(flux_of_charge(1e3, &p), 1.964, epsilon = 1e-12);
    }

    #[test]
    fn voltage_examples() {
        let p = unit(0.0);
        assert_abs_diff_eq!(element_voltage(0.0, 1.0, &p), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            element_voltage(1.0, 1.0, &p),
            1.0 - 1f64.tanh().powi(2),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            element_voltage(1.0, 1.0, &p),
            0.419_974_341_614_026,
            epsilon = 1e-12
        );
        assert!(element_voltage(50.0, 10.0, &p).abs() < 1e-30);
    }

    #[test]
    fn ln_cosh_is_stable() {
        for x in [-3.0, -0.2, 0.0, 0.7, 5.0] {
            assert_abs_diff_eq!(ln_cosh(x), f64::cosh(x).ln(), epsilon = 1e-14);
        }
        assert_abs_diff_eq!(ln_cosh(1e4), 1e4 - std::f64::consts::LN_2, epsilon = 1e-9);
    }

    #[test]
    fn rho_examples() {
        let p = unit(0.0);
        assert_eq!(
            rho_and_l_constant_current(0.0, 1.0, &p).unwrap(),
            (0.0, 0.0)
        );
        let (rho, l) = rho_and_l_constant_current(1.0, 1.0, &p).unwrap();
        assert_abs_diff_eq!(rho, 0.433_780_830_483_027, epsilon = 1e-12);
        assert_abs_diff_eq!(l, 1f64.tanh(), epsilon = 1e-15);

        let (rho, l) = rho_and_l_constant_current(40.0, 1.0, &p).unwrap();
        assert_abs_diff_eq!(rho, 40.0 - std::f64::consts::LN_2, epsilon = 1e-12);
        assert_abs_diff_eq!(l, 1.0, epsilon = 1e-15);

        assert!(rho_and_l_constant_current(1.0, 0.0, &p).is_err());
        assert!(rho_and_l_constant_current(1.0, -2.0, &p).is_err());
    }

    #[test]
    fn printed_form_differs_from_consistent_form() {
        let p = unit(-0.964);
        let q = 3.0;
        let h = 1e-4;
        let slope = (rho_as_printed(q + h, &p) - rho_as_printed(q - h, &p)) / (2.0 * h);
        let phi = flux_of_charge(q, &p);
        assert!(
            (slope - phi).abs() > 0.1,
            "printed slope {slope} vs phi {phi}"
        );
    }
}
