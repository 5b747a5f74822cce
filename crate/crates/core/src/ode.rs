//! Fixed-step classical Runge-Kutta integration.
//!
//! Every integration in the crate goes through [`rk4_step`]. The state is a
//! fixed-size array so the derivative closures stay allocation free.

/// Advances `y` from `t` to `t + h` with the classical fourth-order method.
///
/// The derivative may fail (for example when a loop denominator collapses);
/// the first error aborts the step.
pub fn rk4_step<const N: usize, E>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<[f64; N], E> {
    let half = 0.5 * h;
    let k1 = f(t, y)?;
    let k2 = f(t + half, &axpy(y, half, &k1))?;
    let k3 = f(t + half, &axpy(y, half, &k2))?;
    let k4 = f(t + h, &axpy(y, h, &k3))?;

    let mut out = *y;
    for n in 0..N {
        out[n] += h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
    }
    Ok(out)
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for n in 0..N {
        out[n] += a * k[n];
    }
    out
}

/// Number of fixed steps of size `dt` needed to reach `span`.
///
/// A trailing fragment smaller than a millionth of a step is absorbed rather
/// than producing a degenerate extra step.
pub fn step_count(span: f64, dt: f64) -> f64 {
    (span / dt - 1e-6).ceil().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn exponential_decay_is_fourth_order() {
        let f = |_t: f64, y: &[f64; 1]| Ok::<_, Infallible>([-y[0]]);
        let err = |h: f64| {
            let n = (1.0 / h).round() as usize;
            let mut y = [1.0];
            for k in 0..n {
                y = rk4_step(f, k as f64 * h, &y, h).unwrap();
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn quadrature_of_time_dependent_rate_is_exact_for_cubics() {
        // RK4 on y' = g(t) reduces to Simpson's rule.
        let f = |t: f64, _y: &[f64; 1]| Ok::<_, Infallible>([3.0 * t * t]);
        let y = rk4_step(f, 0.0, &[0.0], 2.0).unwrap();
        assert!((y[0] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn errors_propagate() {
        let f = |t: f64, _y: &[f64; 1]| if t > 0.0 { Err("boom") } else { Ok([1.0]) };
        assert_eq!(rk4_step(f, 0.0, &[0.0], 1.0), Err("boom"));
    }

    #[test]
    fn step_count_absorbs_rounding() {
        assert_eq!(step_count(0.2, 1e-5), 20000.0);
        assert_eq!(step_count(1.0, 0.3), 4.0);
        assert_eq!(step_count(1e-9, 1.0), 1.0);
    }
}
