//! Device laws checked against independently written closed forms and
//! quadratures.

use std::f64::consts::PI;
use std::time::Instant;

use meminductor::device::{
    flux_of_charge, flux_slope, integrate_magnetization, rho_and_l_constant_current, CoilCoreParams,
};
use meminductor::waveform::Waveform;

const M0: f64 = -0.964;

fn params() -> CoilCoreParams {
    CoilCoreParams::new(1.0, 1.0, M0).unwrap()
}

/// `m(q) = tanh(q / sw + atanh m0)`, written out from scratch.
fn m_oracle(q: f64, sw: f64, m0: f64) -> f64 {
    let c = 0.5 * ((1.0 + m0) / (1.0 - m0)).ln();
    (q / sw + c).tanh()
}

#[test]
fn sine_drive_matches_closed_form() {
    let start = Instant::now();
    let f = 10.0;
    let run = integrate_magnetization(&Waveform::sine(1.0, f), &params(), 1e-4, 0.5).unwrap();
    let mut worst: f64 = 0.0;
    for s in &run {
        let q = (1.0 - (2.0 * PI * f * s.t).cos()) / (2.0 * PI * f);
        worst = worst.max((s.m - m_oracle(q, 1.0, M0)).abs());
        assert!((s.q - q).abs() < 1e-9);
    }
    assert!(worst <= 1e-6, "max |dm| = {worst:e}");
    assert!(start.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn flux_slope_matches_finite_difference() {
    let p = CoilCoreParams::new(2e-3, 0.5, M0).unwrap();
    let h = 1e-5;
    for k in 0..=100 {
        let q = -2.0 + 0.06 * k as f64;
        let fd = (flux_of_charge(q + h, &p) - flux_of_charge(q - h, &p)) / (2.0 * h);
        let slope = flux_slope(q, &p);
        assert!(
            (fd - slope).abs() <= 1e-7 * (2e-3 / 0.5),
            "q {q}: {fd} vs {slope}"
        );
    }
}

#[test]
fn rho_is_an_ideal_constitutive_curve() {
    let p = params();
    let i0 = 1.0;
    let qs: Vec<f64> = (0..=1000).map(|k| 0.01 * k as f64).collect();
    let rho: Vec<f64> = qs
        .iter()
        .map(|&q| rho_and_l_constant_current(q, i0, &p).unwrap().0)
        .collect();

    assert_eq!(rho[0], 0.0);
    assert!(
        rho.windows(2).all(|w| w[1] > w[0]),
        "rho not strictly increasing"
    );

    // d rho / dq = phi / i0
    let h = 1e-4;
    for &q in qs.iter().skip(10) {
        let r = |x: f64| rho_and_l_constant_current(x, i0, &p).unwrap().0;
        let fd = (r(q + h) - r(q - h)) / (2.0 * h);
        let phi = (m_oracle(q, 1.0, M0) - M0) / i0;
        assert!((fd / phi - 1.0).abs() <= 1e-6, "q {q}: {fd} vs {phi}");
    }

    // a straight line cannot describe it
    let n = qs.len() as f64;
    let (mq, mr) = (qs.iter().sum::<f64>() / n, rho.iter().sum::<f64>() / n);
    let sqr: f64 = qs.iter().zip(&rho).map(|(q, r)| (q - mq) * (r - mr)).sum();
    let sqq: f64 = qs.iter().map(|q| (q - mq).powi(2)).sum();
    let slope = sqr / sqq;
    let worst = qs
        .iter()
        .zip(&rho)
        .map(|(q, r)| (r - (mr + slope * (q - mq))).abs())
        .fold(0.0, f64::max);
    assert!(worst > 1e-2 * rho[rho.len() - 1], "affine residual {worst}");
}

/// Composite Simpson over equally spaced samples (even interval count).
fn simpson(y: &[f64], h: f64) -> f64 {
    let n = y.len() - 1;
    assert!(n.is_multiple_of(2));
    let mut s = y[0] + y[n];
    for (k, v) in y.iter().enumerate().take(n).skip(1) {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * v;
    }
    s * h / 3.0
}

#[test]
fn rho_matches_double_integration_of_a_simulated_drive() {
    let p = CoilCoreParams::new(1e-3, 0.2, M0).unwrap();
    let i0 = 0.5;
    let dt = 1e-3;
    for t_end in [0.2, 1.0, 4.0, 20.0] {
        // q = integral of i and m come from the simulator; rho = integral of phi
        let run = integrate_magnetization(&Waveform::Dc(i0), &p, dt, t_end).unwrap();
        let phi: Vec<f64> = run.iter().map(|s| 1e-3 * (s.m - M0)).collect();
        let rho_sim = simpson(&phi, dt);
        let q = run.last().unwrap().q;
        let (rho, l) = rho_and_l_constant_current(q, i0, &p).unwrap();
        assert!(
            (rho_sim / rho - 1.0).abs() <= 1e-5,
            "t {t_end}: {rho_sim} vs {rho}"
        );
        assert!((l - phi[phi.len() - 1] / i0).abs() <= 1e-9);
    }
}
