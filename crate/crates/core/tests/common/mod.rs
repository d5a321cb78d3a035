//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson quadrature with Richardson correction.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// `(1 + B sin t) / sqrt(1 + B² + 2B sin t)`.
pub fn speed(b: f64, t: f64) -> f64 {
    (1.0 + b * t.sin()) / (1.0 + b * b + 2.0 * b * t.sin()).sqrt()
}

/// Mean curvature making the undulary curve `2π/k` periodic, by Simpson.
pub fn h_reference(b: f64, k: u32) -> f64 {
    k as f64 / PI * simpson(&|t| speed(b, t), 0.5 * PI, 1.5 * PI, 1e-14)
}

/// Equivalent cylinder radius of the unduloid from its parametrization:
/// `V = ∫ rho² dx` over one period, times `k`.
pub fn equivalent_radius_reference(b: f64, k: u32) -> f64 {
    let h = h_reference(b, k);
    let one_period = simpson(
        &|t| (1.0 + b * b + 2.0 * b * t.sin()) / (h * h) * speed(b, t) / h,
        0.0,
        2.0 * PI,
        1e-14,
    );
    (k as f64 * one_period / (2.0 * PI)).sqrt()
}

/// Radius of the unduloid at axial position `x`, by bisection on `x(t)`
/// measured from the symmetry point `t = π/2`.
pub fn unduloid_radius_reference(b: f64, k: u32, x: f64) -> f64 {
    let h = h_reference(b, k);
    let period = 2.0 * PI / k as f64;
    let xi = (x - period * (x / period).round()).abs();
    let x_of = |t: f64| simpson(&|s| speed(b, s), 0.5 * PI, t, 1e-14) / h;
    let (mut lo, mut hi) = (0.5 * PI, 1.5 * PI);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if x_of(mid) < xi {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    (1.0 + b * b + 2.0 * b * t.sin()).sqrt() / h
}
