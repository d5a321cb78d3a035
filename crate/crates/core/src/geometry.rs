//! Pointwise geometry of the surface of revolution generated by a profile `r`
//! and the surface diffusion operator
//!
//! ```text
//! G(r) = (1/r) ∂x[ r / sqrt(1 + r_x²) · ∂x H(r) ],   H = κ1 + κ2,
//! ```
//!
//! in divergence form and in the quasilinear split `G(r) = -A(r) r + f(r)`.
//!
//! The coefficient of `∂x³` in `A` is
//! `2 r_x (1 + r_x² - 5 r r_xx) / (r (1 + r_x²)³)`. Expanding the divergence
//! form symbolically gives the factor 5; the variant with factor 3 disagrees by
//! `-4 r_x r_xx / (1 + r_x²)³` and fails the consistency check in the tests.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{diff_values, diff_values_many, integrate, PeriodicProfile};

/// Scalars the operator `G` can be evaluated over. `Complex64` is used for
/// complex-step Jacobians, so differentiation must act on real and
/// imaginary parts separately.
pub(crate) trait Field:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn real(v: f64) -> Self;
    fn sqrt(self) -> Self;
    fn diff_pair(values: &[Self], orders: [u32; 2]) -> [Vec<Self>; 2];
    fn diff(values: &[Self], order: u32) -> Vec<Self>;
}

impl Field for f64 {
    #[inline]
    fn real(v: f64) -> Self {
        v
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn diff_pair(values: &[Self], orders: [u32; 2]) -> [Vec<Self>; 2] {
        diff_values_many(values, orders)
    }
    fn diff(values: &[Self], order: u32) -> Vec<Self> {
        diff_values(values, order)
    }
}

impl Field for Complex64 {
    #[inline]
    fn real(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    #[inline]
    fn sqrt(self) -> Self {
        Complex64::sqrt(self)
    }
    fn diff_pair(values: &[Self], orders: [u32; 2]) -> [Vec<Self>; 2] {
        let re: Vec<f64> = values.iter().map(|c| c.re).collect();
        let im: Vec<f64> = values.iter().map(|c| c.im).collect();
        let dre = diff_values_many(&re, orders);
        let dim = diff_values_many(&im, orders);
        let join = |a: &[f64], b: &[f64]| -> Vec<Complex64> {
            a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect()
        };
        [join(&dre[0], &dim[0]), join(&dre[1], &dim[1])]
    }
    fn diff(values: &[Self], order: u32) -> Vec<Self> {
        let re: Vec<f64> = values.iter().map(|c| c.re).collect();
        let im: Vec<f64> = values.iter().map(|c| c.im).collect();
        diff_values(&re, order)
            .into_iter()
            .zip(diff_values(&im, order))
            .map(|(x, y)| Complex64::new(x, y))
            .collect()
    }
}

/// Divergence-form `G` on raw samples, no positivity check.
pub(crate) fn g_operator<T: Field>(r: &[T]) -> Vec<T> {
    let one = T::real(1.0);
    let [rx, rxx] = T::diff_pair(r, [1, 2]);
    let mut mean_curv = Vec::with_capacity(r.len());
    let mut mobility = Vec::with_capacity(r.len());
    for ((&r, &rx), &rxx) in r.iter().zip(&rx).zip(&rxx) {
        let slope = (one + rx * rx).sqrt();
        mean_curv.push(one / (r * slope) - rxx / (slope * slope * slope));
        mobility.push(r / slope);
    }
    let hx = T::diff(&mean_curv, 1);
    let flux: Vec<T> = mobility.iter().zip(&hx).map(|(&m, &h)| m * h).collect();
    T::diff(&flux, 1)
        .into_iter()
        .zip(r)
        .map(|(d, &r)| d / r)
        .collect()
}

/// Principal curvatures of `Γ(r)` sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureFields {
    /// Azimuthal curvature `1 / (r sqrt(1 + r_x²))`.
    pub kappa1: PeriodicProfile,
    /// Axial curvature `-r_xx / (1 + r_x²)^{3/2}`.
    pub kappa2: PeriodicProfile,
    /// Mean curvature `κ1 + κ2`.
    pub mean: PeriodicProfile,
}

pub fn curvatures(r: &PeriodicProfile) -> Result<CurvatureFields> {
    r.check_positive()?;
    let grid = r.grid();
    let [rx, rxx] = diff_values_many(r.values(), [1, 2]);
    let n = r.len();
    let (mut k1, mut k2, mut h) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for j in 0..n {
        let slope = (1.0 + rx[j] * rx[j]).sqrt();
        let a = 1.0 / (r.values()[j] * slope);
        let b = -rxx[j] / (slope * slope * slope);
        k1.push(a);
        k2.push(b);
        h.push(a + b);
    }
    Ok(CurvatureFields {
        kappa1: PeriodicProfile::from_raw(grid, k1),
        kappa2: PeriodicProfile::from_raw(grid, k2),
        mean: PeriodicProfile::from_raw(grid, h),
    })
}

pub fn mean_curvature(r: &PeriodicProfile) -> Result<PeriodicProfile> {
    curvatures(r).map(|c| c.mean)
}

/// `∫ r sqrt(1 + r_x²) dx`; the lateral area of `Γ(r)` divided by 2π.
pub fn surface_area(r: &PeriodicProfile) -> Result<f64> {
    r.check_positive()?;
    let rx = diff_values(r.values(), 1);
    let density = r
        .values()
        .iter()
        .zip(&rx)
        .map(|(&r, &rx)| r * (1.0 + rx * rx).sqrt())
        .collect();
    Ok(integrate(&PeriodicProfile::from_raw(r.grid(), density)))
}

/// `∫ r² dx`, the enclosed volume divided by π.
pub fn volume_functional(r: &PeriodicProfile) -> f64 {
    r.grid().spacing() * r.values().iter().map(|v| v * v).sum::<f64>()
}

/// Axisymmetric Laplace–Beltrami operator applied to a θ-independent field `u`.
pub fn laplace_beltrami(r: &PeriodicProfile, u: &PeriodicProfile) -> Result<PeriodicProfile> {
    r.check_positive()?;
    r.ensure_same_grid(u)?;
    let rx = diff_values(r.values(), 1);
    let ux = diff_values(u.values(), 1);
    let slopes: Vec<f64> = rx.iter().map(|v| (1.0 + v * v).sqrt()).collect();
    let flux: Vec<f64> = (0..r.len())
        .map(|j| r.values()[j] / slopes[j] * ux[j])
        .collect();
    let dflux = diff_values(&flux, 1);
    let out = (0..r.len())
        .map(|j| dflux[j] / (r.values()[j] * slopes[j]))
        .collect();
    Ok(PeriodicProfile::from_raw(r.grid(), out))
}

/// The surface diffusion operator in divergence form.
pub fn g_divergence(r: &PeriodicProfile) -> Result<PeriodicProfile> {
    r.check_positive()?;
    Ok(PeriodicProfile::from_raw(r.grid(), g_operator(r.values())))
}

/// Variable coefficients of the quasilinear split `G(r) = -(b4 ∂x⁴ + b3 ∂x³) r + f(r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasilinearCoeffs {
    pub b4: PeriodicProfile,
    pub b3: PeriodicProfile,
    pub fval: PeriodicProfile,
}

pub fn quasilinear_coeffs(r: &PeriodicProfile) -> Result<QuasilinearCoeffs> {
    r.check_positive()?;
    let [rx, rxx] = diff_values_many(r.values(), [1, 2]);
    let n = r.len();
    let (mut b4, mut b3, mut fv) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for j in 0..n {
        let (p, p1, p2) = (r.values()[j], rx[j], rxx[j]);
        let q = 1.0 + p1 * p1;
        let q2 = q * q;
        let q3 = q2 * q;
        b4.push(1.0 / q2);
        b3.push(2.0 * p1 * (q - 5.0 * p * p2) / (p * q3));
        fv.push(
            (p1 * p1 - 1.0) / (p * p * q2) * p2
                + (6.0 * p1 * p1 - 1.0) / (p * q3) * p2 * p2
                + (3.0 - 15.0 * p1 * p1) / (q2 * q2) * p2 * p2 * p2
                + p1 * p1 / (p * p * p * q),
        );
    }
    let grid = r.grid();
    Ok(QuasilinearCoeffs {
        b4: PeriodicProfile::from_raw(grid, b4),
        b3: PeriodicProfile::from_raw(grid, b3),
        fval: PeriodicProfile::from_raw(grid, fv),
    })
}

/// `-A(r) r + f(r)` assembled from [`quasilinear_coeffs`].
pub fn g_quasilinear(r: &PeriodicProfile) -> Result<PeriodicProfile> {
    let c = quasilinear_coeffs(r)?;
    let [r3, r4] = diff_values_many(r.values(), [3, 4]);
    let out = (0..r.len())
        .map(|j| -(c.b4.values()[j] * r4[j] + c.b3.values()[j] * r3[j]) + c.fval.values()[j])
        .collect();
    Ok(PeriodicProfile::from_raw(r.grid(), out))
}

/// `V = r_t / sqrt(1 + r_x²)`.
pub fn normal_velocity(r: &PeriodicProfile, r_t: &PeriodicProfile) -> Result<PeriodicProfile> {
    r.check_positive()?;
    r.ensure_same_grid(r_t)?;
    let rx = diff_values(r.values(), 1);
    let out = r_t
        .values()
        .iter()
        .zip(&rx)
        .map(|(&v, &s)| v / (1.0 + s * s).sqrt())
        .collect();
    Ok(PeriodicProfile::from_raw(r.grid(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::grid::{derivative, translate, TorusGrid};
    use std::f64::consts::PI;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    #[test]
    fn cylinder_curvatures() {
        let r = PeriodicProfile::constant(grid(32), 2.0);
        let c = curvatures(&r).unwrap();
        assert!(c.kappa1.values().iter().all(|&v| (v - 0.5).abs() < 1e-15));
        assert!(c.kappa2.norm_inf() < 1e-15);
        assert!(c.mean.values().iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn curvatures_at_crest() {
        let g = grid(64);
        let r = PeriodicProfile::from_fn(g, |x| 1.0 + 0.2 * x.cos());
        let c = curvatures(&r).unwrap();
        let j = 32; // x = 0
        assert_eq!(g.node(j), 0.0);
        assert!((c.kappa1.values()[j] - 1.0 / 1.2).abs() < 1e-13);
        assert!((c.kappa2.values()[j] - 0.2).abs() < 1e-13);
        assert!((c.mean.values()[j] - (0.2 + 1.0 / 1.2)).abs() < 1e-13);
        for j in 0..64 {
            let s = c.kappa1.values()[j] + c.kappa2.values()[j];
            assert!((c.mean.values()[j] - s).abs() <= 1e-12 * s.abs());
        }
    }

    #[test]
    fn non_positive_profile_is_a_domain_error() {
        let r = PeriodicProfile::from_fn(grid(16), |x| 0.5 + x.cos());
        assert!(matches!(g_divergence(&r), Err(Error::Domain { .. })));
        assert!(matches!(surface_area(&r), Err(Error::Domain { .. })));
        assert!(matches!(curvatures(&r), Err(Error::Domain { .. })));
        // volume needs no positivity
        assert!(volume_functional(&r).is_finite());
    }

    #[test]
    fn area_and_volume_of_cylinders() {
        let g = grid(32);
        let one = PeriodicProfile::constant(g, 1.0);
        assert!((surface_area(&one).unwrap() - 2.0 * PI).abs() < 1e-14);
        let r = PeriodicProfile::constant(g, 3.5);
        assert!((surface_area(&r).unwrap() - 7.0 * PI).abs() < 1e-13);
        let two = PeriodicProfile::constant(g, 2.0);
        assert!((volume_functional(&two) - 8.0 * PI).abs() < 1e-13);
        assert_eq!(volume_functional(&PeriodicProfile::zeros(g)), 0.0);
        let r = PeriodicProfile::from_fn(g, |x| 2.0 + 0.1 * x.cos());
        assert!((volume_functional(&r) - 8.01 * PI).abs() < 1e-13);
    }

    #[test]
    fn laplace_beltrami_on_cylinder_is_second_derivative() {
        let g = grid(64);
        let r = PeriodicProfile::constant(g, 1.7);
        let c = PeriodicProfile::constant(g, 4.0);
        assert!(laplace_beltrami(&r, &c).unwrap().norm_inf() < 1e-13);
        for k in 1..5 {
            let u = PeriodicProfile::from_fn(g, |x| (k as f64 * x).cos());
            let lu = laplace_beltrami(&r, &u).unwrap();
            let expect = u.map(|v| -((k * k) as f64) * v);
            assert!(lu.max_abs_diff(&expect).unwrap() < 1e-11);
        }
    }

    #[test]
    fn cylinder_kernel() {
        for n in [32, 64, 128] {
            for i in 0..20 {
                let c = 0.1 + i as f64 * (9.9 / 19.0);
                let r = PeriodicProfile::constant(grid(n), c);
                assert!(g_divergence(&r).unwrap().norm_inf() <= 1e-11);
            }
        }
    }

    #[test]
    fn quasilinear_coeffs_of_constant() {
        let q = quasilinear_coeffs(&PeriodicProfile::constant(grid(16), 3.0)).unwrap();
        assert!(q.b4.values().iter().all(|&v| v == 1.0));
        assert!(q.b3.norm_inf() == 0.0);
        assert!(q.fval.norm_inf() == 0.0);
    }

    #[test]
    fn quasilinear_coeffs_at_quarter_period() {
        let g = grid(64);
        let r = PeriodicProfile::from_fn(g, |x| 1.0 + 0.3 * x.cos());
        let q = quasilinear_coeffs(&r).unwrap();
        let j = 48; // x = π/2
        assert!((g.node(j) - PI / 2.0).abs() < 1e-15);
        assert!((q.b4.values()[j] - 1.0 / (1.09f64 * 1.09)).abs() < 1e-13);
        assert!((q.b3.values()[j] + 0.6 / (1.09f64 * 1.09)).abs() < 1e-13);
        assert!(q.b4.values().iter().all(|&v| v > 0.0 && v <= 1.0));
    }

    #[test]
    fn divergence_and_quasilinear_forms_agree() {
        let g = grid(128);
        let r = PeriodicProfile::from_fn(g, |x| {
            1.0 + 0.3 * x.cos() + 0.1 * (2.0 * x).sin() - 0.05 * (3.0 * x).cos()
        });
        let div = g_divergence(&r).unwrap();
        let ql = g_quasilinear(&r).unwrap();
        let scale = derivative(&r, 4).unwrap().norm_inf();
        assert!(div.max_abs_diff(&ql).unwrap() <= 1e-8 * (1.0 + scale));
    }

    #[test]
    fn factor_three_variant_is_inconsistent() {
        // Swapping 5 for 3 in b3 shifts it by -4 r_x r_xx / (1 + r_x²)³.
        let g = grid(128);
        let r = PeriodicProfile::from_fn(g, |x| 1.0 + 0.3 * x.cos());
        let div = g_divergence(&r).unwrap();
        let ql = g_quasilinear(&r).unwrap();
        let [rx, rxx] = diff_values_many(r.values(), [1, 2]);
        let r3 = diff_values(r.values(), 3);
        let gap = (0..128)
            .map(|j| {
                let q = 1.0 + rx[j] * rx[j];
                (4.0 * rx[j] * rxx[j] / (q * q * q) * r3[j]).abs()
            })
            .fold(0.0, f64::max);
        assert!(div.max_abs_diff(&ql).unwrap() < 1e-10);
        assert!(gap > 1e-3);
    }

    #[test]
    fn velocity_identity() {
        let g = grid(128);
        let r = PeriodicProfile::from_fn(g, |x| 1.0 + 0.2 * x.cos());
        let gr = g_divergence(&r).unwrap();
        let v = normal_velocity(&r, &gr).unwrap();
        let lb = laplace_beltrami(&r, &mean_curvature(&r).unwrap()).unwrap();
        assert!(v.max_abs_diff(&lb).unwrap() <= 1e-9 * (1.0 + lb.norm_inf()));
    }

    #[test]
    fn normal_velocity_examples() {
        let g = grid(16);
        let r = PeriodicProfile::constant(g, 1.3);
        let zero = PeriodicProfile::zeros(g);
        assert_eq!(normal_velocity(&r, &zero).unwrap().norm_inf(), 0.0);
        let v = PeriodicProfile::constant(g, 0.7);
        assert!(normal_velocity(&r, &v).unwrap().max_abs_diff(&v).unwrap() < 1e-15);
    }

    #[test]
    fn linear_response_at_unit_cylinder() {
        let g = grid(64);
        let eps = 1e-6;
        let r = PeriodicProfile::from_fn(g, |x| 1.0 + eps * (2.0 * x).cos());
        let gr = g_divergence(&r).unwrap();
        for (x, v) in g.nodes().zip(gr.values()) {
            let expect = -12.0 * eps * (2.0 * x).cos();
            assert!((v - expect).abs() <= 1e-4 * 12.0 * eps);
        }
    }

    #[test]
    fn translation_equivariance_and_parity() {
        let g = grid(64);
        let r = PeriodicProfile::from_fn(g, |x| 1.2 + 0.2 * x.cos() + 0.1 * (2.0 * x).sin());
        let gr = g_divergence(&r).unwrap();
        for m in [1, 5, 17, 40] {
            let lhs = g_divergence(&translate(&r, m)).unwrap();
            let rhs = translate(&gr, m);
            let err = lhs.max_abs_diff(&rhs).unwrap();
            assert!(err < 1e-10 * (1.0 + gr.norm_inf()), "{err:e}");
        }
        let even = PeriodicProfile::from_fn(g, |x| 1.0 + 0.3 * x.cos() + 0.05 * (3.0 * x).cos());
        let ge = g_divergence(&even).unwrap();
        for j in 1..64 {
            let a = ge.values()[j];
            let b = ge.values()[64 - j];
            assert!((a - b).abs() < 1e-11 * (1.0 + ge.norm_inf()));
        }
    }

    #[test]
    fn complex_path_matches_real_path() {
        let g = grid(32);
        let r = PeriodicProfile::from_fn(g, |x| 1.0 + 0.25 * x.cos());
        let real = g_operator(r.values());
        let cplx: Vec<Complex64> = r.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let out = g_operator(&cplx);
        for (a, b) in real.iter().zip(&out) {
            assert!((a - b.re).abs() < 1e-13);
            assert!(b.im.abs() == 0.0);
        }
    }
}
