//! Uniform grid on the torus `[-π, π)` and the Fourier collocation kernel.
//!
//! Collocation values are the source of truth; Fourier coefficients are
//! computed on demand. Every derivative in the crate goes through
//! [`diff_values`], which is exact for trigonometric polynomials of degree
//! below `n/2`. Odd-order derivatives zero the Nyquist mode.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// `n` equispaced collocation nodes `x_j = -π + 2πj/n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_POINTS || !n.is_multiple_of(2) {
            return Err(Error::Argument(format!(
                "grid size must be even and >= {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        -PI + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.node(j))
    }

    /// Signed wavenumber of FFT slot `j` (the Nyquist slot reports `+n/2`).
    #[inline]
    pub fn wavenumber(&self, j: usize) -> f64 {
        wavenumber(j, self.n)
    }
}

#[inline]
pub(crate) fn wavenumber(j: usize, n: usize) -> f64 {
    if j <= n / 2 {
        j as f64
    } else {
        j as f64 - n as f64
    }
}

/// Samples of a real 2π-periodic function on a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicProfile {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl PeriodicProfile {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Argument(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some((j, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Argument(format!("non-finite sample {v} at node {j}")));
        }
        Ok(Self { grid, values })
    }

    /// Crate-internal constructor for values produced by the kernels.
    pub(crate) fn from_raw(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self { grid, values }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Fails with the first node where the profile is not strictly positive.
    pub fn check_positive(&self) -> Result<()> {
        match self.values.iter().position(|&v| !(v > 0.0)) {
            Some(node) => Err(Error::Domain {
                node,
                value: self.values[node],
            }),
            None => Ok(()),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_grid(other)?;
        Ok(Self::from_raw(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    /// `self + c`, pointwise.
    pub fn shifted(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// Largest pointwise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub(crate) fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Argument(format!(
                "grid mismatch: {} vs {} points",
                self.grid.len(),
                other.grid.len()
            )));
        }
        Ok(())
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    })
}

pub(crate) fn forward(values: &[f64]) -> Vec<Complex64> {
    let (fwd, _) = plans(values.len());
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    buf
}

/// Inverse transform including the `1/n` normalization; keeps the real part.
pub(crate) fn inverse_real(mut buf: Vec<Complex64>) -> Vec<f64> {
    let n = buf.len();
    let (_, inv) = plans(n);
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.into_iter().map(|c| c.re * scale).collect()
}

/// Fourier symbol of `∂_x^order` at slot `j`.
#[inline]
pub(crate) fn derivative_symbol(j: usize, n: usize, order: u32) -> Complex64 {
    if order == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if order % 2 == 1 && j == n / 2 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, wavenumber(j, n)).powu(order)
}

/// Spectral derivatives of several orders from a single forward transform.
pub(crate) fn diff_values_many<const M: usize>(values: &[f64], orders: [u32; M]) -> [Vec<f64>; M] {
    let n = values.len();
    let hat = forward(values);
    orders.map(|order| {
        let buf = hat
            .iter()
            .enumerate()
            .map(|(j, c)| c * derivative_symbol(j, n, order))
            .collect();
        inverse_real(buf)
    })
}

pub(crate) fn diff_values(values: &[f64], order: u32) -> Vec<f64> {
    let [d] = diff_values_many(values, [order]);
    d
}

/// Spectral derivative `∂_x^order u` for `order` in `1..=4`.
pub fn derivative(u: &PeriodicProfile, order: u32) -> Result<PeriodicProfile> {
    if !(1..=4).contains(&order) {
        return Err(Error::Argument(format!(
            "derivative order must be in 1..=4, got {order}"
        )));
    }
    Ok(PeriodicProfile::from_raw(u.grid, diff_values(&u.values, order)))
}

/// Trapezoid rule `(2π/n) Σ u(x_j)`; exact for trigonometric polynomials of degree `< n`.
pub fn integrate(u: &PeriodicProfile) -> f64 {
    u.grid.spacing() * u.values.iter().sum::<f64>()
}

/// Removes the mean: `u - (1/2π) ∫ u`.
pub fn mean_project(u: &PeriodicProfile) -> PeriodicProfile {
    let mean = u.mean();
    u.map(|v| v - mean)
}

/// Grid-aligned shift: the result samples `u(x + 2πm/n)`.
pub fn translate(u: &PeriodicProfile, m: i64) -> PeriodicProfile {
    let n = u.len();
    let shift = m.rem_euclid(n as i64) as usize;
    let mut values = u.values.clone();
    values.rotate_left(shift);
    PeriodicProfile::from_raw(u.grid, values)
}

/// Normalized Fourier coefficients `ĥ(k)` of a real profile, with
/// `u(x) = Σ ĥ(k) e^{ikx}` on the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    grid: TorusGrid,
    /// FFT slot order: `k = 0, 1, .., n/2, -(n/2 - 1), .., -1`.
    coeffs: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn from_profile(u: &PeriodicProfile) -> Self {
        let n = u.len();
        let scale = 1.0 / n as f64;
        // Nodes start at -π, so slot j carries the phase e^{-ikπ} = (-1)^j.
        let coeffs = forward(&u.values)
            .into_iter()
            .enumerate()
            .map(|(j, c)| if j % 2 == 0 { c * scale } else { -c * scale })
            .collect();
        Self { grid: u.grid, coeffs }
    }

    pub fn to_profile(&self) -> PeriodicProfile {
        let n = self.grid.len();
        let buf = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                let c = if j % 2 == 0 { c } else { -c };
                c * n as f64
            })
            .collect();
        PeriodicProfile::from_raw(self.grid, inverse_real(buf))
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// Coefficient of `e^{ikx}` for `|k| <= n/2`.
    pub fn coeff(&self, k: i64) -> Option<Complex64> {
        let n = self.grid.len() as i64;
        if k.abs() > n / 2 {
            return None;
        }
        Some(self.coeffs[k.rem_euclid(n) as usize])
    }

    /// Amplitude of the real mode `a cos(kx) + b sin(kx)`, i.e. `2|ĥ(k)|` for `0 < k < n/2`.
    pub fn mode_amplitude(&self, k: usize) -> f64 {
        let n = self.grid.len();
        match k {
            0 => self.coeffs[0].norm(),
            k if k == n / 2 => self.coeffs[k].norm(),
            k if k < n / 2 => 2.0 * self.coeffs[k].norm(),
            _ => 0.0,
        }
    }

    /// Coefficient `a_k` of `cos(kx)`.
    pub fn cosine_coefficient(&self, k: usize) -> f64 {
        let n = self.grid.len();
        match k {
            0 => self.coeffs[0].re,
            k if k == n / 2 => self.coeffs[k].re,
            k if k < n / 2 => 2.0 * self.coeffs[k].re,
            _ => 0.0,
        }
    }
}
