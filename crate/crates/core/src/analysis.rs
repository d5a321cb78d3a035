//! Linear stability and bifurcation analysis.
//!
//! * analytic spectra of the linearization at cylinders,
//! * dense Jacobians of `G` in the collocation basis (central differences
//!   or complex step) and their eigenvalues,
//! * growth-rate fits on trajectories,
//! * tracing of the unduloid branches and pitchfork fits.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::TrajectoryRecord;
use crate::equilibria::unduloid_profile;
use crate::error::{Error, Result};
use crate::geometry::{g_divergence, g_operator, Field};
use crate::grid::{PeriodicProfile, SpectralCoeffs, TorusGrid};
use crate::reduced::equivalent_cylinder_radius;

/// Growth rate `k²(1/radius² - k²)` of mode `k` at the cylinder of the given radius.
#[inline]
pub fn cylinder_growth_rate(radius: f64, k: f64) -> f64 {
    k * k * (1.0 / (radius * radius) - k * k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    AnalyticCylinder,
    NumericalJacobian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumEntry {
    /// Mode index (analytic) or position in the sorted eigenvalue list (numerical).
    pub k: i64,
    pub mu_re: f64,
    pub mu_im: f64,
    pub multiplicity: usize,
}

impl SpectrumEntry {
    pub fn mu(&self) -> Complex64 {
        Complex64::new(self.mu_re, self.mu_im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub source: SpectrumSource,
    pub entries: Vec<SpectrumEntry>,
    /// Cylinder radius for analytic spectra.
    pub radius: Option<f64>,
}

impl SpectrumReport {
    /// Largest real part in the report.
    pub fn leading_real_part(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.mu_re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Eigenvalues of the linearization at the cylinder, `k = 1..=k_max`.
/// Without `reduced`, the zero eigenvalue of the constant mode is included.
pub fn cylinder_spectrum(radius: f64, k_max: usize, reduced: bool) -> Result<SpectrumReport> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Argument(format!("radius must be positive, got {radius}")));
    }
    let mut entries = Vec::with_capacity(k_max + 1);
    if !reduced {
        entries.push(SpectrumEntry {
            k: 0,
            mu_re: 0.0,
            mu_im: 0.0,
            multiplicity: 1,
        });
    }
    for k in 1..=k_max {
        entries.push(SpectrumEntry {
            k: k as i64,
            mu_re: cylinder_growth_rate(radius, k as f64),
            mu_im: 0.0,
            multiplicity: 2,
        });
    }
    Ok(SpectrumReport {
        source: SpectrumSource::AnalyticCylinder,
        entries,
        radius: Some(radius),
    })
}

/// Residual above which a profile is not accepted as an equilibrium.
pub const EQUILIBRIUM_TOL: f64 = 1e-5;

fn check_equilibrium(r: &PeriodicProfile) -> Result<()> {
    let res = g_divergence(r)?.norm_inf();
    if !(res <= EQUILIBRIUM_TOL) {
        return Err(Error::Argument(format!(
            "profile is not an approximate equilibrium: |G|∞ = {res:e}"
        )));
    }
    Ok(())
}

/// Default central-difference step `cbrt(eps) (1 + |r|∞)`.
pub fn default_jacobian_step(r: &PeriodicProfile) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + r.norm_inf())
}

/// Central-difference Jacobian of `G` at an approximate equilibrium.
///
/// Column `j` is `(G(r + h e_j) - G(r - h e_j)) / 2h`. If a perturbed profile
/// leaves the positive cone, the step is reduced tenfold once.
pub fn numerical_jacobian(r_eq: &PeriodicProfile, h: Option<f64>) -> Result<DMatrix<f64>> {
    r_eq.check_positive()?;
    check_equilibrium(r_eq)?;
    let h = h.unwrap_or_else(|| default_jacobian_step(r_eq));
    if !(h > 0.0) {
        return Err(Error::Argument(format!("step must be positive, got {h}")));
    }
    match central_difference_jacobian(r_eq, h) {
        Err(Error::Domain { .. }) => central_difference_jacobian(r_eq, 0.1 * h),
        other => other,
    }
}

fn central_difference_jacobian(r: &PeriodicProfile, h: f64) -> Result<DMatrix<f64>> {
    let n = r.len();
    let grid = r.grid();
    let columns: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut plus = r.values().to_vec();
            let mut minus = r.values().to_vec();
            plus[j] += h;
            minus[j] -= h;
            let gp = g_divergence(&PeriodicProfile::from_raw(grid, plus))?;
            let gm = g_divergence(&PeriodicProfile::from_raw(grid, minus))?;
            Ok(gp
                .values()
                .iter()
                .zip(gm.values())
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |i, j| columns[j][i]))
}

/// Jacobian of `G` by complex-step differentiation: column `j` is
/// `Im G(r + i·h e_j) / h` with `h = 1e-30`. Free of cancellation error.
pub fn complex_step_jacobian(r_eq: &PeriodicProfile) -> Result<DMatrix<f64>> {
    r_eq.check_positive()?;
    check_equilibrium(r_eq)?;
    Ok(complex_step_matrix(r_eq.values(), g_operator))
}

const COMPLEX_STEP: f64 = 1e-30;

fn complex_step_matrix(at: &[f64], f: impl Fn(&[Complex64]) -> Vec<Complex64> + Sync) -> DMatrix<f64> {
    let n = at.len();
    let columns: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut z: Vec<Complex64> = at.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            z[j].im = COMPLEX_STEP;
            f(&z).into_iter().map(|c| c.im / COMPLEX_STEP).collect()
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| columns[j][i])
}

/// Which differentiation rule builds the Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMethod {
    CentralDifference,
    ComplexStep,
}

impl std::str::FromStr for JacobianMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "central" | "central_difference" => Ok(Self::CentralDifference),
            "complex" | "complex_step" => Ok(Self::ComplexStep),
            other => Err(Error::Argument(format!("unknown jacobian method '{other}'"))),
        }
    }
}

pub fn jacobian(r_eq: &PeriodicProfile, method: JacobianMethod) -> Result<DMatrix<f64>> {
    match method {
        JacobianMethod::CentralDifference => numerical_jacobian(r_eq, None),
        JacobianMethod::ComplexStep => complex_step_jacobian(r_eq),
    }
}

/// Eigenvalues of a dense real matrix, sorted by descending real part
/// (ties broken by descending imaginary part).
pub fn eigenvalues(m: DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Argument("eigenvalues need a square matrix".into()));
    }
    let n = m.nrows();
    let schur = nalgebra::Schur::try_new(m, f64::EPSILON, 200 * n.max(10))
        .ok_or_else(|| Error::Numeric("Schur iteration did not converge".into()))?;
    let mut eig: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(eig)
}

/// Spectrum of the numerical Jacobian at an approximate equilibrium.
pub fn numerical_spectrum(r_eq: &PeriodicProfile, method: JacobianMethod) -> Result<SpectrumReport> {
    let eig = eigenvalues(jacobian(r_eq, method)?)?;
    Ok(SpectrumReport {
        source: SpectrumSource::NumericalJacobian,
        entries: eig
            .iter()
            .enumerate()
            .map(|(i, mu)| SpectrumEntry {
                k: i as i64,
                mu_re: mu.re,
                mu_im: mu.im,
                multiplicity: 1,
            })
            .collect(),
        radius: None,
    })
}

/// Largest distance between each analytic eigenvalue (repeated by its
/// multiplicity) and a distinct nearest numerical eigenvalue, assigned greedily.
pub fn match_spectrum(numerical: &[Complex64], analytic: &[(f64, usize)]) -> Result<f64> {
    let mut used = vec![false; numerical.len()];
    let mut worst: f64 = 0.0;
    for &(mu, mult) in analytic {
        for _ in 0..mult {
            let best = numerical
                .iter()
                .enumerate()
                .filter(|(i, _)| !used[*i])
                .map(|(i, z)| (i, (z - Complex64::new(mu, 0.0)).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or_else(|| Error::Argument("more analytic than numerical eigenvalues".into()))?;
            used[best.0] = true;
            worst = worst.max(best.1);
        }
    }
    Ok(worst)
}

/// Analytic multiset `{0} ∪ {μ_k × 2 : 1 <= k <= k_max}` at a cylinder.
pub fn cylinder_multiset(radius: f64, k_max: usize) -> Vec<(f64, usize)> {
    std::iter::once((0.0, 1))
        .chain((1..=k_max).map(|k| (cylinder_growth_rate(radius, k as f64), 2)))
        .collect()
}

/// Mode amplitudes above this fraction of the equivalent radius are treated
/// as outside the linear regime by [`fit_mode_rate`].
pub const LINEAR_REGIME_FRAC: f64 = 0.05;

/// Least-squares slope of `log |ĥ_k(t)|` over `t ∈ [t_a, t_b]`.
pub fn fit_mode_rate(traj: &TrajectoryRecord, k: usize, window: (f64, f64)) -> Result<f64> {
    let (t_a, t_b) = window;
    if k == 0 || k > traj.mode_amps.len() {
        return Err(Error::Argument(format!("mode {k} is not tracked")));
    }
    let amps = &traj.mode_amps[k - 1];
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (i, &t) in traj.times.iter().enumerate() {
        if t < t_a || t > t_b {
            continue;
        }
        let a = amps[i];
        if !(a > 0.0) {
            return Err(Error::Argument(format!("mode {k} amplitude vanishes at t = {t}")));
        }
        let radius = (traj.volume[i] / (2.0 * PI)).sqrt();
        if 2.0 * a > LINEAR_REGIME_FRAC * radius {
            return Err(Error::Argument(format!(
                "mode {k} amplitude {:e} at t = {t} is outside the linear regime",
                2.0 * a
            )));
        }
        ts.push(t);
        logs.push(a.ln());
    }
    if ts.len() < 5 {
        return Err(Error::Argument(format!(
            "need at least 5 samples in [{t_a}, {t_b}], found {}",
            ts.len()
        )));
    }
    let m = ts.len() as f64;
    let tm = ts.iter().sum::<f64>() / m;
    let lm = logs.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, l) in ts.iter().zip(&logs) {
        sxy += (t - tm) * (l - lm);
        sxx += (t - tm) * (t - tm);
    }
    if sxx == 0.0 {
        return Err(Error::Argument("window has no time extent".into()));
    }
    Ok(sxy / sxx)
}

/// One point on the `2π/ℓ`-periodic unduloid branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchSample {
    pub b: f64,
    /// `1 / equivalent_cylinder_radius`.
    pub lambda: f64,
    /// Coefficient of `cos(ℓx)` in the zero-mean part.
    pub amplitude: f64,
    /// `|G|∞` at the sample.
    pub residual: f64,
    /// Largest real part of the Jacobian spectrum.
    pub leading_mu: f64,
}

/// Builds the branch sample for one value of `B`.
pub fn branch_sample(l: u32, b: f64, grid: TorusGrid) -> Result<BranchSample> {
    let profile = unduloid_profile(b, l, grid)?;
    let lambda = 1.0 / equivalent_cylinder_radius(&profile)?;
    let amplitude = SpectralCoeffs::from_profile(&profile).cosine_coefficient(l as usize);
    let residual = g_divergence(&profile)?.norm_inf();
    let leading_mu = eigenvalues(complex_step_jacobian(&profile)?)?
        .first()
        .map_or(f64::NAN, |z| z.re);
    Ok(BranchSample {
        b,
        lambda,
        amplitude,
        residual,
        leading_mu,
    })
}

/// Samples the branch bifurcating from the cylinder of radius `1/ℓ`,
/// parametrized by the unduloid shape parameter.
pub fn trace_branch(l: u32, b_grid: &[f64], n: usize) -> Result<Vec<BranchSample>> {
    if l == 0 {
        return Err(Error::Argument("branch index must be >= 1".into()));
    }
    if let Some(b) = b_grid.iter().find(|b| !(b.abs() <= 0.5)) {
        return Err(Error::Argument(format!("B = {b} outside [-0.5, 0.5]")));
    }
    if !b_grid.contains(&0.0) {
        return Err(Error::Argument("B grid must include 0".into()));
    }
    let grid = TorusGrid::new(n)?;
    b_grid
        .par_iter()
        .map(|&b| branch_sample(l, b, grid))
        .collect()
}

/// Taylor coefficients of `λ(s)` at `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PitchforkFit {
    pub lambda0: f64,
    pub dlambda: f64,
    pub d2lambda: f64,
    /// Polynomial degree used for the fit.
    pub degree: usize,
    /// Root-mean-square residual of the fit.
    pub rms: f64,
}

/// Default polynomial degree for [`fit_pitchfork`]. A pure quadratic leaves an
/// `O(s⁴)` bias in `λ0` that exceeds `1e-6` already at `|B| = 0.1`.
pub const PITCHFORK_DEGREE: usize = 4;

/// Least-squares fit of `λ` against the amplitude `s`; the degree is
/// `min(4, samples - 1)`.
pub fn fit_pitchfork(samples: &[BranchSample]) -> Result<PitchforkFit> {
    let degree = PITCHFORK_DEGREE.min(samples.len().saturating_sub(1));
    fit_pitchfork_with_degree(samples, degree)
}

pub fn fit_pitchfork_with_degree(samples: &[BranchSample], degree: usize) -> Result<PitchforkFit> {
    if samples.len() < 5 {
        return Err(Error::Argument(format!(
            "need at least 5 branch samples, got {}",
            samples.len()
        )));
    }
    if !(2..samples.len()).contains(&degree) {
        return Err(Error::Argument(format!(
            "degree must lie in 2..{}, got {degree}",
            samples.len()
        )));
    }
    for s in samples {
        let mirrored = samples.iter().any(|o| (o.b + s.b).abs() <= 1e-12);
        if !mirrored {
            return Err(Error::Argument(format!("B = {} has no mirrored sample", s.b)));
        }
    }
    let s: Vec<f64> = samples.iter().map(|x| x.amplitude).collect();
    let y: Vec<f64> = samples.iter().map(|x| x.lambda).collect();
    let coeffs = polyfit(&s, &y, degree)?;
    let rms = (s
        .iter()
        .zip(&y)
        .map(|(&si, &yi)| (polyval(&coeffs, si) - yi).powi(2))
        .sum::<f64>()
        / s.len() as f64)
        .sqrt();
    Ok(PitchforkFit {
        lambda0: coeffs[0],
        dlambda: coeffs[1],
        d2lambda: 2.0 * coeffs[2],
        degree,
        rms,
    })
}

fn polyval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Least-squares polynomial coefficients (ascending powers) via SVD of the
/// column-scaled Vandermonde matrix.
fn polyfit(x: &[f64], y: &[f64], degree: usize) -> Result<Vec<f64>> {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(scale > 0.0) {
        return Err(Error::Argument("degenerate fit: all amplitudes vanish".into()));
    }
    let a = DMatrix::from_fn(x.len(), degree + 1, |i, p| (x[i] / scale).powi(p as i32));
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax) {
        return Err(Error::Argument("degenerate fit matrix".into()));
    }
    let sol = svd
        .solve(&DVector::from_column_slice(y), 0.0)
        .map_err(|e| Error::Numeric(e.to_string()))?;
    Ok((0..=degree).map(|p| sol[p] / scale.powi(p as i32)).collect())
}

/// Reduced Fourier symbol `M_k(λ) = k²(λ² - k²)`.
#[inline]
pub fn reduced_symbol(lambda: f64, k: u32) -> f64 {
    let k = k as f64;
    k * k * (lambda * lambda - k * k)
}

/// A sign change of `M_k` between two consecutive scan points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymbolCrossing {
    pub k: u32,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Root of `M_k` refined by bisection inside the bracket.
    pub lambda_root: f64,
}

/// Scans `λ = lo, lo + step, ...` up to `hi` for sign changes of `M_k`, `1 <= k <= k_max`.
pub fn bifurcation_scan(lo: f64, hi: f64, step: f64, k_max: u32) -> Result<Vec<SymbolCrossing>> {
    if !(step > 0.0 && hi > lo && lo > 0.0) {
        return Err(Error::Argument("scan needs 0 < lo < hi and step > 0".into()));
    }
    let count = ((hi - lo) / step).floor() as usize;
    let lambdas: Vec<f64> = (0..=count).map(|i| lo + i as f64 * step).collect();
    let mut out = Vec::new();
    for k in 1..=k_max {
        for w in lambdas.windows(2) {
            let (a, b) = (reduced_symbol(w[0], k), reduced_symbol(w[1], k));
            let crosses = (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0);
            if !crosses {
                continue;
            }
            let (mut l, mut h) = (w[0], w[1]);
            for _ in 0..200 {
                let mid = 0.5 * (l + h);
                if mid <= l || mid >= h {
                    break;
                }
                if reduced_symbol(mid, k).signum() == a.signum() {
                    l = mid;
                } else {
                    h = mid;
                }
            }
            out.push(SymbolCrossing {
                k,
                lambda_lo: w[0],
                lambda_hi: w[1],
                lambda_root: 0.5 * (l + h),
            });
        }
    }
    Ok(out)
}

/// Reduced operator `P0 G(r★ + ψ(ρ̃, η))` over a generic scalar, with the
/// target radius `r★ + η` given directly.
fn reduced_operator<T: Field>(rho_tilde: &[T], radius: f64) -> Vec<T> {
    let n = rho_tilde.len();
    let inv_n = T::real(1.0 / n as f64);
    let mean = rho_tilde.iter().fold(T::real(0.0), |acc, &v| acc + v) * inv_n;
    let centered: Vec<T> = rho_tilde.iter().map(|&v| v - mean).collect();
    let sq = centered.iter().fold(T::real(0.0), |acc, &v| acc + v * v) * inv_n;
    let shift = (T::real(radius * radius) - sq).sqrt();
    let lifted: Vec<T> = centered.iter().map(|&v| v + shift).collect();
    let g = g_operator(&lifted);
    let gmean = g.iter().fold(T::real(0.0), |acc, &v| acc + v) * inv_n;
    g.into_iter().map(|v| v - gmean).collect()
}

/// Outcome of [`polish_equilibrium`].
#[derive(Debug, Clone, PartialEq)]
pub struct Polished {
    pub profile: PeriodicProfile,
    pub residual_before: f64,
    pub residual_after: f64,
    pub iterations: usize,
}

/// Newton iteration on the reduced operator at fixed volume, starting from
/// an approximate equilibrium. The Jacobian is singular along translations,
/// so each update is the minimum-norm least-squares step.
pub fn polish_equilibrium(r: &PeriodicProfile, max_iter: usize) -> Result<Polished> {
    r.check_positive()?;
    let radius = equivalent_cylinder_radius(r)?;
    let grid = r.grid();
    let mean = r.mean();
    let mut x: Vec<f64> = r.values().iter().map(|v| v - mean).collect();
    let residual = |x: &[f64]| -> Result<f64> {
        let p = PeriodicProfile::from_raw(grid, lift_values(x, radius)?);
        Ok(g_divergence(&p)?.norm_inf())
    };
    let before = residual(&x)?;
    let mut best = before;
    let mut iterations = 0;
    for _ in 0..max_iter {
        let f = reduced_operator(&x, radius);
        let jac = complex_step_matrix(&x, |z| reduced_operator(z, radius));
        let svd = jac.svd(true, true);
        let tol = 1e-10 * svd.singular_values.max();
        let step = svd
            .solve(&DVector::from_vec(f), tol)
            .map_err(|e| Error::Numeric(e.to_string()))?;
        let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a - d).collect();
        let res = residual(&trial)?;
        if !(res < best) {
            break;
        }
        best = res;
        x = trial;
        iterations += 1;
    }
    let profile = PeriodicProfile::from_raw(grid, lift_values(&x, radius)?);
    Ok(Polished {
        profile,
        residual_before: before,
        residual_after: best,
        iterations,
    })
}

fn lift_values(rho_tilde: &[f64], radius: f64) -> Result<Vec<f64>> {
    let n = rho_tilde.len() as f64;
    let mean = rho_tilde.iter().sum::<f64>() / n;
    let sq = rho_tilde.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let radicand = radius * radius - sq;
    if !(radicand > 0.0) {
        return Err(Error::NoLift { radicand });
    }
    let c = radicand.sqrt();
    Ok(rho_tilde.iter().map(|v| v - mean + c).collect())
}
