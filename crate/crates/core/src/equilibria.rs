//! Constant-mean-curvature profile curves of revolution (Delaunay unduloids)
//! and their resampling as periodic graph profiles.
//!
//! The undulary curve with shape parameter `B` and mean curvature `H` is
//!
//! ```text
//! x(s)   = ∫_{π/2H}^{s} (1 + B sin Ht) / sqrt(1 + B² + 2B sin Ht) dt
//! rho(s) = sqrt(1 + B² + 2B sin Hs) / H
//! ```
//!
//! and is `2π/k` periodic in `x` exactly when
//! `H = (k/π) ∫_{π/2}^{3π/2} (1 + B sin t) / sqrt(1 + B² + 2B sin t) dt`.
//!
//! The curve is symmetric about `s0 = π/2H`, where `x(s0) = 0`. Profiles are
//! presented evenly about `x = 0`: for `B > 0` the radius is maximal there,
//! for `B < 0` it is minimal (the two are half a period apart).

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{PeriodicProfile, TorusGrid};
use crate::quadrature;

/// Largest `|B|` accepted by the generators.
pub const B_MAX: f64 = 0.95;

const QUAD_TOL: f64 = 1e-13;

/// Parameters of a `2π/k`-periodic undulary curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnduloidSpec {
    pub b: f64,
    pub k: u32,
    /// Mean curvature fixed by the periodicity relation.
    pub h: f64,
}

impl UnduloidSpec {
    pub fn new(b: f64, k: u32) -> Result<Self> {
        let h = unduloid_h(b, k)?;
        Ok(Self { b, k, h })
    }

    /// Radius extremes `((1 - |B|)/H, (1 + |B|)/H)`.
    pub fn radius_range(&self) -> (f64, f64) {
        ((1.0 - self.b.abs()) / self.h, (1.0 + self.b.abs()) / self.h)
    }
}

fn check_parameters(b: f64, k: u32) -> Result<()> {
    if !b.is_finite() {
        return Err(Error::Argument(format!("B must be finite, got {b}")));
    }
    if k == 0 {
        return Err(Error::Argument("period count k must be >= 1".into()));
    }
    let class = classify_cmc(b);
    if !class.representable {
        return Err(Error::Classification {
            b,
            kind: class.kind.name(),
        });
    }
    if b.abs() > B_MAX {
        return Err(Error::UnsupportedParameter(format!(
            "|B| = {} exceeds the supported maximum {B_MAX}",
            b.abs()
        )));
    }
    Ok(())
}

/// `dx/ds` as a function of the phase `t = Hs`.
#[inline]
fn axial_speed(b: f64, sin_t: f64) -> f64 {
    (1.0 + b * sin_t) / (1.0 + b * b + 2.0 * b * sin_t).sqrt()
}

/// Mean curvature of the `2π/k`-periodic undulary curve with parameter `B`.
pub fn unduloid_h(b: f64, k: u32) -> Result<f64> {
    check_parameters(b, k)?;
    if b == 0.0 {
        return Ok(k as f64);
    }
    let half_period = quadrature::integrate(
        |t| axial_speed(b, t.sin()),
        PI / 2.0,
        1.5 * PI,
        QUAD_TOL,
    )?;
    Ok(k as f64 / PI * half_period)
}

/// Arc-length samples of one full `x`-period of the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricCurve {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
}

impl ParametricCurve {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// Samples `m + 1` points over `s ∈ [s0 - π/H, s0 + π/H]`, so that `x`
/// runs over `[-π/k, π/k]`.
pub fn unduloid_parametric(spec: &UnduloidSpec, m: usize) -> Result<ParametricCurve> {
    if m < 64 {
        return Err(Error::Argument(format!(
            "need at least 64 samples per period, got {m}"
        )));
    }
    let (b, h) = (spec.b, spec.h);
    let s0 = PI / (2.0 * h);
    let lo = s0 - PI / h;
    let ds = 2.0 * PI / h / m as f64;
    let speed = |s: f64| axial_speed(b, (h * s).sin());

    let s: Vec<f64> = (0..=m).map(|i| lo + i as f64 * ds).collect();
    let mut x = Vec::with_capacity(m + 1);
    let mut acc = -quadrature::integrate(speed, lo, s0, QUAD_TOL)?;
    x.push(acc);
    for w in s.windows(2) {
        acc += quadrature::integrate(speed, w[0], w[1], QUAD_TOL)?;
        x.push(acc);
    }
    let rho = s
        .iter()
        .map(|&s| (1.0 + b * b + 2.0 * b * (h * s).sin()).sqrt() / h)
        .collect();
    Ok(ParametricCurve { s, x, rho })
}

/// Cumulative table of `x(u) = ∫_0^u speed(s0 + v) dv` on `u ∈ [0, π/H]`,
/// the half period to the right of the symmetry point.
struct HalfPeriodTable {
    b: f64,
    h: f64,
    u: Vec<f64>,
    x: Vec<f64>,
}

impl HalfPeriodTable {
    fn new(spec: &UnduloidSpec, panels: usize) -> Self {
        let (b, h) = (spec.b, spec.h);
        let du = PI / h / panels as f64;
        let mut u = Vec::with_capacity(panels + 1);
        let mut x = Vec::with_capacity(panels + 1);
        u.push(0.0);
        x.push(0.0);
        let mut acc = 0.0;
        for i in 0..panels {
            let (a, c) = (i as f64 * du, (i + 1) as f64 * du);
            // Panels are tiny relative to the curve's scale; one K15 rule is exact to roundoff.
            acc += quadrature::gk15(&|v| Self::speed_at(b, h, v), a, c).0;
            u.push(c);
            x.push(acc);
        }
        Self { b, h, u, x }
    }

    #[inline]
    fn speed_at(b: f64, h: f64, v: f64) -> f64 {
        axial_speed(b, (h * v).cos())
    }

    fn radius(&self, u: f64) -> f64 {
        (1.0 + self.b * self.b + 2.0 * self.b * (self.h * u).cos()).sqrt() / self.h
    }

    /// Solves `x(u) = xi` for `xi ∈ [0, π/k]`; the map is strictly increasing.
    fn invert(&self, xi: f64) -> f64 {
        let last = self.x.len() - 1;
        if xi <= 0.0 {
            return 0.0;
        }
        if xi >= self.x[last] {
            return self.u[last];
        }
        let i = self.x.partition_point(|&v| v <= xi) - 1;
        let (ua, ub) = (self.u[i], self.u[i + 1]);
        let (xa, xb) = (self.x[i], self.x[i + 1]);
        let (b, h) = (self.b, self.h);
        let mut u = ua + (xi - xa) / (xb - xa) * (ub - ua);
        let (mut lo, mut hi) = (ua, ub);
        for _ in 0..60 {
            let xu = xa + quadrature::gk15(&|v| Self::speed_at(b, h, v), ua, u).0;
            let resid = xu - xi;
            if resid == 0.0 {
                break;
            }
            if resid > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let mut next = u - resid / Self::speed_at(b, h, u);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let step = (next - u).abs();
            u = next;
            if step <= 2.0 * f64::EPSILON * ub {
                break;
            }
        }
        u
    }
}

/// Even presentation of the `2π/k`-periodic unduloid sampled on `grid`.
pub fn unduloid_profile(b: f64, k: u32, grid: TorusGrid) -> Result<PeriodicProfile> {
    let spec = UnduloidSpec::new(b, k)?;
    if b == 0.0 {
        return Ok(PeriodicProfile::constant(grid, 1.0 / k as f64));
    }
    let panels = 32 * grid.len().max(64);
    let table = HalfPeriodTable::new(&spec, panels);
    let period = 2.0 * PI / k as f64;
    let n = grid.len() as i64;
    // Distance to x = 0 in index units, so that mirrored nodes agree bit for bit.
    let values: Vec<f64> = (0..n)
        .map(|j| {
            let x = 2.0 * PI * (j - n / 2).abs() as f64 / n as f64;
            let folded = (x - period * (x / period).round()).abs();
            table.radius(table.invert(folded))
        })
        .collect();
    let profile = PeriodicProfile::new(grid, values)?;
    profile.check_positive()?;
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CmcKind {
    Cylinder,
    Undulary,
    SphereChain,
    Nodary,
}

impl CmcKind {
    pub fn name(self) -> &'static str {
        match self {
            CmcKind::Cylinder => "cylinder",
            CmcKind::Undulary => "undulary",
            CmcKind::SphereChain => "sphere-chain",
            CmcKind::Nodary => "nodary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CmcClass {
    pub b: f64,
    pub kind: CmcKind,
    /// Whether the curve is the graph of a positive periodic function.
    pub representable: bool,
}

pub fn classify_cmc(b: f64) -> CmcClass {
    let a = b.abs();
    let kind = if b == 0.0 {
        CmcKind::Cylinder
    } else if a < 1.0 {
        CmcKind::Undulary
    } else if a == 1.0 {
        CmcKind::SphereChain
    } else {
        CmcKind::Nodary
    };
    CmcClass {
        b,
        kind,
        representable: a < 1.0,
    }
}
