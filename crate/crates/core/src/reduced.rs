//! Zero-mean reduction around a reference cylinder of radius `r★`.
//!
//! A profile is split as `r = r★ + ψ(ρ̃, η)` where `ρ̃` has zero mean and the
//! lift `ψ` adds the unique constant that gives `r` the volume of the cylinder
//! of radius `r★ + η`. Since `F(ρ) = ∫ (ρ + r★)²` is quadratic and `ρ̃` has
//! zero mean, the lift is explicit:
//!
//! ```text
//! ψ(ρ̃, η) = ρ̃ + c,   c = sqrt((η + r★)² - ‖ρ̃‖²/2π) - r★.
//! ```

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{g_divergence, volume_functional};
use crate::grid::{integrate, mean_project, PeriodicProfile};

/// Zero-mean perturbation together with its volume parameter and reference radius.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedState {
    pub rho_tilde: PeriodicProfile,
    pub eta: f64,
    pub r_star: f64,
}

impl ReducedState {
    pub fn new(rho_tilde: PeriodicProfile, eta: f64, r_star: f64) -> Result<Self> {
        check_zero_mean(&rho_tilde)?;
        if !(r_star > 0.0) {
            return Err(Error::Argument(format!("r_star must be positive, got {r_star}")));
        }
        Ok(Self {
            rho_tilde,
            eta,
            r_star,
        })
    }

    /// Splits a positive profile into `(P0(r - r★), η(r) - r★)`.
    pub fn from_profile(r: &PeriodicProfile, r_star: f64) -> Result<Self> {
        r.check_positive()?;
        let eta = equivalent_cylinder_radius(r)? - r_star;
        Self::new(mean_project(r), eta, r_star)
    }

    /// The full profile `r★ + ψ(ρ̃, η)`.
    pub fn lifted_profile(&self) -> Result<PeriodicProfile> {
        Ok(lift_psi(&self.rho_tilde, self.eta, self.r_star)?.shifted(self.r_star))
    }
}

fn check_zero_mean(u: &PeriodicProfile) -> Result<()> {
    let m = integrate(u);
    if m.abs() > 1e-12 * u.norm_inf() + 1e-14 {
        return Err(Error::Argument(format!(
            "expected a zero-mean perturbation, integral is {m:e}"
        )));
    }
    Ok(())
}

/// Volume-matching lift: `ρ̃ + c` with `F★(ρ̃ + c) = F★(η)`.
pub fn lift_psi(rho_tilde: &PeriodicProfile, eta: f64, r_star: f64) -> Result<PeriodicProfile> {
    check_zero_mean(rho_tilde)?;
    let radius = eta + r_star;
    let l2 = volume_functional(rho_tilde);
    let radicand = radius * radius - l2 / (2.0 * PI);
    if !(radicand > 0.0) || radius <= 0.0 {
        return Err(Error::NoLift { radicand });
    }
    let c = radicand.sqrt() - r_star;
    Ok(rho_tilde.shifted(c))
}

/// `P0 G(r★ + ψ(ρ̃, η))`.
pub fn reduced_g(state: &ReducedState) -> Result<PeriodicProfile> {
    let r = state.lifted_profile()?;
    Ok(mean_project(&g_divergence(&r)?))
}

/// Radius of the cylinder that encloses the same volume as `r0`.
pub fn equivalent_cylinder_radius(r0: &PeriodicProfile) -> Result<f64> {
    r0.check_positive()?;
    Ok((volume_functional(r0) / (2.0 * PI)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;

    fn grid(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    #[test]
    fn lift_of_zero_is_eta() {
        let z = PeriodicProfile::zeros(grid(16));
        for eta in [-0.5, 0.0, 0.3] {
            let l = lift_psi(&z, eta, 2.0).unwrap();
            assert!(l.values().iter().all(|&v| (v - eta).abs() < 1e-15));
        }
    }

    #[test]
    fn lift_constant_matches_closed_form() {
        let g = grid(64);
        let rt = PeriodicProfile::from_fn(g, |x| 0.1 * x.cos());
        let l = lift_psi(&rt, 0.0, 2.0).unwrap();
        let c = l.values()[0] - rt.values()[0];
        assert!((c - ((4.0f64 - 0.005).sqrt() - 2.0)).abs() < 1e-15);
        assert!((c + 1.250_390_7e-3).abs() < 1e-9);
        assert!(mean_project(&l).max_abs_diff(&rt).unwrap() < 1e-15);
        let vol = volume_functional(&l.shifted(2.0));
        assert!((vol - 8.0 * PI).abs() <= 1e-12 * 4.0 * 2.0 * PI);
    }

    #[test]
    fn lift_errors() {
        let g = grid(32);
        let offset = PeriodicProfile::from_fn(g, |x| 0.1 + x.cos());
        assert!(matches!(lift_psi(&offset, 0.0, 1.0), Err(Error::Argument(_))));
        let big = PeriodicProfile::from_fn(g, |x| 3.0 * x.cos());
        assert!(matches!(lift_psi(&big, 0.0, 1.0), Err(Error::NoLift { .. })));
    }

    #[test]
    fn reduced_g_vanishes_on_cylinders() {
        let z = PeriodicProfile::zeros(grid(32));
        for (eta, rs) in [(0.0, 1.0), (0.2, 0.7), (-0.1, 3.0)] {
            let s = ReducedState::new(z.clone(), eta, rs).unwrap();
            assert!(reduced_g(&s).unwrap().norm_inf() < 1e-12);
        }
    }

    #[test]
    fn reduced_linear_response() {
        let g = grid(64);
        let eps = 1e-6;
        let rt = PeriodicProfile::from_fn(g, |x| eps * (2.0 * x).cos());
        let s = ReducedState::new(rt, 0.0, 1.0).unwrap();
        let out = reduced_g(&s).unwrap();
        assert!(integrate(&out).abs() < 1e-15);
        for (x, v) in g.nodes().zip(out.values()) {
            assert!((v + 12.0 * eps * (2.0 * x).cos()).abs() <= 1e-3 * 12.0 * eps);
        }
    }

    #[test]
    fn equivalent_radius_examples() {
        let g = grid(32);
        let r = PeriodicProfile::constant(g, 3.0);
        assert!((equivalent_cylinder_radius(&r).unwrap() - 3.0).abs() < 1e-15);
        let r = PeriodicProfile::from_fn(g, |x| 2.0 + 0.1 * x.cos());
        let eq = equivalent_cylinder_radius(&r).unwrap();
        assert!((eq - 4.005f64.sqrt()).abs() < 1e-15);
        assert!((eq - 2.001_249_6).abs() < 1e-7);
    }

    #[test]
    fn split_and_lift_round_trip() {
        let g = grid(64);
        let r = PeriodicProfile::from_fn(g, |x| 1.4 + 0.2 * x.cos() - 0.1 * (3.0 * x).sin());
        let state = ReducedState::from_profile(&r, 1.0).unwrap();
        let back = state.lifted_profile().unwrap();
        assert!(back.max_abs_diff(&r).unwrap() <= 1e-12);
    }
}
