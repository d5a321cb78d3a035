//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any criterion fails.

use std::process::ExitCode;

use asdflow::analysis::{
    bifurcation_scan, complex_step_jacobian, cylinder_multiset, eigenvalues, fit_mode_rate,
    fit_pitchfork, match_spectrum, numerical_jacobian, trace_branch,
};
use asdflow::dynamics::{simulate, SimConfig, Termination, TrajectoryRecord};
use asdflow::equilibria::unduloid_profile;
use asdflow::geometry::{g_divergence, g_quasilinear};
use asdflow::grid::{derivative, PeriodicProfile, TorusGrid};
use asdflow::io::to_json_string;
use asdflow::reduced::equivalent_cylinder_radius;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const SEED: u64 = 20_240_611;
const N: usize = 256;

struct Outcome {
    pass: bool,
    detail: String,
    report: Value,
}

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n).unwrap()
}

fn cylinder_kernel() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [32, 128] {
        for i in 0..20 {
            // Log-spaced radii over [0.1, 10].
            let c = 0.1 * 100f64.powf(i as f64 / 19.0);
            let g = g_divergence(&PeriodicProfile::constant(grid(n), c)).unwrap();
            worst = worst.max(g.norm_inf());
        }
    }
    Outcome {
        pass: worst <= 1e-11,
        detail: format!("max |G(c)| = {worst:.3e} (tol 1e-11)"),
        report: json!({ "max_residual": worst }),
    }
}

fn quasilinear_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let base = rng.random_range(0.6..3.0);
        let coeffs: Vec<(f64, f64)> = (0..4)
            .map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let r = PeriodicProfile::from_fn(grid(128), |x| {
            base * (1.0
                + coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, (a, c))| {
                        let k = (i + 1) as f64;
                        0.15 / k.powi(3) * (a * (k * x).cos() + c * (k * x).sin())
                    })
                    .sum::<f64>())
        });
        let div = g_divergence(&r).unwrap();
        let ql = g_quasilinear(&r).unwrap();
        let scale = 1.0 + derivative(&r, 4).unwrap().norm_inf();
        worst = worst.max(div.max_abs_diff(&ql).unwrap() / scale);
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("max scaled gap = {worst:.3e} over 50 profiles (tol 1e-8)"),
        report: json!({ "max_scaled_gap": worst }),
    }
}

fn spectrum_oracle() -> Outcome {
    let mut central: f64 = 0.0;
    let mut complex: f64 = 0.0;
    for radius in [0.5, 1.0, 2.0] {
        let p16 = PeriodicProfile::constant(grid(16), radius);
        let eig = eigenvalues(numerical_jacobian(&p16, None).unwrap()).unwrap();
        central = central.max(match_spectrum(&eig, &cylinder_multiset(radius, 4)).unwrap());
        let p64 = PeriodicProfile::constant(grid(64), radius);
        let eig = eigenvalues(complex_step_jacobian(&p64).unwrap()).unwrap();
        complex = complex.max(match_spectrum(&eig, &cylinder_multiset(radius, 16)).unwrap());
    }
    Outcome {
        pass: central <= 1e-6 && complex <= 1e-6,
        detail: format!(
            "max mismatch: central differences n=16 {central:.3e}, complex step n=64 {complex:.3e} (tol 1e-6)"
        ),
        report: json!({ "central_n16": central, "complex_n64": complex }),
    }
}

fn decay_run() -> TrajectoryRecord {
    let r0 = PeriodicProfile::from_fn(grid(N), |x| 2.0 + 0.01 * x.cos());
    let cfg = SimConfig {
        n: N,
        t_end: 8.0,
        snapshot_every: 200,
        ..SimConfig::default()
    };
    simulate(&r0, &cfg).unwrap()
}

fn growth_run() -> TrajectoryRecord {
    let r0 = PeriodicProfile::from_fn(grid(N), |x| 0.5 + 0.01 * x.cos());
    let cfg = SimConfig {
        n: N,
        t_end: 2.0,
        snapshot_every: 200,
        ..SimConfig::default()
    };
    simulate(&r0, &cfg).unwrap()
}

fn stability_rate(traj: &TrajectoryRecord) -> Outcome {
    let rate = fit_mode_rate(traj, 1, (0.0, 8.0)).unwrap();
    let r0 = PeriodicProfile::from_fn(grid(N), |x| 2.0 + 0.01 * x.cos());
    let target = equivalent_cylinder_radius(&r0).unwrap();
    let last = traj.final_profile().unwrap();
    let dist = last.values().iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
    let rel = (rate + 0.75).abs() / 0.75;
    Outcome {
        pass: traj.termination == Termination::ReachedTEnd && rel <= 0.05 && dist <= 1e-4,
        detail: format!(
            "rate = {rate:.6} (target -0.75, rel err {rel:.2e}); terminal distance to cylinder {target:.9} = {dist:.3e}"
        ),
        report: json!({ "rate": rate, "terminal_distance": dist, "steps": traj.accepted_steps }),
    }
}

fn instability_rate(traj: &TrajectoryRecord) -> Outcome {
    let rate = fit_mode_rate(traj, 1, (0.0, 0.2)).unwrap();
    let rel = (rate - 3.0).abs() / 3.0;
    let start = traj.times.partition_point(|&t| t < 0.2);
    let monotone = traj.min_r[start..].windows(2).all(|w| w[1] < w[0]);
    let pinched = traj.termination == Termination::PinchDetected;
    let final_min = traj.min_r.last().copied().unwrap_or(f64::NAN);
    Outcome {
        pass: rel <= 0.05 && monotone && pinched,
        detail: format!(
            "rate = {rate:.6} (target 3, rel err {rel:.2e}); min r monotone after t=0.2: {monotone}; {} at t = {:.4}, min r = {final_min:.4}",
            traj.termination.as_str(),
            traj.times.last().unwrap()
        ),
        report: json!({
            "rate": rate,
            "monotone": monotone,
            "termination": traj.termination.as_str(),
            "pinch_time": traj.times.last(),
        }),
    }
}

fn conservation(runs: &[&TrajectoryRecord]) -> Outcome {
    let mut drift: f64 = 0.0;
    let mut rise = f64::NEG_INFINITY;
    for traj in runs {
        drift = drift.max(traj.max_volume_drift());
        let a0 = traj.area[0];
        for w in traj.area.windows(2) {
            rise = rise.max((w[1] - w[0]) / a0);
        }
    }
    Outcome {
        pass: drift <= 1e-7 && rise <= 1e-9,
        detail: format!(
            "max relative volume drift = {drift:.3e} (tol 1e-7); max relative area increase per step = {rise:.3e} (slack 1e-9)"
        ),
        report: json!({ "volume_drift": drift, "area_rise": rise }),
    }
}

fn equilibrium_residual() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in [1, 2] {
        for b in [0.1, -0.1, 0.2, -0.2, 0.3, -0.3] {
            let p = unduloid_profile(b, k, grid(N)).unwrap();
            worst = worst.max(g_divergence(&p).unwrap().norm_inf());
        }
    }
    Outcome {
        pass: worst <= 1e-6,
        detail: format!("max |G(unduloid)| = {worst:.3e} at n = {N} (tol 1e-6)"),
        report: json!({ "max_residual": worst }),
    }
}

fn pitchfork() -> Outcome {
    let b_grid = [0.0, 0.05, -0.05, 0.1, -0.1];
    let mut pass = true;
    let mut details = Vec::new();
    let mut fits = Vec::new();
    for l in [1u32, 2] {
        let fit = fit_pitchfork(&trace_branch(l, &b_grid, 128).unwrap()).unwrap();
        let ok = (fit.lambda0 - l as f64).abs() <= 1e-6 && fit.dlambda.abs() <= 1e-4 && fit.d2lambda < 0.0;
        pass &= ok;
        details.push(format!(
            "l={l}: lambda0-l = {:.2e}, lambda' = {:.2e}, lambda'' = {:.4}",
            fit.lambda0 - l as f64,
            fit.dlambda,
            fit.d2lambda
        ));
        fits.push(fit);
    }
    let crossings = bifurcation_scan(0.1, 3.5, 0.01, 6).unwrap();
    let off_integer = crossings
        .iter()
        .filter(|c| (c.lambda_root - c.lambda_root.round()).abs() > 1e-9)
        .count();
    pass &= off_integer == 0;
    details.push(format!(
        "scan: {} crossings, {off_integer} at non-integer lambda",
        crossings.len()
    ));
    Outcome {
        pass,
        detail: details.join("; "),
        report: json!({ "fits": fits, "crossings": crossings }),
    }
}

fn unduloid_instability() -> Outcome {
    let mut leading = Vec::new();
    for b in [0.05, 0.1, 0.2] {
        let p = unduloid_profile(b, 1, grid(64)).unwrap();
        let eig = eigenvalues(complex_step_jacobian(&p).unwrap()).unwrap();
        leading.push(eig[0].re);
    }
    Outcome {
        pass: leading.iter().all(|&mu| mu > 0.0),
        detail: format!(
            "leading Re mu at B = 0.05, 0.1, 0.2: {:.5}, {:.5}, {:.5}",
            leading[0], leading[1], leading[2]
        ),
        report: json!({ "leading": leading }),
    }
}

fn run_suite() -> Vec<(&'static str, Outcome)> {
    let decay = decay_run();
    let growth = growth_run();
    vec![
        ("cylinder kernel", cylinder_kernel()),
        ("quasilinear consistency", quasilinear_consistency()),
        ("spectrum oracle", spectrum_oracle()),
        ("stability rate", stability_rate(&decay)),
        ("instability rate", instability_rate(&growth)),
        ("conservation and area decrease", conservation(&[&decay, &growth])),
        ("equilibrium residual", equilibrium_residual()),
        ("pitchfork certification", pitchfork()),
        ("unduloid instability", unduloid_instability()),
    ]
}

fn report_bytes(results: &[(&'static str, Outcome)]) -> String {
    let all: Vec<Value> = results
        .iter()
        .map(|(name, o)| json!({ "name": name, "pass": o.pass, "report": o.report }))
        .collect();
    to_json_string(&all).unwrap()
}

fn main() -> ExitCode {
    let first = run_suite();
    let second = run_suite();
    let (a, b) = (report_bytes(&first), report_bytes(&second));
    let deterministic = a == b;

    let mut all_pass = true;
    for (i, (name, o)) in first.iter().enumerate() {
        all_pass &= o.pass;
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    all_pass &= deterministic;
    println!(
        "criterion 10 {} determinism: repeated suite reports identical = {deterministic} ({} bytes)",
        if deterministic { "PASS" } else { "FAIL" },
        a.len()
    );
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
