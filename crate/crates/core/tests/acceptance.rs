//! End-to-end acceptance run: one PASS/FAIL line per criterion, then a single assertion.

use exsc::cli::verify;
use exsc::duhamel::{ode_residual, phi, phi_dirichlet, DuhamelOptions, Forcing, TimeGrid};
use exsc::equations::{ground_state_value, ground_state_w, harmonic_map_sphere_chart, semilinear_power};
use exsc::null_condition::{null_decay_probe, BilinearFormField};
use exsc::solver::{
    radial_ode_oracle, solve, solve_dirichlet, solve_scatter, solve_scatter_refined, solve_zero, Matching, SolveConfig,
    SolveMode,
};
use exsc::sphere_spectral::{SpectralField, SphereBasis};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn duhamel_closed_form() -> Outcome {
    let start = Instant::now();
    let worst = verify::duhamel_closed_form(8).unwrap();
    let elapsed = start.elapsed();
    outcome(worst <= 1e-8 && elapsed < Duration::from_secs(10), format!("max rel err {worst:.2e} (≤ 1e-8), {elapsed:.2?} (< 10 s)"))
}

fn ode_residual_order() -> Outcome {
    let opts = DuhamelOptions::default();
    let mut worst = 0.0f64;
    let mut ratios = vec![];
    for d in [2, 3] {
        let basis = SphereBasis::new(d, 4, 2).unwrap();
        let field = SpectralField::random(&basis, 1, 0, 4, 1.0, 11);
        let mut res = vec![];
        for dt in [0.02, 0.01, 0.005] {
            let grid = TimeGrid::new(0.0, 20.0, dt).unwrap();
            let f = Forcing::separable(&field, &grid, |t| (-6.5 * t).exp() + 0.3 * (-7.0 * t).exp());
            let (traj, _) = phi(&f, &opts).unwrap();
            res.push(ode_residual(&traj, &f, d as f64 / 2.0 + 1.6).unwrap());
            let (dir, _, _) = phi_dirichlet(&f, &opts).unwrap();
            res.push(ode_residual(&dir, &f, d as f64 / 2.0 + 1.6).unwrap());
        }
        // res = [Φ(h), Φᴰ(h), Φ(h/2), Φᴰ(h/2), Φ(h/4), Φᴰ(h/4)]
        for k in 0..4 {
            let r = res[k] / res[k + 2];
            worst = worst.max((r / 4.0 - 1.0).abs());
            ratios.push(r);
        }
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    outcome(worst <= 0.15, format!("halving ratios in [{lo:.3}, {hi:.3}] (4 ± 15%)"))
}

fn ground_state() -> Outcome {
    let start = Instant::now();
    let lambda = 100.0;
    let basis = SphereBasis::new(3, 4, 4).unwrap();
    let gs = ground_state_w(lambda).unwrap();
    let norm = (4.0 * PI).sqrt();
    let trace = SpectralField::mode(&basis, 0, 0, gs.trace * norm).unwrap();
    let spec = semilinear_power(3, 5, -1.0).unwrap().spec;
    let cfg = SolveConfig { mode: SolveMode::Dirichlet, ..SolveConfig::for_dimension(3) };
    let sol = solve_dirichlet(&trace, &spec, &cfg).unwrap();
    let grid = sol.trajectory.grid();
    let mut radii = vec![];
    let mut u = vec![];
    for k in 0..grid.len() {
        let t = grid.t(k);
        let r = sol.frame.radius_at(t);
        if r > 20.0 {
            break;
        }
        radii.push(r);
        u.push(sol.trajectory.node_v(k)[0] / norm * sol.frame.amplitude_factor(t));
    }
    let exact = radii.iter().zip(&u).map(|(r, u)| (u - ground_state_value(lambda, *r)).abs() / ground_state_value(lambda, *r));
    let err_exact = exact.fold(0.0, f64::max);
    let oracle = radial_ode_oracle(3, 5, -1.0, gs.trace, Matching::Asymptotic { r_max: 1e4 }, &radii).unwrap();
    let err_oracle = oracle.u.iter().zip(&u).map(|(o, u)| (u - o).abs() / o.abs()).fold(0.0, f64::max);
    let elapsed = start.elapsed();
    outcome(
        err_exact <= 1e-6 && err_oracle <= 1e-7 && elapsed < Duration::from_secs(120),
        format!("vs W: {err_exact:.2e} (≤ 1e-6), vs radial ODE: {err_oracle:.2e} (≤ 1e-7), {elapsed:.2?}"),
    )
}

fn scatter_slope(d: usize, lmax: usize, p: u32, kappa: f64, amp: f64) -> f64 {
    let basis = SphereBasis::new(d, lmax, 4).unwrap();
    let spec = semilinear_power(d, p, kappa).unwrap().spec;
    let u0 = SpectralField::random(&basis, 1, 0, 3, amp, 7);
    let sol = solve_scatter(&u0, &spec, &SolveConfig::for_dimension(d)).unwrap();
    sol.report.fit.expect("decay fit").slope
}

fn critical_rate() -> Outcome {
    let slope = scatter_slope(3, 8, 5, -1.0, 0.5);
    outcome(within(slope, -2.0, 0.25), format!("d=3 p=5 slope {slope:.4} (−2 ± 0.25)"))
}

fn supercritical_rate() -> Outcome {
    let slope = scatter_slope(3, 8, 7, 1.0, 0.5);
    let radii: Vec<f64> = (0..=40).map(|i| 10f64.powf(i as f64 / 20.0)).collect();
    let prof = radial_ode_oracle(4, 3, 1.0, 0.1, Matching::Asymptotic { r_max: 1e3 }, &radii).unwrap();
    let samples: Vec<(f64, f64)> =
        prof.radii.iter().zip(&prof.u).map(|(r, u)| (*r, r * r * (u - prof.c / (r * r)).abs())).collect();
    let radial = exsc::cli::fit::fit_rate(&samples, (2.0, 100.0), exsc::cli::fit::Abscissa::LogRadius).unwrap().slope;
    outcome(
        within(slope, -4.0, 0.3) && within(radial, -2.0, 0.2),
        format!("d=3 p=7 slope {slope:.4} (−4 ± 0.3); radial d=4 p=3 slope {radial:.4} (−2 ± 0.2)"),
    )
}

fn null_gain() -> Outcome {
    let b = SphereBasis::new(2, 8, 4).unwrap();
    let u0 = SpectralField::mode(&b, 1, 1, 1.0).unwrap().add(&SpectralField::mode(&b, 3, -3, 0.5).unwrap()).unwrap();
    let v0 = SpectralField::mode(&b, 1, -1, 1.0).unwrap().add(&SpectralField::mode(&b, 2, 2, 0.3).unwrap()).unwrap();
    let slope = |a: &BilinearFormField| null_decay_probe(&u0, &v0, a, 2.6, (0.5, 5.0), 40).unwrap().fit.slope;
    let i = slope(&BilinearFormField::identity());
    let j = slope(&BilinearFormField::symplectic());
    let c = slope(&BilinearFormField::constant_real([[1.0, 0.0], [0.0, 0.0]]));
    outcome(
        within(i, -2.0, 0.05) && within(j, -2.0, 0.05) && within(c, 0.0, 0.05),
        format!("I {i:.4}, J {j:.4} (−2 ± 0.05); diag(1,0) {c:.4} (0 ± 0.05)"),
    )
}

fn harmonic_map_2d() -> Outcome {
    let pre = harmonic_map_sphere_chart(2, vec![0.0, 0.0, 1.0]).unwrap();
    let basis = SphereBasis::new(2, 12, 4).unwrap();
    let u0 = SpectralField::random(&basis, pre.spec.ncomp(), 1, 3, 0.1, 7);
    let sol = solve_scatter(&u0, &pre.spec, &SolveConfig::for_dimension(2)).unwrap();
    let slope = sol.report.fit.unwrap().slope;
    outcome(within(slope, -2.0, 0.3), format!("tangential slope {slope:.4} (−2 ± 0.3)"))
}

fn harmonic_map_3d() -> Outcome {
    let pre = harmonic_map_sphere_chart(3, vec![0.0, 0.0, 1.0]).unwrap();
    let cfg = SolveConfig::for_dimension(3);
    let basis = SphereBasis::new(3, 8, 4).unwrap();
    let u0 = SpectralField::random(&basis, pre.spec.ncomp(), 0, 3, 0.1, 7);
    let tangential = solve_scatter(&u0, &pre.spec, &cfg).unwrap().report.fit.unwrap().slope;
    // The first-iterate subtraction leaves an error ~r^{-4}; at lmax = 8 the e^{λ_ℓ t}-weighted
    // high modes sit on the double-precision floor, so the refined run uses the data's own band.
    let basis = SphereBasis::new(3, 3, 4).unwrap();
    let u0 = SpectralField::random(&basis, pre.spec.ncomp(), 0, 3, 0.1, 7);
    let refined = solve_scatter_refined(&u0, &pre.spec, &cfg).unwrap().report.refined_fit.unwrap().slope;
    outcome(
        within(tangential, -2.0, 0.3) && within(refined, -4.0, 0.5),
        format!("tangential {tangential:.4} (−2 ± 0.3), first-iterate subtracted {refined:.4} (−4 ± 0.5)"),
    )
}

fn round_trip() -> Outcome {
    let p5 = semilinear_power(3, 5, -1.0).unwrap().spec;
    let p3 = semilinear_power(3, 3, 1.0).unwrap().spec;
    let basis = SphereBasis::new(3, 6, 4).unwrap();
    let (mut traj_err, mut vp_err) = (0.0f64, 0.0f64);
    for zero in [false, true] {
        let spec = if zero { &p3 } else { &p5 };
        for seed in 0..10 {
            let u0 = SpectralField::random(&basis, 1, 0, 3, 0.2, seed);
            let mut cfg = SolveConfig::for_dimension(3);
            let a = if zero { solve_zero(&u0, spec, &cfg) } else { solve_scatter(&u0, spec, &cfg) }.unwrap();
            let trace = a.trajectory.v_field(0).scale(cfg.r0.powf(-0.5));
            cfg.mode = if zero { SolveMode::ZeroDirichlet } else { SolveMode::Dirichlet };
            let b = solve(&trace, spec, &cfg).unwrap();
            let diff = b.trajectory.sub(&a.trajectory).unwrap();
            traj_err = traj_err.max(diff.v().iter().chain(diff.dv()).fold(0.0, |m, x| m.max(x.abs())));
            vp_err = vp_err.max(b.v_plus.unwrap().sub(&u0).unwrap().max_abs());
        }
    }
    outcome(
        traj_err <= 1e-7 && vp_err <= 1e-6,
        format!("20 runs: trajectory {traj_err:.2e} (≤ 1e-7), v₊ {vp_err:.2e} (≤ 1e-6)"),
    )
}

fn structural_suites() -> Outcome {
    let checks = verify::run_all(0).unwrap();
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let basis = SphereBasis::new(3, 6, 4).unwrap();
    let u0 = SpectralField::mode(&basis, 1, 1, 0.1).unwrap();
    let spec = semilinear_power(3, 2, 1.0).unwrap().spec;
    let slope = solve_zero(&u0, &spec, &SolveConfig::for_dimension(3)).unwrap().report.fit.unwrap().slope;
    outcome(
        failed.is_empty() && within(slope, 2.0, 0.2),
        format!("{} checks, failed {:?}; solve_zero slope {slope:.4} (2 ± 0.2)", checks.len(), failed),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("duhamel closed form", duhamel_closed_form),
        ("ode residual second order", ode_residual_order),
        ("ground state", ground_state),
        ("critical semilinear rate", critical_rate),
        ("supercritical rate", supercritical_rate),
        ("null gain", null_gain),
        ("2d harmonic map", harmonic_map_2d),
        ("3d harmonic map", harmonic_map_3d),
        ("scattering/dirichlet round trip", round_trip),
        ("structural suites", structural_suites),
    ];
    let mut failures = vec![];
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        println!("{} {:>2} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.passed {
            failures.push(i + 1);
        }
    }
    assert!(failures.is_empty(), "failing criteria: {failures:?}");
}
