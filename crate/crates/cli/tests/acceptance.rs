//! End-to-end acceptance checks. Each prints one `criterion N: PASS|FAIL`
//! line with the measured values; run with `--nocapture` to see them.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use floquet_core::darboux::schrodinger_residual;
use floquet_core::floquet::{solve_floquet, SolverOptions};
use floquet_core::ssfm::analytic_tracking_error;
use floquet_core::{
    darboux_potential, seed_family1, seed_family2, transmission_family1, AnalyticState, Grid1D, PotentialSpec,
    PropagationConfig, Side,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use scatter_cli::{load_config, run_command, Command, Outcome};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn report(n: u32, passed: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if passed { "PASS" } else { "FAIL" });
}

fn out_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("scatter-acceptance-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn run_preset(command: Command, preset: &str) -> Outcome {
    let (cfg, label) = load_config(Some(preset), None).unwrap();
    cfg.validate().unwrap();
    run_command(command, &cfg, &out_dir(preset), &label).unwrap()
}

fn value(o: &Outcome, name: &str) -> f64 {
    o.check(name).unwrap_or_else(|| panic!("missing check {name}")).value
}

fn family1() -> PotentialSpec {
    PotentialSpec::family1(c(0.9, 0.0), c(0.0, 0.0), 1.0).unwrap()
}

fn family2() -> PotentialSpec {
    PotentialSpec::family2(2.0, 2.0, 1.0).unwrap()
}

/// Largest open-channel amplitude other than `t₀`, and `|t₀ - reference|`,
/// over both sides.
fn suppression(spec: &PotentialSpec, e: f64, reference: Complex64) -> (f64, f64) {
    let sol = solve_floquet(spec, e, &SolverOptions::default()).unwrap();
    let mut unwanted: f64 = 0.0;
    let mut err: f64 = 0.0;
    for side in [Side::Left, Side::Right] {
        let rep = sol.reports.side(side);
        unwanted = unwanted.max(rep.max_unwanted_amplitude());
        err = err.max((rep.t0() - reference).norm()).max((rep.t0() / reference).arg().abs());
    }
    (unwanted, err)
}

#[test]
fn criterion_1_static_limit() {
    let spec = PotentialSpec::sech2(1.0).unwrap();
    let start = Instant::now();
    let (mut modulus, mut phase): (f64, f64) = (0.0, 0.0);
    for i in 0..20 {
        let e = 0.1 + (8.0 - 0.1) * i as f64 / 19.0;
        let t0 = solve_floquet(&spec, e, &SolverOptions::default()).unwrap().reports.left.t0();
        let exact = transmission_family1(e, 1.0).unwrap();
        modulus = modulus.max((t0.norm() - exact.norm()).abs());
        phase = phase.max((t0 / exact).arg().abs());
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = modulus < 1e-4 && phase < 1e-3 && secs < 10.0;
    report(1, ok, format!("modulus error {modulus:.2e}, phase error {phase:.2e} rad, {secs:.2} s"));
    assert!(ok);
}

#[test]
fn criterion_2_family1_suppression() {
    let start = Instant::now();
    let (mut unwanted, mut err): (f64, f64) = (0.0, 0.0);
    for e in [0.125, 0.5, 2.0] {
        let (u, d) = suppression(&family1(), e, transmission_family1(e, 1.0).unwrap());
        unwanted = unwanted.max(u);
        err = err.max(d);
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = unwanted < 1e-4 && err < 1e-3 && secs < 120.0;
    report(2, ok, format!("max unwanted amplitude {unwanted:.2e}, t0 error {err:.2e}, {secs:.1} s"));
    assert!(ok);
}

#[test]
fn criterion_3_family2_invisibility() {
    let (mut unwanted, mut err): (f64, f64) = (0.0, 0.0);
    for e in [0.125, 0.5, 2.0] {
        let (u, d) = suppression(&family2(), e, c(1.0, 0.0));
        unwanted = unwanted.max(u);
        err = err.max(d);
    }
    let ok = unwanted < 1e-4 && err < 1e-3;
    report(3, ok, format!("max unwanted amplitude {unwanted:.2e}, |t0 - 1| {err:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_4_packet_experiment() {
    let start = Instant::now();
    let a = run_preset(Command::Propagate, "fig3a");
    let ta = start.elapsed().as_secs_f64();
    let b = run_preset(Command::Propagate, "fig3b");
    let tb = start.elapsed().as_secs_f64() - ta;
    let reflected = value(&a, "reflected_window_fraction");
    let sidebands = value(&a, "transmitted_sideband_fraction");
    let scattered = value(&b, "scattered_fraction");
    let ok = reflected < 1e-4 && sidebands < 1e-4 && scattered > 1e-2 && ta < 300.0 && tb < 300.0;
    report(
        4,
        ok,
        format!(
            "fig3a reflected {reflected:.2e}, sidebands {sidebands:.2e} ({ta:.0} s); fig3b scattered {scattered:.3e} ({tb:.0} s)"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_5_group_delay() {
    let o = run_preset(Command::Delay, "fig5");
    let dx1 = value(&o, "family1_advancement");
    let dx2 = value(&o, "family2_displacement");
    let dev = value(&o, "family2_profile_deviation");
    let ok = (dx1 - 1.0).abs() < 0.1 && dx2 < 0.02 && dev < 1e-3;
    report(5, ok, format!("family-1 advancement {dx1:.4}, family-2 |dx| {dx2:.2e}, profile deviation {dev:.2e}"));
    assert!(ok);
}

#[test]
fn criterion_6_analytic_oracle() {
    let grid = Grid1D::symmetric(512.0, 8192).unwrap();
    let window = 150.0;
    let mut worst: f64 = 0.0;
    let mut ratio = f64::INFINITY;
    let mut parts = Vec::new();
    for (name, spec) in [("family 1", family1()), ("family 2", family2())] {
        let period = spec.period().unwrap();
        let cfg = PropagationConfig::new(grid, spec.clone(), period);
        let state = AnalyticState::for_spec(&spec, Side::Left, 1.0).unwrap();
        let coarse = analytic_tracking_error(&cfg, &state, cfg.dt, window).unwrap();
        let fine = analytic_tracking_error(&cfg, &state, 0.5 * cfg.dt, window).unwrap();
        worst = worst.max(coarse);
        ratio = ratio.min(coarse / fine);
        parts.push(format!("{name} {coarse:.2e} -> {fine:.2e}"));
    }
    let ok = worst < 1e-6 && ratio >= 3.5;
    report(6, ok, format!("{} at dt = T/1000 -> T/2000, min ratio {ratio:.2}", parts.join(", ")));
    assert!(ok);
}

#[test]
fn criterion_7_intertwining() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let seeds = [
        seed_family1(c(0.9, 0.0), c(0.0, 0.0), 1.0).unwrap(),
        seed_family1(c(0.3, 0.4), c(0.2, -0.1), 1.3).unwrap(),
        seed_family2(2.0, 2.0, 1.0).unwrap(),
    ];
    let (h, ht) = (1e-2, 1e-2);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let seed = seeds[i % seeds.len()];
        let pot = darboux_potential(seed);
        let n_waves = rng.gen_range(1..=5);
        let waves: Vec<(f64, Complex64)> = (0..n_waves)
            .map(|_| {
                let k = rng.gen_range(-2.0..2.0);
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                (k, c(a, b))
            })
            .collect();
        let psi = |x: f64, t: f64| {
            let l = seed.log_derivative(x, t);
            waves
                .iter()
                .map(|&(k, a)| a * (c(0.0, k) - l) * Complex64::from_polar(1.0, k * x - 0.5 * k * k * t))
                .sum::<Complex64>()
        };
        let x = rng.gen_range(-10.0..10.0);
        let t = rng.gen_range(0.0..4.0 * PI);
        let v = pot.value(x, t).unwrap();
        let (res, centre) = schrodinger_residual(psi, v, x, t, h, ht);
        worst = worst.max(res / (1.0 + centre.norm()));
    }
    let ok = worst < 1e-7;
    report(7, ok, format!("max residual/(1+|psi|) {worst:.2e} over 1000 samples"));
    assert!(ok);
}

#[test]
fn criterion_8_dual_oracle() {
    let o = run_preset(Command::Crossval, "crossval");
    let worst = value(&o, "max_relative_discrepancy");
    let compared = value(&o, "channels_above_threshold");
    let ok = o.passed();
    report(8, ok, format!("max relative discrepancy {worst:.3e} over {compared} channel powers above 1e-3"));
    assert!(ok);
}
