use std::f64::consts::PI;

use floquet_core::darboux::schrodinger_residual;
use floquet_core::floquet::{solve_floquet, SolverOptions};
use floquet_core::ssfm::{analytic_tracking_error, step};
use floquet_core::{
    darboux_potential, seed_family1, seed_family2, transmission_family1, AnalyticState, Grid1D, PacketParams,
    PotentialSpec, PropagationConfig, Side, Spectral, WaveField,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn family1() -> PotentialSpec {
    PotentialSpec::family1(c(0.9, 0.0), c(0.0, 0.0), 1.0).unwrap()
}

fn family2() -> PotentialSpec {
    PotentialSpec::family2(2.0, 2.0, 1.0).unwrap()
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n).prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
}

fn packet_field(g: Grid1D, w: f64, x0: f64, p: f64) -> WaveField {
    let pk = PacketParams::new(w, x0, p).unwrap();
    WaveField::from_fn(g, 0.0, |x| pk.value(x)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_round_trip(data in complex_vec(256)) {
        let mut sp = Spectral::new(256);
        let mut work = data.clone();
        sp.forward(&mut work);
        sp.inverse(&mut work);
        for (a, b) in work.iter().zip(&data) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval(data in complex_vec(512)) {
        let g = Grid1D::symmetric(16.0, 512).unwrap();
        let f = WaveField::new(g, data, 0.0).unwrap();
        let spec = f.momentum_spectrum();
        prop_assert!((spec.total() - f.norm2()).abs() < 1e-12 * f.norm2().max(1.0));
    }

    #[test]
    fn windows_partition_the_norm(data in complex_vec(512), cut in -15.0..15.0f64) {
        let g = Grid1D::symmetric(16.0, 512).unwrap();
        let f = WaveField::new(g, data, 0.0).unwrap();
        let parts = f.windowed_norm(g.x_min(), cut) + f.windowed_norm(cut, g.x_max() + g.dx());
        prop_assert!((parts - f.norm2()).abs() < 1e-12 * f.norm2().max(1.0));
    }

    #[test]
    fn centroid_follows_a_cyclic_shift(shift in -200i64..200, x0 in -50.0..50.0f64, p in -2.0..2.0f64) {
        let g = Grid1D::symmetric(512.0, 8192).unwrap();
        let f = packet_field(g, 15.0, x0, p);
        let n = g.n_points() as i64;
        let vals = f.values();
        let shifted: Vec<Complex64> = (0..n).map(|i| vals[(i - shift).rem_euclid(n) as usize]).collect();
        let s = WaveField::new(g, shifted, 0.0).unwrap();
        let d = s.centroid().unwrap() - f.centroid().unwrap();
        prop_assert!((d - shift as f64 * g.dx()).abs() < 1e-8);
    }

    #[test]
    fn intertwining_for_plane_wave_superpositions(
        waves in prop::collection::vec((-2.0..2.0f64, -1.0..1.0f64, -1.0..1.0f64), 1..=5),
        x in -10.0..10.0f64,
        t in 0.0..12.0f64,
        which in 0usize..3,
    ) {
        let seed = [
            seed_family1(c(0.9, 0.0), c(0.0, 0.0), 1.0).unwrap(),
            seed_family1(c(0.5, 0.2), c(0.1, 0.0), 0.8).unwrap(),
            seed_family2(2.0, 2.0, 1.0).unwrap(),
        ][which];
        let v = darboux_potential(seed).value(x, t).unwrap();
        let psi = |x: f64, t: f64| {
            let l = seed.log_derivative(x, t);
            waves
                .iter()
                .map(|&(k, a, b)| c(a, b) * (c(0.0, k) - l) * Complex64::from_polar(1.0, k * x - 0.5 * k * k * t))
                .sum::<Complex64>()
        };
        let (res, centre) = schrodinger_residual(psi, v, x, t, 1e-2, 1e-2);
        prop_assert!(res < 1e-7 * (1.0 + centre.norm()), "residual {res:e}");
    }
}

#[test]
fn analytic_states_solve_the_partner_equation() {
    for spec in [family1(), family2(), PotentialSpec::sech2(1.0).unwrap()] {
        for side in [Side::Left, Side::Right] {
            let st = AnalyticState::for_spec(&spec, side, 1.3).unwrap();
            for &(x, t) in &[(-3.0, 0.2), (0.0, 1.0), (0.7, 5.5), (8.0, 11.0)] {
                let (res, centre) = schrodinger_residual(|x, t| st.value(x, t), spec.value(x, t), x, t, 1e-2, 1e-2);
                assert!(res < 1e-8 * (1.0 + centre.norm()), "residual {res:e}");
            }
        }
    }
}

#[test]
fn potentials_are_time_periodic() {
    for spec in [family1(), family2()] {
        let period = spec.period().unwrap();
        assert!((period - 4.0 * PI).abs() < 1e-15);
        for &x in &[-7.0, -0.3, 0.0, 2.5, 30.0] {
            for &t in &[0.0, 1.1, 6.0] {
                assert!((spec.value(x, t + period) - spec.value(x, t)).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn family1_imaginary_part_is_even() {
    let spec = family1();
    for &x in &[0.1, 0.8, 2.0, 5.0] {
        for &t in &[0.0, 2.0, 7.3] {
            assert!((spec.value(x, t).im - spec.value(-x, t).im).abs() < 1e-12);
        }
    }
}

#[test]
fn static_limit_matches_closed_form() {
    let spec = PotentialSpec::sech2(1.0).unwrap();
    for e in [0.2, 1.0, 5.0] {
        let t0 = solve_floquet(&spec, e, &SolverOptions::default()).unwrap().reports.left.t0();
        assert!((t0 - transmission_family1(e, 1.0).unwrap()).norm() < 1e-4);
    }
}

#[test]
fn left_right_symmetry() {
    for spec in [family1(), family2()] {
        for e in [0.25, 0.5, 2.0] {
            let sol = solve_floquet(&spec, e, &SolverOptions::default()).unwrap();
            let (l, r) = (&sol.reports.left, &sol.reports.right);
            for cl in &l.channels {
                let cr = r.channel(cl.n).unwrap();
                assert!((cl.t_power - cr.t_power).abs() < 1e-6, "E={e} n={}", cl.n);
                assert!((cl.r_power - cr.r_power).abs() < 1e-6, "E={e} n={}", cl.n);
            }
        }
    }
}

#[test]
fn hermitian_flux_is_conserved() {
    let spec = PotentialSpec::hermitian(family1());
    let sol = solve_floquet(&spec, 2.0, &SolverOptions::default()).unwrap();
    for side in [Side::Left, Side::Right] {
        assert!((sol.reports.side(side).total() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn static_step_is_unitary_and_reversible() {
    let g = Grid1D::symmetric(512.0, 8192).unwrap();
    let spec = PotentialSpec::sech2(1.0).unwrap();
    let f = packet_field(g, 15.0, -60.0, 1.0);
    let dt = 4.0 * PI / 1000.0;
    let mut out = f.clone();
    for _ in 0..50 {
        out = step(&out, &spec, dt).unwrap();
    }
    assert!((out.norm2() - f.norm2()).abs() < 1e-12 * f.norm2());
    for _ in 0..50 {
        out = step(&out, &spec, -dt).unwrap();
    }
    let back = WaveField::new(g, out.values().to_vec(), 0.0).unwrap();
    assert!(back.max_abs_diff(&f) < 1e-8);
}

#[test]
fn family2_single_step_tracks_the_analytic_state() {
    let g = Grid1D::symmetric(512.0, 8192).unwrap();
    let spec = family2();
    let dt = spec.period().unwrap() / 1000.0;
    let cfg = PropagationConfig::new(g, spec.clone(), dt);
    let state = AnalyticState::for_spec(&spec, Side::Left, 1.0).unwrap();
    let err = analytic_tracking_error(&cfg, &state, dt, 150.0).unwrap();
    assert!(err < 1e-8, "one-step error {err:e}");
}
