//! Property tests for invariants that must hold over the parameter space.

use std::f64::consts::TAU;

use num_complex::Complex64;
use optokerr::model::{rabi_from_power, thermal_occupancy};
use optokerr::response::{linear_response, sideband_residual, ProbeResponse, ResponseOptions};
use optokerr::stability::{characteristic_coefficients, classify, drift_matrix};
use optokerr::steadystate::{quintic_coefficients, steady_photon_numbers, steady_states};
use optokerr::sweep::{linspace, power_sweep};
use optokerr::{DriveParams, SystemParams};
use proptest::prelude::*;

const HBAR: f64 = 1.054_571_817e-34;

#[derive(Debug, Clone, Copy)]
struct Point {
    sys: SystemParams,
    delta_a: f64,
    eps_c: f64,
}

fn log_range(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

prop_compose! {
    fn device()(
        omega_m in (1e6..2e7).prop_map(|f: f64| TAU * f),
        g0 in log_range(10.0, 2000.0),
        g_ck_rel in prop_oneof![Just(0.0), log_range(1e-5, 1e-2)],
        kappa in log_range(1e4, 1e6).prop_map(|f| TAU * f),
        gamma in log_range(1.0, 1e6),
    ) -> SystemParams {
        SystemParams::new(TAU * 1.3e9, omega_m, g0, g0 * g_ck_rel, kappa, gamma).unwrap()
    }
}

prop_compose! {
    fn operating_point()(
        sys in device(),
        detuning in -0.5..1.5f64,
        power in log_range(1e-13, 5e-8),
    ) -> Point {
        let delta_a = detuning * sys.omega_m();
        let eps_c = (2.0 * sys.kappa() * power / (HBAR * (sys.omega_a() - delta_a))).sqrt();
        Point { sys, delta_a, eps_c }
    }
}

/// (γ² + Ω_m²)² · (x[κ² + Δ²] − ε_c²) with |B₀|² and Δ written out, plus the
/// magnitude of its unsigned terms for a relative comparison.
fn direct_form(x: f64, p: &Point) -> (f64, f64) {
    let s = &p.sys;
    let om = s.omega_m() - s.g_ck() * x;
    let den = s.gamma().powi(2) + om * om;
    // Δ·den = Δ_a den − g_ck g0² x² − 2 g0² x Ω_m
    let num = p.delta_a * den - s.g_ck() * s.g0().powi(2) * x * x - 2.0 * s.g0().powi(2) * x * om;
    let lhs = x * (s.kappa().powi(2) * den * den + num * num);
    let rhs = p.eps_c * p.eps_c * den * den;
    // rounding in either form scales with the unsigned terms
    let om_abs = s.omega_m() + s.g_ck() * x;
    let den_abs = s.gamma().powi(2) + om_abs * om_abs;
    let num_abs = p.delta_a.abs() * den_abs + s.g_ck() * s.g0().powi(2) * x * x + 2.0 * s.g0().powi(2) * x * om_abs;
    let scale = x * (s.kappa().powi(2) * den_abs * den_abs + num_abs * num_abs) + p.eps_c * p.eps_c * den_abs * den_abs;
    (lhs - rhs, scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rabi_squared_is_linear_in_power(p in log_range(1e-15, 1e-5), k in log_range(1e3, 1e7)) {
        let w = TAU * 1.3e9;
        let e1 = rabi_from_power(p, k, w).unwrap();
        let e10 = rabi_from_power(10.0 * p, k, w).unwrap();
        prop_assert!(((e10 * e10) / (e1 * e1) - 10.0).abs() < 1e-12 * 10.0);
    }

    #[test]
    fn occupancy_grows_with_temperature(t in log_range(1e-4, 1e3)) {
        let w = TAU * 6.3e6;
        prop_assert!(thermal_occupancy(w, 2.0 * t).unwrap() > thermal_occupancy(w, t).unwrap());
    }

    #[test]
    fn constructors_reject_non_finite(bad in prop_oneof![Just(f64::NAN), Just(f64::INFINITY), Just(f64::NEG_INFINITY)], slot in 0usize..6) {
        let mut v = [TAU * 1.3e9, TAU * 6.3e6, 250.0, 0.25, TAU * 1e5, 40.0];
        v[slot] = bad;
        prop_assert!(SystemParams::new(v[0], v[1], v[2], v[3], v[4], v[5]).is_err());
        prop_assert!(DriveParams::new(bad, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn polynomial_matches_physical_equation(p in operating_point(), u in 0.0..3.0f64) {
        let x = u * if p.sys.g_ck() > 0.0 { p.sys.omega_m() / p.sys.g_ck() } else { p.eps_c.powi(2) / p.sys.kappa().powi(2) };
        let coeffs = quintic_coefficients(&p.sys, p.delta_a, p.eps_c).unwrap();
        let (direct, scale) = direct_form(x, &p);
        let value = coeffs.eval_physical(x);
        prop_assert!((value - direct).abs() <= 1e-10 * scale, "{value:e} vs {direct:e} (scale {scale:e})");
    }

    #[test]
    fn roots_are_positive_validated_and_odd_in_number(p in operating_point()) {
        let roots = steady_photon_numbers(&p.sys, p.delta_a, p.eps_c).unwrap();
        let marginal = roots.iter().any(|r| r.marginal);
        prop_assert!(marginal || roots.len() % 2 == 1, "{} roots", roots.len());
        let bound = if p.sys.g_ck() > 0.0 { 5 } else { 3 };
        prop_assert!(roots.len() <= bound);
        let coeffs = quintic_coefficients(&p.sys, p.delta_a, p.eps_c).unwrap();
        for w in roots.windows(2) {
            prop_assert!(w[0].x < w[1].x);
        }
        for r in &roots {
            prop_assert!(r.x > 0.0);
            prop_assert!(coeffs.relative_residual(r.x) < 1e-9);
        }
    }

    #[test]
    fn steady_states_close_on_themselves(p in operating_point()) {
        for ss in steady_states(&p.sys, p.delta_a, p.eps_c).unwrap() {
            let (rb, ra) = ss.closure_residuals(&p.sys, p.delta_a, p.eps_c);
            prop_assert!(rb < 1e-12, "B closure {rb:e}");
            prop_assert!(ra < 1e-12, "A closure {ra:e}");
        }
    }

    #[test]
    fn drift_matrix_structure(p in operating_point()) {
        let kg = p.sys.kappa() + p.sys.gamma();
        for ss in steady_states(&p.sys, p.delta_a, p.eps_c).unwrap() {
            let c = drift_matrix(&ss, &p.sys);
            prop_assert!(c.conjugate_structure_residual() < 1e-12);
            let coeffs = characteristic_coefficients(&c).unwrap();
            prop_assert!((coeffs.c3 - 2.0 * kg).abs() <= 1e-10 * 2.0 * kg);
            // elementary symmetric functions of the eigenvalues
            let l = c.eigenvalues().unwrap();
            let e1: Complex64 = l.iter().sum();
            let mut e2 = Complex64::from(0.0);
            let mut e3 = Complex64::from(0.0);
            for i in 0..4 {
                for j in i + 1..4 {
                    e2 += l[i] * l[j];
                    for k in j + 1..4 {
                        e3 += l[i] * l[j] * l[k];
                    }
                }
            }
            let e4 = l[0] * l[1] * l[2] * l[3];
            let m: f64 = l.iter().map(|z| z.norm()).fold(0.0, f64::max);
            for (got, want, scale) in [
                (coeffs.c3, -e1, m),
                (coeffs.c2, e2, m * m),
                (coeffs.c1, -e3, m.powi(3)),
                (coeffs.c0, e4, m.powi(4)),
            ] {
                prop_assert!((got - want.re).abs() <= 1e-9 * scale, "{got:e} vs {want}");
            }
            // bit-identical on repetition
            prop_assert_eq!(classify(&ss, &p.sys).ok(), classify(&ss, &p.sys).ok());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn reduced_response_ignores_probe_strength(
        g_ck_rel in prop_oneof![Just(0.0), 1e-4..1e-3f64],
        power in log_range(1e-10, 2e-8),
        delta_p in -0.2..0.2f64,
        aminus in any::<bool>(),
    ) {
        let base = SystemParams::reference_device();
        let sys = base.with_g_ck(g_ck_rel * base.g0()).unwrap();
        let drive = DriveParams::from_powers(&sys, sys.omega_m(), power, 0.0, 0.0).unwrap();
        let opts = ResponseOptions { aminus_probe_term: aminus, ..Default::default() };
        let resp = ProbeResponse::new(&sys, &drive, &opts).unwrap();
        let d = delta_p * sys.omega_m();
        let reference = resp.eps_t(d).unwrap();
        let ss = resp.state;
        for exp in 0..6 {
            let eps_p = drive.eps_c * 10f64.powi(-3 - exp);
            let probed = drive.with_eps_p(eps_p).with_delta_p(sys.omega_m() + d);
            let amps = linear_response(&ss, &sys, &probed, &opts).unwrap();
            let eps_t = 2.0 * sys.kappa() * amps.a_plus / eps_p;
            prop_assert!((eps_t - reference).norm() <= 1e-12 * reference.norm().max(1.0));
            prop_assert!(sideband_residual(&amps, &ss, &sys, &probed, &opts) < 1e-10);
            // linear in ε_p
            let doubled = linear_response(&ss, &sys, &probed.with_eps_p(2.0 * eps_p), &opts).unwrap();
            for (a, b) in [
                (amps.a_plus, doubled.a_plus),
                (amps.a_minus, doubled.a_minus),
                (amps.b_plus, doubled.b_plus),
                (amps.b_minus, doubled.b_minus),
            ] {
                prop_assert!((2.0 * a - b).norm() <= 1e-12 * b.norm().max(f64::MIN_POSITIVE));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sweep_keeps_every_root_once(
        g_ck_rel in prop_oneof![Just(0.0), 1e-4..2e-3f64],
        detuning in 0.1..1.2f64,
        max_power in log_range(1e-10, 5e-8),
    ) {
        let base = SystemParams::reference_device();
        let sys = base.with_g_ck(g_ck_rel * base.g0()).unwrap();
        let da = detuning * sys.omega_m();
        let s = power_sweep(&sys, da, &linspace(0.0, max_power, 101)).unwrap();
        prop_assert_eq!(s.powers.len(), s.counts.len());
        for (k, &p) in s.powers.iter().enumerate() {
            let eps = DriveParams::from_powers(&sys, da, p, 0.0, 0.0).unwrap().eps_c;
            let expected = steady_states(&sys, da, eps).unwrap().len();
            prop_assert_eq!(s.counts[k], expected);
            let mut on_branches: Vec<f64> = s
                .branches
                .iter()
                .flat_map(|b| b.points.iter().filter(|q| q.power == p).map(|q| q.x))
                .collect();
            prop_assert_eq!(on_branches.len(), expected, "power {}", p);
            on_branches.sort_by(f64::total_cmp);
            on_branches.dedup();
            prop_assert_eq!(on_branches.len(), expected);
        }
        for b in &s.branches {
            prop_assert!(b.points.windows(2).all(|w| w[1].power > w[0].power));
            prop_assert!(b.points.iter().all(|q| q.verdict == b.points[0].verdict));
        }
    }
}
