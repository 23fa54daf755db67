//! Probe response about the reference device at 9.6 nW.

use optokerr::response::{
    closed_form_report, linear_response, output_amplitudes, BranchSelect, ProbeResponse, ResponseOptions,
};
use optokerr::sweep::linspace;
use optokerr::{DriveParams, Error, SystemParams};

fn response(g_ck_rel: f64, opts: ResponseOptions) -> ProbeResponse {
    let base = SystemParams::reference_device();
    let sys = base.with_g_ck(g_ck_rel * base.g0()).unwrap();
    let drive = DriveParams::from_powers(&sys, sys.omega_m(), 9.6e-9, 0.0, 0.0).unwrap();
    ProbeResponse::new(&sys, &drive, &opts).unwrap()
}

#[test]
fn single_point_grid_matches_direct_evaluation() {
    let r = response(1e-3, ResponseOptions::default());
    let d = 0.013 * r.sys.omega_m();
    let s = r.spectrum(&[d]).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s[0].eps_t, r.eps_t(d).unwrap());
    assert_eq!(s[0].delta_p_reduced, 0.013);
    assert!(r.spectrum(&[d, 0.0]).is_err());
    assert!(r.spectrum(&[f64::NAN]).is_err());
}

#[test]
fn zero_absorption_point_is_a_sign_change() {
    for g in [0.0, 1e-3] {
        let r = response(g, ResponseOptions::default());
        let d0 = r.zero_absorption_point().unwrap();
        let h = 1e-6 * r.sys.omega_m();
        let (lo, hi) = (r.absorption(d0 - h).unwrap(), r.absorption(d0 + h).unwrap());
        assert!(lo * hi < 0.0, "g_ck/g0 = {g}: {lo:e}, {hi:e}");
        assert!(r.absorption_zeros().unwrap().contains(&d0));
    }
    // cross-Kerr moves the zero well away from resonance
    let bare = response(0.0, ResponseOptions::default()).zero_absorption_point().unwrap();
    let ck = response(1e-3, ResponseOptions::default()).zero_absorption_point().unwrap();
    assert!(ck.abs() > 10.0 * bare.abs());
}

#[test]
fn transmitted_field_is_eps_t_minus_one() {
    let r = response(1e-3, ResponseOptions::default());
    let k = r.sys.kappa();
    for frac in [-0.08, -0.01, 0.0, 0.02, 0.09] {
        let d = frac * r.sys.omega_m();
        let eps_p = 1e-3 * r.drive.eps_c;
        let probed = r.drive.with_eps_p(eps_p).with_delta_p(r.sys.omega_m() + d);
        let amps = linear_response(&r.state, &r.sys, &probed, &r.opts).unwrap();
        let out = output_amplitudes(&r.state, &amps, &probed, k);
        let t = out.a_out_plus * (2.0 * k).sqrt() / eps_p;
        let eps_t = r.eps_t(d).unwrap();
        assert!((t - (eps_t - 1.0)).norm() <= 1e-12 * eps_t.norm().max(1.0));
        assert!((2.0 * k * amps.a_plus / eps_p - eps_t).norm() <= 1e-12 * eps_t.norm());
        // no probe field is injected at the A₋ frequency
        assert_eq!(out.a_out_minus, (2.0 * k).sqrt() * amps.a_minus);
    }
}

#[test]
fn unstable_branch_is_refused() {
    let opts = ResponseOptions {
        branch: BranchSelect::Index(1),
        ..Default::default()
    };
    let base = SystemParams::reference_device();
    let sys = base.with_g_ck(1e-3 * base.g0()).unwrap();
    let drive = DriveParams::from_powers(&sys, sys.omega_m(), 9.6e-9, 0.0, 0.0).unwrap();
    match ProbeResponse::new(&sys, &drive, &opts) {
        Err(Error::BranchUnavailable { available, .. }) => assert_eq!(available, vec![0]),
        other => panic!("expected BranchUnavailable, got {other:?}"),
    }
}

#[test]
fn cross_kerr_skews_the_doublet() {
    let grid: Vec<f64> = linspace(-0.1, 0.1, 2001)
        .iter()
        .map(|f| f * SystemParams::reference_device().omega_m())
        .collect();
    let widths = |g: f64| {
        let peaks = response(g, ResponseOptions::default()).absorption_peaks(&grid).unwrap();
        assert_eq!(peaks.len(), 2, "g_ck/g0 = {g}");
        (peaks[0].full_width.unwrap(), peaks[1].full_width.unwrap())
    };
    let (l0, r0) = widths(0.0);
    let (l1, r1) = widths(1e-3);
    assert!(l1 < r1);
    assert!((r1 - l1) / (r1 + l1) > (r0 - l0).abs() / (r0 + l0));
}

#[test]
fn closed_form_agrees_without_the_aminus_probe_source() {
    let grid: Vec<f64> = linspace(-0.1, 0.1, 201)
        .iter()
        .map(|f| f * SystemParams::reference_device().omega_m())
        .collect();
    let off = ResponseOptions {
        aminus_probe_term: false,
        ..Default::default()
    };
    let report = closed_form_report(&response(1e-3, off), &grid).unwrap();
    assert!(report.agrees, "{report:?}");
    assert_eq!(report.points, 201);
    let on = closed_form_report(&response(1e-3, ResponseOptions::default()), &grid).unwrap();
    assert!(!on.agrees);
    assert!(on.max_sideband_residual < 1e-10);
}
