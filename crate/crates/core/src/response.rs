//! Weak-probe response about a steady state.
//!
//! To first order in ε_p the intracavity and mechanical amplitudes acquire
//! sidebands A±, B± at e^{∓iΔ_p t}. Their four defining relations are solved
//! as one 4×4 complex linear system in (A₊, A₋*, B₊, B₋*); the reduced
//! output ε_T = 2κA₊/ε_p gives absorption (real part) and dispersion
//! (imaginary part) of the probe.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DriveParams, SystemParams};
use crate::stability::{classify, Verdict};
use crate::steadystate::{steady_states, SteadyState};

/// Closed form and linear system are considered in agreement below this
/// relative deviation.
pub const CLOSED_FORM_TOL: f64 = 1e-9;
/// Points in the bracketing scan for the zero-absorption point.
pub const ZERO_SCAN_POINTS: usize = 2001;
/// Half-width of the zero-absorption scan window in units of ω_m.
pub const ZERO_SCAN_HALF_WIDTH: f64 = 0.5;
/// Bisection stops once the bracket is narrower than this times ω_m.
pub const ZERO_BISECTION_TOL: f64 = 1e-12;

/// Which steady state a spectrum is computed about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchSelect {
    /// Smallest-photon-number stable root.
    #[default]
    LowestStable,
    /// Index into the ascending list of roots; must be stable.
    Index(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResponseOptions {
    /// Keep the ε_p source term in the A₋ relation. Standard treatments drop
    /// it; it is on by default.
    pub aminus_probe_term: bool,
    pub branch: BranchSelect,
}

impl Default for ResponseOptions {
    fn default() -> Self {
        Self {
            aminus_probe_term: true,
            branch: BranchSelect::LowestStable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SidebandAmplitudes {
    pub a_plus: Complex64,
    pub a_minus: Complex64,
    pub b_plus: Complex64,
    pub b_minus: Complex64,
    /// Δ₋ = Δ − Δ_p
    pub delta_minus: f64,
    /// Δ₊ = Δ + Δ_p
    pub delta_plus: f64,
    /// ω₋ = Ω_m − Δ_p
    pub omega_minus: f64,
    /// ω₊ = Ω_m + Δ_p
    pub omega_plus: f64,
}

struct Detunings {
    dm: f64,
    dp: f64,
    wm: f64,
    wp: f64,
}

fn detunings(ss: &SteadyState, delta_p: f64) -> Detunings {
    Detunings {
        dm: ss.delta - delta_p,
        dp: ss.delta + delta_p,
        wm: ss.omega_m_eff - delta_p,
        wp: ss.omega_m_eff + delta_p,
    }
}

/// Gaussian elimination with partial pivoting on a 4×4 complex system.
fn solve4(mut m: [[Complex64; 4]; 4], mut rhs: [Complex64; 4]) -> Result<[Complex64; 4]> {
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0_f64, |s, z| s.max(z.norm()));
    for col in 0..4 {
        let pivot_row = (col..4)
            .max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))
            .unwrap();
        let magnitude = m[pivot_row][col].norm();
        if !(magnitude > 1e-14 * scale) {
            return Err(Error::SingularSystem {
                pivot: col,
                magnitude,
            });
        }
        m.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for r in col + 1..4 {
            let f = m[r][col] / m[col][col];
            for c in col..4 {
                let v = m[col][c];
                m[r][c] -= f * v;
            }
            let v = rhs[col];
            rhs[r] -= f * v;
        }
    }
    let mut x = [Complex64::from(0.0); 4];
    for r in (0..4).rev() {
        let mut acc = rhs[r];
        for c in r + 1..4 {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    Ok(x)
}

/// Sideband amplitudes for `drive.delta_p` and `drive.eps_p`.
pub fn linear_response(
    ss: &SteadyState,
    sys: &SystemParams,
    drive: &DriveParams,
    opts: &ResponseOptions,
) -> Result<SidebandAmplitudes> {
    let i = Complex64::i();
    let d = detunings(ss, drive.delta_p);
    let (k, gm) = (sys.kappa(), sys.gamma());
    let a0 = ss.a0;
    let a0c = a0.conj();
    let g = ss.g;
    let gc = g.conj();
    let z = Complex64::from(0.0);
    let m = [
        [Complex64::new(k, d.dm), z, -i * a0 * gc, -i * a0 * g],
        [z, Complex64::new(k, -d.dp), i * a0c * gc, i * a0c * g],
        [-i * g * a0c, -i * g * a0, Complex64::new(gm, d.wm), z],
        [i * gc * a0c, i * gc * a0, z, Complex64::new(gm, -d.wp)],
    ];
    let ep = Complex64::from(drive.eps_p);
    let em = if opts.aminus_probe_term { ep } else { z };
    let x = solve4(m, [ep, em, z, z])?;
    Ok(SidebandAmplitudes {
        a_plus: x[0],
        a_minus: x[1].conj(),
        b_plus: x[2],
        b_minus: x[3].conj(),
        delta_minus: d.dm,
        delta_plus: d.dp,
        omega_minus: d.wm,
        omega_plus: d.wp,
    })
}

/// Largest relative residual of the four sideband relations, each written
/// as amplitude = (source)/(denominator) and normalized by the magnitudes of
/// its terms.
pub fn sideband_residual(
    amps: &SidebandAmplitudes,
    ss: &SteadyState,
    sys: &SystemParams,
    drive: &DriveParams,
    opts: &ResponseOptions,
) -> f64 {
    let i = Complex64::i();
    let (k, gm) = (sys.kappa(), sys.gamma());
    let (a0, g) = (ss.a0, ss.g);
    let (ap, am, bp, bm) = (amps.a_plus, amps.a_minus, amps.b_plus, amps.b_minus);
    let ep = drive.eps_p;
    let em = if opts.aminus_probe_term { ep } else { 0.0 };
    let rel = |lhs: Complex64, terms: &[Complex64], denom: Complex64| {
        let rhs: Complex64 = terms.iter().sum::<Complex64>() / denom;
        let scale = lhs.norm() + terms.iter().map(|t| t.norm()).sum::<f64>() / denom.norm();
        if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs).norm() / scale
        }
    };
    let r1 = rel(
        ap,
        &[i * g.conj() * bp * a0, i * g * bm.conj() * a0, Complex64::from(ep)],
        Complex64::new(k, amps.delta_minus),
    );
    let r2 = rel(
        am,
        &[i * g * bp.conj() * a0, i * g.conj() * bm * a0, Complex64::from(em)],
        Complex64::new(k, amps.delta_plus),
    );
    let r3 = rel(
        bp,
        &[i * g * a0.conj() * ap, i * g * a0 * am.conj()],
        Complex64::new(gm, amps.omega_minus),
    );
    let r4 = rel(
        bm,
        &[i * g * a0 * ap.conj(), i * g * a0.conj() * am],
        Complex64::new(gm, amps.omega_plus),
    );
    r1.max(r2).max(r3).max(r4)
}

/// A₊ from the closed-form expression
/// A₊ = [s/(κ+iΔ₋) + i|g|²|A₀|²(ω₊+ω₋)] / [s − |g|²|A₀|²(ω₊+ω₋)(Δ₊+Δ₋)] · ε_p,
/// s = (γ+iω₋)(γ−iω₊)(κ+iΔ₋)(κ−iΔ₊).
pub fn closed_form_aplus(ss: &SteadyState, sys: &SystemParams, drive: &DriveParams) -> Complex64 {
    let i = Complex64::i();
    let d = detunings(ss, drive.delta_p);
    let (k, gm) = (sys.kappa(), sys.gamma());
    let s = Complex64::new(gm, d.wm)
        * Complex64::new(gm, -d.wp)
        * Complex64::new(k, d.dm)
        * Complex64::new(k, -d.dp);
    let coupling = ss.g.norm_sqr() * ss.a0.norm_sqr() * (d.wp + d.wm);
    let num = s / Complex64::new(k, d.dm) + i * coupling;
    let den = s - coupling * (d.dp + d.dm);
    num / den * drive.eps_p
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OutputAmplitudes {
    /// Output at the control frequency.
    pub a_out: Complex64,
    /// Output at the probe (Stokes) frequency.
    pub a_out_plus: Complex64,
    /// Output at 2ω_c − ω_p.
    pub a_out_minus: Complex64,
}

pub fn output_amplitudes(
    ss: &SteadyState,
    amps: &SidebandAmplitudes,
    drive: &DriveParams,
    kappa: f64,
) -> OutputAmplitudes {
    let r = (2.0 * kappa).sqrt();
    OutputAmplitudes {
        a_out: r * ss.a0 - drive.eps_c / r,
        a_out_plus: r * amps.a_plus - drive.eps_p / r,
        a_out_minus: r * amps.a_minus,
    }
}

/// ε_T = 2κA₊/ε_p. A zero probe amplitude is replaced by 1 since ε_T does
/// not depend on it.
pub fn epsilon_t(
    ss: &SteadyState,
    sys: &SystemParams,
    drive: &DriveParams,
    opts: &ResponseOptions,
) -> Result<Complex64> {
    let eps_p = if drive.eps_p > 0.0 { drive.eps_p } else { 1.0 };
    let amps = linear_response(ss, sys, &drive.with_eps_p(eps_p), opts)?;
    Ok(2.0 * sys.kappa() * amps.a_plus / eps_p)
}

/// Picks the steady state a spectrum is computed about; returns its index in
/// the ascending root list.
pub fn select_branch(
    sys: &SystemParams,
    drive: &DriveParams,
    branch: BranchSelect,
) -> Result<(usize, SteadyState)> {
    let states = steady_states(sys, drive.delta_a, drive.eps_c)?;
    let mut stable = Vec::new();
    for (idx, ss) in states.iter().enumerate() {
        if classify(ss, sys)?.verdict == Verdict::Stable {
            stable.push(idx);
        }
    }
    let chosen = match branch {
        BranchSelect::LowestStable => stable.first().copied(),
        BranchSelect::Index(i) => stable.contains(&i).then_some(i),
    };
    match chosen {
        Some(i) => Ok((i, states[i])),
        None => Err(Error::BranchUnavailable {
            requested: match branch {
                BranchSelect::LowestStable => "lowest stable".into(),
                BranchSelect::Index(i) => format!("index {i} of {}", states.len()),
            },
            available: stable,
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ResponsePoint {
    /// δ_p/ω_m with δ_p = Δ_p − ω_m.
    pub delta_p_reduced: f64,
    pub eps_t: Complex64,
}

impl ResponsePoint {
    pub fn absorption(&self) -> f64 {
        self.eps_t.re
    }
    pub fn dispersion(&self) -> f64 {
        self.eps_t.im
    }
}

/// Probe response about one fixed steady state, as a function of the
/// probe detuning δ_p = Δ_p − ω_m.
#[derive(Debug, Clone, Copy)]
pub struct ProbeResponse {
    pub sys: SystemParams,
    pub drive: DriveParams,
    pub state: SteadyState,
    pub branch_index: usize,
    pub opts: ResponseOptions,
}

impl ProbeResponse {
    pub fn new(sys: &SystemParams, drive: &DriveParams, opts: &ResponseOptions) -> Result<Self> {
        let (branch_index, state) = select_branch(sys, drive, opts.branch)?;
        Ok(Self {
            sys: *sys,
            drive: *drive,
            state,
            branch_index,
            opts: *opts,
        })
    }

    fn drive_at(&self, delta_p: f64) -> DriveParams {
        self.drive.with_delta_p(self.sys.omega_m() + delta_p)
    }

    /// ε_T at probe detuning δ_p [rad/s].
    pub fn eps_t(&self, delta_p: f64) -> Result<Complex64> {
        epsilon_t(&self.state, &self.sys, &self.drive_at(delta_p), &self.opts)
    }

    pub fn absorption(&self, delta_p: f64) -> Result<f64> {
        Ok(self.eps_t(delta_p)?.re)
    }

    pub fn amplitudes(&self, delta_p: f64) -> Result<SidebandAmplitudes> {
        let drive = self.drive_at(delta_p);
        let drive = if drive.eps_p > 0.0 {
            drive
        } else {
            drive.with_eps_p(1.0)
        };
        linear_response(&self.state, &self.sys, &drive, &self.opts)
    }

    pub fn point(&self, delta_p: f64) -> Result<ResponsePoint> {
        Ok(ResponsePoint {
            delta_p_reduced: delta_p / self.sys.omega_m(),
            eps_t: self.eps_t(delta_p)?,
        })
    }

    pub fn spectrum(&self, grid: &[f64]) -> Result<Vec<ResponsePoint>> {
        if grid.iter().any(|d| !d.is_finite()) {
            return Err(Error::Invalid("spectrum grid must be finite".into()));
        }
        if grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Invalid("spectrum grid must be sorted".into()));
        }
        grid.par_iter().map(|&d| self.point(d)).collect()
    }

    /// Zero crossings of the absorption in [−0.5ω_m, 0.5ω_m], each bisected
    /// to 1e−12·ω_m, ascending.
    pub fn absorption_zeros(&self) -> Result<Vec<f64>> {
        let wm = self.sys.omega_m();
        let (lo, hi) = (-ZERO_SCAN_HALF_WIDTH * wm, ZERO_SCAN_HALF_WIDTH * wm);
        let n = ZERO_SCAN_POINTS;
        let mut grid: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let mut values: Vec<f64> = grid
            .par_iter()
            .map(|&d| self.absorption(d))
            .collect::<Result<_>>()?;

        let has_change = |v: &[f64]| v.windows(2).any(|w| (w[0] > 0.0) != (w[1] > 0.0));
        if !has_change(&values) {
            // a negative dip narrower than the grid spacing: refine the
            // minimum and insert it as an extra bracket point
            let imin = (0..n).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
            let a = grid[imin.saturating_sub(1)];
            let b = grid[(imin + 1).min(n - 1)];
            let (dmin, vmin) = golden_section_min(|d| self.absorption(d), a, b, 1e-13 * wm)?;
            if vmin <= 0.0 {
                let pos = grid.partition_point(|&g| g < dmin);
                grid.insert(pos, dmin);
                values.insert(pos, vmin);
            }
        }
        if !has_change(&values) {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            return Err(Error::ZeroCrossingNotFound {
                lo,
                hi,
                points: n,
                min,
                max,
            });
        }
        let mut zeros = Vec::new();
        for j in 0..grid.len() - 1 {
            let (fa, fb) = (values[j], values[j + 1]);
            if (fa > 0.0) == (fb > 0.0) {
                continue;
            }
            let (mut a, mut b) = (grid[j], grid[j + 1]);
            let positive_left = fa > 0.0;
            while b - a > ZERO_BISECTION_TOL * wm {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if (self.absorption(mid)? > 0.0) == positive_left {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            zeros.push(0.5 * (a + b));
        }
        Ok(zeros)
    }

    /// The absorption zero nearest δ_p = 0 [rad/s].
    pub fn zero_absorption_point(&self) -> Result<f64> {
        let zeros = self.absorption_zeros()?;
        Ok(zeros
            .into_iter()
            .min_by(|a, b| a.abs().total_cmp(&b.abs()))
            .expect("absorption_zeros returns at least one zero"))
    }

    /// Local maxima of the absorption on `grid` (sorted, rad/s), refined by
    /// golden-section search, with their full widths at half maximum.
    pub fn absorption_peaks(&self, grid: &[f64]) -> Result<Vec<AbsorptionPeak>> {
        let values: Vec<f64> = grid
            .par_iter()
            .map(|&d| self.absorption(d))
            .collect::<Result<_>>()?;
        let tol = 1e-12 * self.sys.omega_m();
        let mut peaks = Vec::new();
        for j in 1..grid.len().saturating_sub(1) {
            if !(values[j] > values[j - 1] && values[j] >= values[j + 1]) {
                continue;
            }
            let (center, height) =
                golden_section_min(|d| self.absorption(d).map(|v| -v), grid[j - 1], grid[j + 1], tol)?;
            let height = -height;
            let half = 0.5 * height;
            let left = self.half_crossing(grid, &values, j, half, false, center, tol)?;
            let right = self.half_crossing(grid, &values, j, half, true, center, tol)?;
            let full_width = match (left, right) {
                (Some(l), Some(r)) => Some(r - l),
                _ => None,
            };
            peaks.push(AbsorptionPeak {
                center,
                height,
                left,
                right,
                full_width,
            });
        }
        Ok(peaks)
    }

    #[allow(clippy::too_many_arguments)]
    fn half_crossing(
        &self,
        grid: &[f64],
        values: &[f64],
        peak: usize,
        half: f64,
        rightward: bool,
        center: f64,
        tol: f64,
    ) -> Result<Option<f64>> {
        let mut j = peak;
        loop {
            let next = if rightward {
                if j + 1 >= grid.len() {
                    return Ok(None);
                }
                j + 1
            } else {
                if j == 0 {
                    return Ok(None);
                }
                j - 1
            };
            if values[next] < half {
                let inner = if (rightward && grid[j] < center) || (!rightward && grid[j] > center) {
                    center
                } else {
                    grid[j]
                };
                let (mut a, mut b) = (inner, grid[next]);
                while (b - a).abs() > tol {
                    let mid = 0.5 * (a + b);
                    if self.absorption(mid)? >= half {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                return Ok(Some(0.5 * (a + b)));
            }
            j = next;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AbsorptionPeak {
    /// δ_p of the maximum [rad/s].
    pub center: f64,
    pub height: f64,
    /// Half-maximum crossings [rad/s]; `None` if the curve does not fall
    /// below half height inside the grid.
    pub left: Option<f64>,
    pub right: Option<f64>,
    pub full_width: Option<f64>,
}

fn golden_section_min<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        if b - a <= f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?))
}

/// Absorption/dispersion over a grid of δ_p [rad/s] about the selected branch.
pub fn absorption_spectrum(
    sys: &SystemParams,
    drive: &DriveParams,
    opts: &ResponseOptions,
    grid: &[f64],
) -> Result<Vec<ResponsePoint>> {
    ProbeResponse::new(sys, drive, opts)?.spectrum(grid)
}

/// δ_p0 [rad/s]: the absorption zero nearest δ_p = 0.
pub fn zero_absorption_point(
    sys: &SystemParams,
    drive: &DriveParams,
    opts: &ResponseOptions,
) -> Result<f64> {
    ProbeResponse::new(sys, drive, opts)?.zero_absorption_point()
}

/// Machine-readable comparison of the closed-form A₊ against the linear
/// system over a grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ClosedFormReport {
    pub aminus_probe_term: bool,
    pub points: usize,
    pub tolerance: f64,
    pub max_relative_deviation: f64,
    pub worst_delta_p_reduced: f64,
    pub max_sideband_residual: f64,
    pub agrees: bool,
}

pub fn closed_form_report(response: &ProbeResponse, grid: &[f64]) -> Result<ClosedFormReport> {
    let rows: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .map(|&d| {
            let amps = response.amplitudes(d)?;
            let drive = response.drive_at(d);
            let drive = if drive.eps_p > 0.0 {
                drive
            } else {
                drive.with_eps_p(1.0)
            };
            let cf = closed_form_aplus(&response.state, &response.sys, &drive);
            let dev = (cf - amps.a_plus).norm() / amps.a_plus.norm();
            let res =
                sideband_residual(&amps, &response.state, &response.sys, &drive, &response.opts);
            Ok((d, dev, res))
        })
        .collect::<Result<_>>()?;
    let (worst_d, max_dev) = rows
        .iter()
        .fold((0.0, 0.0_f64), |acc, r| if r.1 > acc.1 { (r.0, r.1) } else { acc });
    let max_res = rows.iter().fold(0.0_f64, |m, r| m.max(r.2));
    Ok(ClosedFormReport {
        aminus_probe_term: response.opts.aminus_probe_term,
        points: grid.len(),
        tolerance: CLOSED_FORM_TOL,
        max_relative_deviation: max_dev,
        worst_delta_p_reduced: worst_d / response.sys.omega_m(),
        max_sideband_residual: max_res,
        agrees: max_dev <= CLOSED_FORM_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steadystate::build_state;

    fn uncoupled() -> (SystemParams, SteadyState, DriveParams) {
        let sys = SystemParams::reference_device().with_g0(0.0).unwrap();
        let da = sys.omega_m();
        let eps_c = 1e10;
        let x = eps_c * eps_c / (sys.kappa().powi(2) + da * da);
        let ss = build_state(x, &sys, da, eps_c, false);
        let drive = DriveParams::new(da, eps_c, 1e6, 0.97 * sys.omega_m()).unwrap();
        (sys, ss, drive)
    }

    #[test]
    fn uncoupled_sidebands() {
        let (sys, ss, drive) = uncoupled();
        let amps = linear_response(&ss, &sys, &drive, &ResponseOptions::default()).unwrap();
        let ep = drive.eps_p;
        let expect_p = ep / Complex64::new(sys.kappa(), amps.delta_minus);
        let expect_m = ep / Complex64::new(sys.kappa(), amps.delta_plus);
        assert!((amps.a_plus - expect_p).norm() < 1e-14 * expect_p.norm());
        assert!((amps.a_minus - expect_m).norm() < 1e-14 * expect_m.norm());
        assert_eq!(amps.b_plus.norm(), 0.0);
        assert_eq!(amps.b_minus.norm(), 0.0);
        let cf = closed_form_aplus(&ss, &sys, &drive);
        assert!((cf - expect_p).norm() < 1e-12 * expect_p.norm());
    }

    #[test]
    fn zero_probe_gives_zero_sidebands() {
        let sys = SystemParams::reference_device().with_g_ck(0.25).unwrap();
        let drive = DriveParams::from_powers(&sys, sys.omega_m(), 9.6e-9, 0.0, sys.omega_m()).unwrap();
        let ss = steady_states(&sys, drive.delta_a, drive.eps_c).unwrap()[0];
        let amps = linear_response(&ss, &sys, &drive, &ResponseOptions::default()).unwrap();
        for z in [amps.a_plus, amps.a_minus, amps.b_plus, amps.b_minus] {
            assert_eq!(z.norm(), 0.0);
        }
    }

    #[test]
    fn empty_cavity_outputs() {
        let sys = SystemParams::reference_device();
        let ss = build_state(0.0, &sys, sys.omega_m(), 0.0, false);
        let drive = DriveParams::new(sys.omega_m(), 0.0, 0.0, sys.omega_m()).unwrap();
        let amps = linear_response(&ss, &sys, &drive, &ResponseOptions::default()).unwrap();
        let out = output_amplitudes(&ss, &amps, &drive, sys.kappa());
        assert_eq!(out.a_out.norm(), 0.0);
        assert_eq!(out.a_out_plus.norm(), 0.0);
        assert_eq!(out.a_out_minus.norm(), 0.0);
    }

    #[test]
    fn resonant_uncoupled_output() {
        let (sys, ss, drive) = uncoupled();
        let drive = drive.with_delta_p(ss.delta); // Δ₋ = 0
        let opts = ResponseOptions::default();
        let amps = linear_response(&ss, &sys, &drive, &opts).unwrap();
        let out = output_amplitudes(&ss, &amps, &drive, sys.kappa());
        let expected = drive.eps_p / (2.0 * sys.kappa()).sqrt();
        assert!((out.a_out_plus - expected).norm() < 1e-12 * expected);
        let et = epsilon_t(&ss, &sys, &drive, &opts).unwrap();
        assert!((et - 2.0).norm() < 1e-12);
        // ε_T = √(2κ)A_out⁺/ε_p + 1
        let via_output = (2.0 * sys.kappa()).sqrt() * out.a_out_plus / drive.eps_p + 1.0;
        assert!((via_output - et).norm() < 1e-12);
    }

    #[test]
    fn closed_form_reduces_without_photons() {
        let sys = SystemParams::reference_device().with_g_ck(0.25).unwrap();
        let ss = build_state(0.0, &sys, sys.omega_m(), 0.0, false);
        let drive = DriveParams::new(sys.omega_m(), 0.0, 2.0, 1.01 * sys.omega_m()).unwrap();
        let cf = closed_form_aplus(&ss, &sys, &drive);
        let expected = 2.0 / Complex64::new(sys.kappa(), sys.omega_m() - drive.delta_p);
        assert!((cf - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn eps_t_independent_of_probe_amplitude() {
        let sys = SystemParams::reference_device().with_g_ck(0.25).unwrap();
        let drive = DriveParams::from_powers(&sys, sys.omega_m(), 9.6e-9, 0.0, 0.96 * sys.omega_m()).unwrap();
        let ss = steady_states(&sys, drive.delta_a, drive.eps_c).unwrap()[0];
        let opts = ResponseOptions::default();
        let base = epsilon_t(&ss, &sys, &drive.with_eps_p(1e3), &opts).unwrap();
        for p in [1e3, 2e3, 1e5, 1e9] {
            let e = epsilon_t(&ss, &sys, &drive.with_eps_p(p), &opts).unwrap();
            assert!((e - base).norm() <= 1e-12 * base.norm());
        }
    }

    #[test]
    fn sideband_relations_hold() {
        let sys = SystemParams::reference_device().with_g_ck(0.25).unwrap();
        let drive = DriveParams::from_powers(&sys, sys.omega_m(), 9.6e-9, 1e-12, 0.95 * sys.omega_m()).unwrap();
        for ss in steady_states(&sys, drive.delta_a, drive.eps_c).unwrap() {
            for opts in [
                ResponseOptions::default(),
                ResponseOptions {
                    aminus_probe_term: false,
                    ..Default::default()
                },
            ] {
                let amps = linear_response(&ss, &sys, &drive, &opts).unwrap();
                assert!(sideband_residual(&amps, &ss, &sys, &drive, &opts) < 1e-10);
            }
        }
    }

    #[test]
    fn singular_system_reports_pivot() {
        let z = Complex64::from(0.0);
        let one = Complex64::from(1.0);
        let m = [[one, z, z, z], [z, z, z, z], [z, z, one, z], [z, z, z, one]];
        match solve4(m, [one; 4]) {
            Err(Error::SingularSystem { pivot, .. }) => assert_eq!(pivot, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn branch_selection_errors_name_available() {
        let sys = SystemParams::reference_device().with_g_ck(0.25).unwrap();
        let drive = DriveParams::from_powers(&sys, sys.omega_m(), 9.6e-9, 0.0, 0.0).unwrap();
        let (idx, _) = select_branch(&sys, &drive, BranchSelect::LowestStable).unwrap();
        assert_eq!(idx, 0);
        match select_branch(&sys, &drive, BranchSelect::Index(1)) {
            Err(Error::BranchUnavailable { available, .. }) => assert!(available.contains(&0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section_min(|x| Ok((x - 0.3).powi(2) + 1.0), -1.0, 2.0, 1e-12).unwrap();
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 1.0).abs() < 1e-12);
    }
}
