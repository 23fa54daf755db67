//! Steady states of the control-driven system.
//!
//! Eliminating the mechanical amplitude from the mean-field equations leaves
//! one real equation for the photon number x = |A₀|²,
//!
//! ```text
//! x [κ² + (Δ_a − g0² x (g_ck x + 2Ω_m)/(γ² + Ω_m²))²] = ε_c²,   Ω_m = ω_m − g_ck x,
//! ```
//!
//! which after clearing the denominator is a quintic in x (a cubic when
//! g_ck = 0). Roots are found on a nondimensional form of the polynomial
//! (rates over ω_m, x over a natural scale) so that the companion-matrix
//! eigenvalues are well conditioned even when x ~ 1e10.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{check_finite, check_nonnegative, SystemParams};
use crate::poly;

/// Tolerance on the nondimensional polynomial residual of an accepted root.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-9;
/// Relative separation below which two roots are reported as marginal.
pub const MARGINAL_SEPARATION: f64 = 1e-6;
/// Leading coefficients at or below this fraction of the largest are
/// dropped. Only exact zeros (g_ck = 0) qualify: a tiny leading coefficient
/// still decides the roots at large u.
pub const DEFLATION_THRESHOLD: f64 = 0.0;
const IMAG_TOL: f64 = 1e-8;

/// Plain inputs of the photon-number polynomial. Unlike [`SystemParams`] the
/// cross-Kerr coupling may be negative here, which is the opposite sign
/// convention for the frequency pull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuinticInputs {
    pub omega_m: f64,
    pub g0: f64,
    pub g_ck: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub delta_a: f64,
    pub eps_c: f64,
}

impl QuinticInputs {
    pub fn new(sys: &SystemParams, delta_a: f64, eps_c: f64) -> Result<Self> {
        Ok(Self {
            omega_m: sys.omega_m(),
            g0: sys.g0(),
            g_ck: sys.g_ck(),
            kappa: sys.kappa(),
            gamma: sys.gamma(),
            delta_a: check_finite("delta_a", delta_a)?,
            eps_c: check_nonnegative("eps_c", eps_c)?,
        })
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_m", self.omega_m),
            ("g0", self.g0),
            ("g_ck", self.g_ck),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("delta_a", self.delta_a),
            ("eps_c", self.eps_c),
        ] {
            check_finite(name, v)?;
        }
        Ok(())
    }
}

/// Coefficients of the photon-number polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct QuinticCoefficients {
    /// a₀..a₅ in closed form, physical units (rad/s)⁶.
    pub a: [f64; 6],
    /// Ascending coefficients of the nondimensional polynomial in
    /// u = x / `x_scale`, normalized to max |c| = 1 and with negligible
    /// leading terms removed.
    pub scaled: Vec<f64>,
    /// x = x_scale · u.
    pub x_scale: f64,
    /// Physical polynomial value = `value_scale` · scaled(u).
    pub value_scale: f64,
}

impl QuinticCoefficients {
    /// Degree after deflation (5 generically, 3 when g_ck = 0).
    pub fn degree(&self) -> usize {
        self.scaled.len().saturating_sub(1)
    }

    /// Physical polynomial value at photon number `x`.
    pub fn eval_physical(&self, x: f64) -> f64 {
        self.value_scale * poly::eval(&self.scaled, x / self.x_scale)
    }

    /// Closed-form coefficients evaluated at `x`.
    pub fn eval_closed_form(&self, x: f64) -> f64 {
        poly::eval(&self.a, x)
    }

    /// |p(u)| / Σ|c_k u^k| on the nondimensional polynomial.
    pub fn relative_residual(&self, x: f64) -> f64 {
        poly::relative_residual(&self.scaled, x / self.x_scale)
    }

    /// Closed-form coefficients truncated to the degree of the deflated
    /// nondimensional polynomial. The physical coefficients span many decades,
    /// so negligibility is judged on the scaled form.
    pub fn deflated_closed_form(&self) -> Vec<f64> {
        self.a[..=self.degree().max(1).min(5)].to_vec()
    }
}

// a(u) * b(u)
fn pmul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

fn padd(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &v) in a.iter().enumerate() {
        out[i] += v;
    }
    for (i, &v) in b.iter().enumerate() {
        out[i] += v;
    }
    out
}

fn pscale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|v| v * s).collect()
}

/// Closed-form coefficients a₀..a₅ (physical units).
pub fn closed_form_coefficients(p: &QuinticInputs) -> [f64; 6] {
    let QuinticInputs {
        omega_m: wm,
        g0,
        g_ck: gk,
        kappa: k,
        gamma: gm,
        delta_a: da,
        eps_c,
    } = *p;
    let e2 = eps_c * eps_c;
    let d = gm * gm + wm * wm;
    let g02 = g0 * g0;
    let mix = da * (g02 + da * gk) + gk * k * k;
    let a0 = -e2 * d * d;
    let a1 = d * (4.0 * e2 * gk * wm + (da * da + k * k) * d);
    let a2 = -2.0 * (2.0 * mix * wm * d + e2 * gk * gk * (gm * gm + 3.0 * wm * wm));
    let a3 = 2.0 * gk * mix * gm * gm
        + 4.0 * e2 * gk.powi(3) * wm
        + 2.0 * (2.0 * g02 * g02 + 5.0 * da * g02 * gk + 3.0 * gk * gk * (da * da + k * k)) * wm * wm;
    let a4 = -gk * (e2 * gk.powi(3) + 4.0 * ((g02 + da * gk).powi(2) + gk * gk * k * k) * wm);
    let a5 = gk * gk * (g02 + da * gk).powi(2) + gk.powi(4) * k * k;
    [a0, a1, a2, a3, a4, a5]
}

/// Builds both the closed-form and the nondimensional coefficient sets.
pub fn quintic_coefficients_from(p: &QuinticInputs) -> Result<QuinticCoefficients> {
    p.validate()?;
    if !(p.omega_m > 0.0 && p.kappa > 0.0 && p.gamma > 0.0) {
        return Err(Error::Invalid(
            "omega_m, kappa and gamma must be positive".into(),
        ));
    }
    let wm = p.omega_m;
    let k = p.kappa / wm;
    let gm = p.gamma / wm;
    let g0 = p.g0 / wm;
    let gk = p.g_ck / wm;
    let da = p.delta_a / wm;
    let e = p.eps_c / wm;

    // x = s·u; ĝ_ck·x = rho·u
    let (s, rho) = if gk != 0.0 {
        (1.0 / gk.abs(), gk.signum())
    } else if e > 0.0 {
        (e * e / (k * k), 0.0)
    } else {
        (1.0, 0.0)
    };

    // D(u) = γ̂² + (1 − rho·u)²
    let one_minus = [1.0, -rho];
    let d = padd(&[gm * gm], &pmul(&one_minus, &one_minus));
    // shift(u) = ĝ0² s u (2 − rho u)
    let shift = pscale(&[0.0, 2.0, -rho], g0 * g0 * s);
    // Δ̂_a D − shift
    let detuning = padd(&pscale(&d, da), &pscale(&shift, -1.0));
    let d2 = pmul(&d, &d);
    let bracket = padd(&pscale(&d2, k * k), &pmul(&detuning, &detuning));
    let lhs = pscale(&pmul(&[0.0, 1.0], &bracket), s);
    let q = padd(&lhs, &pscale(&d2, -e * e));

    let max = q.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let (scaled, value_scale) = if max > 0.0 {
        (
            poly::deflate_leading(&pscale(&q, 1.0 / max), DEFLATION_THRESHOLD),
            wm.powi(6) * max,
        )
    } else {
        (vec![0.0], 0.0)
    };

    Ok(QuinticCoefficients {
        a: closed_form_coefficients(p),
        scaled,
        x_scale: s,
        value_scale,
    })
}

pub fn quintic_coefficients(
    sys: &SystemParams,
    delta_a: f64,
    eps_c: f64,
) -> Result<QuinticCoefficients> {
    quintic_coefficients_from(&QuinticInputs::new(sys, delta_a, eps_c)?)
}

/// A positive real steady photon number.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PhotonRoot {
    pub x: f64,
    /// Coincides with a neighbouring root to within [`MARGINAL_SEPARATION`]
    /// (tangency / fold point).
    pub marginal: bool,
}

/// Positive real roots of a coefficient set, ascending.
pub fn positive_roots(coeffs: &QuinticCoefficients) -> Result<Vec<PhotonRoot>> {
    let c = &coeffs.scaled;
    if c.len() < 2 {
        return Ok(Vec::new());
    }
    let eigen = poly::companion_roots(c).ok_or_else(|| Error::RootFinding {
        coefficients: c.clone(),
    })?;
    let mut xs = Vec::new();
    for z in eigen {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::RootFinding {
                coefficients: c.clone(),
            });
        }
        if z.im.abs() >= IMAG_TOL * z.re.abs().max(1.0) || z.re <= 0.0 {
            continue;
        }
        let mut u = poly::newton_step(c, z.re);
        let mut extra = 0;
        while poly::relative_residual(c, u) > ROOT_RESIDUAL_TOL && extra < 4 {
            u = poly::newton_step(c, u);
            extra += 1;
        }
        if poly::relative_residual(c, u) > ROOT_RESIDUAL_TOL {
            return Err(Error::RootFinding {
                coefficients: c.clone(),
            });
        }
        if u > 0.0 {
            xs.push(u * coeffs.x_scale);
        }
    }
    xs.sort_by(f64::total_cmp);
    let mut roots: Vec<PhotonRoot> = xs
        .iter()
        .map(|&x| PhotonRoot { x, marginal: false })
        .collect();
    for i in 1..roots.len() {
        let (a, b) = (roots[i - 1].x, roots[i].x);
        if (b - a).abs() <= MARGINAL_SEPARATION * a.abs().max(b.abs()) {
            roots[i - 1].marginal = true;
            roots[i].marginal = true;
        }
    }
    Ok(roots)
}

/// All positive steady photon numbers for a control amplitude `eps_c`,
/// ascending. An undriven cavity has the single steady state x = 0.
pub fn steady_photon_numbers(
    sys: &SystemParams,
    delta_a: f64,
    eps_c: f64,
) -> Result<Vec<PhotonRoot>> {
    if eps_c == 0.0 {
        check_finite("delta_a", delta_a)?;
        return Ok(vec![PhotonRoot {
            x: 0.0,
            marginal: false,
        }]);
    }
    positive_roots(&quintic_coefficients(sys, delta_a, eps_c)?)
}

/// Roots of the g_ck = 0 cubic c²x³ − 2Δ_a c x² + (κ² + Δ_a²) x − ε_c² with
/// c = 2g0²ω_m/(γ² + ω_m²), located by bracketing between the turning points
/// and bisection. Independent of the companion-matrix path.
pub fn cubic_limit_roots(sys: &SystemParams, delta_a: f64, eps_c: f64) -> Vec<f64> {
    let wm = sys.omega_m();
    let c = 2.0 * sys.g0() * sys.g0() * wm / (sys.gamma().powi(2) + wm * wm);
    let k2 = sys.kappa().powi(2);
    let f = |x: f64| x * (k2 + (delta_a - c * x).powi(2)) - eps_c * eps_c;
    if eps_c == 0.0 {
        return vec![0.0];
    }
    if c == 0.0 {
        return vec![eps_c * eps_c / (k2 + delta_a * delta_a)];
    }
    // f'(x) = 3c²x² − 4Δ_a c x + κ² + Δ_a²
    let disc = 4.0 * delta_a * delta_a - 3.0 * (k2 + delta_a * delta_a);
    let mut knots = vec![0.0];
    if disc > 0.0 {
        let r = disc.sqrt();
        for t in [(2.0 * delta_a - r) / (3.0 * c), (2.0 * delta_a + r) / (3.0 * c)] {
            if t > 0.0 {
                knots.push(t);
            }
        }
    }
    // f grows without bound; find an upper bracket
    let mut hi = knots.last().copied().unwrap_or(0.0).max(eps_c * eps_c / k2.max(1e-300));
    hi = hi.max(1.0);
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    knots.push(hi);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut up) = (w[0], w[1]);
        let (flo, fup) = (f(lo), f(up));
        if flo == 0.0 && lo > 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fup.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + up);
            if mid <= lo || mid >= up {
                break;
            }
            if f(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                up = mid;
            }
        }
        roots.push(0.5 * (lo + up));
    }
    roots
}

/// Mean phonon number |B₀|² = g0²x²/(γ² + (ω_m − g_ck x)²).
pub fn phonon_of_photon(x: f64, sys: &SystemParams) -> f64 {
    let om = sys.omega_m() - sys.g_ck() * x;
    sys.g0().powi(2) * x * x / (sys.gamma().powi(2) + om * om)
}

/// One self-consistent operating point.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SteadyState {
    pub a0: Complex64,
    pub b0: Complex64,
    pub n_photon: f64,
    pub n_phonon: f64,
    /// Effective detuning Δ [rad/s].
    pub delta: f64,
    /// Shifted mechanical frequency Ω_m = ω_m − g_ck|A₀|² [rad/s].
    pub omega_m_eff: f64,
    /// Modified coupling g = g0 + g_ck B₀.
    pub g: Complex64,
    /// Fluctuation coupling G = g0 (1 + i g_ck|A₀|²/(γ + iΩ_m)).
    pub g_fluct: Complex64,
    pub marginal: bool,
}

fn effective_quantities(x: f64, sys: &SystemParams, delta_a: f64) -> (f64, Complex64, f64) {
    let i = Complex64::i();
    let om = sys.omega_m() - sys.g_ck() * x;
    let b0 = i * sys.g0() * x / Complex64::new(sys.gamma(), om);
    let delta = delta_a
        - sys.g_ck() * b0.norm_sqr()
        - 2.0 * sys.g0().powi(2) * x * om / (sys.gamma().powi(2) + om * om);
    (om, b0, delta)
}

/// Effective detuning Δ(x).
pub fn effective_detuning(x: f64, sys: &SystemParams, delta_a: f64) -> f64 {
    effective_quantities(x, sys, delta_a).2
}

/// Builds the full steady state belonging to photon number `x`.
pub fn steady_state_from_photon(
    x: f64,
    sys: &SystemParams,
    delta_a: f64,
    eps_c: f64,
) -> Result<SteadyState> {
    check_nonnegative("x", x)?;
    let coeffs = quintic_coefficients(sys, delta_a, eps_c)?;
    let residual = if eps_c == 0.0 {
        if x == 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        coeffs.relative_residual(x)
    };
    if !(residual <= ROOT_RESIDUAL_TOL) {
        return Err(Error::ResidualRejected {
            x,
            residual,
            tolerance: ROOT_RESIDUAL_TOL,
        });
    }
    Ok(build_state(x, sys, delta_a, eps_c, false))
}

pub(crate) fn build_state(
    x: f64,
    sys: &SystemParams,
    delta_a: f64,
    eps_c: f64,
    marginal: bool,
) -> SteadyState {
    let i = Complex64::i();
    let (om, b0, delta) = effective_quantities(x, sys, delta_a);
    let a0 = Complex64::from(eps_c) / Complex64::new(sys.kappa(), delta);
    let g = sys.g0() + sys.g_ck() * b0;
    let g_fluct = sys.g0() * (1.0 + i * sys.g_ck() * x / Complex64::new(sys.gamma(), om));
    SteadyState {
        a0,
        b0,
        n_photon: x,
        n_phonon: b0.norm_sqr(),
        delta,
        omega_m_eff: om,
        g,
        g_fluct,
        marginal,
    }
}

/// Every steady state at the given drive, ascending in photon number.
pub fn steady_states(sys: &SystemParams, delta_a: f64, eps_c: f64) -> Result<Vec<SteadyState>> {
    steady_photon_numbers(sys, delta_a, eps_c)?
        .into_iter()
        .map(|r| {
            steady_state_from_photon(r.x, sys, delta_a, eps_c).map(|mut s| {
                s.marginal = r.marginal;
                s
            })
        })
        .collect()
}

impl SteadyState {
    /// Relative residuals of the two closure relations
    /// B₀(γ + iΩ_m) = i g0 x and A₀(κ + iΔ) = ε_c, with Δ recomputed from
    /// the stored amplitudes.
    pub fn closure_residuals(&self, sys: &SystemParams, delta_a: f64, eps_c: f64) -> (f64, f64) {
        let i = Complex64::i();
        let lhs_b = self.b0 * Complex64::new(sys.gamma(), self.omega_m_eff);
        let rhs_b = i * sys.g0() * self.n_photon;
        let rb = if rhs_b.norm() == 0.0 {
            lhs_b.norm()
        } else {
            (lhs_b - rhs_b).norm() / rhs_b.norm()
        };
        let om = sys.omega_m() - sys.g_ck() * self.n_photon;
        let delta = delta_a
            - sys.g_ck() * self.b0.norm_sqr()
            - 2.0 * sys.g0().powi(2) * self.n_photon * om / (sys.gamma().powi(2) + om * om);
        let lhs_a = self.a0 * Complex64::new(sys.kappa(), delta);
        let ra = if eps_c == 0.0 {
            lhs_a.norm()
        } else {
            (lhs_a - eps_c).norm() / eps_c
        };
        (rb, ra)
    }
}

/// Sign pattern of the (deflated) closed-form coefficients.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct DescartesReport {
    /// Signs from the highest to the lowest power, e.g. "+-+-+-".
    pub signs: String,
    /// Sign alternations = upper bound on the number of positive roots.
    pub max_positive_roots: usize,
}

pub fn descartes_check(coeffs: &QuinticCoefficients) -> DescartesReport {
    let deflated = coeffs.deflated_closed_form();
    let signs = deflated
        .iter()
        .rev()
        .map(|c| match c.partial_cmp(&0.0) {
            Some(std::cmp::Ordering::Greater) => '+',
            Some(std::cmp::Ordering::Less) => '-',
            _ => '0',
        })
        .collect();
    DescartesReport {
        signs,
        max_positive_roots: poly::sign_alternations(&deflated),
    }
}
