//! Linear stability of a steady state.
//!
//! Fluctuations v = (δa, δa†, δb, δb†) obey v̇ = C v. A steady state is
//! stable iff every eigenvalue of C has a negative real part. Two routes are
//! computed and cross-checked: the Routh-Hurwitz inequalities on the
//! characteristic polynomial (coefficients from Faddeev-LeVerrier trace
//! recursions) and the eigenvalues from a complex Schur decomposition.

use nalgebra::{Matrix4, Schur};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::steadystate::SteadyState;

/// Relative width of the marginal band: |min(−Re λ)| < MARGINAL_BAND·(κ + γ).
pub const MARGINAL_BAND: f64 = 1e-8;
const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// How the fluctuation coupling G is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CouplingModel {
    /// G = g0 (1 + i g_ck|A₀|²/(γ + iΩ_m)).
    #[default]
    Exact,
    /// γ + iΩ_m ≈ iΩ_m, i.e. G ≈ g0 (1 + g_ck|A₀|²/Ω_m). For comparison only.
    NeglectMechanicalDamping,
}

/// 4×4 drift matrix over (δa, δa†, δb, δb†).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix4<Complex64>);

impl DriftMatrix {
    pub fn new(ss: &SteadyState, sys: &SystemParams, model: CouplingModel) -> Self {
        let i = Complex64::i();
        let a = ss.a0;
        let ac = a.conj();
        let g = match model {
            CouplingModel::Exact => ss.g_fluct,
            CouplingModel::NeglectMechanicalDamping => Complex64::from(
                sys.g0() * (1.0 + sys.g_ck() * ss.n_photon / ss.omega_m_eff),
            ),
        };
        let gc = g.conj();
        let (k, gm) = (sys.kappa(), sys.gamma());
        let (d, om) = (ss.delta, ss.omega_m_eff);
        #[rustfmt::skip]
        let m = Matrix4::new(
            Complex64::new(-k, -d), Complex64::from(0.0), i * a * gc,              i * a * g,
            Complex64::from(0.0),   Complex64::new(-k, d), -i * ac * gc,           -i * ac * g,
            i * ac * g,             i * a * g,             Complex64::new(-gm, -om), Complex64::from(0.0),
            -i * ac * gc,           -i * a * gc,           Complex64::from(0.0),     Complex64::new(-gm, om),
        );
        Self(m)
    }

    /// Largest deviation from the conjugation symmetry
    /// C[σ(r), σ(c)] = conj(C[r, c]) with σ = (1↔2, 3↔4), relative to max |C|.
    pub fn conjugate_structure_residual(&self) -> f64 {
        const SIGMA: [usize; 4] = [1, 0, 3, 2];
        let scale = self.0.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let mut worst = 0.0_f64;
        for r in 0..4 {
            for c in 0..4 {
                let diff = (self.0[(SIGMA[r], SIGMA[c])] - self.0[(r, c)].conj()).norm();
                worst = worst.max(diff);
            }
        }
        if scale == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// Eigenvalues from the complex Schur form, sorted by real part then
    /// imaginary part.
    pub fn eigenvalues(&self) -> Result<[Complex64; 4]> {
        let schur =
            Schur::try_new(self.0, f64::EPSILON, 100_000).ok_or(Error::EigenSolver { dim: 4 })?;
        let (_, t) = schur.unpack();
        let mut ev = [t[(0, 0)], t[(1, 1)], t[(2, 2)], t[(3, 3)]];
        // complex Schur is upper triangular; guard against a stray 2×2 block
        for j in 0..3 {
            if t[(j + 1, j)].norm() > 1e-12 * t.norm() {
                return Err(Error::EigenSolver { dim: 4 });
            }
        }
        ev.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Ok(ev)
    }
}

pub fn drift_matrix(ss: &SteadyState, sys: &SystemParams) -> DriftMatrix {
    DriftMatrix::new(ss, sys, CouplingModel::Exact)
}

/// λ⁴ + C₃λ³ + C₂λ² + C₁λ + C₀ = det(λI − C).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct CharCoefficients {
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl CharCoefficients {
    pub fn as_array(&self) -> [f64; 4] {
        [self.c3, self.c2, self.c1, self.c0]
    }
}

/// Faddeev-LeVerrier recursion; the coefficients of a physical drift matrix
/// are real up to rounding, larger imaginary parts are a structural error.
pub fn characteristic_coefficients(c: &DriftMatrix) -> Result<CharCoefficients> {
    let a = c.0;
    let id = Matrix4::<Complex64>::identity();
    let mut m = Matrix4::<Complex64>::zeros();
    let mut coeff = [Complex64::from(1.0); 5]; // coeff[k] multiplies λ^k
    for k in 1..=4 {
        m = a * m + id * coeff[4 - k + 1];
        coeff[4 - k] = -(a * m).trace() / k as f64;
    }
    let rho = (0..4)
        .map(|r| (0..4).map(|col| a[(r, col)].norm()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    const BINOM: [f64; 5] = [1.0, 4.0, 6.0, 4.0, 1.0];
    for idx in 0..4 {
        let power = 4 - idx; // coefficient of λ^idx scales like ρ^(4-idx)
        let scale = BINOM[power] * rho.powi(power as i32);
        let residue = if scale > 0.0 {
            coeff[idx].im.abs() / scale
        } else {
            coeff[idx].im.abs()
        };
        if residue > IMAG_RESIDUE_TOL {
            return Err(Error::Structural {
                index: idx,
                residue,
            });
        }
    }
    Ok(CharCoefficients {
        c3: coeff[3].re,
        c2: coeff[2].re,
        c1: coeff[1].re,
        c0: coeff[0].re,
    })
}

/// Hurwitz quantities (C₃, C₃C₂ − C₁, C₃C₂C₁ − C₁² − C₃²C₀, C₀).
pub fn hurwitz_quantities(c3: f64, c2: f64, c1: f64, c0: f64) -> [f64; 4] {
    [
        c3,
        c3 * c2 - c1,
        c3 * c2 * c1 - (c1 * c1 + c3 * c3 * c0),
        c0,
    ]
}

/// All four Routh-Hurwitz conditions for a quartic, including C₀ > 0.
pub fn routh_hurwitz_stable(c3: f64, c2: f64, c1: f64, c0: f64) -> bool {
    hurwitz_quantities(c3, c2, c1, c0).iter().all(|&h| h > 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

impl Verdict {
    pub fn is_stable(self) -> bool {
        self == Verdict::Stable
    }

    pub fn symbol(self) -> char {
        match self {
            Verdict::Stable => 'S',
            Verdict::Unstable => 'U',
            Verdict::Marginal => 'M',
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct StabilityReport {
    pub coefficients: CharCoefficients,
    pub eigenvalues: [Complex64; 4],
    pub rh_verdict: bool,
    pub eig_verdict: bool,
    /// min over eigenvalues of −Re λ [rad/s]; positive when stable.
    pub margin: f64,
    pub verdict: Verdict,
}

pub fn classify_with(
    ss: &SteadyState,
    sys: &SystemParams,
    model: CouplingModel,
) -> Result<StabilityReport> {
    let c = DriftMatrix::new(ss, sys, model);
    let coefficients = characteristic_coefficients(&c)?;
    let eigenvalues = c.eigenvalues()?;
    let margin = eigenvalues
        .iter()
        .map(|z| -z.re)
        .fold(f64::INFINITY, f64::min);
    let [c3, c2, c1, c0] = coefficients.as_array();
    let rh_verdict = routh_hurwitz_stable(c3, c2, c1, c0);
    let eig_verdict = margin > 0.0;
    let band = MARGINAL_BAND * (sys.kappa() + sys.gamma());
    let verdict = if margin.abs() < band {
        Verdict::Marginal
    } else if rh_verdict != eig_verdict {
        return Err(Error::StabilityDisagreement {
            rh: rh_verdict,
            eig: eig_verdict,
            margin,
        });
    } else if eig_verdict {
        Verdict::Stable
    } else {
        Verdict::Unstable
    };
    Ok(StabilityReport {
        coefficients,
        eigenvalues,
        rh_verdict,
        eig_verdict,
        margin,
        verdict,
    })
}

pub fn classify(ss: &SteadyState, sys: &SystemParams) -> Result<StabilityReport> {
    classify_with(ss, sys, CouplingModel::Exact)
}

/// Classifies a batch of states in parallel, preserving order.
pub fn classify_all(states: &[SteadyState], sys: &SystemParams) -> Result<Vec<StabilityReport>> {
    states.par_iter().map(|ss| classify(ss, sys)).collect()
}

/// Checks that verdicts along ascending roots alternate S, U, S, ... and
/// start and end with S. Returns a description of the first violation.
pub fn fold_pattern_violation(verdicts: &[Verdict]) -> Option<String> {
    if verdicts.is_empty() {
        return None;
    }
    let pattern: String = verdicts.iter().map(|v| v.symbol()).collect();
    for (i, v) in verdicts.iter().enumerate() {
        let expected = if i % 2 == 0 {
            Verdict::Stable
        } else {
            Verdict::Unstable
        };
        if *v != expected {
            return Some(format!(
                "root {} is {} (pattern {}), expected alternating S/U",
                i, v, pattern
            ));
        }
    }
    if verdicts.len() % 2 == 0 {
        return Some(format!("pattern {pattern} ends with an unstable root"));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DriveParams;
    use crate::steadystate::{build_state, steady_states};

    fn decoupled() -> (SystemParams, SteadyState, f64) {
        let sys = SystemParams::reference_device().with_g0(0.0).unwrap();
        let da = 0.7 * sys.omega_m();
        let eps = 3e9;
        let x = eps * eps / (sys.kappa().powi(2) + da * da);
        (sys, build_state(x, &sys, da, eps, false), da)
    }

    #[test]
    fn decoupled_eigenvalues() {
        let (sys, ss, da) = decoupled();
        let c = drift_matrix(&ss, &sys);
        let ev = c.eigenvalues().unwrap();
        let mut expected = [
            Complex64::new(-sys.kappa(), -da),
            Complex64::new(-sys.kappa(), da),
            Complex64::new(-sys.gamma(), -sys.omega_m()),
            Complex64::new(-sys.gamma(), sys.omega_m()),
        ];
        expected.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12 * sys.omega_m());
        }
        // block diagonal
        for r in 0..2 {
            for col in 2..4 {
                assert_eq!(c.0[(r, col)].norm(), 0.0);
                assert_eq!(c.0[(col, r)].norm(), 0.0);
            }
        }
    }

    #[test]
    fn decoupled_coefficients() {
        let (sys, ss, da) = decoupled();
        let cc = characteristic_coefficients(&drift_matrix(&ss, &sys)).unwrap();
        let (k, g, wm) = (sys.kappa(), sys.gamma(), sys.omega_m());
        assert!((cc.c3 / (2.0 * (k + g)) - 1.0).abs() < 1e-12);
        let c0 = (k * k + da * da) * (g * g + wm * wm);
        assert!((cc.c0 / c0 - 1.0).abs() < 1e-10);
        assert!(routh_hurwitz_stable(cc.c3, cc.c2, cc.c1, cc.c0));
        let report = classify(&ss, &sys).unwrap();
        assert_eq!(report.verdict, Verdict::Stable);
    }

    #[test]
    fn scaled_identity_binomial() {
        let sigma = 2.5;
        let c = DriftMatrix(Matrix4::identity() * Complex64::from(-sigma));
        let cc = characteristic_coefficients(&c).unwrap();
        let expected = [4.0 * sigma, 6.0 * sigma.powi(2), 4.0 * sigma.powi(3), sigma.powi(4)];
        for (a, b) in cc.as_array().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn explicit_unstable_root() {
        // (λ−1)(λ+1)(λ+2)(λ+3) = λ⁴ + 5λ³ + 5λ² − 5λ − 6
        assert!(!routh_hurwitz_stable(5.0, 5.0, -5.0, -6.0));
        // (λ+1)(λ+2)(λ+3)(λ+4) = λ⁴ + 10λ³ + 35λ² + 50λ + 24
        assert!(routh_hurwitz_stable(10.0, 35.0, 50.0, 24.0));
        // (λ² − 1)(λ + 1)² = λ⁴ + 2λ³ − 2λ − 1
        assert!(!routh_hurwitz_stable(2.0, 0.0, -2.0, -1.0));
    }

    #[test]
    fn c0_condition_matters() {
        // three Hurwitz conditions hold, only C₀ > 0 fails:
        // C₃ = 1, C₂ = 10, C₁ = 1, C₀ = −1 → H₂ = 9 > 0, H₃ = 10 − 1 + 1 = 10 > 0
        let h = hurwitz_quantities(1.0, 10.0, 1.0, -1.0);
        assert!(h[0] > 0.0 && h[1] > 0.0 && h[2] > 0.0 && h[3] < 0.0);
        assert!(!routh_hurwitz_stable(1.0, 10.0, 1.0, -1.0));
    }

    #[test]
    fn reference_states_structure() {
        let sys = SystemParams::reference_device().with_g_ck(0.25).unwrap();
        let drive = DriveParams::from_powers(&sys, sys.omega_m(), 9.6e-9, 0.0, 0.0).unwrap();
        for ss in steady_states(&sys, drive.delta_a, drive.eps_c).unwrap() {
            let c = drift_matrix(&ss, &sys);
            assert!(c.conjugate_structure_residual() < 1e-15);
            let cc = characteristic_coefficients(&c).unwrap();
            let k_g = 2.0 * (sys.kappa() + sys.gamma());
            assert!((cc.c3 / k_g - 1.0).abs() < 1e-10);
            assert!((-c.trace().re / k_g - 1.0).abs() < 1e-12);
            // spectrum closed under conjugation
            let ev = c.eigenvalues().unwrap();
            for z in ev {
                let partner = ev
                    .iter()
                    .map(|w| (w - z.conj()).norm())
                    .fold(f64::INFINITY, f64::min);
                assert!(partner < 1e-6 * sys.omega_m());
            }
        }
    }

    #[test]
    fn fold_pattern() {
        use Verdict::*;
        assert!(fold_pattern_violation(&[Stable, Unstable, Stable]).is_none());
        assert!(fold_pattern_violation(&[Stable, Unstable, Unstable]).is_some());
        assert!(fold_pattern_violation(&[Stable, Unstable]).is_some());
        assert!(fold_pattern_violation(&[]).is_none());
    }

    #[test]
    fn deterministic() {
        let sys = SystemParams::reference_device().with_g_ck(0.25).unwrap();
        let drive = DriveParams::from_powers(&sys, sys.omega_m(), 9.6e-9, 0.0, 0.0).unwrap();
        let states = steady_states(&sys, drive.delta_a, drive.eps_c).unwrap();
        let a = classify_all(&states, &sys).unwrap();
        let b = classify_all(&states, &sys).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.margin.to_bits(), y.margin.to_bits());
            assert_eq!(x.coefficients, y.coefficients);
        }
    }
}
