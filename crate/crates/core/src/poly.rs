//! Real polynomials stored with ascending coefficients `c[0] + c[1] x + ...`.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Value and first derivative (Horner).
pub fn eval_with_derivative(coeffs: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &c in coeffs.iter().rev() {
        dp = dp * x + p;
        p = p * x + c;
    }
    (p, dp)
}

/// Σ |c_k x^k|, the natural magnitude against which a residual is judged.
pub fn abs_terms(coeffs: &[f64], x: f64) -> f64 {
    let ax = x.abs();
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
}

/// |p(x)| / Σ|c_k x^k|, zero when every term vanishes.
pub fn relative_residual(coeffs: &[f64], x: f64) -> f64 {
    let scale = abs_terms(coeffs, x);
    if scale == 0.0 {
        0.0
    } else {
        eval(coeffs, x).abs() / scale
    }
}

/// Drops leading coefficients with |c| <= `threshold`·max|c|.
pub fn deflate_leading(coeffs: &[f64], threshold: f64) -> Vec<f64> {
    let max = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let mut out = coeffs.to_vec();
    while out.len() > 1 && out.last().map_or(false, |c| c.abs() <= threshold * max) {
        out.pop();
    }
    out
}

/// All complex roots as eigenvalues of the companion matrix. Returns `None`
/// if the Schur iteration fails to converge.
pub fn companion_roots(coeffs: &[f64]) -> Option<Vec<Complex64>> {
    let n = coeffs.len().checked_sub(1)?;
    if n == 0 {
        return Some(Vec::new());
    }
    let lead = coeffs[n];
    if lead == 0.0 || !lead.is_finite() {
        return None;
    }
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    for (i, &c) in coeffs[..n].iter().enumerate() {
        companion[(i, n - 1)] = -c / lead;
    }
    let schur = Schur::try_new(companion, f64::EPSILON, 10_000)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}

/// One Newton step on a real root estimate; keeps the original if the step
/// does not lower the residual.
pub fn newton_step(coeffs: &[f64], x: f64) -> f64 {
    let (p, dp) = eval_with_derivative(coeffs, x);
    if dp == 0.0 || !dp.is_finite() {
        return x;
    }
    let next = x - p / dp;
    if next.is_finite() && eval(coeffs, next).abs() <= p.abs() {
        next
    } else {
        x
    }
}

/// Sign changes between consecutive nonzero coefficients.
pub fn sign_alternations(coeffs: &[f64]) -> usize {
    let signs: Vec<bool> = coeffs
        .iter()
        .filter(|c| **c != 0.0)
        .map(|c| *c > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}
