//! Device and drive parameters.
//!
//! Every frequency, coupling and decay rate is stored as an angular
//! frequency in rad/s. Conversions from laboratory quantities (optical
//! power, bath temperature) live here as well.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant [J/K].
pub const K_B: f64 = 1.380_649e-23;

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be finite",
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    check_finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be > 0",
        })
    }
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<f64> {
    check_finite(name, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            value,
            reason: "must be >= 0",
        })
    }
}

/// Static device parameters of the cavity + mechanical resonator.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SystemParams {
    omega_a: f64,
    omega_m: f64,
    g0: f64,
    g_ck: f64,
    kappa: f64,
    gamma: f64,
}

impl SystemParams {
    pub fn new(
        omega_a: f64,
        omega_m: f64,
        g0: f64,
        g_ck: f64,
        kappa: f64,
        gamma: f64,
    ) -> Result<Self> {
        Ok(Self {
            omega_a: check_positive("omega_a", omega_a)?,
            omega_m: check_positive("omega_m", omega_m)?,
            g0: check_nonnegative("g0", g0)?,
            g_ck: check_nonnegative("g_ck", g_ck)?,
            kappa: check_positive("kappa", kappa)?,
            gamma: check_positive("gamma", gamma)?,
        })
    }

    /// The microwave-cavity device used throughout the examples and the
    /// bundled configs: ω_a/2π = 1.3 GHz, ω_m/2π = 6.3 MHz, κ/2π = 0.1 MHz,
    /// g0 = 250 rad/s, γ = 40 rad/s, no cross-Kerr coupling.
    pub fn reference_device() -> Self {
        Self {
            omega_a: 2.0 * PI * 1.3e9,
            omega_m: 2.0 * PI * 6.3e6,
            g0: 250.0,
            g_ck: 0.0,
            kappa: 2.0 * PI * 0.1e6,
            gamma: 40.0,
        }
    }

    pub fn with_g_ck(&self, g_ck: f64) -> Result<Self> {
        Ok(Self {
            g_ck: check_nonnegative("g_ck", g_ck)?,
            ..*self
        })
    }

    pub fn with_g0(&self, g0: f64) -> Result<Self> {
        Ok(Self {
            g0: check_nonnegative("g0", g0)?,
            ..*self
        })
    }

    pub fn omega_a(&self) -> f64 {
        self.omega_a
    }
    pub fn omega_m(&self) -> f64 {
        self.omega_m
    }
    pub fn g0(&self) -> f64 {
        self.g0
    }
    pub fn g_ck(&self) -> f64 {
        self.g_ck
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// ω_m > κ: mechanical sidebands lie outside the cavity line.
    pub fn resolved_sideband(&self) -> bool {
        self.omega_m > self.kappa
    }

    /// Frequency of a control field detuned by `delta_a` below the cavity.
    pub fn control_frequency(&self, delta_a: f64) -> f64 {
        self.omega_a - delta_a
    }
}

/// Control/probe drive settings in the frame rotating at the control frequency.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DriveParams {
    /// Δ_a = ω_a − ω_c [rad/s]
    pub delta_a: f64,
    /// Control Rabi amplitude ε_c [rad/s]
    pub eps_c: f64,
    /// Probe Rabi amplitude ε_p [rad/s]
    pub eps_p: f64,
    /// Δ_p = ω_p − ω_c [rad/s]
    pub delta_p: f64,
}

impl DriveParams {
    pub fn new(delta_a: f64, eps_c: f64, eps_p: f64, delta_p: f64) -> Result<Self> {
        let drive = Self {
            delta_a: check_finite("delta_a", delta_a)?,
            eps_c: check_nonnegative("eps_c", eps_c)?,
            eps_p: check_nonnegative("eps_p", eps_p)?,
            delta_p: check_finite("delta_p", delta_p)?,
        };
        if !drive.is_weak_probe() {
            log::warn!(
                "probe amplitude {:e} exceeds 10% of control amplitude {:e}; linear response may not apply",
                drive.eps_p,
                drive.eps_c
            );
        }
        Ok(drive)
    }

    /// Builds the drive from control/probe powers in watts. Both Rabi
    /// amplitudes use the control frequency ω_c = ω_a − Δ_a.
    pub fn from_powers(
        sys: &SystemParams,
        delta_a: f64,
        power_c: f64,
        power_p: f64,
        delta_p: f64,
    ) -> Result<Self> {
        let omega_c = sys.control_frequency(delta_a);
        let eps_c = rabi_from_power(power_c, sys.kappa, omega_c)?;
        let eps_p = rabi_from_power(power_p, sys.kappa, omega_c)?;
        Self::new(delta_a, eps_c, eps_p, delta_p)
    }

    /// Control-only drive (ε_p = 0, Δ_p = 0).
    pub fn control_only(delta_a: f64, eps_c: f64) -> Result<Self> {
        Self::new(delta_a, eps_c, 0.0, 0.0)
    }

    pub fn is_weak_probe(&self) -> bool {
        self.eps_p <= 0.1 * self.eps_c
    }

    pub fn with_delta_p(&self, delta_p: f64) -> Self {
        Self { delta_p, ..*self }
    }

    pub fn with_eps_p(&self, eps_p: f64) -> Self {
        Self { eps_p, ..*self }
    }

    pub fn with_eps_c(&self, eps_c: f64) -> Self {
        Self { eps_c, ..*self }
    }
}

/// Rabi amplitude ε = sqrt(2κ℘/(ħω)) of a field of power `power` [W] and
/// angular frequency `omega_field` coupled through a cavity of decay rate
/// `kappa`.
pub fn rabi_from_power(power: f64, kappa: f64, omega_field: f64) -> Result<f64> {
    check_nonnegative("power", power)?;
    check_positive("kappa", kappa)?;
    check_positive("omega_field", omega_field)?;
    Ok((2.0 * kappa * power / (HBAR * omega_field)).sqrt())
}

/// Inverse of [`rabi_from_power`].
pub fn power_from_rabi(eps: f64, kappa: f64, omega_field: f64) -> Result<f64> {
    check_nonnegative("eps", eps)?;
    check_positive("kappa", kappa)?;
    check_positive("omega_field", omega_field)?;
    Ok(eps * eps * HBAR * omega_field / (2.0 * kappa))
}

/// Bose-Einstein occupancy of the mechanical bath.
pub fn thermal_occupancy(omega_m: f64, temperature: f64) -> Result<f64> {
    check_positive("omega_m", omega_m)?;
    check_nonnegative("temperature", temperature)?;
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let ratio = HBAR * omega_m / (K_B * temperature);
    Ok(1.0 / ratio.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_power_gives_zero_amplitude() {
        assert_eq!(rabi_from_power(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(rabi_from_power(0.0, 7e5, 3e9).unwrap(), 0.0);
    }

    #[test]
    fn quadrupled_power_doubles_amplitude() {
        let a = rabi_from_power(2.5e-9, 6e5, 8e9).unwrap();
        let b = rabi_from_power(1.0e-8, 6e5, 8e9).unwrap();
        assert!((b / a - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reference_control_amplitude() {
        // sqrt(2 * 2π·1e5 * 9.6e-9 / (ħ * 2π·1.3e9)), evaluated independently
        // in extended precision: 1.18342532217e11
        let kappa = 2.0 * PI * 0.1e6;
        let omega = 2.0 * PI * 1.3e9;
        let eps = rabi_from_power(9.6e-9, kappa, omega).unwrap();
        let expected = (2.0 * 0.1e6 * 9.6e-9 / (1.054_571_817e-34 * 1.3e9_f64)).sqrt();
        assert!((eps / expected - 1.0).abs() < 1e-15);
        assert!((eps / 1.183_425_322_17e11 - 1.0).abs() < 1e-9, "{eps:e}");
    }

    #[test]
    fn power_round_trip() {
        let eps = rabi_from_power(3.3e-9, 6e5, 8e9).unwrap();
        let p = power_from_rabi(eps, 6e5, 8e9).unwrap();
        assert!((p / 3.3e-9 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(rabi_from_power(-1.0, 1.0, 1.0).is_err());
        assert!(rabi_from_power(f64::NAN, 1.0, 1.0).is_err());
        assert!(rabi_from_power(1.0, 0.0, 1.0).is_err());
        assert!(rabi_from_power(1.0, 1.0, f64::INFINITY).is_err());
        assert!(thermal_occupancy(1.0, -1e-3).is_err());
        assert!(SystemParams::new(1.0, 1.0, f64::NAN, 0.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 1.0, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(SystemParams::new(1.0, 0.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(DriveParams::new(f64::INFINITY, 1.0, 0.0, 0.0).is_err());
        assert!(DriveParams::new(0.0, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn occupancy_zero_temperature() {
        assert_eq!(thermal_occupancy(2.0 * PI * 6.3e6, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn occupancy_high_temperature_limit() {
        let omega_m = 2.0 * PI * 6.3e6;
        for &ratio in &[60.0, 100.0, 1e3, 1e5] {
            let t = ratio * HBAR * omega_m / K_B;
            let n = thermal_occupancy(omega_m, t).unwrap();
            assert!((n / ratio - 1.0).abs() < 0.02, "ratio {ratio}: n = {n}");
        }
    }

    #[test]
    fn occupancy_at_ten_millikelvin() {
        // direct evaluation: x = ħω/(k_B T) = 0.0302352..., n = 32.5765182
        let omega_m = 2.0 * PI * 6.3e6;
        let x = 1.054_571_817e-34 * omega_m / (1.380_649e-23 * 0.01);
        let expected = 1.0 / (x.exp() - 1.0);
        let n = thermal_occupancy(omega_m, 0.01).unwrap();
        assert!((n / expected - 1.0).abs() < 1e-12);
        assert!((n - 32.576_518_19).abs() < 1e-7, "{n}");
    }

    #[test]
    fn reference_device_is_resolved_sideband() {
        assert!(SystemParams::reference_device().resolved_sideband());
    }
}
