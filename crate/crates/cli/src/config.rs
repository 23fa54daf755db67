//! Run configuration: a TOML file with `[system]`, `[drive]`, optional
//! command blocks and `[output]`. Every physical quantity is given in
//! exactly one unit form; the key suffix names the unit:
//!
//! - no suffix: rad/s (or W, s as stated)
//! - `_over_2pi_hz`: value in Hz, multiplied by 2π
//! - `_over_omega_m`, `_over_g0`: ratio to ω_m or g0

use std::f64::consts::TAU;
use std::path::PathBuf;

use optokerr::dynamics::{Tolerances, DEFAULT_SEED};
use optokerr::response::{BranchSelect, ResponseOptions};
use optokerr::{DriveParams, SystemParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settle: Option<SettleSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_a_over_2pi_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_m_over_2pi_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0_over_2pi_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_ck: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_ck_over_2pi_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_ck_over_g0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_over_2pi_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_over_2pi_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Defaults to Δ_a = ω_m when no form is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_a_over_2pi_hz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_a_over_omega_m: Option<f64>,
    /// Control power [W] or Rabi amplitude [rad/s]; zero drive if neither.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_c_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_p_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    /// Grid of δ_p/ω_m; defaults −0.1, 0.1, 1001.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_p_min_over_omega_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_p_max_over_omega_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Index of the (stable) root to expand about; lowest stable if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aminus_probe_term: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    #[default]
    Power,
    CkShift,
    Detuning,
    Phonon,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub kind: SweepKind,
    /// Power grid [W]; defaults 0, 50 nW, 2001.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_min_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_max_w: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Detuning pair for `detuning`; defaults [1.0, 0.8].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_a_pair_over_omega_m: Option<[f64; 2]>,
    /// g_ck values for `ck_shift`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_ck_over_g0_values: Option<Vec<f64>>,
    /// Photon-number grid for `phonon`; defaults to [0, 2ω_m/g_ck].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photon_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub photon_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aminus_probe_term: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettleSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    /// Trajectory samples over [0, t_end]; default 1001.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Stop at the first settled window (default) or integrate to t_end.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_on_settle: Option<bool>,
    /// Number of seeded random initial states; a single run from
    /// `initial_a`, `initial_b` if zero or absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_a: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_b: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = Result<T, ConfigError>;

/// Exactly one of the alternatives, each with its multiplier.
fn one_of(name: &str, forms: &[(&str, Option<f64>, f64)]) -> CResult<Option<f64>> {
    let given: Vec<_> = forms.iter().filter(|f| f.1.is_some()).collect();
    match given.as_slice() {
        [] => Ok(None),
        [(_, Some(v), k)] => Ok(Some(v * k)),
        _ => Err(ConfigError(format!(
            "{name} given more than once ({})",
            given.iter().map(|f| f.0).collect::<Vec<_>>().join(", ")
        ))),
    }
}

fn required(name: &str, forms: &[(&str, Option<f64>, f64)]) -> CResult<f64> {
    one_of(name, forms)?.ok_or_else(|| {
        ConfigError(format!(
            "missing {name}: give one of {}",
            forms.iter().map(|f| f.0).collect::<Vec<_>>().join(", ")
        ))
    })
}

fn core_err(e: optokerr::Error) -> ConfigError {
    ConfigError(e.to_string())
}

impl RunConfig {
    pub fn parse(text: &str) -> CResult<Self> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn system(&self) -> CResult<SystemParams> {
        let s = &self.system;
        let omega_a = required(
            "omega_a",
            &[("omega_a", s.omega_a, 1.0), ("omega_a_over_2pi_hz", s.omega_a_over_2pi_hz, TAU)],
        )?;
        let omega_m = required(
            "omega_m",
            &[("omega_m", s.omega_m, 1.0), ("omega_m_over_2pi_hz", s.omega_m_over_2pi_hz, TAU)],
        )?;
        let g0 = required("g0", &[("g0", s.g0, 1.0), ("g0_over_2pi_hz", s.g0_over_2pi_hz, TAU)])?;
        let g_ck = one_of(
            "g_ck",
            &[
                ("g_ck", s.g_ck, 1.0),
                ("g_ck_over_2pi_hz", s.g_ck_over_2pi_hz, TAU),
                ("g_ck_over_g0", s.g_ck_over_g0, g0),
            ],
        )?
        .unwrap_or(0.0);
        let kappa = required(
            "kappa",
            &[("kappa", s.kappa, 1.0), ("kappa_over_2pi_hz", s.kappa_over_2pi_hz, TAU)],
        )?;
        let gamma = required(
            "gamma",
            &[("gamma", s.gamma, 1.0), ("gamma_over_2pi_hz", s.gamma_over_2pi_hz, TAU)],
        )?;
        SystemParams::new(omega_a, omega_m, g0, g_ck, kappa, gamma).map_err(core_err)
    }

    pub fn drive(&self, sys: &SystemParams) -> CResult<DriveParams> {
        let d = &self.drive;
        let delta_a = one_of(
            "delta_a",
            &[
                ("delta_a", d.delta_a, 1.0),
                ("delta_a_over_2pi_hz", d.delta_a_over_2pi_hz, TAU),
                ("delta_a_over_omega_m", d.delta_a_over_omega_m, sys.omega_m()),
            ],
        )?
        .unwrap_or(sys.omega_m());
        let omega_c = sys.control_frequency(delta_a);
        let rabi = |name: &str, power: Option<f64>, eps: Option<f64>| -> CResult<f64> {
            match (power, eps) {
                (Some(_), Some(_)) => Err(ConfigError(format!("{name} given both as power and amplitude"))),
                (Some(p), None) => optokerr::model::rabi_from_power(p, sys.kappa(), omega_c).map_err(core_err),
                (None, Some(e)) => Ok(e),
                (None, None) => Ok(0.0),
            }
        };
        let eps_c = rabi("control drive", d.power_c_w, d.eps_c)?;
        let eps_p = rabi("probe drive", d.power_p_w, d.eps_p)?;
        DriveParams::new(delta_a, eps_c, eps_p, 0.0).map_err(core_err)
    }

    pub fn output_format(&self, cli: Option<Format>) -> Format {
        cli.or(self.output.format).unwrap_or_default()
    }

    pub fn output_dir(&self, cli: Option<PathBuf>) -> PathBuf {
        cli.or_else(|| self.output.dir.clone()).unwrap_or_else(|| PathBuf::from("."))
    }
}

fn grid_points(name: &str, n: usize) -> CResult<usize> {
    if n == 0 {
        Err(ConfigError(format!("{name} must be at least 1")))
    } else {
        Ok(n)
    }
}

/// Resolved spectrum settings.
pub struct SpectrumPlan {
    /// δ_p grid [rad/s]
    pub grid: Vec<f64>,
    pub opts: ResponseOptions,
}

impl SpectrumSection {
    pub fn plan(&self, sys: &SystemParams) -> CResult<SpectrumPlan> {
        let lo = self.delta_p_min_over_omega_m.unwrap_or(-0.1);
        let hi = self.delta_p_max_over_omega_m.unwrap_or(0.1);
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(ConfigError("spectrum range must satisfy min <= max".into()));
        }
        let n = grid_points("spectrum.points", self.points.unwrap_or(1001))?;
        let grid = optokerr::sweep::linspace(lo, hi, n)
            .into_iter()
            .map(|d| d * sys.omega_m())
            .collect();
        Ok(SpectrumPlan {
            grid,
            opts: ResponseOptions {
                aminus_probe_term: self.aminus_probe_term.unwrap_or(true),
                branch: self
                    .branch_index
                    .map_or(BranchSelect::LowestStable, BranchSelect::Index),
            },
        })
    }
}

impl SweepSection {
    pub fn powers(&self) -> CResult<Vec<f64>> {
        let lo = self.power_min_w.unwrap_or(0.0);
        let hi = self.power_max_w.unwrap_or(optokerr::sweep::DEFAULT_MAX_POWER);
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(ConfigError("sweep powers must satisfy 0 <= min <= max".into()));
        }
        let n = grid_points(
            "sweep.points",
            self.points.unwrap_or(optokerr::sweep::DEFAULT_POWER_POINTS),
        )?;
        Ok(optokerr::sweep::linspace(lo, hi, n))
    }

    pub fn response_options(&self) -> ResponseOptions {
        ResponseOptions {
            aminus_probe_term: self.aminus_probe_term.unwrap_or(true),
            ..Default::default()
        }
    }
}

/// Resolved settle settings.
pub struct SettlePlan {
    pub t_end: f64,
    pub tol: Tolerances,
    pub samples: Vec<f64>,
    pub stop_on_settle: bool,
    pub ensemble: usize,
    pub seed: u64,
    pub initial: (num_complex::Complex64, num_complex::Complex64),
}

impl SettleSection {
    pub fn plan(&self) -> CResult<SettlePlan> {
        let t_end = self.t_end_s.unwrap_or(2e-3);
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(ConfigError("settle.t_end_s must be positive".into()));
        }
        let defaults = Tolerances::default();
        let tol = Tolerances {
            rtol: self.rtol.unwrap_or(defaults.rtol),
            atol: self.atol.unwrap_or(defaults.atol),
        };
        if !(tol.rtol > 0.0 && tol.atol >= 0.0) {
            return Err(ConfigError("settle tolerances must be positive".into()));
        }
        let n = self.samples.unwrap_or(1001);
        let samples = optokerr::sweep::linspace(0.0, t_end, n);
        let c = |v: Option<[f64; 2]>| {
            let [re, im] = v.unwrap_or([0.0, 0.0]);
            num_complex::Complex64::new(re, im)
        };
        Ok(SettlePlan {
            t_end,
            tol,
            samples,
            stop_on_settle: self.stop_on_settle.unwrap_or(true),
            ensemble: self.ensemble.unwrap_or(0),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            initial: (c(self.initial_a), c(self.initial_b)),
        })
    }
}
