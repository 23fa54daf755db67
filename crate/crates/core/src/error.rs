use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("root finder failed to converge; coefficients (ascending, nondimensional) = {coefficients:?}")]
    RootFinding { coefficients: Vec<f64> },

    #[error("photon number {x} is not a steady state: relative residual {residual:e} exceeds {tolerance:e}")]
    ResidualRejected { x: f64, residual: f64, tolerance: f64 },

    #[error("drift matrix is not physical: characteristic coefficient C{index} has imaginary residue {residue:e}")]
    Structural { index: usize, residue: f64 },

    #[error("eigenvalue solver failed on the {dim}x{dim} drift matrix")]
    EigenSolver { dim: usize },

    #[error("Routh-Hurwitz verdict ({rh}) disagrees with eigenvalue verdict ({eig}) at margin {margin:e}")]
    StabilityDisagreement { rh: bool, eig: bool, margin: f64 },

    #[error("sideband system is singular: pivot {pivot} vanished (|pivot| = {magnitude:e})")]
    SingularSystem { pivot: usize, magnitude: f64 },

    #[error("requested branch {requested} is unavailable; stable branches: {available:?}")]
    BranchUnavailable {
        requested: String,
        available: Vec<usize>,
    },

    #[error("no sign change of the absorption in [{lo:e}, {hi:e}] rad/s ({points} points, min {min:e}, max {max:e})")]
    ZeroCrossingNotFound {
        lo: f64,
        hi: f64,
        points: usize,
        min: f64,
        max: f64,
    },

    #[error("integrator step size underflow at t = {t:e} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integration did not settle by t = {t:e}: criterion {criterion:e}")]
    NotConverged {
        t: f64,
        a: num_complex::Complex64,
        b: num_complex::Complex64,
        criterion: f64,
    },

    #[error("settled state is {distance:e} (relative) from the nearest steady root")]
    UnmatchedEndpoint { distance: f64 },

    #[error("no multistability at detuning {delta_a:e} rad/s over the requested powers")]
    NoBistability { delta_a: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}
