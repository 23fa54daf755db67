//! Command-line front end: reads a run config, calls the solver and writes
//! figure-ready datasets plus JSON reports.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 config error, 3 solver error,
//! 4 non-convergence.

pub mod config;
pub mod output;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use optokerr::dynamics::{self, SettleOptions, SettleOutcome};
use optokerr::response::{closed_form_report, AbsorptionPeak, ClosedFormReport, ProbeResponse};
use optokerr::stability::{classify, Verdict};
use optokerr::steadystate::steady_states;
use optokerr::sweep;
use optokerr::{DriveParams, SystemParams};
use serde::Serialize;

use config::{ConfigError, Format, RunConfig, SweepKind};
use output::{Outputs, Table};

#[derive(Debug, Parser)]
#[command(name = "optokerr", version, about = "Cross-Kerr optomechanics solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Roots,
    Spectrum,
    Sweep,
    Settle,
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; overrides `[output] format`.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady roots with stability verdicts.
    Roots(CommonArgs),
    /// Probe absorption and dispersion spectrum.
    Spectrum(CommonArgs),
    /// Power sweep, g_ck shift scan, detuning robustness or phonon curve.
    Sweep(CommonArgs),
    /// Mean-field integration to a steady state.
    Settle(CommonArgs),
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(optokerr::Error),
    NotConverged(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::NotConverged(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(e) => write!(f, "solver error: {e}"),
            CliError::NotConverged(m) => write!(f, "not converged: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<optokerr::Error> for CliError {
    fn from(e: optokerr::Error) -> Self {
        match e {
            optokerr::Error::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            other => CliError::Solver(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Parsed config plus resolved device, drive and output settings.
pub struct Context {
    pub config: RunConfig,
    pub sys: SystemParams,
    pub drive: DriveParams,
    pub out: Outputs,
}

impl Context {
    pub fn load(path: &Path, out: Option<PathBuf>, format: Option<Format>) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config = RunConfig::parse(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_config(config, out, format)
    }

    pub fn from_config(config: RunConfig, out: Option<PathBuf>, format: Option<Format>) -> CliResult<Self> {
        let sys = config.system()?;
        let drive = config.drive(&sys)?;
        let out = Outputs::new(config.output_dir(out), config.output_format(format));
        Ok(Self { config, sys, drive, out })
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let (kind, args) = match cli.command {
        Command::Roots(a) => (CommandKind::Roots, a),
        Command::Spectrum(a) => (CommandKind::Spectrum, a),
        Command::Sweep(a) => (CommandKind::Sweep, a),
        Command::Settle(a) => (CommandKind::Settle, a),
    };
    let ctx = Context::load(&args.config, args.out, args.format)?;
    dispatch(kind, &ctx)
}

pub fn dispatch(kind: CommandKind, ctx: &Context) -> CliResult<()> {
    match kind {
        CommandKind::Roots => cmd_roots(ctx),
        CommandKind::Spectrum => cmd_spectrum(ctx),
        CommandKind::Sweep => cmd_sweep(ctx),
        CommandKind::Settle => cmd_settle(ctx),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RootRow {
    pub index: usize,
    pub photon_number: f64,
    pub phonon_number: f64,
    /// Effective detuning Δ [rad/s].
    pub delta: f64,
    pub verdict: Verdict,
    /// min(−Re λ) [rad/s]
    pub margin: f64,
}

pub fn root_rows(sys: &SystemParams, drive: &DriveParams) -> CliResult<Vec<RootRow>> {
    steady_states(sys, drive.delta_a, drive.eps_c)?
        .iter()
        .enumerate()
        .map(|(index, ss)| {
            let rep = classify(ss, sys)?;
            Ok(RootRow {
                index,
                photon_number: ss.n_photon,
                phonon_number: ss.n_phonon,
                delta: ss.delta,
                verdict: rep.verdict,
                margin: rep.margin,
            })
        })
        .collect()
}

pub fn cmd_roots(ctx: &Context) -> CliResult<()> {
    let rows = root_rows(&ctx.sys, &ctx.drive)?;
    let mut table = Table::new(&[
        "index",
        "photon_number",
        "phonon_number",
        "delta_rad_per_s",
        "verdict",
        "margin_rad_per_s",
    ]);
    for r in &rows {
        table.row(vec![
            r.index.to_string(),
            output::num(r.photon_number),
            output::num(r.phonon_number),
            output::num(r.delta),
            r.verdict.to_string(),
            output::num(r.margin),
        ]);
    }
    let mut stdout = std::io::stdout().lock();
    write!(stdout, "{}", table.to_csv())?;
    ctx.out.dataset("roots", &table, &rows)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SpectrumRow {
    delta_p_over_omega_m: f64,
    re_eps_t: f64,
    im_eps_t: f64,
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    branch_index: usize,
    photon_number: f64,
    aminus_probe_term: bool,
    /// Zero-absorption point δ_p0/ω_m, when a crossing exists.
    delta_p0_over_omega_m: Option<f64>,
    delta_p0_error: Option<String>,
    peaks: Vec<AbsorptionPeak>,
    /// Closed-form A₊ against the linear system; `agrees = false` is the
    /// discrepancy report.
    closed_form: ClosedFormReport,
}

pub fn cmd_spectrum(ctx: &Context) -> CliResult<()> {
    let section = ctx.config.spectrum.clone().unwrap_or_default();
    let plan = section.plan(&ctx.sys)?;
    let resp = ProbeResponse::new(&ctx.sys, &ctx.drive, &plan.opts)?;
    let points = resp.spectrum(&plan.grid)?;
    let rows: Vec<SpectrumRow> = points
        .iter()
        .map(|p| SpectrumRow {
            delta_p_over_omega_m: p.delta_p_reduced,
            re_eps_t: p.absorption(),
            im_eps_t: p.dispersion(),
        })
        .collect();
    let mut table = Table::new(&["delta_p_over_omega_m", "re_eps_t", "im_eps_t"]);
    for r in &rows {
        table.row(vec![
            output::num(r.delta_p_over_omega_m),
            output::num(r.re_eps_t),
            output::num(r.im_eps_t),
        ]);
    }
    let (delta_p0, delta_p0_error) = match resp.zero_absorption_point() {
        Ok(d) => (Some(d / ctx.sys.omega_m()), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let peaks = if plan.grid.len() >= 3 {
        resp.absorption_peaks(&plan.grid)?
    } else {
        Vec::new()
    };
    let cf = closed_form_report(&resp, &plan.grid)?;
    let summary = SpectrumSummary {
        branch_index: resp.branch_index,
        photon_number: resp.state.n_photon,
        aminus_probe_term: plan.opts.aminus_probe_term,
        delta_p0_over_omega_m: delta_p0,
        delta_p0_error,
        peaks,
        closed_form: cf,
    };
    ctx.out.dataset("spectrum", &table, &rows)?;
    ctx.out.json("spectrum_summary", &summary)?;
    match delta_p0 {
        Some(d) => println!("points {}, delta_p0/omega_m {d:?}", rows.len()),
        None => println!("points {}, no zero-absorption crossing", rows.len()),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct FoldReport<'a> {
    delta_a: f64,
    g_ck: f64,
    branches: usize,
    stable_branches: usize,
    onset_power_w: Option<f64>,
    folds: &'a [sweep::FoldPoint],
    three_root_windows: Vec<(f64, f64)>,
    five_root_windows: Vec<(f64, f64)>,
}

pub fn cmd_sweep(ctx: &Context) -> CliResult<()> {
    let section = ctx.config.sweep.clone().unwrap_or_default();
    match section.kind {
        SweepKind::Power => {
            let powers = section.powers()?;
            let s = sweep::power_sweep(&ctx.sys, ctx.drive.delta_a, &powers)?;
            let mut table = Table::new(&["power_w", "branch_id", "photon_number", "stable"]);
            let mut rows: Vec<(f64, usize, f64, bool)> = s
                .branches
                .iter()
                .flat_map(|b| b.points.iter().map(move |p| (p.power, b.id, p.x, p.verdict.is_stable())))
                .collect();
            rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for &(p, id, x, st) in &rows {
                table.row(vec![output::num(p), id.to_string(), output::num(x), u8::from(st).to_string()]);
            }
            let report = FoldReport {
                delta_a: s.delta_a,
                g_ck: s.g_ck,
                branches: s.branches.len(),
                stable_branches: s.branches.iter().filter(|b| b.stable()).count(),
                onset_power_w: s.onset(),
                folds: &s.folds,
                three_root_windows: s.windows_with(3),
                five_root_windows: s.windows_with(5),
            };
            ctx.out.dataset("sweep_branches", &table, &s.branches)?;
            ctx.out.json("sweep_folds", &report)?;
            println!("branches {}, folds {}", report.branches, s.folds.len());
        }
        SweepKind::CkShift => {
            let ratios = section
                .g_ck_over_g0_values
                .clone()
                .ok_or_else(|| CliError::Config("ck_shift sweep needs g_ck_over_g0_values".into()))?;
            let values: Vec<f64> = ratios.iter().map(|r| r * ctx.sys.g0()).collect();
            let scan = sweep::ck_shift_scan(&ctx.sys, &ctx.drive, &values, &section.response_options())?;
            let mut table = Table::new(&["g_ck_rad_per_s", "delta_p0_rad_per_s", "delta_p0_over_omega_m"]);
            for r in &scan.rows {
                table.row(vec![output::num(r.g_ck), output::num(r.delta_p0), output::num(r.delta_p0_reduced)]);
            }
            ctx.out.dataset("ck_shift", &table, &scan.rows)?;
            ctx.out.json("ck_shift_summary", &serde_json::json!({ "monotone": scan.monotone }))?;
            println!("rows {}, monotone {}", scan.rows.len(), scan.monotone);
        }
        SweepKind::Detuning => {
            let powers = section.powers()?;
            let [d1, d2] = section.delta_a_pair_over_omega_m.unwrap_or([1.0, 0.8]);
            let w = ctx.sys.omega_m();
            let rep = sweep::detuning_robustness(&ctx.sys, &powers, (d1 * w, d2 * w))?;
            let mut table = Table::new(&["g_ck_rad_per_s", "delta_a_rad_per_s", "fold_power_w", "photon_number"]);
            for shift in [&rep.without_ck, &rep.with_ck] {
                for e in &shift.endpoints {
                    table.row(vec![
                        output::num(shift.g_ck),
                        output::num(e.delta_a),
                        output::num(e.power),
                        output::num(e.photon_number),
                    ]);
                }
            }
            ctx.out.dataset("robustness", &table, &rep)?;
            ctx.out.json("robustness_summary", &rep)?;
            println!("ck_more_robust {}", rep.ck_more_robust);
        }
        SweepKind::Phonon => {
            if !(ctx.sys.g_ck() > 0.0) && section.photon_max.is_none() {
                return Err(CliError::Config("phonon sweep needs g_ck > 0 or photon_max".into()));
            }
            let x_max = section
                .photon_max
                .unwrap_or(2.0 * ctx.sys.omega_m() / ctx.sys.g_ck());
            let n = section.photon_points.unwrap_or(1001);
            if n == 0 || !(x_max >= 0.0) {
                return Err(CliError::Config("phonon sweep needs photon_points >= 1, photon_max >= 0".into()));
            }
            let curve = sweep::phonon_photon_curve(&ctx.sys, &sweep::linspace(0.0, x_max, n))?;
            let mut table = Table::new(&["photon_number", "n_phonon_gck0", "n_phonon_gck"]);
            for i in 0..curve.x.len() {
                table.row(vec![
                    output::num(curve.x[i]),
                    output::num(curve.n_phonon_uncoupled[i]),
                    output::num(curve.n_phonon[i]),
                ]);
            }
            ctx.out.dataset("phonon", &table, &curve)?;
            println!("points {}", curve.x.len());
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SettleReport {
    converged: bool,
    final_time_s: f64,
    criterion: f64,
    final_state: (Complex64, Complex64),
    outcome: Option<SettleOutcome>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct EnsembleRow {
    run: usize,
    initial_a: Complex64,
    initial_b: Complex64,
    root_index: Option<usize>,
    distance: Option<f64>,
    t_settled_s: Option<f64>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct EnsembleReport {
    runs: usize,
    seed: u64,
    roots: Vec<RootRow>,
    /// Number of runs ending on each root, by index.
    histogram: Vec<usize>,
    failures: usize,
}

pub fn cmd_settle(ctx: &Context) -> CliResult<()> {
    let plan = ctx.config.settle.clone().unwrap_or_default().plan()?;
    if ctx.drive.eps_p != 0.0 {
        return Err(CliError::Config("settle needs a zero probe drive".into()));
    }
    let opts = SettleOptions {
        tol: plan.tol,
        t_end: plan.t_end,
    };
    if plan.ensemble > 0 {
        return settle_ensemble(ctx, &plan, &opts);
    }
    // `outcome` is None when integrating to t_end without a settle check.
    let (traj, outcome) = if plan.stop_on_settle {
        let (traj, res) = dynamics::settle_sampled(&ctx.sys, &ctx.drive, plan.initial, &opts, &plan.samples)?;
        (traj, Some(res))
    } else {
        let traj = dynamics::integrate_mean_field(
            &ctx.sys,
            &ctx.drive,
            plan.initial,
            plan.t_end,
            plan.tol,
            &plan.samples,
        )?;
        (traj, None)
    };
    let mut rows: Vec<(f64, Complex64, Complex64)> = (0..traj.times.len())
        .map(|i| (traj.times[i], traj.a[i], traj.b[i]))
        .collect();
    // A run that stops early ends with its final state.
    if rows.last().is_none_or(|r| r.0 < traj.final_time) {
        rows.push((traj.final_time, traj.final_state.0, traj.final_state.1));
    }
    let mut table = Table::new(&["t_s", "re_a", "im_a", "re_b", "im_b"]);
    for (t, a, b) in &rows {
        table.row(vec![
            output::num(*t),
            output::num(a.re),
            output::num(a.im),
            output::num(b.re),
            output::num(b.im),
        ]);
    }
    let (settled, error) = match outcome {
        Some(Ok(o)) => (Some(o), None),
        Some(Err(e)) => (None, Some(e)),
        None => (None, None),
    };
    let report = SettleReport {
        converged: traj.converged,
        final_time_s: traj.final_time,
        criterion: traj.criterion,
        final_state: traj.final_state,
        outcome: settled.clone(),
        error: error.as_ref().map(|e| e.to_string()),
    };
    ctx.out.dataset("trajectory", &table, &rows)?;
    ctx.out.json("settle", &report)?;
    if let Some(e) = error {
        return Err(e.into());
    }
    match settled {
        Some(o) => println!("settled on root {} at t = {:?} s", o.root_index, o.t_settled),
        None => println!("integrated to t = {:?} s", traj.final_time),
    }
    Ok(())
}

fn settle_ensemble(ctx: &Context, plan: &config::SettlePlan, opts: &SettleOptions) -> CliResult<()> {
    let initials = dynamics::random_initial_states(&ctx.sys, &ctx.drive, plan.ensemble, plan.seed)?;
    let results = dynamics::settle_ensemble(&ctx.sys, &ctx.drive, &initials, opts);
    let roots = root_rows(&ctx.sys, &ctx.drive)?;
    let mut histogram = vec![0; roots.len()];
    let mut failures = 0;
    let mut not_converged = 0;
    let mut table = Table::new(&[
        "run", "re_a0", "im_a0", "re_b0", "im_b0", "root_index", "distance", "t_settled_s",
    ]);
    let mut rows = Vec::with_capacity(results.len());
    for (run, (init, res)) in initials.iter().zip(&results).enumerate() {
        let (root_index, distance, t_settled, error) = match res {
            Ok(o) => {
                histogram[o.root_index] += 1;
                (Some(o.root_index), Some(o.distance), Some(o.t_settled), None)
            }
            Err(e) => {
                failures += 1;
                if matches!(e, optokerr::Error::NotConverged { .. }) {
                    not_converged += 1;
                }
                (None, None, None, Some(e.to_string()))
            }
        };
        let opt = |v: Option<String>| v.unwrap_or_default();
        table.row(vec![
            run.to_string(),
            output::num(init.0.re),
            output::num(init.0.im),
            output::num(init.1.re),
            output::num(init.1.im),
            opt(root_index.map(|i| i.to_string())),
            opt(distance.map(output::num)),
            opt(t_settled.map(output::num)),
        ]);
        rows.push(EnsembleRow {
            run,
            initial_a: init.0,
            initial_b: init.1,
            root_index,
            distance,
            t_settled_s: t_settled,
            error,
        });
    }
    let report = EnsembleReport {
        runs: rows.len(),
        seed: plan.seed,
        roots,
        histogram,
        failures,
    };
    ctx.out.dataset("ensemble", &table, &rows)?;
    ctx.out.json("ensemble_summary", &report)?;
    println!("runs {}, histogram {:?}, failures {}", report.runs, report.histogram, failures);
    if not_converged > 0 {
        return Err(CliError::NotConverged(format!("{not_converged} of {} runs did not settle", report.runs)));
    }
    if failures > 0 {
        return Err(CliError::Solver(optokerr::Error::Invalid(format!(
            "{failures} of {} runs ended off every steady root",
            report.runs
        ))));
    }
    Ok(())
}
