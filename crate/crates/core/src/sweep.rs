//! Parameter sweeps: phonon-vs-photon curves, power sweeps with branch
//! tracking and fold localization, detuning robustness of the upper branch,
//! and the zero-absorption shift against g_ck.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DriveParams, SystemParams};
use crate::response::{ProbeResponse, ResponseOptions};
use crate::stability::{classify, Verdict};
use crate::steadystate::{phonon_of_photon, steady_states};

/// Consecutive points of one branch differ by less than this (relative).
pub const LINK_TOL: f64 = 0.1;
/// Folds are bisected until the bracket is this narrow (relative in power).
pub const FOLD_REL_TOL: f64 = 1e-4;
/// Default power grid: 2001 points over [0, 50 nW].
pub const DEFAULT_MAX_POWER: f64 = 50e-9;
pub const DEFAULT_POWER_POINTS: usize = 2001;

fn check_sorted(name: &str, v: &[f64], nonnegative: bool) -> Result<()> {
    if v.iter().any(|x| !x.is_finite() || (nonnegative && *x < 0.0)) {
        return Err(Error::Invalid(format!("{name} must be finite and nonnegative")));
    }
    if v.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid(format!("{name} must be sorted ascending")));
    }
    Ok(())
}

/// Evenly spaced grid of `n` points over [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PhononCurve {
    pub g_ck: f64,
    pub x: Vec<f64>,
    /// |B₀|² without cross-Kerr coupling.
    pub n_phonon_uncoupled: Vec<f64>,
    /// |B₀|² at `g_ck`.
    pub n_phonon: Vec<f64>,
}

/// Mean phonon number against photon number with and without the
/// cross-Kerr shift.
pub fn phonon_photon_curve(sys: &SystemParams, x_grid: &[f64]) -> Result<PhononCurve> {
    check_sorted("photon grid", x_grid, true)?;
    let bare = sys.with_g_ck(0.0)?;
    Ok(PhononCurve {
        g_ck: sys.g_ck(),
        x: x_grid.to_vec(),
        n_phonon_uncoupled: x_grid.iter().map(|&x| phonon_of_photon(x, &bare)).collect(),
        n_phonon: x_grid.iter().map(|&x| phonon_of_photon(x, sys)).collect(),
    })
}

impl PhononCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "photon_number,n_phonon_gck0,n_phonon_gck")?;
        for i in 0..self.x.len() {
            writeln!(
                w,
                "{:?},{:?},{:?}",
                self.x[i], self.n_phonon_uncoupled[i], self.n_phonon[i]
            )?;
        }
        Ok(())
    }
}

/// Roots and verdicts at one sweep point.
#[derive(Debug, Clone, PartialEq)]
struct Slice {
    power: f64,
    x: Vec<f64>,
    verdicts: Vec<Verdict>,
}

fn slice_at(sys: &SystemParams, delta_a: f64, power: f64) -> Result<Slice> {
    let drive = DriveParams::from_powers(sys, delta_a, power, 0.0, 0.0)?;
    let states = steady_states(sys, delta_a, drive.eps_c)?;
    let verdicts = states
        .iter()
        .map(|s| classify(s, sys).map(|r| r.verdict))
        .collect::<Result<_>>()?;
    Ok(Slice {
        power,
        x: states.iter().map(|s| s.n_photon).collect(),
        verdicts,
    })
}

fn root_count(sys: &SystemParams, delta_a: f64, power: f64) -> Result<usize> {
    let drive = DriveParams::from_powers(sys, delta_a, power, 0.0, 0.0)?;
    Ok(steady_states(sys, delta_a, drive.eps_c)?.len())
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BranchPoint {
    pub power: f64,
    pub x: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SweepBranch {
    pub id: usize,
    pub points: Vec<BranchPoint>,
}

impl SweepBranch {
    pub fn stable(&self) -> bool {
        self.points.first().is_some_and(|p| p.verdict.is_stable())
    }
}

/// Power where the number of steady states changes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FoldPoint {
    pub power: f64,
    /// Root count just below and just above `power`.
    pub count_below: usize,
    pub count_above: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PowerSweep {
    pub delta_a: f64,
    pub g_ck: f64,
    /// Every evaluated power: the input grid plus points inserted to
    /// resolve fast-moving roots.
    pub powers: Vec<f64>,
    /// Root count at each power.
    pub counts: Vec<usize>,
    pub branches: Vec<SweepBranch>,
    pub folds: Vec<FoldPoint>,
}

fn rel_distance(p: f64, q: f64) -> f64 {
    let s = p.max(q);
    if s == 0.0 {
        0.0
    } else {
        (p - q).abs() / s
    }
}

/// Largest relative move of a root between two slices: order-wise when the
/// counts agree, otherwise from each root of the smaller slice to its
/// nearest partner. Zero-drive slices are exempt.
fn max_jump(a: &Slice, b: &Slice) -> f64 {
    if a.power == 0.0 || b.power == 0.0 {
        return 0.0;
    }
    if a.x.len() == b.x.len() {
        return a.x.iter().zip(&b.x).map(|(&p, &q)| rel_distance(p, q)).fold(0.0, f64::max);
    }
    let (small, large) = if a.x.len() < b.x.len() { (a, b) } else { (b, a) };
    small
        .x
        .iter()
        .map(|&p| large.x.iter().map(|&q| rel_distance(p, q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

/// Appends `next` to `seg`, inserting midpoints while a root would move by
/// the link tolerance or more between neighbouring sweep points.
fn subdivide(sys: &SystemParams, delta_a: f64, seg: &mut Vec<Slice>, next: Slice, depth: usize) -> Result<()> {
    let prev = seg.last().expect("segment start");
    let wide = next.power - prev.power > FOLD_REL_TOL * next.power;
    if depth < 40 && wide && max_jump(prev, &next) >= LINK_TOL {
        let mid = slice_at(sys, delta_a, 0.5 * (prev.power + next.power))?;
        subdivide(sys, delta_a, seg, mid, depth + 1)?;
        return subdivide(sys, delta_a, seg, next, depth + 1);
    }
    seg.push(next);
    Ok(())
}

/// Links each slice's roots to the previous slice's by greedy matching on
/// relative distance; returns, for every slice, the branch id of each root.
fn link(slices: &[Slice]) -> Vec<Vec<usize>> {
    let mut ids: Vec<Vec<usize>> = Vec::with_capacity(slices.len());
    let mut next_id = 0;
    for (k, s) in slices.iter().enumerate() {
        let mut cur = vec![usize::MAX; s.x.len()];
        if k > 0 {
            let prev = &slices[k - 1];
            let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
            let undriven = prev.power == 0.0 || s.power == 0.0;
            if undriven && !s.x.is_empty() && !prev.x.is_empty() && prev.verdicts[0] == s.verdicts[0] {
                // the undriven root x = 0 continues into the lowest weak-drive root
                pairs.push((0.0, 0, 0));
            }
            for (i, &xp) in prev.x.iter().enumerate() {
                for (j, &xc) in s.x.iter().enumerate() {
                    // stability changes end a branch like a fold does
                    if prev.verdicts[i] != s.verdicts[j] {
                        continue;
                    }
                    let d = rel_distance(xp, xc);
                    if d < LINK_TOL {
                        pairs.push((d, i, j));
                    }
                }
            }
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            let mut used_prev = vec![false; prev.x.len()];
            for (_, i, j) in pairs {
                if !used_prev[i] && cur[j] == usize::MAX {
                    used_prev[i] = true;
                    cur[j] = ids[k - 1][i];
                }
            }
        }
        for id in cur.iter_mut().filter(|id| **id == usize::MAX) {
            *id = next_id;
            next_id += 1;
        }
        ids.push(cur);
    }
    ids
}

/// Bisects every root-count change inside [lo, hi], recursing when the two
/// halves both change.
fn refine_folds(
    sys: &SystemParams,
    delta_a: f64,
    (lo, n_lo): (f64, usize),
    (hi, n_hi): (f64, usize),
    out: &mut Vec<FoldPoint>,
) -> Result<()> {
    if hi - lo <= FOLD_REL_TOL * hi.abs() {
        out.push(FoldPoint {
            power: 0.5 * (lo + hi),
            count_below: n_lo,
            count_above: n_hi,
        });
        return Ok(());
    }
    let mid = 0.5 * (lo + hi);
    let n_mid = root_count(sys, delta_a, mid)?;
    if n_mid != n_lo {
        refine_folds(sys, delta_a, (lo, n_lo), (mid, n_mid), out)?;
    }
    if n_mid != n_hi {
        refine_folds(sys, delta_a, (mid, n_mid), (hi, n_hi), out)?;
    }
    Ok(())
}

/// Roots and stability at every power (sorted, W), linked into branches,
/// with folds localized by bisection.
pub fn power_sweep(sys: &SystemParams, delta_a: f64, powers: &[f64]) -> Result<PowerSweep> {
    check_sorted("powers", powers, true)?;
    let coarse: Vec<Slice> = powers
        .par_iter()
        .map(|&p| slice_at(sys, delta_a, p))
        .collect::<Result<_>>()?;
    let mut slices = Vec::with_capacity(coarse.len());
    for (k, s) in coarse.into_iter().enumerate() {
        if k > 0 {
            let prev = slices.pop().expect("previous slice");
            let mut seg = vec![prev];
            subdivide(sys, delta_a, &mut seg, s, 0)?;
            slices.extend(seg);
        } else {
            slices.push(s);
        }
    }
    let ids = link(&slices);
    let n_branches = ids.iter().flatten().max().map_or(0, |m| m + 1);
    let mut branches: Vec<SweepBranch> = (0..n_branches)
        .map(|id| SweepBranch {
            id,
            points: Vec::new(),
        })
        .collect();
    for (s, row) in slices.iter().zip(&ids) {
        for ((&x, &verdict), &id) in s.x.iter().zip(&s.verdicts).zip(row) {
            branches[id].points.push(BranchPoint {
                power: s.power,
                x,
                verdict,
            });
        }
    }
    let mut folds = Vec::new();
    for w in slices.windows(2) {
        if w[0].x.len() != w[1].x.len() {
            refine_folds(
                sys,
                delta_a,
                (w[0].power, w[0].x.len()),
                (w[1].power, w[1].x.len()),
                &mut folds,
            )?;
        }
    }
    Ok(PowerSweep {
        delta_a,
        g_ck: sys.g_ck(),
        powers: slices.iter().map(|s| s.power).collect(),
        counts: slices.iter().map(|s| s.x.len()).collect(),
        branches,
        folds,
    })
}

impl PowerSweep {
    /// First power at which more than one steady state exists.
    pub fn onset(&self) -> Option<f64> {
        self.folds
            .iter()
            .find(|f| f.count_above > 1 && f.count_above > f.count_below)
            .map(|f| f.power)
    }

    /// Maximal power intervals (fold to fold) with exactly `n` roots.
    pub fn windows_with(&self, n: usize) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut start: Option<f64> = None;
        if self.counts.first() == Some(&n) {
            start = self.powers.first().copied();
        }
        for f in &self.folds {
            if f.count_above == n && f.count_below != n {
                start = Some(f.power);
            } else if f.count_below == n && f.count_above != n {
                if let Some(s) = start.take() {
                    out.push((s, f.power));
                }
            }
        }
        if let (Some(s), Some(&last)) = (start, self.powers.last()) {
            out.push((s, last));
        }
        out
    }

    /// CSV with one row per (power, branch, root).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "power_w,branch_id,photon_number,stable")?;
        let mut rows: Vec<(f64, usize, f64, bool)> = self
            .branches
            .iter()
            .flat_map(|b| {
                b.points
                    .iter()
                    .map(move |p| (p.power, b.id, p.x, p.verdict.is_stable()))
            })
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (p, id, x, s) in rows {
            writeln!(w, "{p:?},{id},{x:?},{}", u8::from(s))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct UpperEndpoint {
    pub delta_a: f64,
    /// Fold power at which the top branch appears [W].
    pub power: f64,
    /// Photon number of the top root just above that fold.
    pub photon_number: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EndpointShift {
    pub g_ck: f64,
    pub endpoints: [UpperEndpoint; 2],
    /// |x₂ − x₁|/max(x₁, x₂)
    pub photon_shift: f64,
    /// |p₂ − p₁|/max(p₁, p₂)
    pub power_shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct RobustnessReport {
    pub without_ck: EndpointShift,
    pub with_ck: EndpointShift,
    /// The cross-Kerr endpoint moves less in photon number.
    pub ck_more_robust: bool,
}

/// Endpoint of the top branch: the fold at which the root count first
/// reaches its maximum over the sweep.
pub fn upper_endpoint(sys: &SystemParams, delta_a: f64, powers: &[f64]) -> Result<UpperEndpoint> {
    let sweep = power_sweep(sys, delta_a, powers)?;
    let max = sweep.counts.iter().copied().max().unwrap_or(0);
    let fold = sweep
        .folds
        .iter()
        .find(|f| f.count_above == max && f.count_below < max && max > 1)
        .ok_or(Error::NoBistability { delta_a })?;
    // step just past the bracket onto the multi-root side
    let mut p = fold.power * (1.0 + FOLD_REL_TOL);
    let mut x = None;
    for _ in 0..8 {
        let s = slice_at(sys, delta_a, p)?;
        if s.x.len() == max {
            x = s.x.last().copied();
            break;
        }
        p *= 1.0 + FOLD_REL_TOL;
    }
    let photon_number = x.ok_or(Error::NoBistability { delta_a })?;
    Ok(UpperEndpoint {
        delta_a,
        power: fold.power,
        photon_number,
    })
}

fn endpoint_shift(sys: &SystemParams, powers: &[f64], pair: (f64, f64)) -> Result<EndpointShift> {
    let e1 = upper_endpoint(sys, pair.0, powers)?;
    let e2 = upper_endpoint(sys, pair.1, powers)?;
    let rel = |a: f64, b: f64| {
        let s = a.abs().max(b.abs());
        if s == 0.0 {
            0.0
        } else {
            (a - b).abs() / s
        }
    };
    Ok(EndpointShift {
        g_ck: sys.g_ck(),
        endpoints: [e1, e2],
        photon_shift: rel(e1.photon_number, e2.photon_number),
        power_shift: rel(e1.power, e2.power),
    })
}

/// Compares how far the top branch endpoint moves between two detunings
/// with g_ck = 0 and with the device's g_ck (which must be positive).
pub fn detuning_robustness(
    sys: &SystemParams,
    powers: &[f64],
    delta_a_pair: (f64, f64),
) -> Result<RobustnessReport> {
    if !(sys.g_ck() > 0.0) {
        return Err(Error::Invalid("detuning robustness needs g_ck > 0".into()));
    }
    let without_ck = endpoint_shift(&sys.with_g_ck(0.0)?, powers, delta_a_pair)?;
    let with_ck = endpoint_shift(sys, powers, delta_a_pair)?;
    Ok(RobustnessReport {
        without_ck,
        with_ck,
        ck_more_robust: with_ck.photon_shift < without_ck.photon_shift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ShiftRow {
    pub g_ck: f64,
    /// δ_p0 [rad/s]
    pub delta_p0: f64,
    /// δ_p0/ω_m
    pub delta_p0_reduced: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ShiftScan {
    pub rows: Vec<ShiftRow>,
    /// δ_p0 strictly monotone over distinct g_ck values.
    pub monotone: bool,
}

impl ShiftScan {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "g_ck_rad_per_s,delta_p0_rad_per_s,delta_p0_over_omega_m")?;
        for r in &self.rows {
            writeln!(w, "{:?},{:?},{:?}", r.g_ck, r.delta_p0, r.delta_p0_reduced)?;
        }
        Ok(())
    }
}

/// Strict monotonicity (either direction) over distinct abscissae.
pub fn strictly_monotone(pairs: &[(f64, f64)]) -> bool {
    let mut distinct: Vec<(f64, f64)> = Vec::new();
    for &p in pairs {
        if distinct.last().map_or(true, |l| l.0 != p.0) {
            distinct.push(p);
        }
    }
    let inc = distinct.windows(2).all(|w| w[1].1 > w[0].1);
    let dec = distinct.windows(2).all(|w| w[1].1 < w[0].1);
    inc || dec
}

/// Zero-absorption point at each g_ck (sorted), with the rest of the device
/// and drive fixed.
pub fn ck_shift_scan(
    sys: &SystemParams,
    drive: &DriveParams,
    g_ck_values: &[f64],
    opts: &ResponseOptions,
) -> Result<ShiftScan> {
    check_sorted("g_ck values", g_ck_values, false)?;
    let rows: Vec<ShiftRow> = g_ck_values
        .par_iter()
        .map(|&g_ck| {
            let s = sys.with_g_ck(g_ck)?;
            let d = ProbeResponse::new(&s, drive, opts)?.zero_absorption_point()?;
            Ok(ShiftRow {
                g_ck,
                delta_p0: d,
                delta_p0_reduced: d / s.omega_m(),
            })
        })
        .collect::<Result<_>>()?;
    let monotone = strictly_monotone(&rows.iter().map(|r| (r.g_ck, r.delta_p0)).collect::<Vec<_>>());
    Ok(ShiftScan { rows, monotone })
}
