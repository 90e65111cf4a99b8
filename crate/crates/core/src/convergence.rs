//! Convergence experiments for the oscillatory front problem.
//!
//! For every `eps` a square window of one large environment is mapped onto
//! `x = eps (y - center)`, the oscillatory equation is solved on it, and the
//! result is compared with the homogenized limit on the ball `B_R`:
//!
//! * locally uniformly on the δ-interior of each component, where the limit
//!   of the component is `ū_i` (the effective solution for a spanning
//!   component, `u0` for a bounded one);
//! * weakly, through pairings `∫∫ (u^eps - ū) φ` against a fixed bank of
//!   Gaussian test functions, where `ū = θ0 u0 + Σ θ_i ū_i`.
//!
//! Windows carry a margin of `max|a| T` around `B_R` so that the constant
//! ghost cells at the window edge cannot influence the measured region.

use std::path::Path;

use rayon::prelude::*;

use crate::effective::{EffectiveHamiltonian, HamiltonianKind};
use crate::env_media::EnvironmentSample;
use crate::error::{Error, Result};
use crate::evolution::{
    solve_effective_hopflax, solve_oscillatory, solve_stationary, Boundary, EvolutionConfig,
    GridFunction, InitialData, StationaryOptions, XGrid, MAX_CFL,
};
use crate::topology::{estimate_theta, ComponentLabeling, Sign};

pub const DEFAULT_EPSILONS: [f64; 3] = [0.25, 0.125, 0.0625];

/// Spanning components whose dropped volume exceeds this trigger a coverage
/// warning.
pub const COVERAGE_WARNING: f64 = 0.05;

/// Gaussian bump `exp(-|x - center|^2 / width^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunction {
    pub center: [f64; 2],
    pub width: f64,
}

impl TestFunction {
    pub fn eval(&self, x: [f64; 2]) -> f64 {
        let r2 = (x[0] - self.center[0]).powi(2) + (x[1] - self.center[1]).powi(2);
        (-r2 / (self.width * self.width)).exp()
    }
}

/// The fixed bank: three centers times two widths.
pub fn test_function_bank() -> Vec<TestFunction> {
    let centers = [[0.0, 0.0], [0.45, 0.0], [-0.25, 0.4]];
    let widths = [0.2, 0.4];
    centers
        .iter()
        .flat_map(|&center| {
            widths
                .iter()
                .map(move |&width| TestFunction { center, width })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LabOptions {
    /// Radius `R` of the measured ball.
    pub radius: f64,
    pub t_final: f64,
    /// Equally spaced comparison times in `(0, T]`.
    pub snapshots: usize,
    pub cfl: f64,
}

impl Default for LabOptions {
    fn default() -> Self {
        Self {
            radius: 1.0,
            t_final: 0.5,
            snapshots: 4,
            cfl: MAX_CFL,
        }
    }
}

impl LabOptions {
    fn validate(&self, epsilons: &[f64]) -> Result<()> {
        if !(self.radius > 0.0 && self.t_final > 0.0 && self.snapshots > 0) {
            return Err(Error::Configuration(
                "radius, final time and snapshot count must be positive".into(),
            ));
        }
        if epsilons.is_empty() || epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Configuration(
                "epsilons must be nonempty and strictly decreasing".into(),
            ));
        }
        if epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(Error::Configuration("epsilons must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// Cells per side of the environment window needed at scale `eps`.
pub fn window_cells(env: &EnvironmentSample, eps: f64, opts: &LabOptions) -> usize {
    let h = env.shape.h * eps;
    let half = opts.radius + env.max_abs_velocity() * opts.t_final + 2.0 * h;
    let n = (2.0 * half / h).ceil() as usize;
    n + n % 2
}

/// One oscillatory solve on an `eps`-window.
#[derive(Clone, Debug)]
pub struct WindowRun {
    pub eps: f64,
    /// Row/column of the window's first cell in the parent environment.
    pub origin: (usize, usize),
    pub grid: XGrid,
    pub states: Vec<GridFunction>,
    pub warnings: Vec<String>,
}

impl WindowRun {
    /// Parent cell of window cell `i`.
    pub fn parent_cell(&self, parent: &EnvironmentSample, i: usize) -> usize {
        let (r, c) = self.grid.shape.coords(i);
        parent.shape.index(self.origin.0 + r, self.origin.1 + c)
    }

    /// Window cells inside the closed ball `B_R`.
    pub fn ball_cells(&self, radius: f64) -> Vec<usize> {
        (0..self.grid.shape.len())
            .filter(|&i| {
                let x = self.grid.point(i);
                x[0].hypot(x[1]) <= radius
            })
            .collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }
}

/// Solves the oscillatory equation on the centered window of `env` that
/// covers `B_R` plus the propagation margin.
pub fn run_window(
    env: &EnvironmentSample,
    u0: &InitialData,
    eps: f64,
    opts: &LabOptions,
) -> Result<WindowRun> {
    let n = window_cells(env, eps, opts);
    if n > env.shape.rows || n > env.shape.cols {
        return Err(Error::Configuration(format!(
            "eps = {eps} needs a {n}-cell window but the environment is {}x{}",
            env.shape.rows, env.shape.cols
        )));
    }
    let origin = ((env.shape.rows - n) / 2, (env.shape.cols - n) / 2);
    let window = env.window(origin, n, n)?;
    let grid = XGrid::for_env(&window.shape, eps)?;
    let cfg = EvolutionConfig {
        cfl: opts.cfl,
        boundary: Boundary::Extrapolate,
        t_final: opts.t_final,
        snapshots: opts.snapshots,
    };
    let traj = solve_oscillatory(&window, &u0.sample(&grid), eps, &cfg)?;
    Ok(WindowRun {
        eps,
        origin,
        grid,
        states: traj.snapshots,
        warnings: traj.warnings,
    })
}

fn sign_of(h: &EffectiveHamiltonian) -> Option<Sign> {
    match h.kind {
        HamiltonianKind::Convex => Some(Sign::Positive),
        HamiltonianKind::Concave => Some(Sign::Negative),
        HamiltonianKind::Zero => None,
    }
}

/// Errors of one component class across the `eps` sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentErrors {
    /// `spanning+`, `spanning-` or `bounded`.
    pub name: String,
    /// `sup |u^eps - ū_i|` over `U^δ_{i,eps} ∩ B_R` and all comparison times.
    pub sup_errors: Vec<f64>,
    /// For a spanning component, `min s (u^eps - ū_i)` over the unrestricted
    /// `U_{i,eps} ∩ B_R` with `s = +1` (expanding) or `-1` (contracting).
    /// Should be bounded below by a small negative tolerance.
    pub one_sided: Vec<Option<f64>>,
    /// Cells counted in the sup, per `eps`.
    pub cells: Vec<usize>,
}

impl ComponentErrors {
    pub fn decreasing(&self) -> bool {
        strictly_decreasing(&self.sup_errors)
    }
}

pub fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.len() >= 2 && xs.windows(2).all(|w| w[1] < w[0])
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalUniformReport {
    pub epsilons: Vec<f64>,
    pub delta: f64,
    pub components: Vec<ComponentErrors>,
    pub warnings: Vec<String>,
}

/// Local uniform comparison on one environment. `effective` holds the
/// Hamiltonians of the spanning components (matched by sign to the largest
/// spanning component of the labeling); every bounded component is compared
/// with `u0`.
pub fn local_uniform_test(
    env: &EnvironmentSample,
    labeling: &ComponentLabeling,
    effective: &[EffectiveHamiltonian],
    u0: &InitialData,
    epsilons: &[f64],
    delta: f64,
    opts: &LabOptions,
) -> Result<LocalUniformReport> {
    opts.validate(epsilons)?;
    if labeling.shape != env.shape {
        return Err(Error::Parameter(
            "labeling does not match the environment".into(),
        ));
    }
    if !(delta >= 0.0) {
        return Err(Error::Parameter(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    let mut classes: Vec<(String, Option<u32>, Option<&EffectiveHamiltonian>)> = Vec::new();
    for h in effective {
        let Some(sign) = sign_of(h) else { continue };
        let comp = labeling.largest_spanning(sign).ok_or_else(|| {
            Error::Structural(format!(
                "no spanning {} component for the supplied Hamiltonian",
                sign.as_str()
            ))
        })?;
        let name = match sign {
            Sign::Positive => "spanning+",
            Sign::Negative => "spanning-",
        };
        classes.push((name.to_string(), Some(comp.id), Some(h)));
    }
    classes.push(("bounded".to_string(), None, None));
    let bounded: Vec<bool> = labeling.components.iter().map(|c| !c.spanning).collect();

    let mut out: Vec<ComponentErrors> = classes
        .iter()
        .map(|(name, _, _)| ComponentErrors {
            name: name.clone(),
            sup_errors: Vec::new(),
            one_sided: Vec::new(),
            cells: Vec::new(),
        })
        .collect();
    let mut warnings = Vec::new();

    for &eps in epsilons {
        let run = run_window(env, u0, eps, opts)?;
        warnings.extend(run.warnings.iter().cloned());
        let ball = run.ball_cells(opts.radius);
        for ((_, id, h), errs) in classes.iter().zip(out.iter_mut()) {
            let limits: Vec<GridFunction> = match h {
                Some(h) => run
                    .states
                    .iter()
                    .map(|s| solve_effective_hopflax(h, u0, &run.grid, s.t))
                    .collect::<Result<_>>()?,
                None => vec![u0.sample(&run.grid); run.states.len()],
            };
            let sign = h
                .and_then(sign_of)
                .map(|s| if s == Sign::Positive { 1.0 } else { -1.0 });
            let mut sup: f64 = 0.0;
            let mut low = f64::INFINITY;
            let mut count = 0usize;
            for &i in &ball {
                let parent = run.parent_cell(env, i);
                let label = labeling.labels[parent];
                let member = match id {
                    Some(id) => label == *id,
                    None => label != 0 && bounded[label as usize - 1],
                };
                if !member {
                    continue;
                }
                let interior = env.a_field[parent].abs() > delta;
                count += usize::from(interior);
                for (state, limit) in run.states.iter().zip(&limits) {
                    let diff = state.values[i] - limit.values[i];
                    if interior {
                        sup = sup.max(diff.abs());
                    }
                    if let Some(s) = sign {
                        low = low.min(s * diff);
                    }
                }
            }
            errs.sup_errors.push(sup);
            errs.one_sided.push(sign.map(|_| low));
            errs.cells.push(count);
        }
    }
    Ok(LocalUniformReport {
        epsilons: epsilons.to_vec(),
        delta,
        components: out,
        warnings,
    })
}

/// The weak limit `θ0 u0 + Σ θ_i ū_i`, with every bounded component and the
/// zero set lumped into the `u0` weight.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitBlend {
    pub u0_weight: f64,
    pub parts: Vec<(f64, EffectiveHamiltonian)>,
    pub warnings: Vec<String>,
}

impl LimitBlend {
    /// Ensemble volume fractions of the largest spanning component of each
    /// sign that has a Hamiltonian in `effective`. Spanning volume below
    /// `theta_floor` is dropped into the `u0` weight.
    pub fn from_ensemble(
        labelings: &[ComponentLabeling],
        effective: &[EffectiveHamiltonian],
        theta_floor: f64,
    ) -> Result<Self> {
        if labelings.is_empty() {
            return Err(Error::InsufficientData("empty ensemble".into()));
        }
        let mut parts = Vec::new();
        let mut warnings = Vec::new();
        let mut dropped = 0.0;
        for h in effective {
            let Some(sign) = sign_of(h) else { continue };
            let mut theta = 0.0;
            for lab in labelings {
                let fr = estimate_theta(lab);
                if !fr.counts_consistent() {
                    return Err(Error::Numerical(
                        "volume fractions do not sum to one".into(),
                    ));
                }
                if let Some(c) = lab.largest_spanning(sign) {
                    theta += fr.theta[&c.id];
                }
            }
            theta /= labelings.len() as f64;
            if theta < theta_floor {
                dropped += theta;
            } else {
                parts.push((theta, h.clone()));
            }
        }
        if dropped > COVERAGE_WARNING {
            warnings.push(format!(
                "theta floor {theta_floor} dropped spanning components covering {dropped:.3} of the volume"
            ));
        }
        let kept: f64 = parts.iter().map(|(t, _)| t).sum();
        if !(kept <= 1.0 + 1e-12) {
            return Err(Error::Numerical(format!(
                "volume fractions sum to {kept} > 1"
            )));
        }
        Ok(Self {
            u0_weight: 1.0 - kept,
            parts,
            warnings,
        })
    }

    /// Trivial blend `ū = u0`.
    pub fn trapped() -> Self {
        Self {
            u0_weight: 1.0,
            parts: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.u0_weight + self.parts.iter().map(|(t, _)| t).sum::<f64>()
    }

    /// `ū(·, t)` on `grid`.
    pub fn evaluate(&self, u0: &InitialData, grid: &XGrid, t: f64) -> Result<Vec<f64>> {
        let mut out: Vec<f64> = u0
            .sample(grid)
            .values
            .iter()
            .map(|v| self.u0_weight * v)
            .collect();
        for (theta, h) in &self.parts {
            let ubar = solve_effective_hopflax(h, u0, grid, t)?;
            for (o, v) in out.iter_mut().zip(&ubar.values) {
                *o += theta * v;
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakStarReport {
    pub epsilons: Vec<f64>,
    pub bank: Vec<TestFunction>,
    pub seeds: Vec<u64>,
    /// Signed pairings `[seed][eps][test function]`.
    pub pairings: Vec<Vec<Vec<f64>>>,
    /// Seed average of `|pairing|`, `[eps][test function]`.
    pub mean_abs: Vec<Vec<f64>>,
    /// `∫∫ φ` over `B_R x (0, T)`, per test function.
    pub phi_mass: Vec<f64>,
    pub warnings: Vec<String>,
}

impl WeakStarReport {
    /// Per test function: averaged pairing error strictly decreasing in eps.
    pub fn decreasing(&self) -> Vec<bool> {
        (0..self.bank.len())
            .map(|k| {
                strictly_decreasing(&self.mean_abs.iter().map(|row| row[k]).collect::<Vec<_>>())
            })
            .collect()
    }

    pub fn all_decreasing(&self) -> bool {
        self.decreasing().iter().all(|&d| d)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "eps",
            "test_function",
            "center_x",
            "center_y",
            "width",
            "mean_abs_pairing",
            "phi_mass",
        ])?;
        for (e, eps) in self.epsilons.iter().enumerate() {
            for (k, phi) in self.bank.iter().enumerate() {
                w.write_record([
                    eps.to_string(),
                    k.to_string(),
                    phi.center[0].to_string(),
                    phi.center[1].to_string(),
                    phi.width.to_string(),
                    self.mean_abs[e][k].to_string(),
                    self.phi_mass[k].to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Trapezoid weights on `0 = t_0 < t_1 < ... < t_K`, dropping `t_0` (where
/// every solution equals `u0`).
fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; times.len()];
    let mut prev = 0.0;
    for k in 0..times.len() {
        let dt = times[k] - prev;
        w[k] += 0.5 * dt;
        if k > 0 {
            w[k - 1] += 0.5 * dt;
        }
        prev = times[k];
    }
    w
}

/// `∫∫ (u^eps - ū) φ` for each test function on one window run.
pub fn pairings(
    run: &WindowRun,
    limit: &[Vec<f64>],
    bank: &[TestFunction],
    radius: f64,
) -> Vec<f64> {
    let ball = run.ball_cells(radius);
    let weights = trapezoid_weights(&run.times());
    let area = run.grid.h() * run.grid.h();
    bank.iter()
        .map(|phi| {
            let mut total = 0.0;
            for &i in &ball {
                let f = phi.eval(run.grid.point(i));
                for (k, state) in run.states.iter().enumerate() {
                    total += weights[k] * (state.values[i] - limit[k][i]) * f;
                }
            }
            total * area
        })
        .collect()
}

/// Weak pairing errors averaged over an ensemble of environments.
pub fn weak_star_test(
    ensemble: &[EnvironmentSample],
    blend: &LimitBlend,
    u0: &InitialData,
    epsilons: &[f64],
    bank: &[TestFunction],
    opts: &LabOptions,
) -> Result<WeakStarReport> {
    opts.validate(epsilons)?;
    if ensemble.is_empty() || bank.is_empty() {
        return Err(Error::InsufficientData(
            "need at least one environment and one test function".into(),
        ));
    }
    if (blend.total_weight() - 1.0).abs() > 1e-12 {
        return Err(Error::Numerical(format!(
            "limit weights sum to {}",
            blend.total_weight()
        )));
    }
    let mut warnings = blend.warnings.clone();
    // the limit depends on eps only through the grid
    let mut limits = Vec::with_capacity(epsilons.len());
    let mut phi_mass = vec![0.0; bank.len()];
    for (e, &eps) in epsilons.iter().enumerate() {
        let n = window_cells(&ensemble[0], eps, opts);
        if ensemble
            .iter()
            .any(|env| window_cells(env, eps, opts) != n || env.shape.h != ensemble[0].shape.h)
        {
            return Err(Error::Parameter(
                "ensemble members need equal cell size and velocity bound".into(),
            ));
        }
        let grid = XGrid::for_env(
            &crate::grid::GridShape::square(n, ensemble[0].shape.h)?,
            eps,
        )?;
        let times: Vec<f64> = (1..=opts.snapshots)
            .map(|k| opts.t_final * k as f64 / opts.snapshots as f64)
            .collect();
        let ubar: Vec<Vec<f64>> = times
            .iter()
            .map(|&t| blend.evaluate(u0, &grid, t))
            .collect::<Result<_>>()?;
        if e + 1 == epsilons.len() {
            let area = grid.h() * grid.h();
            let ball: Vec<usize> = (0..grid.shape.len())
                .filter(|&i| grid.point(i)[0].hypot(grid.point(i)[1]) <= opts.radius)
                .collect();
            for (k, phi) in bank.iter().enumerate() {
                let s: f64 = ball.iter().map(|&i| phi.eval(grid.point(i))).sum();
                phi_mass[k] = s * area * opts.t_final;
            }
        }
        limits.push(ubar);
    }
    let per_seed: Vec<(Vec<Vec<f64>>, Vec<String>)> = ensemble
        .par_iter()
        .map(|env| {
            let mut rows = Vec::with_capacity(epsilons.len());
            let mut warn = Vec::new();
            for (e, &eps) in epsilons.iter().enumerate() {
                let run = run_window(env, u0, eps, opts)?;
                warn.extend(run.warnings.iter().cloned());
                rows.push(pairings(&run, &limits[e], bank, opts.radius));
            }
            Ok((rows, warn))
        })
        .collect::<Result<_>>()?;
    let mut mean_abs = vec![vec![0.0; bank.len()]; epsilons.len()];
    let mut all = Vec::with_capacity(per_seed.len());
    for (rows, warn) in per_seed {
        for (e, row) in rows.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                mean_abs[e][k] += v.abs() / ensemble.len() as f64;
            }
        }
        warnings.extend(warn);
        all.push(rows);
    }
    warnings.sort();
    warnings.dedup();
    Ok(WeakStarReport {
        epsilons: epsilons.to_vec(),
        bank: bank.to_vec(),
        seeds: ensemble.iter().map(|e| e.seed).collect(),
        pairings: all,
        mean_abs,
        phi_mass,
        warnings,
    })
}

/// One stationary solve on an `eps`-window.
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryRow {
    pub p: [f64; 2],
    pub eps: f64,
    /// `H̄(p)` of the spanning component.
    pub hbar: f64,
    /// `sup |w^eps + H̄(p)|` over `U^δ_eps ∩ B_R` of the spanning component.
    pub sup_error: f64,
    pub mean_error: f64,
    pub cells: usize,
    /// `‖w^eps‖_∞ ≤ ‖a‖_∞ |p|` on the whole window.
    pub bound_holds: bool,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StationaryReport {
    pub delta: f64,
    pub rows: Vec<StationaryRow>,
}

impl StationaryReport {
    /// Sup errors over the eps sequence for slope `p`.
    pub fn sup_sequence(&self, p: [f64; 2]) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.p == p)
            .map(|r| r.sup_error)
            .collect()
    }

    pub fn all_bounds_hold(&self) -> bool {
        self.rows.iter().all(|r| r.bound_holds)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "p_x",
            "p_y",
            "eps",
            "hbar",
            "sup_error",
            "mean_error",
            "cells",
            "bound_holds",
            "iterations",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.p[0].to_string(),
                r.p[1].to_string(),
                r.eps.to_string(),
                r.hbar.to_string(),
                r.sup_error.to_string(),
                r.mean_error.to_string(),
                r.cells.to_string(),
                r.bound_holds.to_string(),
                r.iterations.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Stationary problem `w + a(x/eps)|p + Dw| = 0` on centered windows of
/// half width `radius + margin` with constant ghost cells, compared with
/// `-H̄(p)` on the δ-interior of the largest spanning component inside `B_R`.
#[allow(clippy::too_many_arguments)]
pub fn stationary_test(
    env: &EnvironmentSample,
    labeling: &ComponentLabeling,
    effective: &EffectiveHamiltonian,
    slopes: &[[f64; 2]],
    epsilons: &[f64],
    delta: f64,
    radius: f64,
    margin: f64,
) -> Result<StationaryReport> {
    let sign = sign_of(effective)
        .ok_or_else(|| Error::Structural("stationary test needs a spanning component".into()))?;
    let comp = labeling
        .largest_spanning(sign)
        .ok_or_else(|| Error::Structural(format!("no spanning {} component", sign.as_str())))?;
    let mut rows = Vec::new();
    for &p in slopes {
        let hbar = effective.eval(p);
        for &eps in epsilons {
            let h = env.shape.h * eps;
            let mut n = (2.0 * (radius + margin) / h).ceil() as usize;
            n += n % 2;
            if n > env.shape.rows || n > env.shape.cols {
                return Err(Error::Configuration(format!(
                    "eps = {eps} needs a {n}-cell window but the environment is {}x{}",
                    env.shape.rows, env.shape.cols
                )));
            }
            let origin = ((env.shape.rows - n) / 2, (env.shape.cols - n) / 2);
            let window = env.window(origin, n, n)?;
            let sol = solve_stationary(
                &window,
                p,
                eps,
                &StationaryOptions {
                    boundary: Boundary::Extrapolate,
                    ..StationaryOptions::default()
                },
            )?;
            let (mut sup, mut sum, mut count) = (0.0f64, 0.0, 0usize);
            for i in 0..window.shape.len() {
                let x = sol.w.grid.point(i);
                if x[0].hypot(x[1]) > radius {
                    continue;
                }
                let (r, c) = window.shape.coords(i);
                let parent = env.shape.index(origin.0 + r, origin.1 + c);
                if labeling.labels[parent] != comp.id || env.a_field[parent].abs() <= delta {
                    continue;
                }
                let e = (sol.w.values[i] + hbar).abs();
                sup = sup.max(e);
                sum += e;
                count += 1;
            }
            rows.push(StationaryRow {
                p,
                eps,
                hbar,
                sup_error: sup,
                mean_error: if count > 0 {
                    sum / count as f64
                } else {
                    f64::NAN
                },
                cells: count,
                bound_holds: sol.bound_holds(),
                iterations: sol.iterations,
            });
        }
    }
    Ok(StationaryReport { delta, rows })
}

/// Local uniform and weak results of one experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub epsilons: Vec<f64>,
    pub local: Option<LocalUniformReport>,
    pub weak: Option<WeakStarReport>,
    /// `(u0 weight, spanning weights)` used to form the weak limit.
    pub theta: (f64, Vec<f64>),
    /// Seeds excluded for lack of a spanning component.
    pub excluded_seeds: Vec<u64>,
}

impl ConvergenceReport {
    pub fn verdicts(&self) -> Vec<(String, bool)> {
        let mut v = Vec::new();
        if let Some(local) = &self.local {
            for c in &local.components {
                if c.cells.iter().all(|&n| n > 0) {
                    v.push((format!("local_uniform_{}", c.name), c.decreasing()));
                }
            }
        }
        if let Some(weak) = &self.weak {
            v.push(("weak_star".to_string(), weak.all_decreasing()));
        }
        v
    }

    pub fn write_local_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["component", "eps", "sup_error", "one_sided_min", "cells"])?;
        if let Some(local) = &self.local {
            for c in &local.components {
                for (e, eps) in local.epsilons.iter().enumerate() {
                    w.write_record([
                        c.name.clone(),
                        eps.to_string(),
                        c.sup_errors[e].to_string(),
                        c.one_sided[e].map_or(String::new(), |x| x.to_string()),
                        c.cells[e].to_string(),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env_media::{gen_checkerboard, EnvironmentSample};
    use crate::grid::GridShape;
    use crate::topology::label_components;

    #[test]
    fn bank_has_six_functions() {
        let bank = test_function_bank();
        assert_eq!(bank.len(), 6);
        assert!(bank.iter().all(|f| (f.eval(f.center) - 1.0).abs() < 1e-15));
    }

    #[test]
    fn trapezoid_integrates_linear_functions() {
        let t = [0.25, 0.5, 0.75, 1.0];
        let w = trapezoid_weights(&t);
        // the weight of t = 0 is dropped
        assert!((w.iter().sum::<f64>() - 0.875).abs() < 1e-15);
        let integral: f64 = w.iter().zip(&t).map(|(w, t)| w * t).sum();
        assert!((integral - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_medium_matches_effective_solution() {
        let env = EnvironmentSample::constant(GridShape::square(512, 0.125).unwrap(), 0.5).unwrap();
        let lab = label_components(&env);
        let h = EffectiveHamiltonian::isotropic(0.5, 256).unwrap();
        let u0 = InitialData::Cone {
            center: [0.0, 0.0],
            slope: 1.0,
        };
        let opts = LabOptions::default();
        let rep = local_uniform_test(&env, &lab, &[h], &u0, &DEFAULT_EPSILONS, 0.1, &opts).unwrap();
        let span = &rep.components[0];
        for (e, &eps) in DEFAULT_EPSILONS.iter().enumerate() {
            let hx = 0.125 * eps;
            assert!(
                span.sup_errors[e] <= 3.0 * hx,
                "eps {eps}: {}",
                span.sup_errors[e]
            );
        }
    }

    #[test]
    fn checkerboard_stays_near_initial_data() {
        let env = gen_checkerboard(1.0, 400, 0.125).unwrap();
        let lab = label_components(&env);
        let u0 = InitialData::Cone {
            center: [0.0, 0.0],
            slope: 1.0,
        };
        let opts = LabOptions::default();
        let rep = local_uniform_test(&env, &lab, &[], &u0, &DEFAULT_EPSILONS, 0.05, &opts).unwrap();
        let b = &rep.components[0];
        assert_eq!(b.name, "bounded");
        assert!(b.decreasing(), "{:?}", b.sup_errors);
    }
}
