//! Ray averaging of travel times: `m̄₁(y) = lim m(ty, 0) / t`.
//!
//! Each sample gets one travel-time field from the most central δ-interior
//! cell of its largest spanning component. Along every fan direction the
//! field is read at the radii of `t_grid`; points outside `U^δ` are replaced
//! by the linear interpolation between the exit and re-entry points of the
//! ray. Per sample, `v(t)/t` is regressed on `1/t` and the intercept is kept;
//! the ensemble mean and its standard error give `mbar1` and `ci`.

use std::f64::consts::TAU;
use std::path::Path;

use rayon::prelude::*;

use crate::env_media::EnvironmentSample;
use crate::error::{Error, Result};
use crate::grid::bilinear;
use crate::metric::{solve_metric, Method, SolverOptions, TravelTimeField};
use crate::ray::{exit_parameter, supercover, unit};
use crate::stats::{linear_fit, mean, standard_error};
use crate::topology::{central_cell, label_components, ComponentLabeling, Sign};

/// Default Lipschitz slack.
pub const DEFAULT_ETA: f64 = 0.05;
/// Default `δ` as a fraction of `max |a|`.
pub const DEFAULT_DELTA_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct AveragingOptions {
    /// Number of equally spaced fan directions.
    pub directions: usize,
    /// Radii at which the rays are read.
    pub t_grid: Vec<f64>,
    /// Threshold of `U^δ`; `None` uses `0.1 max |a|` over the ensemble.
    pub delta: Option<f64>,
    pub eta: f64,
    pub method: Method,
    /// Phase of the component that is averaged.
    pub sign: Sign,
    pub solver: SolverOptions,
    /// Repeat the estimate at `δ/2` on the same fields.
    pub half_delta_diagnostic: bool,
}

impl Default for AveragingOptions {
    fn default() -> Self {
        Self {
            directions: 64,
            t_grid: vec![4.0, 8.0, 16.0],
            delta: None,
            eta: DEFAULT_ETA,
            method: Method::Fmm,
            sign: Sign::Positive,
            solver: SolverOptions::default(),
            half_delta_diagnostic: true,
        }
    }
}

/// Per-direction estimate of the averaged metric at level one.
#[derive(Clone, Debug, PartialEq)]
pub struct AveragedMetric {
    pub directions: Vec<[f64; 2]>,
    pub angles: Vec<f64>,
    pub mbar1: Vec<f64>,
    pub ci: Vec<f64>,
    pub delta: f64,
    pub eta: f64,
    /// Samples that contributed (had a spanning component).
    pub samples: usize,
    pub t_grid: Vec<f64>,
    /// Usable samples per direction.
    pub counts: Vec<usize>,
    /// Same estimate at `δ/2`, when requested.
    pub half_delta: Option<(Vec<f64>, Vec<f64>)>,
    /// Samples whose chosen `δ` is at or above the component's connectivity
    /// threshold.
    pub delta_above_delta0: usize,
}

impl AveragedMetric {
    /// `m̄_mu = mu m̄₁`.
    pub fn scaled(&self, mu: f64) -> Vec<f64> {
        self.mbar1.iter().map(|m| mu * m).collect()
    }

    /// Directions where `|m(δ) - m(δ/2)| <= 2 (ci(δ) + ci(δ/2))`.
    pub fn delta_stable(&self) -> Option<Vec<bool>> {
        let (half, half_ci) = self.half_delta.as_ref()?;
        Some(
            (0..self.mbar1.len())
                .map(|d| (self.mbar1[d] - half[d]).abs() <= 2.0 * (self.ci[d] + half_ci[d]) + 1e-12)
                .collect(),
        )
    }

    /// CSV `angle,mbar1,ci,delta,mbar1_half_delta,ci_half_delta,samples`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "angle",
            "mbar1",
            "ci",
            "delta",
            "mbar1_half_delta",
            "ci_half_delta",
            "samples",
        ])?;
        for d in 0..self.mbar1.len() {
            let (hm, hc) = match &self.half_delta {
                Some((m, c)) => (m[d].to_string(), c[d].to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([
                self.angles[d].to_string(),
                self.mbar1[d].to_string(),
                self.ci[d].to_string(),
                self.delta.to_string(),
                hm,
                hc,
                self.counts[d].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Angles `2 pi k / n` and their unit vectors.
pub fn fan(n: usize) -> Vec<(f64, [f64; 2])> {
    (0..n)
        .map(|k| {
            let th = TAU * k as f64 / n as f64;
            (th, unit(th))
        })
        .collect()
}

/// Reading of a travel-time field at `origin + t dir`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RayValue {
    /// The point lies in `U^δ`.
    Inside { value: f64 },
    /// The point lies in a gap `(t_lo, t_hi)` of the ray.
    Interpolated {
        value: f64,
        t_lo: f64,
        t_hi: f64,
        alpha: f64,
    },
    /// The ray does not re-enter `U^δ` before the box edge.
    Truncated,
}

impl RayValue {
    pub fn value(&self) -> Option<f64> {
        match *self {
            RayValue::Inside { value } | RayValue::Interpolated { value, .. } => Some(value),
            RayValue::Truncated => None,
        }
    }
}

/// `(1 - alpha) m_lo + alpha m_hi` with `t = (1 - alpha) t_lo + alpha t_hi`.
pub fn gap_interpolate(t: f64, t_lo: f64, m_lo: f64, t_hi: f64, m_hi: f64) -> (f64, f64) {
    let alpha = if t_hi > t_lo {
        ((t - t_lo) / (t_hi - t_lo)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((1.0 - alpha) * m_lo + alpha * m_hi, alpha)
}

/// Two-point extension used when the source itself sits in a gap:
/// `m[i][j] = m(t_i, s_j)` with `i, j = 0` for the exit point and `1` for
/// the re-entry point.
pub fn bilinear_extension(alpha: f64, beta: f64, m: [[f64; 2]; 2]) -> f64 {
    (1.0 - alpha) * ((1.0 - beta) * m[0][0] + beta * m[0][1])
        + alpha * ((1.0 - beta) * m[1][0] + beta * m[1][1])
}

/// Travel time at `origin + t dir`, interpolated across gaps of `U^δ`.
pub fn ray_travel_time(
    field: &TravelTimeField,
    env: &EnvironmentSample,
    labeling: &ComponentLabeling,
    origin: [f64; 2],
    dir: [f64; 2],
    t: f64,
    delta: f64,
) -> Result<RayValue> {
    if !(t >= 0.0) {
        return Err(Error::Parameter(format!(
            "ray parameter must be nonnegative, got {t}"
        )));
    }
    let shape = field.shape;
    let length = exit_parameter(&shape, origin, dir);
    if t > length {
        return Ok(RayValue::Truncated);
    }
    let inside = |cell: usize| {
        labeling.labels[cell] == field.component_id
            && env.a_field[cell].abs() > delta
            && field.values[cell].is_finite()
    };
    let point_value = |s: f64, cell: usize| {
        let p = [origin[0] + s * dir[0], origin[1] + s * dir[1]];
        bilinear(&shape, &field.values, p, inside).unwrap_or(field.values[cell])
    };
    let segs = supercover(&shape, origin, dir, length);
    let Some(k) = segs
        .iter()
        .position(|s| s.t_in <= t && t < s.t_out)
        .or_else(|| segs.iter().rposition(|s| s.t_in <= t))
    else {
        return Ok(RayValue::Truncated);
    };
    // a point on a cell corner counts as inside when any cell there is
    let here: Vec<usize> = (0..segs.len())
        .filter(|&j| segs[j].t_in <= t && t <= segs[j].t_out && inside(segs[j].cell))
        .collect();
    if let Some(&j) = here.first() {
        return Ok(RayValue::Inside {
            value: point_value(t, segs[j].cell),
        });
    }
    let Some(lo) = segs[..k].iter().rposition(|s| inside(s.cell)) else {
        return Ok(RayValue::Truncated);
    };
    let Some(hi) = segs[k..].iter().position(|s| inside(s.cell)).map(|j| j + k) else {
        return Ok(RayValue::Truncated);
    };
    let (t_lo, t_hi) = (segs[lo].t_out, segs[hi].t_in);
    let m_lo = point_value(t_lo, segs[lo].cell);
    let m_hi = point_value(t_hi, segs[hi].cell);
    let (value, alpha) = gap_interpolate(t, t_lo, m_lo, t_hi, m_hi);
    Ok(RayValue::Interpolated {
        value,
        t_lo,
        t_hi,
        alpha,
    })
}

/// Source, field and labeling of one sample.
pub struct SampleField {
    pub labeling: ComponentLabeling,
    pub field: TravelTimeField,
    pub delta0: f64,
}

/// Labels the sample and solves from the most central `U^δ` cell of its
/// largest spanning component of `sign`. `None` without such a component.
pub fn sample_field(
    env: &EnvironmentSample,
    sign: Sign,
    delta: f64,
    method: Method,
    solver: &SolverOptions,
) -> Result<Option<SampleField>> {
    let labeling = label_components(env);
    let Some(comp) = labeling.largest_spanning(sign) else {
        return Ok(None);
    };
    let Some(source) = central_cell(
        &env.shape,
        comp.cells
            .iter()
            .copied()
            .filter(|&i| env.a_field[i].abs() > delta.max(solver.delta_floor)),
    ) else {
        return Ok(None);
    };
    let (id, delta0) = (comp.id, comp.delta0);
    let field = solve_metric(method, env, &labeling, id, source, 1.0, solver)?;
    Ok(Some(SampleField {
        labeling,
        field,
        delta0,
    }))
}

/// Intercept of `v(t)/t` against `1/t` for one direction of one sample;
/// `None` with fewer than three usable radii.
fn direction_intercept(
    sf: &SampleField,
    env: &EnvironmentSample,
    dir: [f64; 2],
    t_grid: &[f64],
    delta: f64,
) -> Result<Option<f64>> {
    let origin = sf.field.source_position();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &t in t_grid {
        if let Some(v) =
            ray_travel_time(&sf.field, env, &sf.labeling, origin, dir, t, delta)?.value()
        {
            xs.push(1.0 / t);
            ys.push(v / t);
        }
    }
    if xs.len() < 3 {
        return Ok(None);
    }
    Ok(linear_fit(&xs, &ys).map(|f| f.intercept))
}

fn reduce(
    per_sample: &[Vec<Option<f64>>],
    n_dir: usize,
) -> Result<(Vec<f64>, Vec<f64>, Vec<usize>)> {
    let mut m = Vec::with_capacity(n_dir);
    let mut ci = Vec::with_capacity(n_dir);
    let mut counts = Vec::with_capacity(n_dir);
    for d in 0..n_dir {
        let vals: Vec<f64> = per_sample.iter().filter_map(|s| s[d]).collect();
        if vals.is_empty() {
            return Err(Error::InsufficientData(format!(
                "direction {d}: no sample has three usable radii"
            )));
        }
        m.push(mean(&vals));
        ci.push(standard_error(&vals));
        counts.push(vals.len());
    }
    Ok((m, ci, counts))
}

/// Ensemble estimate of `m̄₁` over a fan of directions.
/// Per-direction rates at δ, optionally at δ/2, and whether δ reached the
/// connectivity threshold.
type SampleRates = (Vec<Option<f64>>, Option<Vec<Option<f64>>>, bool);

pub fn estimate_mbar(
    ensemble: &[EnvironmentSample],
    opts: &AveragingOptions,
) -> Result<AveragedMetric> {
    if ensemble.is_empty() {
        return Err(Error::InsufficientData("empty ensemble".into()));
    }
    if opts.directions == 0 {
        return Err(Error::Parameter("need at least one direction".into()));
    }
    if opts.t_grid.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least three radii, got {}",
            opts.t_grid.len()
        )));
    }
    if opts.t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Parameter("radii must be positive".into()));
    }
    let delta = match opts.delta {
        Some(d) if d > 0.0 => d,
        Some(d) => return Err(Error::Parameter(format!("delta must be positive, got {d}"))),
        None => {
            DEFAULT_DELTA_FRACTION
                * ensemble
                    .iter()
                    .map(|e| e.max_abs_velocity())
                    .fold(0.0, f64::max)
        }
    };
    if !(delta > 0.0) {
        return Err(Error::Structural(
            "velocity vanishes on every sample".into(),
        ));
    }
    let dirs = fan(opts.directions);

    let per_sample: Vec<Option<SampleRates>> = ensemble
        .par_iter()
        .map(|env| -> Result<_> {
            let Some(sf) = sample_field(env, opts.sign, delta, opts.method, &opts.solver)? else {
                return Ok(None);
            };
            let mut full = Vec::with_capacity(dirs.len());
            let mut half = Vec::with_capacity(dirs.len());
            for &(_, d) in &dirs {
                full.push(direction_intercept(&sf, env, d, &opts.t_grid, delta)?);
                if opts.half_delta_diagnostic {
                    half.push(direction_intercept(&sf, env, d, &opts.t_grid, delta / 2.0)?);
                }
            }
            let half = opts.half_delta_diagnostic.then_some(half);
            Ok(Some((full, half, delta >= sf.delta0)))
        })
        .collect::<Result<_>>()?;
    let used: Vec<_> = per_sample.into_iter().flatten().collect();
    if used.is_empty() {
        return Err(Error::Structural(format!(
            "no sample has a spanning {} component",
            opts.sign.as_str()
        )));
    }
    let full: Vec<Vec<Option<f64>>> = used.iter().map(|u| u.0.clone()).collect();
    let (mbar1, ci, counts) = reduce(&full, dirs.len())?;
    let half_delta = if opts.half_delta_diagnostic {
        let half: Vec<Vec<Option<f64>>> = used
            .iter()
            .map(|u| u.1.clone().unwrap_or_default())
            .collect();
        let (m, c, _) = reduce(&half, dirs.len())?;
        Some((m, c))
    } else {
        None
    };
    Ok(AveragedMetric {
        directions: dirs.iter().map(|d| d.1).collect(),
        angles: dirs.iter().map(|d| d.0).collect(),
        mbar1,
        ci,
        delta,
        eta: opts.eta,
        samples: used.len(),
        t_grid: opts.t_grid.clone(),
        counts,
        half_delta,
        delta_above_delta0: used.iter().filter(|u| u.2).count(),
    })
}

/// Near-boundary behavior of `m(ty)/t` along one ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiminfReport {
    /// Ray cells of the component with `0 < |a| <= δ` and `t >= t_min`.
    pub boundary_cells: usize,
    /// `min m(ty)/t` over those cells (`+inf` when there are none).
    pub liminf_estimate: f64,
    /// `max(0, mbar - liminf_estimate)`.
    pub defect: f64,
}

/// Compares `m(ty)/t` on the part of the ray outside `U^δ` but inside the
/// component (`t >= t_min`) against the `U^δ` estimate `mbar`.
pub fn boundary_liminf_check(
    field: &TravelTimeField,
    env: &EnvironmentSample,
    labeling: &ComponentLabeling,
    dir: [f64; 2],
    delta: f64,
    t_min: f64,
    mbar: f64,
) -> Result<LiminfReport> {
    let comp = labeling
        .component(field.component_id)
        .ok_or_else(|| Error::Structural(format!("unknown component {}", field.component_id)))?;
    if !comp.spanning {
        return Err(Error::Structural(format!(
            "component {} is bounded; the liminf statistic is undefined",
            comp.id
        )));
    }
    let origin = field.source_position();
    let length = exit_parameter(&field.shape, origin, dir);
    let mut cells = 0usize;
    let mut stat = f64::INFINITY;
    for seg in supercover(&field.shape, origin, dir, length) {
        let c = seg.cell;
        let a = env.a_field[c].abs();
        if labeling.labels[c] != comp.id || a > delta || a == 0.0 || !field.values[c].is_finite() {
            continue;
        }
        let t = 0.5 * (seg.t_in + seg.t_out);
        if t < t_min || t <= 0.0 {
            continue;
        }
        cells += 1;
        stat = stat.min(field.values[c] / t);
    }
    let defect = if cells == 0 {
        0.0
    } else {
        (mbar - stat).max(0.0)
    };
    Ok(LiminfReport {
        boundary_cells: cells,
        liminf_estimate: stat,
        defect,
    })
}
