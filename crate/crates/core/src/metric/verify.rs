use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TravelTimeField;
use crate::env_media::EnvironmentSample;
use crate::error::{Error, Result};
use crate::topology::ComponentLabeling;

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Random far pairs drawn in `U^δ`, reported next to the neighboring-pair
    /// certificate.
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            random_pairs: 2000,
            seed: 0,
        }
    }
}

/// Structural checks on two travel-time fields with sources `z` and `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    /// `|m(y, z) - m(z, y)|`.
    pub symmetry_defect: f64,
    /// Largest `m(x, z) - m(x, y) - m(y, z)` (and with `y`, `z` swapped) over
    /// every reachable `x`; nonpositive for a metric.
    pub triangle_defect: f64,
    /// Largest `|m(y1) - m(y2)| / |y1 - y2|` over neighboring cells of `U^δ`.
    pub lipschitz_ratio: f64,
    /// `mu/δ + eta`.
    pub lipschitz_bound: f64,
    /// Largest `|m(y1) - m(y2)| - (mu/δ + eta)|y1 - y2|` over neighboring pairs.
    pub lipschitz_excess: f64,
    /// Discretization slack `2 h mu / δ` allowed on the excess.
    pub lipschitz_slack: f64,
    /// Largest ratio over random far pairs of `U^δ`. The travel time is a
    /// geodesic quantity, so pairs separated by an obstacle can exceed the
    /// bound; this is reported, not certified.
    pub far_pair_ratio: f64,
    /// Random pairs whose excess is above the slack.
    pub far_pair_violations: usize,
    /// `min_y m(y, z) - (mu/L) |log|a(y)| - log|a(z)||`.
    pub log_bound_defect: f64,
    /// Same, divided by `m(y, z)` (cells with positive travel time).
    pub log_bound_relative_defect: f64,
    /// Largest `| |a| |Dm|_upwind - mu |` over cells of `U^δ` whose four
    /// neighbors are reachable (source excluded).
    pub pde_residual: f64,
    pub pairs_checked: usize,
}

impl MetricReport {
    pub fn lipschitz_ok(&self) -> bool {
        self.lipschitz_excess <= self.lipschitz_slack
    }
}

fn upwind_gradient_norm(field: &TravelTimeField, cell: usize) -> Option<f64> {
    let s = field.shape;
    let (r, c) = s.coords(cell);
    let (r, c) = (r as isize, c as isize);
    let u = field.values[cell];
    let get = |k: Option<usize>| k.map(|k| field.values[k]).filter(|v| v.is_finite());
    let xm = get(s.offset(r, c - 1))?;
    let xp = get(s.offset(r, c + 1))?;
    let ym = get(s.offset(r - 1, c))?;
    let yp = get(s.offset(r + 1, c))?;
    let gx = (u - xm.min(xp)).max(0.0) / s.h;
    let gy = (u - ym.min(yp)).max(0.0) / s.h;
    Some(gx.hypot(gy))
}

pub fn verify_metric_properties(
    from_z: &TravelTimeField,
    from_y: &TravelTimeField,
    env: &EnvironmentSample,
    labeling: &ComponentLabeling,
    delta: f64,
    eta: f64,
    opts: &VerifyOptions,
) -> Result<MetricReport> {
    if from_z.method != from_y.method || from_z.mu != from_y.mu || from_z.shape != from_y.shape {
        return Err(Error::Parameter(
            "fields must share method, mu and grid".into(),
        ));
    }
    if !(delta > 0.0) {
        return Err(Error::Parameter("delta must be positive".into()));
    }
    let s = from_z.shape;
    let (z, y) = (from_z.source, from_y.source);
    let mu = from_z.mu;

    let symmetry_defect = (from_z.values[y] - from_y.values[z]).abs();
    let mut triangle_defect = f64::NEG_INFINITY;
    for x in 0..s.len() {
        let (xz, xy) = (from_z.values[x], from_y.values[x]);
        if xz.is_finite() && xy.is_finite() {
            triangle_defect = triangle_defect
                .max(xz - xy - from_z.values[y])
                .max(xy - xz - from_y.values[z]);
        }
    }

    let interior: Vec<usize> = (0..s.len())
        .filter(|&i| {
            labeling.labels[i] == from_z.component_id
                && env.a_field[i].abs() > delta
                && from_z.values[i].is_finite()
        })
        .collect();
    let mut in_set = vec![false; s.len()];
    for &i in &interior {
        in_set[i] = true;
    }
    let lipschitz_bound = mu / delta + eta;
    let lipschitz_slack = 2.0 * s.h * mu / delta;
    let pair = |i: usize, j: usize| {
        let (pi, pj) = (s.center(i), s.center(j));
        let d = (pi[0] - pj[0]).hypot(pi[1] - pj[1]);
        let dm = (from_z.values[i] - from_z.values[j]).abs();
        (dm / d, dm - lipschitz_bound * d)
    };
    let mut ratio: f64 = 0.0;
    let mut excess = f64::NEG_INFINITY;
    let mut pairs = 0usize;
    for &i in &interior {
        let (r, c) = s.coords(i);
        for (dr, dc) in [(0isize, 1isize), (1, 0), (1, 1), (1, -1)] {
            if let Some(j) = s.offset(r as isize + dr, c as isize + dc) {
                if in_set[j] {
                    let (q, e) = pair(i, j);
                    ratio = ratio.max(q);
                    excess = excess.max(e);
                    pairs += 1;
                }
            }
        }
    }
    let mut far_ratio: f64 = 0.0;
    let mut far_violations = 0usize;
    if interior.len() > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.random_pairs {
            let i = interior[rng.random_range(0..interior.len())];
            let j = interior[rng.random_range(0..interior.len())];
            if i != j {
                let (q, e) = pair(i, j);
                far_ratio = far_ratio.max(q);
                far_violations += usize::from(e > lipschitz_slack);
                pairs += 1;
            }
        }
    }

    let az = env.a_field[z].abs().ln();
    let l = env.lipschitz_l;
    let mut log_abs = f64::INFINITY;
    let mut log_rel = f64::INFINITY;
    for i in 0..s.len() {
        let m = from_z.values[i];
        if !m.is_finite() || env.a_field[i] == 0.0 {
            continue;
        }
        let bound = mu / l * (env.a_field[i].abs().ln() - az).abs();
        log_abs = log_abs.min(m - bound);
        if m > 0.0 {
            log_rel = log_rel.min((m - bound) / m);
        }
    }

    let mut residual: f64 = 0.0;
    for &i in &interior {
        if i == z {
            continue;
        }
        if let Some(g) = upwind_gradient_norm(from_z, i) {
            residual = residual.max((env.a_field[i].abs() * g - mu).abs());
        }
    }

    Ok(MetricReport {
        symmetry_defect,
        triangle_defect,
        lipschitz_ratio: ratio,
        lipschitz_bound,
        lipschitz_excess: excess,
        lipschitz_slack,
        far_pair_ratio: far_ratio,
        far_pair_violations: far_violations,
        log_bound_defect: log_abs,
        log_bound_relative_defect: log_rel,
        pde_residual: residual,
        pairs_checked: pairs,
    })
}
