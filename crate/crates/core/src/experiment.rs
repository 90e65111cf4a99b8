//! Configuration-driven experiments.
//!
//! A config file is TOML with the sections `[experiment]`, `[medium]`,
//! `[averaging]`, `[evolution]`, `[convergence]` and an optional
//! `[stationary]`. Unknown keys are rejected. [`run_experiment`] executes
//! generate, label, average, effective, local-uniform, weak-star and
//! stationary stages in order, writing each stage's outputs as soon as it
//! finishes so that a failure leaves the earlier artifacts on disk.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::averaging::{estimate_mbar, AveragingOptions};
use crate::convergence::{
    local_uniform_test, stationary_test, test_function_bank, weak_star_test, ConvergenceReport,
    LabOptions, LimitBlend, StationaryReport, DEFAULT_EPSILONS,
};
use crate::effective::{effective_from_mbar, EffectiveHamiltonian, HamiltonianKind};
use crate::env_media::{
    gen_checkerboard, gen_isolated_obstacles, gen_poisson_cloud, gen_site_percolation,
    EnvironmentSample, RadiusLaw,
};
use crate::error::{Error, Result};
use crate::evolution::{InitialData, MAX_CFL};
use crate::metric::Method;
use crate::topology::{estimate_theta, label_components, ComponentLabeling, Sign};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub medium: MediumConfig,
    #[serde(default)]
    pub averaging: AveragingConfig,
    #[serde(default)]
    pub evolution: EvolutionSection,
    #[serde(default)]
    pub convergence: ConvergenceSection,
    pub stationary: Option<StationarySection>,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    /// First seed; samples use `seed, seed + 1, ...`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub samples: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MediumConfig {
    SitePercolation {
        p: f64,
        grid_size: usize,
        cell_h: f64,
    },
    IsolatedObstacles {
        p: f64,
        radius: f64,
        grid_size: usize,
        cell_h: f64,
    },
    PoissonCloud {
        intensity: f64,
        radius: f64,
        /// Upper end of a uniform radius law; fixed radius when absent.
        radius_max: Option<f64>,
        grid_size: usize,
        cell_h: f64,
    },
    Checkerboard {
        period: f64,
        grid_size: usize,
        cell_h: f64,
    },
}

impl MediumConfig {
    /// Deterministic generator for one seed (the checkerboard ignores it).
    pub fn generate(&self, seed: u64) -> Result<EnvironmentSample> {
        match *self {
            MediumConfig::SitePercolation {
                p,
                grid_size,
                cell_h,
            } => gen_site_percolation(p, grid_size, cell_h, seed),
            MediumConfig::IsolatedObstacles {
                p,
                radius,
                grid_size,
                cell_h,
            } => gen_isolated_obstacles(p, radius, grid_size, cell_h, seed),
            MediumConfig::PoissonCloud {
                intensity,
                radius,
                radius_max,
                grid_size,
                cell_h,
            } => {
                let law = match radius_max {
                    Some(max) => RadiusLaw::Uniform { min: radius, max },
                    None => RadiusLaw::Fixed(radius),
                };
                gen_poisson_cloud(intensity, law, grid_size as f64 * cell_h, cell_h, seed)
            }
            MediumConfig::Checkerboard {
                period,
                grid_size,
                cell_h,
            } => gen_checkerboard(period, grid_size, cell_h),
        }
    }

    pub fn is_random(&self) -> bool {
        !matches!(self, MediumConfig::Checkerboard { .. })
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct AveragingConfig {
    pub directions: usize,
    pub t_grid: Vec<f64>,
    pub delta: Option<f64>,
    pub eta: f64,
    /// `fmm` or `dijkstra8`.
    pub method: String,
}

impl Default for AveragingConfig {
    fn default() -> Self {
        let d = AveragingOptions::default();
        Self {
            directions: d.directions,
            t_grid: d.t_grid,
            delta: d.delta,
            eta: d.eta,
            method: "fmm".into(),
        }
    }
}

impl AveragingConfig {
    pub fn options(&self, sign: Sign) -> Result<AveragingOptions> {
        let method = match self.method.as_str() {
            "fmm" => Method::Fmm,
            "dijkstra8" | "dijkstra" => Method::Dijkstra8,
            other => {
                return Err(Error::Configuration(format!(
                    "unknown metric method `{other}`"
                )))
            }
        };
        Ok(AveragingOptions {
            directions: self.directions,
            t_grid: self.t_grid.clone(),
            delta: self.delta,
            eta: self.eta,
            method,
            sign,
            ..AveragingOptions::default()
        })
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionSection {
    pub epsilons: Vec<f64>,
    pub radius: f64,
    pub t_final: f64,
    pub snapshots: usize,
    pub cfl: f64,
    pub initial: InitialConfig,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        let lab = LabOptions::default();
        Self {
            epsilons: DEFAULT_EPSILONS.to_vec(),
            radius: lab.radius,
            t_final: lab.t_final,
            snapshots: lab.snapshots,
            cfl: MAX_CFL,
            initial: InitialConfig::Cone {
                center: [0.0, 0.0],
                slope: 1.0,
            },
        }
    }
}

impl EvolutionSection {
    pub fn lab_options(&self) -> LabOptions {
        LabOptions {
            radius: self.radius,
            t_final: self.t_final,
            snapshots: self.snapshots,
            cfl: self.cfl,
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    Cone {
        center: [f64; 2],
        slope: f64,
    },
    Bump {
        center: [f64; 2],
        width: f64,
        height: f64,
    },
}

impl InitialConfig {
    pub fn data(&self) -> InitialData {
        match *self {
            InitialConfig::Cone { center, slope } => InitialData::Cone { center, slope },
            InitialConfig::Bump {
                center,
                width,
                height,
            } => InitialData::Bump {
                center,
                width,
                height,
            },
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceSection {
    /// Threshold of the δ-interiors in the local uniform test.
    pub delta: f64,
    pub theta_floor: f64,
    pub local_uniform: bool,
    pub weak_star: bool,
}

impl Default for ConvergenceSection {
    fn default() -> Self {
        Self {
            delta: 0.1,
            theta_floor: 0.01,
            local_uniform: true,
            weak_star: true,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StationarySection {
    pub slopes: Vec<[f64; 2]>,
    #[serde(default = "default_stationary_delta")]
    pub delta: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_stationary_delta() -> f64 {
    0.1
}

fn default_margin() -> f64 {
    0.5
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Configuration(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Configuration(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// A bundled config name or a file path.
    pub fn load(name_or_path: &str) -> Result<Self> {
        match bundled_config(name_or_path) {
            Some(text) => Self::from_toml(text),
            None => Self::from_file(name_or_path),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.samples == 0 {
            return Err(Error::Configuration("samples must be positive".into()));
        }
        if self.experiment.name.is_empty()
            || !self
                .experiment
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::Configuration(
                "experiment name must be nonempty ASCII letters, digits, `_` or `-`".into(),
            ));
        }
        if !(self.evolution.cfl > 0.0 && self.evolution.cfl <= MAX_CFL) {
            return Err(Error::Configuration(format!(
                "cfl must lie in (0, {MAX_CFL}]"
            )));
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        let n = if self.medium.is_random() {
            self.experiment.samples
        } else {
            1
        };
        (0..n as u64)
            .map(|k| self.experiment.seed.wrapping_add(k))
            .collect()
    }
}

/// Everything an experiment produced, plus where it was written.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub name: String,
    pub out_dir: PathBuf,
    pub report: ConvergenceReport,
    pub effective: Vec<EffectiveHamiltonian>,
    pub stationary: Option<StationaryReport>,
    pub warnings: Vec<String>,
}

impl ExperimentOutcome {
    /// Verdicts of every trend check, stationary bound included.
    pub fn verdicts(&self) -> Vec<(String, bool)> {
        let mut v = self.report.verdicts();
        if let Some(st) = &self.stationary {
            v.push(("stationary_bound".into(), st.all_bounds_hold()));
            let mut slopes: Vec<[f64; 2]> = Vec::new();
            for r in &st.rows {
                if !slopes.contains(&r.p) {
                    slopes.push(r.p);
                }
            }
            for p in slopes {
                let seq = st.sup_sequence(p);
                v.push((
                    format!("stationary_sup_p({},{})", p[0], p[1]),
                    crate::convergence::strictly_decreasing(&seq),
                ));
            }
        }
        v
    }
}

fn phase_tag(sign: Sign) -> &'static str {
    match sign {
        Sign::Positive => "positive",
        Sign::Negative => "negative",
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.at_stage(name))
}

fn write_summary(path: &Path, rows: &[(String, String)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["key", "value"])?;
    for (k, v) in rows {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}

fn write_theta(path: &Path, seeds: &[u64], labelings: &[ComponentLabeling]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "seed",
        "theta0",
        "theta_spanning_pos",
        "theta_spanning_neg",
        "theta_bounded",
        "components",
    ])?;
    for (seed, lab) in seeds.iter().zip(labelings) {
        let fr = estimate_theta(lab);
        let span = |s: Sign| lab.largest_spanning(s).map_or(0.0, |c| fr.theta[&c.id]);
        let (pos, neg) = (span(Sign::Positive), span(Sign::Negative));
        w.write_record([
            seed.to_string(),
            fr.theta0.to_string(),
            pos.to_string(),
            neg.to_string(),
            (1.0 - fr.theta0 - pos - neg).max(0.0).to_string(),
            lab.components.len().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `H̄_i` of every component of one labeling: the ensemble Hamiltonian of its
/// phase for the largest spanning component, zero for bounded components.
pub fn component_hamiltonians(
    labeling: &ComponentLabeling,
    effective: &[EffectiveHamiltonian],
) -> Vec<(u32, EffectiveHamiltonian)> {
    labeling
        .components
        .iter()
        .map(|c| {
            let largest = labeling.largest_spanning(c.sign).map(|s| s.id) == Some(c.id);
            let h = effective
                .iter()
                .find(|h| largest && phase_of(h) == Some(c.sign))
                .map(|h| EffectiveHamiltonian {
                    component_id: Some(c.id),
                    ..h.clone()
                })
                .unwrap_or_else(|| EffectiveHamiltonian::zero(Some(c.id)));
            (c.id, h)
        })
        .collect()
}

fn phase_of(h: &EffectiveHamiltonian) -> Option<Sign> {
    match h.kind {
        HamiltonianKind::Convex => Some(Sign::Positive),
        HamiltonianKind::Concave => Some(Sign::Negative),
        HamiltonianKind::Zero => None,
    }
}

fn write_component_hamiltonians(
    path: &Path,
    labeling: &ComponentLabeling,
    effective: &[EffectiveHamiltonian],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "id", "sign", "size", "spanning", "kind", "hbar_e1", "hbar_e2",
    ])?;
    for (c, (_, h)) in labeling
        .components
        .iter()
        .zip(component_hamiltonians(labeling, effective))
    {
        w.write_record([
            c.id.to_string(),
            c.sign.as_str().to_string(),
            c.cells.len().to_string(),
            c.spanning.to_string(),
            h.kind.as_str().to_string(),
            h.eval([1.0, 0.0]).to_string(),
            h.eval([0.0, 1.0]).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the full pipeline of `cfg`, writing artifacts to `out_dir`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: impl AsRef<Path>,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let out = out_dir.as_ref().to_path_buf();
    fs::create_dir_all(&out)?;
    let seeds = cfg.seeds();
    let mut warnings = Vec::new();

    let ensemble: Vec<EnvironmentSample> = stage(
        "generate",
        seeds
            .par_iter()
            .map(|&s| cfg.medium.generate(s))
            .collect::<Result<_>>(),
    )?;
    stage(
        "generate",
        ensemble[0].write(out.join("environment.fhl1"), out.join("environment.csv")),
    )?;

    let labelings: Vec<ComponentLabeling> = ensemble.par_iter().map(label_components).collect();
    stage(
        "label",
        labelings[0].write_component_table(out.join("components.csv")),
    )?;
    stage(
        "label",
        write_theta(&out.join("theta.csv"), &seeds, &labelings),
    )?;

    let mut effective = Vec::new();
    for sign in [Sign::Positive, Sign::Negative] {
        let opts = stage("average", cfg.averaging.options(sign))?;
        match estimate_mbar(&ensemble, &opts) {
            Ok(avg) => {
                let tag = phase_tag(sign);
                stage(
                    "average",
                    avg.write_csv(out.join(format!("mbar_{tag}.csv"))),
                )?;
                if avg.delta_above_delta0 > 0 {
                    warnings.push(format!(
                        "{} of {} samples use δ above their connectivity threshold ({} phase)",
                        avg.delta_above_delta0,
                        avg.samples,
                        sign.as_str()
                    ));
                }
                let h = stage("effective", effective_from_mbar(&avg, sign, None))?;
                stage(
                    "effective",
                    h.write_profile_csv(out.join(format!("hbar_{tag}_profile.csv"))),
                )?;
                stage(
                    "effective",
                    h.write_polygon_csv(out.join(format!("wulff_{tag}.csv"))),
                )?;
                stage(
                    "effective",
                    h.write_grid_csv(out.join(format!("hbar_{tag}_grid.csv")), 1.0, 41),
                )?;
                effective.push(h);
            }
            Err(Error::Structural(_)) => {}
            Err(e) => return Err(e.at_stage("average")),
        }
    }

    stage(
        "effective",
        write_component_hamiltonians(&out.join("hbar_components.csv"), &labelings[0], &effective),
    )?;

    // seeds lacking a spanning component of a phase that has a Hamiltonian
    let mut excluded = Vec::new();
    let mut kept = Vec::new();
    for (k, lab) in labelings.iter().enumerate() {
        let missing = effective
            .iter()
            .filter_map(phase_of)
            .any(|sign| lab.largest_spanning(sign).is_none());
        if missing {
            excluded.push(seeds[k]);
        } else {
            kept.push(k);
        }
    }
    if kept.is_empty() {
        return Err(
            Error::Structural("every seed lacks a spanning component".into()).at_stage("label"),
        );
    }
    let kept_envs: Vec<EnvironmentSample> = kept.iter().map(|&k| ensemble[k].clone()).collect();
    let kept_labs: Vec<ComponentLabeling> = kept.iter().map(|&k| labelings[k].clone()).collect();

    let u0 = cfg.evolution.initial.data();
    let lab_opts = cfg.evolution.lab_options();
    let eps = &cfg.evolution.epsilons;
    let blend = stage(
        "weak_star",
        LimitBlend::from_ensemble(&kept_labs, &effective, cfg.convergence.theta_floor),
    )?;
    let mut report = ConvergenceReport {
        epsilons: eps.clone(),
        local: None,
        weak: None,
        theta: (blend.u0_weight, blend.parts.iter().map(|p| p.0).collect()),
        excluded_seeds: excluded.clone(),
    };

    if cfg.convergence.local_uniform {
        let local = stage(
            "local_uniform",
            local_uniform_test(
                &kept_envs[0],
                &kept_labs[0],
                &effective,
                &u0,
                eps,
                cfg.convergence.delta,
                &lab_opts,
            ),
        )?;
        warnings.extend(local.warnings.iter().cloned());
        report.local = Some(local);
        stage(
            "local_uniform",
            report.write_local_csv(out.join("local_uniform.csv")),
        )?;
        let finest = stage(
            "local_uniform",
            crate::convergence::run_window(
                &kept_envs[0],
                &u0,
                *eps.last().expect("validated"),
                &lab_opts,
            ),
        )?;
        let last = finest.states.last().expect("at least one snapshot");
        stage(
            "local_uniform",
            last.write_fhl1(out.join("u_eps_final.fhl1")),
        )?;
        stage(
            "local_uniform",
            last.write_contour_csv(out.join("u_eps_final_contour.csv")),
        )?;
    }

    if cfg.convergence.weak_star {
        let weak = stage(
            "weak_star",
            weak_star_test(
                &kept_envs,
                &blend,
                &u0,
                eps,
                &test_function_bank(),
                &lab_opts,
            ),
        )?;
        stage("weak_star", weak.write_csv(out.join("weak_star.csv")))?;
        warnings.extend(weak.warnings.iter().cloned());
        report.weak = Some(weak);
    }

    let stationary = match (&cfg.stationary, effective.first()) {
        (Some(sec), Some(h)) => {
            let st = stage(
                "stationary",
                stationary_test(
                    &kept_envs[0],
                    &kept_labs[0],
                    h,
                    &sec.slopes,
                    eps,
                    sec.delta,
                    lab_opts.radius,
                    sec.margin,
                ),
            )?;
            stage("stationary", st.write_csv(out.join("stationary.csv")))?;
            Some(st)
        }
        (Some(_), None) => {
            warnings.push("stationary section skipped: no spanning component".into());
            None
        }
        _ => None,
    };

    warnings.sort();
    warnings.dedup();
    let outcome = ExperimentOutcome {
        name: cfg.experiment.name.clone(),
        out_dir: out.clone(),
        report,
        effective,
        stationary,
        warnings,
    };
    let mut rows: Vec<(String, String)> = vec![
        ("name".into(), outcome.name.clone()),
        ("samples".into(), seeds.len().to_string()),
        ("excluded_seeds".into(), format!("{excluded:?}")),
        ("u0_weight".into(), outcome.report.theta.0.to_string()),
        (
            "spanning_weights".into(),
            format!("{:?}", outcome.report.theta.1),
        ),
    ];
    for h in &outcome.effective {
        for (tag, p) in [("e1", [1.0, 0.0]), ("e2", [0.0, 1.0])] {
            rows.push((
                format!("hbar_{}_{tag}", h.kind.as_str()),
                h.eval(p).to_string(),
            ));
        }
    }
    for (k, ok) in outcome.verdicts() {
        rows.push((format!("verdict_{k}"), ok.to_string()));
    }
    for w in &outcome.warnings {
        rows.push(("warning".into(), w.clone()));
    }
    stage("report", write_summary(&out.join("summary.csv"), &rows))?;
    Ok(outcome)
}

/// A config bundled with the crate, by name.
pub fn bundled_config(name: &str) -> Option<&'static str> {
    match name {
        "checkerboard_trapping" => Some(include_str!("../configs/checkerboard_trapping.toml")),
        "percolation_p07" => Some(include_str!("../configs/percolation_p07.toml")),
        "obstacles_weak_star" => Some(include_str!("../configs/obstacles_weak_star.toml")),
        _ => None,
    }
}

pub const BUNDLED_CONFIGS: [&str; 3] = [
    "checkerboard_trapping",
    "percolation_p07",
    "obstacles_weak_star",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_parse() {
        for name in BUNDLED_CONFIGS {
            let cfg = ExperimentConfig::from_toml(bundled_config(name).unwrap()).unwrap();
            assert_eq!(cfg.experiment.name, name);
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[experiment]\nname = \"x\"\ncolour = 3\n[medium]\nkind = \"checkerboard\"\nperiod = 1.0\ngrid_size = 64\ncell_h = 0.125\n";
        assert!(matches!(
            ExperimentConfig::from_toml(text),
            Err(Error::Configuration(_))
        ));
    }
}
