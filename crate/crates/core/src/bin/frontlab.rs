use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use frontlab::averaging::estimate_mbar;
use frontlab::effective::effective_from_mbar;
use frontlab::env_media::EnvironmentSample;
use frontlab::evolution::{
    solve_oscillatory, solve_stationary, EvolutionConfig, StationaryOptions, XGrid,
};
use frontlab::experiment::{run_experiment, ExperimentConfig, MediumConfig, BUNDLED_CONFIGS};
use frontlab::metric::{solve_metric, Method, SolverOptions};
use frontlab::topology::{central_cell, delta_sublevel, estimate_theta, label_components, Sign};
use frontlab::{Error, Result};

#[derive(Parser)]
#[command(
    name = "frontlab",
    version,
    about = "Homogenization lab for fronts with sign-changing random velocity"
)]
struct Cli {
    /// Experiment config: a TOML file or one of the bundled names.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Seed (first seed of an ensemble); overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "frontlab-out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Phase {
    Positive,
    Negative,
}

impl From<Phase> for Sign {
    fn from(p: Phase) -> Sign {
        match p {
            Phase::Positive => Sign::Positive,
            Phase::Negative => Sign::Negative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Fmm,
    Dijkstra8,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Ensemble size (overrides the config).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, value_enum, default_value = "positive")]
    phase: Phase,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one environment sample (FHL1 grid + CSV metadata).
    GenEnv,
    /// Label components; writes the component table and volume fractions.
    Label {
        /// Also restrict to the δ-interior.
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Travel time from a source in the largest spanning component.
    Metric {
        #[arg(long, value_enum, default_value = "fmm")]
        method: MethodArg,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, value_enum, default_value = "positive")]
        phase: Phase,
    },
    /// Ensemble estimate of the averaged metric on a fan of directions.
    Average(EnsembleArgs),
    /// Effective Hamiltonian from the averaged metric.
    EffectiveH(EnsembleArgs),
    /// Solve the oscillatory equation on the environment scaled by eps.
    Evolve {
        #[arg(long, default_value_t = 0.125)]
        eps: f64,
        #[arg(long, default_value_t = 0.5)]
        t_final: f64,
    },
    /// Solve the stationary problem with slope p.
    Stationary {
        #[arg(long, default_value_t = 0.125)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        px: f64,
        #[arg(long, default_value_t = 0.0)]
        py: f64,
    },
    /// Run the full convergence experiment of the config.
    Converge,
    /// Print the summary of a finished experiment directory.
    Report {
        /// Directory holding `summary.csv` (defaults to --out).
        dir: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let name = cli.config.as_deref().ok_or_else(|| {
        Error::Configuration(format!(
            "--config is required (a TOML file or one of {})",
            BUNDLED_CONFIGS.join(", ")
        ))
    })?;
    let mut cfg = ExperimentConfig::load(name)?;
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    Ok(cfg)
}

fn ensemble(cfg: &ExperimentConfig, samples: Option<usize>) -> Result<Vec<EnvironmentSample>> {
    let mut cfg = cfg.clone();
    if let Some(n) = samples {
        cfg.experiment.samples = n;
    }
    cfg.seeds()
        .into_iter()
        .map(|s| cfg.medium.generate(s))
        .collect()
}

fn first_env(cfg: &ExperimentConfig) -> Result<EnvironmentSample> {
    cfg.medium.generate(cfg.experiment.seed)
}

fn write_kv(path: &Path, rows: &[(&str, String)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["key", "value"])?;
    for (k, v) in rows {
        w.write_record([*k, v.as_str()])?;
    }
    w.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Configuration(e.to_string()))?;
    }
    if let Command::Report { dir } = &cli.command {
        let dir = dir.as_ref().unwrap_or(&cli.out);
        let text = fs::read_to_string(dir.join("summary.csv"))?;
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        for row in reader.records() {
            let row = row?;
            println!("{:<40} {}", &row[0], &row[1]);
        }
        return Ok(());
    }
    let cfg = load_config(cli)?;
    let out = &cli.out;
    fs::create_dir_all(out)?;
    match &cli.command {
        Command::GenEnv => {
            let env = first_env(&cfg)?;
            env.write(out.join("environment.fhl1"), out.join("environment.csv"))?;
            println!(
                "wrote {}x{} environment (seed {}) to {}",
                env.shape.rows,
                env.shape.cols,
                env.seed,
                out.display()
            );
        }
        Command::Label { delta } => {
            let env = first_env(&cfg)?;
            let lab = label_components(&env);
            lab.write_component_table(out.join("components.csv"))?;
            delta_sublevel(&lab, &env, *delta)?
                .write_component_table(out.join("components_delta.csv"))?;
            let th = estimate_theta(&lab);
            let mut rows = vec![("theta0", th.theta0.to_string())];
            let span = lab
                .largest_spanning(Sign::Positive)
                .map(|c| th.theta[&c.id]);
            rows.push((
                "theta_spanning_positive",
                span.map_or("none".into(), |t| t.to_string()),
            ));
            rows.push(("components", lab.components.len().to_string()));
            write_kv(&out.join("theta.csv"), &rows)?;
            println!(
                "{} components, theta0 = {:.4}",
                lab.components.len(),
                th.theta0
            );
        }
        Command::Metric { method, mu, phase } => {
            let env = first_env(&cfg)?;
            let lab = label_components(&env);
            let comp = lab
                .largest_spanning((*phase).into())
                .ok_or_else(|| Error::Structural("no spanning component".into()))?;
            let delta = 0.1 * env.max_abs_velocity();
            let source = central_cell(
                &env.shape,
                comp.cells
                    .iter()
                    .copied()
                    .filter(|&i| env.a_field[i].abs() > delta),
            )
            .ok_or_else(|| Error::Structural("empty delta-interior".into()))?;
            let method = match method {
                MethodArg::Fmm => Method::Fmm,
                MethodArg::Dijkstra8 => Method::Dijkstra8,
            };
            let field = solve_metric(
                method,
                &env,
                &lab,
                comp.id,
                source,
                *mu,
                &SolverOptions::default(),
            )?;
            field.write_fhl1(out.join("travel_time.fhl1"))?;
            let reached = field.values.iter().filter(|v| v.is_finite()).count();
            println!("{} cells reached from source cell {source}", reached);
        }
        Command::Average(args) => {
            let ens = ensemble(&cfg, args.samples)?;
            let avg = estimate_mbar(&ens, &cfg.averaging.options(args.phase.into())?)?;
            avg.write_csv(out.join("mbar.csv"))?;
            println!(
                "averaged over {} samples, delta = {}",
                avg.samples, avg.delta
            );
        }
        Command::EffectiveH(args) => {
            let ens = ensemble(&cfg, args.samples)?;
            let sign: Sign = args.phase.into();
            let avg = estimate_mbar(&ens, &cfg.averaging.options(sign)?)?;
            let h = effective_from_mbar(&avg, sign, None)?;
            avg.write_csv(out.join("mbar.csv"))?;
            h.write_profile_csv(out.join("hbar_profile.csv"))?;
            h.write_polygon_csv(out.join("wulff.csv"))?;
            h.write_grid_csv(out.join("hbar_grid.csv"), 1.0, 41)?;
            println!(
                "H(e1) = {:.4}, H(e2) = {:.4}",
                h.eval([1.0, 0.0]),
                h.eval([0.0, 1.0])
            );
        }
        Command::Evolve { eps, t_final } => {
            let env = first_env(&cfg)?;
            let grid = XGrid::for_env(&env.shape, *eps)?;
            let u0 = cfg.evolution.initial.data().sample(&grid);
            let evo = EvolutionConfig {
                t_final: *t_final,
                cfl: cfg.evolution.cfl,
                ..EvolutionConfig::default()
            };
            let traj = solve_oscillatory(&env, &u0, *eps, &evo)?;
            let last = traj.final_state();
            last.write_fhl1(out.join("u_eps.fhl1"))?;
            last.write_contour_csv(out.join("u_eps_contour.csv"))?;
            for w in &traj.warnings {
                eprintln!("warning: {w}");
            }
            println!("{} steps of dt = {:.3e}", traj.steps, traj.dt);
        }
        Command::Stationary { eps, px, py } => {
            let env = first_env(&cfg)?;
            let sol = solve_stationary(&env, [*px, *py], *eps, &StationaryOptions::default())?;
            sol.w.write_fhl1(out.join("w_eps.fhl1"))?;
            write_kv(
                &out.join("stationary.csv"),
                &[
                    ("iterations", sol.iterations.to_string()),
                    ("residual", sol.residual.to_string()),
                    ("bound", sol.bound.to_string()),
                    ("bound_holds", sol.bound_holds().to_string()),
                    ("w_min", sol.w.min().to_string()),
                    ("w_max", sol.w.max().to_string()),
                ],
            )?;
            println!(
                "converged in {} iterations, bound holds: {}",
                sol.iterations,
                sol.bound_holds()
            );
        }
        Command::Converge => {
            let outcome = run_experiment(&cfg, out)?;
            for (name, ok) in outcome.verdicts() {
                println!("{:<40} {}", name, if ok { "holds" } else { "fails" });
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Report { .. } => unreachable!("handled above"),
    }
    if matches!(cfg.medium, MediumConfig::Checkerboard { .. }) && cli.seed.is_some() {
        eprintln!("note: the checkerboard is deterministic; --seed has no effect");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
