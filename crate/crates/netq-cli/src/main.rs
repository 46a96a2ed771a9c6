//! `netq` — simulate Boltzmann Q-learning on network polymatrix games,
//! print spectral thresholds, solve QREs, and drive batch sweeps.
//!
//! One JSON config document (sections `game`, `network`, `dynamics`,
//! `experiment`, `output`) serves every subcommand; command-line flags
//! override the file, and each run writes a manifest sufficient to
//! reproduce it. Exit codes: 0 success, 2 config error, 3 numerical
//! failure.

mod config;
mod manifest;
mod render;

use clap::{Parser, Subcommand};
use config::{CliConfig, ExperimentSection, NetworkSection};
use manifest::RunManifest;
use netq::dynamics::{assess_convergence, run_discrete, QState};
use netq::equilibrium::{qre_fixed_point, QreOptions, QreResult};
use netq::error::{Error, Result};
use netq::experiments::{compare_to_theory, run_boundary, run_heatmap, run_histogram};
use netq::game::{GameFamily, JointStrategy};
use netq::graph::{er_bound, sb_bound, sb_bound_general, spectral_radius};
use netq::seed::derive_seed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Environment variable consulted for the output directory when
/// neither `--out` nor the config sets one.
const OUT_DIR_ENV: &str = "NETQ_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "netq",
    version,
    about = "Q-learning dynamics on network polymatrix games",
    after_help = "Output directory precedence: --out, then output.dir in the config, \
                  then $NETQ_OUT_DIR, then the working directory."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Path to the JSON config document.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Base seed; every random stream of the run derives from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for sweeps (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Also write SVG figures next to the data files.
    #[arg(long, global = true)]
    render: bool,

    /// Tail probability for the high-confidence spectral bounds.
    #[arg(long, global = true, default_value_t = 0.05)]
    epsilon: f64,

    /// Report bare spectral-radius bounds instead of coupling-scaled
    /// thresholds.
    #[arg(long, global = true)]
    literal_theorem_threshold: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the discrete dynamics once; write the trajectory and a
    /// convergence report.
    Simulate,
    /// Print spectral-radius bounds, expected degrees, and per-family
    /// exploration thresholds.
    Bounds,
    /// Solve for the quantal response equilibrium from several starts.
    Qre {
        /// Independent random starting points.
        #[arg(long, default_value_t = 10)]
        starts: usize,
    },
    /// Run the experiment described in the config (heatmap, boundary,
    /// or histogram) and write its CSVs.
    Sweep,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore failure: the pool can only be configured once.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_) | Error::Parse(_) | Error::Json(_) | Error::Io(_) => 2,
        Error::Numerical { .. } | Error::Domain(_) => 3,
        Error::ContractViolation(_) => 1,
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate => cmd_simulate(cli),
        Command::Bounds => cmd_bounds(cli),
        Command::Qre { starts } => cmd_qre(cli, *starts),
        Command::Sweep => cmd_sweep(cli),
    }
}

fn load_config(cli: &Cli) -> Result<CliConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::invalid("--config <path> is required for this command"))?;
    CliConfig::load(path)
}

/// `--out` beats the config, which beats `$NETQ_OUT_DIR`.
fn resolve_out_dir(cli: &Cli, config: &CliConfig) -> Option<PathBuf> {
    cli.out
        .clone()
        .or_else(|| config.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::Io)
}

fn write_text(path: &Path, text: &str, manifest: &mut RunManifest) -> Result<()> {
    std::fs::write(path, text).map_err(Error::Io)?;
    manifest.record(path);
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_simulate(cli: &Cli) -> Result<()> {
    let mut config = load_config(cli)?;
    let family = config.game_required()?.clone();
    let network = config.network_required()?.clone();
    let out_dir = resolve_out_dir(cli, &config).unwrap_or_else(|| PathBuf::from("."));
    prepare_out_dir(&out_dir)?;
    config.output.dir = Some(out_dir.clone());
    let prefix = config.output.prefix.clone();

    let graph = network.realize(derive_seed(cli.seed, &[0]))?;
    let game = family.build(&graph, derive_seed(cli.seed, &[1]))?;
    let dyn_config = config.dynamics.to_config(game.agents());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cli.seed, &[2]));
    let init = QState::random(game.action_counts(), &dyn_config.temperatures, &mut rng)?;
    let traj = run_discrete(&game, &dyn_config, &init)?;
    let report = assess_convergence(
        &traj,
        config.dynamics.tail,
        config.dynamics.var_threshold,
        config.dynamics.rel_threshold,
    )?;

    println!(
        "agents: {}, edges: {}, T: {}",
        game.agents(),
        graph.edge_count(),
        config.dynamics.temperature
    );
    println!(
        "converged: {} (mean variance {:e}, relative difference {:e})",
        report.converged, report.mean_variance, report.relative_difference
    );

    let mut manifest = RunManifest::new(
        "simulate",
        cli.seed,
        cli.epsilon,
        serde_json::to_value(&config).map_err(Error::Json)?,
    );
    let traj_path = out_dir.join(format!("{prefix}_trajectory.csv"));
    let file = std::fs::File::create(&traj_path).map_err(Error::Io)?;
    let mut writer = std::io::BufWriter::new(file);
    traj.write_csv(&mut writer)?;
    writer.flush().map_err(Error::Io)?;
    manifest.record(&traj_path);
    println!("wrote {}", traj_path.display());

    write_text(
        &out_dir.join(format!("{prefix}_report.json")),
        &report.to_json()?,
        &mut manifest,
    )?;
    if cli.render {
        write_text(
            &out_dir.join(format!("{prefix}_trajectory.svg")),
            &render::trajectory_svg(&traj),
            &mut manifest,
        )?;
    }
    manifest.write(&out_dir.join(format!("{prefix}_manifest.json")))
}

#[derive(Debug, Serialize)]
struct BoundsRow {
    model: String,
    n: usize,
    expected_degree: f64,
    rho_bound: f64,
    threshold_shapley: f64,
    threshold_sato: f64,
}

fn bounds_row(network: &NetworkSection, epsilon: f64, literal: bool) -> Result<BoundsRow> {
    let (model, n, expected_degree, rho_bound) = match network {
        NetworkSection::Er { n, p } => (
            "er",
            *n,
            (*n as f64 - 1.0) * p,
            er_bound(*n, *p, epsilon)?.value,
        ),
        NetworkSection::Sb { .. } => {
            let params = network.sb_params().expect("sb variant");
            let n = params.n();
            // Mean over communities of the expected node degree.
            let degree = params
                .community_sizes
                .iter()
                .zip(&params.p_within)
                .map(|(&s, &p)| (s as f64 - 1.0) * p + (n - s) as f64 * params.q_between)
                .sum::<f64>()
                / params.communities() as f64;
            let bound = if params.equal_size().is_some() {
                sb_bound(&params, epsilon)?
            } else {
                sb_bound_general(&params, epsilon)?
            };
            ("sb", n, degree, bound.value)
        }
        NetworkSection::Complete { n } => {
            let g = network.realize(0)?;
            ("complete", *n, (*n as f64) - 1.0, spectral_radius(&g))
        }
        NetworkSection::Empty { n } => ("empty", *n, 0.0, 0.0),
    };
    let (delta_shapley, delta_sato) = if literal {
        (1.0, 1.0)
    } else {
        (
            GameFamily::Shapley { beta: 0.2 }.delta_identical_interests()?,
            GameFamily::sato_default().delta_identical_interests()?,
        )
    };
    Ok(BoundsRow {
        model: model.to_string(),
        n,
        expected_degree,
        rho_bound,
        threshold_shapley: delta_shapley * rho_bound,
        threshold_sato: delta_sato * rho_bound,
    })
}

fn cmd_bounds(cli: &Cli) -> Result<()> {
    let mut config = load_config(cli)?;
    let network = config.network_required()?.clone();
    let row = bounds_row(&network, cli.epsilon, cli.literal_theorem_threshold)?;

    println!("model,n,expected_degree,rho_bound,threshold_shapley,threshold_sato");
    println!(
        "{},{},{},{},{},{}",
        row.model, row.n, row.expected_degree, row.rho_bound, row.threshold_shapley,
        row.threshold_sato
    );

    if let Some(out_dir) = resolve_out_dir(cli, &config) {
        prepare_out_dir(&out_dir)?;
        config.output.dir = Some(out_dir.clone());
        let prefix = config.output.prefix.clone();
        let mut manifest = RunManifest::new(
            "bounds",
            cli.seed,
            cli.epsilon,
            serde_json::to_value(&config).map_err(Error::Json)?,
        );
        let csv = format!(
            "model,n,expected_degree,rho_bound,threshold_shapley,threshold_sato\n{},{},{},{},{},{}\n",
            row.model, row.n, row.expected_degree, row.rho_bound, row.threshold_shapley,
            row.threshold_sato
        );
        write_text(
            &out_dir.join(format!("{prefix}_bounds.csv")),
            &csv,
            &mut manifest,
        )?;
        manifest.write(&out_dir.join(format!("{prefix}_manifest.json")))?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct QreSummary {
    temperature: f64,
    starts: usize,
    /// Largest pairwise infinity-norm gap between the solutions found
    /// from different starts; absent for a single start.
    max_pairwise_disagreement: Option<f64>,
    result: QreResult,
}

fn cmd_qre(cli: &Cli, starts: usize) -> Result<()> {
    if starts == 0 {
        return Err(Error::invalid("--starts must be at least 1"));
    }
    let mut config = load_config(cli)?;
    let family = config.game_required()?.clone();
    let network = config.network_required()?.clone();
    let graph = network.realize(derive_seed(cli.seed, &[0]))?;
    let game = family.build(&graph, derive_seed(cli.seed, &[1]))?;
    let temperature = config.dynamics.temperature;
    let temps = vec![temperature; game.agents()];

    let opts = QreOptions::default();
    let mut results: Vec<QreResult> = Vec::with_capacity(starts);
    for start in 0..starts {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cli.seed, &[2, start as u64]));
        let x0 = JointStrategy::random_interior(game.action_counts(), &mut rng);
        results.push(qre_fixed_point(&game, &temps, &x0, &opts)?);
    }
    let max_pairwise_disagreement = if starts == 1 {
        None
    } else {
        let mut worst = 0.0f64;
        for i in 0..results.len() {
            for j in (i + 1)..results.len() {
                worst = worst.max(results[i].strategy.max_abs_diff(&results[j].strategy));
            }
        }
        Some(worst)
    };

    let summary = QreSummary {
        temperature,
        starts,
        max_pairwise_disagreement,
        result: results.swap_remove(0),
    };
    println!("T: {temperature}, starts: {starts}");
    for (agent, part) in summary.result.strategy.parts().iter().enumerate() {
        let row: Vec<String> = part.iter().map(|v| v.to_string()).collect();
        println!("agent {agent}: {}", row.join(" "));
    }
    println!(
        "residual: {:e}, iterations: {}, converged: {}",
        summary.result.residual, summary.result.iterations, summary.result.converged
    );
    match summary.max_pairwise_disagreement {
        Some(worst) => println!("max pairwise disagreement: {worst:e}"),
        None => println!("max pairwise disagreement: n/a"),
    }

    if let Some(out_dir) = resolve_out_dir(cli, &config) {
        prepare_out_dir(&out_dir)?;
        config.output.dir = Some(out_dir.clone());
        let prefix = config.output.prefix.clone();
        let mut manifest = RunManifest::new(
            "qre",
            cli.seed,
            cli.epsilon,
            serde_json::to_value(&config).map_err(Error::Json)?,
        );
        write_text(
            &out_dir.join(format!("{prefix}_qre.json")),
            &serde_json::to_string_pretty(&summary).map_err(Error::Json)?,
            &mut manifest,
        )?;
        manifest.write(&out_dir.join(format!("{prefix}_manifest.json")))?;
    }
    Ok(())
}

fn cmd_sweep(cli: &Cli) -> Result<()> {
    let mut config = load_config(cli)?;
    let family = config.game_required()?.clone();
    let experiment = config.experiment_required()?.clone();
    let out_dir = resolve_out_dir(cli, &config).unwrap_or_else(|| PathBuf::from("."));
    prepare_out_dir(&out_dir)?;
    config.output.dir = Some(out_dir.clone());
    let prefix = config.output.prefix.clone();
    let mut manifest = RunManifest::new(
        "sweep",
        cli.seed,
        cli.epsilon,
        serde_json::to_value(&config).map_err(Error::Json)?,
    );

    match &experiment {
        ExperimentSection::Heatmap { .. } => {
            let sweep = experiment.sweep_config(&family, &config.dynamics, cli.seed)?;
            let result = run_heatmap(&sweep)?;
            println!("heatmap cells: {}", result.cells.len());
            write_text(
                &out_dir.join(format!("{prefix}_heatmap.csv")),
                &result.to_csv_string(),
                &mut manifest,
            )?;
            if cli.render {
                write_text(
                    &out_dir.join(format!("{prefix}_heatmap.svg")),
                    &render::heatmap_svg(&result),
                    &mut manifest,
                )?;
            }
        }
        ExperimentSection::Boundary { .. } => {
            let sweep = experiment.sweep_config(&family, &config.dynamics, cli.seed)?;
            let result = run_boundary(&sweep)?;
            println!("boundary points: {}", result.points.len());
            write_text(
                &out_dir.join(format!("{prefix}_boundary.csv")),
                &result.to_csv_string(),
                &mut manifest,
            )?;
            match compare_to_theory(&sweep, &result, cli.epsilon) {
                Ok(theory) => write_text(
                    &out_dir.join(format!("{prefix}_theory.csv")),
                    &theory.to_csv_string(),
                    &mut manifest,
                )?,
                // Families without a closed-form coupling bound still
                // get their boundary CSV, just no comparison table.
                Err(err) => log::warn!("skipping theory comparison: {err}"),
            }
            if cli.render {
                write_text(
                    &out_dir.join(format!("{prefix}_boundary.svg")),
                    &render::boundary_svg(&result),
                    &mut manifest,
                )?;
            }
        }
        ExperimentSection::Histogram { .. } => {
            let histogram = experiment.histogram_config(&family, &config.dynamics, cli.seed)?;
            let result = run_histogram(&histogram)?;
            println!("histogram rows: {}", result.rows.len());
            write_text(
                &out_dir.join(format!("{prefix}_histogram.csv")),
                &result.to_csv_string(),
                &mut manifest,
            )?;
            if cli.render {
                write_text(
                    &out_dir.join(format!("{prefix}_histogram.svg")),
                    &render::histogram_svg(&result),
                    &mut manifest,
                )?;
            }
        }
    }
    manifest.write(&out_dir.join(format!("{prefix}_manifest.json")))
}
