use std::{path::PathBuf, process::ExitCode};

use a2cmp::{
    commands::{self, PolicySpec, RobotPolicy},
    config::RunConfig,
    pipeline::run_pipeline,
    Result,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "a2cmp",
    version,
    about = "Crowd navigation with imitation-initialized advantage actor-critic"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    Dvl,
    A2cmp,
}

#[derive(Subcommand)]
enum Command {
    /// Record demonstrations from ORCA or a DVL checkpoint.
    CollectDemos {
        /// `orca` or the path of a checkpoint.
        #[arg(long, default_value = "orca")]
        policy: String,
        #[arg(long)]
        episodes: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train deep V-learning or A2CMP.
    Train {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        demos: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Start A2CMP from a random initialization.
        #[arg(long)]
        no_imitation: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate ORCA or a checkpoint on the fixed-endpoint protocol.
    Evaluate {
        #[arg(long, default_value = "orca")]
        policy: String,
        #[arg(long, default_value_t = 100)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Export trajectories of the first N episodes.
        #[arg(long, default_value_t = 0)]
        export_traj: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run every stage end to end.
    Pipeline {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Skip stages whose artifacts already exist.
        #[arg(long)]
        resume: bool,
    },
}

fn load_config(path: Option<&PathBuf>, seed: Option<u64>) -> Result<RunConfig> {
    let cfg = match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = seed.unwrap_or(cfg.seed);
    let cfg = cfg.with_seed(seed);
    cfg.validate()?;
    Ok(cfg)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::CollectDemos {
            policy,
            episodes,
            out,
            seed,
            config,
        } => {
            let cfg = load_config(config.as_ref(), Some(seed))?;
            let demos = commands::collect_demos_to(&cfg, &PolicySpec::parse(&policy), episodes, seed, &out)?;
            println!(
                "kept {} of {} episodes ({} steps) -> {}",
                demos.episodes_kept,
                episodes,
                demos.len(),
                out.display()
            );
        }
        Command::Train {
            algo,
            config,
            demos,
            out_dir,
            no_imitation,
            seed,
        } => {
            let cfg = load_config(config.as_ref(), seed)?;
            let skip_demos = match algo {
                Algo::A2cmp => no_imitation,
                Algo::Dvl => demos.is_none(),
            };
            let demos = if skip_demos {
                None
            } else {
                Some(commands::load_required_demos(demos.as_deref())?)
            };
            match algo {
                Algo::Dvl => {
                    let out = commands::train_dvl_to(&cfg, demos.as_ref(), &out_dir)?;
                    println!("trained DVL for {} episodes -> {}", out.curve.len(), out_dir.display());
                }
                Algo::A2cmp => {
                    commands::train_a2cmp_to(&cfg, demos.as_ref(), &out_dir)?;
                    println!(
                        "trained A2CMP for {} episodes -> {}",
                        cfg.a2cmp.episodes,
                        out_dir.display()
                    );
                }
            }
        }
        Command::Evaluate {
            policy,
            episodes,
            seed,
            out_dir,
            export_traj,
            config,
        } => {
            let cfg = load_config(config.as_ref(), Some(seed))?;
            let robot = RobotPolicy::load(&PolicySpec::parse(&policy), &cfg)?;
            let (report, records) = commands::evaluate(&cfg, &robot, episodes, seed, export_traj)?;
            let prefix = robot.name().to_lowercase();
            commands::write_evaluation(&out_dir, &prefix, robot.name(), &report, &records)?;
            print!("{}", a2cmp::export::comparison_csv(&[(robot.name(), &report)]));
        }
        Command::Pipeline {
            config,
            seed,
            out_dir,
            resume,
        } => {
            let cfg = load_config(config.as_ref(), seed)?;
            run_pipeline(&cfg, &out_dir, resume, &mut |line| eprintln!("{line}"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
