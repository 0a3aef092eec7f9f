//! The individual command-line operations.

use std::path::{Path, PathBuf};

use a2cmp_core::{
    a2cmp::{train_a2cmp, ActorCriticPair, ActorPolicy},
    actions::ActionTable,
    dvl::{collect_demonstrations, train_dvl, DemoMemory, DvlPolicy},
    eval::{evaluate_policy_recorded, EvalReport},
    mlp::NetworkParams,
    sim::{EpisodeRecord, Policy},
};

use crate::{
    checkpoint::{load_checkpoint_for, save_checkpoint, Algorithm, Checkpoint},
    config::RunConfig,
    demos::{load_demos, save_demos},
    export, write_file, CliError, Result,
};

/// A robot policy named on the command line.
#[derive(Clone, Debug, PartialEq)]
pub enum PolicySpec {
    Orca,
    Checkpoint(PathBuf),
}

impl PolicySpec {
    pub fn parse(s: &str) -> Self {
        if s == "orca" {
            PolicySpec::Orca
        } else {
            PolicySpec::Checkpoint(PathBuf::from(s))
        }
    }
}

/// A loaded robot policy that owns its network.
pub enum RobotPolicy {
    Orca(a2cmp_core::orca::OrcaPolicy),
    Network {
        checkpoint: Box<Checkpoint>,
        table: ActionTable,
    },
}

impl RobotPolicy {
    pub fn load(spec: &PolicySpec, cfg: &RunConfig) -> Result<Self> {
        Ok(match spec {
            PolicySpec::Orca => RobotPolicy::Orca(cfg.orca),
            PolicySpec::Checkpoint(path) => RobotPolicy::Network {
                checkpoint: Box::new(load_checkpoint_for(path, cfg.scenario.n_obstacles)?),
                table: ActionTable::new(cfg.scenario.preferred_speed)?,
            },
        })
    }

    pub fn from_params(params: NetworkParams, algorithm: Algorithm, cfg: &RunConfig) -> Result<Self> {
        Ok(RobotPolicy::Network {
            checkpoint: Box::new(Checkpoint { algorithm, params }),
            table: ActionTable::new(cfg.scenario.preferred_speed)?,
        })
    }

    /// Runs `f` with a greedy policy view.
    pub fn with_policy<T>(&self, cfg: &RunConfig, f: impl FnOnce(&mut dyn Policy) -> T) -> T {
        match self {
            RobotPolicy::Orca(p) => f(&mut p.clone()),
            RobotPolicy::Network { checkpoint, table } => match checkpoint.algorithm {
                Algorithm::A2cmp => f(&mut ActorPolicy::greedy(&checkpoint.params, table)),
                Algorithm::Dvl => f(&mut DvlPolicy::greedy(
                    checkpoint.params.clone(),
                    table.clone(),
                    cfg.dvl.gamma,
                    cfg.scenario.clone(),
                )),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RobotPolicy::Orca(_) => "ORCA",
            RobotPolicy::Network { checkpoint, .. } => match checkpoint.algorithm {
                Algorithm::Dvl => "DVL",
                Algorithm::A2cmp => "A2CMP",
            },
        }
    }
}

/// Runs the demonstrator; episode `i` uses scenario seed `seed + i`.
pub fn collect_demos(cfg: &RunConfig, demonstrator: &RobotPolicy, episodes: usize, seed: u64) -> Result<DemoMemory> {
    let table = ActionTable::new(cfg.scenario.preferred_speed)?;
    let scenario = cfg.scenario.with_seed(seed);
    let fixed = cfg.a2cmp.fixed_robot_endpoints;
    let mut obstacles = cfg.orca;
    demonstrator.with_policy(cfg, |robot| {
        collect_demonstrations(robot, &mut obstacles, &scenario, episodes, &table, cfg.dvl.gamma, fixed)
            .map_err(CliError::from)
    })
}

pub fn collect_demos_to(
    cfg: &RunConfig,
    spec: &PolicySpec,
    episodes: usize,
    seed: u64,
    out: &Path,
) -> Result<DemoMemory> {
    let demonstrator = RobotPolicy::load(spec, cfg)?;
    let demos = collect_demos(cfg, &demonstrator, episodes, seed)?;
    save_demos(&demos, out)?;
    Ok(demos)
}

pub fn load_required_demos(path: Option<&Path>) -> Result<DemoMemory> {
    let path = path.ok_or_else(|| {
        CliError::Usage("imitation needs demonstrations: run `collect-demos` first and pass --demos".into())
    })?;
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "demonstration file {} not found: run `collect-demos` first",
            path.display()
        )));
    }
    load_demos(path)
}

pub struct TrainedDvl {
    pub params: NetworkParams,
    pub curve: Vec<f64>,
}

pub fn train_dvl_to(cfg: &RunConfig, demos: Option<&DemoMemory>, out_dir: &Path) -> Result<TrainedDvl> {
    let mut obstacles = cfg.orca;
    let out = train_dvl(&cfg.dvl_config(), &cfg.scenario, demos, &mut obstacles)?;
    save_checkpoint(&out.params, Algorithm::Dvl, &out_dir.join("dvl.json"))?;
    write_file(
        &out_dir.join("dvl_curve.csv"),
        export::dvl_curve_csv(&out.curve).as_bytes(),
    )?;
    Ok(TrainedDvl {
        params: out.params,
        curve: out.curve,
    })
}

pub fn train_a2cmp_to(cfg: &RunConfig, demos: Option<&DemoMemory>, out_dir: &Path) -> Result<NetworkParams> {
    let mut obstacles = cfg.orca;
    let interval = cfg.checkpoint_interval;
    let mut write_error = None;
    let mut on_episode = |episode: usize, pair: &ActorCriticPair| {
        if interval > 0 && episode.is_multiple_of(interval) && write_error.is_none() {
            let path = out_dir.join("checkpoints").join(format!("a2cmp_ep{episode}.json"));
            write_error = save_checkpoint(&pair.acting, Algorithm::A2cmp, &path).err();
        }
    };
    let out = train_a2cmp(
        &cfg.a2cmp_config(),
        &cfg.scenario,
        demos,
        &mut obstacles,
        &mut on_episode,
    )?;
    if let Some(e) = write_error {
        return Err(e);
    }
    save_checkpoint(out.params(), Algorithm::A2cmp, &out_dir.join("a2cmp.json"))?;
    write_file(
        &out_dir.join("a2cmp_curve.csv"),
        export::curve_csv(&out.curve).as_bytes(),
    )?;
    Ok(out.pair.acting)
}

/// Evaluates and returns the report plus the first `record` trajectories.
pub fn evaluate(
    cfg: &RunConfig,
    robot: &RobotPolicy,
    episodes: usize,
    seed: u64,
    record: usize,
) -> Result<(EvalReport, Vec<EpisodeRecord>)> {
    let mut obstacles = cfg.orca;
    robot.with_policy(cfg, |policy| {
        evaluate_policy_recorded(
            policy,
            &mut obstacles,
            &cfg.scenario,
            episodes,
            seed,
            cfg.dvl.gamma,
            record,
        )
        .map_err(CliError::from)
    })
}

/// Writes `<prefix>_report.csv`, `<prefix>_episodes.csv` and one
/// `<prefix>_traj_<i>.csv` per recorded episode.
pub fn write_evaluation(
    out_dir: &Path,
    prefix: &str,
    name: &str,
    report: &EvalReport,
    records: &[EpisodeRecord],
) -> Result<()> {
    write_file(
        &out_dir.join(format!("{prefix}_report.csv")),
        export::comparison_csv(&[(name, report)]).as_bytes(),
    )?;
    write_file(
        &out_dir.join(format!("{prefix}_episodes.csv")),
        export::episodes_csv(report).as_bytes(),
    )?;
    for (i, rec) in records.iter().enumerate() {
        export::export_trajectories(&[(i, rec)], &out_dir.join(format!("{prefix}_traj_{i}.csv")))?;
    }
    Ok(())
}
