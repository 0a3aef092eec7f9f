//! Flat `key = value` run configuration. `#` starts a comment; unknown keys
//! and unparsable values are reported with their line number.

use std::{path::Path, str::FromStr};

use a2cmp_core::{
    a2cmp::A2cmpConfig,
    dvl::{DvlConfig, MinibatchSource},
    orca::OrcaPolicy,
    sim::{ProximitySign, ScenarioConfig},
};

use crate::{error::CliError, Result};

/// Source of the demonstrations A2CMP imitates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Demonstrator {
    /// A deep V-learning network pretrained on ORCA demonstrations.
    #[default]
    Dvl,
    Orca,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    pub orca: OrcaPolicy,
    pub dvl: DvlConfig,
    pub a2cmp: A2cmpConfig,
    /// ORCA demonstration episodes used to pretrain deep V-learning.
    pub dvl_demos: usize,
    pub demonstrator: Demonstrator,
    /// Episodes of the final evaluation of every algorithm.
    pub eval_episodes: usize,
    pub export_traj: usize,
    pub checkpoint_interval: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            orca: OrcaPolicy::default(),
            dvl: DvlConfig::default(),
            a2cmp: A2cmpConfig::default(),
            dvl_demos: 3000,
            demonstrator: Demonstrator::Dvl,
            eval_episodes: 100,
            export_traj: 4,
            checkpoint_interval: 500,
            seed: 0,
        }
    }
}

/// Every accepted key, in documentation order.
pub const KEYS: &[&str] = &[
    "seed",
    "circle_radius",
    "n_obstacles",
    "radius_min",
    "radius_max",
    "preferred_speed",
    "dt",
    "t_max",
    "reward_proximity_sign",
    "robot_invisible",
    "fixed_robot_endpoints",
    "orca_time_horizon",
    "orca_neighbor_dist",
    "orca_safety_margin",
    "gamma",
    "demos",
    "demonstrator",
    "imitation_lr",
    "imitation_epochs",
    "imitation_batch_size",
    "lr",
    "batch_size",
    "episodes",
    "sync_interval",
    "memory_capacity",
    "minibatches",
    "entropy_coeff",
    "critic_coeff",
    "same_state_bootstrap",
    "training_eval_interval",
    "training_eval_episodes",
    "memory_init_min",
    "memory_init_max_episodes",
    "dvl_demos",
    "dvl_episodes",
    "dvl_lr",
    "dvl_batch_size",
    "dvl_epsilon_start",
    "dvl_epsilon_end",
    "dvl_epsilon_decay_episodes",
    "dvl_pretrain_epochs",
    "dvl_pretrain_lr",
    "dvl_minibatch_source",
    "eval_episodes",
    "export_traj",
    "checkpoint_interval",
];

fn parse<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| format!("cannot parse `{value}`: {e}"))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let s = &mut self.scenario;
        let a = &mut self.a2cmp;
        let d = &mut self.dvl;
        match key {
            "seed" => self.seed = parse(value)?,
            "circle_radius" => s.circle_radius = parse(value)?,
            "n_obstacles" => s.n_obstacles = parse(value)?,
            "radius_min" => s.radius_range.0 = parse(value)?,
            "radius_max" => s.radius_range.1 = parse(value)?,
            "preferred_speed" => s.preferred_speed = parse(value)?,
            "dt" => s.dt = parse(value)?,
            "t_max" => s.t_max = parse(value)?,
            "reward_proximity_sign" => {
                s.proximity_sign = match value {
                    "minus" => ProximitySign::Minus,
                    "plus" => ProximitySign::Plus,
                    _ => return Err(format!("expected `minus` or `plus`, found `{value}`")),
                }
            }
            "robot_invisible" => s.robot_invisible = parse(value)?,
            "fixed_robot_endpoints" => {
                let fixed = parse(value)?;
                a.fixed_robot_endpoints = fixed;
                d.fixed_robot_endpoints = fixed;
            }
            "orca_time_horizon" => self.orca.time_horizon = parse(value)?,
            "orca_neighbor_dist" => self.orca.neighbor_dist = parse(value)?,
            "orca_safety_margin" => self.orca.safety_margin = parse(value)?,
            "gamma" => {
                let gamma = parse(value)?;
                a.gamma = gamma;
                d.gamma = gamma;
            }
            "demos" => a.imitation.demos = parse(value)?,
            "demonstrator" => {
                self.demonstrator = match value {
                    "dvl" => Demonstrator::Dvl,
                    "orca" => Demonstrator::Orca,
                    _ => return Err(format!("expected `dvl` or `orca`, found `{value}`")),
                }
            }
            "imitation_lr" => a.imitation.learning_rate = parse(value)?,
            "imitation_epochs" => a.imitation.epochs = parse(value)?,
            "imitation_batch_size" => a.imitation.batch_size = parse(value)?,
            "lr" => a.learning_rate = parse(value)?,
            "batch_size" => a.batch_size = parse(value)?,
            "episodes" => a.episodes = parse(value)?,
            "sync_interval" => a.sync_interval = parse(value)?,
            "memory_capacity" => a.memory_capacity = parse(value)?,
            "minibatches" => a.minibatches = parse(value)?,
            "entropy_coeff" => a.entropy_coeff = parse(value)?,
            "critic_coeff" => a.critic_coeff = parse(value)?,
            "same_state_bootstrap" => a.same_state_bootstrap = parse(value)?,
            "training_eval_interval" => a.eval_interval = parse(value)?,
            "training_eval_episodes" => a.eval_episodes = parse(value)?,
            "memory_init_min" => a.memory_init_min = parse(value)?,
            "memory_init_max_episodes" => a.memory_init_max_episodes = parse(value)?,
            "dvl_demos" => self.dvl_demos = parse(value)?,
            "dvl_episodes" => d.episodes = parse(value)?,
            "dvl_lr" => d.learning_rate = parse(value)?,
            "dvl_batch_size" => d.batch_size = parse(value)?,
            "dvl_epsilon_start" => d.epsilon_start = parse(value)?,
            "dvl_epsilon_end" => d.epsilon_end = parse(value)?,
            "dvl_epsilon_decay_episodes" => d.epsilon_decay_episodes = Some(parse(value)?),
            "dvl_pretrain_epochs" => d.pretrain_epochs = parse(value)?,
            "dvl_pretrain_lr" => d.pretrain_learning_rate = parse(value)?,
            "dvl_minibatch_source" => {
                d.minibatch_source = match value {
                    "replay" => MinibatchSource::Replay,
                    "demonstrations" => MinibatchSource::Demonstrations,
                    _ => return Err(format!("expected `replay` or `demonstrations`, found `{value}`")),
                }
            }
            "eval_episodes" => self.eval_episodes = parse(value)?,
            "export_traj" => self.export_traj = parse(value)?,
            "checkpoint_interval" => self.checkpoint_interval = parse(value)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Parses a configuration text on top of the defaults.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_str(text)?;
        Ok(cfg)
    }

    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config {
                    line: i + 1,
                    key: line.to_owned(),
                    reason: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            self.set(key, value.trim()).map_err(|reason| CliError::Config {
                line: i + 1,
                key: key.to_owned(),
                reason,
            })?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_str(&crate::export::read_to_string(path)?)
    }

    /// Copies the global seed into every trainer.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Trainer configurations with the global seed applied.
    pub fn dvl_config(&self) -> DvlConfig {
        DvlConfig {
            seed: self.seed,
            ..self.dvl.clone()
        }
    }

    pub fn a2cmp_config(&self) -> A2cmpConfig {
        A2cmpConfig {
            seed: self.seed,
            ..self.a2cmp.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.dvl_config().validate()?;
        self.a2cmp_config().validate()?;
        if !(self.orca.time_horizon > 0.0) || !(self.orca.neighbor_dist > 0.0) || self.orca.safety_margin < 0.0 {
            return Err(a2cmp_core::Error::InvalidConfig("ORCA parameters must be positive".into()).into());
        }
        Ok(())
    }
}
