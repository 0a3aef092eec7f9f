//! Fixed-protocol evaluation: the robot travels from (−R, 0) to (R, 0)
//! through obstacles randomized per episode, episode `i` using seed
//! `seed + i`.

use alloc::vec::Vec;

use crate::{
    sim::{run_episode, Classification, EpisodeOptions, EpisodeRecord, Policy, ScenarioConfig},
    Result,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeSummary {
    pub seed: u64,
    pub outcome: Classification,
    pub elapsed: f64,
    pub average_reward: f64,
    pub discounted_return: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub n_episodes: usize,
    pub success_rate: f64,
    pub collision_rate: f64,
    pub goal_missing_rate: f64,
    /// Mean time over episodes that reached the goal; `None` without any.
    pub average_time_to_goal: Option<f64>,
    /// Mean over episodes of the per-step average reward.
    pub mean_average_reward: f64,
    pub mean_discounted_return: f64,
    pub episodes: Vec<EpisodeSummary>,
}

impl EvalReport {
    pub fn from_episodes(episodes: Vec<EpisodeSummary>) -> Self {
        let n = episodes.len();
        let count = |c: Classification| episodes.iter().filter(|e| e.outcome == c).count();
        let successes = count(Classification::ReachedGoal);
        let collisions = count(Classification::Collision);
        let missing = n - successes - collisions;
        let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        let average_time_to_goal = (successes > 0).then(|| {
            episodes
                .iter()
                .filter(|e| e.outcome == Classification::ReachedGoal)
                .map(|e| e.elapsed)
                .sum::<f64>()
                / successes as f64
        });
        let mean = |f: fn(&EpisodeSummary) -> f64| {
            if n == 0 {
                0.0
            } else {
                episodes.iter().map(f).sum::<f64>() / n as f64
            }
        };
        let mean_average_reward = mean(|e| e.average_reward);
        let mean_discounted_return = mean(|e| e.discounted_return);
        Self {
            n_episodes: n,
            success_rate: rate(successes),
            collision_rate: rate(collisions),
            goal_missing_rate: rate(missing),
            average_time_to_goal,
            mean_average_reward,
            mean_discounted_return,
            episodes,
        }
    }
}

/// Evaluates `robot` for `n_episodes`. `gamma` only affects the reported
/// returns.
pub fn evaluate_policy(
    robot: &mut dyn Policy,
    obstacles: &mut dyn Policy,
    scenario: &ScenarioConfig,
    n_episodes: usize,
    seed: u64,
    gamma: f64,
) -> Result<EvalReport> {
    evaluate_policy_recorded(robot, obstacles, scenario, n_episodes, seed, gamma, 0).map(|(r, _)| r)
}

/// Like [`evaluate_policy`], also returning full records of the first
/// `record_first` episodes.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_policy_recorded(
    robot: &mut dyn Policy,
    obstacles: &mut dyn Policy,
    scenario: &ScenarioConfig,
    n_episodes: usize,
    seed: u64,
    gamma: f64,
    record_first: usize,
) -> Result<(EvalReport, Vec<EpisodeRecord>)> {
    let mut summaries = Vec::with_capacity(n_episodes);
    let mut records = Vec::new();
    for i in 0..n_episodes {
        let episode_seed = seed.wrapping_add(i as u64);
        let cfg = scenario.with_seed(episode_seed);
        let opts = EpisodeOptions {
            fixed_robot_endpoints: true,
            record: i < record_first,
        };
        let record = run_episode(&cfg, opts, robot, obstacles)?;
        summaries.push(EpisodeSummary {
            seed: episode_seed,
            outcome: record.outcome,
            elapsed: record.elapsed,
            average_reward: record.average_reward(),
            discounted_return: record.discounted_return(gamma, cfg.dt, cfg.preferred_speed),
        });
        if opts.record {
            records.push(record);
        }
    }
    Ok((EvalReport::from_episodes(summaries), records))
}
