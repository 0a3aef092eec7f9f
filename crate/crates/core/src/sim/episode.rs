use alloc::vec::Vec;

use super::{
    at_goal, classify_step, generate_scenario, integrate_step, separation_distance, AgentState, Classification,
    JointState, ObservableState, Scenario, ScenarioConfig, SPEED_TOLERANCE,
};
use crate::{geometry::Vec2, Error, Result};

/// Another agent as seen by the acting agent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub state: ObservableState,
    /// False for agents that are parked at their goal and no longer react.
    pub responsive: bool,
}

/// What a policy sees when asked for a velocity.
#[derive(Clone, Copy, Debug)]
pub struct Observation<'a> {
    /// 0 for the robot, `1 + i` for obstacle `i`.
    pub agent_index: usize,
    pub agent: &'a AgentState,
    /// For the robot: every obstacle in index order.
    pub neighbors: &'a [Neighbor],
    pub dt: f64,
}

impl Observation<'_> {
    pub fn joint_state(&self) -> JointState {
        JointState {
            robot: *self.agent,
            obstacles: self.neighbors.iter().map(|n| n.state).collect(),
        }
    }
}

/// Maps an observation to a velocity whose norm must not exceed the agent's
/// preferred speed.
pub trait Policy {
    fn act(&mut self, obs: &Observation<'_>) -> Vec2;
}

impl<F: FnMut(&Observation<'_>) -> Vec2> Policy for F {
    fn act(&mut self, obs: &Observation<'_>) -> Vec2 {
        self(obs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    /// Time at which `state` was observed.
    pub time: f64,
    pub state: JointState,
    pub action: Vec2,
    /// Reward received after applying `action`.
    pub reward: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    /// Per-step tuples; empty unless recording was requested.
    pub steps: Vec<StepRecord>,
    /// Reward of every step, recorded or not.
    pub rewards: Vec<f64>,
    /// Joint state after the last step.
    pub final_state: JointState,
    pub outcome: Classification,
    pub elapsed: f64,
}

impl EpisodeRecord {
    /// Mean of the per-step rewards; 0 for an empty episode.
    pub fn average_reward(&self) -> f64 {
        if self.rewards.is_empty() {
            return 0.0;
        }
        self.rewards.iter().sum::<f64>() / self.rewards.len() as f64
    }

    /// Return discounted per unit of robot travel: `Σ_t γ^(t·dt·v_pref) r_t`.
    pub fn discounted_return(&self, gamma: f64, dt: f64, preferred_speed: f64) -> f64 {
        let per_step = crate::math::powf(gamma, dt * preferred_speed);
        let mut discount = 1.0;
        let mut total = 0.0;
        for r in &self.rewards {
            total += discount * r;
            discount *= per_step;
        }
        total
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EpisodeOptions {
    pub fixed_robot_endpoints: bool,
    pub record: bool,
}

/// Generates a scenario from `cfg.rng_seed` and runs it to termination.
pub fn run_episode(
    cfg: &ScenarioConfig,
    opts: EpisodeOptions,
    robot_policy: &mut dyn Policy,
    obstacle_policy: &mut dyn Policy,
) -> Result<EpisodeRecord> {
    let scenario = generate_scenario(cfg, opts.fixed_robot_endpoints)?;
    run_scenario(cfg, scenario, opts.record, robot_policy, obstacle_policy)
}

fn checked(agent: usize, state: &AgentState, v: Vec2) -> Result<Vec2> {
    let limit = state.preferred_speed;
    if !v.is_finite() || v.norm() > limit + SPEED_TOLERANCE {
        return Err(Error::PolicyContract {
            agent,
            x: v.x,
            y: v.y,
            limit,
        });
    }
    Ok(v)
}

fn neighbors_of(
    index: usize,
    robot: &AgentState,
    obstacles: &[AgentState],
    parked: &[bool],
    robot_visible: bool,
    out: &mut Vec<Neighbor>,
) {
    out.clear();
    if index != 0 && robot_visible {
        out.push(Neighbor {
            state: robot.observable(),
            responsive: true,
        });
    }
    for (i, o) in obstacles.iter().enumerate() {
        if i + 1 != index {
            out.push(Neighbor {
                state: o.observable(),
                responsive: !parked[i],
            });
        }
    }
}

/// Runs a prepared scenario. All agents decide from the same pre-step
/// snapshot and move simultaneously; obstacles that reach their goal park
/// there with zero velocity.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    scenario: Scenario,
    record: bool,
    robot_policy: &mut dyn Policy,
    obstacle_policy: &mut dyn Policy,
) -> Result<EpisodeRecord> {
    cfg.validate()?;
    let Scenario {
        mut robot,
        mut obstacles,
    } = scenario;
    let n = obstacles.len();
    let mut parked: Vec<bool> = obstacles.iter().map(at_goal).collect();
    let mut steps = Vec::new();
    let mut rewards = Vec::new();
    let mut neighbors = Vec::with_capacity(n + 1);
    let mut actions = Vec::with_capacity(n);
    let mut step = 0usize;

    loop {
        let time = step as f64 * cfg.dt;

        neighbors_of(0, &robot, &obstacles, &parked, true, &mut neighbors);
        let obs = Observation {
            agent_index: 0,
            agent: &robot,
            neighbors: &neighbors,
            dt: cfg.dt,
        };
        let robot_action = checked(0, &robot, robot_policy.act(&obs))?;
        let snapshot = record.then(|| obs.joint_state());

        actions.clear();
        for i in 0..n {
            if parked[i] {
                actions.push(Vec2::ZERO);
                continue;
            }
            neighbors_of(i + 1, &robot, &obstacles, &parked, !cfg.robot_invisible, &mut neighbors);
            let obs = Observation {
                agent_index: i + 1,
                agent: &obstacles[i],
                neighbors: &neighbors,
                dt: cfg.dt,
            };
            actions.push(checked(i + 1, &obstacles[i], obstacle_policy.act(&obs))?);
        }

        robot = integrate_step(&robot, robot_action, cfg.dt);
        for (i, o) in obstacles.iter_mut().enumerate() {
            *o = integrate_step(o, actions[i], cfg.dt);
            if !parked[i] && at_goal(o) {
                parked[i] = true;
                o.velocity = Vec2::ZERO;
            }
        }

        step += 1;
        let elapsed = step as f64 * cfg.dt;
        let outcome = classify_step(&robot, &obstacles, elapsed, cfg);
        rewards.push(outcome.reward);
        if let Some(state) = snapshot {
            steps.push(StepRecord {
                time,
                state,
                action: robot_action,
                reward: outcome.reward,
            });
        }
        if outcome.classification.is_terminal() {
            let final_state = JointState {
                robot,
                obstacles: obstacles.iter().map(AgentState::observable).collect(),
            };
            return Ok(EpisodeRecord {
                steps,
                rewards,
                final_state,
                outcome: outcome.classification,
                elapsed,
            });
        }
    }
}

/// Result of [`simulate_crowd`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrowdOutcome {
    /// Smallest pairwise separation observed after any step.
    pub min_separation: f64,
    /// Number of steps at which at least one pair overlapped.
    pub collision_steps: usize,
    /// Time at which the last agent reached its goal, if all did before `t_max`.
    pub all_at_goal: Option<f64>,
}

/// Runs every agent of a scenario (robot included) under one policy until
/// all have parked at their goals or `t_max` elapses.
pub fn simulate_crowd(cfg: &ScenarioConfig, scenario: Scenario, policy: &mut dyn Policy) -> Result<CrowdOutcome> {
    cfg.validate()?;
    let mut agents = Vec::with_capacity(scenario.obstacles.len() + 1);
    agents.push(scenario.robot);
    agents.extend(scenario.obstacles);
    let n = agents.len();
    let mut parked: Vec<bool> = agents.iter().map(at_goal).collect();
    let mut neighbors = Vec::with_capacity(n);
    let mut actions = Vec::with_capacity(n);
    let mut min_separation = f64::INFINITY;
    let mut collision_steps = 0;
    let max_steps = cfg.max_steps();

    for step in 1..=max_steps {
        actions.clear();
        for i in 0..n {
            if parked[i] {
                actions.push(Vec2::ZERO);
                continue;
            }
            neighbors.clear();
            neighbors.extend(
                agents
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(j, a)| Neighbor {
                        state: a.observable(),
                        responsive: !parked[j],
                    }),
            );
            let obs = Observation {
                agent_index: i,
                agent: &agents[i],
                neighbors: &neighbors,
                dt: cfg.dt,
            };
            actions.push(checked(i, &agents[i], policy.act(&obs))?);
        }
        for (i, a) in agents.iter_mut().enumerate() {
            *a = integrate_step(a, actions[i], cfg.dt);
            if !parked[i] && at_goal(a) {
                parked[i] = true;
                a.velocity = Vec2::ZERO;
            }
        }
        let mut collided = false;
        for i in 0..n {
            for j in 0..i {
                let d = separation_distance(&agents[i], &agents[j]);
                min_separation = min_separation.min(d);
                collided |= d < 0.0;
            }
        }
        collision_steps += collided as usize;
        if parked.iter().all(|&p| p) {
            return Ok(CrowdOutcome {
                min_separation,
                collision_steps,
                all_at_goal: Some(step as f64 * cfg.dt),
            });
        }
    }
    Ok(CrowdOutcome {
        min_separation,
        collision_steps,
        all_at_goal: None,
    })
}
