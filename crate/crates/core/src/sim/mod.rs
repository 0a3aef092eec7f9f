//! Circle-crossing world: scenario generation, holonomic stepping, collision
//! and goal detection, rewards, and episode execution under pluggable policies.

mod episode;
mod scenario;
mod state;

pub use episode::{
    run_episode, run_scenario, simulate_crowd, CrowdOutcome, EpisodeOptions, EpisodeRecord, Neighbor, Observation,
    Policy, StepRecord,
};
pub use scenario::{generate_scenario, Scenario, MAX_PLACEMENT_ATTEMPTS, PLACEMENT_MARGIN};
pub use state::{joint_state_len, AgentState, Disc, JointState, ObservableState, FULL_STATE_LEN, OBSERVABLE_STATE_LEN};

use alloc::format;

use crate::{geometry::Vec2, Error, Result};

/// Tolerance on speed-limit checks.
pub const SPEED_TOLERANCE: f64 = 1e-9;

/// Sign of the slope inside the proximity branch of the reward.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProximitySign {
    /// `-0.1 - d/2`: the penalty grows with separation inside the 0.2 m band.
    #[default]
    Minus,
    /// `-0.1 + d/2`: the penalty shrinks as the robot backs off.
    Plus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub circle_radius: f64,
    pub n_obstacles: usize,
    pub radius_range: (f64, f64),
    pub preferred_speed: f64,
    pub dt: f64,
    pub t_max: f64,
    pub rng_seed: u64,
    pub proximity_sign: ProximitySign,
    /// When set, obstacles do not see the robot.
    pub robot_invisible: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            circle_radius: 4.0,
            n_obstacles: 5,
            radius_range: (0.3, 0.5),
            preferred_speed: 1.0,
            dt: 0.25,
            t_max: 25.0,
            rng_seed: 0,
            proximity_sign: ProximitySign::Minus,
            robot_invisible: false,
        }
    }
}

impl ScenarioConfig {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..self.clone()
        }
    }

    /// Upper bound on the number of steps in one episode.
    pub fn max_steps(&self) -> usize {
        crate::math::ceil(self.t_max / self.dt - 1e-9) as usize
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.radius_range;
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.05 || hi > 2.0 || lo > hi {
            return Err(Error::InvalidConfig(format!(
                "radius range [{lo}, {hi}] must lie within [0.05, 2.0] with min <= max"
            )));
        }
        if !(self.circle_radius > 2.0 * hi) {
            return bad("circle radius must exceed twice the largest agent radius");
        }
        if !(self.preferred_speed > 0.0) || !self.preferred_speed.is_finite() {
            return bad("preferred speed must be positive");
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad("dt must be positive");
        }
        if !(self.t_max >= self.dt) || !self.t_max.is_finite() {
            return bad("t_max must be at least dt");
        }
        Ok(())
    }
}

/// `‖p_a − p_b‖ − (r_a + r_b)`; negative when the discs overlap.
pub fn separation_distance<A: Disc + ?Sized, B: Disc + ?Sized>(a: &A, b: &B) -> f64 {
    a.center().distance(b.center()) - (a.radius() + b.radius())
}

/// Holonomic update: the agent moves with `action` for `dt` seconds.
pub fn integrate_step(agent: &AgentState, action: Vec2, dt: f64) -> AgentState {
    let mut next = *agent;
    next.position = agent.position + action * dt;
    next.velocity = action;
    if action.norm() > 1e-9 {
        next.heading = action.angle();
    }
    next
}

/// Step reward, branches evaluated in order: collision, proximity, goal, zero.
pub fn compute_reward(min_separation: f64, at_goal: bool, sign: ProximitySign) -> f64 {
    if min_separation < 0.0 {
        -0.25
    } else if min_separation < 0.2 {
        match sign {
            ProximitySign::Minus => -0.1 - min_separation / 2.0,
            ProximitySign::Plus => -0.1 + min_separation / 2.0,
        }
    } else if at_goal {
        1.0
    } else {
        0.0
    }
}

/// Goal tolerance: the robot's center is within one robot radius of the goal.
pub fn at_goal(agent: &AgentState) -> bool {
    agent.distance_to_goal() < agent.radius
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Running,
    Collision,
    ReachedGoal,
    Timeout,
}

impl Classification {
    pub fn is_terminal(self) -> bool {
        self != Classification::Running
    }

    /// Goal or collision: an episode ending this way carries a learning signal.
    pub fn is_qualified(self) -> bool {
        matches!(self, Classification::Collision | Classification::ReachedGoal)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub classification: Classification,
    pub reward: f64,
    pub min_separation: f64,
}

pub fn classify_step<O: Disc>(robot: &AgentState, obstacles: &[O], elapsed: f64, cfg: &ScenarioConfig) -> StepOutcome {
    let min_separation = obstacles
        .iter()
        .map(|o| separation_distance(robot, o))
        .fold(f64::INFINITY, f64::min);
    let reached = at_goal(robot);
    let reward = compute_reward(min_separation, reached, cfg.proximity_sign);
    let classification = if min_separation < 0.0 {
        Classification::Collision
    } else if reached {
        Classification::ReachedGoal
    } else if elapsed >= cfg.t_max - 1e-9 {
        Classification::Timeout
    } else {
        Classification::Running
    };
    StepOutcome {
        classification,
        reward,
        min_separation,
    }
}
