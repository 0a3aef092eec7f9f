//! Optimal reciprocal collision avoidance: each neighbor contributes one
//! half-plane of permitted velocities, and the agent picks the permitted
//! velocity closest to its preferred velocity.

mod program;

pub use program::{solve_velocity_program, HalfPlane};

use alloc::vec::Vec;

use crate::{
    geometry::Vec2,
    sim::{AgentState, Neighbor, ObservableState, Observation, Policy},
};

/// Share of the avoidance effort taken by each agent of a reciprocating pair.
pub const RECIPROCITY: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrcaParams {
    /// Horizon (s) over which velocities must stay collision-free.
    pub time_horizon: f64,
    /// Neighbors farther than this (m) are ignored.
    pub neighbor_dist: f64,
    pub max_speed: f64,
    /// Added to the agent's own radius when building constraints.
    pub safety_margin: f64,
}

impl Default for OrcaParams {
    fn default() -> Self {
        Self {
            time_horizon: 3.0,
            neighbor_dist: 10.0,
            max_speed: 1.0,
            safety_margin: 0.05,
        }
    }
}

/// Velocity toward the goal at preferred speed, slowed so one step of length
/// `dt` never overshoots the goal.
pub fn preferred_velocity(agent: &AgentState, dt: f64) -> Vec2 {
    let to_goal = agent.goal - agent.position;
    let dist = to_goal.norm();
    if dist <= 0.0 {
        return Vec2::ZERO;
    }
    to_goal * (agent.preferred_speed.min(dist / dt) / dist)
}

/// Builds the half-plane of velocities that avoid `other` for `time_horizon`
/// seconds, assuming this agent takes `responsibility` of the required change.
pub fn half_plane_for(
    agent: &AgentState,
    other: &ObservableState,
    responsibility: f64,
    time_horizon: f64,
    dt: f64,
) -> HalfPlane {
    let relative_position = other.position - agent.position;
    let relative_velocity = agent.velocity - other.velocity;
    let dist_sq = relative_position.norm_sq();
    let combined_radius = agent.radius + other.radius;
    let combined_radius_sq = combined_radius * combined_radius;

    let direction;
    let u;
    if dist_sq > combined_radius_sq {
        let inv_horizon = 1.0 / time_horizon;
        // Vector from the truncation disc center to the relative velocity.
        let w = relative_velocity - relative_position * inv_horizon;
        let w_len_sq = w.norm_sq();
        let dot = w.dot(relative_position);

        if dot < 0.0 && dot * dot > combined_radius_sq * w_len_sq {
            // Nearest boundary point lies on the truncation disc.
            let w_len = crate::math::sqrt(w_len_sq);
            let unit_w = w / w_len;
            direction = Vec2::new(unit_w.y, -unit_w.x);
            u = unit_w * (combined_radius * inv_horizon - w_len);
        } else {
            // Nearest boundary point lies on one of the cone legs.
            let leg = crate::math::sqrt(dist_sq - combined_radius_sq);
            let p = relative_position;
            direction = if p.det(w) > 0.0 {
                Vec2::new(p.x * leg - p.y * combined_radius, p.x * combined_radius + p.y * leg) / dist_sq
            } else {
                -Vec2::new(p.x * leg + p.y * combined_radius, -p.x * combined_radius + p.y * leg) / dist_sq
            };
            u = direction * relative_velocity.dot(direction) - relative_velocity;
        }
    } else {
        // Already overlapping: resolve within one time step.
        let inv_dt = 1.0 / dt;
        let w = relative_velocity - relative_position * inv_dt;
        let w_len = w.norm();
        let unit_w = if w_len > 0.0 {
            w / w_len
        } else {
            (-relative_position).normalized_or_zero()
        };
        direction = Vec2::new(unit_w.y, -unit_w.x);
        u = unit_w * (combined_radius * inv_dt - w_len);
    }

    HalfPlane {
        point: agent.velocity + u * responsibility,
        direction,
    }
}

/// ORCA velocity for `agent` given its neighbors. Responsive neighbors share
/// the avoidance equally; non-responsive ones (parked agents) are avoided in full.
pub fn compute_orca_velocity(agent: &AgentState, neighbors: &[Neighbor], params: &OrcaParams, dt: f64) -> Vec2 {
    let mut agent = *agent;
    agent.radius += params.safety_margin;
    let agent = &agent;
    let range_sq = params.neighbor_dist * params.neighbor_dist;
    let lines: Vec<HalfPlane> = neighbors
        .iter()
        .filter(|n| (n.state.position - agent.position).norm_sq() <= range_sq)
        .map(|n| {
            let responsibility = if n.responsive { RECIPROCITY } else { 1.0 };
            half_plane_for(agent, &n.state, responsibility, params.time_horizon, dt)
        })
        .collect();
    solve_velocity_program(&lines, params.max_speed, preferred_velocity(agent, dt))
}

/// [`compute_orca_velocity`] as a simulator policy. The speed limit is each
/// agent's own preferred speed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrcaPolicy {
    pub time_horizon: f64,
    pub neighbor_dist: f64,
    pub safety_margin: f64,
}

impl Default for OrcaPolicy {
    fn default() -> Self {
        let p = OrcaParams::default();
        Self {
            time_horizon: p.time_horizon,
            neighbor_dist: p.neighbor_dist,
            safety_margin: p.safety_margin,
        }
    }
}

impl Policy for OrcaPolicy {
    fn act(&mut self, obs: &Observation<'_>) -> Vec2 {
        let params = OrcaParams {
            time_horizon: self.time_horizon,
            neighbor_dist: self.neighbor_dist,
            max_speed: obs.agent.preferred_speed,
            safety_margin: self.safety_margin,
        };
        let v = compute_orca_velocity(obs.agent, obs.neighbors, &params, obs.dt);
        // Guard the speed contract against rounding at the disc rim.
        let n = v.norm();
        if n > params.max_speed {
            v * (params.max_speed / n)
        } else {
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(p: Vec2, v: Vec2, goal: Vec2) -> AgentState {
        AgentState {
            position: p,
            velocity: v,
            radius: 0.3,
            goal,
            preferred_speed: 1.0,
            heading: 0.0,
        }
    }

    #[test]
    fn free_agent_heads_to_goal() {
        let a = agent(Vec2::ZERO, Vec2::ZERO, Vec2::new(10.0, 0.0));
        let v = compute_orca_velocity(&a, &[], &OrcaParams::default(), 0.25);
        assert_eq!(v, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn preferred_velocity_slows_near_goal() {
        let a = agent(Vec2::ZERO, Vec2::ZERO, Vec2::new(0.1, 0.0));
        let v = preferred_velocity(&a, 0.25);
        assert!((v - Vec2::new(0.4, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn stationary_neighbor_causes_lateral_deviation() {
        let a = agent(Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(10.0, 0.0));
        let other = ObservableState {
            position: Vec2::new(1.6, 0.0),
            velocity: Vec2::ZERO,
            radius: 0.3,
        };
        let n = [Neighbor {
            state: other,
            responsive: false,
        }];
        let v = compute_orca_velocity(&a, &n, &OrcaParams::default(), 0.25);
        assert!(v.norm() <= 1.0 + 1e-12);
        assert!(v.y.abs() > 0.1, "{v:?}");
    }

    #[test]
    fn translation_invariance() {
        let a = agent(Vec2::new(0.2, -0.1), Vec2::new(0.7, 0.1), Vec2::new(3.0, 1.0));
        let others = [
            Neighbor {
                state: ObservableState {
                    position: Vec2::new(1.4, 0.3),
                    velocity: Vec2::new(-0.5, 0.0),
                    radius: 0.4,
                },
                responsive: true,
            },
            Neighbor {
                state: ObservableState {
                    position: Vec2::new(0.9, -1.2),
                    velocity: Vec2::new(0.0, 0.6),
                    radius: 0.4,
                },
                responsive: false,
            },
        ];
        let base = compute_orca_velocity(&a, &others, &OrcaParams::default(), 0.25);
        let shift = Vec2::new(-3.25, 2.5);
        let mut a2 = a;
        a2.position += shift;
        a2.goal += shift;
        let mut o2 = others;
        for o in &mut o2 {
            o.state.position += shift;
        }
        let moved = compute_orca_velocity(&a2, &o2, &OrcaParams::default(), 0.25);
        assert!((base - moved).norm() < 1e-9);
    }

    #[test]
    fn overlapping_agents_push_apart() {
        let a = agent(Vec2::ZERO, Vec2::ZERO, Vec2::new(10.0, 0.0));
        let other = ObservableState {
            position: Vec2::new(0.4, 0.0),
            velocity: Vec2::ZERO,
            radius: 0.3,
        };
        let hp = half_plane_for(&a, &other, 1.0, 5.0, 0.25);
        // Zero velocity keeps the overlap, so it must be excluded.
        assert!(hp.violation(Vec2::ZERO) > 0.0);
        let v = compute_orca_velocity(
            &a,
            &[Neighbor {
                state: other,
                responsive: false,
            }],
            &OrcaParams::default(),
            0.25,
        );
        assert!(v.x < 0.0);
    }
}
