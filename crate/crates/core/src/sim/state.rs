use alloc::vec::Vec;

use crate::geometry::Vec2;

/// Scalars in a robot's full state: `[px, py, vx, vy, r, gx, gy, v_pref, heading]`.
pub const FULL_STATE_LEN: usize = 9;
/// Scalars in an observable state: `[px, py, vx, vy, r]`.
pub const OBSERVABLE_STATE_LEN: usize = 5;

/// Width of the flattened joint state for `n_obstacles` obstacles.
pub const fn joint_state_len(n_obstacles: usize) -> usize {
    FULL_STATE_LEN + OBSERVABLE_STATE_LEN * n_obstacles
}

/// Complete state of one agent: the observable part (position, velocity,
/// radius) and the hidden part (goal, preferred speed, heading).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AgentState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
    pub goal: Vec2,
    pub preferred_speed: f64,
    pub heading: f64,
}

impl AgentState {
    pub fn observable(&self) -> ObservableState {
        ObservableState {
            position: self.position,
            velocity: self.velocity,
            radius: self.radius,
        }
    }

    pub fn distance_to_goal(&self) -> f64 {
        self.position.distance(self.goal)
    }

    pub fn features(&self) -> [f64; FULL_STATE_LEN] {
        [
            self.position.x,
            self.position.y,
            self.velocity.x,
            self.velocity.y,
            self.radius,
            self.goal.x,
            self.goal.y,
            self.preferred_speed,
            self.heading,
        ]
    }
}

/// The part of an agent's state other agents can measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableState {
    pub position: Vec2,
    pub velocity: Vec2,
    pub radius: f64,
}

impl ObservableState {
    pub fn features(&self) -> [f64; OBSERVABLE_STATE_LEN] {
        [
            self.position.x,
            self.position.y,
            self.velocity.x,
            self.velocity.y,
            self.radius,
        ]
    }
}

/// Anything occupying a disc in the plane.
pub trait Disc {
    fn center(&self) -> Vec2;
    fn radius(&self) -> f64;
}

impl Disc for AgentState {
    fn center(&self) -> Vec2 {
        self.position
    }
    fn radius(&self) -> f64 {
        self.radius
    }
}

impl Disc for ObservableState {
    fn center(&self) -> Vec2 {
        self.position
    }
    fn radius(&self) -> f64 {
        self.radius
    }
}

/// Robot full state followed by every obstacle's observable state, in agent
/// index order. This is the network input.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    pub robot: AgentState,
    pub obstacles: Vec<ObservableState>,
}

impl JointState {
    pub fn len(&self) -> usize {
        joint_state_len(self.obstacles.len())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        self.flatten_into(&mut out);
        out
    }

    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(&self.robot.features());
        for o in &self.obstacles {
            out.extend_from_slice(&o.features());
        }
    }

    /// Smallest separation between the robot and any obstacle, `+inf` without obstacles.
    pub fn min_separation(&self) -> f64 {
        self.obstacles
            .iter()
            .map(|o| super::separation_distance(&self.robot, o))
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattened_layout() {
        let robot = AgentState {
            position: Vec2::new(1.0, 2.0),
            velocity: Vec2::new(3.0, 4.0),
            radius: 0.3,
            goal: Vec2::new(5.0, 6.0),
            preferred_speed: 1.0,
            heading: 0.5,
        };
        let obstacle = ObservableState {
            position: Vec2::new(7.0, 8.0),
            velocity: Vec2::new(9.0, 10.0),
            radius: 0.4,
        };
        let js = JointState {
            robot,
            obstacles: alloc::vec![obstacle, obstacle],
        };
        let flat = js.flatten();
        assert_eq!(flat.len(), 19);
        assert_eq!(&flat[..9], &[1.0, 2.0, 3.0, 4.0, 0.3, 5.0, 6.0, 1.0, 0.5]);
        assert_eq!(&flat[9..14], &[7.0, 8.0, 9.0, 10.0, 0.4]);
    }
}
