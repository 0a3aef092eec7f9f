use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng as _;

use super::{AgentState, ScenarioConfig};
use crate::{geometry::Vec2, rng, Error, Result};

/// Re-sampling budget per agent before the configuration is declared overcrowded.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 1000;
/// Extra clearance, in meters, required between start (and goal) discs.
pub const PLACEMENT_MARGIN: f64 = 0.1;
/// Half-width, in radians, of the rotation applied to each antipodal goal.
const GOAL_JITTER: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub robot: AgentState,
    pub obstacles: Vec<AgentState>,
}

/// Places the robot and `cfg.n_obstacles` obstacles on the circle, each with a
/// goal near its antipode. All obstacles share one radius; the robot's radius
/// is drawn independently. Deterministic in `cfg.rng_seed`.
pub fn generate_scenario(cfg: &ScenarioConfig, fixed_robot_endpoints: bool) -> Result<Scenario> {
    cfg.validate()?;
    let mut rng = rng::stream(cfg.rng_seed, rng::streams::SCENARIO);
    let (lo, hi) = cfg.radius_range;
    let robot_radius = rng.gen_range(lo..=hi);
    let obstacle_radius = rng.gen_range(lo..=hi);
    let r = cfg.circle_radius;

    let make = |start: Vec2, goal: Vec2, radius: f64| AgentState {
        position: start,
        velocity: Vec2::ZERO,
        radius,
        goal,
        preferred_speed: cfg.preferred_speed,
        heading: (goal - start).angle(),
    };

    let fits = |placed: &[AgentState], start: Vec2, goal: Vec2, radius: f64| {
        placed.iter().all(|other| {
            let clearance = radius + other.radius + PLACEMENT_MARGIN;
            start.distance(other.position) >= clearance && goal.distance(other.goal) >= clearance
        })
    };

    let sample_endpoints = |rng: &mut rng::Rng| {
        let angle = rng.gen_range(0.0..TAU);
        let start = Vec2::from_angle(angle) * r;
        let jitter = rng.gen_range(-GOAL_JITTER..=GOAL_JITTER);
        (start, (-start).rotated(jitter))
    };

    let robot = if fixed_robot_endpoints {
        make(Vec2::new(-r, 0.0), Vec2::new(r, 0.0), robot_radius)
    } else {
        let (start, goal) = sample_endpoints(&mut rng);
        make(start, goal, robot_radius)
    };

    let mut placed = Vec::with_capacity(cfg.n_obstacles + 1);
    placed.push(robot);
    for agent in 1..=cfg.n_obstacles {
        let mut attempts = 0;
        loop {
            if attempts == MAX_PLACEMENT_ATTEMPTS {
                return Err(Error::ScenarioGeneration { agent, attempts });
            }
            attempts += 1;
            let (start, goal) = sample_endpoints(&mut rng);
            if fits(&placed, start, goal, obstacle_radius) {
                placed.push(make(start, goal, obstacle_radius));
                break;
            }
        }
    }
    let obstacles = placed.split_off(1);
    Ok(Scenario { robot, obstacles })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::separation_distance;

    #[test]
    fn fixed_endpoints() {
        let s = generate_scenario(&ScenarioConfig::default(), true).unwrap();
        assert_eq!(s.robot.position, Vec2::new(-4.0, 0.0));
        assert_eq!(s.robot.goal, Vec2::new(4.0, 0.0));
        assert_eq!(s.obstacles.len(), 5);
    }

    #[test]
    fn no_obstacles() {
        let cfg = ScenarioConfig {
            n_obstacles: 0,
            ..Default::default()
        };
        let s = generate_scenario(&cfg, true).unwrap();
        assert!(s.obstacles.is_empty());
    }

    #[test]
    fn deterministic_in_seed() {
        let cfg = ScenarioConfig {
            rng_seed: 17,
            ..Default::default()
        };
        assert_eq!(
            generate_scenario(&cfg, false).unwrap(),
            generate_scenario(&cfg, false).unwrap()
        );
        let other = generate_scenario(&cfg.with_seed(18), false).unwrap();
        assert_ne!(generate_scenario(&cfg, false).unwrap(), other);
    }

    #[test]
    fn placement_respects_clearance_and_shared_radius() {
        for seed in 0..200 {
            let cfg = ScenarioConfig {
                rng_seed: seed,
                ..Default::default()
            };
            let s = generate_scenario(&cfg, seed % 2 == 0).unwrap();
            let r0 = s.obstacles[0].radius;
            assert!(s.obstacles.iter().all(|o| o.radius == r0));
            assert!((0.3..=0.5).contains(&s.robot.radius));
            let mut all = alloc::vec![s.robot];
            all.extend_from_slice(&s.obstacles);
            for i in 0..all.len() {
                assert!((all[i].position.norm() - 4.0).abs() < 1e-9);
                assert!(all[i].distance_to_goal() > 7.0);
                for j in 0..i {
                    assert!(separation_distance(&all[i], &all[j]) >= PLACEMENT_MARGIN - 1e-12);
                }
            }
        }
    }

    #[test]
    fn overcrowded_config_fails() {
        let cfg = ScenarioConfig {
            circle_radius: 1.5,
            n_obstacles: 20,
            radius_range: (0.5, 0.5),
            ..Default::default()
        };
        assert!(matches!(
            generate_scenario(&cfg, true),
            Err(Error::ScenarioGeneration { .. })
        ));
    }
}
