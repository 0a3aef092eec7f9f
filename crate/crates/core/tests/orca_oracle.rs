mod common;

use a2cmp_core::{
    orca::{compute_orca_velocity, preferred_velocity, OrcaParams, OrcaPolicy},
    rng,
    sim::{generate_scenario, simulate_crowd, AgentState, Neighbor, ObservableState, ScenarioConfig},
    Vec2,
};
use common::{collision_free, sampled_orca_velocity};
use rand::Rng as _;

/// Two-agent configuration with the agent already moving at its preferred
/// velocity and a slow non-reactive neighbor, mostly placed ahead of it.
fn random_pair(rng: &mut rng::Rng) -> (AgentState, ObservableState) {
    let heading = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
    let speed = rng.gen_range(0.05..0.45);
    let mut agent = AgentState {
        position: Vec2::ZERO,
        velocity: Vec2::ZERO,
        radius: rng.gen_range(0.3..0.5),
        goal: Vec2::from_angle(heading) * 10.0,
        preferred_speed: speed,
        heading,
    };
    agent.velocity = preferred_velocity(&agent, 0.25);
    let radius = rng.gen_range(0.3..0.5);
    let offset = if rng.gen_bool(0.8) {
        rng.gen_range(-0.6..0.6)
    } else {
        rng.gen_range(-3.0..3.0)
    };
    let gap = rng.gen_range(0.01..1.5);
    let other = ObservableState {
        position: Vec2::from_angle(heading + offset) * (agent.radius + radius + gap),
        velocity: Vec2::from_angle(rng.gen_range(0.0..6.3)) * rng.gen_range(0.0..0.1),
        radius,
    };
    (agent, other)
}

#[test]
fn lp_matches_sampling_oracle() {
    let params = OrcaParams {
        safety_margin: 0.0,
        ..Default::default()
    };
    let mut active = 0;
    for case in 0..600 {
        let mut rng = rng::stream(2024 + case / 200, case % 200);
        let (agent, other) = random_pair(&mut rng);
        let v = compute_orca_velocity(
            &agent,
            &[Neighbor {
                state: other,
                responsive: false,
            }],
            &params,
            0.25,
        );
        let preferred = preferred_velocity(&agent, 0.25);
        let oracle = sampled_orca_velocity(
            agent.velocity,
            other.position - agent.position,
            other.velocity,
            agent.radius + other.radius,
            params.time_horizon,
            params.max_speed,
            preferred,
        )
        .expect("the speed disc always has a collision-free velocity here");
        if v.distance(preferred) > 1e-9 {
            active += 1;
        }
        assert!(v.distance(oracle) < 0.05, "case {case}: lp {v:?} oracle {oracle:?}");
    }
    assert!(active >= 150, "only {active} configurations exercised the constraint");
}

#[test]
fn lp_output_is_collision_free_over_the_horizon() {
    let params = OrcaParams {
        safety_margin: 0.0,
        ..Default::default()
    };
    let mut rng = rng::stream(7, 0);
    for _ in 0..200 {
        let (agent, other) = random_pair(&mut rng);
        let v = compute_orca_velocity(
            &agent,
            &[Neighbor {
                state: other,
                responsive: false,
            }],
            &params,
            0.25,
        );
        // Allow for the half-plane boundary being a tangent, not the curve.
        assert!(collision_free(
            other.position - agent.position,
            v - other.velocity,
            agent.radius + other.radius - 1e-6,
            params.time_horizon,
        ));
    }
}

#[test]
fn crowd_of_five_never_collides() {
    let mut at_goal = 0;
    for seed in 0..30 {
        let cfg = ScenarioConfig {
            n_obstacles: 4,
            ..ScenarioConfig::default().with_seed(seed)
        };
        let scenario = generate_scenario(&cfg, false).unwrap();
        let out = simulate_crowd(&cfg, scenario, &mut OrcaPolicy::default()).unwrap();
        assert_eq!(out.collision_steps, 0, "seed {seed}");
        assert!(out.min_separation >= 0.0);
        if out.all_at_goal.is_some() {
            at_goal += 1;
        }
    }
    assert!(at_goal >= 28, "{at_goal}/30 episodes finished");
}
