use a2cmp_core::{
    eval::{evaluate_policy, evaluate_policy_recorded},
    orca::OrcaPolicy,
    sim::{Classification, Observation, ScenarioConfig},
    Vec2,
};

fn straight(obs: &Observation<'_>) -> Vec2 {
    let d = obs.agent.goal - obs.agent.position;
    let dist = d.norm();
    if dist == 0.0 {
        Vec2::ZERO
    } else {
        d * (1.0f64.min(dist / obs.dt) / dist)
    }
}

#[test]
fn straight_line_reaches_goal_in_seven_point_seven_five_seconds() {
    let cfg = ScenarioConfig {
        n_obstacles: 0,
        ..Default::default()
    };
    let report = evaluate_policy(&mut straight, &mut OrcaPolicy::default(), &cfg, 20, 5, 0.9).unwrap();
    assert_eq!(report.success_rate, 1.0);
    assert_eq!(report.average_time_to_goal, Some(7.75));
    // 30 zero-reward steps, then the goal step.
    for e in &report.episodes {
        assert!((e.average_reward - 1.0 / 31.0).abs() < 1e-15);
        assert!((e.discounted_return - 0.9f64.powf(7.5)).abs() < 1e-12);
    }
}

#[test]
fn orca_robot_is_a_competent_baseline() {
    let cfg = ScenarioConfig::default();
    let report = evaluate_policy(
        &mut OrcaPolicy::default(),
        &mut OrcaPolicy::default(),
        &cfg,
        100,
        1 << 32,
        0.9,
    )
    .unwrap();
    assert!(report.success_rate >= 0.95, "success {}", report.success_rate);
    assert_eq!(report.collision_rate, 0.0);
    let sum = report.success_rate + report.collision_rate + report.goal_missing_rate;
    assert!((sum - 1.0).abs() < 1e-12);
    let t = report.average_time_to_goal.unwrap();
    assert!((7.75..25.0).contains(&t));
}

#[test]
fn evaluation_is_deterministic_and_records_prefix() {
    let cfg = ScenarioConfig::default();
    let run = || {
        evaluate_policy_recorded(
            &mut OrcaPolicy::default(),
            &mut OrcaPolicy::default(),
            &cfg,
            6,
            77,
            0.9,
            2,
        )
        .unwrap()
    };
    let (a, ra) = run();
    let (b, rb) = run();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    assert_eq!(ra.len(), 2);
    assert_eq!(
        a.episodes.iter().map(|e| e.seed).collect::<Vec<_>>(),
        (77..83).collect::<Vec<_>>()
    );
    assert!(ra.iter().all(|r| r.steps.len() == r.rewards.len()));
}

#[test]
fn rates_follow_outcome_counts() {
    let mut stop = |_: &Observation<'_>| Vec2::ZERO;
    let cfg = ScenarioConfig::default();
    let report = evaluate_policy(&mut stop, &mut OrcaPolicy::default(), &cfg, 25, 3, 0.9).unwrap();
    let count = |c| report.episodes.iter().filter(|e| e.outcome == c).count() as f64 / 25.0;
    assert_eq!(report.success_rate, count(Classification::ReachedGoal));
    assert_eq!(report.collision_rate, count(Classification::Collision));
    assert_eq!(report.goal_missing_rate, count(Classification::Timeout));
    assert_eq!(report.average_time_to_goal, None);
}
