//! Advantage actor-critic for motion planning: imitation initialization,
//! replay of qualified episodes only, entropy-regularized combined loss, and
//! learning-to-acting network synchronization every K episodes.

mod loss;
mod replay;

pub use loss::{compute_losses, target_state_value, LossDiagnostics, LossOutput};
pub use replay::{Experience, ReplayMemory};

use alloc::{boxed::Box, vec::Vec};

use rand::{seq::SliceRandom, Rng as _};

use crate::{
    actions::ActionTable,
    dvl::{DemoMemory, DemoRecord},
    eval::evaluate_policy,
    mlp::{init_network, GradientDescent, GradientSet, NetworkParams, OutputGradient},
    orca::OrcaPolicy,
    rng,
    sim::{run_episode, Classification, EpisodeOptions, EpisodeRecord, Observation, Policy, ScenarioConfig},
    Error, Result, Vec2,
};

/// Seed of the first held-out evaluation episode used during training.
pub const TRAINING_EVAL_SEED: u64 = 1 << 40;

#[derive(Clone, Debug, PartialEq)]
pub struct ImitationConfig {
    pub demos: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for ImitationConfig {
    fn default() -> Self {
        Self {
            demos: 3000,
            learning_rate: 0.01,
            epochs: 50,
            batch_size: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct A2cmpConfig {
    pub episodes: usize,
    pub batch_size: usize,
    pub minibatches: usize,
    pub sync_interval: usize,
    pub learning_rate: f64,
    pub entropy_coeff: f64,
    pub critic_coeff: f64,
    pub gamma: f64,
    pub memory_capacity: usize,
    pub imitation: ImitationConfig,
    /// Greedy evaluation every this many episodes; 0 disables it.
    pub eval_interval: usize,
    pub eval_episodes: usize,
    /// Experiences required before training starts (at least `batch_size`).
    pub memory_init_min: usize,
    /// Episode budget for each of the two memory-initialization phases.
    pub memory_init_max_episodes: usize,
    pub fixed_robot_endpoints: bool,
    /// Bootstrap from the current state instead of the next one.
    pub same_state_bootstrap: bool,
    pub seed: u64,
}

impl Default for A2cmpConfig {
    fn default() -> Self {
        Self {
            episodes: 10_000,
            batch_size: 100,
            minibatches: 1,
            sync_interval: 50,
            learning_rate: 0.001,
            entropy_coeff: 0.01,
            critic_coeff: 0.5,
            gamma: 0.9,
            memory_capacity: 100_000,
            imitation: ImitationConfig::default(),
            eval_interval: 100,
            eval_episodes: 20,
            memory_init_min: 500,
            memory_init_max_episodes: 200,
            fixed_robot_endpoints: false,
            same_state_bootstrap: false,
            seed: 0,
        }
    }
}

impl A2cmpConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if !(self.entropy_coeff > 0.0 && self.entropy_coeff <= 1.0) {
            return bad("entropy_coeff must lie in (0, 1]");
        }
        if !(self.critic_coeff > 0.0 && self.critic_coeff <= 1.0) {
            return bad("critic_coeff must lie in (0, 1]");
        }
        if self.sync_interval == 0 {
            return bad("sync_interval must be at least 1");
        }
        if !(self.learning_rate > 0.0) || !(self.imitation.learning_rate > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1)");
        }
        if self.batch_size == 0 || self.minibatches == 0 || self.imitation.batch_size == 0 {
            return bad("batch sizes and minibatch count must be positive");
        }
        if self.memory_capacity == 0 {
            return bad("memory capacity must be positive");
        }
        Ok(())
    }
}

/// The acting networks generate experience; the learning networks receive
/// every gradient step and are copied into the acting ones on sync.
#[derive(Clone, Debug, PartialEq)]
pub struct ActorCriticPair {
    pub acting: NetworkParams,
    pub learning: NetworkParams,
}

impl ActorCriticPair {
    pub fn new(params: NetworkParams) -> Self {
        Self {
            learning: params.clone(),
            acting: params,
        }
    }

    pub fn sync(&mut self) {
        self.acting.clone_from(&self.learning);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionMode {
    Greedy,
    Sample,
}

/// Robot policy reading actions off the actor head. Records the label of
/// every action it takes.
#[derive(Clone, Debug)]
pub struct ActorPolicy<'a> {
    params: &'a NetworkParams,
    table: &'a ActionTable,
    mode: ActionMode,
    rng: rng::Rng,
    pub labels: Vec<usize>,
}

impl<'a> ActorPolicy<'a> {
    pub fn greedy(params: &'a NetworkParams, table: &'a ActionTable) -> Self {
        Self {
            params,
            table,
            mode: ActionMode::Greedy,
            rng: rng::stream(0, rng::streams::EXPLORATION),
            labels: Vec::new(),
        }
    }

    pub fn sampling(params: &'a NetworkParams, table: &'a ActionTable, seed: u64) -> Self {
        Self {
            params,
            table,
            mode: ActionMode::Sample,
            rng: rng::stream(seed, rng::streams::EXPLORATION),
            labels: Vec::new(),
        }
    }
}

/// Draws a label from `probs` by inverse transform.
pub fn sample_label(probs: &[f64], rng: &mut rng::Rng) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

impl Policy for ActorPolicy<'_> {
    fn act(&mut self, obs: &Observation<'_>) -> Vec2 {
        // A shape mismatch yields NaN, which the simulator rejects as a
        // policy-contract error.
        let Ok(trace) = self.params.forward(&obs.joint_state().flatten()) else {
            return Vec2::new(f64::NAN, f64::NAN);
        };
        let label = match self.mode {
            ActionMode::Greedy => trace.argmax(),
            ActionMode::Sample => sample_label(&trace.probs, &mut self.rng),
        };
        self.labels.push(label);
        self.table.velocity_of(label)
    }
}

/// Supervised initialization: cross-entropy on the demonstrated labels plus
/// squared error on the demonstrated values, through the shared trunk.
pub fn imitation_init(
    demos: &DemoMemory,
    cfg: &ImitationConfig,
    n_obstacles: usize,
    seed: u64,
) -> Result<NetworkParams> {
    imitation_train(init_network(n_obstacles, seed), &demos.records, cfg, seed)
}

/// Runs the imitation epochs starting from `params`.
pub fn imitation_train(
    mut params: NetworkParams,
    records: &[DemoRecord],
    cfg: &ImitationConfig,
    seed: u64,
) -> Result<NetworkParams> {
    if records.is_empty() {
        return Err(Error::EmptyDemonstrations);
    }
    if let Some(r) = records.iter().find(|r| r.state.len() != params.input_width()) {
        return Err(Error::Shape {
            expected: params.input_width(),
            found: r.state.len(),
        });
    }
    let mut rng = rng::stream(seed, rng::streams::IMITATION);
    let mut order: Vec<usize> = (0..records.len()).collect();
    let mut d_logits = Vec::with_capacity(crate::actions::ACTION_COUNT);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let scale = 1.0 / chunk.len() as f64;
            let mut grads = GradientSet::zeros_like(&params);
            for &i in chunk {
                let r = &records[i];
                let trace = params.forward(&r.state)?;
                d_logits.clear();
                d_logits.extend(
                    trace
                        .probs
                        .iter()
                        .enumerate()
                        .map(|(k, p)| scale * (p - if k == r.label { 1.0 } else { 0.0 })),
                );
                let d_value = 2.0 * scale * (trace.value - r.value);
                params.backward_into(
                    &trace,
                    OutputGradient {
                        d_value,
                        d_logits: Some(&d_logits),
                    },
                    &mut grads,
                );
            }
            params.apply_update(&grads, cfg.learning_rate)?;
        }
    }
    Ok(params)
}

/// Fraction of records whose label is the policy's argmax.
pub fn label_agreement(params: &NetworkParams, records: &[DemoRecord]) -> Result<f64> {
    if records.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0usize;
    for r in records {
        if params.forward(&r.state)?.argmax() == r.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / records.len() as f64)
}

/// Turns a recorded episode into experiences, bootstrapping the value
/// targets with `critic`. `labels` holds the action label of every step.
pub fn stage_experiences(
    record: &EpisodeRecord,
    labels: &[usize],
    critic: &NetworkParams,
    cfg: &A2cmpConfig,
    scenario: &ScenarioConfig,
) -> Result<Vec<Experience>> {
    let n = record.steps.len();
    let final_state = record.final_state.flatten();
    let mut staged = Vec::with_capacity(n);
    for (t, (step, label)) in record.steps.iter().zip(labels).enumerate() {
        let state = step.state.flatten();
        let terminal = t + 1 == n && record.outcome.is_terminal() && record.outcome != Classification::Timeout;
        let bootstrap_state = if cfg.same_state_bootstrap {
            state.clone()
        } else if t + 1 < n {
            record.steps[t + 1].state.flatten()
        } else {
            final_state.clone()
        };
        let value_target = target_state_value(
            step.reward,
            &bootstrap_state,
            critic,
            cfg.gamma,
            scenario.dt,
            step.state.robot.preferred_speed,
            terminal,
        )?;
        staged.push(Experience {
            state,
            action_label: *label,
            value_target,
            outcome: record.outcome,
        });
    }
    Ok(staged)
}

/// One rollout with actions sampled from the acting policy. Qualified
/// episodes are committed to `memory` with targets from the learning critic.
pub fn run_training_episode(
    pair: &ActorCriticPair,
    table: &ActionTable,
    scenario: &ScenarioConfig,
    cfg: &A2cmpConfig,
    memory: &mut ReplayMemory,
    obstacle_policy: &mut dyn Policy,
) -> Result<EpisodeRecord> {
    let mut policy = ActorPolicy::sampling(&pair.acting, table, scenario.rng_seed);
    let opts = EpisodeOptions {
        fixed_robot_endpoints: cfg.fixed_robot_endpoints,
        record: true,
    };
    let record = run_episode(scenario, opts, &mut policy, obstacle_policy)?;
    if record.outcome.is_qualified() {
        let staged = stage_experiences(&record, &policy.labels, &pair.learning, cfg, scenario)?;
        memory.commit_episode(staged, record.outcome)?;
    }
    Ok(record)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Train,
    Eval,
}

/// One row of the training curve. Episodes are numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveRow {
    pub episode: usize,
    pub kind: CurveKind,
    /// Mean per-step reward of the training episode, or its mean over the
    /// evaluation episodes.
    pub avg_reward: f64,
    pub diagnostics: Option<LossDiagnostics>,
    pub memory_size: usize,
    pub success_rate_eval: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct A2cmpOutcome {
    pub pair: ActorCriticPair,
    pub curve: Vec<CurveRow>,
    pub memory_size: usize,
}

impl A2cmpOutcome {
    pub fn params(&self) -> &NetworkParams {
        &self.pair.acting
    }
}

fn fill_memory(
    pair: &ActorCriticPair,
    table: &ActionTable,
    scenario: &ScenarioConfig,
    cfg: &A2cmpConfig,
    memory: &mut ReplayMemory,
    obstacle_policy: &mut dyn Policy,
    seeds: &mut rng::Rng,
) -> Result<()> {
    let target = cfg.memory_init_min.max(cfg.batch_size).min(memory.capacity());
    for _ in 0..cfg.memory_init_max_episodes {
        if memory.len() >= target {
            return Ok(());
        }
        let episode = scenario.with_seed(seeds.gen());
        run_training_episode(pair, table, &episode, cfg, memory, obstacle_policy)?;
    }
    let opts = EpisodeOptions {
        fixed_robot_endpoints: cfg.fixed_robot_endpoints,
        record: true,
    };
    for _ in 0..cfg.memory_init_max_episodes {
        if memory.len() >= target {
            break;
        }
        let episode = scenario.with_seed(seeds.gen());
        let record = run_episode(&episode, opts, &mut OrcaPolicy::default(), obstacle_policy)?;
        if record.outcome.is_qualified() {
            let labels: Vec<usize> = record.steps.iter().map(|s| table.snap_to_grid(s.action)).collect();
            let staged = stage_experiences(&record, &labels, &pair.learning, cfg, scenario)?;
            memory.commit_episode(staged, record.outcome)?;
        }
    }
    Ok(())
}

/// Full training run. `demos = None` skips imitation and starts from a random
/// initialization. `on_episode` sees both networks after every episode.
pub fn train_a2cmp(
    cfg: &A2cmpConfig,
    scenario: &ScenarioConfig,
    demos: Option<&DemoMemory>,
    obstacle_policy: &mut dyn Policy,
    on_episode: &mut dyn FnMut(usize, &ActorCriticPair),
) -> Result<A2cmpOutcome> {
    cfg.validate()?;
    scenario.validate()?;
    let table = ActionTable::new(scenario.preferred_speed)?;
    let init = match demos {
        Some(d) => imitation_init(d, &cfg.imitation, scenario.n_obstacles, cfg.seed)?,
        None => init_network(scenario.n_obstacles, cfg.seed),
    };
    let mut pair = ActorCriticPair::new(init);
    let mut memory = ReplayMemory::new(cfg.memory_capacity)?;
    let mut seeds = rng::stream(cfg.seed, rng::streams::EPISODES);
    let mut sampler = rng::stream(cfg.seed, rng::streams::REPLAY);
    if cfg.episodes > 0 {
        fill_memory(&pair, &table, scenario, cfg, &mut memory, obstacle_policy, &mut seeds)?;
    }
    let mut optimizer = GradientDescent::new(cfg.learning_rate);
    let mut curve = Vec::with_capacity(cfg.episodes + cfg.episodes / cfg.eval_interval.max(1));

    for episode in 0..cfg.episodes {
        let numeric = |e: Error| Error::Numeric {
            episode,
            source: Box::new(e),
        };
        let episode_cfg = scenario.with_seed(seeds.gen());
        let record = run_training_episode(&pair, &table, &episode_cfg, cfg, &mut memory, obstacle_policy)?;

        let mut diag = LossDiagnostics::default();
        if !memory.is_empty() {
            let share = 1.0 / cfg.minibatches as f64;
            for _ in 0..cfg.minibatches {
                let batch = memory.sample(&mut sampler, cfg.batch_size);
                let out =
                    compute_losses(&batch, &pair.learning, cfg.entropy_coeff, cfg.critic_coeff).map_err(numeric)?;
                optimizer.step(&mut pair.learning, &out.grads).map_err(numeric)?;
                diag.policy_loss += share * out.diagnostics.policy_loss;
                diag.critic_loss += share * out.diagnostics.critic_loss;
                diag.entropy += share * out.diagnostics.entropy;
                diag.mean_advantage += share * out.diagnostics.mean_advantage;
            }
        }
        if (episode + 1) % cfg.sync_interval == 0 {
            pair.sync();
        }
        curve.push(CurveRow {
            episode: episode + 1,
            kind: CurveKind::Train,
            avg_reward: record.average_reward(),
            diagnostics: Some(diag),
            memory_size: memory.len(),
            success_rate_eval: None,
        });
        if cfg.eval_interval > 0 && (episode + 1) % cfg.eval_interval == 0 {
            let report = evaluate_policy(
                &mut ActorPolicy::greedy(&pair.acting, &table),
                obstacle_policy,
                scenario,
                cfg.eval_episodes,
                TRAINING_EVAL_SEED,
                cfg.gamma,
            )?;
            curve.push(CurveRow {
                episode: episode + 1,
                kind: CurveKind::Eval,
                avg_reward: report.mean_average_reward,
                diagnostics: None,
                memory_size: memory.len(),
                success_rate_eval: Some(report.success_rate),
            });
        }
        on_episode(episode + 1, &pair);
    }
    let memory_size = memory.len();
    Ok(A2cmpOutcome {
        pair,
        curve,
        memory_size,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(A2cmpConfig::default().validate().is_ok());
        for cfg in [
            A2cmpConfig {
                entropy_coeff: 0.0,
                ..Default::default()
            },
            A2cmpConfig {
                critic_coeff: 1.5,
                ..Default::default()
            },
            A2cmpConfig {
                sync_interval: 0,
                ..Default::default()
            },
            A2cmpConfig {
                learning_rate: -1.0,
                ..Default::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn sampling_follows_the_distribution() {
        let mut rng = rng::stream(1, 0);
        let probs = [0.0, 0.25, 0.0, 0.75];
        let mut counts = [0usize; 4];
        for _ in 0..4000 {
            counts[sample_label(&probs, &mut rng)] += 1;
        }
        assert_eq!(counts[0] + counts[2], 0);
        assert!((counts[3] as f64 / 4000.0 - 0.75).abs() < 0.03);
    }

    #[test]
    fn zero_episodes_returns_initialization() {
        let cfg = A2cmpConfig {
            episodes: 0,
            seed: 9,
            ..Default::default()
        };
        let scenario = ScenarioConfig {
            n_obstacles: 1,
            ..Default::default()
        };
        let out = train_a2cmp(&cfg, &scenario, None, &mut OrcaPolicy::default(), &mut |_, _| {}).unwrap();
        assert_eq!(out.pair.acting, init_network(1, 9));
        assert!(out.curve.is_empty());
    }

    #[test]
    fn empty_demos_are_rejected() {
        let err = imitation_init(&DemoMemory::default(), &ImitationConfig::default(), 0, 0);
        assert_eq!(err.unwrap_err(), Error::EmptyDemonstrations);
    }

    #[test]
    fn zero_epochs_is_identity() {
        let demos = DemoMemory {
            records: alloc::vec![DemoRecord {
                state: alloc::vec![0.0; 9],
                label: 3,
                value: 0.5,
                episode: 0
            }],
            episodes_run: 1,
            episodes_kept: 1,
        };
        let cfg = ImitationConfig {
            epochs: 0,
            ..Default::default()
        };
        assert_eq!(imitation_init(&demos, &cfg, 0, 2).unwrap(), init_network(0, 2));
    }

    #[test]
    fn overfits_a_single_demo() {
        let demos = DemoMemory {
            records: alloc::vec![DemoRecord {
                state: alloc::vec![0.5; 14],
                label: 42,
                value: 0.7,
                episode: 0
            }],
            episodes_run: 1,
            episodes_kept: 1,
        };
        let cfg = ImitationConfig {
            epochs: 200,
            ..Default::default()
        };
        let net = imitation_init(&demos, &cfg, 1, 0).unwrap();
        let trace = net.forward(&demos.records[0].state).unwrap();
        assert_eq!(trace.argmax(), 42);
        assert!((trace.value - 0.7).abs() < 0.05);
    }
}
