use alloc::vec::Vec;

use crate::{
    dvl::step_discount,
    mlp::{GradientSet, NetworkParams, OutputGradient},
    Error, Result,
};

use super::Experience;

/// Bootstrapped value target. Terminal steps return the reward itself.
pub fn target_state_value(
    reward: f64,
    next_state: &[f64],
    learning_critic: &NetworkParams,
    gamma: f64,
    dt: f64,
    preferred_speed: f64,
    terminal: bool,
) -> Result<f64> {
    if terminal {
        return Ok(reward);
    }
    Ok(reward + step_discount(gamma, dt, preferred_speed) * learning_critic.value(next_state)?)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossDiagnostics {
    /// Batch mean of `−log π(a)·A − β·H`.
    pub policy_loss: f64,
    /// Batch mean of `A²`.
    pub critic_loss: f64,
    pub entropy: f64,
    pub mean_advantage: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossOutput {
    pub total: f64,
    pub grads: GradientSet,
    pub diagnostics: LossDiagnostics,
}

/// Combined actor-critic loss `mean(−log π(a)·A − β·H) + λ·mean(A²)` with
/// `A = value_target − V(s)`, and its gradient. The advantage is a constant
/// inside the policy term.
pub fn compute_losses(
    batch: &[&Experience],
    learning: &NetworkParams,
    entropy_coeff: f64,
    critic_coeff: f64,
) -> Result<LossOutput> {
    if batch.is_empty() {
        return Err(Error::InvalidConfig("empty minibatch".into()));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut grads = GradientSet::zeros_like(learning);
    let mut diag = LossDiagnostics::default();
    let mut d_logits = Vec::with_capacity(crate::actions::ACTION_COUNT);
    for exp in batch {
        let trace = learning.forward(&exp.state)?;
        let advantage = exp.value_target - trace.value;
        let entropy = trace.entropy();
        let policy = -trace.log_probs[exp.action_label] * advantage - entropy_coeff * entropy;
        diag.policy_loss += policy * scale;
        diag.critic_loss += advantage * advantage * scale;
        diag.entropy += entropy * scale;
        diag.mean_advantage += advantage * scale;

        d_logits.clear();
        d_logits.extend(
            trace
                .probs
                .iter()
                .zip(&trace.log_probs)
                .enumerate()
                .map(|(k, (p, lp))| {
                    let onehot = if k == exp.action_label { 1.0 } else { 0.0 };
                    scale * (advantage * (p - onehot) + entropy_coeff * p * (lp + entropy))
                }),
        );
        let d_value = -2.0 * critic_coeff * advantage * scale;
        learning.backward_into(
            &trace,
            OutputGradient {
                d_value,
                d_logits: Some(&d_logits),
            },
            &mut grads,
        );
    }
    Ok(LossOutput {
        total: diag.policy_loss + critic_coeff * diag.critic_loss,
        grads,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{mlp::init_network, sim::Classification};

    fn sample(state: Vec<f64>, label: usize, target: f64) -> Experience {
        Experience {
            state,
            action_label: label,
            value_target: target,
            outcome: Classification::ReachedGoal,
        }
    }

    #[test]
    fn target_arithmetic() {
        let mut net = init_network(0, 0);
        for l in net.layers_mut() {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
            l.biases.iter_mut().for_each(|b| *b = 0.0);
        }
        net.critic_head.biases[0] = 0.5;
        let s = alloc::vec![0.0; 9];
        assert_eq!(target_state_value(1.0, &s, &net, 0.9, 0.25, 1.0, true).unwrap(), 1.0);
        let t = target_state_value(0.0, &s, &net, 0.9, 0.25, 1.0, false).unwrap();
        assert!((t - 0.487_001_6).abs() < 1e-6, "{t}");
        assert_eq!(target_state_value(-0.1, &s, &net, 0.0, 0.25, 1.0, false).unwrap(), -0.1);
    }

    #[test]
    fn exact_critic_leaves_only_entropy() {
        let net = init_network(1, 4);
        let state: Vec<f64> = (0..14).map(|i| 0.1 * i as f64).collect();
        let v = net.value(&state).unwrap();
        let exp = sample(state, 7, v);
        let out = compute_losses(&[&exp], &net, 0.01, 0.5).unwrap();
        assert_eq!(out.diagnostics.critic_loss, 0.0);
        assert_eq!(out.diagnostics.mean_advantage, 0.0);
        assert!(out.grads.critic_head.weights.iter().all(|g| *g == 0.0));
        let h = out.diagnostics.entropy;
        assert!((out.total + 0.01 * h).abs() < 1e-15);
        let no_entropy = compute_losses(&[&exp], &net, 0.0, 0.5).unwrap();
        assert!(no_entropy.grads.is_zero());
    }

    #[test]
    fn uniform_policy_entropy() {
        let mut net = init_network(0, 1);
        net.actor_head.weights.iter_mut().for_each(|w| *w = 0.0);
        let exp = sample(alloc::vec![0.3; 9], 0, 0.0);
        let out = compute_losses(&[&exp], &net, 0.01, 0.5).unwrap();
        assert!((out.diagnostics.entropy - libm::log(81.0)).abs() < 1e-12);
    }

    #[test]
    fn empty_batch_is_rejected() {
        assert!(compute_losses(&[], &init_network(0, 0), 0.01, 0.5).is_err());
    }
}
