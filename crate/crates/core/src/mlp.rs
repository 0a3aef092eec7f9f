//! Actor-critic network: a shared two-layer ReLU trunk feeding a scalar
//! critic head and an 81-way softmax actor head, with hand-written backprop.
//!
//! ```text
//! input (9+5N) -> linear1 (128) -> ReLU -> linear2 (256) -> ReLU -+-> critic (1)
//!                                                                 +-> actor (81) -> softmax
//! ```

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Deref, DerefMut};

use rand::Rng as _;

use crate::{actions::ACTION_COUNT, math, rng, sim::joint_state_len, Error, Result};

pub const HIDDEN1: usize = 128;
pub const HIDDEN2: usize = 256;

/// Dense layer `out = W·in + b` with `W` stored row-major (`rows = out`, `cols = in`).
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl LayerParams {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            weights: vec![0.0; rows * cols],
            biases: vec![0.0; rows],
        }
    }

    fn glorot(rows: usize, cols: usize, rng: &mut rng::Rng) -> Self {
        let limit = math::sqrt(6.0 / (rows + cols) as f64);
        let weights = (0..rows * cols).map(|_| rng.gen_range(-limit..=limit)).collect();
        Self {
            rows,
            cols,
            weights,
            biases: vec![0.0; rows],
        }
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.weights[r * self.cols..(r + 1) * self.cols]
    }

    fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(input.len(), self.cols);
        out.clear();
        out.extend((0..self.rows).map(|r| self.biases[r] + dot(self.row(r), input)));
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).all(|x| x.is_finite())
    }

    fn same_shape(&self, other: &LayerParams) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

/// Dot product with four independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Parameters of the whole network.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub linear1: LayerParams,
    pub linear2: LayerParams,
    pub critic_head: LayerParams,
    pub actor_head: LayerParams,
}

/// Layer names in checkpoint order.
pub const LAYER_NAMES: [&str; 4] = ["linear1", "linear2", "critic_head", "actor_head"];

/// Glorot-uniform weights, zero biases, deterministic in `seed`.
pub fn init_network(n_obstacles: usize, seed: u64) -> NetworkParams {
    let mut rng = rng::stream(seed, rng::streams::INIT);
    let input = joint_state_len(n_obstacles);
    NetworkParams {
        linear1: LayerParams::glorot(HIDDEN1, input, &mut rng),
        linear2: LayerParams::glorot(HIDDEN2, HIDDEN1, &mut rng),
        critic_head: LayerParams::glorot(1, HIDDEN2, &mut rng),
        actor_head: LayerParams::glorot(ACTION_COUNT, HIDDEN2, &mut rng),
    }
}

/// Everything computed by a forward pass that backprop needs.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace {
    pub input: Vec<f64>,
    pub pre1: Vec<f64>,
    pub hidden1: Vec<f64>,
    pub pre2: Vec<f64>,
    pub hidden2: Vec<f64>,
    pub value: f64,
    /// Empty when only the critic head was evaluated.
    pub logits: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub probs: Vec<f64>,
}

impl ForwardTrace {
    /// Highest-probability action; ties go to the lower label.
    pub fn argmax(&self) -> usize {
        argmax(&self.logits)
    }

    /// Shannon entropy (nats) of the action distribution.
    pub fn entropy(&self) -> f64 {
        -self
            .probs
            .iter()
            .zip(&self.log_probs)
            .map(|(p, lp)| p * lp)
            .sum::<f64>()
    }
}

pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (k, x) in xs.iter().enumerate() {
        if *x > xs[best] {
            best = k;
        }
    }
    best
}

/// Max-shifted softmax; also returns log-probabilities so `p·log p` stays finite.
pub fn softmax(logits: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| math::exp(z - max)).collect();
    let sum: f64 = exps.iter().sum();
    let log_sum = math::ln(sum);
    let log_probs = logits.iter().map(|z| z - max - log_sum).collect();
    let probs = exps.iter().map(|e| e / sum).collect();
    (probs, log_probs)
}

/// Loss gradient at the network outputs: w.r.t. the state value and w.r.t.
/// the actor logits (pre-softmax). `None` skips the actor head.
#[derive(Clone, Copy, Debug)]
pub struct OutputGradient<'a> {
    pub d_value: f64,
    pub d_logits: Option<&'a [f64]>,
}

/// Gradients with the same shapes as [`NetworkParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet(pub NetworkParams);

impl Deref for GradientSet {
    type Target = NetworkParams;
    fn deref(&self) -> &NetworkParams {
        &self.0
    }
}

impl DerefMut for GradientSet {
    fn deref_mut(&mut self) -> &mut NetworkParams {
        &mut self.0
    }
}

impl GradientSet {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        let z = |l: &LayerParams| LayerParams::zeros(l.rows, l.cols);
        GradientSet(NetworkParams {
            linear1: z(&params.linear1),
            linear2: z(&params.linear2),
            critic_head: z(&params.critic_head),
            actor_head: z(&params.actor_head),
        })
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in self.0.layers_mut() {
            layer
                .weights
                .iter_mut()
                .chain(layer.biases.iter_mut())
                .for_each(|x| *x *= factor);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0
            .layers()
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|x| *x == 0.0))
    }
}

impl NetworkParams {
    pub fn input_width(&self) -> usize {
        self.linear1.cols
    }

    /// Number of obstacles implied by the input width, if the width is valid.
    pub fn n_obstacles(&self) -> Option<usize> {
        let w = self.input_width();
        (w >= 9 && (w - 9).is_multiple_of(5)).then(|| (w - 9) / 5)
    }

    pub fn layers(&self) -> [&LayerParams; 4] {
        [&self.linear1, &self.linear2, &self.critic_head, &self.actor_head]
    }

    pub fn layers_mut(&mut self) -> [&mut LayerParams; 4] {
        [
            &mut self.linear1,
            &mut self.linear2,
            &mut self.critic_head,
            &mut self.actor_head,
        ]
    }

    pub fn same_shape(&self, other: &NetworkParams) -> bool {
        self.layers().iter().zip(other.layers()).all(|(a, b)| a.same_shape(b))
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_width() {
            return Err(Error::Shape {
                expected: self.input_width(),
                found: input.len(),
            });
        }
        Ok(())
    }

    fn trunk(&self, input: &[f64]) -> ForwardTrace {
        let mut pre1 = Vec::with_capacity(HIDDEN1);
        self.linear1.forward_into(input, &mut pre1);
        let hidden1: Vec<f64> = pre1.iter().map(|z| z.max(0.0)).collect();
        let mut pre2 = Vec::with_capacity(HIDDEN2);
        self.linear2.forward_into(&hidden1, &mut pre2);
        let hidden2: Vec<f64> = pre2.iter().map(|z| z.max(0.0)).collect();
        let value = self.critic_head.biases[0] + dot(self.critic_head.row(0), &hidden2);
        ForwardTrace {
            input: input.to_vec(),
            pre1,
            hidden1,
            pre2,
            hidden2,
            value,
            logits: Vec::new(),
            log_probs: Vec::new(),
            probs: Vec::new(),
        }
    }

    /// Full forward pass: trunk, critic value, and actor distribution.
    pub fn forward(&self, input: &[f64]) -> Result<ForwardTrace> {
        self.check_input(input)?;
        let mut trace = self.trunk(input);
        let mut logits = Vec::with_capacity(ACTION_COUNT);
        self.actor_head.forward_into(&trace.hidden2, &mut logits);
        let (probs, log_probs) = softmax(&logits);
        trace.logits = logits;
        trace.probs = probs;
        trace.log_probs = log_probs;
        Ok(trace)
    }

    /// Trunk and critic head only; the actor fields of the trace are empty.
    pub fn forward_critic(&self, input: &[f64]) -> Result<ForwardTrace> {
        self.check_input(input)?;
        Ok(self.trunk(input))
    }

    pub fn value(&self, input: &[f64]) -> Result<f64> {
        self.forward_critic(input).map(|t| t.value)
    }

    /// Analytic gradients of the loss whose output gradient is `out`.
    pub fn backward(&self, trace: &ForwardTrace, out: OutputGradient<'_>) -> GradientSet {
        let mut grads = GradientSet::zeros_like(self);
        self.backward_into(trace, out, &mut grads);
        grads
    }

    /// Like [`backward`](Self::backward) but accumulates into `grads`.
    pub fn backward_into(&self, trace: &ForwardTrace, out: OutputGradient<'_>, grads: &mut GradientSet) {
        let g = &mut grads.0;
        let mut d_hidden2 = vec![0.0; self.linear2.rows];

        if out.d_value != 0.0 {
            axpy(out.d_value, &trace.hidden2, &mut g.critic_head.weights);
            g.critic_head.biases[0] += out.d_value;
            axpy(out.d_value, self.critic_head.row(0), &mut d_hidden2);
        }
        if let Some(d_logits) = out.d_logits {
            let cols = self.actor_head.cols;
            for (k, &d) in d_logits.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                axpy(d, &trace.hidden2, &mut g.actor_head.weights[k * cols..(k + 1) * cols]);
                g.actor_head.biases[k] += d;
                axpy(d, self.actor_head.row(k), &mut d_hidden2);
            }
        }

        // ReLU gates; the subgradient at exactly zero is zero.
        let mut d_hidden1 = vec![0.0; self.linear1.rows];
        let cols2 = self.linear2.cols;
        for (r, d) in d_hidden2.iter().enumerate() {
            if trace.pre2[r] <= 0.0 || *d == 0.0 {
                continue;
            }
            axpy(*d, &trace.hidden1, &mut g.linear2.weights[r * cols2..(r + 1) * cols2]);
            g.linear2.biases[r] += d;
            axpy(*d, self.linear2.row(r), &mut d_hidden1);
        }

        let cols1 = self.linear1.cols;
        for (r, d) in d_hidden1.iter().enumerate() {
            if trace.pre1[r] <= 0.0 || *d == 0.0 {
                continue;
            }
            axpy(*d, &trace.input, &mut g.linear1.weights[r * cols1..(r + 1) * cols1]);
            g.linear1.biases[r] += d;
        }
    }

    /// Gradient descent step `θ ← θ − lr·g`. Rejects non-finite gradients
    /// without touching the parameters.
    pub fn apply_update(&mut self, grads: &GradientSet, learning_rate: f64) -> Result<()> {
        check_finite(grads)?;
        for (p, g) in self.layers_mut().into_iter().zip(grads.layers()) {
            axpy(-learning_rate, &g.weights, &mut p.weights);
            axpy(-learning_rate, &g.biases, &mut p.biases);
        }
        Ok(())
    }
}

fn check_finite(grads: &GradientSet) -> Result<()> {
    for (name, layer) in LAYER_NAMES.iter().zip(grads.layers()) {
        if !layer.is_finite() {
            return Err(Error::NonFiniteGradient { layer: name });
        }
    }
    Ok(())
}

/// Gradient descent with optional heavy-ball momentum (off when `momentum == 0`).
#[derive(Clone, Debug)]
pub struct GradientDescent {
    pub learning_rate: f64,
    pub momentum: f64,
    velocity: Option<GradientSet>,
}

impl GradientDescent {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            momentum: 0.0,
            velocity: None,
        }
    }

    pub fn with_momentum(learning_rate: f64, momentum: f64) -> Self {
        Self {
            learning_rate,
            momentum,
            velocity: None,
        }
    }

    pub fn step(&mut self, params: &mut NetworkParams, grads: &GradientSet) -> Result<()> {
        if self.momentum == 0.0 {
            return params.apply_update(grads, self.learning_rate);
        }
        check_finite(grads)?;
        let velocity = self.velocity.get_or_insert_with(|| GradientSet::zeros_like(params));
        for (v, g) in velocity.0.layers_mut().into_iter().zip(grads.layers()) {
            for (vi, gi) in v
                .weights
                .iter_mut()
                .zip(&g.weights)
                .chain(v.biases.iter_mut().zip(&g.biases))
            {
                *vi = self.momentum * *vi + gi;
            }
        }
        params.apply_update(velocity, self.learning_rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_network(n: usize) -> NetworkParams {
        let mut p = init_network(n, 0);
        for l in p.layers_mut() {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        p
    }

    #[test]
    fn shapes_follow_obstacle_count() {
        let p = init_network(5, 1);
        assert_eq!((p.linear1.rows, p.linear1.cols), (128, 34));
        assert_eq!((p.linear2.rows, p.linear2.cols), (256, 128));
        assert_eq!((p.critic_head.rows, p.critic_head.cols), (1, 256));
        assert_eq!((p.actor_head.rows, p.actor_head.cols), (81, 256));
        assert_eq!(init_network(0, 1).input_width(), 9);
        assert_eq!(p.n_obstacles(), Some(5));
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        assert_eq!(init_network(3, 9), init_network(3, 9));
        assert_ne!(init_network(3, 9), init_network(3, 10));
        let p = init_network(5, 4);
        let limit = (6.0f64 / (128.0 + 34.0)).sqrt();
        assert!(p.linear1.weights.iter().all(|w| w.abs() <= limit));
        assert!(p.layers().iter().all(|l| l.biases.iter().all(|b| *b == 0.0)));
    }

    #[test]
    fn zero_network_is_uniform() {
        let p = zero_network(5);
        let t = p.forward(&[0.3; 34]).unwrap();
        assert_eq!(t.value, 0.0);
        assert!(t.probs.iter().all(|q| (q - 1.0 / 81.0).abs() < 1e-15));
        assert!((t.entropy() - 81f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch() {
        let p = init_network(5, 0);
        assert_eq!(
            p.forward(&[0.0; 33]).unwrap_err(),
            Error::Shape {
                expected: 34,
                found: 33
            }
        );
    }

    #[test]
    fn logit_shift_invariance() {
        let mut p = init_network(2, 3);
        let input: Vec<f64> = (0..19).map(|i| (i as f64 * 0.37).sin()).collect();
        let before = p.forward(&input).unwrap();
        p.actor_head.biases.iter_mut().for_each(|b| *b += 123.0);
        let after = p.forward(&input).unwrap();
        for (a, b) in before.probs.iter().zip(&after.probs) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(before.argmax(), after.argmax());
    }

    #[test]
    fn softmax_is_stable_for_large_logits() {
        let logits: Vec<f64> = (0..81)
            .map(|k| if k % 2 == 0 { 1000.0 } else { -1000.0 + k as f64 })
            .collect();
        let (p, lp) = softmax(&logits);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(p.iter().all(|x| *x >= 0.0 && x.is_finite()));
        assert!(lp.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn zero_output_gradient_gives_zero() {
        let p = init_network(1, 0);
        let t = p.forward(&[0.5; 14]).unwrap();
        let g = p.backward(
            &t,
            OutputGradient {
                d_value: 0.0,
                d_logits: Some(&[0.0; 81]),
            },
        );
        assert!(g.is_zero());
    }

    #[test]
    fn dead_relu_blocks_gradient() {
        let mut p = init_network(0, 0);
        // Force linear1 unit 0 dead for this input.
        p.linear1.biases[0] = -1e3;
        let input = [0.1; 9];
        let t = p.forward(&input).unwrap();
        assert!(t.pre1[0] < 0.0);
        let d_logits: Vec<f64> = (0..81).map(|k| k as f64 * 0.01).collect();
        let g = p.backward(
            &t,
            OutputGradient {
                d_value: 1.0,
                d_logits: Some(&d_logits),
            },
        );
        assert!(g.linear1.row(0).iter().all(|x| *x == 0.0));
        assert_eq!(g.linear1.biases[0], 0.0);
    }

    #[test]
    fn update_arithmetic() {
        let mut p = init_network(0, 0);
        let mut g = GradientSet::zeros_like(&p);
        p.critic_head.biases[0] = 1.0;
        g.critic_head.biases[0] = 2.0;
        let before = p.clone();
        p.apply_update(&g, 0.0).unwrap();
        assert_eq!(p, before);
        p.apply_update(&g, 0.1).unwrap();
        assert!((p.critic_head.biases[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn non_finite_update_rejected() {
        let mut p = init_network(0, 0);
        let mut g = GradientSet::zeros_like(&p);
        g.linear2.weights[7] = f64::NAN;
        let before = p.clone();
        assert_eq!(
            p.apply_update(&g, 0.1).unwrap_err(),
            Error::NonFiniteGradient { layer: "linear2" }
        );
        assert_eq!(p, before);
    }

    #[test]
    fn momentum_off_matches_plain_descent() {
        let mut a = init_network(1, 2);
        let mut b = a.clone();
        let t = a.forward(&[0.2; 14]).unwrap();
        let g = a.backward(
            &t,
            OutputGradient {
                d_value: 0.7,
                d_logits: None,
            },
        );
        a.apply_update(&g, 0.05).unwrap();
        GradientDescent::new(0.05).step(&mut b, &g).unwrap();
        assert_eq!(a, b);
        let mut c = init_network(1, 2);
        let mut opt = GradientDescent::with_momentum(0.05, 0.9);
        opt.step(&mut c, &g).unwrap();
        opt.step(&mut c, &g).unwrap();
        // second step moves by lr·(1 + 0.9)·g
        let expected = init_network(1, 2).critic_head.biases[0] - 0.05 * 2.9 * g.critic_head.biases[0];
        assert!((c.critic_head.biases[0] - expected).abs() < 1e-12);
    }
}
