#![allow(dead_code)]

use a2cmp_core::mlp::NetworkParams;

/// Central difference of `loss` with respect to parameter `index` of layer
/// `layer`.
pub fn central_difference(
    params: &NetworkParams,
    layer: usize,
    index: usize,
    h: f64,
    loss: &dyn Fn(&NetworkParams) -> f64,
) -> f64 {
    let mut plus = params.clone();
    let mut minus = params.clone();
    poke(&mut plus, layer, index, h);
    poke(&mut minus, layer, index, -h);
    (loss(&plus) - loss(&minus)) / (2.0 * h)
}

fn poke(params: &mut NetworkParams, layer: usize, index: usize, delta: f64) {
    let l = &mut params.layers_mut()[layer];
    let n = l.weights.len();
    if index < n {
        l.weights[index] += delta;
    } else {
        l.biases[index - n] += delta;
    }
}

pub fn entry(params: &NetworkParams, layer: usize, index: usize) -> f64 {
    let l = params.layers()[layer];
    let n = l.weights.len();
    if index < n {
        l.weights[index]
    } else {
        l.biases[index - n]
    }
}

pub fn layer_len(params: &NetworkParams, layer: usize) -> usize {
    let l = params.layers()[layer];
    l.weights.len() + l.biases.len()
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs());
    if scale == 0.0 {
        0.0
    } else {
        (analytic - numeric).abs() / scale
    }
}

use a2cmp_core::Vec2;

/// True when relative velocity `w` keeps two discs whose centers are `p`
/// apart at distance ≥ `combined_radius` for every t in [0, horizon].
pub fn collision_free(p: Vec2, w: Vec2, combined_radius: f64, horizon: f64) -> bool {
    let w_sq = w.norm_sq();
    let t = if w_sq == 0.0 {
        0.0
    } else {
        (p.dot(w) / w_sq).clamp(0.0, horizon)
    };
    (p - w * t).norm() >= combined_radius
}

/// Nearest point of the truncated velocity obstacle boundary to `w`, with the
/// outward normal there, found by dense sampling of the arc and both legs.
pub fn nearest_boundary(p: Vec2, r: f64, horizon: f64, w: Vec2) -> (Vec2, Vec2) {
    const SAMPLES: usize = 20_000;
    let c = p / horizon;
    let rc = r / horizon;
    let dist = p.norm();
    let axis = p / dist;
    let alpha = (r / dist).asin();
    let cut = (c.norm_sq() - rc * rc) / c.norm();
    let mut best = (f64::INFINITY, Vec2::ZERO, Vec2::ZERO);
    let mut consider = |b: Vec2, n: Vec2| {
        let d = b.distance(w);
        if d < best.0 {
            best = (d, b, n);
        }
    };
    for i in 0..=SAMPLES {
        let theta = std::f64::consts::TAU * i as f64 / SAMPLES as f64;
        let n = Vec2::from_angle(theta);
        let b = c + n * rc;
        if b.dot(axis) <= cut + 1e-12 {
            consider(b, n);
        }
    }
    for side in [-1.0, 1.0] {
        let dir = axis.rotated(side * alpha);
        let normal = dir.rotated(side * std::f64::consts::FRAC_PI_2);
        let start = cut / alpha.cos();
        for i in 0..=SAMPLES {
            let b = dir * (start + 6.0 * i as f64 / SAMPLES as f64);
            consider(b, normal);
        }
    }
    (best.1, best.2)
}

/// Independent ORCA reference for one non-reactive neighbor: builds the
/// half-plane from the sampled boundary point, then returns the feasible
/// sample nearest to `preferred`. Samples cover a grid over the speed disc
/// plus the feasible region's boundary, where a convex optimum lies.
pub fn sampled_orca_velocity(
    velocity: Vec2,
    relative_position: Vec2,
    neighbor_velocity: Vec2,
    combined_radius: f64,
    horizon: f64,
    max_speed: f64,
    preferred: Vec2,
) -> Option<Vec2> {
    const GRID: usize = 101;
    const EDGE: usize = 5000;
    let relative_velocity = velocity - neighbor_velocity;
    let (b, n) = nearest_boundary(relative_position, combined_radius, horizon, relative_velocity);
    let anchor = velocity + (b - relative_velocity);
    let feasible = |v: Vec2| v.norm() <= max_speed + 1e-12 && (v - anchor).dot(n) >= -1e-12;

    let step = 2.0 * max_speed / (GRID - 1) as f64;
    let mut samples = vec![preferred];
    for i in 0..GRID {
        for j in 0..GRID {
            samples.push(Vec2::new(-max_speed + i as f64 * step, -max_speed + j as f64 * step));
        }
    }
    let along = n.rotated(std::f64::consts::FRAC_PI_2);
    for k in 0..=EDGE {
        let t = -2.0 * max_speed + 4.0 * max_speed * k as f64 / EDGE as f64;
        samples.push(anchor + along * t);
        samples.push(Vec2::from_angle(std::f64::consts::TAU * k as f64 / EDGE as f64) * max_speed);
    }
    samples
        .into_iter()
        .filter(|v| feasible(*v))
        .min_by(|a, b| a.distance(preferred).total_cmp(&b.distance(preferred)))
}
