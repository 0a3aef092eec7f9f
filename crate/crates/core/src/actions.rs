//! The discrete action set: 16 world-frame directions × 5 speeds, plus stop.
//!
//! Layout: index 0 is the stop action; direction `i ∈ 1..=16` (angle
//! `i/16·2π`) and speed `j ∈ 1..=5` (magnitude `j/5·v_pref`) live at
//! `1 + (i−1)·5 + (j−1)`.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::{geometry::Vec2, Error, Result};

pub const DIRECTIONS: usize = 16;
pub const SPEEDS: usize = 5;
pub const ACTION_COUNT: usize = DIRECTIONS * SPEEDS + 1;

/// Human-readable layout description stored in checkpoints.
pub const LAYOUT: &str = "index 0 = stop; index 1+(i-1)*5+(j-1) = direction i in 1..16 (angle i/16*2pi, world frame), speed j in 1..5 (j/5*v_pref)";

/// Tolerance used by [`ActionTable::label_of`].
pub const LABEL_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct ActionTable {
    actions: Vec<Vec2>,
    v_pref: f64,
}

/// Index of direction `i ∈ 1..=16`, speed `j ∈ 1..=5`.
pub const fn index_of(direction: usize, speed: usize) -> usize {
    1 + (direction - 1) * SPEEDS + (speed - 1)
}

impl ActionTable {
    pub fn new(v_pref: f64) -> Result<Self> {
        if !(v_pref > 0.0) || !v_pref.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "preferred speed must be positive, got {v_pref}"
            )));
        }
        let mut actions = Vec::with_capacity(ACTION_COUNT);
        actions.push(Vec2::ZERO);
        for i in 1..=DIRECTIONS {
            let heading = Vec2::from_angle(i as f64 / DIRECTIONS as f64 * TAU);
            for j in 1..=SPEEDS {
                actions.push(heading * (j as f64 / SPEEDS as f64 * v_pref));
            }
        }
        Ok(Self { actions, v_pref })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn v_pref(&self) -> f64 {
        self.v_pref
    }

    pub fn actions(&self) -> &[Vec2] {
        &self.actions
    }

    /// # Panics
    /// If `label >= 81`.
    pub fn velocity_of(&self, label: usize) -> Vec2 {
        self.actions[label]
    }

    /// Exact inverse of [`velocity_of`](Self::velocity_of), within 1e-6.
    pub fn label_of(&self, action: Vec2) -> Result<usize> {
        let label = self.snap_to_grid(action);
        if self.actions[label].distance(action) <= LABEL_TOLERANCE {
            Ok(label)
        } else {
            Err(Error::UnknownAction {
                x: action.x,
                y: action.y,
            })
        }
    }

    /// Nearest table entry; ties go to the lower index.
    pub fn snap_to_grid(&self, velocity: Vec2) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (k, a) in self.actions.iter().enumerate() {
            let d = (*a - velocity).norm_sq();
            if d < best_dist {
                best = k;
                best_dist = d;
            }
        }
        best
    }
}
