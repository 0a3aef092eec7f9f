//! Two-dimensional linear program over half-planes intersected with a speed
//! disc, solved incrementally one constraint at a time. When the constraints
//! have no common point, a second pass minimizes the largest violation.

use alloc::vec::Vec;

use crate::geometry::Vec2;

const EPSILON: f64 = 1e-9;

/// Directed line in velocity space. Permitted velocities lie on its left.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlane {
    pub point: Vec2,
    /// Unit direction of the boundary line.
    pub direction: Vec2,
}

impl HalfPlane {
    /// Signed distance of `v` outside the half-plane (positive means violated).
    pub fn violation(&self, v: Vec2) -> f64 {
        self.direction.det(self.point - v)
    }
}

/// Returns the velocity nearest `preferred` satisfying every half-plane and
/// `‖v‖ ≤ max_speed`, or, if no such velocity exists, the velocity in the disc
/// whose largest half-plane violation is smallest.
pub fn solve_velocity_program(half_planes: &[HalfPlane], max_speed: f64, preferred: Vec2) -> Vec2 {
    let mut result = Vec2::ZERO;
    let failed = program_2d(half_planes, max_speed, preferred, false, &mut result);
    if failed < half_planes.len() {
        program_3d(half_planes, failed, max_speed, &mut result);
    }
    result
}

/// Optimizes along the boundary of `lines[line_no]` subject to the earlier
/// lines and the disc. Returns false when the segment is empty.
fn program_1d(
    lines: &[HalfPlane],
    line_no: usize,
    radius: f64,
    target: Vec2,
    direction_opt: bool,
    result: &mut Vec2,
) -> bool {
    let line = lines[line_no];
    let dot = line.point.dot(line.direction);
    let discriminant = dot * dot + radius * radius - line.point.norm_sq();
    if discriminant < 0.0 {
        // The boundary misses the disc entirely.
        return false;
    }
    let sqrt_disc = crate::math::sqrt(discriminant);
    let mut t_left = -dot - sqrt_disc;
    let mut t_right = -dot + sqrt_disc;

    for other in &lines[..line_no] {
        let denominator = line.direction.det(other.direction);
        let numerator = other.direction.det(line.point - other.point);
        if denominator.abs() <= EPSILON {
            // Parallel boundaries.
            if numerator < 0.0 {
                return false;
            }
            continue;
        }
        let t = numerator / denominator;
        if denominator >= 0.0 {
            t_right = t_right.min(t);
        } else {
            t_left = t_left.max(t);
        }
        if t_left > t_right {
            return false;
        }
    }

    let t = if direction_opt {
        if target.dot(line.direction) > 0.0 {
            t_right
        } else {
            t_left
        }
    } else {
        line.direction.dot(target - line.point).clamp(t_left, t_right)
    };
    *result = line.point + line.direction * t;
    true
}

/// Returns `lines.len()` on success, otherwise the index of the first line
/// that could not be satisfied (with `result` left at the last feasible point).
fn program_2d(lines: &[HalfPlane], radius: f64, target: Vec2, direction_opt: bool, result: &mut Vec2) -> usize {
    *result = if direction_opt {
        // `target` is a unit direction: optimize towards the far rim.
        target * radius
    } else if target.norm_sq() > radius * radius {
        target.normalized_or_zero() * radius
    } else {
        target
    };

    for i in 0..lines.len() {
        if lines[i].violation(*result) > 0.0 {
            let previous = *result;
            if !program_1d(lines, i, radius, target, direction_opt, result) {
                *result = previous;
                return i;
            }
        }
    }
    lines.len()
}

/// Minimizes the maximum violation over `lines[begin..]`, starting from the
/// partial solution produced by [`program_2d`].
fn program_3d(lines: &[HalfPlane], begin: usize, radius: f64, result: &mut Vec2) {
    let mut distance = 0.0;
    let mut projected: Vec<HalfPlane> = Vec::with_capacity(lines.len());
    for i in begin..lines.len() {
        if lines[i].violation(*result) <= distance {
            continue;
        }
        projected.clear();
        for j in 0..i {
            let determinant = lines[i].direction.det(lines[j].direction);
            let point = if determinant.abs() <= EPSILON {
                if lines[i].direction.dot(lines[j].direction) > 0.0 {
                    // Same orientation: j is implied by i at equal violation.
                    continue;
                }
                (lines[i].point + lines[j].point) * 0.5
            } else {
                lines[i].point
                    + lines[i].direction * (lines[j].direction.det(lines[i].point - lines[j].point) / determinant)
            };
            let direction = (lines[j].direction - lines[i].direction).normalized_or_zero();
            projected.push(HalfPlane { point, direction });
        }

        let previous = *result;
        let toward = Vec2::new(-lines[i].direction.y, lines[i].direction.x);
        if program_2d(&projected, radius, toward, true, result) < projected.len() {
            // Only reachable through floating-point error: keep the previous point.
            *result = previous;
        }
        distance = lines[i].violation(*result);
    }
}
