//! CSV exports: trajectories, the algorithm comparison table, evaluation
//! details and training curves. UTF-8, LF line endings, `.` decimals.

use std::{fmt::Write as _, fs, path::Path};

use a2cmp_core::{
    a2cmp::{CurveKind, CurveRow},
    eval::EvalReport,
    sim::{Classification, EpisodeRecord},
};

use crate::{error::CliError, Result};

pub const TRAJECTORY_HEADER: &str = "episode,t,agent_id,px,py,vx,vy,radius";
pub const COMPARISON_HEADER: &str = "Algorithm,Success rate,Collision rate,Goal missing,Average time";
pub const CURVE_HEADER: &str = "episode,avg_reward,policy_loss,critic_loss,entropy,memory_size,success_rate_eval";

/// One row per agent per recorded step; agent 0 is the robot.
pub fn trajectory_csv(records: &[(usize, &EpisodeRecord)]) -> Result<String> {
    if records.is_empty() {
        return Err(CliError::Usage("no episode records to export".into()));
    }
    let mut out = String::from(TRAJECTORY_HEADER);
    out.push('\n');
    for (episode, record) in records {
        for step in &record.steps {
            let robot = step.state.robot.observable();
            for (id, agent) in std::iter::once(&robot).chain(&step.state.obstacles).enumerate() {
                let _ = writeln!(
                    out,
                    "{episode},{:.3},{id},{:.6},{:.6},{:.6},{:.6},{:.6}",
                    step.time, agent.position.x, agent.position.y, agent.velocity.x, agent.velocity.y, agent.radius
                );
            }
        }
    }
    Ok(out)
}

/// Writes the trajectories; nothing is created when `records` is empty.
pub fn export_trajectories(records: &[(usize, &EpisodeRecord)], path: &Path) -> Result<()> {
    let csv = trajectory_csv(records)?;
    crate::write_file(path, csv.as_bytes())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub episode: usize,
    pub t: f64,
    pub agent_id: usize,
    pub px: f64,
    pub py: f64,
    pub vx: f64,
    pub vy: f64,
    pub radius: f64,
}

pub fn parse_trajectories(text: &str) -> Result<Vec<TrajectoryRow>, String> {
    let mut lines = text.lines();
    if lines.next() != Some(TRAJECTORY_HEADER) {
        return Err("missing trajectory header".into());
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 8 {
                return Err(format!("row {}: expected 8 fields", i + 1));
            }
            let num = |k: usize| f[k].parse::<f64>().map_err(|e| format!("row {}: {e}", i + 1));
            let int = |k: usize| f[k].parse::<usize>().map_err(|e| format!("row {}: {e}", i + 1));
            Ok(TrajectoryRow {
                episode: int(0)?,
                t: num(1)?,
                agent_id: int(2)?,
                px: num(3)?,
                py: num(4)?,
                vx: num(5)?,
                vy: num(6)?,
                radius: num(7)?,
            })
        })
        .collect()
}

fn time_cell(report: &EvalReport) -> String {
    report
        .average_time_to_goal
        .map_or_else(|| "n/a".to_owned(), |t| format!("{t:.1}"))
}

/// Table with one row per named report, in the given order.
pub fn comparison_csv(reports: &[(&str, &EvalReport)]) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for (name, r) in reports {
        let _ = writeln!(
            out,
            "{name},{:.2},{:.2},{:.2},{}",
            r.success_rate,
            r.collision_rate,
            r.goal_missing_rate,
            time_cell(r)
        );
    }
    out
}

pub fn compare_algorithms(reports: &[(&str, &EvalReport)], path: &Path) -> Result<()> {
    if reports.is_empty() {
        return Err(CliError::Usage("no reports to compare".into()));
    }
    crate::write_file(path, comparison_csv(reports).as_bytes())
}

fn outcome_name(c: Classification) -> &'static str {
    match c {
        Classification::Running => "running",
        Classification::Collision => "collision",
        Classification::ReachedGoal => "reached_goal",
        Classification::Timeout => "timeout",
    }
}

/// Per-episode evaluation details.
pub fn episodes_csv(report: &EvalReport) -> String {
    let mut out = String::from("episode,seed,outcome,elapsed,average_reward,discounted_return\n");
    for (i, e) in report.episodes.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{:.3},{:.6},{:.6}",
            e.seed,
            outcome_name(e.outcome),
            e.elapsed,
            e.average_reward,
            e.discounted_return
        );
    }
    out
}

pub fn curve_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{:.6},", r.episode, r.avg_reward);
        match (r.kind, r.diagnostics) {
            (CurveKind::Train, Some(d)) => {
                let _ = write!(out, "{:.6},{:.6},{:.6},", d.policy_loss, d.critic_loss, d.entropy);
            }
            _ => out.push_str(",,,"),
        }
        let _ = write!(out, "{},", r.memory_size);
        if let Some(s) = r.success_rate_eval {
            let _ = write!(out, "{s:.2}");
        }
        out.push('\n');
    }
    out
}

pub fn dvl_curve_csv(curve: &[f64]) -> String {
    let mut out = String::from("episode,avg_reward\n");
    for (i, r) in curve.iter().enumerate() {
        let _ = writeln!(out, "{},{r:.6}", i + 1);
    }
    out
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(CliError::io(path))
}
