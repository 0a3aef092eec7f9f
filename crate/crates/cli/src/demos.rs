//! Demonstration memory as JSON lines: one `{"state", "label", "value",
//! "episode"}` object per step.

use std::{collections::BTreeSet, fs, path::Path};

use a2cmp_core::{
    actions::ACTION_COUNT,
    dvl::{DemoMemory, DemoRecord},
};
use serde::{Deserialize, Serialize};

use crate::{error::CliError, Result};

#[derive(Serialize, Deserialize)]
struct Line {
    state: Vec<f64>,
    label: usize,
    value: f64,
    episode: usize,
}

pub fn to_jsonl(demos: &DemoMemory) -> String {
    let mut out = String::new();
    for r in &demos.records {
        let line = Line {
            state: r.state.clone(),
            label: r.label,
            value: r.value,
            episode: r.episode,
        };
        out.push_str(&serde_json::to_string(&line).expect("demo records are always serializable"));
        out.push('\n');
    }
    out
}

pub fn save_demos(demos: &DemoMemory, path: &Path) -> Result<()> {
    crate::write_file(path, to_jsonl(demos).as_bytes())
}

pub fn load_demos(path: &Path) -> Result<DemoMemory> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let err = |line: usize, reason: String| CliError::Demos {
        path: path.to_owned(),
        line,
        reason,
    };
    let mut records = Vec::new();
    let mut width = None;
    for (i, raw) in text.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(raw).map_err(|e| err(i + 1, e.to_string()))?;
        if line.label >= ACTION_COUNT {
            return Err(err(i + 1, format!("label {} out of range", line.label)));
        }
        if *width.get_or_insert(line.state.len()) != line.state.len() {
            return Err(err(i + 1, "state width differs from earlier records".into()));
        }
        if !line.value.is_finite() || line.state.iter().any(|x| !x.is_finite()) {
            return Err(err(i + 1, "non-finite number".into()));
        }
        records.push(DemoRecord {
            state: line.state,
            label: line.label,
            value: line.value,
            episode: line.episode,
        });
    }
    let episodes: BTreeSet<usize> = records.iter().map(|r| r.episode).collect();
    Ok(DemoMemory {
        episodes_run: episodes.last().map_or(0, |e| e + 1),
        episodes_kept: episodes.len(),
        records,
    })
}
