//! Versioned JSON checkpoints. Numbers are written in shortest round-trip
//! form, so a save/load cycle is bit-exact.

use std::{fs, path::Path};

use a2cmp_core::{
    actions,
    mlp::{LayerParams, NetworkParams, LAYER_NAMES},
    sim::joint_state_len,
};
use serde::{Deserialize, Serialize};

use crate::{error::CliError, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Which action-selection rule the network was trained for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Dvl,
    #[default]
    A2cmp,
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    name: String,
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    version: u32,
    #[serde(default)]
    algorithm: Algorithm,
    n_obstacles: usize,
    action_table_layout: String,
    layers: Vec<LayerFile>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub algorithm: Algorithm,
    pub params: NetworkParams,
}

pub fn to_json(params: &NetworkParams, algorithm: Algorithm) -> String {
    let layers = LAYER_NAMES
        .iter()
        .zip(params.layers())
        .map(|(name, l)| LayerFile {
            name: (*name).to_owned(),
            rows: l.rows,
            cols: l.cols,
            weights: l.weights.clone(),
            biases: l.biases.clone(),
        })
        .collect();
    let file = CheckpointFile {
        version: CHECKPOINT_VERSION,
        algorithm,
        n_obstacles: params.n_obstacles().unwrap_or_default(),
        action_table_layout: actions::LAYOUT.to_owned(),
        layers,
    };
    serde_json::to_string(&file).expect("checkpoint fields are always serializable")
}

pub fn from_json(text: &str) -> Result<Checkpoint, String> {
    let file: CheckpointFile = serde_json::from_str(text).map_err(|e| format!("malformed checkpoint: {e}"))?;
    if file.version != CHECKPOINT_VERSION {
        return Err(format!(
            "unsupported version {} (expected {CHECKPOINT_VERSION})",
            file.version
        ));
    }
    if file.action_table_layout != actions::LAYOUT {
        return Err(format!("unknown action table layout `{}`", file.action_table_layout));
    }
    let width = joint_state_len(file.n_obstacles);
    let expected = [
        (width, a2cmp_core::mlp::HIDDEN1),
        (a2cmp_core::mlp::HIDDEN1, a2cmp_core::mlp::HIDDEN2),
        (a2cmp_core::mlp::HIDDEN2, 1),
        (a2cmp_core::mlp::HIDDEN2, actions::ACTION_COUNT),
    ];
    if file.layers.len() != LAYER_NAMES.len() {
        return Err(format!(
            "expected {} layers, found {}",
            LAYER_NAMES.len(),
            file.layers.len()
        ));
    }
    let mut layers = Vec::with_capacity(4);
    for ((layer, name), (cols, rows)) in file.layers.into_iter().zip(LAYER_NAMES).zip(expected) {
        if layer.name != name {
            return Err(format!("expected layer `{name}`, found `{}`", layer.name));
        }
        if layer.rows != rows || layer.cols != cols {
            return Err(format!(
                "layer {name} is {}x{}, expected {rows}x{cols} for {} obstacles",
                layer.rows, layer.cols, file.n_obstacles
            ));
        }
        if layer.weights.len() != rows * cols || layer.biases.len() != rows {
            return Err(format!("layer {name} has the wrong number of entries"));
        }
        let params = LayerParams {
            rows,
            cols,
            weights: layer.weights,
            biases: layer.biases,
        };
        if !params.is_finite() {
            return Err(format!("layer {name} contains non-finite entries"));
        }
        layers.push(params);
    }
    let mut it = layers.into_iter();
    let mut next = || it.next().expect("four layers checked above");
    let params = NetworkParams {
        linear1: next(),
        linear2: next(),
        critic_head: next(),
        actor_head: next(),
    };
    Ok(Checkpoint {
        algorithm: file.algorithm,
        params,
    })
}

pub fn save_checkpoint(params: &NetworkParams, algorithm: Algorithm, path: &Path) -> Result<()> {
    crate::write_file(path, to_json(params, algorithm).as_bytes())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    from_json(&text).map_err(|reason| CliError::Checkpoint {
        path: path.to_owned(),
        reason,
    })
}

/// Loads a checkpoint and checks that it fits a run with `n_obstacles`.
pub fn load_checkpoint_for(path: &Path, n_obstacles: usize) -> Result<Checkpoint> {
    let ckpt = load_checkpoint(path)?;
    let expected = joint_state_len(n_obstacles);
    let found = ckpt.params.input_width();
    if expected != found {
        return Err(a2cmp_core::Error::Shape { expected, found }.into());
    }
    Ok(ckpt)
}
