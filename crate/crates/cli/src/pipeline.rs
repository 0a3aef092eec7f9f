//! ORCA demonstrations → deep V-learning → DVL demonstrations → A2CMP →
//! evaluation of all three, with every intermediate artifact on disk.

use std::path::{Path, PathBuf};

use a2cmp_core::dvl::DemoMemory;

use crate::{
    checkpoint::{load_checkpoint, Algorithm},
    commands::{collect_demos, evaluate, train_a2cmp_to, train_dvl_to, write_evaluation, RobotPolicy},
    config::{Demonstrator, RunConfig},
    demos::{load_demos, save_demos},
    export, write_file, Result,
};

/// Offset separating the scenario seeds of the pipeline's stages.
const STAGE_SEED_STRIDE: u64 = 1 << 20;
/// First evaluation seed; far from every training and demonstration seed.
pub const EVAL_SEED_BASE: u64 = 1 << 32;

#[derive(Clone, Debug)]
pub struct PipelinePaths {
    pub root: PathBuf,
}

impl PipelinePaths {
    pub fn orca_demos(&self) -> PathBuf {
        self.root.join("orca_demos.jsonl")
    }
    pub fn dvl_checkpoint(&self) -> PathBuf {
        self.root.join("dvl.json")
    }
    pub fn dvl_curve(&self) -> PathBuf {
        self.root.join("dvl_curve.csv")
    }
    pub fn dvl_demos(&self) -> PathBuf {
        self.root.join("dvl_demos.jsonl")
    }
    pub fn a2cmp_checkpoint(&self) -> PathBuf {
        self.root.join("a2cmp.json")
    }
    pub fn a2cmp_curve(&self) -> PathBuf {
        self.root.join("a2cmp_curve.csv")
    }
    pub fn comparison(&self) -> PathBuf {
        self.root.join("comparison.csv")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PipelineSummary {
    pub ran: Vec<&'static str>,
    pub skipped: Vec<&'static str>,
}

fn done(paths: &[PathBuf]) -> bool {
    paths.iter().all(|p| p.exists())
}

/// Runs every stage. With `resume`, a stage whose artifacts all exist is
/// skipped and its outputs are read back instead.
pub fn run_pipeline(
    cfg: &RunConfig,
    out_dir: &Path,
    resume: bool,
    log: &mut dyn FnMut(&str),
) -> Result<PipelineSummary> {
    cfg.validate()?;
    let paths = PipelinePaths {
        root: out_dir.to_owned(),
    };
    let mut summary = PipelineSummary::default();
    let mut stage = |name: &'static str, outputs: &[PathBuf], summary: &mut PipelineSummary| {
        let skip = resume && done(outputs);
        if skip {
            summary.skipped.push(name);
            log(&format!("[{name}] skipped, artifacts present"));
        } else {
            summary.ran.push(name);
            log(&format!("[{name}] running"));
        }
        !skip
    };
    let seed_base = cfg.seed.wrapping_mul(2 * STAGE_SEED_STRIDE);

    let orca_demo_episodes = match cfg.demonstrator {
        Demonstrator::Dvl => cfg.dvl_demos,
        Demonstrator::Orca => cfg.a2cmp.imitation.demos,
    };
    let orca_demos: DemoMemory = if stage("orca-demos", &[paths.orca_demos()], &mut summary) {
        let demos = collect_demos(cfg, &RobotPolicy::Orca(cfg.orca), orca_demo_episodes, seed_base)?;
        save_demos(&demos, &paths.orca_demos())?;
        demos
    } else {
        load_demos(&paths.orca_demos())?
    };

    let dvl_params = if stage("dvl", &[paths.dvl_checkpoint(), paths.dvl_curve()], &mut summary) {
        train_dvl_to(cfg, Some(&orca_demos), out_dir)?.params
    } else {
        load_checkpoint(&paths.dvl_checkpoint())?.params
    };
    let dvl = RobotPolicy::from_params(dvl_params, Algorithm::Dvl, cfg)?;

    let a2cmp_demos = match cfg.demonstrator {
        Demonstrator::Orca => orca_demos,
        Demonstrator::Dvl => {
            if stage("dvl-demos", &[paths.dvl_demos()], &mut summary) {
                let demos = collect_demos(cfg, &dvl, cfg.a2cmp.imitation.demos, seed_base + STAGE_SEED_STRIDE)?;
                save_demos(&demos, &paths.dvl_demos())?;
                demos
            } else {
                load_demos(&paths.dvl_demos())?
            }
        }
    };

    let a2cmp_params = if stage("a2cmp", &[paths.a2cmp_checkpoint(), paths.a2cmp_curve()], &mut summary) {
        train_a2cmp_to(cfg, Some(&a2cmp_demos), out_dir)?
    } else {
        load_checkpoint(&paths.a2cmp_checkpoint())?.params
    };
    let a2cmp = RobotPolicy::from_params(a2cmp_params, Algorithm::A2cmp, cfg)?;

    if stage("evaluate", &[paths.comparison()], &mut summary) {
        let eval_seed = EVAL_SEED_BASE.wrapping_add(cfg.seed);
        let mut reports = Vec::new();
        for (prefix, robot) in [("orca", RobotPolicy::Orca(cfg.orca)), ("dvl", dvl), ("a2cmp", a2cmp)] {
            let record = if prefix == "a2cmp" { cfg.export_traj } else { 0 };
            let (report, records) = evaluate(cfg, &robot, cfg.eval_episodes, eval_seed, record)?;
            write_evaluation(out_dir, prefix, robot.name(), &report, &records)?;
            reports.push((robot.name(), report));
        }
        let named: Vec<(&str, &_)> = reports.iter().map(|(n, r)| (*n, r)).collect();
        let table = export::comparison_csv(&named);
        log(table.trim_end());
        write_file(&paths.comparison(), table.as_bytes())?;
    }
    Ok(summary)
}
