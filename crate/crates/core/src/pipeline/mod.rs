//! Config-driven stage runner.
//!
//! Stages run in the order ingest, weights, esda, features, train,
//! importance. Each reads its config inputs plus artifacts written by earlier
//! stages into the output directory, and records hashes of both in
//! `manifest.json`. A stage whose fingerprint and outputs match the manifest
//! is skipped unless forced.

pub mod config;
pub mod fixture;
pub mod manifest;
mod stages;

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

pub use config::PipelineConfig;
pub use manifest::{Manifest, StageRecord};

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Weights,
    Esda,
    Features,
    Train,
    Importance,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Ingest,
        Stage::Weights,
        Stage::Esda,
        Stage::Features,
        Stage::Train,
        Stage::Importance,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Weights => "weights",
            Stage::Esda => "esda",
            Stage::Features => "features",
            Stage::Train => "train",
            Stage::Importance => "importance",
        }
    }

    /// Artifacts this stage writes.
    pub fn outputs(self) -> &'static [&'static str] {
        match self {
            Stage::Ingest => &["panel.csv", "ingest_report.json"],
            Stage::Weights => &["weights.csv", "islands.csv"],
            Stage::Esda => &["moran.json", "lisa.geojson", "lisa.csv"],
            Stage::Features => &["features.csv", "features_manifest.json", "population_near_water.csv"],
            Stage::Train => &["model.json", "metrics.json"],
            Stage::Importance => &["importance.csv"],
        }
    }

    /// Artifacts of earlier stages this stage reads, with their producer.
    pub fn requires(self) -> &'static [(&'static str, Stage)] {
        match self {
            Stage::Ingest | Stage::Weights => &[],
            Stage::Esda => &[
                ("panel.csv", Stage::Ingest),
                ("weights.csv", Stage::Weights),
                ("islands.csv", Stage::Weights),
            ],
            Stage::Features => &[("panel.csv", Stage::Ingest)],
            Stage::Train => &[("features.csv", Stage::Features)],
            Stage::Importance => &[("features.csv", Stage::Features), ("model.json", Stage::Train)],
        }
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown stage `{s}`")))
    }
}

/// `None` selects every stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StageSelection(pub Option<Stage>);

impl StageSelection {
    pub const ALL: StageSelection = StageSelection(None);

    fn stages(self) -> Vec<Stage> {
        match self.0 {
            None => Stage::ALL.to_vec(),
            Some(s) => vec![s],
        }
    }
}

impl FromStr for StageSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            Ok(StageSelection::ALL)
        } else {
            Ok(StageSelection(Some(s.parse()?)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub force: bool,
    /// 0 uses the global thread pool.
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageOutcome {
    Ran,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunReport {
    pub stages: Vec<(Stage, StageOutcome)>,
}

impl RunReport {
    pub fn outcome(&self, stage: Stage) -> Option<StageOutcome> {
        self.stages.iter().find(|(s, _)| *s == stage).map(|(_, o)| *o)
    }
}

/// Exclusive claim on an output directory, released on drop.
struct DirLock(PathBuf);

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self> {
        let path = dir.join(".lock");
        let mut f = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| match e.kind() {
                std::io::ErrorKind::AlreadyExists => Error::Locked(path.clone()),
                _ => Error::io(&path, e),
            })?;
        let _ = writeln!(f, "{}", std::process::id());
        Ok(DirLock(path))
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

pub fn run(config: &PipelineConfig, selection: StageSelection, opts: RunOptions) -> Result<RunReport> {
    config.validate()?;
    let out_dir = config.resolve(&config.output_dir);
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let _lock = DirLock::acquire(&out_dir)?;
    par::with_threads(opts.threads, || run_locked(config, selection, opts, &out_dir))
}

fn run_locked(config: &PipelineConfig, selection: StageSelection, opts: RunOptions, out_dir: &Path) -> Result<RunReport> {
    let mut manifest = Manifest::load_or_default(out_dir);
    let mut report = RunReport::default();
    for stage in selection.stages() {
        for &(artifact, producer) in stage.requires() {
            if !out_dir.join(artifact).is_file() {
                return Err(Error::UnmetDependency {
                    stage: stage.name(),
                    requires: producer.name(),
                    artifact: artifact.to_string(),
                });
            }
        }
        let wrap = |e: Error| Error::Stage {
            stage: stage.name(),
            source: Box::new(e),
        };
        let mut inputs = BTreeMap::new();
        for p in stages::config_inputs(config, stage) {
            inputs.insert(
                format!("input:{}", p.display()),
                manifest::sha256_file(&config.resolve(&p)).map_err(wrap)?,
            );
        }
        for &(artifact, _) in stage.requires() {
            inputs.insert(
                format!("artifact:{artifact}"),
                manifest::sha256_file(&out_dir.join(artifact)).map_err(wrap)?,
            );
        }
        let params = stages::params(config, stage);
        let fp = manifest::fingerprint(stage.name(), &inputs, &params);

        if !opts.force && manifest.is_current(stage.name(), &fp, out_dir) {
            log::info!("stage {} skipped: inputs and outputs unchanged", stage.name());
            report.stages.push((stage, StageOutcome::Skipped));
            continue;
        }
        log::info!("stage {} started", stage.name());
        stages::execute(config, stage, out_dir).map_err(wrap)?;
        let mut outputs = BTreeMap::new();
        for name in stage.outputs() {
            outputs.insert(name.to_string(), manifest::sha256_file(&out_dir.join(name)).map_err(wrap)?);
        }
        manifest.stages.insert(
            stage.name().to_string(),
            StageRecord {
                fingerprint: fp,
                inputs,
                params,
                outputs,
            },
        );
        manifest.save(out_dir)?;
        log::info!("stage {} finished", stage.name());
        report.stages.push((stage, StageOutcome::Ran));
    }
    Ok(report)
}
