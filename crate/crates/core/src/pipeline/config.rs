//! JSON pipeline configuration. Relative paths resolve against the directory
//! holding the config file.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::esda::{DEFAULT_ALPHA, DEFAULT_PERMUTATIONS};
use crate::features::{Cadence, WeeklyAggregate, DEFAULT_LANDCOVER_CODES};
use crate::geo::{ContiguityKind, DEFAULT_TOLERANCE};
use crate::ingest::default_panel_start;
use crate::learn::resample::DEFAULT_SMOTE_K;
use crate::learn::{Criterion, ForestParams, ResampleMethod, SplitSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub disease: String,
    #[serde(default)]
    pub panel: PanelConfig,
    pub inputs: InputPaths,
    #[serde(default = "default_buffers")]
    pub buffer_km: Vec<f64>,
    #[serde(default = "default_codes")]
    pub landcover_codes: [i64; 5],
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub esda: EsdaConfig,
    #[serde(default)]
    pub learn: LearnConfig,
    pub output_dir: PathBuf,
    /// Directory relative paths resolve against; set by [`PipelineConfig::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_buffers() -> Vec<f64> {
    vec![3.0]
}

fn default_codes() -> [i64; 5] {
    DEFAULT_LANDCOVER_CODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanelConfig {
    pub start: NaiveDate,
    pub n_weeks: usize,
}

impl Default for PanelConfig {
    fn default() -> Self {
        PanelConfig {
            start: default_panel_start(),
            n_weeks: 209,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    pub surveillance: PathBuf,
    pub districts: PathBuf,
    pub water: PathBuf,
    pub wealth: PathBuf,
    pub rasters: RasterInputs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterInputs {
    pub precipitation: RasterSeries,
    pub temperature: RasterSeries,
    pub elevation: RasterSeries,
    pub landcover: RasterSeries,
    pub population: RasterSeries,
}

impl RasterInputs {
    pub fn named(&self) -> [(&'static str, &RasterSeries); 5] {
        [
            ("precipitation", &self.precipitation),
            ("temperature", &self.temperature),
            ("elevation", &self.elevation),
            ("landcover", &self.landcover),
            ("population", &self.population),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RasterSeries {
    #[serde(default)]
    pub cadence: Cadence,
    #[serde(default)]
    pub aggregate: WeeklyAggregate,
    pub layers: Vec<LayerPath>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerPath {
    #[serde(default)]
    pub date: Option<NaiveDate>,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsConfig {
    pub kind: ContiguityKind,
    pub tolerance: f64,
}

impl Default for WeightsConfig {
    fn default() -> Self {
        WeightsConfig {
            kind: ContiguityKind::Queen,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EsdaConfig {
    pub n_perm: usize,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for EsdaConfig {
    fn default() -> Self {
        EsdaConfig {
            n_perm: DEFAULT_PERMUTATIONS,
            alpha: DEFAULT_ALPHA,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LearnConfig {
    pub test_fraction: f64,
    pub stratified: bool,
    pub resample: ResampleMethod,
    pub smote_k: usize,
    pub criterion: Criterion,
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: Option<usize>,
    pub importance_repeats: usize,
    pub seed: u64,
}

impl Default for LearnConfig {
    fn default() -> Self {
        let f = ForestParams::default();
        LearnConfig {
            test_fraction: 0.2,
            stratified: false,
            resample: ResampleMethod::None,
            smote_k: DEFAULT_SMOTE_K,
            criterion: f.criterion,
            n_trees: f.n_trees,
            max_depth: f.max_depth,
            min_leaf: f.min_leaf,
            features_per_split: f.features_per_split,
            importance_repeats: 5,
            seed: 0,
        }
    }
}

impl LearnConfig {
    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            test_fraction: self.test_fraction,
            seed: self.seed,
            stratified: self.stratified,
        }
    }

    pub fn resample_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }

    pub fn forest_params(&self) -> ForestParams {
        ForestParams {
            criterion: self.criterion,
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
            features_per_split: self.features_per_split,
            seed: self.seed.wrapping_add(2),
        }
    }

    pub fn importance_seed(&self) -> u64 {
        self.seed.wrapping_add(3)
    }
}

impl PipelineConfig {
    pub fn from_json_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_json_str(&text, base)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn output_path(&self, name: &str) -> PathBuf {
        self.resolve(&self.output_dir).join(name)
    }

    /// Overrides the ESDA and learning seeds.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.esda.seed = seed;
        self.learn.seed = seed;
        self
    }

    /// Every input file named by the config, in a fixed order.
    pub fn input_files(&self) -> Vec<&Path> {
        let i = &self.inputs;
        let mut out: Vec<&Path> = vec![&i.surveillance, &i.districts, &i.water, &i.wealth];
        for (_, s) in i.rasters.named() {
            out.extend(s.layers.iter().map(|l| l.path.as_path()));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.disease.trim().is_empty() {
            return bad("disease must be non-empty".into());
        }
        if self.panel.n_weeks == 0 {
            return bad("panel.n_weeks must be >= 1".into());
        }
        if self.buffer_km.is_empty() || self.buffer_km.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return bad("buffer_km must be a non-empty list of non-negative distances".into());
        }
        if self.esda.n_perm == 0 || !(self.esda.alpha > 0.0 && self.esda.alpha <= 1.0) {
            return bad("esda.n_perm must be >= 1 and esda.alpha in (0, 1]".into());
        }
        let l = &self.learn;
        if !(l.test_fraction > 0.0 && l.test_fraction < 1.0) {
            return bad("learn.test_fraction must be in (0, 1)".into());
        }
        if l.n_trees == 0 || l.min_leaf == 0 || l.importance_repeats == 0 || l.max_depth == Some(0) {
            return bad("learn.n_trees, min_leaf, max_depth and importance_repeats must be >= 1".into());
        }
        for (name, s) in self.inputs.rasters.named() {
            if s.layers.is_empty() {
                return bad(format!("raster `{name}` has no layers"));
            }
            match s.cadence {
                Cadence::Static if s.layers.len() != 1 => {
                    return bad(format!("static raster `{name}` must have exactly one layer"));
                }
                Cadence::Yearly | Cadence::Subweekly if s.layers.iter().any(|l| l.date.is_none()) => {
                    return bad(format!("every layer of raster `{name}` needs a date"));
                }
                _ => {}
            }
        }
        for p in self.input_files() {
            if !self.resolve(p).is_file() {
                return bad(format!("input file {} does not exist", self.resolve(p).display()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_takes_defaults() {
        let text = r#"{
            "disease": "Malaria",
            "inputs": {
                "surveillance": "s.csv", "districts": "d.geojson", "water": "w.geojson", "wealth": "p.csv",
                "rasters": {
                    "precipitation": {"cadence": "subweekly", "layers": [{"date": "2019-01-02", "path": "p1.asc"}]},
                    "temperature": {"cadence": "daily", "layers": [{"date": "2019-01-02", "path": "t1.asc"}]},
                    "elevation": {"layers": [{"path": "e.asc"}]},
                    "landcover": {"cadence": "yearly", "layers": [{"date": "2019-01-01", "path": "lc.asc"}]},
                    "population": {"cadence": "yearly", "layers": [{"date": "2019-01-01", "path": "pop.asc"}]}
                }
            },
            "output_dir": "out"
        }"#;
        let c = PipelineConfig::from_json_str(text, "/tmp/x").unwrap();
        assert_eq!(c.panel.n_weeks, 209);
        assert_eq!(c.buffer_km, vec![3.0]);
        assert_eq!(c.esda.n_perm, 999);
        assert_eq!(c.learn.n_trees, 100);
        assert_eq!(c.inputs.rasters.temperature.cadence, Cadence::Subweekly);
        assert_eq!(c.output_path("a.json"), PathBuf::from("/tmp/x/out/a.json"));
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let c = c.with_seed(9);
        assert_eq!((c.esda.seed, c.learn.seed), (9, 9));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(PipelineConfig::from_json_str(r#"{"disease": "x", "bogus": 1}"#, ".").is_err());
    }
}
