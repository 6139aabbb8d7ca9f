//! District-level spatial epidemiology engine.
//!
//! The crate covers the whole analysis chain for weekly disease surveillance
//! counts over admin-2 districts:
//!
//! * [`ingest`]: surveillance CSV, district GeoJSON, ESRI ASCII rasters and
//!   point CSVs, plus materialization of the dense district-week panel.
//! * [`geo`]: queen/rook contiguity weights and spatial lags.
//! * [`esda`]: global Moran's I and local Moran (LISA) with permutation
//!   inference.
//! * [`raster`]: zonal mean, tabulate area and population-near-water masks.
//! * [`features`]: scalers, land-cover composites and the 12-predictor
//!   district-week feature table.
//! * [`learn`]: train/test split, resampling, random forest, metrics and
//!   permutation importance.
//! * [`pipeline`]: config-driven stage runner used by the `outbreak` CLI.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.
//! All randomness is drawn from seed-derived streams so results never depend
//! on the thread count.

pub mod error;
pub mod esda;
pub mod features;
pub mod geo;
pub mod geometry;
pub mod ingest;
pub mod learn;
pub mod par;
pub mod pipeline;
pub mod raster;
mod rng;

pub use error::{Error, Result};
