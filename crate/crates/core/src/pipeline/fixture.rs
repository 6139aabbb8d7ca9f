//! Synthetic mini-region: a grid of square districts with a planted block of
//! high case counts, plus every raster, vector and point input the pipeline
//! needs. Fully determined by [`FixtureSpec`].

use std::fs;
use std::path::{Path, PathBuf};

use chrono::Duration;
use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::ingest::{default_panel_start, write_ascii_grid, year_week, RasterGrid};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureSpec {
    pub nx: usize,
    pub ny: usize,
    pub n_weeks: usize,
    pub seed: u64,
    pub n_perm: usize,
    pub n_trees: usize,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        FixtureSpec {
            nx: 8,
            ny: 6,
            n_weeks: 26,
            seed: 7,
            n_perm: 199,
            n_trees: 25,
        }
    }
}

const LON0: f64 = 29.0;
const LAT0: f64 = -4.0;
const SIDE: f64 = 0.25;
const CELLS_PER_SIDE: usize = 10;
const DISEASE: &str = "Malaria";

impl FixtureSpec {
    fn in_block(&self, col: usize, row: usize) -> bool {
        let (c0, r0) = (self.nx / 2 - 1, self.ny / 2 - 1);
        (c0..c0 + 3).contains(&col) && (r0..r0 + 3).contains(&row)
    }

    fn grid(&self, values: impl Fn(f64, f64) -> f64) -> RasterGrid {
        let cs = SIDE / CELLS_PER_SIDE as f64;
        let (ncols, nrows) = (self.nx * CELLS_PER_SIDE, self.ny * CELLS_PER_SIDE);
        let mut v = Vec::with_capacity(ncols * nrows);
        for r in 0..nrows {
            for c in 0..ncols {
                let lon = LON0 + (c as f64 + 0.5) * cs;
                let lat = LAT0 + (nrows - r) as f64 * cs - cs / 2.0;
                v.push(values(lon, lat));
            }
        }
        RasterGrid::new(ncols, nrows, LON0, LAT0, cs, -9999.0, v).expect("valid fixture grid")
    }
}

fn write(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the inputs and a `config.json` into `dir`; returns the config path.
pub fn write_mini_region(dir: &Path, spec: &FixtureSpec) -> Result<PathBuf> {
    if spec.nx < 4 || spec.ny < 4 {
        return Err(Error::InvalidParameter("fixture grid must be at least 4 x 4".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let start = default_panel_start();
    let mut rng = rng::stream(spec.seed, 0);

    // districts
    let mut features = Vec::new();
    for row in 0..spec.ny {
        for col in 0..spec.nx {
            let (x0, y0) = (LON0 + col as f64 * SIDE, LAT0 + row as f64 * SIDE);
            let ring = json!([[x0, y0], [x0 + SIDE, y0], [x0 + SIDE, y0 + SIDE], [x0, y0 + SIDE], [x0, y0]]);
            features.push(json!({
                "type": "Feature",
                "properties": {
                    "adm_id": 1000 + row * spec.nx + col,
                    "name": format!("District {row}-{col}"),
                    "province": format!("Province {}", row / 2),
                    "country": "Testland",
                },
                "geometry": { "type": "Polygon", "coordinates": [ring] },
            }));
        }
    }
    write(
        &dir.join("districts.geojson"),
        json!({ "type": "FeatureCollection", "features": features }).to_string(),
    )?;

    // surveillance: sparse rows, zero weeks omitted
    let mut csv = String::from("Year,Week,Country,Province,District,Disease,Number of cases,Number of deaths\n");
    for row in 0..spec.ny {
        for col in 0..spec.nx {
            let p = if spec.in_block(col, row) { 0.75 } else { 0.08 };
            for w in 1..=spec.n_weeks as i64 {
                let season = 1.0 + 0.3 * (w as f64 / 8.0).sin();
                if rng.random::<f64>() < (p * season).min(0.95) {
                    let cases: u64 = rng.random_range(1..40);
                    let deaths = u64::from(rng.random::<f64>() < 0.05);
                    let (year, week) = year_week(start, w);
                    csv.push_str(&format!(
                        "{year},{week},Testland,Province {},District {row}-{col},{DISEASE},{cases},{deaths}\n",
                        row / 2
                    ));
                }
                if rng.random::<f64>() < 0.05 {
                    let (year, week) = year_week(start, w);
                    csv.push_str(&format!(
                        "{year},{week},Testland,Province {},District {row}-{col},Cholera,1,0\n",
                        row / 2
                    ));
                }
            }
        }
    }
    csv.push_str("2018,52,Testland,Province 0,District 0-0,Malaria,3,0\n");
    write(&dir.join("surveillance.csv"), csv)?;

    // rasters
    let rdir = dir.join("rasters");
    fs::create_dir_all(&rdir).map_err(|e| Error::io(&rdir, e))?;
    let mut layers: Vec<(&str, Vec<Value>)> = Vec::new();
    let elev = spec.grid(|lon, lat| (1200.0 + 400.0 * (lon * 3.0).sin() + 250.0 * (lat * 2.0).cos()).round());
    write_ascii_grid(&elev, rdir.join("elevation.asc"))?;
    layers.push(("elevation", vec![json!({ "path": "rasters/elevation.asc" })]));

    for (name, offset, base) in [("precipitation", 0i64, 4.0), ("temperature", 3, 22.0)] {
        let mut list = Vec::new();
        let mut day = offset;
        let mut k = 0;
        while day < spec.n_weeks as i64 * 7 {
            let date = start + Duration::days(day);
            let phase = day as f64 / 30.0;
            let g = spec.grid(|lon, lat| {
                let v = base * (1.0 + 0.4 * (phase + lon).sin()) + (lat + 4.0) * 2.0;
                (v * 100.0).round() / 100.0
            });
            let file = format!("rasters/{name}_{k:02}.asc");
            write_ascii_grid(&g, dir.join(&file))?;
            list.push(json!({ "date": date, "path": file }));
            day += 10;
            k += 1;
        }
        layers.push((name, list));
    }

    let codes = [1.0, 2.0, 4.0, 5.0, 7.0, 8.0, 11.0];
    let lc = spec.grid(|lon, lat| {
        let k = ((lon * 7.3).floor() as i64 * 31 + (lat * 5.1).floor() as i64 * 17).rem_euclid(codes.len() as i64);
        codes[k as usize]
    });
    write_ascii_grid(&lc, rdir.join("landcover_2019.asc"))?;
    layers.push(("landcover", vec![json!({ "date": "2019-01-01", "path": "rasters/landcover_2019.asc" })]));

    let mut pop_rng = rng::stream(spec.seed, 1);
    let mut pop = spec.grid(|_, _| 0.0);
    for v in pop.values.iter_mut() {
        *v = if pop_rng.random::<f64>() < 0.01 {
            -9999.0
        } else {
            pop_rng.random_range(0..500) as f64
        };
    }
    write_ascii_grid(&pop, rdir.join("population_2019.asc"))?;
    layers.push(("population", vec![json!({ "date": "2019-01-01", "path": "rasters/population_2019.asc" })]));

    // water: one lake and one river
    let (lx, ly) = (LON0 + 0.3, LAT0 + 0.3);
    let water = json!({
        "type": "FeatureCollection",
        "features": [
            { "type": "Feature", "properties": { "name": "lake" }, "geometry": { "type": "Polygon",
              "coordinates": [[[lx, ly], [lx + 0.2, ly], [lx + 0.2, ly + 0.15], [lx, ly + 0.15], [lx, ly]]] } },
            { "type": "Feature", "properties": { "name": "river" }, "geometry": { "type": "LineString",
              "coordinates": [[LON0, LAT0 + 1.0], [LON0 + 1.0, LAT0 + 0.9], [LON0 + spec.nx as f64 * SIDE, LAT0 + 1.2]] } },
        ],
    });
    write(&dir.join("water.geojson"), water.to_string())?;

    // relative wealth points
    let mut wealth = String::from("lon,lat,value\n");
    for _ in 0..(spec.nx * spec.ny / 2) {
        let lon = LON0 + rng.random::<f64>() * spec.nx as f64 * SIDE;
        let lat = LAT0 + rng.random::<f64>() * spec.ny as f64 * SIDE;
        let v = (rng.random::<f64>() * 2.0 - 1.0) * 100.0;
        wealth.push_str(&format!("{lon},{lat},{}\n", v.round() / 100.0));
    }
    write(&dir.join("wealth.csv"), wealth)?;

    let mut rasters = serde_json::Map::new();
    for (name, list) in layers {
        let cadence = match name {
            "elevation" => "static",
            "landcover" | "population" => "yearly",
            _ => "subweekly",
        };
        rasters.insert(name.into(), json!({ "cadence": cadence, "aggregate": "mean", "layers": list }));
    }
    let config = json!({
        "disease": DISEASE,
        "panel": { "start": start, "n_weeks": spec.n_weeks },
        "inputs": {
            "surveillance": "surveillance.csv",
            "districts": "districts.geojson",
            "water": "water.geojson",
            "wealth": "wealth.csv",
            "rasters": rasters,
        },
        "buffer_km": [3.0, 5.0],
        "weights": { "kind": "queen" },
        "esda": { "n_perm": spec.n_perm, "alpha": 0.05, "seed": spec.seed },
        "learn": { "n_trees": spec.n_trees, "importance_repeats": 3, "seed": spec.seed },
        "output_dir": "out",
    });
    let path = dir.join("config.json");
    write(&path, serde_json::to_string_pretty(&config)? + "\n")?;
    Ok(path)
}
