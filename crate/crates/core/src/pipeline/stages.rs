use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{PipelineConfig, RasterSeries};
use super::Stage;
use crate::error::{Error, Result};
use crate::esda::{export_lisa_csv, export_lisa_geojson, lisa, morans_i, GlobalMoranResult};
use crate::features::{
    assemble_feature_table, landcover_layers, point_mean_layer, zonal_layer, zonal_sum_layer, DatasetSeries,
    DatedLayer, FeatureInputs, FeatureTable, ScalerKind, ScalerParams, LANDCOVER_CLASSES, PREDICTORS,
};
use crate::geo::{build_contiguity_weights, SpatialWeights};
use crate::ingest::{
    build_panel, parse_ascii_grid, parse_district_geojson, parse_points_csv, parse_shapes_geojson,
    parse_surveillance_csv, AdminRegion, RasterGrid, SurveillancePanel,
};
use crate::learn::forest::parse_unbounded;
use crate::learn::{
    evaluate, permutation_importance, resample, split_indices, train_forest, ForestModel, SplitSpec,
};
use crate::raster::population_near_water;

/// Config input files a stage reads.
pub(super) fn config_inputs(c: &PipelineConfig, stage: Stage) -> Vec<PathBuf> {
    let i = &c.inputs;
    match stage {
        Stage::Ingest => vec![i.surveillance.clone(), i.districts.clone()],
        Stage::Weights | Stage::Esda => vec![i.districts.clone()],
        Stage::Features => {
            let mut v = vec![i.districts.clone(), i.water.clone(), i.wealth.clone()];
            for (_, s) in i.rasters.named() {
                v.extend(s.layers.iter().map(|l| l.path.clone()));
            }
            v
        }
        Stage::Train | Stage::Importance => Vec::new(),
    }
}

/// Parameters that determine a stage's outputs.
pub(super) fn params(c: &PipelineConfig, stage: Stage) -> Value {
    let panel = json!({ "disease": c.disease, "start": c.panel.start, "n_weeks": c.panel.n_weeks });
    match stage {
        Stage::Ingest => panel,
        Stage::Weights => json!(c.weights),
        Stage::Esda => json!({ "panel": panel, "esda": c.esda }),
        Stage::Features => json!({
            "panel": panel,
            "buffer_km": c.buffer_km,
            "landcover_codes": c.landcover_codes,
            "rasters": c.inputs.rasters,
        }),
        Stage::Train => {
            let mut l = json!(c.learn);
            l.as_object_mut().unwrap().remove("importance_repeats");
            l
        }
        Stage::Importance => json!({
            "importance_repeats": c.learn.importance_repeats,
            "seed": c.learn.importance_seed(),
        }),
    }
}

pub(super) fn execute(c: &PipelineConfig, stage: Stage, out: &Path) -> Result<()> {
    match stage {
        Stage::Ingest => ingest(c, out),
        Stage::Weights => weights(c, out),
        Stage::Esda => esda(c, out),
        Stage::Features => features(c, out),
        Stage::Train => train(c, out),
        Stage::Importance => importance(c, out),
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_panel(c: &PipelineConfig, out: &Path) -> Result<SurveillancePanel> {
    SurveillancePanel::read_csv(out.join("panel.csv"), &c.disease, c.panel.start)
}

/// Regions reordered to match the panel's district rows.
fn regions_for_panel(regions: Vec<AdminRegion>, panel: &SurveillancePanel) -> Result<Vec<AdminRegion>> {
    let mut by_id: HashMap<i64, AdminRegion> = regions.into_iter().map(|r| (r.adm_id, r)).collect();
    panel
        .districts
        .iter()
        .map(|id| {
            by_id
                .remove(id)
                .ok_or_else(|| Error::Config(format!("panel district {id} is not in the districts file")))
        })
        .collect()
}

fn ingest(c: &PipelineConfig, out: &Path) -> Result<()> {
    let import = parse_surveillance_csv(c.resolve(&c.inputs.surveillance))?;
    let regions = parse_district_geojson(c.resolve(&c.inputs.districts))?;
    let build = build_panel(&import.records, &regions, c.panel.start, c.panel.n_weeks, &c.disease)?;
    build.panel.write_csv(out.join("panel.csv"))?;
    let mut warnings = import.warnings.clone();
    warnings.extend(build.warnings.iter().cloned());
    write_json(
        &out.join("ingest_report.json"),
        &json!({
            "disease": c.disease,
            "districts": regions.len(),
            "weeks": c.panel.n_weeks,
            "panel_rows": build.panel.flattened_len(),
            "total_cases": build.panel.total_cases(),
            "records": import.records.len(),
            "matched_rows": build.matched_rows,
            "out_of_range_rows": build.out_of_range_rows,
            "rejected": import.rejected,
            "unmatched": build.unmatched,
            "warnings": warnings,
        }),
    )
}

fn weights(c: &PipelineConfig, out: &Path) -> Result<()> {
    let regions = parse_district_geojson(c.resolve(&c.inputs.districts))?;
    let w = build_contiguity_weights(&regions, c.weights.kind, c.weights.tolerance)?;
    w.write_csv(out.join("weights.csv"), out.join("islands.csv"))
}

#[derive(Serialize)]
struct MoranDoc<'a> {
    disease: &'a str,
    variable: &'static str,
    #[serde(flatten)]
    result: GlobalMoranResult,
}

fn esda(c: &PipelineConfig, out: &Path) -> Result<()> {
    let panel = read_panel(c, out)?;
    let regions = parse_district_geojson(c.resolve(&c.inputs.districts))?;
    let w = SpatialWeights::read_csv(out.join("weights.csv"), out.join("islands.csv"), regions.len())?;
    let totals: HashMap<i64, f64> = panel.districts.iter().copied().zip(panel.district_totals()).collect();
    let x: Vec<f64> = regions
        .iter()
        .map(|r| {
            totals
                .get(&r.adm_id)
                .copied()
                .ok_or_else(|| Error::Config(format!("district {} missing from the panel", r.adm_id)))
        })
        .collect::<Result<_>>()?;
    let e = &c.esda;
    let global = morans_i(&x, &w, e.n_perm, e.seed)?;
    let local = lisa(&x, &w, e.n_perm, e.seed, e.alpha)?;
    write_json(
        &out.join("moran.json"),
        &MoranDoc {
            disease: &c.disease,
            variable: "total_cases",
            result: global,
        },
    )?;
    export_lisa_geojson(&regions, &local, out.join("lisa.geojson"))?;
    export_lisa_csv(&regions, &local, out.join("lisa.csv"))
}

fn layer_date(d: Option<NaiveDate>) -> NaiveDate {
    d.unwrap_or(NaiveDate::MIN)
}

/// Parsed layers of a raster series with their dates.
fn load_series(c: &PipelineConfig, s: &RasterSeries) -> Result<Vec<(NaiveDate, RasterGrid)>> {
    s.layers
        .iter()
        .map(|l| Ok((layer_date(l.date), parse_ascii_grid(c.resolve(&l.path))?)))
        .collect()
}

fn series(name: &str, s: &RasterSeries, layers: Vec<(NaiveDate, Vec<Option<f64>>)>) -> DatasetSeries {
    DatasetSeries {
        name: name.to_string(),
        cadence: s.cadence,
        aggregate: s.aggregate,
        layers: layers
            .into_iter()
            .map(|(date, values)| DatedLayer { date, values })
            .collect(),
    }
}

fn zonal_series(c: &PipelineConfig, name: &str, s: &RasterSeries, regions: &[AdminRegion]) -> Result<DatasetSeries> {
    let layers = load_series(c, s)?
        .into_iter()
        .map(|(d, g)| (d, zonal_layer(&g, regions)))
        .collect();
    Ok(series(name, s, layers))
}

fn features(c: &PipelineConfig, out: &Path) -> Result<()> {
    let panel = read_panel(c, out)?;
    let regions = regions_for_panel(parse_district_geojson(c.resolve(&c.inputs.districts))?, &panel)?;
    let r = &c.inputs.rasters;

    let precipitation = zonal_series(c, "precipitation", &r.precipitation, &regions)?;
    let temperature = zonal_series(c, "temperature", &r.temperature, &regions)?;
    let elevation = zonal_series(c, "elevation", &r.elevation, &regions)?;

    let population = load_series(c, &r.population)?;
    let density = series(
        "population_density",
        &r.population,
        population.iter().map(|(d, g)| (*d, zonal_sum_layer(g, &regions))).collect(),
    );

    let water = parse_shapes_geojson(c.resolve(&c.inputs.water))?;
    let mut near_rows = Vec::new();
    let mut near_layers = Vec::new();
    for (date, pop) in &population {
        for (b, &km) in c.buffer_km.iter().enumerate() {
            let sums = population_near_water(pop, &water, km, &regions)?;
            for (adm_id, v) in &sums {
                near_rows.push((*adm_id, *date, km, *v));
            }
            if b == 0 {
                near_layers.push((*date, sums.into_iter().map(|(_, v)| Some(v)).collect()));
            }
        }
    }
    let near_water = series("population_near_water", &r.population, near_layers);

    // Each land-cover year is paired with the population layer nearest in time.
    let mut lc_layers: Vec<Vec<(NaiveDate, Vec<Option<f64>>)>> = vec![Vec::new(); 5];
    for (date, lc) in load_series(c, &r.landcover)? {
        let (_, pop) = population
            .iter()
            .min_by_key(|(d, _)| ((d.year() - date.year()).abs(), d.year()))
            .expect("population has layers");
        let cols = landcover_layers(&lc, pop, &regions, &c.landcover_codes)?;
        for (k, col) in cols.into_iter().enumerate() {
            lc_layers[k].push((date, col.into_iter().map(Some).collect()));
        }
    }
    let mut lc_iter = lc_layers.into_iter().enumerate().map(|(k, l)| series(LANDCOVER_CLASSES[k], &r.landcover, l));
    let landcover = std::array::from_fn(|_| lc_iter.next().unwrap());

    let points = parse_points_csv(c.resolve(&c.inputs.wealth))?;
    let wealth = DatasetSeries::constant("relative_wealth", point_mean_layer(&points, &regions));

    let inputs = FeatureInputs {
        precipitation,
        temperature,
        landcover,
        population_density: density,
        population_near_water: near_water,
        relative_wealth: wealth,
        elevation,
    };
    let table = assemble_feature_table(&panel, &inputs)?;
    table.write_csv(out.join("features.csv"))?;

    let path = out.join("population_near_water.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    w.write_record(["adm_id", "layer_date", "buffer_km", "population"])?;
    for (adm_id, date, km, v) in near_rows {
        let date = if date == NaiveDate::MIN { String::new() } else { date.to_string() };
        w.write_record([adm_id.to_string(), date, km.to_string(), v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let datasets: Vec<Value> = inputs
        .cadences()
        .into_iter()
        .map(|(name, cadence, aggregate)| json!({ "name": name, "cadence": cadence, "aggregate": aggregate }))
        .collect();
    let codes: serde_json::Map<String, Value> = LANDCOVER_CLASSES
        .iter()
        .zip(c.landcover_codes)
        .map(|(n, code)| (n.to_string(), json!(code)))
        .collect();
    write_json(
        &out.join("features_manifest.json"),
        &json!({
            "disease": c.disease,
            "rows": table.len(),
            "positives": table.positives(),
            "districts": panel.districts.len(),
            "weeks": panel.n_weeks,
            "predictors": PREDICTORS,
            "label": "total_cases >= 1",
            "datasets": datasets,
            "landcover_codes": codes,
            "landcover_composite": "minmax(class cells) + minmax(class fraction) + minmax(population on class)",
            "buffer_km": c.buffer_km,
            "feature_buffer_km": c.buffer_km[0],
            "model_scaler": { "kind": ScalerKind::Robust, "fitted_on": "training split", "stored_in": "model.json" },
        }),
    )
}

fn train(c: &PipelineConfig, out: &Path) -> Result<()> {
    let data = FeatureTable::read_csv(out.join("features.csv"))?.to_dataset();
    let l = &c.learn;
    let spec = l.split_spec();
    let split = split_indices(&data.y, &spec)?;
    let mut train = data.subset(&split.train);
    let mut test = data.subset(&split.test);
    let scaler = ScalerParams::fit(ScalerKind::Robust, &train)?;
    scaler.transform(&mut train)?;
    scaler.transform(&mut test)?;
    let balanced = resample(&train, l.resample, l.resample_seed(), l.smote_k)?.data;
    let model = train_forest(&balanced, &l.forest_params())?;
    let (pred, scores) = model.predict(&test)?;
    let report = evaluate(&test.y, &pred, &scores)?;

    let mut doc = model.to_json();
    let obj = doc.as_object_mut().expect("model document is an object");
    obj.insert("scaler".into(), json!(scaler));
    obj.insert("split".into(), json!(spec));
    let path = out.join("model.json");
    fs::write(&path, serde_json::to_string(&doc)?).map_err(|e| Error::io(&path, e))?;

    write_json(
        &out.join("metrics.json"),
        &json!({
            "disease": c.disease,
            "train_rows": train.n_rows(),
            "train_positives": train.class_counts().1,
            "resample": l.resample,
            "resampled_rows": balanced.n_rows(),
            "test_rows": test.n_rows(),
            "test_positives": test.class_counts().1,
            "threshold": 0.5,
            "metrics": report,
        }),
    )
}

fn importance(c: &PipelineConfig, out: &Path) -> Result<()> {
    let path = out.join("model.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let doc = parse_unbounded(&text)?;
    let model = ForestModel::from_json(&doc)?;
    let field = |k: &str| {
        doc.get(k)
            .cloned()
            .ok_or_else(|| Error::ModelFormat(format!("model.json lacks `{k}`")))
    };
    let scaler: ScalerParams = serde_json::from_value(field("scaler")?)?;
    let spec: SplitSpec = serde_json::from_value(field("split")?)?;

    let data = FeatureTable::read_csv(out.join("features.csv"))?.to_dataset();
    let split = split_indices(&data.y, &spec)?;
    let mut test = data.subset(&split.test);
    scaler.transform(&mut test)?;
    let ranking = permutation_importance(&model, &test, c.learn.importance_repeats, c.learn.importance_seed())?;

    let path = out.join("importance.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    w.write_record(["rank", "feature", "importance_mean", "importance_std"])?;
    for (k, f) in ranking.iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            f.feature.clone(),
            f.importance_mean.to_string(),
            f.importance_std.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}
