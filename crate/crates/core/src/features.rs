//! District-week feature table.
//!
//! Every dataset is reduced to one value per district per layer (a layer is
//! a dated raster or point snapshot), then joined onto the panel weeks
//! according to its cadence:
//!
//! * `Static`: one layer broadcast to every week.
//! * `Yearly`: the layer whose year is nearest to the week's year (ties go
//!   to the earlier layer).
//! * `SubWeekly`: layers dated inside a week are aggregated (mean or sum).
//!   Weeks without a layer carry the previous week's value forward; leading
//!   weeks take the first later value.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{haversine_km, BBox};
use crate::ingest::{serial_week_of_date, week_start, AdminRegion, PointValue, SurveillancePanel};
use crate::learn::Dataset;
use crate::raster::{population_by_class, tabulate_area, zonal_mean, RasterGrid};
use crate::par;

/// Predictor columns in table order; the serial week is the time feature.
pub const PREDICTORS: [&str; 12] = [
    "week",
    "precipitation",
    "temperature",
    "trees",
    "crops",
    "built_up",
    "bare_ground",
    "rangeland",
    "population_density",
    "population_near_water",
    "relative_wealth",
    "elevation",
];

/// Land-cover columns in table order.
pub const LANDCOVER_CLASSES: [&str; 5] = ["trees", "crops", "built_up", "bare_ground", "rangeland"];

/// Class codes for [`LANDCOVER_CLASSES`] in a 10 m annual land-cover product.
pub const DEFAULT_LANDCOVER_CODES: [i64; 5] = [2, 5, 7, 8, 11];

// ---------------------------------------------------------------- scalers

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalerKind {
    MinMax,
    Robust,
}

/// Affine map `x -> (x - center) / scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScale {
    pub center: f64,
    pub scale: f64,
}

impl ColumnScale {
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.center) / self.scale
    }

    pub fn invert(&self, s: f64) -> f64 {
        s * self.scale + self.center
    }
}

fn check_column(column: &[f64]) -> Result<()> {
    if column.is_empty() {
        return Err(Error::EmptyInput("column"));
    }
    if let Some(i) = column.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("column value at {i} is not finite")));
    }
    Ok(())
}

pub fn minmax_params(column: &[f64]) -> Result<ColumnScale> {
    check_column(column)?;
    let min = column.iter().copied().fold(f64::INFINITY, f64::min);
    let max = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    Ok(ColumnScale {
        center: min,
        scale: if range > 0.0 { range } else { 1.0 },
    })
}

/// Min-max scaling to [0, 1]; a constant column maps to zeros.
pub fn minmax_scale(column: &[f64]) -> Result<(Vec<f64>, ColumnScale)> {
    let p = minmax_params(column)?;
    Ok((column.iter().map(|&x| p.apply(x)).collect(), p))
}

/// Quantile with linear interpolation between order statistics at
/// position `q * (n - 1)`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn robust_params(column: &[f64]) -> Result<ColumnScale> {
    check_column(column)?;
    let mut sorted = column.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    Ok(ColumnScale {
        center: quantile_sorted(&sorted, 0.5),
        scale: if iqr > 0.0 { iqr } else { 1.0 },
    })
}

/// Centre on the median and divide by the interquartile range (by 1 when
/// the IQR is zero).
pub fn robust_scale(column: &[f64]) -> Result<(Vec<f64>, ColumnScale)> {
    let p = robust_params(column)?;
    Ok((column.iter().map(|&x| p.apply(x)).collect(), p))
}

/// Per-column scaler fitted on one dataset and applied unchanged to others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub kind: ScalerKind,
    pub feature_names: Vec<String>,
    pub columns: Vec<ColumnScale>,
}

impl ScalerParams {
    pub fn fit(kind: ScalerKind, data: &Dataset) -> Result<Self> {
        let columns = (0..data.n_features)
            .map(|j| {
                let col = data.column(j);
                match kind {
                    ScalerKind::MinMax => minmax_params(&col),
                    ScalerKind::Robust => robust_params(&col),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScalerParams {
            kind,
            feature_names: data.feature_names.clone(),
            columns,
        })
    }

    pub fn transform(&self, data: &mut Dataset) -> Result<()> {
        if data.feature_names != self.feature_names {
            return Err(Error::SchemaMismatch {
                expected: self.feature_names.join(","),
                found: data.feature_names.join(","),
            });
        }
        let p = data.n_features;
        for row in data.x.chunks_mut(p) {
            for (v, c) in row.iter_mut().zip(&self.columns) {
                *v = c.apply(*v);
            }
        }
        Ok(())
    }
}

/// Sum of the min-max scaled class area, class fraction and population
/// living on that class; one call per land-cover class. Values lie in [0, 3].
pub fn landcover_composite(area: &[f64], fraction: &[f64], population: &[f64]) -> Result<Vec<f64>> {
    if fraction.len() != area.len() {
        return Err(Error::LengthMismatch {
            expected: area.len(),
            found: fraction.len(),
        });
    }
    if population.len() != area.len() {
        return Err(Error::LengthMismatch {
            expected: area.len(),
            found: population.len(),
        });
    }
    let (a, _) = minmax_scale(area)?;
    let (f, _) = minmax_scale(fraction)?;
    let (p, _) = minmax_scale(population)?;
    Ok((0..area.len()).map(|i| a[i] + f[i] + p[i]).collect())
}

// ---------------------------------------------------------------- district values

/// Zonal mean per region; regions without a valid cell fall back to the
/// raster value at their centroid, and stay `None` if that is nodata too.
pub fn zonal_layer(raster: &RasterGrid, regions: &[AdminRegion]) -> Vec<Option<f64>> {
    zonal_mean(raster, regions)
        .into_iter()
        .zip(regions)
        .map(|(z, r)| z.mean.or_else(|| raster.sample(r.geometry.centroid())))
        .collect()
}

/// Zonal sum per region with the same centroid fallback as [`zonal_layer`].
pub fn zonal_sum_layer(raster: &RasterGrid, regions: &[AdminRegion]) -> Vec<Option<f64>> {
    zonal_mean(raster, regions)
        .into_iter()
        .zip(regions)
        .map(|(z, r)| {
            if z.cell_count > 0 {
                Some(z.sum)
            } else {
                raster.sample(r.geometry.centroid())
            }
        })
        .collect()
}

/// One composite column per land-cover class in `codes`.
pub fn landcover_layers(
    classraster: &RasterGrid,
    population: &RasterGrid,
    regions: &[AdminRegion],
    codes: &[i64],
) -> Result<Vec<Vec<f64>>> {
    if regions.is_empty() {
        return Err(Error::EmptyInput("regions"));
    }
    let tab = tabulate_area(classraster, regions, codes);
    let pop = population_by_class(population, classraster, regions, codes);
    (0..codes.len())
        .map(|c| {
            let area: Vec<f64> = tab.iter().map(|t| t.classes[c].cell_count as f64).collect();
            let fraction: Vec<f64> = tab.iter().map(|t| t.classes[c].fraction).collect();
            let people: Vec<f64> = pop.iter().map(|p| p[c]).collect();
            landcover_composite(&area, &fraction, &people)
        })
        .collect()
}

/// Mean of the points inside each region; regions without points take the
/// value of the point nearest to their centroid. `None` only for an empty
/// point set.
pub fn point_mean_layer(points: &[PointValue], regions: &[AdminRegion]) -> Vec<Option<f64>> {
    if points.is_empty() {
        return vec![None; regions.len()];
    }
    par::map_slice(regions, |r| {
        let bbox: BBox = r.geometry.bbox();
        let (mut sum, mut n) = (0.0, 0usize);
        for p in points {
            let c = crate::geometry::Coord::new(p.lon, p.lat);
            if bbox.contains(c) && r.geometry.contains(c) {
                sum += p.value;
                n += 1;
            }
        }
        if n > 0 {
            return Some(sum / n as f64);
        }
        let centre = r.geometry.centroid();
        points
            .iter()
            .map(|p| (haversine_km(centre, crate::geometry::Coord::new(p.lon, p.lat)), p.value))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, v)| v)
    })
}

// ---------------------------------------------------------------- temporal joins

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Cadence {
    #[default]
    Static,
    Yearly,
    #[serde(alias = "daily", alias = "sub_weekly")]
    Subweekly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeeklyAggregate {
    #[default]
    Mean,
    Sum,
}

/// One snapshot of a dataset: a value per panel district.
#[derive(Debug, Clone, PartialEq)]
pub struct DatedLayer {
    pub date: NaiveDate,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSeries {
    pub name: String,
    pub cadence: Cadence,
    pub aggregate: WeeklyAggregate,
    pub layers: Vec<DatedLayer>,
}

impl DatasetSeries {
    pub fn constant(name: &str, values: Vec<Option<f64>>) -> Self {
        DatasetSeries {
            name: name.to_string(),
            cadence: Cadence::Static,
            aggregate: WeeklyAggregate::Mean,
            layers: vec![DatedLayer {
                date: NaiveDate::MIN,
                values,
            }],
        }
    }

    /// Layer index (or indices, for sub-weekly data) feeding each week.
    fn week_sources(&self, start: NaiveDate, n_weeks: usize) -> Result<Vec<Vec<usize>>> {
        if self.layers.is_empty() {
            return Err(Error::InvalidParameter(format!("dataset {} has no layers", self.name)));
        }
        match self.cadence {
            Cadence::Static => {
                if self.layers.len() != 1 {
                    return Err(Error::InvalidParameter(format!(
                        "static dataset {} has {} layers",
                        self.name,
                        self.layers.len()
                    )));
                }
                Ok(vec![vec![0]; n_weeks])
            }
            Cadence::Yearly => Ok((1..=n_weeks as i64)
                .map(|w| {
                    let year = week_start(start, w).year();
                    let best = (0..self.layers.len())
                        .min_by_key(|&k| {
                            let y = self.layers[k].date.year();
                            ((y - year).abs(), y)
                        })
                        .unwrap();
                    vec![best]
                })
                .collect()),
            Cadence::Subweekly => {
                let mut direct: Vec<Vec<usize>> = vec![Vec::new(); n_weeks];
                for (k, layer) in self.layers.iter().enumerate() {
                    let w = serial_week_of_date(start, layer.date);
                    if w >= 1 && w as usize <= n_weeks {
                        direct[w as usize - 1].push(k);
                    }
                }
                let first = direct.iter().position(|d| !d.is_empty()).ok_or_else(|| {
                    Error::InvalidParameter(format!("dataset {} has no layer inside the panel weeks", self.name))
                })?;
                let mut out = direct.clone();
                for w in 0..n_weeks {
                    if out[w].is_empty() {
                        out[w] = if w < first { direct[first].clone() } else { out[w - 1].clone() };
                    }
                }
                Ok(out)
            }
        }
    }

    /// Values per district row for every week, `[district][week]`.
    fn resolve(&self, adm_ids: &[i64], start: NaiveDate, n_weeks: usize) -> Result<Vec<Vec<f64>>> {
        for layer in &self.layers {
            if layer.values.len() != adm_ids.len() {
                return Err(Error::LengthMismatch {
                    expected: adm_ids.len(),
                    found: layer.values.len(),
                });
            }
        }
        let sources = self.week_sources(start, n_weeks)?;
        let missing = |d: usize| Error::MissingValue {
            dataset: self.name.clone(),
            adm_id: adm_ids[d],
        };
        (0..adm_ids.len())
            .map(|d| {
                sources
                    .iter()
                    .map(|src| {
                        let mut acc = 0.0;
                        for &k in src {
                            acc += self.layers[k].values[d].ok_or_else(|| missing(d))?;
                        }
                        Ok(match self.aggregate {
                            WeeklyAggregate::Mean => acc / src.len() as f64,
                            WeeklyAggregate::Sum => acc,
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// Every non-time predictor as a dataset aligned with the panel districts.
#[derive(Debug, Clone)]
pub struct FeatureInputs {
    pub precipitation: DatasetSeries,
    pub temperature: DatasetSeries,
    /// In [`LANDCOVER_CLASSES`] order.
    pub landcover: [DatasetSeries; 5],
    pub population_density: DatasetSeries,
    pub population_near_water: DatasetSeries,
    pub relative_wealth: DatasetSeries,
    pub elevation: DatasetSeries,
}

impl FeatureInputs {
    fn ordered(&self) -> [&DatasetSeries; 11] {
        let lc = &self.landcover;
        [
            &self.precipitation,
            &self.temperature,
            &lc[0],
            &lc[1],
            &lc[2],
            &lc[3],
            &lc[4],
            &self.population_density,
            &self.population_near_water,
            &self.relative_wealth,
            &self.elevation,
        ]
    }

    pub fn cadences(&self) -> Vec<(String, Cadence, WeeklyAggregate)> {
        self.ordered()
            .iter()
            .map(|s| (s.name.clone(), s.cadence, s.aggregate))
            .collect()
    }
}

// ---------------------------------------------------------------- table

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRow {
    pub id: usize,
    pub adm_id: i64,
    pub week: u32,
    pub week_start: NaiveDate,
    pub precipitation: f64,
    pub temperature: f64,
    pub trees: f64,
    pub crops: f64,
    pub built_up: f64,
    pub bare_ground: f64,
    pub rangeland: f64,
    pub population_density: f64,
    pub population_near_water: f64,
    pub relative_wealth: f64,
    pub elevation: f64,
    pub total_cases: u64,
    pub label: u8,
}

impl FeatureRow {
    pub fn predictors(&self) -> [f64; 12] {
        [
            self.week as f64,
            self.precipitation,
            self.temperature,
            self.trees,
            self.crops,
            self.built_up,
            self.bare_ground,
            self.rangeland,
            self.population_density,
            self.population_near_water,
            self.relative_wealth,
            self.elevation,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.rows.iter().filter(|r| r.label == 1).count()
    }

    pub fn to_dataset(&self) -> Dataset {
        let mut x = Vec::with_capacity(self.rows.len() * PREDICTORS.len());
        for r in &self.rows {
            x.extend_from_slice(&r.predictors());
        }
        Dataset {
            n_features: PREDICTORS.len(),
            feature_names: PREDICTORS.iter().map(|s| s.to_string()).collect(),
            x,
            y: self.rows.iter().map(|r| r.label).collect(),
        }
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::EmptyInput("feature table"));
        }
        let path = path.as_ref();
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(f));
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::Reader::from_reader(std::io::BufReader::new(f));
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<FeatureRow>, _>>()?;
        Ok(FeatureTable { rows })
    }
}

/// One row per district and week, ordered by adm_id then week. The label is
/// 1 when the week has at least one case.
pub fn assemble_feature_table(panel: &SurveillancePanel, inputs: &FeatureInputs) -> Result<FeatureTable> {
    let t = panel.n_weeks;
    let resolved = inputs
        .ordered()
        .iter()
        .map(|s| s.resolve(&panel.districts, panel.start, t))
        .collect::<Result<Vec<_>>>()?;

    let mut order: Vec<usize> = (0..panel.districts.len()).collect();
    order.sort_by_key(|&d| panel.districts[d]);

    let week_starts: Vec<NaiveDate> = (1..=t as i64).map(|w| week_start(panel.start, w)).collect();
    let blocks = par::map_slice(&order, |&d| {
        (0..t)
            .map(|w| {
                let v = |k: usize| resolved[k][d][w];
                let cases = panel.cases[d * t + w];
                FeatureRow {
                    id: 0,
                    adm_id: panel.districts[d],
                    week: (w + 1) as u32,
                    week_start: week_starts[w],
                    precipitation: v(0),
                    temperature: v(1),
                    trees: v(2),
                    crops: v(3),
                    built_up: v(4),
                    bare_ground: v(5),
                    rangeland: v(6),
                    population_density: v(7),
                    population_near_water: v(8),
                    relative_wealth: v(9),
                    elevation: v(10),
                    total_cases: cases,
                    label: u8::from(cases >= 1),
                }
            })
            .collect::<Vec<_>>()
    });
    let mut rows: Vec<FeatureRow> = blocks.into_iter().flatten().collect();
    for (i, r) in rows.iter_mut().enumerate() {
        r.id = i;
    }
    Ok(FeatureTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    #[test]
    fn minmax_examples() {
        assert_eq!(minmax_scale(&[0.0, 5.0, 10.0]).unwrap().0, vec![0.0, 0.5, 1.0]);
        assert_eq!(minmax_scale(&[7.0; 3]).unwrap().0, vec![0.0; 3]);
        assert!(minmax_scale(&[]).is_err());
    }

    #[test]
    fn robust_examples() {
        let (s, p) = robust_scale(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(s, vec![-1.0, -0.5, 0.0, 0.5, 48.5]);
        assert_eq!((p.center, p.scale), (3.0, 2.0));
        assert_eq!(robust_scale(&[4.0; 4]).unwrap().0, vec![0.0; 4]);
    }

    #[test]
    fn interpolated_quartiles() {
        // positions 0.75 and 2.25 over [10, 20, 30, 40]
        let s = [10.0, 20.0, 30.0, 40.0];
        assert_eq!(quantile_sorted(&s, 0.25), 17.5);
        assert_eq!(quantile_sorted(&s, 0.5), 25.0);
        assert_eq!(quantile_sorted(&s, 0.75), 32.5);
    }

    #[test]
    fn composite_examples() {
        let c = landcover_composite(&[0.0, 5.0, 10.0], &[0.0, 0.5, 1.0], &[0.0, 50.0, 100.0]).unwrap();
        assert_eq!(c, vec![0.0, 1.5, 3.0]);
        assert_eq!(landcover_composite(&[4.0], &[0.2], &[9.0]).unwrap(), vec![0.0]);
        assert!(landcover_composite(&[1.0, 2.0], &[0.1], &[1.0, 2.0]).is_err());
    }

    fn sub(name: &str, layers: Vec<(NaiveDate, Vec<f64>)>) -> DatasetSeries {
        DatasetSeries {
            name: name.into(),
            cadence: Cadence::Subweekly,
            aggregate: WeeklyAggregate::Mean,
            layers: layers
                .into_iter()
                .map(|(date, v)| DatedLayer {
                    date,
                    values: v.into_iter().map(Some).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn subweekly_mean_sum_and_gaps() {
        let start = d(2019, 1, 1);
        let mut s = sub(
            "t",
            vec![
                (d(2019, 1, 8), vec![2.0]),
                (d(2019, 1, 10), vec![4.0]),
                (d(2019, 1, 22), vec![10.0]),
            ],
        );
        // weeks: 1 (lead gap), 2 (two layers), 3 (gap), 4 (one layer), 5 (gap)
        let r = s.resolve(&[1], start, 5).unwrap();
        assert_eq!(r[0], vec![3.0, 3.0, 3.0, 10.0, 10.0]);
        s.aggregate = WeeklyAggregate::Sum;
        assert_eq!(s.resolve(&[1], start, 2).unwrap()[0], vec![6.0, 6.0]);
    }

    #[test]
    fn yearly_nearest_with_earlier_tie() {
        let start = d(2019, 1, 1);
        let s = DatasetSeries {
            name: "lc".into(),
            cadence: Cadence::Yearly,
            aggregate: WeeklyAggregate::Mean,
            layers: vec![
                DatedLayer { date: d(2018, 6, 1), values: vec![Some(1.0)] },
                DatedLayer { date: d(2020, 6, 1), values: vec![Some(2.0)] },
            ],
        };
        let r = s.resolve(&[7], start, 60).unwrap();
        assert_eq!(r[0][0], 1.0); // 2019 is equidistant
        assert_eq!(r[0][59], 2.0); // week 60 starts in 2020
    }

    fn inputs(n: usize, elevation: Vec<Option<f64>>) -> FeatureInputs {
        let c = |name: &str, v: f64| DatasetSeries::constant(name, vec![Some(v); n]);
        FeatureInputs {
            precipitation: c("precipitation", 1.0),
            temperature: c("temperature", 2.0),
            landcover: [c("trees", 0.1), c("crops", 0.2), c("built_up", 0.3), c("bare_ground", 0.4), c("rangeland", 0.5)],
            population_density: c("population_density", 100.0),
            population_near_water: c("population_near_water", 10.0),
            relative_wealth: c("relative_wealth", -0.3),
            elevation: DatasetSeries::constant("elevation", elevation),
        }
    }

    #[test]
    fn broadcast_and_binarize() {
        let mut panel = SurveillancePanel::zeros("malaria", d(2019, 1, 1), 2, vec![20, 10]);
        panel.cases = vec![2, 0, 0, 5];
        let t = assemble_feature_table(&panel, &inputs(2, vec![Some(1500.0), Some(800.0)])).unwrap();
        assert_eq!(t.len(), 4);
        let keys: Vec<(i64, u32)> = t.rows.iter().map(|r| (r.adm_id, r.week)).collect();
        assert_eq!(keys, vec![(10, 1), (10, 2), (20, 1), (20, 2)]);
        assert_eq!(
            t.rows.iter().map(|r| r.elevation).collect::<Vec<_>>(),
            vec![800.0, 800.0, 1500.0, 1500.0]
        );
        assert_eq!(t.rows.iter().map(|r| r.label).collect::<Vec<_>>(), vec![0, 1, 1, 0]);
        assert_eq!(t.rows[1].week_start, d(2019, 1, 8));
        let ds = t.to_dataset();
        assert_eq!(ds.n_features, 12);
        assert_eq!(ds.x.len(), 48);
    }

    #[test]
    fn missing_value_names_dataset_and_district() {
        let panel = SurveillancePanel::zeros("malaria", d(2019, 1, 1), 2, vec![20, 10]);
        let err = assemble_feature_table(&panel, &inputs(2, vec![Some(1.0), None])).unwrap_err();
        match err {
            Error::MissingValue { dataset, adm_id } => {
                assert_eq!(dataset, "elevation");
                assert_eq!(adm_id, 10);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn csv_round_trip() {
        let panel = SurveillancePanel::zeros("malaria", d(2019, 1, 1), 3, vec![1]);
        let t = assemble_feature_table(&panel, &inputs(1, vec![Some(12.5)])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.csv");
        t.write_csv(&path).unwrap();
        let header = std::fs::read_to_string(&path).unwrap();
        assert!(header.starts_with(
            "id,adm_id,week,week_start,precipitation,temperature,trees,crops,built_up,bare_ground,\
             rangeland,population_density,population_near_water,relative_wealth,elevation,total_cases,label\n"
        ));
        assert_eq!(FeatureTable::read_csv(&path).unwrap(), t);
    }

    #[test]
    fn wealth_mean_and_nearest_fallback() {
        use crate::geometry::{MultiPolygon, Polygon};
        let region = |id: i64, x: f64| AdminRegion {
            adm_id: id,
            name: id.to_string(),
            province: "p".into(),
            country: "c".into(),
            geometry: MultiPolygon(vec![Polygon::rect(x, 0.0, x + 1.0, 1.0)]),
        };
        let regions = vec![region(1, 0.0), region(2, 1.0), region(3, 5.0)];
        let pts = vec![
            PointValue { lon: 0.2, lat: 0.5, value: 1.0 },
            PointValue { lon: 0.8, lat: 0.5, value: 3.0 },
            PointValue { lon: 1.5, lat: 0.5, value: -2.0 },
        ];
        assert_eq!(point_mean_layer(&pts, &regions), vec![Some(2.0), Some(-2.0), Some(-2.0)]);
        assert_eq!(point_mean_layer(&[], &regions), vec![None; 3]);
    }
}
