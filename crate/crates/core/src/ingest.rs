//! Input parsing and panel materialization.
//!
//! Surveillance rows arrive as `(year, week, country, province, district,
//! disease, cases, deaths)`. They are resolved to district polygons by name
//! and exploded into a dense district × week panel where every unreported
//! cell holds zero cases.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::geometry::{ring_signed_area, Coord, MultiPolygon, Polygon, Shape};
pub use crate::raster::RasterGrid;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveillanceRecord {
    pub year: i32,
    pub week: u32,
    pub country: String,
    pub province: String,
    pub district: String,
    pub disease: String,
    pub cases: u64,
    pub deaths: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    /// 1-based line number in the source file (header is line 1).
    pub line: u64,
    pub message: String,
}

/// Output of [`parse_surveillance_csv`]: accepted records plus everything
/// that was rejected or looked suspicious.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SurveillanceImport {
    pub records: Vec<SurveillanceRecord>,
    pub rejected: Vec<RowError>,
    pub warnings: Vec<String>,
}

const COLUMNS: [(&str, &[&str]); 8] = [
    ("year", &["year"]),
    ("week", &["week"]),
    ("country", &["country"]),
    ("province", &["province"]),
    ("district", &["district"]),
    ("disease", &["disease"]),
    ("cases", &["number of cases", "cases"]),
    ("deaths", &["number of deaths", "deaths"]),
];

fn norm_header(h: &str) -> String {
    h.trim()
        .trim_start_matches('\u{feff}')
        .to_lowercase()
        .replace('_', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Case-insensitive, whitespace-trimmed name key used for joins.
pub fn name_key(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

pub fn parse_surveillance_csv(path: impl AsRef<Path>) -> Result<SurveillanceImport> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_surveillance(file, &path.display().to_string())
}

pub fn read_surveillance(reader: impl std::io::Read, context: &str) -> Result<SurveillanceImport> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(norm_header).collect();
    let mut idx = [0usize; 8];
    for (slot, (name, aliases)) in idx.iter_mut().zip(COLUMNS.iter()) {
        *slot = headers
            .iter()
            .position(|h| aliases.contains(&h.as_str()))
            .ok_or_else(|| Error::MissingColumn {
                context: context.to_string(),
                column: name.to_string(),
            })?;
    }

    let mut out = SurveillanceImport::default();
    let mut seen: HashMap<(i32, u32, String, String, String, String), usize> = HashMap::new();
    for (row_no, row) in rdr.records().enumerate() {
        let line = row_no as u64 + 2;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                out.rejected.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let field = |k: usize| row.get(idx[k]).unwrap_or("");
        let rec = (|| -> std::result::Result<SurveillanceRecord, String> {
            let int = |k: usize| -> std::result::Result<i64, String> {
                field(k)
                    .parse::<i64>()
                    .map_err(|_| format!("{}: `{}` is not an integer", COLUMNS[k].0, field(k)))
            };
            let year = int(0)?;
            let week = int(1)?;
            let cases = int(6)?;
            let deaths = int(7)?;
            if !(1..=53).contains(&week) {
                return Err(format!("week {week} outside 1..=53"));
            }
            if cases < 0 || deaths < 0 {
                return Err("negative count".to_string());
            }
            Ok(SurveillanceRecord {
                year: i32::try_from(year).map_err(|_| format!("year {year} out of range"))?,
                week: week as u32,
                country: field(2).to_string(),
                province: field(3).to_string(),
                district: field(4).to_string(),
                disease: field(5).to_string(),
                cases: cases as u64,
                deaths: deaths as u64,
            })
        })();
        match rec {
            Ok(rec) => {
                if rec.deaths > rec.cases {
                    out.warnings.push(format!(
                        "line {line}: deaths ({}) exceed cases ({})",
                        rec.deaths, rec.cases
                    ));
                }
                let key = (
                    rec.year,
                    rec.week,
                    name_key(&rec.country),
                    name_key(&rec.province),
                    name_key(&rec.district),
                    name_key(&rec.disease),
                );
                if let Some(&prev) = seen.get(&key) {
                    out.warnings
                        .push(format!("line {line}: duplicate key, replacing earlier row"));
                    out.records[prev] = rec;
                } else {
                    seen.insert(key, out.records.len());
                    out.records.push(rec);
                }
            }
            Err(message) => out.rejected.push(RowError { line, message }),
        }
    }
    for w in &out.warnings {
        log::warn!("{context}: {w}");
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdminRegion {
    pub adm_id: i64,
    pub name: String,
    pub province: String,
    pub country: String,
    pub geometry: MultiPolygon,
}

fn read_json(path: &Path) -> Result<Value> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

fn features_of(doc: &Value) -> Result<&Vec<Value>> {
    if doc.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(Error::parse("geojson", "expected a FeatureCollection"));
    }
    doc.get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("geojson", "FeatureCollection without `features` array"))
}

fn parse_position(v: &Value, index: usize) -> Result<Coord> {
    let arr = v.as_array().filter(|a| a.len() >= 2);
    let xy = arr.and_then(|a| Some((a[0].as_f64()?, a[1].as_f64()?)));
    match xy {
        Some((x, y)) if x.is_finite() && y.is_finite() => Ok(Coord::new(x, y)),
        _ => Err(Error::InvalidGeometry {
            index,
            message: format!("bad position {v}"),
        }),
    }
}

fn parse_line(v: &Value, index: usize) -> Result<Vec<Coord>> {
    v.as_array()
        .ok_or_else(|| Error::InvalidGeometry {
            index,
            message: "coordinates are not an array".into(),
        })?
        .iter()
        .map(|p| parse_position(p, index))
        .collect()
}

fn parse_ring(v: &Value, index: usize) -> Result<Vec<Coord>> {
    let ring = parse_line(v, index)?;
    if ring.len() < 4 {
        return Err(Error::InvalidGeometry {
            index,
            message: format!("ring has {} positions, need at least 4", ring.len()),
        });
    }
    if ring.first() != ring.last() {
        return Err(Error::InvalidGeometry {
            index,
            message: "ring is not closed".into(),
        });
    }
    if ring_signed_area(&ring) == 0.0 {
        return Err(Error::InvalidGeometry {
            index,
            message: "ring has zero area".into(),
        });
    }
    Ok(ring)
}

fn parse_polygon(v: &Value, index: usize) -> Result<Polygon> {
    let rings = v.as_array().ok_or_else(|| Error::InvalidGeometry {
        index,
        message: "polygon coordinates are not an array".into(),
    })?;
    let mut rings = rings
        .iter()
        .map(|r| parse_ring(r, index))
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    let exterior = rings.next().ok_or_else(|| Error::InvalidGeometry {
        index,
        message: "polygon without rings".into(),
    })?;
    Ok(Polygon::new(exterior, rings.collect()))
}

fn parse_geometry(geom: &Value, index: usize) -> Result<Shape> {
    let kind = geom.get("type").and_then(Value::as_str).unwrap_or("");
    let coords = geom.get("coordinates").ok_or_else(|| Error::InvalidGeometry {
        index,
        message: "geometry without coordinates".into(),
    })?;
    let many = |v: &Value| -> Result<Vec<Value>> {
        v.as_array().cloned().ok_or_else(|| Error::InvalidGeometry {
            index,
            message: "coordinates are not an array".into(),
        })
    };
    Ok(match kind {
        "Point" => Shape::Points(vec![parse_position(coords, index)?]),
        "MultiPoint" => Shape::Points(parse_line(coords, index)?),
        "LineString" => Shape::Lines(vec![parse_line(coords, index)?]),
        "MultiLineString" => Shape::Lines(
            many(coords)?
                .iter()
                .map(|l| parse_line(l, index))
                .collect::<Result<_>>()?,
        ),
        "Polygon" => Shape::Polygons(MultiPolygon(vec![parse_polygon(coords, index)?])),
        "MultiPolygon" => Shape::Polygons(MultiPolygon(
            many(coords)?
                .iter()
                .map(|p| parse_polygon(p, index))
                .collect::<Result<_>>()?,
        )),
        other => {
            return Err(Error::InvalidGeometry {
                index,
                message: format!("unsupported geometry type `{other}`"),
            })
        }
    })
}

pub fn parse_district_geojson(path: impl AsRef<Path>) -> Result<Vec<AdminRegion>> {
    regions_from_geojson(&read_json(path.as_ref())?)
}

pub fn regions_from_geojson(doc: &Value) -> Result<Vec<AdminRegion>> {
    let mut regions = Vec::new();
    let mut ids = HashMap::new();
    for (index, feat) in features_of(doc)?.iter().enumerate() {
        let geom = feat.get("geometry").ok_or_else(|| Error::InvalidGeometry {
            index,
            message: "feature without geometry".into(),
        })?;
        let geometry = match parse_geometry(geom, index)? {
            Shape::Polygons(mp) => mp,
            _ => {
                return Err(Error::InvalidGeometry {
                    index,
                    message: "district geometry must be Polygon or MultiPolygon".into(),
                })
            }
        };
        if geometry.area() <= 0.0 {
            return Err(Error::InvalidGeometry {
                index,
                message: "district has non-positive area".into(),
            });
        }
        let props = feat.get("properties").unwrap_or(&Value::Null);
        let adm_id = match props.get("adm_id") {
            Some(Value::Number(n)) => n.as_i64(),
            Some(Value::String(s)) => s.trim().parse().ok(),
            _ => None,
        }
        .ok_or_else(|| Error::InvalidGeometry {
            index,
            message: "missing or non-integer `adm_id`".into(),
        })?;
        if let Some(prev) = ids.insert(adm_id, index) {
            return Err(Error::InvalidGeometry {
                index,
                message: format!("adm_id {adm_id} already used by feature {prev}"),
            });
        }
        let text = |k: &str| -> Result<String> {
            props
                .get(k)
                .and_then(Value::as_str)
                .map(str::to_string)
                .ok_or_else(|| Error::InvalidGeometry {
                    index,
                    message: format!("missing string property `{k}`"),
                })
        };
        regions.push(AdminRegion {
            adm_id,
            name: text("name")?,
            province: text("province")?,
            country: text("country")?,
            geometry,
        });
    }
    Ok(regions)
}

/// Water bodies or any other vector layer; properties are ignored.
pub fn parse_shapes_geojson(path: impl AsRef<Path>) -> Result<Vec<Shape>> {
    let doc = read_json(path.as_ref())?;
    features_of(&doc)?
        .iter()
        .enumerate()
        .filter_map(|(i, f)| match f.get("geometry") {
            Some(Value::Null) | None => None,
            Some(g) => Some(parse_geometry(g, i)),
        })
        .collect()
}

pub fn parse_ascii_grid(path: impl AsRef<Path>) -> Result<RasterGrid> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_ascii_grid(BufReader::new(file), &path.display().to_string())
}

pub fn read_ascii_grid(reader: impl BufRead, context: &str) -> Result<RasterGrid> {
    let mut header: HashMap<String, f64> = HashMap::new();
    let mut values = Vec::new();
    let mut in_data = false;
    let mut expected = usize::MAX;
    for (line_no, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(context, e))?;
        let mut tokens = line.split_whitespace().peekable();
        let Some(first) = tokens.peek() else { continue };
        if !in_data && first.chars().next().is_some_and(|c| c.is_ascii_alphabetic()) {
            let key = first.to_lowercase();
            tokens.next();
            let raw = tokens.next().unwrap_or("");
            let val: f64 = raw.parse().map_err(|_| {
                Error::parse(context, format!("line {}: bad header value `{raw}`", line_no + 1))
            })?;
            header.insert(key, val);
            continue;
        }
        if !in_data {
            in_data = true;
            let get = |k: &str| header.get(k).copied();
            let ncols = get("ncols").unwrap_or(0.0) as usize;
            let nrows = get("nrows").unwrap_or(0.0) as usize;
            expected = ncols * nrows;
            values.reserve(expected);
        }
        for (col, tok) in tokens.enumerate() {
            let v: f64 = tok.parse().map_err(|_| {
                Error::parse(
                    context,
                    format!("line {}, token {}: `{tok}` is not a number", line_no + 1, col + 1),
                )
            })?;
            values.push(v);
        }
    }
    let need = |k: &str| {
        header
            .get(k)
            .copied()
            .ok_or_else(|| Error::parse(context, format!("missing header `{k}`")))
    };
    let ncols = need("ncols")?;
    let nrows = need("nrows")?;
    let cellsize = need("cellsize")?;
    if ncols < 1.0 || nrows < 1.0 || ncols.fract() != 0.0 || nrows.fract() != 0.0 {
        return Err(Error::parse(context, "ncols/nrows must be positive integers"));
    }
    let xll = match (header.get("xllcorner"), header.get("xllcenter")) {
        (Some(&x), _) => x,
        (None, Some(&x)) => x - cellsize / 2.0,
        _ => return Err(Error::parse(context, "missing header `xllcorner`")),
    };
    let yll = match (header.get("yllcorner"), header.get("yllcenter")) {
        (Some(&y), _) => y,
        (None, Some(&y)) => y - cellsize / 2.0,
        _ => return Err(Error::parse(context, "missing header `yllcorner`")),
    };
    let nodata = header.get("nodata_value").copied().unwrap_or(-9999.0);
    if expected == usize::MAX {
        expected = ncols as usize * nrows as usize;
    }
    if values.len() != expected {
        return Err(Error::parse(
            context,
            format!("expected {expected} cells, found {}", values.len()),
        ));
    }
    RasterGrid::new(ncols as usize, nrows as usize, xll, yll, cellsize, nodata, values)
}

pub fn write_ascii_grid(grid: &RasterGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "ncols {}", grid.ncols).map_err(io)?;
    writeln!(w, "nrows {}", grid.nrows).map_err(io)?;
    writeln!(w, "xllcorner {}", grid.xll).map_err(io)?;
    writeln!(w, "yllcorner {}", grid.yll).map_err(io)?;
    writeln!(w, "cellsize {}", grid.cellsize).map_err(io)?;
    writeln!(w, "NODATA_value {}", grid.nodata).map_err(io)?;
    for row in grid.values.chunks(grid.ncols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(" ")).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointValue {
    pub lon: f64,
    pub lat: f64,
    pub value: f64,
}

pub type PointValueSet = Vec<PointValue>;

pub fn parse_points_csv(path: impl AsRef<Path>) -> Result<PointValueSet> {
    let path = path.as_ref();
    let ctx = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(&ctx, e.to_string()))?;
    let headers: Vec<String> = rdr.headers()?.iter().map(norm_header).collect();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                context: ctx.clone(),
                column: name.to_string(),
            })
    };
    let (ilon, ilat, ival) = (col("lon")?, col("lat")?, col("value")?);
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let num = |k: usize| -> Result<f64> {
            let raw = row.get(k).unwrap_or("");
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(&ctx, format!("line {}: bad number `{raw}`", i + 2)))
        };
        out.push(PointValue {
            lon: num(ilon)?,
            lat: num(ilat)?,
            value: num(ival)?,
        });
    }
    Ok(out)
}

/// Serial week (1-based) containing `date`, counted in 7-day blocks from
/// `start`. Dates before `start` give values ≤ 0.
pub fn serial_week_of_date(start: NaiveDate, date: NaiveDate) -> i64 {
    (date - start).num_days().div_euclid(7) + 1
}

/// Serial week for a `(year, week)` surveillance label: week 1 of a year is
/// the serial week containing 1 January, later weeks follow consecutively.
pub fn serial_week(start: NaiveDate, year: i32, week: u32) -> Option<i64> {
    let jan1 = NaiveDate::from_ymd_opt(year, 1, 1)?;
    Some(serial_week_of_date(start, jan1) + i64::from(week) - 1)
}

/// Inverse of [`serial_week`] for serial weeks ≥ 1.
pub fn year_week(start: NaiveDate, serial: i64) -> (i32, u32) {
    let date = week_start(start, serial);
    let year = date.year();
    let jan1 = NaiveDate::from_ymd_opt(year, 1, 1).expect("valid year");
    let week = serial - serial_week_of_date(start, jan1) + 1;
    (year, week as u32)
}

/// First day of serial week `serial`.
pub fn week_start(start: NaiveDate, serial: i64) -> NaiveDate {
    start + chrono::Duration::days(7 * (serial - 1))
}

pub fn default_panel_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 1, 1).expect("valid date")
}

/// Dense district × week case counts for one disease.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveillancePanel {
    pub disease: String,
    pub start: NaiveDate,
    pub n_weeks: usize,
    /// adm_id per district row, in the order of the region list.
    pub districts: Vec<i64>,
    /// Row-major `[district][week]`.
    pub cases: Vec<u64>,
    pub deaths: Vec<u64>,
}

impl SurveillancePanel {
    pub fn zeros(disease: &str, start: NaiveDate, n_weeks: usize, districts: Vec<i64>) -> Self {
        let len = districts.len() * n_weeks;
        SurveillancePanel {
            disease: disease.to_string(),
            start,
            n_weeks,
            districts,
            cases: vec![0; len],
            deaths: vec![0; len],
        }
    }

    pub fn flattened_len(&self) -> usize {
        self.cases.len()
    }

    /// Cases for district row `d` and 1-based serial week `week`.
    pub fn cases_at(&self, d: usize, week: usize) -> u64 {
        self.cases[d * self.n_weeks + week - 1]
    }

    pub fn total_cases(&self) -> u64 {
        self.cases.iter().sum()
    }

    /// Cases summed over all weeks, one value per district.
    pub fn district_totals(&self) -> Vec<f64> {
        self.cases
            .chunks(self.n_weeks)
            .map(|c| c.iter().sum::<u64>() as f64)
            .collect()
    }

    /// Re-express the panel as surveillance rows (one per non-zero cell).
    pub fn to_records(&self, regions: &[AdminRegion]) -> Vec<SurveillanceRecord> {
        let by_id: HashMap<i64, &AdminRegion> = regions.iter().map(|r| (r.adm_id, r)).collect();
        let mut out = Vec::new();
        for (d, adm) in self.districts.iter().enumerate() {
            let Some(r) = by_id.get(adm) else { continue };
            for w in 1..=self.n_weeks {
                let i = d * self.n_weeks + w - 1;
                if self.cases[i] == 0 && self.deaths[i] == 0 {
                    continue;
                }
                let (year, week) = year_week(self.start, w as i64);
                out.push(SurveillanceRecord {
                    year,
                    week,
                    country: r.country.clone(),
                    province: r.province.clone(),
                    district: r.name.clone(),
                    disease: self.disease.clone(),
                    cases: self.cases[i],
                    deaths: self.deaths[i],
                });
            }
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        w.write_record(["adm_id", "week", "week_start", "cases", "deaths"])?;
        for (d, adm) in self.districts.iter().enumerate() {
            for wk in 1..=self.n_weeks {
                let i = d * self.n_weeks + wk - 1;
                w.write_record([
                    adm.to_string(),
                    wk.to_string(),
                    week_start(self.start, wk as i64).to_string(),
                    self.cases[i].to_string(),
                    self.deaths[i].to_string(),
                ])?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Read a panel written by [`SurveillancePanel::write_csv`]. District order
    /// follows first appearance in the file.
    pub fn read_csv(path: impl AsRef<Path>, disease: &str, start: NaiveDate) -> Result<Self> {
        let path = path.as_ref();
        let ctx = path.display().to_string();
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::parse(&ctx, e.to_string()))?;
        let mut districts: Vec<i64> = Vec::new();
        let mut rows: Vec<(usize, usize, u64, u64)> = Vec::new();
        let mut pos: HashMap<i64, usize> = HashMap::new();
        let mut n_weeks = 0;
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let bad = || Error::parse(&ctx, format!("line {}: malformed panel row", i + 2));
            let adm: i64 = row.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let wk: usize = row.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let cases: u64 = row.get(3).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let deaths: u64 = row.get(4).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if wk == 0 {
                return Err(bad());
            }
            let d = *pos.entry(adm).or_insert_with(|| {
                districts.push(adm);
                districts.len() - 1
            });
            n_weeks = n_weeks.max(wk);
            rows.push((d, wk, cases, deaths));
        }
        let mut panel = SurveillancePanel::zeros(disease, start, n_weeks, districts);
        if rows.len() != panel.flattened_len() {
            return Err(Error::LengthMismatch {
                expected: panel.flattened_len(),
                found: rows.len(),
            });
        }
        for (d, wk, c, de) in rows {
            panel.cases[d * n_weeks + wk - 1] = c;
            panel.deaths[d * n_weeks + wk - 1] = de;
        }
        Ok(panel)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnmatchedName {
    pub country: String,
    pub province: String,
    pub district: String,
    pub rows: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct PanelBuild {
    #[serde(skip)]
    pub panel: SurveillancePanel,
    pub unmatched: Vec<UnmatchedName>,
    pub out_of_range_rows: usize,
    pub matched_rows: usize,
    pub warnings: Vec<String>,
}

/// Explode records for one disease into the full district × week panel.
pub fn build_panel(
    records: &[SurveillanceRecord],
    districts: &[AdminRegion],
    start: NaiveDate,
    n_weeks: usize,
    disease: &str,
) -> Result<PanelBuild> {
    if districts.is_empty() {
        return Err(Error::EmptyInput("district list"));
    }
    if n_weeks == 0 {
        return Err(Error::InvalidParameter("n_weeks must be >= 1".into()));
    }
    let mut index: HashMap<(String, String, String), usize> = HashMap::new();
    for (i, r) in districts.iter().enumerate() {
        let key = (name_key(&r.country), name_key(&r.province), name_key(&r.name));
        if index.insert(key, i).is_some() {
            return Err(Error::AmbiguousDistrict(format!(
                "{} / {} / {}",
                r.country, r.province, r.name
            )));
        }
    }

    let disease_key = name_key(disease);
    let mut panel = SurveillancePanel::zeros(
        disease,
        start,
        n_weeks,
        districts.iter().map(|r| r.adm_id).collect(),
    );
    let mut unmatched: Vec<UnmatchedName> = Vec::new();
    let mut unmatched_pos: HashMap<(String, String, String), usize> = HashMap::new();
    let (mut out_of_range, mut matched) = (0, 0);
    for rec in records.iter().filter(|r| name_key(&r.disease) == disease_key) {
        let key = (
            name_key(&rec.country),
            name_key(&rec.province),
            name_key(&rec.district),
        );
        let Some(&d) = index.get(&key) else {
            let slot = *unmatched_pos.entry(key).or_insert_with(|| {
                unmatched.push(UnmatchedName {
                    country: rec.country.clone(),
                    province: rec.province.clone(),
                    district: rec.district.clone(),
                    rows: 0,
                });
                unmatched.len() - 1
            });
            unmatched[slot].rows += 1;
            continue;
        };
        let serial = serial_week(start, rec.year, rec.week).unwrap_or(0);
        if serial < 1 || serial > n_weeks as i64 {
            out_of_range += 1;
            continue;
        }
        let i = d * n_weeks + serial as usize - 1;
        panel.cases[i] += rec.cases;
        panel.deaths[i] += rec.deaths;
        matched += 1;
    }

    let mut warnings = Vec::new();
    if out_of_range > 0 {
        warnings.push(format!("{out_of_range} rows outside the panel window dropped"));
    }
    if !unmatched.is_empty() {
        warnings.push(format!(
            "{} district names could not be resolved ({} rows dropped)",
            unmatched.len(),
            unmatched.iter().map(|u| u.rows).sum::<usize>()
        ));
    }
    for w in &warnings {
        log::warn!("panel {disease}: {w}");
    }
    Ok(PanelBuild {
        panel,
        unmatched,
        out_of_range_rows: out_of_range,
        matched_rows: matched,
        warnings,
    })
}
