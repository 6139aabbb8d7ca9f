//! Raster/vector aggregation on regular lon/lat grids.
//!
//! A cell belongs to a region when its centre lies inside the region polygon.
//! Each cell is owned by at most one region: the first containing region in
//! list order wins and later claims are counted as boundary ties.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_segment_distance, Coord, Shape};
use crate::ingest::AdminRegion;
use crate::par;

/// Regular grid; `values` is row-major with row 0 the northernmost row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RasterGrid {
    pub ncols: usize,
    pub nrows: usize,
    pub xll: f64,
    pub yll: f64,
    pub cellsize: f64,
    pub nodata: f64,
    pub values: Vec<f64>,
}

impl RasterGrid {
    pub fn new(
        ncols: usize,
        nrows: usize,
        xll: f64,
        yll: f64,
        cellsize: f64,
        nodata: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if ncols == 0 || nrows == 0 {
            return Err(Error::InvalidParameter("raster must have at least one cell".into()));
        }
        if cellsize.is_nan() || cellsize <= 0.0 {
            return Err(Error::InvalidParameter(format!("cellsize {cellsize} must be > 0")));
        }
        if values.len() != ncols * nrows {
            return Err(Error::LengthMismatch {
                expected: ncols * nrows,
                found: values.len(),
            });
        }
        Ok(RasterGrid {
            ncols,
            nrows,
            xll,
            yll,
            cellsize,
            nodata,
            values,
        })
    }

    /// Grid of the same geometry filled with `value`.
    pub fn filled_like(&self, value: f64) -> Self {
        RasterGrid {
            values: vec![value; self.values.len()],
            ..self.clone()
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_nodata(&self, idx: usize) -> bool {
        let v = self.values[idx];
        v.is_nan() || v == self.nodata
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Coord {
        Coord::new(
            self.xll + (col as f64 + 0.5) * self.cellsize,
            self.yll + ((self.nrows - row) as f64 - 0.5) * self.cellsize,
        )
    }

    pub fn center_of(&self, idx: usize) -> Coord {
        self.cell_center(idx / self.ncols, idx % self.ncols)
    }

    /// Index of the cell containing `p`, if inside the grid.
    pub fn locate(&self, p: Coord) -> Option<usize> {
        let col = ((p.x - self.xll) / self.cellsize).floor();
        let row_from_bottom = ((p.y - self.yll) / self.cellsize).floor();
        if col < 0.0 || row_from_bottom < 0.0 {
            return None;
        }
        let (col, rfb) = (col as usize, row_from_bottom as usize);
        if col >= self.ncols || rfb >= self.nrows {
            return None;
        }
        Some((self.nrows - 1 - rfb) * self.ncols + col)
    }

    /// Value at `p`, `None` outside the grid or on nodata.
    pub fn sample(&self, p: Coord) -> Option<f64> {
        self.locate(p).filter(|&i| !self.is_nodata(i)).map(|i| self.values[i])
    }

    /// Row/column ranges whose centres may fall inside `[min, max]`, padded by
    /// one cell. Empty ranges when the box misses the grid.
    fn candidate_ranges(&self, min: Coord, max: Coord) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let cs = self.cellsize;
        let clamp = |v: f64, hi: usize| -> usize { v.max(0.0).min(hi as f64) as usize };
        let c0 = ((min.x - self.xll) / cs - 0.5).floor() - 1.0;
        let c1 = ((max.x - self.xll) / cs - 0.5).ceil() + 2.0;
        let r0 = (self.nrows as f64 - 0.5 - (max.y - self.yll) / cs).floor() - 1.0;
        let r1 = (self.nrows as f64 - 0.5 - (min.y - self.yll) / cs).ceil() + 2.0;
        if !(c0.is_finite() && c1.is_finite() && r0.is_finite() && r1.is_finite()) {
            return (0..0, 0..0);
        }
        (
            clamp(r0, self.nrows)..clamp(r1, self.nrows),
            clamp(c0, self.ncols)..clamp(c1, self.ncols),
        )
    }

    /// Cells whose centre lies inside `region`, in row-major order.
    pub fn cells_in(&self, region: &AdminRegion) -> Vec<usize> {
        let bb = region.geometry.bbox();
        let (rows, cols) =
            self.candidate_ranges(Coord::new(bb.min_x, bb.min_y), Coord::new(bb.max_x, bb.max_y));
        let mut out = Vec::new();
        for r in rows {
            for c in cols.clone() {
                let p = self.cell_center(r, c);
                if bb.contains(p) && region.geometry.contains(p) {
                    out.push(r * self.ncols + c);
                }
            }
        }
        out
    }
}

/// Per-region owned cells after first-claim tie resolution.
#[derive(Debug, Clone)]
pub struct CellAssignment {
    pub cells: Vec<Vec<usize>>,
    pub ties: usize,
}

/// Assign grid cells to regions by centre containment.
pub fn assign_cells(grid: &RasterGrid, regions: &[AdminRegion]) -> CellAssignment {
    let mut cells = par::map_slice(regions, |r| grid.cells_in(r));
    let mut claimed = vec![0u64; grid.len().div_ceil(64)];
    let mut ties = 0;
    for list in cells.iter_mut() {
        list.retain(|&i| {
            let (word, bit) = (i / 64, 1u64 << (i % 64));
            if claimed[word] & bit != 0 {
                ties += 1;
                false
            } else {
                claimed[word] |= bit;
                true
            }
        });
    }
    if ties > 0 {
        log::warn!("{ties} raster cells claimed by more than one region; first region kept");
    }
    CellAssignment { cells, ties }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZonalValue {
    pub adm_id: i64,
    /// Mean over valid cells; `None` when no valid cell falls in the region.
    pub mean: Option<f64>,
    pub sum: f64,
    /// Valid (non-nodata) cells in the footprint.
    pub cell_count: usize,
    pub nodata_count: usize,
}

pub fn zonal_mean(raster: &RasterGrid, regions: &[AdminRegion]) -> Vec<ZonalValue> {
    let assignment = assign_cells(raster, regions);
    zonal_from_assignment(raster, regions, &assignment)
}

pub fn zonal_from_assignment(
    raster: &RasterGrid,
    regions: &[AdminRegion],
    assignment: &CellAssignment,
) -> Vec<ZonalValue> {
    let out: Vec<ZonalValue> = par::map_range(regions.len(), |k| {
        let (mut sum, mut valid, mut nodata) = (0.0, 0, 0);
        for &i in &assignment.cells[k] {
            if raster.is_nodata(i) {
                nodata += 1;
            } else {
                sum += raster.values[i];
                valid += 1;
            }
        }
        ZonalValue {
            adm_id: regions[k].adm_id,
            mean: (valid > 0).then(|| sum / valid as f64),
            sum,
            cell_count: valid,
            nodata_count: nodata,
        }
    });
    let outside = out
        .iter()
        .filter(|z| z.cell_count == 0 && z.nodata_count == 0)
        .count();
    if outside > 0 {
        log::warn!("{outside} regions have no raster cell centre inside them");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassArea {
    pub code: i64,
    pub cell_count: usize,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AreaTabulation {
    pub adm_id: i64,
    /// Non-nodata cells in the footprint.
    pub covered: usize,
    pub nodata_count: usize,
    /// Covered cells whose code is not among the requested classes.
    pub other_count: usize,
    pub classes: Vec<ClassArea>,
}

impl AreaTabulation {
    pub fn class(&self, code: i64) -> Option<&ClassArea> {
        self.classes.iter().find(|c| c.code == code)
    }
}

fn class_code(v: f64) -> Option<i64> {
    (v.fract() == 0.0 && v.is_finite()).then_some(v as i64)
}

pub fn tabulate_area(classraster: &RasterGrid, regions: &[AdminRegion], classes: &[i64]) -> Vec<AreaTabulation> {
    let assignment = assign_cells(classraster, regions);
    par::map_range(regions.len(), |k| {
        let mut counts = vec![0usize; classes.len()];
        let (mut covered, mut nodata, mut other) = (0, 0, 0);
        for &i in &assignment.cells[k] {
            if classraster.is_nodata(i) {
                nodata += 1;
                continue;
            }
            covered += 1;
            match class_code(classraster.values[i]).and_then(|c| classes.iter().position(|&x| x == c)) {
                Some(j) => counts[j] += 1,
                None => other += 1,
            }
        }
        AreaTabulation {
            adm_id: regions[k].adm_id,
            covered,
            nodata_count: nodata,
            other_count: other,
            classes: classes
                .iter()
                .zip(counts)
                .map(|(&code, n)| ClassArea {
                    code,
                    cell_count: n,
                    fraction: if covered > 0 { n as f64 / covered as f64 } else { 0.0 },
                })
                .collect(),
        }
    })
}

/// Population summed per region and land-cover class: each population cell is
/// classified by the class raster value at its centre.
pub fn population_by_class(
    pop: &RasterGrid,
    classraster: &RasterGrid,
    regions: &[AdminRegion],
    classes: &[i64],
) -> Vec<Vec<f64>> {
    let assignment = assign_cells(pop, regions);
    par::map_range(regions.len(), |k| {
        let mut sums = vec![0.0; classes.len()];
        for &i in &assignment.cells[k] {
            if pop.is_nodata(i) {
                continue;
            }
            let code = classraster.sample(pop.center_of(i)).and_then(class_code);
            if let Some(j) = code.and_then(|c| classes.iter().position(|&x| x == c)) {
                sums[j] += pop.values[i];
            }
        }
        sums
    })
}

/// Kilometres per degree of latitude used for buffer scaling.
pub const KM_PER_DEG_LAT: f64 = 110.574;
/// Kilometres per degree of longitude at the equator.
pub const KM_PER_DEG_LON_EQ: f64 = 111.320;

/// A water geometry projected to local kilometres around its centroid.
struct LocalShape {
    kx: f64,
    ky: f64,
    shape: Shape,
    segments: Vec<[Coord; 2]>,
    points: Vec<Coord>,
}

impl LocalShape {
    fn new(shape: &Shape) -> Result<Self> {
        let lat = shape.centroid().y;
        let cos = lat.to_radians().cos();
        if cos <= 0.01 {
            return Err(Error::PolarDegenerate { lat });
        }
        let (kx, ky) = (KM_PER_DEG_LON_EQ * cos, KM_PER_DEG_LAT);
        let to_km = |p: &Coord| Coord::new(p.x * kx, p.y * ky);
        let mut segments = Vec::new();
        let mut points = Vec::new();
        match shape {
            Shape::Points(pts) => points.extend(pts.iter().map(to_km)),
            Shape::Lines(lines) => {
                for l in lines {
                    if l.len() == 1 {
                        points.push(to_km(&l[0]));
                    }
                    segments.extend(l.windows(2).map(|w| [to_km(&w[0]), to_km(&w[1])]));
                }
            }
            Shape::Polygons(mp) => {
                segments.extend(mp.segments().iter().map(|s| [to_km(&s[0]), to_km(&s[1])]))
            }
        }
        Ok(LocalShape {
            kx,
            ky,
            shape: shape.clone(),
            segments,
            points,
        })
    }

    fn within(&self, p: Coord, km: f64) -> bool {
        if let Shape::Polygons(mp) = &self.shape {
            if mp.contains(p) {
                return true;
            }
        }
        let q = Coord::new(p.x * self.kx, p.y * self.ky);
        self.points
            .iter()
            .any(|a| ((q.x - a.x).powi(2) + (q.y - a.y).powi(2)).sqrt() <= km)
            || self
                .segments
                .iter()
                .any(|s| point_segment_distance(q, s[0], s[1]) <= km)
    }
}

/// Cells of `grid` whose centre lies within `buffer_km` of any water shape.
pub fn water_buffer_mask(grid: &RasterGrid, water: &[Shape], buffer_km: f64) -> Result<Vec<bool>> {
    if buffer_km.is_nan() || buffer_km < 0.0 {
        return Err(Error::InvalidParameter(format!("buffer_km {buffer_km} must be >= 0")));
    }
    let mut mask = vec![false; grid.len()];
    if water.is_empty() {
        log::warn!("empty water set; population near water is zero everywhere");
        return Ok(mask);
    }
    let shapes = water.iter().map(LocalShape::new).collect::<Result<Vec<_>>>()?;
    let hits = par::map_slice(&shapes, |s| {
        let bb = s.shape.bbox().expand(buffer_km / s.kx, buffer_km / s.ky);
        let (rows, cols) =
            grid.candidate_ranges(Coord::new(bb.min_x, bb.min_y), Coord::new(bb.max_x, bb.max_y));
        let mut out = Vec::new();
        for r in rows {
            for c in cols.clone() {
                if s.within(grid.cell_center(r, c), buffer_km) {
                    out.push(r * grid.ncols + c);
                }
            }
        }
        out
    });
    for i in hits.into_iter().flatten() {
        mask[i] = true;
    }
    Ok(mask)
}

/// Population inside the mask, zero outside; nodata cells stay nodata.
pub fn mask_population(pop: &RasterGrid, mask: &[bool]) -> RasterGrid {
    let mut out = pop.clone();
    for (i, v) in out.values.iter_mut().enumerate() {
        if !mask[i] && !pop.is_nodata(i) {
            *v = 0.0;
        }
    }
    out
}

/// Population within `buffer_km` of water, summed per region.
pub fn population_near_water(
    pop: &RasterGrid,
    water: &[Shape],
    buffer_km: f64,
    regions: &[AdminRegion],
) -> Result<Vec<(i64, f64)>> {
    let mask = water_buffer_mask(pop, water, buffer_km)?;
    let masked = mask_population(pop, &mask);
    Ok(zonal_mean(&masked, regions)
        .into_iter()
        .map(|z| (z.adm_id, z.sum))
        .collect())
}
