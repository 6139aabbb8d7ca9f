//! Contiguity spatial weights and spatial lags.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{collinear_overlap, segment_distance, BBox, Coord};
use crate::ingest::AdminRegion;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContiguityKind {
    /// Neighbours share at least one boundary point.
    #[default]
    Queen,
    /// Neighbours share a boundary stretch of positive length.
    Rook,
}

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Sparse weights: `weights[i][k]` belongs to the pair `(i, neighbors[i][k])`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialWeights {
    pub n: usize,
    pub neighbors: Vec<Vec<usize>>,
    pub weights: Vec<Vec<f64>>,
    pub standardized: bool,
    pub islands: Vec<usize>,
}

impl SpatialWeights {
    /// Binary weights from neighbour lists. Lists are sorted; self-links and
    /// asymmetric links are rejected.
    pub fn from_neighbors(mut neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = neighbors.len();
        for (i, list) in neighbors.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.iter().any(|&j| j == i || j >= n) {
                return Err(Error::InvalidParameter(format!(
                    "region {i}: neighbour list contains itself or an out-of-range index"
                )));
            }
        }
        for (i, list) in neighbors.iter().enumerate() {
            for &j in list {
                if neighbors[j].binary_search(&i).is_err() {
                    return Err(Error::InvalidParameter(format!(
                        "neighbour relation {i} -> {j} is not symmetric"
                    )));
                }
            }
        }
        let weights = neighbors.iter().map(|l| vec![1.0; l.len()]).collect();
        let islands = (0..n).filter(|&i| neighbors[i].is_empty()).collect();
        Ok(SpatialWeights {
            n,
            neighbors,
            weights,
            standardized: false,
            islands,
        })
    }

    /// Divide every non-empty row by its sum.
    pub fn row_standardize(&mut self) {
        for row in &mut self.weights {
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|w| *w /= s);
            }
        }
        self.standardized = true;
    }

    pub fn is_island(&self, i: usize) -> bool {
        self.neighbors[i].is_empty()
    }

    /// Sum of all weights.
    pub fn s0(&self) -> f64 {
        self.weights.iter().flatten().sum()
    }

    pub fn n_links(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum()
    }

    /// Edge list `i,j,weight` plus island list `i`.
    pub fn write_csv(&self, edges: impl AsRef<Path>, islands: impl AsRef<Path>) -> Result<()> {
        let (edges, islands) = (edges.as_ref(), islands.as_ref());
        let open = |p: &Path| -> Result<csv::Writer<BufWriter<File>>> {
            let f = File::create(p).map_err(|e| Error::io(p, e))?;
            Ok(csv::Writer::from_writer(BufWriter::new(f)))
        };
        let mut w = open(edges)?;
        w.write_record(["i", "j", "weight"])?;
        for i in 0..self.n {
            for (j, wt) in self.neighbors[i].iter().zip(&self.weights[i]) {
                w.write_record([i.to_string(), j.to_string(), wt.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io(edges, e))?;
        let mut w = open(islands)?;
        w.write_record(["i"])?;
        for i in &self.islands {
            w.write_record([i.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(islands, e))
    }

    pub fn read_csv(edges: impl AsRef<Path>, islands: impl AsRef<Path>, n: usize) -> Result<Self> {
        let edges = edges.as_ref();
        let ctx = edges.display().to_string();
        let mut rdr = csv::Reader::from_path(edges).map_err(|e| Error::parse(&ctx, e.to_string()))?;
        let mut neighbors = vec![Vec::new(); n];
        let mut weights = vec![Vec::new(); n];
        for (line, row) in rdr.records().enumerate() {
            let row = row?;
            let bad = || Error::parse(&ctx, format!("line {}: malformed edge", line + 2));
            let i: usize = row.get(0).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let j: usize = row.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            let w: f64 = row.get(2).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
            if i >= n || j >= n || i == j {
                return Err(bad());
            }
            neighbors[i].push(j);
            weights[i].push(w);
        }
        let mut sw = SpatialWeights::from_neighbors(neighbors.clone())?;
        // restore the stored order and weights
        sw.neighbors = neighbors;
        sw.weights = weights;
        sw.standardized = sw
            .weights
            .iter()
            .filter(|r| !r.is_empty())
            .all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        let islands_path = islands.as_ref();
        let mut rdr = csv::Reader::from_path(islands_path)
            .map_err(|e| Error::parse(islands_path.display().to_string(), e.to_string()))?;
        let mut listed = Vec::new();
        for row in rdr.records() {
            let row = row?;
            listed.push(row.get(0).and_then(|s| s.parse::<usize>().ok()).ok_or_else(|| {
                Error::parse(islands_path.display().to_string(), "malformed island row")
            })?);
        }
        if listed != sw.islands {
            return Err(Error::parse(
                islands_path.display().to_string(),
                "island list does not match the edge list",
            ));
        }
        Ok(sw)
    }
}

struct RegionEdges {
    bbox: BBox,
    segments: Vec<[Coord; 2]>,
}

fn seg_bbox(s: &[Coord; 2]) -> BBox {
    BBox::of_points(s.iter())
}

fn touches(a: &RegionEdges, b: &RegionEdges, kind: ContiguityKind, tol: f64) -> bool {
    let a_box = a.bbox.expand(tol, tol);
    let b_box = b.bbox.expand(tol, tol);
    if !a_box.intersects(&b_box) {
        return false;
    }
    let near_b: Vec<&[Coord; 2]> = a
        .segments
        .iter()
        .filter(|s| seg_bbox(s).intersects(&b_box))
        .collect();
    let near_a: Vec<&[Coord; 2]> = b
        .segments
        .iter()
        .filter(|s| seg_bbox(s).intersects(&a_box))
        .collect();
    near_b.iter().any(|sa| {
        near_a.iter().any(|sb| match kind {
            ContiguityKind::Queen => segment_distance(**sa, **sb) <= tol,
            ContiguityKind::Rook => collinear_overlap(**sa, **sb, tol) > tol,
        })
    })
}

/// Regular bins over the union of bounding boxes; returns candidate pairs
/// `(i, j)` with `i < j` whose padded boxes share a bin.
fn candidate_pairs(boxes: &[BBox]) -> Vec<Vec<usize>> {
    let n = boxes.len();
    let extent = boxes.iter().fold(BBox::empty(), |acc, b| acc.union(b));
    let side = (n as f64).sqrt().ceil().max(1.0) as usize;
    let bw = ((extent.max_x - extent.min_x) / side as f64).max(f64::MIN_POSITIVE);
    let bh = ((extent.max_y - extent.min_y) / side as f64).max(f64::MIN_POSITIVE);
    let bin = |v: f64, lo: f64, w: f64| (((v - lo) / w).floor().max(0.0) as usize).min(side - 1);
    let spans: Vec<(usize, usize, usize, usize)> = boxes
        .iter()
        .map(|b| {
            (
                bin(b.min_x, extent.min_x, bw),
                bin(b.max_x, extent.min_x, bw),
                bin(b.min_y, extent.min_y, bh),
                bin(b.max_y, extent.min_y, bh),
            )
        })
        .collect();
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); side * side];
    for (i, &(x0, x1, y0, y1)) in spans.iter().enumerate() {
        for by in y0..=y1 {
            for bx in x0..=x1 {
                bins[by * side + bx].push(i);
            }
        }
    }
    par::map_range(n, |i| {
        let (x0, x1, y0, y1) = spans[i];
        let mut cand = Vec::new();
        for by in y0..=y1 {
            for bx in x0..=x1 {
                cand.extend(bins[by * side + bx].iter().copied().filter(|&j| j > i));
            }
        }
        cand.sort_unstable();
        cand.dedup();
        cand.retain(|&j| boxes[i].intersects(&boxes[j]));
        cand
    })
}

/// Row-standardized contiguity weights for `regions`.
pub fn build_contiguity_weights(
    regions: &[AdminRegion],
    kind: ContiguityKind,
    tolerance: f64,
) -> Result<SpatialWeights> {
    if regions.is_empty() {
        return Err(Error::EmptyInput("region list"));
    }
    if tolerance.is_nan() || tolerance < 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance {tolerance} must be >= 0")));
    }
    let edges: Vec<RegionEdges> = par::map_slice(regions, |r| RegionEdges {
        bbox: r.geometry.bbox(),
        segments: r.geometry.segments(),
    });
    let padded: Vec<BBox> = edges.iter().map(|e| e.bbox.expand(tolerance, tolerance)).collect();
    let candidates = candidate_pairs(&padded);
    let upper: Vec<Vec<usize>> = par::map_range(regions.len(), |i| {
        candidates[i]
            .iter()
            .copied()
            .filter(|&j| touches(&edges[i], &edges[j], kind, tolerance))
            .collect()
    });
    let mut neighbors = vec![Vec::new(); regions.len()];
    for (i, js) in upper.into_iter().enumerate() {
        for j in js {
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
    }
    let mut w = SpatialWeights::from_neighbors(neighbors)?;
    w.row_standardize();
    if w.islands.len() == w.n && w.n > 1 {
        log::warn!("no two regions are contiguous; every region is an island");
    } else if !w.islands.is_empty() {
        log::warn!("{} island regions without contiguous neighbours", w.islands.len());
    }
    Ok(w)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialLag {
    pub values: Vec<f64>,
    /// True where the region has no neighbours (lag forced to 0).
    pub island: Vec<bool>,
}

/// `lag_i = Σ_j w_ij x_j` over row-standardized weights.
pub fn spatial_lag(w: &SpatialWeights, x: &[f64]) -> Result<SpatialLag> {
    if x.len() != w.n {
        return Err(Error::LengthMismatch {
            expected: w.n,
            found: x.len(),
        });
    }
    if !w.standardized {
        return Err(Error::InvalidParameter("spatial_lag needs row-standardized weights".into()));
    }
    let values = (0..w.n)
        .map(|i| {
            w.neighbors[i]
                .iter()
                .zip(&w.weights[i])
                .map(|(&j, &wt)| wt * x[j])
                .sum()
        })
        .collect();
    Ok(SpatialLag {
        values,
        island: (0..w.n).map(|i| w.is_island(i)).collect(),
    })
}
