//! Brute-force oracles and fixture builders shared by the integration tests.
//! Nothing here calls the library code it is used to check.
#![allow(dead_code)]

use outbreak_core::geometry::{Coord, MultiPolygon, Polygon, Shape};
use outbreak_core::ingest::{AdminRegion, RasterGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn region(adm_id: i64, exterior: Vec<Coord>) -> AdminRegion {
    AdminRegion {
        adm_id,
        name: format!("r{adm_id}"),
        province: "p".into(),
        country: "c".into(),
        geometry: MultiPolygon(vec![Polygon::new(exterior, Vec::new())]),
    }
}

pub fn rect_region(adm_id: i64, x0: f64, y0: f64, x1: f64, y1: f64) -> AdminRegion {
    AdminRegion {
        geometry: MultiPolygon(vec![Polygon::rect(x0, y0, x1, y1)]),
        ..region(adm_id, Vec::new())
    }
}

/// `nx * ny` quadrilaterals over a lattice whose interior vertices are
/// shifted by up to `jitter` (in cell units). Neighbouring cells share
/// vertices exactly, so the adjacency is that of the regular lattice.
/// Region `k` sits at column `k % nx`, row `k / nx`.
pub fn jittered_lattice(nx: usize, ny: usize, jitter: f64, rng: &mut impl Rng) -> Vec<AdminRegion> {
    let mut v = vec![vec![Coord::new(0.0, 0.0); nx + 1]; ny + 1];
    for (j, row) in v.iter_mut().enumerate() {
        for (i, p) in row.iter_mut().enumerate() {
            let inner = i > 0 && i < nx && j > 0 && j < ny;
            let (dx, dy) = if inner {
                (rng.random_range(-jitter..=jitter), rng.random_range(-jitter..=jitter))
            } else {
                (0.0, 0.0)
            };
            *p = Coord::new(i as f64 + dx, j as f64 + dy);
        }
    }
    (0..nx * ny)
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let ring = vec![v[j][i], v[j][i + 1], v[j + 1][i + 1], v[j + 1][i], v[j][i]];
            region(k as i64, ring)
        })
        .collect()
}

/// Dense row-standardized lattice weights from index arithmetic alone.
pub fn lattice_weights(nx: usize, ny: usize, rook: bool) -> Vec<Vec<f64>> {
    let n = nx * ny;
    let mut w = vec![vec![0.0; n]; n];
    for k in 0..n {
        let (i, j) = ((k % nx) as i64, (k / nx) as i64);
        let mut nb = Vec::new();
        for dj in -1i64..=1 {
            for di in -1i64..=1 {
                if (di, dj) == (0, 0) || (rook && di != 0 && dj != 0) {
                    continue;
                }
                let (a, b) = (i + di, j + dj);
                if a >= 0 && b >= 0 && a < nx as i64 && b < ny as i64 {
                    nb.push((b as usize) * nx + a as usize);
                }
            }
        }
        for &m in &nb {
            w[k][m] = 1.0 / nb.len() as f64;
        }
    }
    w
}

/// Global Moran's I by the textbook double sum over a dense matrix.
pub fn moran_oracle(x: &[f64], w: &[Vec<f64>]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let z: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let (mut num, mut s0) = (0.0, 0.0);
    for i in 0..x.len() {
        for j in 0..x.len() {
            num += w[i][j] * z[i] * z[j];
            s0 += w[i][j];
        }
    }
    let den: f64 = z.iter().map(|v| v * v).sum();
    n / s0 * num / den
}

/// Local Moran values by the dense double sum.
pub fn local_moran_oracle(x: &[f64], w: &[Vec<f64>]) -> Vec<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let z: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let m2 = z.iter().map(|v| v * v).sum::<f64>() / n;
    (0..x.len())
        .map(|i| z[i] / m2 * (0..x.len()).map(|j| w[i][j] * z[j]).sum::<f64>())
        .collect()
}

/// Winding-number containment; independent of the library's crossing test.
pub fn winding_contains(ring: &[Coord], p: Coord) -> bool {
    let mut wn = 0i32;
    for s in ring.windows(2) {
        let (a, b) = (s[0], s[1]);
        let cross = (b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y);
        if a.y <= p.y {
            if b.y > p.y && cross > 0.0 {
                wn += 1;
            }
        } else if b.y <= p.y && cross < 0.0 {
            wn -= 1;
        }
    }
    wn != 0
}

pub fn region_contains(r: &AdminRegion, p: Coord) -> bool {
    r.geometry.parts().iter().any(|poly| {
        winding_contains(&poly.exterior, p) && !poly.holes.iter().any(|h| winding_contains(h, p))
    })
}

pub fn cell_centre(g: &RasterGrid, idx: usize) -> Coord {
    let (row, col) = (idx / g.ncols, idx % g.ncols);
    Coord::new(
        g.xll + (col as f64 + 0.5) * g.cellsize,
        g.yll + (g.nrows - row) as f64 * g.cellsize - 0.5 * g.cellsize,
    )
}

/// Owning region per cell: the first region containing the cell centre.
pub fn owner_oracle(g: &RasterGrid, regions: &[AdminRegion]) -> Vec<Option<usize>> {
    (0..g.ncols * g.nrows)
        .map(|i| {
            let p = cell_centre(g, i);
            regions.iter().position(|r| region_contains(r, p))
        })
        .collect()
}

pub fn is_nodata(g: &RasterGrid, i: usize) -> bool {
    g.values[i].is_nan() || g.values[i] == g.nodata
}

/// `(sum, valid cells, nodata cells)` per region, cells visited in row-major order.
pub fn zonal_oracle(g: &RasterGrid, regions: &[AdminRegion]) -> Vec<(f64, usize, usize)> {
    let owner = owner_oracle(g, regions);
    let mut out = vec![(0.0, 0, 0); regions.len()];
    for (i, o) in owner.iter().enumerate() {
        if let Some(k) = *o {
            if is_nodata(g, i) {
                out[k].2 += 1;
            } else {
                out[k].0 += g.values[i];
                out[k].1 += 1;
            }
        }
    }
    out
}

fn dist_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len2 = vx * vx + vy * vy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * vx, a.1 + t * vy);
    (p.0 - cx).hypot(p.1 - cy)
}

/// Distance in km from `p` to `shape`, measured in a flat frame scaled at
/// `lat0` (the shape's reference latitude), 0 inside polygons.
pub fn water_distance_km(shape: &Shape, lat0: f64, p: Coord) -> f64 {
    let kx = 111.320 * lat0.to_radians().cos();
    let ky = 110.574;
    let s = |c: &Coord| (c.x * kx, c.y * ky);
    let q = s(&p);
    match shape {
        Shape::Points(pts) => pts
            .iter()
            .map(|c| dist_to_segment(q, s(c), s(c)))
            .fold(f64::INFINITY, f64::min),
        Shape::Lines(lines) => lines
            .iter()
            .flat_map(|l| l.windows(2).map(|w| dist_to_segment(q, s(&w[0]), s(&w[1]))))
            .fold(f64::INFINITY, f64::min),
        Shape::Polygons(mp) => {
            let inside = mp.parts().iter().any(|poly| {
                winding_contains(&poly.exterior, p) && !poly.holes.iter().any(|h| winding_contains(h, p))
            });
            if inside {
                return 0.0;
            }
            mp.parts()
                .iter()
                .flat_map(|poly| std::iter::once(&poly.exterior).chain(poly.holes.iter()))
                .flat_map(|ring| ring.windows(2).map(|w| dist_to_segment(q, s(&w[0]), s(&w[1]))))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// Reference latitude of the simple shapes built by [`random_water`]: the
/// vertex mean for points and lines, the rectangle centre for polygons.
pub fn reference_lat(shape: &Shape) -> f64 {
    match shape {
        Shape::Points(p) => p.iter().map(|c| c.y).sum::<f64>() / p.len() as f64,
        Shape::Lines(l) => {
            let v: Vec<f64> = l.iter().flatten().map(|c| c.y).collect();
            v.iter().sum::<f64>() / v.len() as f64
        }
        Shape::Polygons(mp) => {
            let e = &mp.parts()[0].exterior;
            (e[0].y + e[2].y) / 2.0
        }
    }
}

/// Population within `km` of any water shape, summed per owning region.
pub fn near_water_oracle(pop: &RasterGrid, water: &[Shape], km: f64, regions: &[AdminRegion]) -> Vec<f64> {
    let owner = owner_oracle(pop, regions);
    let lats: Vec<f64> = water.iter().map(reference_lat).collect();
    let mut out = vec![0.0; regions.len()];
    for (i, o) in owner.iter().enumerate() {
        let Some(k) = *o else { continue };
        if is_nodata(pop, i) {
            continue;
        }
        let p = cell_centre(pop, i);
        if water.iter().zip(&lats).any(|(s, &lat)| water_distance_km(s, lat, p) <= km) {
            out[k] += pop.values[i];
        }
    }
    out
}

/// A random grid of at most 50 x 50 cells near the equator, with some
/// nodata cells.
pub fn random_grid(rng: &mut impl Rng, classes: Option<&[i64]>) -> RasterGrid {
    let ncols = rng.random_range(5..=50);
    let nrows = rng.random_range(5..=50);
    let cellsize = rng.random_range(0.01..0.1);
    let (xll, yll) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let values = (0..ncols * nrows)
        .map(|_| {
            if rng.random::<f64>() < 0.05 {
                -9999.0
            } else if let Some(c) = classes {
                c[rng.random_range(0..c.len())] as f64
            } else {
                rng.random_range(0..1000) as f64 / 4.0
            }
        })
        .collect();
    RasterGrid::new(ncols, nrows, xll, yll, cellsize, -9999.0, values).unwrap()
}

/// Random triangles and quadrilaterals over the grid extent, overlapping
/// freely and partly off-grid.
pub fn random_regions(rng: &mut impl Rng, g: &RasterGrid) -> Vec<AdminRegion> {
    let (w, h) = (g.ncols as f64 * g.cellsize, g.nrows as f64 * g.cellsize);
    let n = rng.random_range(1..8);
    (0..n)
        .map(|k| {
            let cx = g.xll + rng.random_range(-0.1..1.1) * w;
            let cy = g.yll + rng.random_range(-0.1..1.1) * h;
            let (rx, ry) = (rng.random_range(0.05..0.6) * w, rng.random_range(0.05..0.6) * h);
            let sides = rng.random_range(3..=6);
            let mut ring: Vec<Coord> = (0..sides)
                .map(|s| {
                    let a = std::f64::consts::TAU * (s as f64 + rng.random_range(0.0..0.5)) / sides as f64;
                    Coord::new(cx + rx * a.cos(), cy + ry * a.sin())
                })
                .collect();
            ring.push(ring[0]);
            region(k as i64, ring)
        })
        .collect()
}

/// Points, polylines and rectangles near the grid.
pub fn random_water(rng: &mut impl Rng, g: &RasterGrid) -> Vec<Shape> {
    let (w, h) = (g.ncols as f64 * g.cellsize, g.nrows as f64 * g.cellsize);
    let pt = |rng: &mut dyn rand::RngCore| {
        Coord::new(
            g.xll + rng.random_range(0.0..1.0) * w,
            g.yll + rng.random_range(0.0..1.0) * h,
        )
    };
    let mut out = Vec::new();
    for _ in 0..rng.random_range(1..4) {
        out.push(match rng.random_range(0..3) {
            0 => Shape::Points(vec![pt(rng), pt(rng)]),
            1 => Shape::Lines(vec![vec![pt(rng), pt(rng), pt(rng)]]),
            _ => {
                let a = pt(rng);
                let (dx, dy) = (rng.random_range(0.02..0.2) * w, rng.random_range(0.02..0.2) * h);
                Shape::Polygons(MultiPolygon(vec![Polygon::rect(a.x, a.y, a.x + dx, a.y + dy)]))
            }
        });
    }
    out
}
