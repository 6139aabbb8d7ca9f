//! Planar geometry on lon/lat coordinates.
//!
//! Only what the district analyses need: polygons with holes, point-in-polygon
//! (crossing number, half-open edge rule), areas, centroids, bounding boxes and
//! segment distance predicates for contiguity tests.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub const fn new(x: f64, y: f64) -> Self {
        Coord { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub fn empty() -> Self {
        BBox {
            min_x: f64::INFINITY,
            min_y: f64::INFINITY,
            max_x: f64::NEG_INFINITY,
            max_y: f64::NEG_INFINITY,
        }
    }

    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a Coord>) -> Self {
        let mut b = BBox::empty();
        for p in pts {
            b.include(*p);
        }
        b
    }

    pub fn include(&mut self, p: Coord) {
        self.min_x = self.min_x.min(p.x);
        self.min_y = self.min_y.min(p.y);
        self.max_x = self.max_x.max(p.x);
        self.max_y = self.max_y.max(p.y);
    }

    pub fn union(&self, other: &BBox) -> BBox {
        BBox {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }

    pub fn expand(&self, dx: f64, dy: f64) -> BBox {
        BBox {
            min_x: self.min_x - dx,
            min_y: self.min_y - dy,
            max_x: self.max_x + dx,
            max_y: self.max_y + dy,
        }
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.min_x <= other.max_x
            && other.min_x <= self.max_x
            && self.min_y <= other.max_y
            && other.min_y <= self.max_y
    }

    pub fn contains(&self, p: Coord) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    pub fn is_empty(&self) -> bool {
        self.min_x > self.max_x || self.min_y > self.max_y
    }
}

/// A polygon with one exterior ring and zero or more holes. Rings are stored
/// closed (first coordinate repeated at the end).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub exterior: Vec<Coord>,
    pub holes: Vec<Vec<Coord>>,
}

impl Polygon {
    pub fn new(exterior: Vec<Coord>, holes: Vec<Vec<Coord>>) -> Self {
        Polygon { exterior, holes }
    }

    /// Axis-aligned rectangle, closed counter-clockwise.
    pub fn rect(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Polygon::new(
            vec![
                Coord::new(min_x, min_y),
                Coord::new(max_x, min_y),
                Coord::new(max_x, max_y),
                Coord::new(min_x, max_y),
                Coord::new(min_x, min_y),
            ],
            Vec::new(),
        )
    }

    pub fn rings(&self) -> impl Iterator<Item = &Vec<Coord>> {
        std::iter::once(&self.exterior).chain(self.holes.iter())
    }

    pub fn area(&self) -> f64 {
        ring_signed_area(&self.exterior).abs()
            - self
                .holes
                .iter()
                .map(|h| ring_signed_area(h).abs())
                .sum::<f64>()
    }

    pub fn contains(&self, p: Coord) -> bool {
        point_in_ring(p, &self.exterior) && !self.holes.iter().any(|h| point_in_ring(p, h))
    }

    pub fn bbox(&self) -> BBox {
        BBox::of_points(&self.exterior)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiPolygon(pub Vec<Polygon>);

impl MultiPolygon {
    pub fn parts(&self) -> &[Polygon] {
        &self.0
    }

    pub fn area(&self) -> f64 {
        self.0.iter().map(Polygon::area).sum()
    }

    pub fn contains(&self, p: Coord) -> bool {
        self.0.iter().any(|poly| poly.contains(p))
    }

    pub fn bbox(&self) -> BBox {
        self.0
            .iter()
            .fold(BBox::empty(), |acc, poly| acc.union(&poly.bbox()))
    }

    /// Area-weighted centroid. Falls back to the mean vertex for degenerate
    /// (zero-area) input.
    pub fn centroid(&self) -> Coord {
        let (mut cx, mut cy, mut total) = (0.0, 0.0, 0.0);
        for poly in &self.0 {
            for (k, ring) in poly.rings().enumerate() {
                let (a, x, y) = ring_moments(ring);
                // holes subtract regardless of their orientation
                let sign = if k == 0 { a.signum() } else { -a.signum() };
                cx += sign * x;
                cy += sign * y;
                total += sign * a;
            }
        }
        if total.abs() > 0.0 {
            Coord::new(cx / (3.0 * total), cy / (3.0 * total))
        } else {
            let pts: Vec<&Coord> = self.0.iter().flat_map(|p| p.exterior.iter()).collect();
            let n = pts.len().max(1) as f64;
            Coord::new(
                pts.iter().map(|p| p.x).sum::<f64>() / n,
                pts.iter().map(|p| p.y).sum::<f64>() / n,
            )
        }
    }

    /// Every boundary segment of every ring.
    pub fn segments(&self) -> Vec<[Coord; 2]> {
        let mut out = Vec::new();
        for poly in &self.0 {
            for ring in poly.rings() {
                out.extend(ring.windows(2).map(|w| [w[0], w[1]]));
            }
        }
        out
    }
}

/// Shoelace signed area of a closed ring; positive for counter-clockwise.
pub fn ring_signed_area(ring: &[Coord]) -> f64 {
    ring.windows(2)
        .map(|w| w[0].x * w[1].y - w[1].x * w[0].y)
        .sum::<f64>()
        / 2.0
}

// Signed area and the two first moments (each halved) of a closed ring.
fn ring_moments(ring: &[Coord]) -> (f64, f64, f64) {
    let (mut a, mut x, mut y) = (0.0, 0.0, 0.0);
    for w in ring.windows(2) {
        let cross = w[0].x * w[1].y - w[1].x * w[0].y;
        a += cross;
        x += (w[0].x + w[1].x) * cross;
        y += (w[0].y + w[1].y) * cross;
    }
    (a / 2.0, x / 2.0, y / 2.0)
}

/// Crossing-number test. Edges are half-open in y, so a point on an edge
/// shared by two adjacent polygons belongs to exactly one of them.
pub fn point_in_ring(p: Coord, ring: &[Coord]) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

fn dot(a: Coord, b: Coord) -> f64 {
    a.x * b.x + a.y * b.y
}

fn sub(a: Coord, b: Coord) -> Coord {
    Coord::new(a.x - b.x, a.y - b.y)
}

fn cross(a: Coord, b: Coord) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Euclidean distance from `p` to segment `[a, b]`.
pub fn point_segment_distance(p: Coord, a: Coord, b: Coord) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let t = if len2 > 0.0 {
        (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = Coord::new(a.x + t * ab.x, a.y + t * ab.y);
    let d = sub(p, q);
    dot(d, d).sqrt()
}

fn segments_cross(a0: Coord, a1: Coord, b0: Coord, b1: Coord) -> bool {
    let d1 = cross(sub(a1, a0), sub(b0, a0));
    let d2 = cross(sub(a1, a0), sub(b1, a0));
    let d3 = cross(sub(b1, b0), sub(a0, b0));
    let d4 = cross(sub(b1, b0), sub(a1, b0));
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Minimum distance between two segments; zero when they properly cross.
pub fn segment_distance(a: [Coord; 2], b: [Coord; 2]) -> f64 {
    if segments_cross(a[0], a[1], b[0], b[1]) {
        return 0.0;
    }
    point_segment_distance(a[0], b[0], b[1])
        .min(point_segment_distance(a[1], b[0], b[1]))
        .min(point_segment_distance(b[0], a[0], a[1]))
        .min(point_segment_distance(b[1], a[0], a[1]))
}

/// Length of the shared stretch of two segments that lie on a common line
/// (within `tol`); zero when they are not collinear or only touch.
pub fn collinear_overlap(a: [Coord; 2], b: [Coord; 2], tol: f64) -> f64 {
    let dir = sub(a[1], a[0]);
    let len = dot(dir, dir).sqrt();
    if len == 0.0 {
        return 0.0;
    }
    let on_a = |p: Coord| (cross(dir, sub(p, a[0])) / len).abs() <= tol;
    if !(on_a(b[0]) && on_a(b[1])) {
        return 0.0;
    }
    let bdir = sub(b[1], b[0]);
    let blen = dot(bdir, bdir).sqrt();
    if blen == 0.0 {
        return 0.0;
    }
    let on_b = |p: Coord| (cross(bdir, sub(p, b[0])) / blen).abs() <= tol;
    if !(on_b(a[0]) && on_b(a[1])) {
        return 0.0;
    }
    let t0 = dot(sub(b[0], a[0]), dir) / len;
    let t1 = dot(sub(b[1], a[0]), dir) / len;
    let (lo, hi) = (t0.min(t1), t0.max(t1));
    (hi.min(len) - lo.max(0.0)).max(0.0)
}

/// Great-circle distance in kilometres.
pub fn haversine_km(a: Coord, b: Coord) -> f64 {
    const R: f64 = 6371.0088;
    let (lat1, lat2) = (a.y.to_radians(), b.y.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.x - a.x).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * R * h.sqrt().asin()
}


/// Any vector geometry accepted as a water body.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Points(Vec<Coord>),
    Lines(Vec<Vec<Coord>>),
    Polygons(MultiPolygon),
}

impl Shape {
    pub fn bbox(&self) -> BBox {
        match self {
            Shape::Points(pts) => BBox::of_points(pts),
            Shape::Lines(lines) => BBox::of_points(lines.iter().flatten()),
            Shape::Polygons(mp) => mp.bbox(),
        }
    }

    /// Vertex centroid of points/lines, area centroid of polygons.
    pub fn centroid(&self) -> Coord {
        let mean = |pts: Vec<&Coord>| {
            let n = pts.len().max(1) as f64;
            Coord::new(
                pts.iter().map(|p| p.x).sum::<f64>() / n,
                pts.iter().map(|p| p.y).sum::<f64>() / n,
            )
        };
        match self {
            Shape::Points(pts) => mean(pts.iter().collect()),
            Shape::Lines(lines) => mean(lines.iter().flatten().collect()),
            Shape::Polygons(mp) => mp.centroid(),
        }
    }
}
