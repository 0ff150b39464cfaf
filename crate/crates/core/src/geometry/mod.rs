//! Planar geometry kernel.
//!
//! Everything here works in a local metric frame (meters east/north of a
//! projection origin). Values are immutable once constructed and every
//! operation is a pure function.

mod intersection;
mod projection;

pub use intersection::intersection_area;
pub use projection::{project, unproject, GeoPoint, EARTH_RADIUS_M, LOCAL_RANGE_DEG};

use thiserror::Error;

/// Vertices closer than this are merged.
pub const VERTEX_MERGE_EPS: f64 = 1e-6;
/// Intersection areas below this are reported as zero.
pub const SLIVER_AREA_EPS: f64 = 1e-6;
/// Distance under which a point is treated as lying on a boundary.
pub const BOUNDARY_EPS: f64 = 1e-9;
/// Segment count used when buffering point features.
pub const DEFAULT_CIRCLE_SEGMENTS: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("coordinate ({lat}, {lon}) is outside the local projection range")]
    OutOfLocalRange { lat: f64, lon: f64 },
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &PlanarPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub(crate) fn sub(&self, other: &PlanarPoint) -> PlanarPoint {
        PlanarPoint::new(self.x - other.x, self.y - other.y)
    }

    pub(crate) fn cross(&self, other: &PlanarPoint) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub(crate) fn dot(&self, other: &PlanarPoint) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn translate(&self, dx: f64, dy: f64) -> PlanarPoint {
        PlanarPoint::new(self.x + dx, self.y + dy)
    }

    pub fn scale(&self, k: f64) -> PlanarPoint {
        PlanarPoint::new(self.x * k, self.y * k)
    }
}

/// A simple closed ring. The closing vertex is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring {
    vertices: Vec<PlanarPoint>,
}

impl Ring {
    /// Build a ring, merging near-duplicate consecutive vertices and dropping an
    /// explicit closing vertex. Fails unless the result is a simple ring with at
    /// least three vertices.
    pub fn new(points: Vec<PlanarPoint>) -> Result<Self, GeometryError> {
        if let Some(p) = points.iter().find(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeometryError::InvalidInput(format!(
                "non-finite vertex ({}, {})",
                p.x, p.y
            )));
        }
        let mut vertices: Vec<PlanarPoint> = Vec::with_capacity(points.len());
        for p in points {
            match vertices.last() {
                Some(last) if last.distance(&p) < VERTEX_MERGE_EPS => {}
                _ => vertices.push(p),
            }
        }
        while vertices.len() > 1
            && vertices[0].distance(vertices.last().unwrap()) < VERTEX_MERGE_EPS
        {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidInput(format!(
                "ring needs at least 3 distinct vertices, got {}",
                vertices.len()
            )));
        }
        let ring = Ring { vertices };
        if let Some((i, j)) = ring.first_self_intersection() {
            return Err(GeometryError::InvalidInput(format!(
                "ring is not simple: edges {i} and {j} intersect"
            )));
        }
        Ok(ring)
    }

    pub fn vertices(&self) -> &[PlanarPoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edges as (start, end) pairs, including the closing edge.
    pub fn edges(&self) -> impl Iterator<Item = (PlanarPoint, PlanarPoint)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace area; counter-clockwise rings are positive.
    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn is_ccw(&self) -> bool {
        self.signed_area() > 0.0
    }

    pub fn reversed(&self) -> Ring {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Ring { vertices }
    }

    /// Copy oriented counter-clockwise.
    pub fn to_ccw(&self) -> Ring {
        if self.is_ccw() {
            self.clone()
        } else {
            self.reversed()
        }
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Ring {
        Ring {
            vertices: self.vertices.iter().map(|p| p.translate(dx, dy)).collect(),
        }
    }

    pub fn scale(&self, k: f64) -> Result<Ring, GeometryError> {
        Ring::new(self.vertices.iter().map(|p| p.scale(k)).collect())
    }

    /// Even-odd ray cast, boundary excluded. Callers handle the boundary band.
    pub(crate) fn encloses(&self, q: &PlanarPoint) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > q.y) != (b.y > q.y) {
                let x_at = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if q.x < x_at {
                    inside = !inside;
                }
            }
        }
        inside
    }

    pub(crate) fn boundary_distance(&self, q: &PlanarPoint) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(q, &a, &b))
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn contains_inclusive(&self, q: &PlanarPoint) -> bool {
        self.boundary_distance(q) <= BOUNDARY_EPS || self.encloses(q)
    }

    fn first_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        let v = &self.vertices;
        for i in 0..n {
            let (a, b) = (v[i], v[(i + 1) % n]);
            // Consecutive edges may only share their common vertex: reject spikes.
            let c = v[(i + 2) % n];
            let d1 = b.sub(&a);
            let d2 = c.sub(&b);
            if d1.cross(&d2) == 0.0 && d1.dot(&d2) < 0.0 {
                return Some((i, (i + 1) % n));
            }
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (v[j], v[(j + 1) % n]);
                if segments_intersect(&a, &b, &c, &d) {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

/// A region bounded by an outer ring minus zero or more holes.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaPolygon {
    outer: Ring,
    holes: Vec<Ring>,
    area: f64,
}

impl AreaPolygon {
    pub fn new(outer: Ring, holes: Vec<Ring>) -> Result<Self, GeometryError> {
        let outer_area = outer.signed_area().abs();
        if outer_area <= 0.0 {
            return Err(GeometryError::Degenerate("outer ring has zero area".into()));
        }
        for (i, hole) in holes.iter().enumerate() {
            if hole.signed_area() == 0.0 {
                return Err(GeometryError::Degenerate(format!("hole {i} has zero area")));
            }
            if !ring_within(hole, &outer) {
                return Err(GeometryError::InvariantViolation(format!(
                    "hole {i} is not inside the outer ring"
                )));
            }
        }
        for i in 0..holes.len() {
            for j in (i + 1)..holes.len() {
                if !rings_disjoint(&holes[i], &holes[j]) {
                    return Err(GeometryError::InvariantViolation(format!(
                        "holes {i} and {j} overlap"
                    )));
                }
            }
        }
        let hole_area: f64 = holes.iter().map(|h| h.signed_area().abs()).sum();
        let area = outer_area - hole_area;
        if area <= 0.0 {
            return Err(GeometryError::InvariantViolation(format!(
                "holes ({hole_area}) cover the outer ring ({outer_area})"
            )));
        }
        Ok(Self { outer, holes, area })
    }

    pub fn simple(outer: Ring) -> Result<Self, GeometryError> {
        Self::new(outer, Vec::new())
    }

    /// Convenience constructor from raw coordinate lists.
    pub fn from_coords(
        outer: &[(f64, f64)],
        holes: &[&[(f64, f64)]],
    ) -> Result<Self, GeometryError> {
        let ring = |c: &[(f64, f64)]| Ring::new(c.iter().map(|&(x, y)| PlanarPoint::new(x, y)).collect());
        let holes = holes.iter().map(|h| ring(h)).collect::<Result<_, _>>()?;
        Self::new(ring(outer)?, holes)
    }

    pub fn outer(&self) -> &Ring {
        &self.outer
    }

    pub fn holes(&self) -> &[Ring] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn vertices(&self) -> impl Iterator<Item = &PlanarPoint> {
        self.rings().flat_map(|r| r.vertices().iter())
    }

    pub fn edges(&self) -> impl Iterator<Item = (PlanarPoint, PlanarPoint)> + '_ {
        self.rings().flat_map(|r| r.edges())
    }

    /// Outer area minus hole area; always positive.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Area-weighted centroid of the region (holes subtracted).
    pub fn centroid(&self) -> PlanarPoint {
        let anchor = self.outer.vertices()[0];
        let (oa, oc) = ring_moment(&self.outer, &anchor);
        let (mut sum_a, mut sum_x, mut sum_y) = (oa.abs(), oa.abs() * oc.x, oa.abs() * oc.y);
        for hole in &self.holes {
            let (ha, hc) = ring_moment(hole, &anchor);
            sum_a -= ha.abs();
            sum_x -= ha.abs() * hc.x;
            sum_y -= ha.abs() * hc.y;
        }
        PlanarPoint::new(anchor.x + sum_x / sum_a, anchor.y + sum_y / sum_a)
    }

    /// Inclusive point containment: boundary points are inside, hole interiors
    /// are outside.
    pub fn contains(&self, q: &PlanarPoint) -> bool {
        if self.rings().any(|r| r.boundary_distance(q) <= BOUNDARY_EPS) {
            return true;
        }
        self.outer.encloses(q) && !self.holes.iter().any(|h| h.encloses(q))
    }

    pub fn min_dist_to_vertices(&self, q: &PlanarPoint) -> f64 {
        self.vertices()
            .map(|v| v.distance(q))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance to the nearest edge; zero for contained points.
    pub fn min_dist_to_edges(&self, q: &PlanarPoint) -> f64 {
        if self.contains(q) {
            return 0.0;
        }
        self.rings()
            .map(|r| r.boundary_distance(q))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bbox(&self) -> (PlanarPoint, PlanarPoint) {
        let mut lo = PlanarPoint::new(f64::INFINITY, f64::INFINITY);
        let mut hi = PlanarPoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in self.outer.vertices() {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        (lo, hi)
    }

    pub fn translate(&self, dx: f64, dy: f64) -> AreaPolygon {
        let outer = self.outer.translate(dx, dy);
        let holes: Vec<Ring> = self.holes.iter().map(|h| h.translate(dx, dy)).collect();
        AreaPolygon {
            area: outer.signed_area().abs() - holes.iter().map(|h| h.signed_area().abs()).sum::<f64>(),
            outer,
            holes,
        }
    }

    pub fn scale(&self, k: f64) -> Result<AreaPolygon, GeometryError> {
        let holes = self.holes.iter().map(|h| h.scale(k)).collect::<Result<_, _>>()?;
        AreaPolygon::new(self.outer.scale(k)?, holes)
    }
}

/// Free-function form of [`Ring::signed_area`].
pub fn ring_area(r: &Ring) -> f64 {
    r.signed_area()
}

pub fn polygon_area(p: &AreaPolygon) -> f64 {
    p.area()
}

pub fn centroid(p: &AreaPolygon) -> PlanarPoint {
    p.centroid()
}

pub fn contains(p: &AreaPolygon, q: &PlanarPoint) -> bool {
    p.contains(q)
}

pub fn min_dist_to_vertices(p: &AreaPolygon, q: &PlanarPoint) -> f64 {
    p.min_dist_to_vertices(q)
}

pub fn min_dist_to_edges(p: &AreaPolygon, q: &PlanarPoint) -> f64 {
    p.min_dist_to_edges(q)
}

/// Regular `segments`-gon with every vertex at `radius` from `center`, the
/// first vertex due east.
pub fn buffer_point(
    center: PlanarPoint,
    radius: f64,
    segments: usize,
) -> Result<AreaPolygon, GeometryError> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(GeometryError::InvalidInput(format!(
            "buffer radius must be positive, got {radius}"
        )));
    }
    if segments < 3 {
        return Err(GeometryError::InvalidInput(format!(
            "buffer needs at least 3 segments, got {segments}"
        )));
    }
    let step = std::f64::consts::TAU / segments as f64;
    let vertices = (0..segments)
        .map(|k| {
            let a = step * k as f64;
            PlanarPoint::new(center.x + radius * a.cos(), center.y + radius * a.sin())
        })
        .collect();
    AreaPolygon::simple(Ring::new(vertices)?)
}

pub(crate) fn signed_area(v: &[PlanarPoint]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let anchor = v[0];
    let n = v.len();
    let mut twice = 0.0;
    for i in 0..n {
        let a = v[i].sub(&anchor);
        let b = v[(i + 1) % n].sub(&anchor);
        twice += a.cross(&b);
    }
    twice / 2.0
}

/// Signed area and centroid relative to `anchor`.
fn ring_moment(r: &Ring, anchor: &PlanarPoint) -> (f64, PlanarPoint) {
    let v = r.vertices();
    let n = v.len();
    let (mut twice, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let a = v[i].sub(anchor);
        let b = v[(i + 1) % n].sub(anchor);
        let c = a.cross(&b);
        twice += c;
        cx += (a.x + b.x) * c;
        cy += (a.y + b.y) * c;
    }
    let area = twice / 2.0;
    (area, PlanarPoint::new(cx / (3.0 * twice), cy / (3.0 * twice)))
}

pub(crate) fn point_segment_distance(q: &PlanarPoint, a: &PlanarPoint, b: &PlanarPoint) -> f64 {
    let d = b.sub(a);
    let len2 = d.dot(&d);
    if len2 == 0.0 {
        return q.distance(a);
    }
    let t = (q.sub(a).dot(&d) / len2).clamp(0.0, 1.0);
    q.distance(&PlanarPoint::new(a.x + t * d.x, a.y + t * d.y))
}

fn orient(a: &PlanarPoint, b: &PlanarPoint, c: &PlanarPoint) -> f64 {
    b.sub(a).cross(&c.sub(a))
}

fn on_segment(a: &PlanarPoint, b: &PlanarPoint, p: &PlanarPoint) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test (touching counts).
pub(crate) fn segments_intersect(
    a: &PlanarPoint,
    b: &PlanarPoint,
    c: &PlanarPoint,
    d: &PlanarPoint,
) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Proper crossing only: interiors of both segments intersect at a single point.
fn segments_cross(a: &PlanarPoint, b: &PlanarPoint, c: &PlanarPoint, d: &PlanarPoint) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// `inner` lies inside `outer` (touching allowed).
pub(crate) fn ring_within(inner: &Ring, outer: &Ring) -> bool {
    if !inner.vertices().iter().all(|v| outer.contains_inclusive(v)) {
        return false;
    }
    for (a, b) in inner.edges() {
        for (c, d) in outer.edges() {
            if segments_cross(&a, &b, &c, &d) {
                return false;
            }
        }
    }
    // Edge midpoints guard against a concave outer swallowing vertices but not edges.
    inner.edges().all(|(a, b)| {
        outer.contains_inclusive(&PlanarPoint::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0))
    })
}

/// Interiors of the two rings do not overlap (touching allowed).
fn rings_disjoint(a: &Ring, b: &Ring) -> bool {
    for (p, q) in a.edges() {
        for (r, s) in b.edges() {
            if segments_cross(&p, &q, &r, &s) {
                return false;
            }
        }
    }
    let strictly_inside = |v: &PlanarPoint, r: &Ring| r.boundary_distance(v) > BOUNDARY_EPS && r.encloses(v);
    !a.vertices().iter().any(|v| strictly_inside(v, b))
        && !b.vertices().iter().any(|v| strictly_inside(v, a))
}
