//! Planar convex geometry on filled convex polygons.
//!
//! A [`ConvexRegion`] may be degenerate: a single point or a segment. All
//! distances treat regions as filled sets.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

use crate::projective::{apply_hat, pullback_infinity_line, IntMatrix3, PlanarLine, ProjectiveError, Vector2};

/// Number of arcs used to discretize the disk in [`inflate`].
pub const INFLATE_ARCS: usize = 64;

/// Relative cross-product threshold below which three points count as collinear.
pub const COLLINEAR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("hull of an empty point set")]
    EmptyInput,
    #[error("non-finite point ({0}, {1})")]
    NonFinite(f64, f64),
    #[error("region meets the pulled-back line at infinity")]
    RegionMeetsInfinityLine,
    #[error(transparent)]
    Projective(#[from] ProjectiveError),
}

/// Axis-aligned closed rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };

    pub const fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Self { x0, x1, y0, y1 }
    }

    /// `[-r, r]^2`
    pub fn centered(r: f64) -> Self {
        Self::new(-r, r, -r, r)
    }

    pub fn is_empty(&self) -> bool {
        !(self.x0 <= self.x1 && self.y0 <= self.y1)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, p: Vector2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }

    /// Whether the two rectangles, the first grown by `pad`, share a point.
    pub fn meets_padded(&self, other: &Rect, pad: f64) -> bool {
        self.x0 - pad <= other.x1
            && other.x0 <= self.x1 + pad
            && self.y0 - pad <= other.y1
            && other.y0 <= self.y1 + pad
    }

    pub fn translate(&self, v: Vector2) -> Rect {
        Rect::new(self.x0 + v.x, self.x1 + v.x, self.y0 + v.y, self.y1 + v.y)
    }

    pub fn corners(&self) -> [Vector2; 4] {
        [
            Vector2::new(self.x0, self.y0),
            Vector2::new(self.x1, self.y0),
            Vector2::new(self.x1, self.y1),
            Vector2::new(self.x0, self.y1),
        ]
    }

    pub fn to_region(&self) -> ConvexRegion {
        hull(&self.corners()).expect("four corners")
    }

    /// Bounding box of a non-empty point list.
    pub fn bounding(points: &[Vector2]) -> Option<Rect> {
        let first = points.first()?;
        Some(points.iter().fold(Rect::new(first.x, first.x, first.y, first.y), |r, p| {
            Rect::new(r.x0.min(p.x), r.x1.max(p.x), r.y0.min(p.y), r.y1.max(p.y))
        }))
    }
}

/// A filled convex polygon given by its vertices in counter-clockwise order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexRegion {
    vertices: Vec<Vector2>,
}

impl ConvexRegion {
    pub fn point(p: Vector2) -> Self {
        Self { vertices: vec![p] }
    }

    pub fn vertices(&self) -> &[Vector2] {
        &self.vertices
    }

    pub fn is_point(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn is_segment(&self) -> bool {
        self.vertices.len() == 2
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        if n < 3 {
            return 0.0;
        }
        0.5 * (0..n).map(|i| self.vertices[i].cross(self.vertices[(i + 1) % n])).sum::<f64>()
    }

    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d = 0.0f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(v[i].dist(v[j]));
            }
        }
        d
    }

    pub fn bounding_box(&self) -> Rect {
        Rect::bounding(&self.vertices).expect("regions are non-empty")
    }

    /// Largest Euclidean norm of a point of the region.
    pub fn max_norm(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Vertex average, an interior point when the area is positive.
    pub fn centroid(&self) -> Vector2 {
        let n = self.vertices.len() as f64;
        self.vertices.iter().fold(Vector2::ZERO, |a, v| a + *v).scale(1.0 / n)
    }

    pub fn translate(&self, v: Vector2) -> Self {
        Self { vertices: self.vertices.iter().map(|p| *p + v).collect() }
    }

    /// Image under `z -> s z`. Negative factors keep CCW order (point reflection).
    pub fn scale(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::point(Vector2::ZERO);
        }
        Self { vertices: self.vertices.iter().map(|p| p.scale(s)).collect() }
    }

    /// Euclidean distance from `p` to the filled region (0 inside).
    pub fn distance_to(&self, p: Vector2) -> f64 {
        let v = &self.vertices;
        match v.len() {
            1 => v[0].dist(p),
            2 => segment_distance(p, v[0], v[1]),
            n => {
                let inside = (0..n).all(|i| (v[(i + 1) % n] - v[i]).cross(p - v[i]) >= 0.0);
                if inside {
                    0.0
                } else {
                    (0..n).map(|i| segment_distance(p, v[i], v[(i + 1) % n])).fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    pub fn contains_point(&self, p: Vector2, tol: f64) -> bool {
        self.distance_to(p) <= tol
    }

    /// Every vertex of `other` lies within `tol` of `self`.
    pub fn contains_region(&self, other: &ConvexRegion, tol: f64) -> bool {
        other.vertices.iter().all(|p| self.contains_point(*p, tol))
    }

    /// How far `other` sticks out of `self`: max over its vertices of the distance to `self`.
    pub fn outward_defect(&self, other: &ConvexRegion) -> f64 {
        other.vertices.iter().map(|p| self.distance_to(*p)).fold(0.0, f64::max)
    }

    /// Whether the filled regions share a point (separating-axis test).
    pub fn intersects(&self, other: &ConvexRegion) -> bool {
        let mut axes = Vec::new();
        for region in [self, other] {
            region.push_axes(&mut axes);
        }
        if axes.is_empty() {
            return self.vertices[0] == other.vertices[0];
        }
        !axes.iter().any(|axis| {
            let (a0, a1) = project(&self.vertices, *axis);
            let (b0, b1) = project(&other.vertices, *axis);
            a1 < b0 || b1 < a0
        })
    }

    /// Euclidean distance between the filled regions (0 when they meet).
    pub fn distance_to_region(&self, other: &ConvexRegion) -> f64 {
        if self.intersects(other) {
            return 0.0;
        }
        let ab = self.vertices.iter().map(|p| other.distance_to(*p)).fold(f64::INFINITY, f64::min);
        let ba = other.vertices.iter().map(|p| self.distance_to(*p)).fold(f64::INFINITY, f64::min);
        ab.min(ba)
    }

    fn push_axes(&self, axes: &mut Vec<Vector2>) {
        let v = &self.vertices;
        let n = v.len();
        if n == 1 {
            return;
        }
        for i in 0..n {
            let e = v[(i + 1) % n] - v[i];
            axes.push(Vector2::new(-e.y, e.x));
            if n == 2 {
                axes.push(e);
            }
        }
    }
}

fn project(points: &[Vector2], axis: Vector2) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let d = p.dot(axis);
        (lo.min(d), hi.max(d))
    })
}

fn segment_distance(p: Vector2, a: Vector2, b: Vector2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab.scale(t))
}

/// Convex hull (Andrew's monotone chain). Collinear and duplicate points are
/// dropped; one distinct point gives a point region, collinear input a segment.
pub fn hull(points: &[Vector2]) -> Result<ConvexRegion, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::EmptyInput);
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite(p.x, p.y));
    }
    // -0.0 and 0.0 must sort together
    let mut pts: Vec<Vector2> = points.iter().map(|p| Vector2::new(p.x + 0.0, p.y + 0.0)).collect();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() == 1 {
        return Ok(ConvexRegion::point(pts[0]));
    }
    let bbox = Rect::bounding(&pts).expect("non-empty");
    let scale = bbox.width().max(bbox.height());
    let tol = COLLINEAR_TOLERANCE * scale * scale;

    let mut lower: Vec<Vector2> = Vec::with_capacity(pts.len());
    for p in &pts {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], *p) <= tol {
            lower.pop();
        }
        lower.push(*p);
    }
    let mut upper: Vec<Vector2> = Vec::with_capacity(pts.len());
    for p in pts.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], *p) <= tol {
            upper.pop();
        }
        upper.push(*p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 1 {
        // everything collapsed onto a tolerance-thin segment
        lower.push(*pts.last().expect("non-empty"));
    }
    Ok(ConvexRegion { vertices: lower })
}

fn turn(a: Vector2, b: Vector2, c: Vector2) -> f64 {
    (b - a).cross(c - a)
}

/// Symmetric Hausdorff distance between two filled convex regions.
/// The distance to a convex set is a convex function, so vertices suffice.
pub fn hausdorff(a: &ConvexRegion, b: &ConvexRegion) -> f64 {
    b.outward_defect(a).max(a.outward_defect(b))
}

/// Outer polygonal approximation of `a ⊕ B(0, r)`: the disk is replaced by the
/// circumscribed regular polygon with [`INFLATE_ARCS`] sides, so the result
/// contains the true sum and exceeds it by at most `r (1/cos(pi/64) - 1) < r/100`.
pub fn inflate(a: &ConvexRegion, r: f64) -> ConvexRegion {
    assert!(r >= 0.0, "inflate radius must be non-negative");
    if r == 0.0 {
        return a.clone();
    }
    let circ = r / (PI / INFLATE_ARCS as f64).cos();
    let offsets: Vec<Vector2> = (0..INFLATE_ARCS)
        .map(|j| {
            let th = TAU * j as f64 / INFLATE_ARCS as f64;
            Vector2::new(circ * th.cos(), circ * th.sin())
        })
        .collect();
    let pts: Vec<Vector2> = a.vertices.iter().flat_map(|v| offsets.iter().map(move |o| *v + *o)).collect();
    hull(&pts).expect("non-empty")
}

/// Distance from a line to a filled region: the smallest absolute signed vertex
/// distance when all vertices are strictly on one side, otherwise 0.
pub fn line_region_distance(line: &PlanarLine, a: &ConvexRegion) -> f64 {
    let d: Vec<f64> = a.vertices.iter().map(|v| line.signed_distance(*v)).collect();
    if d.iter().all(|x| *x > 0.0) || d.iter().all(|x| *x < 0.0) {
        d.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min)
    } else {
        0.0
    }
}

/// Image of a region under the planar restriction of `l`. Away from the
/// pulled-back line the map sends segments to segments, so the image is the
/// hull of the vertex images.
pub fn apply_hat_region(l: &IntMatrix3, a: &ConvexRegion) -> Result<ConvexRegion, GeometryError> {
    if let Some(line) = pullback_infinity_line(l).line() {
        if line_region_distance(line, a) <= 0.0 {
            return Err(GeometryError::RegionMeetsInfinityLine);
        }
    }
    let images = a
        .vertices
        .iter()
        .map(|v| apply_hat(l, *v))
        .collect::<Result<Vec<_>, _>>()?;
    let out = hull(&images)?;
    debug_assert!({
        let n = a.vertices.len();
        (0..n).all(|i| {
            let mid = (a.vertices[i] + a.vertices[(i + 1) % n]).scale(0.5);
            let img = apply_hat(l, mid).expect("midpoint of a region off the line");
            out.contains_point(img, 1e-9 * img.norm_inf().max(1.0))
        })
    });
    Ok(out)
}
