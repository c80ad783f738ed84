//! Planar geometric primitives shared by the mesh, agglomeration, and
//! metrics code paths: polygon area/centroid, convex hulls, point-set
//! diameters, half-plane clipping, and point-in-region tests.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

/// A point (or vector) in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, treating both as vectors.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dist2(self, other: Point) -> f64 {
        let d = self - other;
        d.dot(d)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Orientation of the triangle (o, a, b): positive when counter-clockwise.
pub fn orient(o: Point, a: Point, b: Point) -> f64 {
    (a - o).cross(b - o)
}

/// Signed shoelace area of the polygon; positive for counter-clockwise loops.
pub fn polygon_signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        acc += p.cross(q);
    }
    acc / 2.0
}

/// Unsigned polygon area.
pub fn polygon_area(pts: &[Point]) -> f64 {
    polygon_signed_area(pts).abs()
}

/// Total length of the closed boundary.
pub fn polygon_perimeter(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| pts[i].dist(pts[(i + 1) % n])).sum()
}

/// Area-weighted centroid of a simple polygon. `None` when the signed area is
/// too small for the quotient to be meaningful.
pub fn polygon_centroid(pts: &[Point]) -> Option<Point> {
    let n = pts.len();
    if n < 3 {
        return None;
    }
    let a = polygon_signed_area(pts);
    // Scale-aware degeneracy cutoff: a polygon this flat relative to its
    // extent has no well-defined interior.
    let scale: f64 = pts
        .iter()
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(0.0, f64::max)
        .max(1e-300);
    if a.abs() < 1e-14 * scale * scale {
        return None;
    }
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        let w = p.cross(q);
        cx += (p.x + q.x) * w;
        cy += (p.y + q.y) * w;
    }
    Some(Point::new(cx / (6.0 * a), cy / (6.0 * a)))
}

/// Convex hull in counter-clockwise order (monotone chain). Collinear points
/// on hull edges are dropped. Returns fewer than 3 points for degenerate
/// inputs (all points collinear or coincident).
pub fn convex_hull(pts: &[Point]) -> Vec<Point> {
    let mut sorted: Vec<Point> = pts.to_vec();
    sorted.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    sorted.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    let n = sorted.len();
    if n < 3 {
        return sorted;
    }
    // Keep strictly convex turns only; drop collinear points.
    let mut lower: Vec<Point> = Vec::with_capacity(n);
    for &p in &sorted {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(n);
    for &p in sorted.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Largest pairwise distance within a point set. Computed over the convex
/// hull, so it stays cheap for large vertex collections.
pub fn point_set_diameter(pts: &[Point]) -> f64 {
    let hull = convex_hull(pts);
    let candidates = if hull.len() >= 2 { &hull[..] } else { pts };
    let n = candidates.len();
    let mut best = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            best = best.max(candidates[i].dist2(candidates[j]));
        }
    }
    best.sqrt()
}

/// Distance from `p` to the closed segment `[a, b]`.
pub fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Clips a polygon against the half-plane `f(p) <= 0` where `f` must be
/// affine in `p` (Sutherland–Hodgman, single plane). Crossing points are
/// placed by linear interpolation, which is exact for affine `f`.
pub fn clip_halfplane(poly: &[Point], f: impl Fn(Point) -> f64) -> Vec<Point> {
    let n = poly.len();
    let mut out = Vec::with_capacity(n + 2);
    if n == 0 {
        return out;
    }
    let vals: Vec<f64> = poly.iter().map(|&p| f(p)).collect();
    for i in 0..n {
        let (p, fp) = (poly[i], vals[i]);
        let j = (i + 1) % n;
        let (q, fq) = (poly[j], vals[j]);
        if fp <= 0.0 {
            out.push(p);
        }
        if (fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0) {
            let t = fp / (fp - fq);
            out.push(p + (q - p) * t);
        }
    }
    out
}

/// Even-odd point-in-region test against a set of closed loops (holes are
/// simply additional loops). Points on the boundary may land on either side.
pub fn point_in_loops(p: Point, loops: &[Vec<Point>]) -> bool {
    let mut inside = false;
    for lp in loops {
        let n = lp.len();
        for i in 0..n {
            let a = lp[i];
            let b = lp[(i + 1) % n];
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

/// Minimum distance from `p` to the boundary formed by a set of closed loops.
pub fn distance_to_loops(p: Point, loops: &[Vec<Point>]) -> f64 {
    let mut best = f64::INFINITY;
    for lp in loops {
        let n = lp.len();
        for i in 0..n {
            best = best.min(segment_distance(p, lp[i], lp[(i + 1) % n]));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    fn regular_hexagon(r: f64) -> Vec<Point> {
        (0..6)
            .map(|k| {
                let th = std::f64::consts::PI / 3.0 * k as f64;
                Point::new(r * th.cos(), r * th.sin())
            })
            .collect()
    }

    #[test]
    fn shoelace_unit_square() {
        assert_eq!(polygon_signed_area(&unit_square()), 1.0);
    }

    #[test]
    fn shoelace_right_triangle() {
        let t = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert_eq!(polygon_signed_area(&t), 0.5);
    }

    #[test]
    fn shoelace_hexagon_closed_form() {
        // 3·√3/2 for circumradius 1.
        let a = polygon_area(&regular_hexagon(1.0));
        assert_relative_eq!(a, 1.5 * 3.0f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn clockwise_loop_has_negative_area() {
        let mut sq = unit_square();
        sq.reverse();
        assert_eq!(polygon_signed_area(&sq), -1.0);
    }

    #[test]
    fn centroid_square_and_triangle() {
        let c = polygon_centroid(&unit_square()).unwrap();
        assert_eq!((c.x, c.y), (0.5, 0.5));
        let t = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let c = polygon_centroid(&t).unwrap();
        assert_relative_eq!(c.x, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(c.y, 1.0 / 3.0, max_relative = 1e-15);
    }

    #[test]
    fn centroid_l_shaped_hexagon() {
        // Two unit squares in an L: area-weighted centroid (5/6, 5/6).
        let l = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        let c = polygon_centroid(&l).unwrap();
        assert_relative_eq!(c.x, 5.0 / 6.0, max_relative = 1e-14);
        assert_relative_eq!(c.y, 5.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn degenerate_polygon_has_no_centroid() {
        let flat = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(2.0, 0.0),
        ];
        assert!(polygon_centroid(&flat).is_none());
    }

    #[test]
    fn hull_of_square_with_interior_points() {
        let mut pts = unit_square();
        pts.push(Point::new(0.5, 0.5));
        pts.push(Point::new(0.25, 0.75));
        let hull = convex_hull(&pts);
        assert_eq!(hull.len(), 4);
        assert!(polygon_signed_area(&hull) > 0.0);
    }

    #[test]
    fn hull_drops_collinear_edge_points() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(0.5, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        assert_eq!(convex_hull(&pts).len(), 4);
    }

    #[test]
    fn diameter_square_and_hexagon() {
        assert_relative_eq!(point_set_diameter(&unit_square()), 2.0f64.sqrt());
        assert_relative_eq!(point_set_diameter(&regular_hexagon(1.0)), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn diameter_of_collinear_points() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(3.0, 3.0),
        ];
        assert_relative_eq!(point_set_diameter(&pts), 18.0f64.sqrt());
    }

    #[test]
    fn segment_distance_cases() {
        let a = Point::new(0.0, 0.0);
        let b = Point::new(2.0, 0.0);
        assert_eq!(segment_distance(Point::new(1.0, 1.0), a, b), 1.0);
        assert_eq!(segment_distance(Point::new(-1.0, 0.0), a, b), 1.0);
        assert_eq!(segment_distance(Point::new(3.0, 4.0), a, b), 17.0f64.sqrt());
    }

    #[test]
    fn clip_square_by_diagonal() {
        // Keep x + y - 1 <= 0: lower-left triangle of the unit square.
        let clipped = clip_halfplane(&unit_square(), |p| p.x + p.y - 1.0);
        assert_relative_eq!(polygon_area(&clipped), 0.5, max_relative = 1e-15);
    }

    #[test]
    fn clip_to_empty() {
        let clipped = clip_halfplane(&unit_square(), |p| 1.0 + p.x);
        assert!(clipped.is_empty());
    }

    #[test]
    fn clip_keeps_exact_axis_coordinates() {
        // Crossing points on the bottom edge keep y = 0 exactly because both
        // endpoints carry y = 0 exactly.
        let clipped = clip_halfplane(&unit_square(), |p| p.x - 0.3);
        assert!(clipped.iter().any(|p| p.y == 0.0 && p.x == 0.3));
    }

    #[test]
    fn point_in_l_shape() {
        let l = vec![vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ]];
        assert!(point_in_loops(Point::new(0.5, 0.5), &l));
        assert!(point_in_loops(Point::new(0.5, 1.5), &l));
        assert!(!point_in_loops(Point::new(1.5, 1.5), &l));
        assert!(!point_in_loops(Point::new(-0.5, 0.5), &l));
    }

    #[test]
    fn point_in_region_with_hole() {
        let outer = vec![
            Point::new(0.0, 0.0),
            Point::new(3.0, 0.0),
            Point::new(3.0, 3.0),
            Point::new(0.0, 3.0),
        ];
        let hole = vec![
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(2.0, 2.0),
            Point::new(2.0, 1.0),
        ];
        let loops = vec![outer, hole];
        assert!(point_in_loops(Point::new(0.5, 0.5), &loops));
        assert!(!point_in_loops(Point::new(1.5, 1.5), &loops));
    }

    #[test]
    fn distance_to_square_boundary_from_center() {
        let loops = vec![unit_square()];
        assert_eq!(distance_to_loops(Point::new(0.5, 0.5), &loops), 0.5);
    }
}
