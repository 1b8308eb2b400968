//! Planar convex hulls and the distance queries the rate-region code needs.

use std::cmp::Ordering;

pub type Point2 = [f64; 2];

pub const TOL_GEOM: f64 = 1e-7;

fn cross(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dist(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// `true` when `a` bulges less than `TOL_GEOM` to the left of the chord `o -> b`.
fn not_left(o: Point2, a: Point2, b: Point2) -> bool {
    let len = dist(o, b);
    if len <= TOL_GEOM {
        return true;
    }
    cross(o, a, b) / len <= TOL_GEOM
}

/// Convex hull by Andrew's monotone chain.
///
/// Vertices run counterclockwise from the lexicographically smallest point. Points closer
/// than `TOL_GEOM` are merged and vertices within `TOL_GEOM` of the line through their
/// neighbours are dropped.
pub fn hull_2d(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.iter().copied().filter(|p| p[0].is_finite() && p[1].is_finite()).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut uniq: Vec<Point2> = Vec::with_capacity(pts.len());
    for p in pts {
        if uniq.iter().rev().take(8).all(|q| dist(*q, p) > TOL_GEOM) {
            uniq.push(p);
        }
    }
    if uniq.len() <= 2 {
        if uniq.len() == 2 && dist(uniq[0], uniq[1]) <= TOL_GEOM {
            uniq.truncate(1);
        }
        return uniq;
    }
    let mut lower: Vec<Point2> = Vec::new();
    for &p in &uniq {
        while lower.len() >= 2 && not_left(lower[lower.len() - 2], lower[lower.len() - 1], p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::new();
    for &p in uniq.iter().rev() {
        while upper.len() >= 2 && not_left(upper[upper.len() - 2], upper[upper.len() - 1], p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() == 2 && dist(lower[0], lower[1]) <= TOL_GEOM {
        lower.truncate(1);
    }
    lower
}

fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p[0] - a[0]) * ab[0] + (p[1] - a[1]) * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Euclidean distance from `p` to the filled convex polygon `hull` (zero inside).
pub fn distance_outside(hull: &[Point2], p: Point2) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => dist(hull[0], p),
        2 => segment_distance(p, hull[0], hull[1]),
        n => {
            let inside = (0..n).all(|i| cross(hull[i], hull[(i + 1) % n], p) >= 0.0);
            if inside {
                0.0
            } else {
                (0..n)
                    .map(|i| segment_distance(p, hull[i], hull[(i + 1) % n]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// Whether `p` lies within `tol` of the filled hull polygon.
pub fn contains(hull: &[Point2], p: Point2, tol: f64) -> bool {
    distance_outside(hull, p) <= tol
}

/// `max_{v in hull} (cos theta, sin theta) . v`.
pub fn support(hull: &[Point2], theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    hull.iter()
        .map(|v| c * v[0] + s * v[1])
        .max_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal))
        .unwrap_or(f64::NEG_INFINITY)
}

/// Hausdorff distance between two filled convex polygons given by their vertices.
///
/// Distance to a convex set is convex, so the maximum is attained at a vertex.
pub fn hausdorff(p: &[Point2], q: &[Point2]) -> f64 {
    let one_way = |from: &[Point2], to: &[Point2]| {
        from.iter().map(|&v| distance_outside(to, v)).fold(0.0, f64::max)
    };
    one_way(p, q).max(one_way(q, p))
}
