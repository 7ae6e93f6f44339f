//! Planar point/segment predicates used by the clearance checks and repair.

pub type Point2 = [f64; 2];

#[inline]
pub fn sub(a: Point2, b: Point2) -> Point2 {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Point2, b: Point2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point2, b: Point2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point2) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point2, b: Point2) -> f64 {
    norm(sub(a, b))
}

pub fn midpoint(a: Point2, b: Point2) -> Point2 {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Closest point of segment `[a, b]` to `p` and its parameter in `[0, 1]`.
pub fn closest_on_segment(p: Point2, a: Point2, b: Point2) -> (Point2, f64) {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    ([a[0] + t * ab[0], a[1] + t * ab[1]], t)
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    dist(p, closest_on_segment(p, a, b).0)
}

/// How two segments meet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SegmentContact {
    Disjoint,
    /// Interiors cross at a single point.
    Proper(Point2),
    /// They touch at an endpoint or overlap collinearly.
    Touching,
}

/// Classifies the intersection of `[a, b]` and `[c, d]`.
///
/// `tol` is an absolute length used to decide when an orientation is zero or
/// when a crossing sits on an endpoint.
pub fn segment_contact(a: Point2, b: Point2, c: Point2, d: Point2, tol: f64) -> SegmentContact {
    let r = sub(b, a);
    let s = sub(d, c);
    let denom = cross(r, s);
    let len_r = norm(r);
    let len_s = norm(s);
    // signed distances of each endpoint from the other line
    let oc = if len_r > 0.0 {
        cross(r, sub(c, a)) / len_r
    } else {
        0.0
    };
    let od = if len_r > 0.0 {
        cross(r, sub(d, a)) / len_r
    } else {
        0.0
    };
    let oa = if len_s > 0.0 {
        cross(s, sub(a, c)) / len_s
    } else {
        0.0
    };
    let ob = if len_s > 0.0 {
        cross(s, sub(b, c)) / len_s
    } else {
        0.0
    };

    let strictly_split = |x: f64, y: f64| (x > tol && y < -tol) || (x < -tol && y > tol);
    if strictly_split(oc, od) && strictly_split(oa, ob) && denom != 0.0 {
        let t = cross(sub(c, a), s) / denom;
        return SegmentContact::Proper([a[0] + t * r[0], a[1] + t * r[1]]);
    }
    let touches = point_segment_distance(a, c, d) <= tol
        || point_segment_distance(b, c, d) <= tol
        || point_segment_distance(c, a, b) <= tol
        || point_segment_distance(d, a, b) <= tol;
    if touches {
        SegmentContact::Touching
    } else {
        SegmentContact::Disjoint
    }
}

/// Euclidean distance between two closed segments.
pub fn segment_segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    if let SegmentContact::Proper(_) = segment_contact(a, b, c, d, 0.0) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Rotation of `p` about the origin.
pub fn rotate(p: Point2, angle: f64) -> Point2 {
    let (s, c) = angle.sin_cos();
    [c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

pub fn polar(radius: f64, angle: f64) -> Point2 {
    [radius * angle.cos(), radius * angle.sin()]
}

/// Angle of `p` in `[0, 2π)`.
pub fn angle_of(p: Point2) -> f64 {
    p[1].atan2(p[0]).rem_euclid(std::f64::consts::TAU)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_to_segment() {
        assert_eq!(
            point_segment_distance([0.0, 1.0], [-1.0, 0.0], [1.0, 0.0]),
            1.0
        );
        assert_eq!(
            point_segment_distance([3.0, 4.0], [0.0, 0.0], [0.0, 0.0]),
            5.0
        );
        assert!(
            (point_segment_distance([2.0, 1.0], [-1.0, 0.0], [1.0, 0.0]) - 2f64.sqrt()).abs()
                < 1e-15
        );
    }

    #[test]
    fn x_crossing_is_proper() {
        match segment_contact([-1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], 1e-12) {
            SegmentContact::Proper(p) => assert!(norm(p) < 1e-15),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            segment_segment_distance([-1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [1.0, -1.0]),
            0.0
        );
    }

    #[test]
    fn t_junction_is_touching() {
        let c = segment_contact([-1.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 1.0], 1e-12);
        assert_eq!(c, SegmentContact::Touching);
    }

    #[test]
    fn collinear_overlap_is_touching() {
        let c = segment_contact([0.0, 0.0], [2.0, 0.0], [1.0, 0.0], [3.0, 0.0], 1e-12);
        assert_eq!(c, SegmentContact::Touching);
    }

    #[test]
    fn parallel_gap() {
        let d = segment_segment_distance([0.0, 0.0], [1.0, 0.0], [0.0, 0.3], [1.0, 0.3]);
        assert!((d - 0.3).abs() < 1e-15);
        assert_eq!(
            segment_contact([0.0, 0.0], [1.0, 0.0], [0.0, 0.3], [1.0, 0.3], 1e-9),
            SegmentContact::Disjoint
        );
    }
}
