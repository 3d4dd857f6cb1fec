//! Small planar geometry helpers.

use nalgebra::{Matrix2, Vector2};

pub type Point = Vector2<f64>;
/// A 2×2 diffusion tensor.
pub type Tensor = Matrix2<f64>;

#[inline]
pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// z-component of `a × b`.
#[inline]
pub fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Rotation by +90 degrees.
#[inline]
pub fn perp(a: &Point) -> Point {
    Point::new(-a.y, a.x)
}

/// Signed area of the triangle `(a, b, c)`, positive when counter-clockwise.
#[inline]
pub fn signed_triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * cross(&(b - a), &(c - a))
}

/// Signed shoelace area of a closed polygon.
pub fn polygon_signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| cross(&poly[i], &poly[(i + 1) % n])).sum::<f64>() * 0.5
}

/// Centre of gravity of a simple polygon with non-zero area.
pub fn polygon_centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let mut c = Point::zeros();
    let mut a2 = 0.0;
    for i in 0..n {
        let p = &poly[i];
        let q = &poly[(i + 1) % n];
        let w = cross(p, q);
        a2 += w;
        c += (p + q) * w;
    }
    c / (3.0 * a2)
}

/// Largest distance between two vertices.
pub fn polygon_diameter(poly: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in poly.iter().enumerate() {
        for q in &poly[i + 1..] {
            d = d.max((p - q).norm());
        }
    }
    d
}

/// Distance from `p` to the segment `[a, b]`.
pub fn distance_to_segment(p: &Point, a: &Point, b: &Point) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_squared();
    if l2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / l2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Strict interior test for a counter-clockwise simple polygon: the point must
/// lie inside and farther than `tol` from every side.
pub fn strictly_inside(p: &Point, poly: &[Point], tol: f64) -> bool {
    let n = poly.len();
    let mut inside = false;
    for i in 0..n {
        let a = &poly[i];
        let b = &poly[(i + 1) % n];
        if distance_to_segment(p, a, b) <= tol {
            return false;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Parameter `s` such that `origin + s * dir` lies on the line through `a`
/// with unit normal `n`. `None` when `dir` is parallel to the line.
pub fn ray_line_parameter(origin: &Point, dir: &Point, a: &Point, n: &Point) -> Option<f64> {
    let den = dir.dot(n);
    if den.abs() <= f64::EPSILON * dir.norm() {
        return None;
    }
    Some((a - origin).dot(n) / den)
}

/// Incenter of a triangle, weighting each vertex by the opposite side length.
pub fn incenter(a: &Point, b: &Point, c: &Point) -> Point {
    let la = (b - c).norm();
    let lb = (c - a).norm();
    let lc = (a - b).norm();
    (a * la + b * lb + c * lc) / (la + lb + lc)
}

pub fn is_symmetric(t: &Tensor, rel: f64) -> bool {
    (t[(0, 1)] - t[(1, 0)]).abs() <= rel * t.abs().max().max(f64::MIN_POSITIVE)
}

/// Symmetric positive definite test for a 2×2 tensor.
pub fn is_spd_tensor(t: &Tensor) -> bool {
    is_symmetric(t, 1e-12) && t[(0, 0)] > 0.0 && t.determinant() > 0.0
}

/// Square root of a symmetric positive definite 2×2 tensor.
pub fn tensor_sqrt(t: &Tensor) -> Tensor {
    let e = t.symmetric_eigen();
    let d = Matrix2::from_diagonal(&e.eigenvalues.map(f64::sqrt));
    e.eigenvectors * d * e.eigenvectors.transpose()
}

/// 2-point Gauss nodes and weights on `[0, 1]`.
pub const GAUSS2: [(f64, f64); 2] = [(0.211_324_865_405_187_13, 0.5), (0.788_675_134_594_812_9, 0.5)];

/// 3-point Gauss nodes and weights on `[0, 1]`.
pub const GAUSS3: [(f64, f64); 3] =
    [(0.112_701_665_379_258_3, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.887_298_334_620_741_7, 5.0 / 18.0)];

/// Edge-midpoint rule on a triangle, exact for quadratics. Uses the signed area.
pub fn triangle_quadrature(a: &Point, b: &Point, c: &Point, f: &dyn Fn(&Point) -> f64) -> f64 {
    let area = signed_triangle_area(a, b, c);
    let m1 = (a + b) * 0.5;
    let m2 = (b + c) * 0.5;
    let m3 = (c + a) * 0.5;
    area * (f(&m1) + f(&m2) + f(&m3)) / 3.0
}

/// Mean of `f` over the segment `[a, b]` with a Gauss rule.
pub fn segment_mean(a: &Point, b: &Point, f: &dyn Fn(&Point) -> f64, rule: &[(f64, f64)]) -> f64 {
    rule.iter().map(|(t, w)| w * f(&(a + (b - a) * *t))).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_triangle_incenter() {
        let c = incenter(&pt(0.0, 0.0), &pt(1.0, 0.0), &pt(0.0, 1.0));
        let r = 1.0 / (2.0 + 2f64.sqrt());
        assert!((c - pt(r, r)).norm() < 1e-15);
    }

    #[test]
    fn centroid_of_unit_square() {
        let sq = [pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)];
        assert!((polygon_centroid(&sq) - pt(0.5, 0.5)).norm() < 1e-15);
        assert!((polygon_signed_area(&sq) - 1.0).abs() < 1e-15);
        assert!(strictly_inside(&pt(0.5, 0.5), &sq, 1e-12));
        assert!(!strictly_inside(&pt(1.0, 0.5), &sq, 1e-12));
    }

    #[test]
    fn gauss_rules_integrate_polynomials() {
        let f = |p: &Point| p.x.powi(5);
        let m = segment_mean(&pt(0.0, 0.0), &pt(1.0, 0.0), &f, &GAUSS3);
        assert!((m - 1.0 / 6.0).abs() < 1e-14);
        let g = |p: &Point| p.x * p.x;
        let m = segment_mean(&pt(0.0, 0.0), &pt(1.0, 0.0), &g, &GAUSS2);
        assert!((m - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_square_root() {
        let t = Tensor::new(4.0, 1.0, 1.0, 3.0);
        let s = tensor_sqrt(&t);
        assert!((s * s - t).norm() < 1e-13);
    }
}
