//! Shared fixtures for the unit-test suites.

use crate::geometry::{Point2, Polygon};
use rand::Rng;

pub fn unit_square() -> Polygon {
    rectangle(1.0, 1.0)
}

pub fn rectangle(a: f64, b: f64) -> Polygon {
    Polygon::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(a, 0.0),
        Point2::new(a, b),
        Point2::new(0.0, b),
    ])
    .unwrap()
}

/// Random convex polygon: sorted angles on an ellipse, anisotropically
/// scaled, rotated and translated. Angular gaps are bounded below so the
/// shapes stay away from degeneracy.
pub fn random_convex_polygon(rng: &mut impl Rng) -> Polygon {
    loop {
        let n = rng.gen_range(3..=9);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ok = true;
        for i in 0..n {
            let next = if i + 1 == n { angles[0] + std::f64::consts::TAU } else { angles[i + 1] };
            if next - angles[i] < 0.15 {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let sa = rng.gen_range(0.3..2.0);
        let sb = rng.gen_range(0.3..2.0);
        let rot = rng.gen_range(0.0..std::f64::consts::TAU);
        let (c, s) = (rot.cos(), rot.sin());
        let tx = rng.gen_range(-1.0..1.0);
        let ty = rng.gen_range(-1.0..1.0);
        let verts: Vec<Point2> = angles
            .iter()
            .map(|&t| {
                let (x, y) = (sa * t.cos(), sb * t.sin());
                Point2::new(c * x - s * y + tx, s * x + c * y + ty)
            })
            .collect();
        if let Ok(p) = Polygon::new(verts) {
            return p;
        }
    }
}

/// Integral of x^a y^b over a polygon through the divergence theorem:
/// the boundary integral of x^(a+1) y^b n_x / (a+1), evaluated per edge
/// with a 6-point Gauss rule (exact up to degree 11). Independent of the
/// interior fan quadrature.
pub fn divergence_monomial_integral(poly: &Polygon, a: u32, b: u32) -> f64 {
    // 6-point Gauss-Legendre on [0,1].
    const T: [f64; 6] = [
        0.033765242898423986,
        0.16939530676686776,
        0.3806904069584015,
        0.6193095930415985,
        0.8306046932331322,
        0.966234757101576,
    ];
    const W: [f64; 6] = [
        0.08566224618958517,
        0.18038078652406930,
        0.23395696728634552,
        0.23395696728634552,
        0.18038078652406930,
        0.08566224618958517,
    ];
    let n = poly.num_vertices();
    let mut total = 0.0;
    for i in 0..n {
        let (p, q) = poly.edge(i);
        let dy = q.y - p.y;
        let mut edge = 0.0;
        for k in 0..6 {
            let x = p.x + T[k] * (q.x - p.x);
            let y = p.y + T[k] * (q.y - p.y);
            edge += W[k] * x.powi(a as i32 + 1) * y.powi(b as i32);
        }
        total += edge * dy;
    }
    total / (a as f64 + 1.0)
}
