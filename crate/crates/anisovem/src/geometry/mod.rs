//! Polygon primitives: exact moments, covariance spectral analysis,
//! anisotropy mapping, convex line clipping, and polygonal quadrature.
//!
//! Everything here is a pure function of its inputs; no shared mutable
//! state, safe for concurrent use.

mod clip;
mod quadrature;

pub use clip::{clip_polygon, clip_polygon_parts, ClipPart, ClipResult, ClipVertex, CutLocation, CutPoint};
pub use quadrature::{polygon_quadrature, scaled_monomials, Quadrature, ScaledMonomials};

use nalgebra as na;
use thiserror::Error;

pub type Point2 = na::Point2<f64>;
pub type Vec2 = na::Vector2<f64>;
pub type Mat2 = na::Matrix2<f64>;

/// Area below `DEGENERACY_REL_AREA * h_K^2` counts as degenerate.
pub const DEGENERACY_REL_AREA: f64 = 1e-14;

/// Cut points closer than `SNAP_REL_TOL * h_K` to the cut line snap onto
/// existing vertices, so cuts never create sliver edges.
pub const SNAP_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon has a non-finite coordinate")]
    NonFinite,
    #[error("polygon vertices are not in counter-clockwise order")]
    NotCcw,
    #[error("degenerate element: area {area:.3e} below threshold {threshold:.3e}")]
    DegenerateElement { area: f64, threshold: f64 },
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("polygon is not convex")]
    NotConvex,
    #[error("cut line does not properly cross the polygon interior")]
    ClipFailed,
    #[error("unsupported quadrature degree {0} (supported range 0..=8)")]
    UnsupportedDegree(usize),
}

/// Symmetric 2x2 matrix stored as its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMat2 {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

impl SymMat2 {
    pub fn new(m11: f64, m12: f64, m22: f64) -> Self {
        Self { m11, m12, m22 }
    }

    pub fn from_matrix(m: &Mat2) -> Self {
        Self::new(m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)])
    }

    pub fn to_matrix(self) -> Mat2 {
        Mat2::new(self.m11, self.m12, self.m12, self.m22)
    }

    pub fn trace(self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m12
    }
}

/// Simple polygon with counter-clockwise vertex loop and cached area,
/// centroid and diameter. Collinear (hanging) vertices are allowed.
#[derive(Debug, Clone)]
pub struct Polygon {
    vertices: Vec<Point2>,
    area: f64,
    centroid: Point2,
    diameter: f64,
}

impl Polygon {
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let diameter = max_pairwise_distance(&vertices);
        let threshold = DEGENERACY_REL_AREA * diameter * diameter;

        // Shoelace formula; positive for CCW loops.
        let mut twice_area = 0.0;
        let n = vertices.len();
        for i in 0..n {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            twice_area += p.x * q.y - q.x * p.y;
        }
        let area = 0.5 * twice_area;
        if area < -threshold {
            return Err(GeometryError::NotCcw);
        }
        if area <= threshold {
            return Err(GeometryError::DegenerateElement { area, threshold });
        }

        let mut cx = 0.0;
        let mut cy = 0.0;
        for i in 0..n {
            let p = vertices[i];
            let q = vertices[(i + 1) % n];
            let w = p.x * q.y - q.x * p.y;
            cx += (p.x + q.x) * w;
            cy += (p.y + q.y) * w;
        }
        let centroid = Point2::new(cx / (6.0 * area), cy / (6.0 * area));

        Ok(Self { vertices, area, centroid, diameter })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Area |K|.
    pub fn area(&self) -> f64 {
        self.area
    }

    /// Barycenter of the polygon.
    pub fn centroid(&self) -> Point2 {
        self.centroid
    }

    /// Diameter h_K, the maximum pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Endpoints of edge `i`, running from vertex `i` to vertex `i+1`.
    pub fn edge(&self, i: usize) -> (Point2, Point2) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (p, q) = self.edge(i);
        (q - p).norm()
    }

    /// Unit outward normal of edge `i` (the loop is CCW).
    pub fn outward_normal(&self, i: usize) -> Vec2 {
        let (p, q) = self.edge(i);
        let t = q - p;
        Vec2::new(t.y, -t.x) / t.norm()
    }

    pub fn min_edge_length(&self) -> f64 {
        (0..self.num_vertices())
            .map(|i| self.edge_length(i))
            .fold(f64::INFINITY, f64::min)
    }

    /// Convexity test. Collinear consecutive edges are accepted, which is
    /// what hanging vertices absorbed from neighbour cuts produce.
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        let tol = -1e-12 * self.diameter * self.diameter;
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let c = self.vertices[(i + 2) % n];
            cross(b - a, c - b) >= tol
        })
    }

    /// Strict interior test for convex polygons.
    pub fn contains(&self, p: Point2) -> bool {
        let n = self.vertices.len();
        let tol = 1e-14 * self.diameter * self.diameter;
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            cross(b - a, p - a) > tol
        })
    }

    /// Central second moment tensor (covariance matrix) of the polygon,
    /// computed exactly by a signed centroid fan with the degree-2
    /// midpoint rule on each triangle.
    pub fn second_moment(&self) -> SymMat2 {
        let c = self.centroid;
        let n = self.vertices.len();
        let mut m11 = 0.0;
        let mut m12 = 0.0;
        let mut m22 = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let ta = 0.5 * cross(p - c, q - c);
            // Edge-midpoint rule, exact for quadratics.
            let mids = [
                Point2::from((c.coords + p.coords) * 0.5),
                Point2::from((p.coords + q.coords) * 0.5),
                Point2::from((q.coords + c.coords) * 0.5),
            ];
            for m in mids {
                let d = m - c;
                m11 += ta / 3.0 * d.x * d.x;
                m12 += ta / 3.0 * d.x * d.y;
                m22 += ta / 3.0 * d.y * d.y;
            }
        }
        SymMat2::new(m11 / self.area, m12 / self.area, m22 / self.area)
    }
}

fn max_pairwise_distance(vertices: &[Point2]) -> f64 {
    let mut d2: f64 = 0.0;
    for i in 0..vertices.len() {
        for j in (i + 1)..vertices.len() {
            d2 = d2.max((vertices[i] - vertices[j]).norm_squared());
        }
    }
    d2.sqrt()
}

pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Area, barycenter and covariance matrix of a polygon.
pub fn polygon_moments(poly: &Polygon) -> (f64, Point2, SymMat2) {
    (poly.area(), poly.centroid(), poly.second_moment())
}

/// Eigendecomposition of a symmetric 2x2 matrix, ordered so that
/// `lambda1 >= lambda2`, with unit eigenvectors.
#[derive(Debug, Clone, Copy)]
pub struct EigenDecomp2 {
    pub lambda1: f64,
    pub lambda2: f64,
    pub r1: Vec2,
    pub r2: Vec2,
}

impl EigenDecomp2 {
    /// lambda1 / lambda2, the anisotropy ratio for covariance matrices.
    pub fn ratio(&self) -> f64 {
        self.lambda1 / self.lambda2
    }
}

/// Deterministic sign convention: first component that is clearly nonzero
/// becomes positive. With `lambda1 == lambda2` the decomposition ties to
/// `r1 = (1,0)`, `r2 = (0,1)`.
fn fix_sign(v: Vec2) -> Vec2 {
    if v.x.abs() > 1e-14 {
        if v.x < 0.0 { -v } else { v }
    } else if v.y < 0.0 {
        -v
    } else {
        v
    }
}

/// Closed-form symmetric 2x2 eigendecomposition. Total: accepts any
/// symmetric input (used for semidefinite error tensors as well).
pub fn sym_eig2(m: &SymMat2) -> EigenDecomp2 {
    let t = 0.5 * (m.m11 + m.m22);
    let half_gap = 0.5 * (m.m11 - m.m22);
    let disc = f64::hypot(half_gap, m.m12);
    let lambda1 = t + disc;
    let lambda2 = t - disc;
    let scale = m.m11.abs() + m.m22.abs() + m.m12.abs();
    if disc <= 1e-12 * scale || scale == 0.0 {
        // Isotropic (or zero) tensor: no preferred directions.
        return EigenDecomp2 { lambda1, lambda2, r1: Vec2::new(1.0, 0.0), r2: Vec2::new(0.0, 1.0) };
    }
    let va = Vec2::new(lambda1 - m.m22, m.m12);
    let vb = Vec2::new(m.m12, lambda1 - m.m11);
    let v = if va.norm_squared() >= vb.norm_squared() { va } else { vb };
    let r1 = fix_sign(v.normalize());
    let r2 = fix_sign(Vec2::new(-r1.y, r1.x));
    EigenDecomp2 { lambda1, lambda2, r1, r2 }
}

/// Eigendecomposition of a symmetric positive definite matrix.
pub fn eig_sym2(m: &SymMat2) -> Result<EigenDecomp2, GeometryError> {
    if !(m.m11 > 0.0 && m.m22 > 0.0 && m.det() > 0.0) {
        return Err(GeometryError::NotSpd);
    }
    Ok(sym_eig2(m))
}

/// Spectral data of a cell covariance matrix plus the affine map that
/// sends the cell onto a unit-area isotropic reference configuration.
#[derive(Debug, Clone, Copy)]
pub struct AnisotropyInfo {
    pub lambda1: f64,
    pub lambda2: f64,
    pub r1: Vec2,
    pub r2: Vec2,
    /// Scaling factor `alpha_K = (sqrt(lambda1*lambda2)/|K|)^(1/2)`.
    pub alpha: f64,
    /// Map matrix `A_K = alpha_K * Lambda^(-1/2) * U^T`.
    pub map: Mat2,
}

impl AnisotropyInfo {
    pub fn ratio(&self) -> f64 {
        self.lambda1 / self.lambda2
    }

    pub fn map_point(&self, p: Point2) -> Point2 {
        Point2::from(self.map * p.coords)
    }

    /// Image of a polygon under the map. The loop is reversed when the
    /// map is orientation-reversing so the result stays CCW.
    pub fn map_polygon(&self, poly: &Polygon) -> Result<Polygon, GeometryError> {
        let mut mapped: Vec<Point2> = poly.vertices().iter().map(|&p| self.map_point(p)).collect();
        if self.map.determinant() < 0.0 {
            mapped.reverse();
        }
        Polygon::new(mapped)
    }

    /// `alpha^-1 * (lambda1 * r1'G r1 + lambda2 * r2'G r2)^(1/2)`, the
    /// directional weight the anisotropic error indicators attach to a
    /// gradient tensor `G`.
    pub fn directional_weight(&self, g: &Mat2) -> f64 {
        let q1 = (g * self.r1).dot(&self.r1);
        let q2 = (g * self.r2).dot(&self.r2);
        let s = (self.lambda1 * q1 + self.lambda2 * q2).max(0.0);
        s.sqrt() / self.alpha
    }
}

/// Covariance spectral analysis of a polygon together with the map onto
/// its isotropic unit-area reference configuration.
pub fn anisotropy_map(poly: &Polygon) -> Result<AnisotropyInfo, GeometryError> {
    let cov = poly.second_moment();
    let eig = eig_sym2(&cov)?;
    let alpha = ((eig.lambda1 * eig.lambda2).sqrt() / poly.area()).sqrt();
    let u_t = Mat2::new(eig.r1.x, eig.r1.y, eig.r2.x, eig.r2.y);
    let lam_inv_sqrt = Mat2::new(1.0 / eig.lambda1.sqrt(), 0.0, 0.0, 1.0 / eig.lambda2.sqrt());
    let map = lam_inv_sqrt * u_t * alpha;
    Ok(AnisotropyInfo {
        lambda1: eig.lambda1,
        lambda2: eig.lambda2,
        r1: eig.r1,
        r2: eig.r2,
        alpha,
        map,
    })
}

/// Chebyshev radius of a convex polygon: the radius of the largest
/// inscribed circle, solved exactly by enumerating active-constraint
/// triples of the edge half-planes.
pub fn chebyshev_radius(poly: &Polygon) -> f64 {
    let n = poly.num_vertices();
    // Half-plane form n.x <= c with unit outward normals; the inscribed
    // radius at x is min_i (c_i - n_i.x).
    let mut normals = Vec::with_capacity(n);
    let mut offsets = Vec::with_capacity(n);
    for i in 0..n {
        let (p, q) = poly.edge(i);
        if (q - p).norm() <= 1e-300 {
            continue;
        }
        let nrm = poly.outward_normal(i);
        normals.push(nrm);
        offsets.push(nrm.dot(&p.coords));
    }
    let m = normals.len();
    let feasible_radius = |x: Vec2| -> f64 {
        (0..m).map(|i| offsets[i] - normals[i].dot(&x)).fold(f64::INFINITY, f64::min)
    };
    // Start from the centroid; every active-constraint triple may improve it.
    let mut best = feasible_radius(poly.centroid().coords);
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                let a = na::Matrix3::new(
                    normals[i].x, normals[i].y, 1.0,
                    normals[j].x, normals[j].y, 1.0,
                    normals[k].x, normals[k].y, 1.0,
                );
                let b = na::Vector3::new(offsets[i], offsets[j], offsets[k]);
                if let Some(sol) = a.lu().solve(&b) {
                    if sol[2].is_finite() && sol[2] > best {
                        let x = Vec2::new(sol[0], sol[1]);
                        if feasible_radius(x) >= sol[2] - 1e-12 * poly.diameter() {
                            best = sol[2];
                        }
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_convex_polygon, rectangle, unit_square};
    use approx::assert_relative_eq;

    /// Monte-Carlo oracle for area / centroid / covariance of a convex
    /// polygon (rejection sampling in the bounding box).
    fn monte_carlo_moments(poly: &Polygon, samples: usize, seed: u64) -> (f64, Point2, SymMat2) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<f64> = poly.vertices().iter().map(|p| p.x).collect();
        let ys: Vec<f64> = poly.vertices().iter().map(|p| p.y).collect();
        let (x0, x1) = (xs.iter().cloned().fold(f64::INFINITY, f64::min), xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        let (y0, y1) = (ys.iter().cloned().fold(f64::INFINITY, f64::min), ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        let box_area = (x1 - x0) * (y1 - y0);
        let mut hits = 0usize;
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut pts = Vec::new();
        for _ in 0..samples {
            let p = Point2::new(rng.gen_range(x0..x1), rng.gen_range(y0..y1));
            if poly.contains(p) {
                hits += 1;
                sx += p.x;
                sy += p.y;
                pts.push(p);
            }
        }
        let area = box_area * hits as f64 / samples as f64;
        let c = Point2::new(sx / hits as f64, sy / hits as f64);
        let (mut m11, mut m12, mut m22) = (0.0, 0.0, 0.0);
        for p in &pts {
            let d = *p - c;
            m11 += d.x * d.x;
            m12 += d.x * d.y;
            m22 += d.y * d.y;
        }
        let k = hits as f64;
        (area, c, SymMat2::new(m11 / k, m12 / k, m22 / k))
    }

    #[test]
    fn unit_square_moments() {
        let sq = unit_square();
        let (area, c, cov) = polygon_moments(&sq);
        assert_relative_eq!(area, 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.x, 0.5, max_relative = 1e-14);
        assert_relative_eq!(c.y, 0.5, max_relative = 1e-14);
        // Analytic: integral of (x-1/2)^2 over the unit square is 1/12.
        assert_relative_eq!(cov.m11, 1.0 / 12.0, max_relative = 1e-13);
        assert_relative_eq!(cov.m22, 1.0 / 12.0, max_relative = 1e-13);
        assert!(cov.m12.abs() < 1e-15);
    }

    #[test]
    fn unit_square_moments_match_monte_carlo() {
        let sq = unit_square();
        let (area, c, cov) = polygon_moments(&sq);
        let (mc_area, mc_c, mc_cov) = monte_carlo_moments(&sq, 200_000, 42);
        assert_relative_eq!(area, mc_area, max_relative = 2e-2);
        assert_relative_eq!(c.x, mc_c.x, epsilon = 2e-2);
        assert_relative_eq!(c.y, mc_c.y, epsilon = 2e-2);
        assert_relative_eq!(cov.m11, mc_cov.m11, max_relative = 5e-2);
        assert_relative_eq!(cov.m22, mc_cov.m22, max_relative = 5e-2);
    }

    #[test]
    fn rectangle_covariance_eigenvalues() {
        // lambda1 = a^2/12, lambda2 = b^2/12 for an axis-aligned rectangle.
        let rect = rectangle(2.0, 1.0);
        let cov = rect.second_moment();
        let eig = eig_sym2(&cov).unwrap();
        assert_relative_eq!(eig.lambda1, 1.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(eig.lambda2, 1.0 / 12.0, max_relative = 1e-13);
        assert_relative_eq!(eig.r1.x, 1.0, max_relative = 1e-13);
        assert!(eig.r1.y.abs() < 1e-13);
    }

    #[test]
    fn translation_leaves_covariance_unchanged() {
        let rect = rectangle(2.0, 1.0);
        let t = Vec2::new(-3.25, 7.5);
        let moved = Polygon::new(rect.vertices().iter().map(|&p| p + t).collect()).unwrap();
        let (a0, c0, m0) = polygon_moments(&rect);
        let (a1, c1, m1) = polygon_moments(&moved);
        assert_relative_eq!(a0, a1, max_relative = 1e-13);
        assert_relative_eq!(c1.x, c0.x + t.x, max_relative = 1e-13);
        assert_relative_eq!(c1.y, c0.y + t.y, max_relative = 1e-13);
        assert_relative_eq!(m0.m11, m1.m11, max_relative = 1e-12);
        assert_relative_eq!(m0.m12, m1.m12, epsilon = 1e-12);
        assert_relative_eq!(m0.m22, m1.m22, max_relative = 1e-12);
    }

    #[test]
    fn eig_diagonal_matrix() {
        let eig = eig_sym2(&SymMat2::new(1.0 / 3.0, 0.0, 1.0 / 12.0)).unwrap();
        assert_relative_eq!(eig.lambda1, 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(eig.lambda2, 1.0 / 12.0, max_relative = 1e-14);
        assert_eq!(eig.r1, Vec2::new(1.0, 0.0));
        assert_eq!(eig.r2, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn eig_isotropic_tie_convention() {
        let eig = eig_sym2(&SymMat2::new(2.5, 0.0, 2.5)).unwrap();
        assert_eq!(eig.lambda1, 2.5);
        assert_eq!(eig.lambda2, 2.5);
        assert_eq!(eig.r1, Vec2::new(1.0, 0.0));
        assert_eq!(eig.r2, Vec2::new(0.0, 1.0));
    }

    #[test]
    fn eig_recovers_rotated_spectrum() {
        // R diag(4,1) R^T for a 30 degree rotation.
        let th = std::f64::consts::PI / 6.0;
        let (c, s) = (th.cos(), th.sin());
        let r = Mat2::new(c, -s, s, c);
        let m = r * Mat2::new(4.0, 0.0, 0.0, 1.0) * r.transpose();
        let eig = eig_sym2(&SymMat2::from_matrix(&m)).unwrap();
        assert_relative_eq!(eig.lambda1, 4.0, max_relative = 1e-13);
        assert_relative_eq!(eig.lambda2, 1.0, max_relative = 1e-13);
        assert_relative_eq!(eig.r1.x, c, max_relative = 1e-12);
        assert_relative_eq!(eig.r1.y, s, max_relative = 1e-12);
        // Reconstruction U diag U^T.
        let u = Mat2::new(eig.r1.x, eig.r2.x, eig.r1.y, eig.r2.y);
        let rec = u * Mat2::new(eig.lambda1, 0.0, 0.0, eig.lambda2) * u.transpose();
        assert_relative_eq!(rec[(0, 0)], m[(0, 0)], max_relative = 1e-12);
        assert_relative_eq!(rec[(0, 1)], m[(0, 1)], max_relative = 1e-12);
        assert_relative_eq!(rec[(1, 1)], m[(1, 1)], max_relative = 1e-12);
    }

    #[test]
    fn eig_rejects_indefinite_input() {
        assert!(matches!(eig_sym2(&SymMat2::new(1.0, 2.0, 1.0)), Err(GeometryError::NotSpd)));
        assert!(matches!(eig_sym2(&SymMat2::new(-1.0, 0.0, 1.0)), Err(GeometryError::NotSpd)));
    }

    #[test]
    fn anisotropy_map_unit_square() {
        let sq = unit_square();
        let info = anisotropy_map(&sq).unwrap();
        assert_relative_eq!(info.alpha, (1.0f64 / 12.0).sqrt(), max_relative = 1e-13);
        let mapped = info.map_polygon(&sq).unwrap();
        assert_relative_eq!(mapped.area(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn mapped_polygon_is_isotropic_unit_area() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let poly = random_convex_polygon(&mut rng);
            let info = anisotropy_map(&poly).unwrap();
            let mapped = info.map_polygon(&poly).unwrap();
            assert_relative_eq!(mapped.area(), 1.0, max_relative = 1e-10);
            let cov = mapped.second_moment();
            let a2 = info.alpha * info.alpha;
            assert_relative_eq!(cov.m11, a2, max_relative = 1e-10);
            assert_relative_eq!(cov.m22, a2, max_relative = 1e-10);
            assert!(cov.m12.abs() <= 1e-10 * a2);
            // Barycenter pushes forward through the map.
            let mc = mapped.centroid();
            let fc = info.map_point(poly.centroid());
            assert_relative_eq!(mc.x, fc.x, epsilon = 1e-10 * poly.diameter().max(1.0));
            assert_relative_eq!(mc.y, fc.y, epsilon = 1e-10 * poly.diameter().max(1.0));
        }
    }

    #[test]
    fn covariance_rotation_covariant() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let poly = random_convex_polygon(&mut rng);
            let th = 1.1f64;
            let (c, s) = (th.cos(), th.sin());
            let r = Mat2::new(c, -s, s, c);
            let rotated = Polygon::new(
                poly.vertices().iter().map(|p| Point2::from(r * p.coords)).collect(),
            )
            .unwrap();
            let m0 = poly.second_moment().to_matrix();
            let m1 = rotated.second_moment().to_matrix();
            let expect = r * m0 * r.transpose();
            let scale = m0.norm();
            assert!((m1 - expect).norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn rectangle_anisotropy_ratio_exact() {
        for (a, b) in [(2.0, 1.0), (5.0, 1.0), (1.0, 3.0), (4.0, 0.25)] {
            let rect = rectangle(a, b);
            let eig = eig_sym2(&rect.second_moment()).unwrap();
            let expect = (a / b).max(b / a).powi(2);
            assert_relative_eq!(eig.ratio(), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn chebyshev_radius_simple_shapes() {
        assert_relative_eq!(chebyshev_radius(&unit_square()), 0.5, max_relative = 1e-10);
        assert_relative_eq!(chebyshev_radius(&rectangle(4.0, 1.0)), 0.5, max_relative = 1e-10);
        // Right triangle legs 3,4: inradius = (3+4-5)/2 = 1.
        let tri = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(0.0, 4.0),
        ])
        .unwrap();
        assert_relative_eq!(chebyshev_radius(&tri), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn degenerate_polygon_rejected() {
        let r = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
        ]);
        assert!(matches!(r, Err(GeometryError::DegenerateElement { .. })));
        let cw = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.0),
        ]);
        assert!(matches!(cw, Err(GeometryError::NotCcw)));
    }
}
