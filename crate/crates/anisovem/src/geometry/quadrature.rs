//! Polygonal quadrature by centroid fan sub-triangulation, plus scaled
//! monomial bases.
//!
//! Each fan triangle carries a collapsed tensor Gauss rule (Duffy map),
//! which is exact for the requested total degree. Rules up to degree 8
//! are supported.

use super::{GeometryError, Point2, Polygon, Vec2};

/// Gauss-Legendre nodes/weights on [-1, 1] for n = 1..=5.
const GAUSS: [(&[f64], &[f64]); 5] = [
    (&[0.0], &[2.0]),
    (&[-0.5773502691896257, 0.5773502691896257], &[1.0, 1.0]),
    (
        &[-0.7745966692414834, 0.0, 0.7745966692414834],
        &[0.5555555555555556, 0.8888888888888888, 0.5555555555555556],
    ),
    (
        &[-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526],
        &[0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538],
    ),
    (
        &[
            -0.9061798459386640,
            -0.5384693101056831,
            0.0,
            0.5384693101056831,
            0.9061798459386640,
        ],
        &[
            0.2369268850561891,
            0.4786286704993665,
            0.5688888888888889,
            0.4786286704993665,
            0.2369268850561891,
        ],
    ),
];

/// Interior quadrature rule on a polygon. Weights sum to the area.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl Quadrature {
    pub fn integrate(&self, mut f: impl FnMut(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, &w)| w * f(p.x, p.y))
            .sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Quadrature exact for polynomials up to `degree` on the polygon.
pub fn polygon_quadrature(poly: &Polygon, degree: usize) -> Result<Quadrature, GeometryError> {
    if degree > 8 {
        return Err(GeometryError::UnsupportedDegree(degree));
    }
    // Collapsed square: x-direction picks up one extra degree from the
    // Jacobian, so n points must integrate degree+1 exactly.
    let n_gauss = (degree + 2).div_ceil(2);
    let (nodes, wts) = GAUSS[n_gauss - 1];
    // Map to [0,1].
    let u: Vec<f64> = nodes.iter().map(|x| 0.5 * (x + 1.0)).collect();
    let wu: Vec<f64> = wts.iter().map(|w| 0.5 * w).collect();

    let c = poly.centroid();
    let nv = poly.num_vertices();
    let mut points = Vec::with_capacity(nv * n_gauss * n_gauss);
    let mut weights = Vec::with_capacity(nv * n_gauss * n_gauss);
    for e in 0..nv {
        let (p, q) = poly.edge(e);
        let ta = 0.5 * super::cross(p - c, q - c);
        if ta == 0.0 {
            continue;
        }
        for (i, &ui) in u.iter().enumerate() {
            for (j, &vj) in u.iter().enumerate() {
                // Duffy map of the unit square onto the reference triangle.
                let xi = ui;
                let eta = vj * (1.0 - ui);
                let x = c.coords + (p.coords - c.coords) * xi + (q.coords - c.coords) * eta;
                points.push(Point2::from(x));
                weights.push(2.0 * ta * wu[i] * wu[j] * (1.0 - ui));
            }
        }
    }
    Ok(Quadrature { points, weights, degree })
}

/// Scaled monomial basis `((x - centroid)/h)^alpha` on a polygon,
/// ordered by total degree: 1, xi, eta, xi^2, xi*eta, eta^2.
#[derive(Debug, Clone)]
pub struct ScaledMonomials {
    centroid: Point2,
    h: f64,
    degree: usize,
}

pub fn scaled_monomials(poly: &Polygon, ell: usize) -> ScaledMonomials {
    ScaledMonomials::new(poly, ell)
}

impl ScaledMonomials {
    pub fn new(poly: &Polygon, degree: usize) -> Self {
        debug_assert!(degree <= 2);
        Self { centroid: poly.centroid(), h: poly.diameter(), degree }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Basis size for polynomials up to `deg`.
    pub fn count_for(deg: usize) -> usize {
        (deg + 1) * (deg + 2) / 2
    }

    pub fn count(&self) -> usize {
        Self::count_for(self.degree)
    }

    #[inline]
    fn xi(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.centroid.x) / self.h, (y - self.centroid.y) / self.h)
    }

    pub fn eval(&self, i: usize, x: f64, y: f64) -> f64 {
        let (xi, eta) = self.xi(x, y);
        match i {
            0 => 1.0,
            1 => xi,
            2 => eta,
            3 => xi * xi,
            4 => xi * eta,
            5 => eta * eta,
            _ => unreachable!("monomial index out of range"),
        }
    }

    pub fn grad(&self, i: usize, x: f64, y: f64) -> Vec2 {
        let (xi, eta) = self.xi(x, y);
        let g = match i {
            0 => (0.0, 0.0),
            1 => (1.0, 0.0),
            2 => (0.0, 1.0),
            3 => (2.0 * xi, 0.0),
            4 => (eta, xi),
            5 => (0.0, 2.0 * eta),
            _ => unreachable!("monomial index out of range"),
        };
        Vec2::new(g.0 / self.h, g.1 / self.h)
    }

    /// Laplacian of basis member `i`; constant for degree <= 2.
    pub fn laplacian(&self, i: usize) -> f64 {
        match i {
            3 | 5 => 2.0 / (self.h * self.h),
            _ => 0.0,
        }
    }

    /// Derivative of the polynomial with coefficients `coeffs` (in this
    /// basis) along coordinate `axis`, expressed in the same basis one
    /// degree down.
    pub fn poly_derivative(&self, coeffs: &[f64], axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; Self::count_for(self.degree.saturating_sub(1))];
        for (i, &c) in coeffs.iter().enumerate() {
            match (i, axis) {
                (1, 0) | (2, 1) => out[0] += c / self.h,
                (3, 0) => out[1] += 2.0 * c / self.h,
                (4, 0) => out[2] += c / self.h,
                (4, 1) => out[1] += c / self.h,
                (5, 1) => out[2] += 2.0 * c / self.h,
                _ => {}
            }
        }
        out
    }

    /// Evaluate the polynomial with the given coefficients.
    pub fn eval_poly(&self, coeffs: &[f64], x: f64, y: f64) -> f64 {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * self.eval(i, x, y))
            .sum()
    }

    /// Gradient of the polynomial with the given coefficients.
    pub fn eval_poly_grad(&self, coeffs: &[f64], x: f64, y: f64) -> Vec2 {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| self.grad(i, x, y) * c)
            .fold(Vec2::zeros(), |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{divergence_monomial_integral, random_convex_polygon, unit_square};
    use approx::assert_relative_eq;

    #[test]
    fn constant_integrates_to_area() {
        let sq = unit_square();
        for deg in 0..=8 {
            let q = polygon_quadrature(&sq, deg).unwrap();
            assert_relative_eq!(q.integrate(|_, _| 1.0), 1.0, max_relative = 1e-13);
            assert_relative_eq!(q.total_weight(), sq.area(), max_relative = 1e-13);
        }
    }

    #[test]
    fn unit_square_x2y() {
        let sq = unit_square();
        let q = polygon_quadrature(&sq, 3).unwrap();
        assert_relative_eq!(q.integrate(|x, y| x * x * y), 1.0 / 6.0, max_relative = 1e-13);
    }

    #[test]
    fn degree_above_eight_rejected() {
        let sq = unit_square();
        assert!(matches!(
            polygon_quadrature(&sq, 9),
            Err(GeometryError::UnsupportedDegree(9))
        ));
    }

    #[test]
    fn exact_for_all_supported_monomials() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let poly = random_convex_polygon(&mut rng);
            for deg in 0..=8usize {
                let q = polygon_quadrature(&poly, deg).unwrap();
                for a in 0..=deg as u32 {
                    for b in 0..=(deg as u32 - a) {
                        let exact = divergence_monomial_integral(&poly, a, b);
                        let approx_val = q.integrate(|x, y| x.powi(a as i32) * y.powi(b as i32));
                        let scale = exact.abs().max(poly.area());
                        assert!(
                            (approx_val - exact).abs() <= 1e-12 * scale,
                            "deg {deg} monomial x^{a} y^{b}: {approx_val} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn scaled_monomials_on_unit_square() {
        let sq = unit_square();
        let m = ScaledMonomials::new(&sq, 1);
        assert_eq!(m.count(), 3);
        let h = sq.diameter();
        assert_relative_eq!(h, std::f64::consts::SQRT_2, max_relative = 1e-15);
        assert_eq!(m.eval(0, 0.3, 0.9), 1.0);
        assert_relative_eq!(m.eval(1, 0.3, 0.9), (0.3 - 0.5) / h, max_relative = 1e-14);
        assert_relative_eq!(m.eval(2, 0.3, 0.9), (0.9 - 0.5) / h, max_relative = 1e-14);
    }

    #[test]
    fn monomial_gradients_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let fd = 1e-6;
        for _ in 0..20 {
            let poly = random_convex_polygon(&mut rng);
            let m = ScaledMonomials::new(&poly, 2);
            for i in 0..m.count() {
                let x = rng.gen_range(-1.0..1.0);
                let y = rng.gen_range(-1.0..1.0);
                let g = m.grad(i, x, y);
                let gx = (m.eval(i, x + fd, y) - m.eval(i, x - fd, y)) / (2.0 * fd);
                let gy = (m.eval(i, x, y + fd) - m.eval(i, x, y - fd)) / (2.0 * fd);
                assert!((g.x - gx).abs() <= 1e-6, "monomial {i} d/dx: {} vs {gx}", g.x);
                assert!((g.y - gy).abs() <= 1e-6, "monomial {i} d/dy: {} vs {gy}", g.y);
            }
        }
    }

    #[test]
    fn poly_derivative_consistent_with_grad() {
        let sq = unit_square();
        let m = ScaledMonomials::new(&sq, 2);
        let coeffs = [0.3, -1.2, 0.7, 2.0, -0.5, 1.1];
        let dx = m.poly_derivative(&coeffs, 0);
        let dy = m.poly_derivative(&coeffs, 1);
        let m1 = ScaledMonomials::new(&sq, 1);
        for (x, y) in [(0.1, 0.2), (0.9, 0.4), (0.5, 0.5)] {
            let g = m.eval_poly_grad(&coeffs, x, y);
            assert_relative_eq!(m1.eval_poly(&dx, x, y), g.x, max_relative = 1e-13);
            assert_relative_eq!(m1.eval_poly(&dy, x, y), g.y, max_relative = 1e-13);
        }
    }
}
