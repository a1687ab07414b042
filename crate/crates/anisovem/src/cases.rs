//! Manufactured Poisson problems on the unit square with homogeneous
//! Dirichlet conditions: three boundary-layer cases plus polynomial
//! smoke cases for patch testing.
//!
//! Gradients and forcing terms are derived by hand; a finite-difference
//! invariant test guards the derivations.

use crate::geometry::Vec2;

/// A manufactured problem: exact solution, analytic gradient and the
/// forcing `f = -laplace(u)`.
#[derive(Clone, Copy)]
pub struct TestCase {
    pub name: &'static str,
    pub u: fn(f64, f64) -> f64,
    pub grad: fn(f64, f64) -> Vec2,
    pub forcing: fn(f64, f64) -> f64,
    /// Whether `u` vanishes on the boundary of (0,1)^2.
    pub homogeneous: bool,
}

impl TestCase {
    pub fn by_name(name: &str) -> Option<TestCase> {
        match name {
            "1" | "case1" => Some(case1()),
            "2" | "case2" => Some(case2()),
            "3" | "case3" => Some(case3()),
            "patch" | "patch-linear" => Some(patch_linear()),
            "patch-quadratic" => Some(patch_quadratic()),
            _ => None,
        }
    }
}

// Shared factor of cases 1 and 2: X(x) = x(1-x)(e^{10x} - 1).
fn layer_x(x: f64) -> f64 {
    x * (1.0 - x) * ((10.0 * x).exp() - 1.0)
}

fn layer_x_d1(x: f64) -> f64 {
    let e = (10.0 * x).exp();
    (1.0 - 2.0 * x) * (e - 1.0) + x * (1.0 - x) * 10.0 * e
}

fn layer_x_d2(x: f64) -> f64 {
    let e = (10.0 * x).exp();
    -2.0 * (e - 1.0) + 20.0 * (1.0 - 2.0 * x) * e + 100.0 * x * (1.0 - x) * e
}

/// Peak in the top-right corner with boundary layers in both directions.
pub fn case1() -> TestCase {
    const C: f64 = 1e-6;
    fn fy(y: f64) -> f64 {
        (1.0 - y) * ((10.0 * y).exp() - 1.0)
    }
    fn fy_d1(y: f64) -> f64 {
        let e = (10.0 * y).exp();
        -(e - 1.0) + (1.0 - y) * 10.0 * e
    }
    fn fy_d2(y: f64) -> f64 {
        let e = (10.0 * y).exp();
        -20.0 * e + 100.0 * (1.0 - y) * e
    }
    fn u(x: f64, y: f64) -> f64 {
        C * layer_x(x) * fy(y)
    }
    fn grad(x: f64, y: f64) -> Vec2 {
        Vec2::new(C * layer_x_d1(x) * fy(y), C * layer_x(x) * fy_d1(y))
    }
    fn forcing(x: f64, y: f64) -> f64 {
        -C * (layer_x_d2(x) * fy(y) + layer_x(x) * fy_d2(y))
    }
    TestCase { name: "case1", u, grad, forcing, homogeneous: true }
}

/// Steep boundary layer in the x-direction near the right edge.
pub fn case2() -> TestCase {
    const C: f64 = 1e-2;
    fn fy(y: f64) -> f64 {
        y * (1.0 - y)
    }
    fn u(x: f64, y: f64) -> f64 {
        C * layer_x(x) * fy(y)
    }
    fn grad(x: f64, y: f64) -> Vec2 {
        Vec2::new(C * layer_x_d1(x) * fy(y), C * layer_x(x) * (1.0 - 2.0 * y))
    }
    fn forcing(x: f64, y: f64) -> f64 {
        -C * (layer_x_d2(x) * fy(y) - 2.0 * layer_x(x))
    }
    TestCase { name: "case2", u, grad, forcing, homogeneous: true }
}

/// Case 2 plus an isotropic interior bubble: layer on the right,
/// isotropic feature on the left.
pub fn case3() -> TestCase {
    const C: f64 = 1e-2;
    fn gx(x: f64) -> f64 {
        (10.0 * x).exp() - 5000.0 * x + 4499.0
    }
    fn gx_d1(x: f64) -> f64 {
        10.0 * (10.0 * x).exp() - 5000.0
    }
    fn gx_d2(x: f64) -> f64 {
        100.0 * (10.0 * x).exp()
    }
    // X3(x) = x(x-1) g(x), Y3(y) = y(y-1).
    fn x3(x: f64) -> f64 {
        x * (x - 1.0) * gx(x)
    }
    fn x3_d1(x: f64) -> f64 {
        (2.0 * x - 1.0) * gx(x) + x * (x - 1.0) * gx_d1(x)
    }
    fn x3_d2(x: f64) -> f64 {
        2.0 * gx(x) + 2.0 * (2.0 * x - 1.0) * gx_d1(x) + x * (x - 1.0) * gx_d2(x)
    }
    fn u(x: f64, y: f64) -> f64 {
        C * x3(x) * y * (y - 1.0)
    }
    fn grad(x: f64, y: f64) -> Vec2 {
        Vec2::new(C * x3_d1(x) * y * (y - 1.0), C * x3(x) * (2.0 * y - 1.0))
    }
    fn forcing(x: f64, y: f64) -> f64 {
        -C * (x3_d2(x) * y * (y - 1.0) + 2.0 * x3(x))
    }
    TestCase { name: "case3", u, grad, forcing, homogeneous: true }
}

/// The isotropic bubble that case 3 adds on top of case 2.
pub fn case3_bubble(x: f64, y: f64) -> f64 {
    50.0 * x * (1.0 - y) * y * (0.9 - x) * (1.0 - x)
}

/// Linear solution with interpolated boundary values; zero forcing.
pub fn patch_linear() -> TestCase {
    fn u(x: f64, y: f64) -> f64 {
        0.5 + 1.25 * x - 0.75 * y
    }
    fn grad(_x: f64, _y: f64) -> Vec2 {
        Vec2::new(1.25, -0.75)
    }
    fn forcing(_x: f64, _y: f64) -> f64 {
        0.0
    }
    TestCase { name: "patch-linear", u, grad, forcing, homogeneous: false }
}

/// Quadratic solution with interpolated boundary values and constant
/// forcing.
pub fn patch_quadratic() -> TestCase {
    fn u(x: f64, y: f64) -> f64 {
        x * x + x * y + y * y - 0.5 * x + 0.25 * y
    }
    fn grad(x: f64, y: f64) -> Vec2 {
        Vec2::new(2.0 * x + y - 0.5, x + 2.0 * y + 0.25)
    }
    fn forcing(_x: f64, _y: f64) -> f64 {
        -4.0
    }
    TestCase { name: "patch-quadratic", u, grad, forcing, homogeneous: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn fd_laplacian(u: fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
        (u(x + h, y) + u(x - h, y) + u(x, y + h) + u(x, y - h) - 4.0 * u(x, y)) / (h * h)
    }

    fn fd_gradient(u: fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> Vec2 {
        Vec2::new(
            (u(x + h, y) - u(x - h, y)) / (2.0 * h),
            (u(x, y + h) - u(x, y - h)) / (2.0 * h),
        )
    }

    fn check_case(case: &TestCase) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let h = 1e-4;
        let mut max_f = 0.0f64;
        let mut max_u = 0.0f64;
        for _ in 0..1000 {
            let x = rng.gen_range(2.0 * h..1.0 - 2.0 * h);
            let y = rng.gen_range(2.0 * h..1.0 - 2.0 * h);
            max_f = max_f.max((case.forcing)(x, y).abs());
            max_u = max_u.max((case.u)(x, y).abs());
        }
        // Cancellation noise floor of the finite-difference Laplacian.
        let fd_noise = 100.0 * f64::EPSILON * max_u / (h * h);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(100);
        for _ in 0..1000 {
            let x = rng.gen_range(2.0 * h..1.0 - 2.0 * h);
            let y = rng.gen_range(2.0 * h..1.0 - 2.0 * h);
            let f = (case.forcing)(x, y);
            let fd = -fd_laplacian(case.u, x, y, h);
            assert!(
                (f - fd).abs() <= (1e-4 * max_f).max(fd_noise),
                "{}: forcing mismatch at ({x},{y}): {f} vs {fd}",
                case.name
            );
            let g = (case.grad)(x, y);
            let gfd = fd_gradient(case.u, x, y, 1e-6);
            let gs = g.norm().max(1e-9);
            assert!((g - gfd).norm() <= 1e-4 * gs, "{}: gradient mismatch", case.name);
        }
    }

    fn check_boundary_vanishes(case: &TestCase) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut umax = 0.0f64;
        for i in 0..100 {
            let t = i as f64 / 99.0;
            umax = umax.max((case.u)(t, t).abs());
        }
        for _ in 0..1000 {
            let t: f64 = rng.gen_range(0.0..1.0);
            for (x, y) in [(t, 0.0), (t, 1.0), (0.0, t), (1.0, t)] {
                assert!(
                    (case.u)(x, y).abs() <= 1e-12 * umax.max(1e-300),
                    "{} does not vanish at ({x},{y})",
                    case.name
                );
            }
        }
    }

    #[test]
    fn case1_consistency() {
        let c = case1();
        check_case(&c);
        check_boundary_vanishes(&c);
        // Peak sits towards the top-right corner.
        assert!((c.u)(0.9, 0.9) > (c.u)(0.5, 0.5));
        assert!((c.u)(0.5, 0.5) > 0.0);
    }

    #[test]
    fn case2_consistency() {
        let c = case2();
        check_case(&c);
        check_boundary_vanishes(&c);
        // Boundary layer in x near the right edge: du/dx dominates there.
        let g = (c.grad)(0.95, 0.5);
        assert!(g.x.abs() > 5.0 * g.y.abs());
        // Data stays finite on the closed square.
        for i in 0..=20 {
            for j in 0..=20 {
                assert!((c.forcing)(i as f64 / 20.0, j as f64 / 20.0).is_finite());
            }
        }
    }

    #[test]
    fn case3_consistency() {
        let c = case3();
        check_case(&c);
        check_boundary_vanishes(&c);
        // Case 3 = case 2 + isotropic bubble.
        let c2 = case2();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let x: f64 = rng.gen_range(0.0..1.0);
            let y: f64 = rng.gen_range(0.0..1.0);
            let lhs = (c.u)(x, y);
            let rhs = (c2.u)(x, y) + case3_bubble(x, y);
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        }
        // Interior extremum of the bubble on the left part of the domain.
        let mut best = (0.0, 0.0);
        for i in 1..100 {
            let x = i as f64 / 100.0;
            let v = (c.u)(x, 0.5).abs();
            if v > best.1 && x < 0.8 {
                best = (x, v);
            }
        }
        assert!((best.0 - 0.45).abs() < 0.15, "bubble extremum near x=0.45, got {}", best.0);
    }

    #[test]
    fn patch_cases_consistent() {
        check_case(&patch_linear());
        check_case(&patch_quadratic());
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(TestCase::by_name("1").unwrap().name, "case1");
        assert_eq!(TestCase::by_name("patch").unwrap().name, "patch-linear");
        assert!(TestCase::by_name("42").is_none());
    }
}
