//! Zienkiewicz-Zhu gradient recovery and the error-gradient tensors.
//!
//! Three stages:
//! 1. area-weighted averaging of the projected cell gradients at every
//!    vertex (one-sided at the boundary);
//! 2. a per-cell least-squares polynomial fit of those vertex values
//!    (linear for order 1, quadratic for order 2, degrading gracefully
//!    on rank deficiency);
//! 3. per-cell outer-product integrals of the deviation between the raw
//!    projected gradient and the fit, accumulated over vertex-neighbour
//!    patches into the tensors that weight the anisotropic indicators.

use crate::geometry::{polygon_quadrature, GeometryError, Mat2, ScaledMonomials, Vec2};
use crate::mesh::Mesh;
use crate::vem::{LocalElement, ProjectedSolution};
use nalgebra::{DMatrix, DVector};

/// Componentwise polynomial fit of the recovered gradient on one cell,
/// in the cell's scaled monomial basis.
#[derive(Debug, Clone)]
pub struct CellGradientFit {
    pub coeffs: [Vec<f64>; 2],
    /// Degree actually used after rank checks.
    pub degree: usize,
}

#[derive(Debug, Clone)]
pub struct Recovery {
    /// Recovered gradient at every mesh vertex.
    pub vertex_gradient: Vec<Vec2>,
    pub fits: Vec<CellGradientFit>,
    /// Per-cell integrals of the outer product of the recovery deviation.
    pub local_tensor: Vec<Mat2>,
    /// Patch-accumulated error-gradient tensor per cell.
    pub g_tensor: Vec<Mat2>,
}

/// Gradient of the projected value polynomial of cell `ci`, evaluated at
/// a point. This is the raw field the recovery smooths.
fn cell_gradient_at(el: &LocalElement, proj: &ProjectedSolution, ci: usize, x: f64, y: f64) -> Vec2 {
    el.monomials.eval_poly_grad(&proj.cells[ci].value, x, y)
}

/// Area-weighted vertex averaging of the projected cell gradients.
/// Boundary vertices use the same one-sided formula.
pub fn zz_vertex_average(
    mesh: &Mesh,
    elements: &[LocalElement],
    proj: &ProjectedSolution,
) -> Vec<Vec2> {
    let incidence = mesh.vertex_cell_incidence();
    let mut out = Vec::with_capacity(mesh.num_vertices());
    for (v, cells) in incidence.iter().enumerate() {
        let p = mesh.vertex(v);
        let mut acc = Vec2::zeros();
        let mut total = 0.0;
        for &ci in cells {
            let area = mesh.cell(ci).polygon.area();
            acc += cell_gradient_at(&elements[ci], proj, ci, p.x, p.y) * area;
            total += area;
        }
        out.push(if total > 0.0 { acc / total } else { Vec2::zeros() });
    }
    out
}

/// Least-squares fit of the recovered vertex values over one cell onto
/// polynomials of degree `target` in the cell's scaled monomials. Rank
/// deficiency degrades the degree; degree 0 is the plain mean.
pub fn zz_cell_fit(
    mesh: &Mesh,
    vertex_values: &[Vec2],
    cell: usize,
    target_degree: usize,
) -> CellGradientFit {
    let poly = &mesh.cell(cell).polygon;
    let ids = &mesh.cell(cell).vertex_ids;
    let mono = ScaledMonomials::new(poly, target_degree.min(2));
    let n = ids.len();

    for degree in (0..=target_degree.min(2)).rev() {
        let m = ScaledMonomials::count_for(degree);
        if m > n {
            continue;
        }
        let vandermonde = DMatrix::from_fn(n, m, |i, j| {
            let p = mesh.vertex(ids[i]);
            mono.eval(j, p.x, p.y)
        });
        let svd = vandermonde.clone().svd(true, true);
        let smax = svd.singular_values.max();
        if svd.rank(1e-10 * smax) < m {
            continue;
        }
        let mut coeffs: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        let mut ok = true;
        for (axis, slot) in coeffs.iter_mut().enumerate() {
            let rhs = DVector::from_iterator(n, ids.iter().map(|&v| vertex_values[v][axis]));
            match svd.solve(&rhs, 1e-10 * smax) {
                Ok(c) if c.iter().all(|v| v.is_finite()) => *slot = c.iter().cloned().collect(),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return CellGradientFit { coeffs, degree };
        }
    }
    // Mean fallback.
    let mut mean = Vec2::zeros();
    for &v in ids {
        mean += vertex_values[v];
    }
    mean /= n as f64;
    CellGradientFit { coeffs: [vec![mean.x], vec![mean.y]], degree: 0 }
}

/// Full recovery pass: vertex averages, per-cell fits, local deviation
/// tensors and the patch sums.
pub fn recover(
    mesh: &Mesh,
    elements: &[LocalElement],
    proj: &ProjectedSolution,
    order: usize,
) -> Result<Recovery, GeometryError> {
    let vertex_gradient = zz_vertex_average(mesh, elements, proj);
    let fits: Vec<CellGradientFit> = (0..mesh.num_cells())
        .map(|c| zz_cell_fit(mesh, &vertex_gradient, c, order))
        .collect();

    // Local outer-product integrals of (raw gradient - fit), by positive
    // quadrature: the tensor is symmetric PSD by construction.
    let mut local_tensor = Vec::with_capacity(mesh.num_cells());
    for (ci, el) in elements.iter().enumerate() {
        let poly = &mesh.cell(ci).polygon;
        let quad = polygon_quadrature(poly, 2 * order)?;
        let fit_mono = ScaledMonomials::new(poly, fits[ci].degree.min(2));
        let mut t = Mat2::zeros();
        for (p, &w) in quad.points.iter().zip(&quad.weights) {
            let raw = cell_gradient_at(el, proj, ci, p.x, p.y);
            let fitted = Vec2::new(
                fit_mono.eval_poly(&fits[ci].coeffs[0], p.x, p.y),
                fit_mono.eval_poly(&fits[ci].coeffs[1], p.x, p.y),
            );
            let eta = raw - fitted;
            t[(0, 0)] += w * eta.x * eta.x;
            t[(0, 1)] += w * eta.x * eta.y;
            t[(1, 1)] += w * eta.y * eta.y;
        }
        t[(1, 0)] = t[(0, 1)];
        local_tensor.push(t);
    }

    let incidence = mesh.vertex_cell_incidence();
    let g_tensor = (0..mesh.num_cells())
        .map(|ci| {
            let mut g = Mat2::zeros();
            for k in mesh.cell_patch_from_incidence(ci, &incidence) {
                g += local_tensor[k];
            }
            g
        })
        .collect();

    Ok(Recovery { vertex_gradient, fits, local_tensor, g_tensor })
}
