//! Element-local virtual element construction.
//!
//! For a cell K with scaled monomial basis M_k the builder assembles
//! the classical ingredients:
//! - `D`: DOF values of the monomials,
//! - `B`: energy pairings a(m, phi_i), computable from boundary traces
//!   (trapezoid rule for order 1, Simpson for order 2) plus the cell
//!   average, with the constant row replaced by the mean value,
//! - `G = B D` and the energy projector `proj_poly = G^-1 B`,
//! - the L2 gradient projector onto (M_{k-1})^2 per component,
//! - stiffness = consistency (projected gradients against the monomial
//!   mass matrix) + the plain dofi-dofi stabilisation of `I - Pi`,
//! - the load vector of the piecewise-constant data approximation.

use super::VemError;
use crate::geometry::{polygon_quadrature, ScaledMonomials};
use crate::mesh::Mesh;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct LocalElement {
    pub cell: usize,
    pub order: usize,
    pub n_dofs: usize,
    /// Scaled monomials of degree `order` on this cell; the gradient
    /// space M_{order-1} is its prefix.
    pub monomials: ScaledMonomials,
    /// Coefficients of the energy projection of each basis function,
    /// n_k x N.
    pub proj_poly: DMatrix<f64>,
    /// The same projector expressed in DOF values, N x N.
    pub proj_dof: DMatrix<f64>,
    /// Coefficients of the L2-projected gradient components, n_{k-1} x N.
    pub grad_x: DMatrix<f64>,
    pub grad_y: DMatrix<f64>,
    /// Local stiffness: consistency + stabilisation.
    pub stiffness: DMatrix<f64>,
    /// Stabilisation quadratic form (I - Pi)^T (I - Pi).
    pub stab: DMatrix<f64>,
    /// Load vector for the piecewise-constant data surrogate.
    pub load: DVector<f64>,
    /// Cell mean of the forcing data.
    pub f_bar: f64,
}

impl LocalElement {
    pub fn build(
        mesh: &Mesh,
        cell_id: usize,
        order: usize,
        f: &dyn Fn(f64, f64) -> f64,
        data_degree: usize,
    ) -> Result<Self, VemError> {
        assert!(order == 1 || order == 2);
        let poly = &mesh.cell(cell_id).polygon;
        let n = poly.num_vertices();
        let n_dofs = if order == 1 { n } else { 2 * n + 1 };
        let nk = ScaledMonomials::count_for(order);
        let nk1 = ScaledMonomials::count_for(order - 1);
        let mono = ScaledMonomials::new(poly, order);
        let area = poly.area();

        // Cell averages of the monomials (exact: degree <= 2).
        let quad2 = polygon_quadrature(poly, 2)?;
        let mono_avg: Vec<f64> =
            (0..nk).map(|a| quad2.integrate(|x, y| mono.eval(a, x, y)) / area).collect();

        // D: DOF values of the monomials.
        let mut d = DMatrix::zeros(n_dofs, nk);
        for (i, &v) in mesh.cell(cell_id).vertex_ids.iter().enumerate() {
            let p = mesh.vertex(v);
            for a in 0..nk {
                d[(i, a)] = mono.eval(a, p.x, p.y);
            }
        }
        if order == 2 {
            for e in 0..n {
                let (p, q) = poly.edge(e);
                let mx = 0.5 * (p.x + q.x);
                let my = 0.5 * (p.y + q.y);
                for a in 0..nk {
                    d[(n + e, a)] = mono.eval(a, mx, my);
                }
            }
            for a in 0..nk {
                d[(2 * n, a)] = mono_avg[a];
            }
        }

        // B: first row carries the mean-value constraint, the remaining
        // rows the energy pairings from the divergence theorem.
        let mut b = DMatrix::zeros(nk, n_dofs);
        if order == 1 {
            for i in 0..n {
                b[(0, i)] = 1.0 / n as f64;
            }
        } else {
            b[(0, 2 * n)] = 1.0;
        }
        for a in 1..nk {
            // Volume part: -int_K laplacian(m_a) phi_i.
            let lap = mono.laplacian(a);
            if lap != 0.0 && order == 2 {
                b[(a, 2 * n)] -= lap * area;
            }
            for e in 0..n {
                let (p, q) = poly.edge(e);
                let len = poly.edge_length(e);
                let nrm = poly.outward_normal(e);
                if order == 1 {
                    // Gradient constant, trace linear: trapezoid.
                    let g = mono.grad(a, p.x, p.y).dot(&nrm);
                    b[(a, e)] += 0.5 * len * g;
                    b[(a, (e + 1) % n)] += 0.5 * len * g;
                } else {
                    // Gradient linear, trace quadratic: Simpson.
                    let gp = mono.grad(a, p.x, p.y).dot(&nrm);
                    let gq = mono.grad(a, q.x, q.y).dot(&nrm);
                    let gm = mono
                        .grad(a, 0.5 * (p.x + q.x), 0.5 * (p.y + q.y))
                        .dot(&nrm);
                    b[(a, e)] += len / 6.0 * gp;
                    b[(a, (e + 1) % n)] += len / 6.0 * gq;
                    b[(a, n + e)] += 4.0 * len / 6.0 * gm;
                }
            }
        }

        let g_mat = &b * &d;
        let lu = g_mat.clone().lu();
        let proj_poly = lu
            .solve(&b)
            .filter(|m| m.iter().all(|v| v.is_finite()))
            .ok_or(VemError::IllConditionedElement { cell: cell_id })?;
        let proj_dof = &d * &proj_poly;

        // L2 projection of the gradient onto (M_{k-1})^2, component-wise:
        // int_K (d_x v) m_b = -int_K v d_x m_b + bnd v m_b n_x.
        let mut rhs_x = DMatrix::zeros(nk1, n_dofs);
        let mut rhs_y = DMatrix::zeros(nk1, n_dofs);
        for bi in 0..nk1 {
            for e in 0..n {
                let (p, q) = poly.edge(e);
                let len = poly.edge_length(e);
                let nrm = poly.outward_normal(e);
                if order == 1 {
                    let mp = mono.eval(bi, p.x, p.y);
                    let mq = mono.eval(bi, q.x, q.y);
                    rhs_x[(bi, e)] += 0.5 * len * nrm.x * mp;
                    rhs_x[(bi, (e + 1) % n)] += 0.5 * len * nrm.x * mq;
                    rhs_y[(bi, e)] += 0.5 * len * nrm.y * mp;
                    rhs_y[(bi, (e + 1) % n)] += 0.5 * len * nrm.y * mq;
                } else {
                    let (mx, my) = (0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
                    let mp = mono.eval(bi, p.x, p.y);
                    let mq = mono.eval(bi, q.x, q.y);
                    let mm = mono.eval(bi, mx, my);
                    rhs_x[(bi, e)] += len / 6.0 * nrm.x * mp;
                    rhs_x[(bi, (e + 1) % n)] += len / 6.0 * nrm.x * mq;
                    rhs_x[(bi, n + e)] += 4.0 * len / 6.0 * nrm.x * mm;
                    rhs_y[(bi, e)] += len / 6.0 * nrm.y * mp;
                    rhs_y[(bi, (e + 1) % n)] += len / 6.0 * nrm.y * mq;
                    rhs_y[(bi, n + e)] += 4.0 * len / 6.0 * nrm.y * mm;
                }
            }
        }
        if order == 2 {
            // Volume terms: only the linear monomials have nonzero
            // derivatives, constant 1/h, hitting the average DOF.
            let h = poly.diameter();
            rhs_x[(1, 2 * n)] -= area / h;
            rhs_y[(2, 2 * n)] -= area / h;
        }

        // Mass matrix of M_{k-1} (exact at degree 2(k-1) <= 2).
        let mut h_mass = DMatrix::zeros(nk1, nk1);
        for a in 0..nk1 {
            for c in a..nk1 {
                let v = quad2.integrate(|x, y| mono.eval(a, x, y) * mono.eval(c, x, y));
                h_mass[(a, c)] = v;
                h_mass[(c, a)] = v;
            }
        }
        let h_lu = h_mass.clone().lu();
        let grad_x = h_lu
            .solve(&rhs_x)
            .ok_or(VemError::IllConditionedElement { cell: cell_id })?;
        let grad_y = h_lu
            .solve(&rhs_y)
            .ok_or(VemError::IllConditionedElement { cell: cell_id })?;

        let consistency = grad_x.transpose() * &h_mass * &grad_x
            + grad_y.transpose() * &h_mass * &grad_y;
        let eye = DMatrix::identity(n_dofs, n_dofs);
        let residual_op = &eye - &proj_dof;
        let stab = residual_op.transpose() * &residual_op;
        let stiffness = consistency + &stab;

        // Piecewise-constant data: f_bar = mean of f over the cell.
        let quad_f = polygon_quadrature(poly, data_degree)?;
        let f_bar = quad_f.integrate(|x, y| f(x, y)) / area;
        let mut load = DVector::zeros(n_dofs);
        if order == 1 {
            let w = f_bar * area / n as f64;
            for i in 0..n {
                load[i] = w;
            }
        } else {
            load[2 * n] = f_bar * area;
        }

        Ok(Self {
            cell: cell_id,
            order,
            n_dofs,
            monomials: mono,
            proj_poly,
            proj_dof,
            grad_x,
            grad_y,
            stiffness,
            stab,
            load,
            f_bar,
        })
    }

    /// Coefficients (in the cell monomial basis) of the energy
    /// projection of the local DOF vector.
    pub fn value_coeffs(&self, u_loc: &DVector<f64>) -> Vec<f64> {
        (&self.proj_poly * u_loc).iter().cloned().collect()
    }

    /// Coefficients of the projected gradient components in M_{k-1}.
    pub fn grad_coeffs(&self, u_loc: &DVector<f64>) -> [Vec<f64>; 2] {
        [
            (&self.grad_x * u_loc).iter().cloned().collect(),
            (&self.grad_y * u_loc).iter().cloned().collect(),
        ]
    }

    /// Stabilisation energy of the non-polynomial part: the sum of the
    /// squared DOF values of (I - Pi) u. Evaluated residual-first, which
    /// cancels exactly on polynomial inputs where the precomputed
    /// quadratic form would leave matrix-entry roundoff behind.
    pub fn sigma_tilde_sq(&self, u_loc: &DVector<f64>) -> f64 {
        let w = u_loc - &self.proj_dof * u_loc;
        w.dot(&w)
    }

    /// Divergence of the projected gradient field, a constant for the
    /// supported orders.
    pub fn projected_grad_divergence(&self, grad_coeffs: &[Vec<f64>; 2]) -> f64 {
        if self.order == 1 {
            return 0.0;
        }
        let dx = self.monomials.poly_derivative_of_prefix(&grad_coeffs[0], 0);
        let dy = self.monomials.poly_derivative_of_prefix(&grad_coeffs[1], 1);
        dx + dy
    }
}

impl ScaledMonomials {
    /// Constant derivative of a degree-1 polynomial given by prefix
    /// coefficients [1, xi, eta].
    fn poly_derivative_of_prefix(&self, coeffs: &[f64], axis: usize) -> f64 {
        if coeffs.len() < 3 {
            return 0.0;
        }
        // d/dx xi = 1/h, d/dy eta = 1/h at any point of the cell.
        let g = self.grad(1 + axis, 0.0, 0.0);
        coeffs[1 + axis] * if axis == 0 { g.x } else { g.y }
    }
}

/// Builds every local element of the mesh.
pub fn build_elements(
    mesh: &Mesh,
    order: usize,
    f: &dyn Fn(f64, f64) -> f64,
    data_degree: usize,
) -> Result<Vec<LocalElement>, VemError> {
    (0..mesh.num_cells())
        .map(|c| LocalElement::build(mesh, c, order, f, data_degree))
        .collect()
}
