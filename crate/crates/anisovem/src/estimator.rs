//! A posteriori error indicators: the anisotropically weighted residual
//! and flux-jump terms, the stabilisation terms with and without the
//! eigenvalue-ratio scaling, and the plain isotropic estimator used for
//! comparison runs.
//!
//! Cell terms pair the L2 norm of the interior residual with a
//! directional weight built from the cell covariance eigenpairs and the
//! recovered error-gradient tensor. Edge terms pair the flux-jump norm
//! with the maximum of the incident cells' weights scaled by
//! `sqrt(|E|/|K|)`. Marking attributes half of each interior edge term
//! to each incident cell.

use crate::geometry::{anisotropy_map, AnisotropyInfo, GeometryError, Vec2};
use crate::mesh::Mesh;
use crate::recovery::Recovery;
use crate::vem::{DofMap, LocalElement, ProjectedSolution};
use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("anisotropic estimators need the recovered gradient tensors")]
    MissingGTensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Stabilisation scaled by the squared eigenvalue-ratio factor.
    Theory,
    /// Unscaled stabilisation.
    Heuristic,
    /// Residual/jump terms weighted by cell size only.
    Isotropic,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Theory => "theory",
            EstimatorKind::Heuristic => "heur",
            EstimatorKind::Isotropic => "iso",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "theory" => Some(Self::Theory),
            "heur" | "heuristic" => Some(Self::Heuristic),
            "iso" | "isotropic" => Some(Self::Isotropic),
            _ => None,
        }
    }

    pub fn needs_recovery(&self) -> bool {
        !matches!(self, EstimatorKind::Isotropic)
    }
}

/// Per-cell, per-edge and global indicator values for one estimator
/// kind.
#[derive(Debug, Clone)]
pub struct IndicatorSet {
    pub kind: EstimatorKind,
    /// ||R_K||_L2(K), the interior residual norm.
    pub residual_norm: Vec<f64>,
    /// Anisotropic directional weight w_K (zero for the isotropic kind).
    pub weight: Vec<f64>,
    /// Cell indicator entering the global sum (eta_K^2 or h^2 ||R||^2).
    pub cell_term: Vec<f64>,
    /// Unscaled stabilisation sigma~_K^2.
    pub sigma_tilde_sq: Vec<f64>,
    /// Scaled stabilisation sigma_K^2 = M_K^2 sigma~_K^2.
    pub sigma_sq: Vec<f64>,
    /// Ratio factor M_K = (lambda1/lambda2)^(5/4).
    pub m_factor: Vec<f64>,
    /// ||J_E||_L2(E) per edge (zero on boundary edges).
    pub jump_norm: Vec<f64>,
    /// Edge indicator entering the global sum (xi_E^2 or h_E ||J||^2).
    pub edge_term: Vec<f64>,
    /// Marking score per cell: cell term + stabilisation + half of each
    /// incident interior edge term.
    pub score: Vec<f64>,
    pub cell_sum: f64,
    pub edge_sum: f64,
    pub sigma_sum: f64,
    /// Global estimator value: sqrt of the sum of its components.
    pub global: f64,
}

/// L2 norm of the interior residual `f_bar + div(projected gradient)`;
/// both terms are cellwise constant for the supported orders.
pub fn residual_norm(el: &LocalElement, proj: &ProjectedSolution, area: f64) -> f64 {
    let div = el.projected_grad_divergence(&proj.cells[el.cell].grad);
    (el.f_bar + div).abs() * area.sqrt()
}

/// L2 norm over an edge of the jump of the normal component of the
/// projected gradient. Constant for order 1, linear for order 2; a
/// two-point Gauss rule is exact for both.
pub fn jump_norm(
    mesh: &Mesh,
    elements: &[LocalElement],
    proj: &ProjectedSolution,
    edge_id: usize,
) -> f64 {
    let edge = mesh.edge(edge_id);
    let Some(right) = edge.right else {
        return 0.0;
    };
    let a = mesh.vertex(edge.a);
    let b = mesh.vertex(edge.b);
    let t = b - a;
    let len = t.norm();
    let normal = Vec2::new(t.y, -t.x) / len;
    let gauss = 0.5 / 3.0f64.sqrt();
    let mut acc = 0.0;
    for s in [0.5 - gauss, 0.5 + gauss] {
        let p = a + t * s;
        let gl = grad_at(&elements[edge.left], proj, edge.left, p.x, p.y);
        let gr = grad_at(&elements[right], proj, right, p.x, p.y);
        let jump = (gl - gr).dot(&normal);
        acc += 0.5 * len * jump * jump;
    }
    acc.sqrt()
}

fn grad_at(el: &LocalElement, proj: &ProjectedSolution, ci: usize, x: f64, y: f64) -> Vec2 {
    let g = &proj.cells[ci].grad;
    Vec2::new(
        el.monomials.eval_poly(&g[0], x, y),
        el.monomials.eval_poly(&g[1], x, y),
    )
}

/// Stabilisation terms of one cell: (sigma~^2, sigma^2, M_K).
pub fn stabilization_term(
    sigma_tilde_sq: f64,
    aniso: &AnisotropyInfo,
) -> (f64, f64, f64) {
    let m_factor = aniso.ratio().powf(1.25);
    (sigma_tilde_sq, m_factor * m_factor * sigma_tilde_sq, m_factor)
}

/// Evaluates every indicator of the requested kind on the solved state.
pub fn estimate(
    mesh: &Mesh,
    dofmap: &DofMap,
    elements: &[LocalElement],
    u: &DVector<f64>,
    proj: &ProjectedSolution,
    recovery: Option<&Recovery>,
    kind: EstimatorKind,
) -> Result<IndicatorSet, EstimatorError> {
    if kind.needs_recovery() && recovery.is_none() {
        return Err(EstimatorError::MissingGTensor);
    }
    let _ = (dofmap, u);
    let nc = mesh.num_cells();
    let ne = mesh.num_edges();

    let mut aniso = Vec::with_capacity(nc);
    for cell in mesh.cells() {
        aniso.push(anisotropy_map(&cell.polygon)?);
    }

    let mut residual = Vec::with_capacity(nc);
    let mut weight = vec![0.0; nc];
    let mut cell_term = Vec::with_capacity(nc);
    let mut sigma_tilde_sq = Vec::with_capacity(nc);
    let mut sigma_sq = Vec::with_capacity(nc);
    let mut m_factor = Vec::with_capacity(nc);
    for ci in 0..nc {
        let poly = &mesh.cell(ci).polygon;
        let r = residual_norm(&elements[ci], proj, poly.area());
        residual.push(r);
        let st = proj.cells[ci].sigma_tilde_sq;
        let (stt, ss, mf) = stabilization_term(st, &aniso[ci]);
        sigma_tilde_sq.push(stt);
        sigma_sq.push(ss);
        m_factor.push(mf);
        let term = match kind {
            EstimatorKind::Isotropic => {
                let h = poly.diameter();
                h * h * r * r
            }
            _ => {
                let g = &recovery.unwrap().g_tensor[ci];
                let w = aniso[ci].directional_weight(g);
                weight[ci] = w;
                r * w
            }
        };
        cell_term.push(term);
    }

    let mut jump = Vec::with_capacity(ne);
    let mut edge_term = Vec::with_capacity(ne);
    for ei in 0..ne {
        let j = jump_norm(mesh, elements, proj, ei);
        jump.push(j);
        if j == 0.0 {
            edge_term.push(0.0);
            continue;
        }
        let edge = mesh.edge(ei);
        let len = mesh.edge_length(ei);
        let term = match kind {
            EstimatorKind::Isotropic => len * j * j,
            _ => {
                let rec = recovery.unwrap();
                let mut best = 0.0f64;
                for ci in [Some(edge.left), edge.right].into_iter().flatten() {
                    let poly = &mesh.cell(ci).polygon;
                    let w = aniso[ci].directional_weight(&rec.g_tensor[ci]);
                    best = best.max(w * (len / poly.area()).sqrt());
                }
                j * best
            }
        };
        edge_term.push(term);
    }

    // Stabilisation component entering the global value and the scores.
    let sigma_component = |ci: usize| match kind {
        EstimatorKind::Theory => sigma_sq[ci],
        _ => sigma_tilde_sq[ci],
    };

    let mut score: Vec<f64> = (0..nc).map(|ci| cell_term[ci] + sigma_component(ci)).collect();
    for ei in 0..ne {
        if edge_term[ei] == 0.0 {
            continue;
        }
        let edge = mesh.edge(ei);
        score[edge.left] += 0.5 * edge_term[ei];
        if let Some(r) = edge.right {
            score[r] += 0.5 * edge_term[ei];
        }
    }

    let cell_sum: f64 = cell_term.iter().sum();
    let edge_sum: f64 = edge_term.iter().sum();
    let sigma_sum: f64 = (0..nc).map(sigma_component).sum();
    let global = (cell_sum + edge_sum + sigma_sum).sqrt();

    Ok(IndicatorSet {
        kind,
        residual_norm: residual,
        weight,
        cell_term,
        sigma_tilde_sq,
        sigma_sq,
        m_factor,
        jump_norm: jump,
        edge_term,
        score,
        cell_sum,
        edge_sum,
        sigma_sum,
        global,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::geometry::{Mat2, Point2};
    use crate::mesh::{initial_mesh, Mesh};
    use crate::recovery::recover;
    use crate::vem::{assemble, build_elements, interpolate, project_solution, solve, DofMap};
    use approx::assert_relative_eq;

    struct State {
        mesh: Mesh,
        dofmap: DofMap,
        elements: Vec<LocalElement>,
        u: DVector<f64>,
        proj: ProjectedSolution,
        rec: Recovery,
    }

    fn solved_state(mesh: Mesh, order: usize, case: &cases::TestCase) -> State {
        let dofmap = DofMap::new(&mesh, order);
        let elements = build_elements(&mesh, order, &case.forcing, 2 * order + 2).unwrap();
        let system = assemble(&mesh, &dofmap, &elements, &case.u);
        let u = solve(&system, 1e-12).unwrap();
        let proj = project_solution(&dofmap, &elements, &u);
        let rec = recover(&mesh, &elements, &proj, order).unwrap();
        State { mesh, dofmap, elements, u, proj, rec }
    }

    #[test]
    fn residual_norm_constant_data() {
        // f = 3 on a cell of area 1/4 with order 1: ||R_K|| = 3 * 0.5.
        let mesh = initial_mesh(2);
        let elements = build_elements(&mesh, 1, &|_, _| 3.0, 2).unwrap();
        let dofmap = DofMap::new(&mesh, 1);
        let u = DVector::zeros(dofmap.n_dofs());
        let proj = project_solution(&dofmap, &elements, &u);
        for el in &elements {
            let r = residual_norm(el, &proj, mesh.cell(el.cell).polygon.area());
            assert_relative_eq!(r, 1.5, max_relative = 1e-13);
        }
        // Zero forcing gives zero residual.
        let el0 = build_elements(&mesh, 1, &|_, _| 0.0, 2).unwrap();
        assert_eq!(residual_norm(&el0[0], &proj, 0.25), 0.0);
    }

    #[test]
    fn jump_norm_hand_case() {
        // Two unit-height cells separated by a vertical edge of length
        // 1/2... use two 1x0.5 rectangles with gradients (1,0) and (0,0)
        // crossing a vertical edge of length 0.5: ||J|| = sqrt(0.5).
        let verts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 0.5),
            Point2::new(0.0, 0.5),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 0.5),
        ];
        let mesh = Mesh::from_cells(verts, vec![vec![0, 1, 2, 3], vec![1, 4, 5, 2]]).unwrap();
        let elements = build_elements(&mesh, 1, &|_, _| 0.0, 2).unwrap();
        let dofmap = DofMap::new(&mesh, 1);
        // u = x on the left cell, u = 1 on the right cell: gradients
        // (1,0) and (0,0). DOF values: x capped at 1.
        let u = DVector::from_iterator(
            dofmap.n_dofs(),
            mesh.vertices().iter().map(|p| p.x.min(1.0)),
        );
        let proj = project_solution(&dofmap, &elements, &u);
        let shared = (0..mesh.num_edges())
            .find(|&e| {
                let ed = mesh.edge(e);
                ed.right.is_some()
            })
            .unwrap();
        let j = jump_norm(&mesh, &elements, &proj, shared);
        assert_relative_eq!(j, 0.5f64.sqrt(), max_relative = 1e-12);
        // Boundary edges report zero.
        let b = (0..mesh.num_edges()).find(|&e| mesh.edge(e).is_boundary()).unwrap();
        assert_eq!(jump_norm(&mesh, &elements, &proj, b), 0.0);
    }

    #[test]
    fn m_factor_rectangle() {
        let verts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let mesh = Mesh::from_cells(verts, vec![vec![0, 1, 2, 3]]).unwrap();
        let aniso = anisotropy_map(&mesh.cell(0).polygon).unwrap();
        let (_st, _s, m) = stabilization_term(1.0, &aniso);
        assert_relative_eq!(m, 4.0f64.powf(1.25), max_relative = 1e-12);
        assert_relative_eq!(m, 2.0f64.powf(2.5), max_relative = 1e-12);
        // Isotropic cell: M = 1, sigma = sigma~.
        let sq = initial_mesh(1);
        let iso = anisotropy_map(&sq.cell(0).polygon).unwrap();
        let (st, s, m1) = stabilization_term(0.7, &iso);
        assert_eq!(m1, 1.0);
        assert_eq!(st, s);
    }

    #[test]
    fn polynomial_solution_zeroes_all_indicators() {
        // Linear exact solution, zero forcing: every indicator vanishes.
        let st = solved_state(initial_mesh(3), 1, &cases::patch_linear());
        for kind in [EstimatorKind::Theory, EstimatorKind::Heuristic, EstimatorKind::Isotropic] {
            let ind = estimate(
                &st.mesh, &st.dofmap, &st.elements, &st.u, &st.proj,
                Some(&st.rec), kind,
            )
            .unwrap();
            assert!(ind.global <= 1e-10, "{kind:?} global {}", ind.global);
        }
    }

    #[test]
    fn single_cell_global_composition() {
        // One cell: no interior edges, global^2 = cell term + sigma^2.
        let st = solved_state(initial_mesh(1), 1, &cases::case2());
        let ind = estimate(
            &st.mesh, &st.dofmap, &st.elements, &st.u, &st.proj,
            Some(&st.rec), EstimatorKind::Theory,
        )
        .unwrap();
        assert_eq!(ind.edge_sum, 0.0);
        assert_relative_eq!(
            ind.global * ind.global,
            ind.cell_term[0] + ind.sigma_sq[0],
            max_relative = 1e-13,
            epsilon = 1e-300
        );
    }

    #[test]
    fn theory_heuristic_algebra() {
        let st = solved_state(initial_mesh(4), 1, &cases::case1());
        let th = estimate(
            &st.mesh, &st.dofmap, &st.elements, &st.u, &st.proj,
            Some(&st.rec), EstimatorKind::Theory,
        )
        .unwrap();
        let he = estimate(
            &st.mesh, &st.dofmap, &st.elements, &st.u, &st.proj,
            Some(&st.rec), EstimatorKind::Heuristic,
        )
        .unwrap();
        let lhs = th.global * th.global - he.global * he.global;
        let rhs: f64 = (0..st.mesh.num_cells())
            .map(|c| (th.m_factor[c] * th.m_factor[c] - 1.0) * th.sigma_tilde_sq[c])
            .sum();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-10, epsilon = 1e-300);
        // Congruent squares: identical values, exactly.
        assert_eq!(th.cell_term, he.cell_term);
        assert_eq!(th.global, he.global);
    }

    #[test]
    fn missing_recovery_detected() {
        let st = solved_state(initial_mesh(2), 1, &cases::case2());
        let r = estimate(
            &st.mesh, &st.dofmap, &st.elements, &st.u, &st.proj, None,
            EstimatorKind::Theory,
        );
        assert!(matches!(r, Err(EstimatorError::MissingGTensor)));
        let ok = estimate(
            &st.mesh, &st.dofmap, &st.elements, &st.u, &st.proj, None,
            EstimatorKind::Isotropic,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn global_matches_component_recomputation() {
        let st = solved_state(initial_mesh(3), 2, &cases::case3());
        for kind in [EstimatorKind::Theory, EstimatorKind::Heuristic, EstimatorKind::Isotropic] {
            let ind = estimate(
                &st.mesh, &st.dofmap, &st.elements, &st.u, &st.proj,
                Some(&st.rec), kind,
            )
            .unwrap();
            let cells: f64 = ind.cell_term.iter().sum();
            let edges: f64 = ind.edge_term.iter().sum();
            let sig: f64 = match kind {
                EstimatorKind::Theory => ind.sigma_sq.iter().sum(),
                _ => ind.sigma_tilde_sq.iter().sum(),
            };
            assert_relative_eq!(ind.global, (cells + edges + sig).sqrt(), max_relative = 1e-13);
            assert!(ind.cell_term.iter().all(|&v| v >= 0.0));
            assert!(ind.edge_term.iter().all(|&v| v >= 0.0));
            assert!(ind.score.iter().all(|&v| v >= 0.0));
            // Scores redistribute the global sum exactly.
            let score_sum: f64 = ind.score.iter().sum();
            assert_relative_eq!(score_sum, cells + edges + sig, max_relative = 1e-12);
        }
    }

    #[test]
    fn weight_uses_covariance_directions() {
        // A tensor aligned with the long axis of an anisotropic cell
        // yields a larger weight than one aligned with the short axis.
        let verts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(4.0, 0.0),
            Point2::new(4.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let mesh = Mesh::from_cells(verts, vec![vec![0, 1, 2, 3]]).unwrap();
        let aniso = anisotropy_map(&mesh.cell(0).polygon).unwrap();
        let gx = Mat2::new(1.0, 0.0, 0.0, 0.0);
        let gy = Mat2::new(0.0, 0.0, 0.0, 1.0);
        assert!(aniso.directional_weight(&gx) > aniso.directional_weight(&gy));
    }
}
