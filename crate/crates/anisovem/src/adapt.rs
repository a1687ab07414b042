//! Dörfler marking and the anisotropic refinement loop.
//!
//! Each iteration solves, estimates, marks the smallest cell set holding
//! a theta-fraction of the total squared indicator, and cuts every
//! marked cell once with a straight line through its barycenter. The
//! cut direction compares the eigenvalue ratios of the recovered
//! error-gradient tensor and of the cell covariance: when the error
//! anisotropy dominates (ties included) the cut runs along the weak
//! error direction, otherwise along the weak axis of the cell, which
//! caps the aspect ratio. Isotropic-estimator runs always cut along the
//! weak cell axis.

use crate::cases::TestCase;
use crate::estimator::{estimate, EstimatorError, EstimatorKind, IndicatorSet};
use crate::geometry::{sym_eig2, Mat2, SymMat2, Vec2};
use crate::mesh::{Mesh, MeshError, SplitDelta};
use crate::recovery::{recover, Recovery};
use crate::vem::{
    assemble, build_elements, project_solution, projected_h1_error, solve, DofMap, LocalElement,
    ProjectedSolution, VemError,
};
use nalgebra::DVector;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdaptError {
    #[error("iteration {iter}: {source}")]
    At {
        iter: usize,
        #[source]
        source: Box<AdaptError>,
    },
    #[error(transparent)]
    Vem(#[from] VemError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

fn at_iter(iter: usize) -> impl Fn(AdaptError) -> AdaptError {
    move |e| AdaptError::At { iter, source: Box::new(e) }
}

/// Configuration of one adaptive run.
#[derive(Debug, Clone)]
pub struct AdaptConfig {
    pub order: usize,
    pub kind: EstimatorKind,
    /// Dörfler bulk fraction in (0,1).
    pub theta: f64,
    /// Stop once the measured error drops to this value.
    pub error_tol: f64,
    pub max_iters: usize,
    pub max_dofs: usize,
    /// Cells per side of the initial structured grid.
    pub grid_n: usize,
    /// Relative residual target of the linear solver.
    pub solve_tol: f64,
}

impl Default for AdaptConfig {
    fn default() -> Self {
        Self {
            order: 1,
            kind: EstimatorKind::Heuristic,
            theta: 0.5,
            error_tol: 1e-2,
            max_iters: 30,
            max_dofs: 200_000,
            grid_n: 4,
            solve_tol: 1e-12,
        }
    }
}

/// Which eigenstructure supplied the cut direction of a refined cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSource {
    /// Weak eigenvector of the recovered error-gradient tensor.
    ErrorTensor,
    /// Weak eigenvector of the cell covariance.
    CellShape,
}

/// One row of the run log.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub iter: usize,
    pub n_dofs: usize,
    pub n_cells: usize,
    pub estimate: f64,
    pub error: f64,
    pub cell_sum: f64,
    pub edge_sum: f64,
    pub sigma_sum: f64,
    pub cut_g_count: usize,
    pub cut_k_count: usize,
}

#[derive(Debug, Clone, Default)]
pub struct RunLog {
    pub rows: Vec<RunRecord>,
}

impl RunLog {
    pub fn final_record(&self) -> Option<&RunRecord> {
        self.rows.last()
    }
}

/// Everything an observer may want to inspect about one iteration. The
/// mesh is the state that was solved on, before this iteration's cuts.
pub struct IterationState<'a> {
    pub iter: usize,
    pub case: &'a TestCase,
    pub mesh: &'a Mesh,
    pub dofmap: &'a DofMap,
    pub elements: &'a [LocalElement],
    pub solution: &'a DVector<f64>,
    pub projection: &'a ProjectedSolution,
    pub recovery: Option<&'a Recovery>,
    pub indicators: &'a IndicatorSet,
    pub error: f64,
    pub marked: &'a [usize],
}

/// Minimal-cardinality bulk marking: cells sorted by descending score
/// (ties by index) are taken until their scores reach `theta` times the
/// total. All-zero scores mark nothing.
pub fn dorfler_mark(scores: &[f64], theta: f64) -> Vec<usize> {
    assert!(theta > 0.0 && theta < 1.0, "marking fraction must sit in (0,1)");
    let total: f64 = scores.iter().sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b))
    });
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for c in order {
        if scores[c] <= 0.0 {
            break;
        }
        acc += scores[c];
        marked.push(c);
        if acc >= theta * total {
            break;
        }
    }
    marked
}

/// Cut decision for one marked cell: compares the eigenvalue ratio of
/// the error-gradient tensor with the covariance ratio of the cell.
/// Degenerate tensors (numerically zero) fall back to the cell shape.
pub fn choose_cut(mesh: &Mesh, cell: usize, g_tensor: Option<&Mat2>, kind: EstimatorKind) -> (CutSource, Vec2) {
    let cov = sym_eig2(&mesh.cell(cell).polygon.second_moment());
    if kind == EstimatorKind::Isotropic {
        return (CutSource::CellShape, cov.r2);
    }
    let g = g_tensor.expect("anisotropic refinement needs the error tensor");
    let ge = sym_eig2(&SymMat2::from_matrix(g));
    let g1 = ge.lambda1.max(0.0);
    let g2 = ge.lambda2.max(0.0);
    if g.norm() <= 1e-28 {
        return (CutSource::CellShape, cov.r2);
    }
    // lambda_G1/lambda_G2 >= lambda_K1/lambda_K2, cross-multiplied so
    // semidefinite tensors need no special casing; ties go to the
    // error-tensor branch.
    if g1 * cov.lambda2 >= cov.lambda1 * g2 {
        (CutSource::ErrorTensor, ge.r2)
    } else {
        (CutSource::CellShape, cov.r2)
    }
}

/// Cuts one marked cell through its barycenter along the chosen
/// direction.
pub fn refine_cell(
    mesh: &mut Mesh,
    cell: usize,
    g_tensor: Option<&Mat2>,
    kind: EstimatorKind,
) -> Result<(CutSource, SplitDelta), AdaptError> {
    let (source, direction) = choose_cut(mesh, cell, g_tensor, kind);
    let barycenter = mesh.cell(cell).polygon.centroid();
    let delta = mesh.split_cell(cell, barycenter, direction)?;
    Ok((source, delta))
}

/// Runs the solve/estimate/mark/refine loop, invoking `observer` once
/// per iteration after estimation and marking but before the cuts.
pub fn adaptive_loop_with(
    config: &AdaptConfig,
    case: &TestCase,
    mut observer: impl FnMut(&IterationState),
) -> Result<RunLog, AdaptError> {
    let mut mesh = crate::mesh::initial_mesh(config.grid_n);
    let mut log = RunLog::default();
    let data_degree = 2 * config.order + 2;

    for iter in 0..config.max_iters {
        let wrap = at_iter(iter);
        let dofmap = DofMap::new(&mesh, config.order);
        let elements = build_elements(&mesh, config.order, &case.forcing, data_degree)
            .map_err(|e| wrap(e.into()))?;
        let system = assemble(&mesh, &dofmap, &elements, &case.u);
        let u = solve(&system, config.solve_tol).map_err(|e| wrap(e.into()))?;
        let proj = project_solution(&dofmap, &elements, &u);
        let recovery = if config.kind.needs_recovery() {
            Some(recover(&mesh, &elements, &proj, config.order).map_err(|e| wrap(e.into()))?)
        } else {
            None
        };
        let indicators = estimate(
            &mesh, &dofmap, &elements, &u, &proj, recovery.as_ref(), config.kind,
        )
        .map_err(|e| wrap(e.into()))?;
        let error =
            projected_h1_error(&mesh, &elements, &proj, &case.grad, data_degree)
                .map_err(|e| wrap(e.into()))?;

        let n_free = system.n_free();
        let done = error <= config.error_tol
            || n_free >= config.max_dofs
            || iter + 1 == config.max_iters;
        let marked =
            if done { Vec::new() } else { dorfler_mark(&indicators.score, config.theta) };

        observer(&IterationState {
            iter,
            case,
            mesh: &mesh,
            dofmap: &dofmap,
            elements: &elements,
            solution: &u,
            projection: &proj,
            recovery: recovery.as_ref(),
            indicators: &indicators,
            error,
            marked: &marked,
        });

        let mut cut_g = 0;
        let mut cut_k = 0;
        if !done && !marked.is_empty() {
            // Directions come from the frozen pre-cut state; hanging
            // vertices inserted by earlier cuts in the batch change
            // neither barycenters nor covariances.
            let mut cuts = Vec::with_capacity(marked.len());
            for &cell in &marked {
                let g = recovery.as_ref().map(|r| &r.g_tensor[cell]);
                let (source, direction) = choose_cut(&mesh, cell, g, config.kind);
                match source {
                    CutSource::ErrorTensor => cut_g += 1,
                    CutSource::CellShape => cut_k += 1,
                }
                cuts.push((cell, mesh.cell(cell).polygon.centroid(), direction));
            }
            mesh.split_cells(&cuts).map_err(|e| wrap(e.into()))?;
        }

        log.rows.push(RunRecord {
            iter,
            n_dofs: n_free,
            n_cells: dofmap.cell_dofs.len(),
            estimate: indicators.global,
            error,
            cell_sum: indicators.cell_sum,
            edge_sum: indicators.edge_sum,
            sigma_sum: indicators.sigma_sum,
            cut_g_count: cut_g,
            cut_k_count: cut_k,
        });

        if done || marked.is_empty() {
            break;
        }
    }
    Ok(log)
}

/// Convenience entry point without an observer.
pub fn adaptive_loop(config: &AdaptConfig, case: &TestCase) -> Result<RunLog, AdaptError> {
    adaptive_loop_with(config, case, |_| {})
}
