//! Global assembly, sparse linear algebra and solution post-processing.
//!
//! Dirichlet rows/columns are eliminated (not penalised) so the reduced
//! system stays symmetric positive definite for the conjugate gradient
//! solver. Boundary values are read from a supplied trace function,
//! which is identically zero for the homogeneous problems.

use super::element::LocalElement;
use super::{DofMap, VemError};
use crate::geometry::{polygon_quadrature, GeometryError, Vec2};
use crate::mesh::Mesh;
use nalgebra::DVector;

/// Compressed sparse row matrix, symmetric storage of both triangles.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from unordered triplets, merging duplicates.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_counts = vec![0usize; n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_counts[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_counts[i + 1] += row_counts[i];
        }
        Self { n, row_ptr: row_counts, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &DVector<f64>, y: &mut DVector<f64>) {
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
    }

    pub fn diagonal(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[k] == r {
                    d[r] = self.vals[k];
                }
            }
        }
        d
    }
}

/// Reduced SPD system together with the boundary lift.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: DVector<f64>,
    /// Free-index -> global-dof map.
    pub free_to_global: Vec<usize>,
    /// Full-length vector holding the boundary values (zero on free dofs).
    pub boundary_values: DVector<f64>,
    pub n_dofs: usize,
}

impl LinearSystem {
    pub fn n_free(&self) -> usize {
        self.free_to_global.len()
    }
}

/// Reverse Cuthill-McKee ordering of the free unknowns. Tight bands
/// keep the sparse sweeps cache-friendly on heavily refined meshes,
/// where creation order scatters neighbouring DOFs far apart.
fn reverse_cuthill_mckee(adjacency: &[Vec<usize>]) -> Vec<usize> {
    let n = adjacency.len();
    let degree = |v: usize| adjacency[v].len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut component: Vec<usize> = (0..n).collect();
    component.sort_by_key(|&v| (degree(v), v));
    for &start in &component {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> =
                adjacency[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree(w), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Assembles the global stiffness/load pair and eliminates the Dirichlet
/// DOFs, reading their values from `boundary_trace`.
pub fn assemble(
    mesh: &Mesh,
    dofmap: &DofMap,
    elements: &[LocalElement],
    boundary_trace: &dyn Fn(f64, f64) -> f64,
) -> LinearSystem {
    let n = dofmap.n_dofs();
    let mut natural_index = vec![usize::MAX; n];
    let mut natural_to_global = Vec::new();
    for dof in 0..n {
        if !dofmap.is_boundary[dof] {
            natural_index[dof] = natural_to_global.len();
            natural_to_global.push(dof);
        }
    }
    // Free-dof adjacency (cell cliques), then the bandwidth-reducing
    // permutation.
    let n_nat = natural_to_global.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n_nat];
    for dofs in &dofmap.cell_dofs {
        let frees: Vec<usize> = dofs
            .iter()
            .filter(|&&g| !dofmap.is_boundary[g])
            .map(|&g| natural_index[g])
            .collect();
        for &a in &frees {
            for &b in &frees {
                if a != b {
                    adjacency[a].push(b);
                }
            }
        }
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    let order = reverse_cuthill_mckee(&adjacency);
    // order[new] = natural; build the final maps.
    let mut free_index = vec![usize::MAX; n];
    let mut free_to_global = vec![0usize; n_nat];
    for (new_idx, &nat) in order.iter().enumerate() {
        let g = natural_to_global[nat];
        free_index[g] = new_idx;
        free_to_global[new_idx] = g;
    }
    let mut boundary_values = DVector::zeros(n);
    for dof in 0..n {
        if dofmap.is_boundary[dof] {
            let p = dofmap
                .dof_point(mesh, dof)
                .expect("boundary dofs always have a location");
            boundary_values[dof] = boundary_trace(p.x, p.y);
        }
    }

    let n_free = free_to_global.len();
    let mut triplets = Vec::new();
    let mut rhs = DVector::zeros(n_free);
    for (ci, el) in elements.iter().enumerate() {
        let dofs = &dofmap.cell_dofs[ci];
        for (i_loc, &gi) in dofs.iter().enumerate() {
            if dofmap.is_boundary[gi] {
                continue;
            }
            let fi = free_index[gi];
            rhs[fi] += el.load[i_loc];
            for (j_loc, &gj) in dofs.iter().enumerate() {
                let v = el.stiffness[(i_loc, j_loc)];
                if dofmap.is_boundary[gj] {
                    rhs[fi] -= v * boundary_values[gj];
                } else {
                    triplets.push((fi, free_index[gj], v));
                }
            }
        }
    }
    LinearSystem {
        matrix: CsrMatrix::from_triplets(n_free, triplets),
        rhs,
        free_to_global,
        boundary_values,
        n_dofs: n,
    }
}

/// Zero-fill incomplete Cholesky factor, stored as a lower-triangular
/// CSR with sorted columns and the diagonal last in each row.
struct IcFactor {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl IcFactor {
    /// Factors the lower triangle of `a` on its own sparsity pattern.
    /// `shift` scales the diagonal up to keep the pivots positive.
    fn new(a: &CsrMatrix, shift: f64) -> Option<Self> {
        let n = a.n;
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        // Dense scatter of the current row; touched columns reset after
        // each row.
        let mut work = vec![0.0f64; n];
        for i in 0..n {
            let (lo, hi) = (a.row_ptr[i], a.row_ptr[i + 1]);
            let mut touched = Vec::new();
            for k in lo..hi {
                let j = a.cols[k];
                if j <= i {
                    work[j] = if j == i { a.vals[k] * (1.0 + shift) } else { a.vals[k] };
                    touched.push(j);
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if j == i {
                    break;
                }
                // w[j] = (w[j] - sum_{p<j} L[j][p] w[p]) / L[j][j]
                let (jlo, jhi) = (row_ptr[j], row_ptr[j + 1]);
                let mut acc = work[j];
                let mut diag_j = 0.0;
                for k in jlo..jhi {
                    let p = cols[k];
                    if p == j {
                        diag_j = vals[k];
                    } else {
                        acc -= vals[k] * work[p];
                    }
                }
                work[j] = acc / diag_j;
            }
            let mut diag = work[i];
            for &j in &touched {
                if j != i {
                    diag -= work[j] * work[j];
                }
            }
            if !(diag > 0.0) || !diag.is_finite() {
                for &j in &touched {
                    work[j] = 0.0;
                }
                return None;
            }
            for &j in &touched {
                if j != i {
                    cols.push(j);
                    vals.push(work[j]);
                }
            }
            cols.push(i);
            vals.push(diag.sqrt());
            row_ptr[i + 1] = cols.len();
            for &j in &touched {
                work[j] = 0.0;
            }
        }
        Some(Self { row_ptr, cols, vals })
    }

    /// z = (L L^T)^-1 r by a forward and a backward sweep. Both sweeps
    /// only walk rows of L; the backward solve scatters contributions
    /// of each computed unknown into the remaining equations.
    fn apply(&self, r: &DVector<f64>, z: &mut DVector<f64>, scratch: &mut DVector<f64>) {
        let n = r.len();
        // Forward: L y = r.
        for i in 0..n {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut acc = r[i];
            for k in lo..(hi - 1) {
                acc -= self.vals[k] * scratch[self.cols[k]];
            }
            scratch[i] = acc / self.vals[hi - 1];
        }
        // Backward: L^T z = y.
        z.copy_from(scratch);
        for i in (0..n).rev() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let zi = z[i] / self.vals[hi - 1];
            z[i] = zi;
            for k in lo..(hi - 1) {
                z[self.cols[k]] -= self.vals[k] * zi;
            }
        }
    }
}

enum Preconditioner {
    IncompleteCholesky(IcFactor),
    Jacobi(DVector<f64>),
}

impl Preconditioner {
    fn build(a: &CsrMatrix) -> Self {
        for shift in [0.0, 1e-3, 1e-1] {
            if let Some(f) = IcFactor::new(a, shift) {
                return Self::IncompleteCholesky(f);
            }
        }
        let inv_diag = a.diagonal().map(|d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 });
        Self::Jacobi(inv_diag)
    }

    fn apply(&self, r: &DVector<f64>, z: &mut DVector<f64>, scratch: &mut DVector<f64>) {
        match self {
            Self::IncompleteCholesky(f) => f.apply(r, z, scratch),
            Self::Jacobi(inv_diag) => z.copy_from(&r.component_mul(inv_diag)),
        }
    }
}

/// Solver diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct SolveStats {
    pub iterations: usize,
    pub used_incomplete_cholesky: bool,
}

/// Preconditioned conjugate gradients (incomplete Cholesky, with a
/// Jacobi fallback if the factorisation breaks down) to a relative
/// residual of `tol`. Returns the full DOF vector with boundary values
/// filled in.
pub fn solve(system: &LinearSystem, tol: f64) -> Result<DVector<f64>, VemError> {
    solve_with_stats(system, tol).map(|(x, _)| x)
}

pub fn solve_with_stats(
    system: &LinearSystem,
    tol: f64,
) -> Result<(DVector<f64>, SolveStats), VemError> {
    let n = system.n_free();
    let mut full = system.boundary_values.clone();
    let mut stats = SolveStats { iterations: 0, used_incomplete_cholesky: false };
    if n == 0 {
        return Ok((full, stats));
    }
    let a = &system.matrix;
    let b = &system.rhs;
    let b_norm = b.norm();
    let mut x = DVector::zeros(n);
    if b_norm > 0.0 {
        let precond = Preconditioner::build(a);
        stats.used_incomplete_cholesky =
            matches!(precond, Preconditioner::IncompleteCholesky(_));
        let mut scratch = DVector::zeros(n);
        let mut r = b.clone();
        let mut z = DVector::zeros(n);
        precond.apply(&r, &mut z, &mut scratch);
        let mut p = z.clone();
        let mut rz = r.dot(&z);
        let mut ap = DVector::zeros(n);
        let max_iters = 1000 + 100 * (n as f64).sqrt().ceil() as usize;
        let mut converged = false;
        for iter in 0..max_iters {
            a.matvec(&p, &mut ap);
            let alpha = rz / p.dot(&ap);
            x.axpy(alpha, &p, 1.0);
            r.axpy(-alpha, &ap, 1.0);
            stats.iterations = iter + 1;
            if r.norm() <= tol * b_norm {
                converged = true;
                break;
            }
            precond.apply(&r, &mut z, &mut scratch);
            let rz_new = r.dot(&z);
            let beta = rz_new / rz;
            rz = rz_new;
            p = &z + &p * beta;
        }
        if !converged {
            return Err(VemError::SolveFailed { iterations: max_iters, residual: r.norm() / b_norm });
        }
    }
    for (fi, &dof) in system.free_to_global.iter().enumerate() {
        full[dof] = x[fi];
    }
    Ok((full, stats))
}

/// Per-cell polynomial projections of the solution.
#[derive(Debug, Clone)]
pub struct CellProjection {
    /// Coefficients of the projected value polynomial (degree k).
    pub value: Vec<f64>,
    /// Coefficients of the projected gradient components (degree k-1).
    pub grad: [Vec<f64>; 2],
    /// Stabilisation energy of the non-polynomial part.
    pub sigma_tilde_sq: f64,
}

#[derive(Debug, Clone)]
pub struct ProjectedSolution {
    pub cells: Vec<CellProjection>,
}

pub fn gather_local(dofmap: &DofMap, cell: usize, u: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        dofmap.cell_dofs[cell].len(),
        dofmap.cell_dofs[cell].iter().map(|&g| u[g]),
    )
}

/// Computes the per-cell value and gradient projections of a solved DOF
/// vector.
pub fn project_solution(
    dofmap: &DofMap,
    elements: &[LocalElement],
    u: &DVector<f64>,
) -> ProjectedSolution {
    let cells = elements
        .iter()
        .enumerate()
        .map(|(ci, el)| {
            let u_loc = gather_local(dofmap, ci, u);
            CellProjection {
                value: el.value_coeffs(&u_loc),
                grad: el.grad_coeffs(&u_loc),
                sigma_tilde_sq: el.sigma_tilde_sq(&u_loc),
            }
        })
        .collect();
    ProjectedSolution { cells }
}

/// Nodal interpolant of a smooth function: vertex/midpoint values plus
/// cell averages (by quadrature) for order 2.
pub fn interpolate(
    mesh: &Mesh,
    dofmap: &DofMap,
    f: &dyn Fn(f64, f64) -> f64,
) -> Result<DVector<f64>, GeometryError> {
    let mut u = DVector::zeros(dofmap.n_dofs());
    for dof in 0..dofmap.n_dofs() {
        match dofmap.entities[dof] {
            super::DofEntity::Vertex(_) | super::DofEntity::EdgeMidpoint(_) => {
                let p = dofmap.dof_point(mesh, dof).unwrap();
                u[dof] = f(p.x, p.y);
            }
            super::DofEntity::CellAverage(c) => {
                let poly = &mesh.cell(c).polygon;
                let quad = polygon_quadrature(poly, 2 * dofmap.order + 2)?;
                u[dof] = quad.integrate(f) / poly.area();
            }
        }
    }
    Ok(u)
}

/// `|| grad(u) - grad(Pi u_h) ||_L2` over the mesh, with the analytic
/// gradient supplied by the test case, by cell quadrature of the given
/// degree.
pub fn projected_h1_error(
    mesh: &Mesh,
    elements: &[LocalElement],
    proj: &ProjectedSolution,
    grad_exact: &dyn Fn(f64, f64) -> Vec2,
    quad_degree: usize,
) -> Result<f64, GeometryError> {
    let mut acc = 0.0;
    for (ci, el) in elements.iter().enumerate() {
        let poly = &mesh.cell(ci).polygon;
        let quad = polygon_quadrature(poly, quad_degree)?;
        let coeffs = &proj.cells[ci].value;
        acc += quad.integrate(|x, y| {
            let gh = el.monomials.eval_poly_grad(coeffs, x, y);
            (grad_exact(x, y) - gh).norm_squared()
        });
    }
    Ok(acc.sqrt())
}
