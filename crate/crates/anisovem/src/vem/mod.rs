//! Virtual element discretisation of the Poisson problem for orders 1
//! and 2: degree-of-freedom maps, element-local projectors/stiffness/
//! load, global assembly and the linear solver.
//!
//! Order 1 uses vertex values as DOFs; order 2 adds one midpoint value
//! per edge and the cell average. All element computations reduce to
//! boundary integrals of the (piecewise polynomial) traces plus the cell
//! average, so nothing ever evaluates a virtual function in the
//! interior.

mod element;
mod system;

pub use element::{build_elements, LocalElement};
pub use system::{
    assemble, gather_local, interpolate, project_solution, projected_h1_error, solve,
    solve_with_stats, CellProjection, CsrMatrix, LinearSystem, ProjectedSolution, SolveStats,
};

use crate::geometry::{GeometryError, Point2};
use crate::mesh::Mesh;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum VemError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("element matrices for cell {cell} are numerically singular")]
    IllConditionedElement { cell: usize },
    #[error("conjugate gradient stalled after {iterations} iterations, relative residual {residual:.3e}")]
    SolveFailed { iterations: usize, residual: f64 },
}

/// What a global DOF refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofEntity {
    Vertex(usize),
    EdgeMidpoint(usize),
    CellAverage(usize),
}

/// Global DOF numbering: vertices first, then (order 2) edge midpoints
/// and cell averages.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub order: usize,
    pub entities: Vec<DofEntity>,
    /// Local-to-global maps, one per cell, in canonical local order:
    /// loop vertices, then loop edge midpoints, then the cell average.
    pub cell_dofs: Vec<Vec<usize>>,
    pub is_boundary: Vec<bool>,
}

impl DofMap {
    pub fn new(mesh: &Mesh, order: usize) -> Self {
        assert!(order == 1 || order == 2, "supported orders are 1 and 2");
        let nv = mesh.num_vertices();
        let ne = mesh.num_edges();
        let mut entities: Vec<DofEntity> = (0..nv).map(DofEntity::Vertex).collect();
        if order == 2 {
            entities.extend((0..ne).map(DofEntity::EdgeMidpoint));
            entities.extend((0..mesh.num_cells()).map(DofEntity::CellAverage));
        }
        let mut is_boundary = vec![false; entities.len()];
        for v in 0..nv {
            is_boundary[v] = mesh.is_boundary_vertex(v);
        }
        if order == 2 {
            for (e, edge) in mesh.edges().iter().enumerate() {
                is_boundary[nv + e] = edge.is_boundary();
            }
        }
        let mut cell_dofs = Vec::with_capacity(mesh.num_cells());
        for (ci, cell) in mesh.cells().iter().enumerate() {
            let mut dofs: Vec<usize> = cell.vertex_ids.clone();
            if order == 2 {
                dofs.extend(mesh.cell_edge_ids(ci).iter().map(|&e| nv + e));
                dofs.push(nv + ne + ci);
            }
            cell_dofs.push(dofs);
        }
        Self { order, entities, cell_dofs, is_boundary }
    }

    pub fn n_dofs(&self) -> usize {
        self.entities.len()
    }

    pub fn n_free(&self) -> usize {
        self.is_boundary.iter().filter(|&&b| !b).count()
    }

    /// Geometric location of a DOF; cell averages have none.
    pub fn dof_point(&self, mesh: &Mesh, dof: usize) -> Option<Point2> {
        match self.entities[dof] {
            DofEntity::Vertex(v) => Some(mesh.vertex(v)),
            DofEntity::EdgeMidpoint(e) => Some(mesh.edge_midpoint(e)),
            DofEntity::CellAverage(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::initial_mesh;

    #[test]
    fn dof_counts_order1() {
        let m = initial_mesh(4);
        let d = DofMap::new(&m, 1);
        assert_eq!(d.n_dofs(), 25);
        assert_eq!(d.n_free(), 9);
        for c in 0..m.num_cells() {
            assert_eq!(d.cell_dofs[c].len(), 4);
        }
    }

    #[test]
    fn dof_counts_order2() {
        let m = initial_mesh(4);
        let d = DofMap::new(&m, 2);
        // 25 vertices + 40 edges + 16 cells.
        assert_eq!(d.n_dofs(), 81);
        // Interior: 9 vertices + 24 interior edges + 16 cells.
        assert_eq!(d.n_free(), 49);
        for c in 0..m.num_cells() {
            assert_eq!(d.cell_dofs[c].len(), 9);
        }
    }

    #[test]
    fn boundary_flags_match_mesh() {
        let m = initial_mesh(3);
        let d = DofMap::new(&m, 2);
        for (i, ent) in d.entities.iter().enumerate() {
            match *ent {
                DofEntity::Vertex(v) => assert_eq!(d.is_boundary[i], m.is_boundary_vertex(v)),
                DofEntity::EdgeMidpoint(e) => assert_eq!(d.is_boundary[i], m.edge(e).is_boundary()),
                DofEntity::CellAverage(_) => assert!(!d.is_boundary[i]),
            }
        }
    }
}
