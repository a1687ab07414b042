//! Polygonal mesh container: vertices, convex CCW cells, an edge table
//! with two-sided adjacency, vertex boundary flags, patches, cell
//! splitting with hanging-vertex absorption, and regularity diagnostics.
//!
//! Hanging vertices created by a cell cut are inserted into the
//! neighbouring cell's loop as genuine (collinear) polygon vertices; the
//! virtual element spaces handle those natively.

use crate::geometry::{
    anisotropy_map, chebyshev_radius, clip_polygon, sym_eig2, ClipVertex, CutLocation,
    GeometryError, Point2, Polygon, Vec2,
};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cell index {0} out of range")]
    InvalidCell(usize),
    #[error("vertex index {0} out of range")]
    InvalidVertex(usize),
    #[error("edge ({0}, {1}) is shared by more than two cells or repeats an orientation")]
    NonManifoldEdge(usize, usize),
}

/// Mesh cell: a CCW loop of vertex indices with its cached polygon and a
/// refinement generation counter.
#[derive(Debug, Clone)]
pub struct Cell {
    pub vertex_ids: Vec<usize>,
    pub polygon: Polygon,
    pub generation: u32,
}

/// Undirected mesh edge. `left` traverses `a -> b` in its CCW loop; the
/// `right` cell, if any, traverses `b -> a`.
#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub left: usize,
    pub right: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

/// Patch of cells around a vertex or around a cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point2>,
    cells: Vec<Cell>,
    edges: Vec<Edge>,
    cell_edges: Vec<Vec<usize>>,
    vertex_boundary: Vec<bool>,
}

/// Outcome of a cell split: the first half keeps the parent id, the
/// second half is appended at the end of the cell list.
#[derive(Debug, Clone)]
pub struct SplitDelta {
    pub first: usize,
    pub second: usize,
    pub new_vertices: Vec<usize>,
    /// Neighbouring cells that absorbed a hanging vertex.
    pub updated_neighbors: Vec<usize>,
}

impl Mesh {
    pub fn from_cells(vertices: Vec<Point2>, loops: Vec<Vec<usize>>) -> Result<Self, MeshError> {
        let mut cells = Vec::with_capacity(loops.len());
        for vertex_ids in loops {
            for &v in &vertex_ids {
                if v >= vertices.len() {
                    return Err(MeshError::InvalidVertex(v));
                }
            }
            let polygon = Polygon::new(vertex_ids.iter().map(|&i| vertices[i]).collect())?;
            cells.push(Cell { vertex_ids, polygon, generation: 0 });
        }
        let mut mesh = Self {
            vertices,
            cells,
            edges: Vec::new(),
            cell_edges: Vec::new(),
            vertex_boundary: Vec::new(),
        };
        mesh.rebuild_connectivity()?;
        Ok(mesh)
    }

    /// Rebuilds the edge table and boundary flags from the cell loops.
    /// Deterministic: edges appear in order of first traversal.
    fn rebuild_connectivity(&mut self) -> Result<(), MeshError> {
        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cell_edges = vec![Vec::new(); self.cells.len()];
        for (ci, cell) in self.cells.iter().enumerate() {
            let n = cell.vertex_ids.len();
            for i in 0..n {
                let a = cell.vertex_ids[i];
                let b = cell.vertex_ids[(i + 1) % n];
                let key = (a.min(b), a.max(b));
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, edges.len());
                        cell_edges[ci].push(edges.len());
                        edges.push(Edge { a, b, left: ci, right: None });
                    }
                    Some(&ei) => {
                        let e = &mut edges[ei];
                        // The partner must traverse the opposite way.
                        if e.right.is_some() || (e.a, e.b) != (b, a) {
                            return Err(MeshError::NonManifoldEdge(a, b));
                        }
                        e.right = Some(ci);
                        cell_edges[ci].push(ei);
                    }
                }
            }
        }
        let mut vertex_boundary = vec![false; self.vertices.len()];
        for e in &edges {
            if e.is_boundary() {
                vertex_boundary[e.a] = true;
                vertex_boundary[e.b] = true;
            }
        }
        self.edges = edges;
        self.cell_edges = cell_edges;
        self.vertex_boundary = vertex_boundary;
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex(&self, i: usize) -> Point2 {
        self.vertices[i]
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn edge(&self, i: usize) -> Edge {
        self.edges[i]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge ids of cell `c`, aligned with its polygon edges.
    pub fn cell_edge_ids(&self, c: usize) -> &[usize] {
        &self.cell_edges[c]
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.vertex_boundary[v]
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let edge = self.edges[e];
        (self.vertices[edge.b] - self.vertices[edge.a]).norm()
    }

    pub fn edge_midpoint(&self, e: usize) -> Point2 {
        let edge = self.edges[e];
        Point2::from((self.vertices[edge.a].coords + self.vertices[edge.b].coords) * 0.5)
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.polygon.area()).sum()
    }

    /// Incidence lists vertex -> cells, in ascending cell order.
    pub fn vertex_cell_incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for (ci, cell) in self.cells.iter().enumerate() {
            for &v in &cell.vertex_ids {
                inc[v].push(ci);
            }
        }
        inc
    }

    /// All cells whose closure contains vertex `v`.
    pub fn vertex_patch(&self, v: usize) -> Patch {
        let members = self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.vertex_ids.contains(&v))
            .map(|(i, _)| i)
            .collect();
        Patch { members }
    }

    /// All cells whose closure intersects the closure of cell `k`. Since
    /// hanging vertices are absorbed into neighbour loops, closure
    /// intersection is exactly vertex sharing (the cell itself included).
    pub fn cell_patch(&self, k: usize) -> Patch {
        let incidence = self.vertex_cell_incidence();
        Patch { members: self.cell_patch_from_incidence(k, &incidence) }
    }

    /// Patch membership computed against a prebuilt incidence table;
    /// callers looping over all cells build the table once.
    pub fn cell_patch_from_incidence(&self, k: usize, incidence: &[Vec<usize>]) -> Vec<usize> {
        let mut members: Vec<usize> = self.cells[k]
            .vertex_ids
            .iter()
            .flat_map(|&v| incidence[v].iter().copied())
            .collect();
        members.sort_unstable();
        members.dedup();
        members
    }

    /// Splits a convex cell along the line through `point` (normally the
    /// cell barycenter) with the given direction. Cut points landing on
    /// neighbour edges are inserted into those neighbours as collinear
    /// vertices. The mesh is left untouched on error.
    pub fn split_cell(
        &mut self,
        cell_id: usize,
        point: Point2,
        direction: Vec2,
    ) -> Result<SplitDelta, MeshError> {
        let mut ws = SplitWorkspace::new(self);
        let delta = self.split_cell_in_workspace(&mut ws, cell_id, point, direction)?;
        self.rebuild_connectivity()?;
        Ok(delta)
    }

    /// Core split against an incidence workspace; connectivity tables
    /// are NOT rebuilt, the caller does that once per batch.
    fn split_cell_in_workspace(
        &mut self,
        ws: &mut SplitWorkspace,
        cell_id: usize,
        point: Point2,
        direction: Vec2,
    ) -> Result<SplitDelta, MeshError> {
        if cell_id >= self.cells.len() {
            return Err(MeshError::InvalidCell(cell_id));
        }
        let parent = self.cells[cell_id].clone();
        let clip = clip_polygon(&parent.polygon, point, direction)?;

        // Plan the vertex insertions before touching anything.
        struct NewVertex {
            position: Point2,
            local_edge: usize,
        }
        let mut new_vertices: Vec<NewVertex> = Vec::new();
        // Cut index -> mesh vertex id (new ones filled in during commit).
        let mut cut_vertex_ids: Vec<Option<usize>> = Vec::new();
        for cut in &clip.cuts {
            match cut.location {
                CutLocation::Vertex(i) => cut_vertex_ids.push(Some(parent.vertex_ids[i])),
                CutLocation::Edge(i) => {
                    new_vertices.push(NewVertex { position: cut.point, local_edge: i });
                    cut_vertex_ids.push(None);
                }
            }
        }

        // Commit: append new vertices, splice them into neighbours.
        let mut created = Vec::new();
        let mut updated_neighbors = Vec::new();
        let mut next_new = 0usize;
        for slot in cut_vertex_ids.iter_mut() {
            if slot.is_some() {
                continue;
            }
            let nv = &new_vertices[next_new];
            next_new += 1;
            let vid = self.vertices.len();
            self.vertices.push(nv.position);
            *slot = Some(vid);

            let n = parent.vertex_ids.len();
            let a = parent.vertex_ids[nv.local_edge];
            let b = parent.vertex_ids[(nv.local_edge + 1) % n];
            created.push(vid);
            // The neighbour traverses b -> a; insert the hanging vertex
            // between them.
            if let Some(neigh) = ws.other_cell(a, b, cell_id) {
                ws.remove_cell(neigh, &self.cells[neigh].vertex_ids);
                let loop_ref = &mut self.cells[neigh].vertex_ids;
                let m = loop_ref.len();
                let pos = (0..m)
                    .find(|&i| loop_ref[i] == b && loop_ref[(i + 1) % m] == a)
                    .expect("edge map and neighbour loop out of sync");
                loop_ref.insert(pos + 1, vid);
                let ids = self.cells[neigh].vertex_ids.clone();
                self.cells[neigh].polygon =
                    Polygon::new(ids.iter().map(|&i| self.vertices[i]).collect())?;
                ws.add_cell(neigh, &self.cells[neigh].vertex_ids);
                updated_neighbors.push(neigh);
            }
        }

        // Replace the parent with the two halves.
        let build_loop = |part: usize| -> Vec<usize> {
            clip.parts[part]
                .outline
                .iter()
                .map(|&v| match v {
                    ClipVertex::Original(i) => parent.vertex_ids[i],
                    ClipVertex::Cut(j) => cut_vertex_ids[j].unwrap(),
                })
                .collect()
        };
        let loop_a = build_loop(0);
        let loop_b = build_loop(1);
        let poly_a = Polygon::new(loop_a.iter().map(|&i| self.vertices[i]).collect())?;
        let poly_b = Polygon::new(loop_b.iter().map(|&i| self.vertices[i]).collect())?;
        ws.remove_cell(cell_id, &parent.vertex_ids);
        let generation = parent.generation + 1;
        self.cells[cell_id] = Cell { vertex_ids: loop_a, polygon: poly_a, generation };
        let second = self.cells.len();
        self.cells.push(Cell { vertex_ids: loop_b, polygon: poly_b, generation });
        ws.add_cell(cell_id, &self.cells[cell_id].vertex_ids);
        ws.add_cell(second, &self.cells[second].vertex_ids);

        Ok(SplitDelta { first: cell_id, second, new_vertices: created, updated_neighbors })
    }

    /// Applies one barycentric cut per entry of `cuts`, rebuilding the
    /// connectivity tables once at the end. Equivalent to calling
    /// [`Mesh::split_cell`] in sequence, with per-cut cost independent
    /// of the mesh size.
    pub fn split_cells(
        &mut self,
        cuts: &[(usize, Point2, Vec2)],
    ) -> Result<Vec<SplitDelta>, MeshError> {
        let mut ws = SplitWorkspace::new(self);
        let mut deltas = Vec::with_capacity(cuts.len());
        for &(cell, point, direction) in cuts {
            deltas.push(self.split_cell_in_workspace(&mut ws, cell, point, direction)?);
        }
        self.rebuild_connectivity()?;
        Ok(deltas)
    }

    /// Structural validation used by tests: manifold edge table, convex
    /// CCW cells, and (optionally) an exact tiling of the expected area.
    pub fn validate(&self, expected_area: Option<f64>) -> Result<(), String> {
        let mut probe = self.clone();
        probe
            .rebuild_connectivity()
            .map_err(|e| format!("edge table rebuild failed: {e}"))?;
        if probe.edges.len() != self.edges.len() {
            return Err("edge table is not idempotent under rebuild".into());
        }
        for (i, cell) in self.cells.iter().enumerate() {
            if !cell.polygon.is_convex() {
                return Err(format!("cell {i} is not convex"));
            }
        }
        if let Some(total) = expected_area {
            let sum = self.total_area();
            if (sum - total).abs() > 1e-10 * total.max(1.0) {
                return Err(format!("cell areas sum to {sum}, expected {total}"));
            }
        }
        Ok(())
    }
}

/// Undirected edge -> incident cells map maintained incrementally while
/// a batch of cuts is applied.
struct SplitWorkspace {
    map: HashMap<(usize, usize), [Option<usize>; 2]>,
}

impl SplitWorkspace {
    fn new(mesh: &Mesh) -> Self {
        let mut map: HashMap<(usize, usize), [Option<usize>; 2]> = HashMap::new();
        for (ci, cell) in mesh.cells.iter().enumerate() {
            let n = cell.vertex_ids.len();
            for i in 0..n {
                let a = cell.vertex_ids[i];
                let b = cell.vertex_ids[(i + 1) % n];
                let slots = map.entry((a.min(b), a.max(b))).or_default();
                if slots[0].is_none() {
                    slots[0] = Some(ci);
                } else {
                    slots[1] = Some(ci);
                }
            }
        }
        Self { map }
    }

    fn remove_cell(&mut self, cell: usize, vertex_loop: &[usize]) {
        let n = vertex_loop.len();
        for i in 0..n {
            let a = vertex_loop[i];
            let b = vertex_loop[(i + 1) % n];
            let key = (a.min(b), a.max(b));
            if let Some(slots) = self.map.get_mut(&key) {
                for s in slots.iter_mut() {
                    if *s == Some(cell) {
                        *s = None;
                    }
                }
                if slots.iter().all(Option::is_none) {
                    self.map.remove(&key);
                }
            }
        }
    }

    fn add_cell(&mut self, cell: usize, vertex_loop: &[usize]) {
        let n = vertex_loop.len();
        for i in 0..n {
            let a = vertex_loop[i];
            let b = vertex_loop[(i + 1) % n];
            let slots = self.map.entry((a.min(b), a.max(b))).or_default();
            if slots[0].is_none() {
                slots[0] = Some(cell);
            } else {
                slots[1] = Some(cell);
            }
        }
    }

    fn other_cell(&self, a: usize, b: usize, me: usize) -> Option<usize> {
        let slots = self.map.get(&(a.min(b), a.max(b)))?;
        slots.iter().flatten().copied().find(|&c| c != me)
    }
}

/// Uniform n x n grid of square cells tiling (0,1)^2.
pub fn initial_mesh(n: usize) -> Mesh {
    assert!(n >= 1, "grid must have at least one cell per side");
    let step = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point2::new(i as f64 * step, j as f64 * step));
        }
    }
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let mut loops = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            loops.push(vec![vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    Mesh::from_cells(vertices, loops).expect("structured grid is always a valid mesh")
}

/// Per-cell regularity metrics of a mesh and of its mapped reference
/// configurations.
#[derive(Debug, Clone)]
pub struct CellRegularity {
    /// h_K / rho_K of the physical cell (Chebyshev inradius).
    pub aspect: f64,
    /// h_K over the shortest cell edge.
    pub max_edge_ratio: f64,
    /// h / rho of the mapped (isotropic reference) cell.
    pub mapped_aspect: f64,
    /// Covariance eigenvalue ratio lambda1/lambda2.
    pub eigen_ratio: f64,
    /// Map scaling alpha_K.
    pub alpha: f64,
}

/// Anisotropy compatibility of an edge-neighbouring cell pair.
#[derive(Debug, Clone)]
pub struct PairRegularity {
    pub cells: (usize, usize),
    /// Relative eigenvalue perturbations lambda_minus/lambda_plus - 1.
    pub delta: [f64; 2],
    /// ||I - R|| * sqrt(lambda1/lambda2), with R the smallest rotation
    /// aligning the two eigenframes (sign ambiguity resolved by taking
    /// the smaller angle).
    pub rotation_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub cells: Vec<CellRegularity>,
    pub pairs: Vec<PairRegularity>,
    pub max_aspect: f64,
    pub max_mapped_aspect: f64,
    pub max_abs_delta: f64,
    pub max_rotation_deviation: f64,
    pub min_alpha: f64,
    pub max_alpha: f64,
}

/// Diagnostic regularity report: per-cell shape metrics plus eigenvalue
/// and eigenframe perturbations across every edge-neighbouring pair.
pub fn regularity_report(mesh: &Mesh) -> Result<RegularityReport, MeshError> {
    let mut cells = Vec::with_capacity(mesh.num_cells());
    let mut infos = Vec::with_capacity(mesh.num_cells());
    for cell in mesh.cells() {
        let poly = &cell.polygon;
        let info = anisotropy_map(poly)?;
        let mapped = info.map_polygon(poly)?;
        cells.push(CellRegularity {
            aspect: poly.diameter() / chebyshev_radius(poly),
            max_edge_ratio: poly.diameter() / poly.min_edge_length(),
            mapped_aspect: mapped.diameter() / chebyshev_radius(&mapped),
            eigen_ratio: info.ratio(),
            alpha: info.alpha,
        });
        infos.push(info);
    }

    let mut seen = std::collections::HashSet::new();
    let mut pairs = Vec::new();
    for e in mesh.edges() {
        let Some(right) = e.right else { continue };
        let key = (e.left.min(right), e.left.max(right));
        if !seen.insert(key) {
            continue;
        }
        let (plus, minus) = (&infos[key.0], &infos[key.1]);
        let delta = [
            minus.lambda1 / plus.lambda1 - 1.0,
            minus.lambda2 / plus.lambda2 - 1.0,
        ];
        // Frame angle modulo pi (eigenvectors are lines, not arrows).
        let cos_angle = plus.r1.dot(&minus.r1).abs().clamp(0.0, 1.0);
        let theta = cos_angle.acos();
        let rot_norm = 2.0 * (0.5 * theta).sin();
        pairs.push(PairRegularity {
            cells: key,
            delta,
            rotation_deviation: rot_norm * (plus.lambda1 / plus.lambda2).sqrt(),
        });
    }

    let fold_max = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, f64::max);
    let max_aspect = fold_max(&mut cells.iter().map(|c| c.aspect));
    let max_mapped_aspect = fold_max(&mut cells.iter().map(|c| c.mapped_aspect));
    let max_abs_delta =
        fold_max(&mut pairs.iter().flat_map(|p| p.delta.iter().map(|d| d.abs())));
    let max_rotation_deviation = fold_max(&mut pairs.iter().map(|p| p.rotation_deviation));
    let min_alpha = cells.iter().map(|c| c.alpha).fold(f64::INFINITY, f64::min);
    let max_alpha = fold_max(&mut cells.iter().map(|c| c.alpha));
    Ok(RegularityReport {
        cells,
        pairs,
        max_aspect,
        max_mapped_aspect,
        max_abs_delta,
        max_rotation_deviation,
        min_alpha,
        max_alpha,
    })
}

/// Covariance eigen split of one cell, shared by the refinement logic.
pub fn cell_eigen(mesh: &Mesh, cell: usize) -> crate::geometry::EigenDecomp2 {
    sym_eig2(&mesh.cell(cell).polygon.second_moment())
}
