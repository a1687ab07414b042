//! Straight-line clipping of convex polygons.
//!
//! A cut line through an interior point crosses the boundary of a convex
//! polygon in exactly two points. Both halves are returned together with
//! the provenance of every output vertex, so a mesh container can splice
//! the cut points into neighbouring cells.

use super::{cross, GeometryError, Point2, Polygon, Vec2, SNAP_REL_TOL};

/// Output vertex provenance: an index into the input loop, or one of the
/// two cut points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClipVertex {
    Original(usize),
    Cut(usize),
}

/// Where a cut point sits on the input polygon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutLocation {
    /// The cut passes through (or snapped onto) input vertex `i`.
    Vertex(usize),
    /// The cut crosses the open edge from vertex `i` to vertex `i+1`.
    Edge(usize),
}

#[derive(Debug, Clone, Copy)]
pub struct CutPoint {
    pub point: Point2,
    pub location: CutLocation,
}

/// One half of the clipped polygon, as a CCW loop of provenance tags.
#[derive(Debug, Clone)]
pub struct ClipPart {
    pub outline: Vec<ClipVertex>,
}

#[derive(Debug, Clone)]
pub struct ClipResult {
    /// `parts[0]` lies on the positive side of the cut line (left of the
    /// direction vector), `parts[1]` on the negative side.
    pub parts: [ClipPart; 2],
    pub cuts: Vec<CutPoint>,
}

impl ClipResult {
    pub fn point_of(&self, v: ClipVertex, original: &Polygon) -> Point2 {
        match v {
            ClipVertex::Original(i) => original.vertices()[i],
            ClipVertex::Cut(j) => self.cuts[j].point,
        }
    }

    pub fn part_polygon(&self, which: usize, original: &Polygon) -> Result<Polygon, GeometryError> {
        Polygon::new(
            self.parts[which]
                .outline
                .iter()
                .map(|&v| self.point_of(v, original))
                .collect(),
        )
    }
}

/// Cuts a convex polygon along the line through `point` with direction
/// `direction`. Vertices within the snap tolerance of the line become
/// cut points themselves, so no sliver edges are produced.
pub fn clip_polygon(
    poly: &Polygon,
    point: Point2,
    direction: Vec2,
) -> Result<ClipResult, GeometryError> {
    if !poly.is_convex() {
        return Err(GeometryError::NotConvex);
    }
    let dir_norm = direction.norm();
    if !(dir_norm > 0.0) || !dir_norm.is_finite() {
        return Err(GeometryError::ClipFailed);
    }
    let d = direction / dir_norm;
    let n = poly.num_vertices();
    let tol = SNAP_REL_TOL * poly.diameter();

    // Signed distance from the cut line; positive on the left of `d`.
    let side: Vec<f64> = poly.vertices().iter().map(|&v| cross(d, v - point)).collect();
    let class: Vec<i8> = side
        .iter()
        .map(|&s| {
            if s > tol {
                1
            } else if s < -tol {
                -1
            } else {
                0
            }
        })
        .collect();

    if !class.iter().any(|&c| c > 0) || !class.iter().any(|&c| c < 0) {
        return Err(GeometryError::ClipFailed);
    }
    // Two adjacent on-line vertices would mean the line runs along an
    // edge, which cannot happen for a genuine interior cut.
    for i in 0..n {
        if class[i] == 0 && class[(i + 1) % n] == 0 {
            return Err(GeometryError::ClipFailed);
        }
    }

    let mut pos: Vec<ClipVertex> = Vec::new();
    let mut neg: Vec<ClipVertex> = Vec::new();
    let mut cuts: Vec<CutPoint> = Vec::new();

    for i in 0..n {
        let j = (i + 1) % n;
        match class[i] {
            1 => pos.push(ClipVertex::Original(i)),
            -1 => neg.push(ClipVertex::Original(i)),
            _ => {
                let prev = class[(i + n - 1) % n];
                let next = class[j];
                if prev > 0 && next > 0 {
                    // Grazing touch from the positive side only.
                    pos.push(ClipVertex::Original(i));
                } else if prev < 0 && next < 0 {
                    neg.push(ClipVertex::Original(i));
                } else {
                    // The line passes through this vertex.
                    cuts.push(CutPoint {
                        point: poly.vertices()[i],
                        location: CutLocation::Vertex(i),
                    });
                    pos.push(ClipVertex::Original(i));
                    neg.push(ClipVertex::Original(i));
                }
            }
        }
        if class[i] * class[j] < 0 {
            // Proper crossing inside edge (i, j).
            let t = side[i] / (side[i] - side[j]);
            let (p, q) = poly.edge(i);
            let x = Point2::from(p.coords + (q.coords - p.coords) * t);
            let cut_idx = cuts.len();
            cuts.push(CutPoint { point: x, location: CutLocation::Edge(i) });
            pos.push(ClipVertex::Cut(cut_idx));
            neg.push(ClipVertex::Cut(cut_idx));
        }
    }

    if cuts.len() != 2 || pos.len() < 3 || neg.len() < 3 {
        return Err(GeometryError::ClipFailed);
    }

    let result = ClipResult { parts: [ClipPart { outline: pos }, ClipPart { outline: neg }], cuts };
    // Degenerate halves (area at the noise floor) are rejected as failed
    // cuts rather than returned.
    result.part_polygon(0, poly).map_err(|_| GeometryError::ClipFailed)?;
    result.part_polygon(1, poly).map_err(|_| GeometryError::ClipFailed)?;
    Ok(result)
}

/// Convenience wrapper returning the two halves as polygons.
pub fn clip_polygon_parts(
    poly: &Polygon,
    point: Point2,
    direction: Vec2,
) -> Result<(Polygon, Polygon), GeometryError> {
    let r = clip_polygon(poly, point, direction)?;
    Ok((r.part_polygon(0, poly)?, r.part_polygon(1, poly)?))
}
