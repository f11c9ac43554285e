//! Validated planar polygonal meshes.
//!
//! [`PolyMesh::build`] flattens the dataset onto its best-fit plane, orients
//! every cell counter-clockwise, derives edge adjacency, per-cell centroids
//! and areas, and chains the boundary edges into closed loops that keep the
//! domain interior on their left.

pub mod geometry;
mod locate;

use std::collections::HashMap;

use crate::field::Field;
use crate::vtk_io::RawDataset;
use crate::Point2;

use geometry::{centroid, signed_area, symmetric_eigen3};
use locate::Locator;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("dataset is not planar: a point lies {deviation:e} from the best-fit plane (tolerance {tolerance:e})")]
    NotPlanar { deviation: f64, tolerance: f64 },
    #[error("edge ({a}, {b}) is shared by more than two cells")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("cell {cell} is degenerate (area {area:e})")]
    DegenerateCell { cell: usize, area: f64 },
    #[error("cells on both sides of edge ({a}, {b}) traverse it in the same direction (folded or overlapping cells)")]
    InconsistentOrientation { a: usize, b: usize },
    #[error("size mismatch: expected {expected} tuples, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid mesh input: {0}")]
    InvalidInput(String),
}

/// Axis-aligned bounds in the mesh plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
}

impl Bounds {
    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a Point2>) -> Option<Bounds> {
        let mut it = pts.into_iter();
        let first = it.next()?;
        let mut b = Bounds {
            xmin: first[0],
            xmax: first[0],
            ymin: first[1],
            ymax: first[1],
        };
        for p in it {
            b.xmin = b.xmin.min(p[0]);
            b.xmax = b.xmax.max(p[0]);
            b.ymin = b.ymin.min(p[1]);
            b.ymax = b.ymax.max(p[1]);
        }
        Some(b)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn union(&self, o: &Bounds) -> Bounds {
        Bounds {
            xmin: self.xmin.min(o.xmin),
            xmax: self.xmax.max(o.xmax),
            ymin: self.ymin.min(o.ymin),
            ymax: self.ymax.max(o.ymax),
        }
    }
}

/// The cells on either side of an undirected edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeCells {
    pub first: usize,
    pub second: Option<usize>,
}

/// A closed chain of boundary edges, traversed with the interior on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLoop {
    pub name: String,
    /// Directed `(start, end)` point-index pairs; each edge ends where the next starts.
    pub edges: Vec<(usize, usize)>,
    /// The unique cell incident to each edge.
    pub adjacent_cells: Vec<usize>,
}

impl BoundaryLoop {
    /// Shoelace area enclosed by the loop; negative for holes.
    pub fn signed_area(&self, points: &[Point2]) -> f64 {
        let pts: Vec<Point2> = self.edges.iter().map(|&(a, _)| points[a]).collect();
        signed_area(&pts)
    }
}

/// A planar polygonal mesh. Immutable once built.
#[derive(Debug, Clone)]
pub struct PolyMesh {
    points: Vec<Point2>,
    cell_offsets: Vec<usize>,
    cell_points: Vec<usize>,
    edge_cells: HashMap<(usize, usize), EdgeCells>,
    centres: Vec<Point2>,
    areas: Vec<f64>,
    loops: Vec<BoundaryLoop>,
    bounds: Bounds,
    locator: Locator,
}

/// Builds a mesh from parsed file contents. `plane_tolerance` defaults to
/// 1e-6 of the 3D bounding-box diagonal.
pub fn build_mesh(raw: &RawDataset, plane_tolerance: Option<f64>) -> Result<PolyMesh, MeshError> {
    PolyMesh::build(&raw.points, &raw.cells, plane_tolerance)
}

impl PolyMesh {
    pub fn build(
        points: &[[f64; 3]],
        cells: &[Vec<usize>],
        plane_tolerance: Option<f64>,
    ) -> Result<PolyMesh, MeshError> {
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(MeshError::InvalidInput(format!("cell {c} has fewer than 3 vertices")));
            }
            if let Some(&i) = cell.iter().find(|&&i| i >= points.len()) {
                return Err(MeshError::InvalidInput(format!(
                    "cell {c} references missing point {i}"
                )));
            }
        }
        let points2 = project_to_plane(points, plane_tolerance)?;
        let bounds = Bounds::of_points(&points2).unwrap_or(Bounds {
            xmin: 0.0,
            xmax: 0.0,
            ymin: 0.0,
            ymax: 0.0,
        });
        let min_area = 1e-12 * bounds.width() * bounds.height();

        let mut cell_offsets = Vec::with_capacity(cells.len() + 1);
        let mut cell_points = Vec::with_capacity(cells.iter().map(Vec::len).sum());
        let mut centres = Vec::with_capacity(cells.len());
        let mut areas = Vec::with_capacity(cells.len());
        cell_offsets.push(0);
        for (c, cell) in cells.iter().enumerate() {
            let mut ids = cell.clone();
            let mut sorted = ids.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(MeshError::DegenerateCell { cell: c, area: 0.0 });
            }
            let mut pts: Vec<Point2> = ids.iter().map(|&i| points2[i]).collect();
            let mut area = signed_area(&pts);
            if area.is_nan() || area.abs() <= min_area {
                return Err(MeshError::DegenerateCell {
                    cell: c,
                    area: area.abs(),
                });
            }
            if area < 0.0 {
                ids.reverse();
                pts.reverse();
                area = -area;
            }
            centres.push(centroid(&pts));
            areas.push(area);
            cell_points.extend_from_slice(&ids);
            cell_offsets.push(cell_points.len());
        }

        let mut edge_cells: HashMap<(usize, usize), EdgeCells> = HashMap::new();
        let mut directed: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for c in 0..cells.len() {
            let ids = &cell_points[cell_offsets[c]..cell_offsets[c + 1]];
            for k in 0..ids.len() {
                let (a, b) = (ids[k], ids[(k + 1) % ids.len()]);
                let key = (a.min(b), a.max(b));
                match edge_cells.get_mut(&key) {
                    None => {
                        edge_cells.insert(key, EdgeCells { first: c, second: None });
                    }
                    Some(e) if e.second.is_none() => e.second = Some(c),
                    Some(_) => return Err(MeshError::NonManifoldEdge { a: key.0, b: key.1 }),
                }
                if directed.insert((a, b), (c, k)).is_some() {
                    return Err(MeshError::InconsistentOrientation { a: key.0, b: key.1 });
                }
            }
        }

        let locator = Locator::new(&points2, &cell_offsets, &cell_points, &bounds);
        let mut mesh = PolyMesh {
            points: points2,
            cell_offsets,
            cell_points,
            edge_cells,
            centres,
            areas,
            loops: Vec::new(),
            bounds,
            locator,
        };
        mesh.loops = mesh.trace_boundary_loops(&directed)?;
        Ok(mesh)
    }

    fn is_boundary(&self, a: usize, b: usize) -> bool {
        self.edge_cells
            .get(&(a.min(b), a.max(b)))
            .is_some_and(|e| e.second.is_none())
    }

    /// Chains boundary edges into loops by walking the fan of cells around
    /// each vertex, so vertices shared by two loops are resolved correctly.
    fn trace_boundary_loops(
        &self,
        directed: &HashMap<(usize, usize), (usize, usize)>,
    ) -> Result<Vec<BoundaryLoop>, MeshError> {
        let mut boundary: Vec<(usize, usize, usize)> = Vec::new();
        for c in 0..self.n_cells() {
            let ids = self.cell(c);
            for k in 0..ids.len() {
                let (a, b) = (ids[k], ids[(k + 1) % ids.len()]);
                if self.is_boundary(a, b) {
                    boundary.push((a, b, c));
                }
            }
        }
        boundary.sort_unstable();
        let mut visited: HashMap<(usize, usize), bool> = boundary.iter().map(|&(a, b, _)| ((a, b), false)).collect();

        let next_boundary_edge = |a: usize, b: usize| -> Result<(usize, usize, usize), MeshError> {
            let (mut cell, mut k) = directed[&(a, b)];
            for _ in 0..=self.n_cells() {
                let ids = self.cell(cell);
                let n = ids.len();
                let (v, w) = (ids[(k + 1) % n], ids[(k + 2) % n]);
                if self.is_boundary(v, w) {
                    return Ok((v, w, cell));
                }
                let &(nc, nk) = directed.get(&(w, v)).ok_or(MeshError::InconsistentOrientation {
                    a: v.min(w),
                    b: v.max(w),
                })?;
                // (w, v) is edge nk of the neighbour, so edge nk + 1 leaves v.
                cell = nc;
                k = nk;
            }
            Err(MeshError::InvalidInput(format!(
                "could not close the boundary loop at vertex {b}"
            )))
        };

        let mut loops = Vec::new();
        for &(a0, b0, c0) in &boundary {
            if visited[&(a0, b0)] {
                continue;
            }
            let mut edges = vec![(a0, b0)];
            let mut adjacent = vec![c0];
            visited.insert((a0, b0), true);
            let (mut a, mut b) = (a0, b0);
            loop {
                let (v, w, c) = next_boundary_edge(a, b)?;
                if (v, w) == (a0, b0) {
                    break;
                }
                if visited.insert((v, w), true) != Some(false) {
                    return Err(MeshError::InvalidInput(format!(
                        "boundary edge ({v}, {w}) reached twice while tracing a loop"
                    )));
                }
                edges.push((v, w));
                adjacent.push(c);
                (a, b) = (v, w);
            }
            loops.push(BoundaryLoop {
                name: String::new(),
                edges,
                adjacent_cells: adjacent,
            });
        }

        let mut keyed: Vec<(f64, BoundaryLoop)> = loops
            .into_iter()
            .map(|l| (l.signed_area(&self.points).abs(), l))
            .collect();
        // Largest enclosed area first; ties keep the start-edge order.
        keyed.sort_by(|x, y| y.0.total_cmp(&x.0));
        Ok(keyed
            .into_iter()
            .enumerate()
            .map(|(i, (_, mut l))| {
                l.name = format!("boundary{i}");
                l
            })
            .collect())
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cell_offsets.len() - 1
    }

    /// Vertex indices of cell `c`, counter-clockwise.
    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cell_points[self.cell_offsets[c]..self.cell_offsets[c + 1]]
    }

    pub fn cell_polygon(&self, c: usize) -> Vec<Point2> {
        self.cell(c).iter().map(|&i| self.points[i]).collect()
    }

    pub fn cell_centres(&self) -> &[Point2] {
        &self.centres
    }

    pub fn cell_areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn boundary_loops(&self) -> &[BoundaryLoop] {
        &self.loops
    }

    pub fn edge_cells(&self, a: usize, b: usize) -> Option<EdgeCells> {
        self.edge_cells.get(&(a.min(b), a.max(b))).copied()
    }

    pub fn n_edges(&self) -> usize {
        self.edge_cells.len()
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    /// Distance below which a point counts as lying on a cell edge.
    pub fn edge_tolerance(&self) -> f64 {
        1e-9 * self.bounds.diagonal()
    }

    /// Finds the cell containing `p`.
    ///
    /// Points within [`edge_tolerance`](Self::edge_tolerance) of an edge go
    /// to the lowest-numbered cell touching that edge, including points just
    /// outside the domain boundary. Returns `None` outside the mesh.
    pub fn locate_cell(&self, p: Point2) -> Option<usize> {
        self.locator.locate(self, p)
    }

    /// Cells whose bounding boxes overlap the given rectangle, ascending.
    pub fn cells_near(&self, lo: Point2, hi: Point2) -> Vec<usize> {
        self.locator.candidates_in(lo, hi)
    }

    /// Converts point data to cell data: each cell receives the mean of its
    /// vertex tuples, component-wise.
    ///
    /// The mean is exact at the centroid for affine fields on triangles and
    /// parallelograms, reproduces constant fields bit-for-bit, and never
    /// leaves the range of the vertex values.
    pub fn point_to_cell(&self, f: &Field) -> Result<Field, MeshError> {
        if f.len() != self.n_points() {
            return Err(MeshError::SizeMismatch {
                expected: self.n_points(),
                found: f.len(),
            });
        }
        let w = f.components();
        let mut out = Vec::with_capacity(self.n_cells() * w);
        for c in 0..self.n_cells() {
            let ids = self.cell(c);
            let n = ids.len() as f64;
            for k in 0..w {
                let first = f.tuple(ids[0])[k];
                let (mut lo, mut hi, mut dev) = (first, first, 0.0);
                for &i in ids {
                    let v = f.tuple(i)[k];
                    lo = lo.min(v);
                    hi = hi.max(v);
                    dev += v - first;
                }
                out.push((first + dev / n).clamp(lo, hi));
            }
        }
        Ok(Field::from_parts_unchecked(f.kind(), out))
    }
}

/// Flattens 3D points onto their best-fit plane.
///
/// The plane normal is the least-variance principal axis. The in-plane x
/// axis is the projection of the world x axis (or of y when x is nearly
/// normal to the plane); the y axis completes the frame and is signed so its
/// dominant world component is positive. Coordinates are `p . ex`, `p . ey`,
/// so a dataset lying in z = const keeps its x and y values exactly.
fn project_to_plane(points: &[[f64; 3]], tol: Option<f64>) -> Result<Vec<Point2>, MeshError> {
    if points.len() < 3 {
        return Ok(points.iter().map(|p| [p[0], p[1]]).collect());
    }
    let n = points.len() as f64;
    let mut mean = [0.0; 3];
    let (mut lo, mut hi) = (points[0], points[0]);
    for p in points {
        for k in 0..3 {
            mean[k] += p[k] / n;
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let diag = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt();
    let tol = tol.unwrap_or(1e-6 * diag);

    let mut cov = [[0.0; 3]; 3];
    for p in points {
        let d = [p[0] - mean[0], p[1] - mean[1], p[2] - mean[2]];
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    let (vals, vecs) = symmetric_eigen3(cov);
    let kmin = (0..3).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let normal = snap(vecs[kmin]);

    let deviation = points
        .iter()
        .map(|p| ((p[0] - mean[0]) * normal[0] + (p[1] - mean[1]) * normal[1] + (p[2] - mean[2]) * normal[2]).abs())
        .fold(0.0, f64::max);
    if deviation > tol {
        return Err(MeshError::NotPlanar {
            deviation,
            tolerance: tol,
        });
    }

    let reject = |axis: [f64; 3]| {
        let d = dot3(axis, normal);
        [
            axis[0] - d * normal[0],
            axis[1] - d * normal[1],
            axis[2] - d * normal[2],
        ]
    };
    let mut ex = reject([1.0, 0.0, 0.0]);
    if norm3(ex) < 0.1 {
        ex = reject([0.0, 1.0, 0.0]);
    }
    let ex = snap(scale3(ex, 1.0 / norm3(ex)));
    let mut ey = snap(cross3(normal, ex));
    let dominant = (0..3).max_by(|&a, &b| ey[a].abs().total_cmp(&ey[b].abs())).unwrap();
    if ey[dominant] < 0.0 {
        ey = scale3(ey, -1.0);
    }
    Ok(points.iter().map(|p| [dot3(*p, ex), dot3(*p, ey)]).collect())
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: [f64; 3]) -> f64 {
    dot3(a, a).sqrt()
}

fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// Zeroes round-off components of a unit vector and renormalises, so
/// axis-aligned frames come out exact.
fn snap(v: [f64; 3]) -> [f64; 3] {
    let mut s = v.map(|c| if c.abs() < 1e-12 { 0.0 } else { c });
    let n = norm3(s);
    if n > 0.0 {
        s = scale3(s, 1.0 / n);
        for c in s.iter_mut() {
            if (c.abs() - 1.0).abs() < 1e-15 {
                *c = c.signum();
            }
        }
    }
    s
}
