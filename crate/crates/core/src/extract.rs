//! Data extraction: line profiles, Cartesian resampling and per-edge
//! boundary geometry.

use rayon::prelude::*;

use crate::case::Case;
use crate::error::{Error, Result};
use crate::field::{Field, FieldKind};
use crate::numfmt::format_sig;
use crate::polymesh::geometry::{cross, dot, norm, point_segment_distance, sub};
use crate::Point2;

/// Field values along a straight probe line, one sample per crossed cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub field: String,
    pub p1: Point2,
    pub p2: Point2,
    /// Arc-length positions from `p1`, strictly increasing.
    pub positions: Vec<f64>,
    pub values: Field,
    /// The cell supplying each sample.
    pub cells: Vec<usize>,
}

impl Profile {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Unit direction of the probe line.
    pub fn direction(&self) -> Point2 {
        let d = sub(self.p2, self.p1);
        let l = norm(d);
        [d[0] / l, d[1] / l]
    }

    /// The sample location of position `s`.
    pub fn point_at(&self, s: f64) -> Point2 {
        let d = self.direction();
        [self.p1[0] + s * d[0], self.p1[1] + s * d[1]]
    }

    /// The profile of component `k` of the sampled field.
    pub fn component(&self, k: usize) -> Result<Profile> {
        Ok(Profile {
            field: format!("{}_{k}", self.field),
            values: self.values.component(k)?,
            ..self.clone()
        })
    }

    /// CSV with a `position` column followed by one column per component.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("position");
        for c in self.values.column_names(&self.field) {
            out.push(',');
            out.push_str(&c);
        }
        out.push('\n');
        for (s, t) in self.positions.iter().zip(self.values.tuples()) {
            out.push_str(&format_sig(*s, 9));
            for v in t {
                out.push(',');
                out.push_str(&format_sig(*v, 9));
            }
            out.push('\n');
        }
        out
    }
}

/// A field resampled on a Cartesian grid spanning the case bounds.
#[derive(Debug, Clone)]
pub struct PlaneSample {
    pub field: String,
    pub grid_x: Vec<f64>,
    pub grid_y: Vec<f64>,
    /// Row-major (`y` outer) tuples; NaN where the mask is false.
    pub values: Field,
    /// Row-major; true where the grid point lies in the mesh.
    pub mask: Vec<bool>,
}

impl PlaneSample {
    pub fn nx(&self) -> usize {
        self.grid_x.len()
    }

    pub fn ny(&self) -> usize {
        self.grid_y.len()
    }

    /// Tuple at grid node (i, j).
    pub fn value(&self, i: usize, j: usize) -> &[f64] {
        self.values.tuple(j * self.nx() + i)
    }

    pub fn is_inside(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.nx() + i]
    }

    /// CSV with columns `x,y,mask` then the field components, rows in
    /// row-major order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,mask");
        for c in self.values.column_names(&self.field) {
            out.push(',');
            out.push_str(&c);
        }
        out.push('\n');
        for (j, y) in self.grid_y.iter().enumerate() {
            for (i, x) in self.grid_x.iter().enumerate() {
                out.push_str(&format_sig(*x, 9));
                out.push(',');
                out.push_str(&format_sig(*y, 9));
                out.push_str(if self.is_inside(i, j) { ",1" } else { ",0" });
                for v in self.value(i, j) {
                    out.push(',');
                    out.push_str(&format_sig(*v, 9));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Samples `field` along the segment `p1`-`p2`.
///
/// The segment is split at every cell-edge crossing; each maximal piece
/// inside one cell yields one sample at its midpoint carrying that cell's
/// value. Pieces shorter than 1e-9 of the segment length are dropped, and
/// pieces running along an interior edge take the lower-numbered cell.
pub fn profile_along_line(case: &Case, p1: Point2, p2: Point2, field: &str) -> Result<Profile> {
    let f = case.field_ref(field)?;
    let d = sub(p2, p1);
    let len = norm(d);
    if !len.is_finite() || len <= 0.0 {
        return Err(Error::InvalidArgument(
            "profile end points must be finite and distinct".into(),
        ));
    }
    let mesh = case.mesh();
    let lo = [p1[0].min(p2[0]), p1[1].min(p2[1])];
    let hi = [p1[0].max(p2[0]), p1[1].max(p2[1])];
    let eps = mesh.edge_tolerance();

    let mut ts = vec![0.0, 1.0];
    let pts = mesh.points();
    for c in mesh.cells_near([lo[0] - eps, lo[1] - eps], [hi[0] + eps, hi[1] + eps]) {
        let ids = mesh.cell(c);
        for k in 0..ids.len() {
            let (a, b) = (pts[ids[k]], pts[ids[(k + 1) % ids.len()]]);
            let e = sub(b, a);
            let ap = sub(a, p1);
            let denom = cross(d, e);
            if denom.abs() > 1e-14 * len * norm(e) {
                let t = cross(ap, e) / denom;
                let s = cross(ap, d) / denom;
                if (-1e-12..=1.0 + 1e-12).contains(&s) && (0.0..=1.0).contains(&t) {
                    ts.push(t);
                }
            } else if cross(ap, d).abs() <= eps * len {
                for q in [a, b] {
                    let t = dot(sub(q, p1), d) / (len * len);
                    if (0.0..=1.0).contains(&t) {
                        ts.push(t);
                    }
                }
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|b, a| *b - *a <= 1e-12);

    // Runs of consecutive elementary intervals sharing a cell.
    let mut runs: Vec<(f64, f64, usize)> = Vec::new();
    for w in ts.windows(2) {
        let tm = 0.5 * (w[0] + w[1]);
        let Some(c) = mesh.locate_cell([p1[0] + tm * d[0], p1[1] + tm * d[1]]) else {
            continue;
        };
        match runs.last_mut() {
            Some(r) if r.2 == c && r.1 == w[0] => r.1 = w[1],
            _ => runs.push((w[0], w[1], c)),
        }
    }
    runs.retain(|r| (r.1 - r.0) >= 1e-9);
    if runs.is_empty() {
        return Err(Error::NoIntersection);
    }

    let cells: Vec<usize> = runs.iter().map(|r| r.2).collect();
    Ok(Profile {
        field: field.to_string(),
        p1,
        p2,
        positions: runs.iter().map(|r| 0.5 * (r.0 + r.1) * len).collect(),
        values: f.select(&cells),
        cells,
    })
}

/// Resamples `field` on an `nx` x `ny` grid spanning the case bounds,
/// endpoints included.
pub fn sample_by_plane(case: &Case, nx: usize, ny: usize, field: &str) -> Result<PlaneSample> {
    let f = case.field_ref(field)?;
    sample_field(case, nx, ny, field, f)
}

pub(crate) fn sample_field(case: &Case, nx: usize, ny: usize, name: &str, f: &Field) -> Result<PlaneSample> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidArgument(format!(
            "sample grid needs at least 2 points per direction, got {nx} x {ny}"
        )));
    }
    if f.len() != case.n_cells() {
        return Err(Error::SizeMismatch {
            expected: case.n_cells(),
            found: f.len(),
        });
    }
    let b = case.bounds();
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    };
    let grid_x = axis(b.xmin, b.xmax, nx);
    let grid_y = axis(b.ymin, b.ymax, ny);
    let mesh = case.mesh();
    let located: Vec<Option<usize>> = grid_y
        .par_iter()
        .flat_map_iter(|&y| grid_x.iter().map(move |&x| mesh.locate_cell([x, y])))
        .collect();

    let w = f.components();
    let mut data = Vec::with_capacity(located.len() * w);
    let mut mask = Vec::with_capacity(located.len());
    for c in &located {
        match c {
            Some(c) => data.extend_from_slice(f.tuple(*c)),
            None => data.extend(std::iter::repeat_n(f64::NAN, w)),
        }
        mask.push(c.is_some());
    }
    Ok(PlaneSample {
        field: name.to_string(),
        grid_x,
        grid_y,
        values: Field::from_parts_unchecked(f.kind(), data),
        mask,
    })
}

fn edge_points(case: &Case, boundary: &str) -> Result<Vec<(Point2, Point2, usize)>> {
    let lp = case.boundary(boundary)?;
    let pts = case.mesh().points();
    Ok(lp
        .edges
        .iter()
        .zip(&lp.adjacent_cells)
        .map(|(&(a, b), &c)| (pts[a], pts[b], c))
        .collect())
}

/// Distance from each boundary-adjacent cell centroid to its boundary edge,
/// in loop order.
pub fn dist(case: &Case, boundary: &str) -> Result<Vec<f64>> {
    let centres = case.mesh().cell_centres();
    Ok(edge_points(case, boundary)?
        .into_iter()
        .map(|(a, b, c)| point_segment_distance(centres[c], a, b))
        .collect())
}

/// Unit outward normal of each boundary edge, in loop order.
pub fn normals(case: &Case, boundary: &str) -> Result<Vec<Point2>> {
    Ok(tangents(case, boundary)?.into_iter().map(|t| [t[1], -t[0]]).collect())
}

/// Unit tangent of each boundary edge along the traversal direction.
pub fn tangents(case: &Case, boundary: &str) -> Result<Vec<Point2>> {
    Ok(edge_points(case, boundary)?
        .into_iter()
        .map(|(a, b, _)| {
            let e = sub(b, a);
            let l = norm(e);
            [e[0] / l, e[1] / l]
        })
        .collect())
}

/// The scalar field of cell ids, handy for probing mesh topology.
pub fn cell_id_field(case: &Case) -> Field {
    Field::from_parts_unchecked(FieldKind::Scalar, (0..case.n_cells()).map(|c| c as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn unitsq4() -> Case {
        Case::from_raw(fixtures::unitsq4()).unwrap()
    }

    #[test]
    fn vertical_profile_through_unitsq4() {
        let p = profile_along_line(&unitsq4(), [0.25, -0.1], [0.25, 1.1], "p").unwrap();
        assert_eq!(p.cells, vec![0, 2]);
        assert_eq!(p.values.as_slice(), &[0.0, 2.0]);
        assert!((p.positions[0] - 0.35).abs() < 1e-9 && (p.positions[1] - 0.85).abs() < 1e-9);
    }

    #[test]
    fn profile_inside_one_cell_and_on_edges() {
        let case = unitsq4();
        let p = profile_along_line(&case, [0.1, 0.1], [0.3, 0.2], "p").unwrap();
        assert_eq!(p.cells, vec![0]);
        assert!((p.positions[0] - 0.5 * 0.05f64.sqrt()).abs() < 1e-12);

        let e = profile_along_line(&case, [0.5, 0.0], [0.5, 1.0], "p").unwrap();
        assert_eq!(e.cells, vec![0, 2]);
        assert!(e.positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn profile_errors() {
        let case = unitsq4();
        assert!(matches!(
            profile_along_line(&case, [0.2, 0.2], [0.2, 0.2], "p"),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            profile_along_line(&case, [2.0, 0.0], [3.0, 1.0], "p"),
            Err(Error::NoIntersection)
        ));
        assert!(matches!(
            profile_along_line(&case, [0.0, 0.0], [1.0, 1.0], "q"),
            Err(Error::UnknownField { .. })
        ));
    }

    #[test]
    fn corner_sampling() {
        let s = sample_by_plane(&unitsq4(), 2, 2, "p").unwrap();
        assert_eq!(s.mask, vec![true; 4]);
        assert_eq!(s.values.as_slice(), &[0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(
            sample_by_plane(&unitsq4(), 1, 2, "p"),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn lmesh_notch_is_masked() {
        let case = Case::from_raw(fixtures::lmesh()).unwrap();
        let s = sample_by_plane(&case, 5, 5, "p").unwrap();
        assert_eq!((s.grid_x[1], s.grid_y[3]), (0.5, 1.5));
        assert!(!s.is_inside(1, 3));
        assert!(s.value(1, 3)[0].is_nan());
        assert_eq!(s.value(3, 3), &[2.0]);
        assert_eq!(s.value(1, 1), &[0.0]);
    }

    #[test]
    fn boundary_geometry_on_unitsq4() {
        let case = unitsq4();
        let lp = case.boundary("boundary0").unwrap();
        let n = normals(&case, "boundary0").unwrap();
        let t = tangents(&case, "boundary0").unwrap();
        let d = dist(&case, "boundary0").unwrap();
        assert!(d.iter().all(|&v| v == 0.25));
        let pts = case.mesh().points();
        for (k, &(a, b)) in lp.edges.iter().enumerate() {
            if pts[a][1] == 0.0 && pts[b][1] == 0.0 {
                assert_eq!(n[k], [0.0, -1.0]);
                assert_eq!(t[k], [1.0, 0.0]);
            }
            if pts[a][0] == 1.0 && pts[b][0] == 1.0 {
                assert_eq!(n[k], [1.0, 0.0]);
            }
        }
    }

    #[test]
    fn right_triangle_hypotenuse_distance() {
        let case = Case::from_raw(fixtures::right_triangle()).unwrap();
        let lp = case.boundary("boundary0").unwrap();
        let d = dist(&case, "boundary0").unwrap();
        let pts = case.mesh().points();
        let k = lp
            .edges
            .iter()
            .position(|&(a, b)| pts[a][0] + pts[a][1] == 1.0 && pts[b][0] + pts[b][1] == 1.0)
            .unwrap();
        assert!((d[k] - (1.0 / 3.0) / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let case = unitsq4();
        let p = profile_along_line(&case, [0.25, -0.1], [0.25, 1.1], "p").unwrap();
        assert_eq!(p.to_csv(), "position,p\n0.35,0\n0.85,2\n");
        let s = sample_by_plane(&case, 2, 2, "p").unwrap();
        assert_eq!(s.to_csv(), "x,y,mask,p\n0,0,1,0\n1,0,1,1\n0,1,1,2\n1,1,1,3\n");
    }
}
