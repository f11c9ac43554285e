use super::geometry::{contains, point_segment_distance};
use super::{Bounds, PolyMesh};
use crate::Point2;

/// Uniform bin grid over cell bounding boxes.
#[derive(Debug, Clone)]
pub(super) struct Locator {
    origin: Point2,
    size: [f64; 2],
    nx: usize,
    ny: usize,
    bins: Vec<Vec<u32>>,
}

impl Locator {
    pub(super) fn new(points: &[Point2], offsets: &[usize], cell_points: &[usize], bounds: &Bounds) -> Locator {
        let n_cells = offsets.len().saturating_sub(1);
        let (w, h) = (
            bounds.width().max(f64::MIN_POSITIVE),
            bounds.height().max(f64::MIN_POSITIVE),
        );
        let target = (n_cells as f64).sqrt().max(1.0);
        let aspect = (w / h).clamp(1e-3, 1e3);
        let nx = ((target * aspect.sqrt()).ceil() as usize).clamp(1, 4096);
        let ny = ((target / aspect.sqrt()).ceil() as usize).clamp(1, 4096);
        let mut loc = Locator {
            origin: [bounds.xmin, bounds.ymin],
            size: [w / nx as f64, h / ny as f64],
            nx,
            ny,
            bins: vec![Vec::new(); nx * ny],
        };
        let eps = 1e-9 * bounds.diagonal();
        for c in 0..n_cells {
            let ids = &cell_points[offsets[c]..offsets[c + 1]];
            let (mut lo, mut hi) = (points[ids[0]], points[ids[0]]);
            for &i in ids {
                let p = points[i];
                lo = [lo[0].min(p[0]), lo[1].min(p[1])];
                hi = [hi[0].max(p[0]), hi[1].max(p[1])];
            }
            let (i0, j0) = loc.bin_of([lo[0] - eps, lo[1] - eps]);
            let (i1, j1) = loc.bin_of([hi[0] + eps, hi[1] + eps]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.bins[j * nx + i].push(c as u32);
                }
            }
        }
        loc
    }

    fn bin_of(&self, p: Point2) -> (usize, usize) {
        let f = |v: f64, o: f64, s: f64, n: usize| {
            let k = ((v - o) / s).floor();
            if k.is_nan() || k < 0.0 {
                0
            } else {
                (k as usize).min(n - 1)
            }
        };
        (
            f(p[0], self.origin[0], self.size[0], self.nx),
            f(p[1], self.origin[1], self.size[1], self.ny),
        )
    }

    pub(super) fn candidates_in(&self, lo: Point2, hi: Point2) -> Vec<usize> {
        let (i0, j0) = self.bin_of(lo);
        let (i1, j1) = self.bin_of(hi);
        let mut out: Vec<usize> = Vec::new();
        for j in j0..=j1 {
            for i in i0..=i1 {
                out.extend(self.bins[j * self.nx + i].iter().map(|&c| c as usize));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    pub(super) fn locate(&self, mesh: &PolyMesh, p: Point2) -> Option<usize> {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return None;
        }
        let b = mesh.bounds();
        let eps = mesh.edge_tolerance();
        if p[0] < b.xmin - eps || p[0] > b.xmax + eps || p[1] < b.ymin - eps || p[1] > b.ymax + eps {
            return None;
        }
        let candidates = self.candidates_in([p[0] - eps, p[1] - eps], [p[0] + eps, p[1] + eps]);
        candidates.into_iter().find(|&c| {
            let poly = mesh.cell_polygon(c);
            let n = poly.len();
            (0..n).any(|k| point_segment_distance(p, poly[k], poly[(k + 1) % n]) <= eps) || contains(&poly, p)
        })
    }
}
