#![allow(dead_code)]

use flowpost::{Field, FieldKind, RawDataset};
use rand::Rng;

pub type P2 = [f64; 2];

/// An `nx` x `ny` quad grid on [0, nx*d] x [0, ny*d] with interior points
/// jittered by up to `jitter * d`, and with a random subset of cells stored
/// clockwise.
pub fn perturbed_quads(rng: &mut impl Rng, nx: usize, ny: usize, d: f64, jitter: f64) -> RawDataset {
    let mut points = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            let mut p = [i as f64 * d, j as f64 * d, 0.0];
            if i > 0 && i < nx {
                p[0] += rng.gen_range(-jitter..jitter) * d;
            }
            if j > 0 && j < ny {
                p[1] += rng.gen_range(-jitter..jitter) * d;
            }
            points.push(p);
        }
    }
    let mut cells = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let a = j * (nx + 1) + i;
            let mut c = vec![a, a + 1, a + nx + 2, a + nx + 1];
            if rng.gen_bool(0.3) {
                c.reverse();
            }
            let r = rng.gen_range(0..4);
            c.rotate_left(r);
            cells.push(c);
        }
    }
    RawDataset::new(points, cells)
}

/// Attaches a random scalar, vector and tensor field to both points and cells.
pub fn with_random_fields(rng: &mut impl Rng, mut ds: RawDataset) -> RawDataset {
    for (map, n) in [
        (&mut ds.point_fields, ds.points.len()),
        (&mut ds.cell_fields, ds.cells.len()),
    ] {
        for (name, kind) in [
            ("s", FieldKind::Scalar),
            ("v", FieldKind::Vector),
            ("t", FieldKind::Tensor),
        ] {
            let data = (0..n * kind.components()).map(|_| rng.gen_range(-1e3..1e3)).collect();
            map.insert(name.to_string(), Field::new(kind, data).unwrap());
        }
    }
    ds
}

pub fn shoelace(poly: &[P2]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1])
        .sum::<f64>()
        * 0.5
}

/// Area centroid by summing the triangles (v0, vi, vi+1).
pub fn fan_centroid(poly: &[P2]) -> P2 {
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 1..poly.len() - 1 {
        let (p, q, r) = (poly[0], poly[i], poly[i + 1]);
        let t = 0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]));
        a += t;
        cx += t * (p[0] + q[0] + r[0]) / 3.0;
        cy += t * (p[1] + q[1] + r[1]) / 3.0;
    }
    [cx / a, cy / a]
}

pub fn vertex_mean(poly: &[P2]) -> P2 {
    let n = poly.len() as f64;
    [
        poly.iter().map(|p| p[0]).sum::<f64>() / n,
        poly.iter().map(|p| p[1]).sum::<f64>() / n,
    ]
}

/// Distance from `p` to segment `a`-`b` as the minimum over the two end
/// points and, when the foot of the perpendicular lies on the segment, the
/// perpendicular distance.
pub fn segment_distance(p: P2, a: P2, b: P2) -> f64 {
    let da = (p[0] - a[0]).hypot(p[1] - a[1]);
    let db = (p[0] - b[0]).hypot(p[1] - b[1]);
    let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
    let len = ex.hypot(ey);
    let along = ((p[0] - a[0]) * ex + (p[1] - a[1]) * ey) / len;
    let mut best = da.min(db);
    if along > 0.0 && along < len {
        best = best.min(((p[0] - a[0]) * ey - (p[1] - a[1]) * ex).abs() / len);
    }
    best
}

/// Edges used by exactly one cell, found by an all-pairs scan.
pub fn brute_boundary_edges(cells: &[Vec<usize>]) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = Vec::new();
    for c in cells {
        for k in 0..c.len() {
            let (a, b) = (c[k], c[(k + 1) % c.len()]);
            all.push((a.min(b), a.max(b)));
        }
    }
    let mut out: Vec<(usize, usize)> = all
        .iter()
        .filter(|e| all.iter().filter(|f| f == e).count() == 1)
        .copied()
        .collect();
    out.sort();
    out
}

/// Crossing-number point-in-polygon test, written independently of the
/// library's.
pub fn inside(poly: &[P2], p: P2) -> bool {
    let mut crossings = 0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let (lo, hi) = if a[1] <= b[1] { (a, b) } else { (b, a) };
        if p[1] >= lo[1] && p[1] < hi[1] {
            let x = lo[0] + (p[1] - lo[1]) * (hi[0] - lo[0]) / (hi[1] - lo[1]);
            if x > p[0] {
                crossings += 1;
            }
        }
    }
    crossings % 2 == 1
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn datasets_close(a: &RawDataset, b: &RawDataset, tol: f64) -> Result<(), String> {
    if a.cells != b.cells {
        return Err("cell connectivity differs".into());
    }
    if a.points.len() != b.points.len() {
        return Err("point counts differ".into());
    }
    for (p, q) in a.points.iter().zip(&b.points) {
        if !(0..3).all(|k| rel_close(p[k], q[k], tol)) {
            return Err(format!("points differ: {p:?} vs {q:?}"));
        }
    }
    for (fa, fb, what) in [
        (&a.point_fields, &b.point_fields, "point"),
        (&a.cell_fields, &b.cell_fields, "cell"),
    ] {
        if fa.keys().collect::<Vec<_>>() != fb.keys().collect::<Vec<_>>() {
            return Err(format!("{what} field names differ"));
        }
        for (name, f) in fa {
            let g = &fb[name];
            if f.kind() != g.kind() || f.len() != g.len() {
                return Err(format!("{what} field {name} shape differs"));
            }
            if let Some((x, y)) = f
                .as_slice()
                .iter()
                .zip(g.as_slice())
                .find(|(x, y)| !rel_close(**x, **y, tol))
            {
                return Err(format!("{what} field {name}: {x} vs {y}"));
            }
        }
    }
    Ok(())
}
