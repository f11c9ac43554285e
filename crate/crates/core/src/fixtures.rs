//! Small reference datasets and multi-format encoders.
//!
//! Used by the test suites, the examples and the bundled sample data.

use std::f64::consts::PI;
use std::fmt::Write as _;

use base64::Engine as _;

use crate::field::{Field, FieldKind};
use crate::vtk_io::RawDataset;

/// Step height of the synthetic backward-facing step.
pub const BFS_STEP_HEIGHT: f64 = 0.0094318;

/// 2x2 unit-square quad mesh with 9 row-major points. Cells are numbered
/// bottom-left, bottom-right, top-left, top-right and carry the cell scalar
/// "p" equal to the cell id.
pub fn unitsq4() -> RawDataset {
    let mut ds = grid(2, 2, 0.5);
    ds.cell_fields
        .insert("p".into(), Field::scalar(vec![0.0, 1.0, 2.0, 3.0]).unwrap());
    ds
}

/// Three unit quads at (0,0), (1,0) and (1,1): an L-shape with the notch
/// (0,1)x(1,2) missing. Cell scalar "p" equals the cell id.
pub fn lmesh() -> RawDataset {
    let points = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [2.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [1.0, 1.0, 0.0],
        [2.0, 1.0, 0.0],
        [1.0, 2.0, 0.0],
        [2.0, 2.0, 0.0],
    ];
    let cells = vec![vec![0, 1, 4, 3], vec![1, 2, 5, 4], vec![4, 5, 7, 6]];
    let mut ds = RawDataset::new(points, cells);
    ds.cell_fields
        .insert("p".into(), Field::scalar(vec![0.0, 1.0, 2.0]).unwrap());
    ds
}

/// 3x3 unit quads on [0,3]^2 with the centre quad removed: a square ring.
pub fn ring() -> RawDataset {
    let full = grid(3, 3, 1.0);
    let cells = full
        .cells
        .into_iter()
        .enumerate()
        .filter(|&(c, _)| c != 4)
        .map(|(_, cell)| cell)
        .collect();
    RawDataset::new(full.points, cells)
}

/// The unit right triangle (0,0), (1,0), (0,1).
pub fn right_triangle() -> RawDataset {
    RawDataset::new(
        vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        vec![vec![0, 1, 2]],
    )
}

/// Uniform `nx` x `ny` quad grid with spacing `d`, origin at (0,0),
/// row-major points and cells.
pub fn grid(nx: usize, ny: usize, d: f64) -> RawDataset {
    let mut points = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            points.push([i as f64 * d, j as f64 * d, 0.0]);
        }
    }
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let a = j * (nx + 1) + i;
            cells.push(vec![a, a + 1, a + nx + 2, a + nx + 1]);
        }
    }
    RawDataset::new(points, cells)
}

/// Polar mesh of the disk of radius `radius` centred at the origin:
/// a triangle fan around the centre and `n_r - 1` rings of quads.
/// Carries the rigid-rotation cell vector field "U" = (-y, x, 0).
pub fn disk(radius: f64, n_r: usize, n_theta: usize) -> RawDataset {
    let mut points = vec![[0.0, 0.0, 0.0]];
    for i in 1..=n_r {
        let r = radius * i as f64 / n_r as f64;
        for k in 0..n_theta {
            let t = 2.0 * PI * k as f64 / n_theta as f64;
            points.push([r * t.cos(), r * t.sin(), 0.0]);
        }
    }
    let at = |i: usize, k: usize| 1 + (i - 1) * n_theta + k % n_theta;
    let mut cells = Vec::new();
    for k in 0..n_theta {
        cells.push(vec![0, at(1, k), at(1, k + 1)]);
    }
    for i in 1..n_r {
        for k in 0..n_theta {
            cells.push(vec![at(i, k), at(i + 1, k), at(i + 1, k + 1), at(i, k + 1)]);
        }
    }
    let mut ds = RawDataset::new(points, cells);
    let centres = cell_vertex_means(&ds);
    let u: Vec<[f64; 3]> = centres.iter().map(|c| [-c[1], c[0], 0.0]).collect();
    ds.cell_fields.insert("U".into(), Field::vector(&u).unwrap());
    ds
}

/// Synthetic backward-facing-step flow with step height
/// [`BFS_STEP_HEIGHT`].
///
/// The inlet channel spans y in [h, 3h] for x in [-5h, 0]; past the step the
/// channel spans y in [0, 3h] up to x = 20h. Cells are h/4 squares. The cell
/// vector field "UMean" is an analytic velocity with a recirculation bubble
/// behind the step for 0 < x < 6h; the point scalar "p" is a linear pressure
/// drop.
pub fn bfs() -> RawDataset {
    let h = BFS_STEP_HEIGHT;
    let d = h / 4.0;
    let (i0, i1, j1, jstep) = (-20i64, 80i64, 12i64, 4i64);
    let inside = |i: i64, j: i64| i >= 0 || j >= jstep;

    let mut index = std::collections::HashMap::new();
    let mut points = Vec::new();
    for j in 0..=j1 {
        for i in i0..=i1 {
            let used = [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)]
                .iter()
                .any(|&(ci, cj)| ci >= i0 && ci < i1 && cj >= 0 && cj < j1 && inside(ci, cj));
            if used {
                index.insert((i, j), points.len());
                points.push([i as f64 * d, j as f64 * d, 0.0]);
            }
        }
    }
    let mut cells = Vec::new();
    for j in 0..j1 {
        for i in i0..i1 {
            if inside(i, j) {
                cells.push(vec![
                    index[&(i, j)],
                    index[&(i + 1, j)],
                    index[&(i + 1, j + 1)],
                    index[&(i, j + 1)],
                ]);
            }
        }
    }
    let mut ds = RawDataset::new(points, cells);
    let centres = cell_vertex_means(&ds);
    let u: Vec<[f64; 3]> = centres.iter().map(|c| bfs_velocity(c[0], c[1])).collect();
    ds.cell_fields.insert("UMean".into(), Field::vector(&u).unwrap());
    let p: Vec<f64> = ds.points.iter().map(|q| 1.0 - q[0] / (25.0 * h)).collect();
    ds.point_fields.insert("p".into(), Field::scalar(p).unwrap());
    ds
}

/// The analytic velocity of [`bfs`] at (x, y), normalised by the bulk inlet
/// velocity.
pub fn bfs_velocity(x: f64, y: f64) -> [f64; 3] {
    let h = BFS_STEP_HEIGHT;
    if x < 0.0 {
        let eta = (y - h) / (2.0 * h);
        return [6.0 * eta * (1.0 - eta), 0.0, 0.0];
    }
    let eta = y / (3.0 * h);
    let base = 4.0 * eta * (1.0 - eta);
    if x >= 6.0 * h {
        return [base, 0.0, 0.0];
    }
    let r = (PI * x / (6.0 * h)).sin();
    let recirc = if y < h {
        -0.2 * (PI * y / h).sin()
    } else {
        let e = (y - h) / (2.0 * h);
        6.0 * e * (1.0 - e)
    };
    let u = (1.0 - r) * base + r * recirc;
    let v = -0.1 * (2.0 * PI * x / (6.0 * h)).sin() * (PI * y / (3.0 * h)).sin();
    [u, v, 0.0]
}

fn cell_vertex_means(ds: &RawDataset) -> Vec<[f64; 2]> {
    ds.cells
        .iter()
        .map(|c| {
            let n = c.len() as f64;
            let (x, y) = c
                .iter()
                .fold((0.0, 0.0), |(x, y), &i| (x + ds.points[i][0], y + ds.points[i][1]));
            [x / n, y / n]
        })
        .collect()
}

/// Layout of the data arrays in an encoded `.vtu` document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VtuEncoding {
    Ascii,
    /// Inline base64 with a UInt32 byte-count header.
    Binary,
    /// Raw little-endian bytes in an `AppendedData` block.
    AppendedRaw,
    /// Base64 blocks in an `AppendedData` block.
    AppendedBase64,
}

fn vtk_keyword(kind: FieldKind) -> &'static str {
    match kind {
        FieldKind::Scalar => "SCALARS",
        FieldKind::Vector => "VECTORS",
        FieldKind::Tensor => "TENSORS",
    }
}

/// Encodes `ds` as legacy BINARY `UNSTRUCTURED_GRID` (big-endian doubles,
/// cell types 5/9/7).
pub fn encode_legacy_binary(ds: &RawDataset) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(b"# vtk DataFile Version 3.0\nbinary fixture\nBINARY\nDATASET UNSTRUCTURED_GRID\n");
    out.extend_from_slice(format!("POINTS {} double\n", ds.points.len()).as_bytes());
    for p in &ds.points {
        for v in p {
            out.extend_from_slice(&v.to_be_bytes());
        }
    }
    out.push(b'\n');
    let size: usize = ds.cells.iter().map(|c| c.len() + 1).sum();
    out.extend_from_slice(format!("CELLS {} {}\n", ds.cells.len(), size).as_bytes());
    for c in &ds.cells {
        out.extend_from_slice(&(c.len() as i32).to_be_bytes());
        for &i in c {
            out.extend_from_slice(&(i as i32).to_be_bytes());
        }
    }
    out.push(b'\n');
    out.extend_from_slice(format!("CELL_TYPES {}\n", ds.cells.len()).as_bytes());
    for c in &ds.cells {
        let t: i32 = match c.len() {
            3 => 5,
            4 => 9,
            _ => 7,
        };
        out.extend_from_slice(&t.to_be_bytes());
    }
    out.push(b'\n');
    let section = |out: &mut Vec<u8>, header: String, fields: &std::collections::BTreeMap<String, Field>| {
        if fields.is_empty() {
            return;
        }
        out.extend_from_slice(header.as_bytes());
        for (name, f) in fields {
            let name = crate::vtk_io::encode_name(name);
            let line = match f.kind() {
                FieldKind::Scalar => format!("SCALARS {name} double 1\nLOOKUP_TABLE default\n"),
                k => format!("{} {name} double\n", vtk_keyword(k)),
            };
            out.extend_from_slice(line.as_bytes());
            for v in f.as_slice() {
                out.extend_from_slice(&v.to_be_bytes());
            }
            out.push(b'\n');
        }
    };
    section(&mut out, format!("POINT_DATA {}\n", ds.points.len()), &ds.point_fields);
    section(&mut out, format!("CELL_DATA {}\n", ds.cells.len()), &ds.cell_fields);
    out
}

/// Encodes `ds` as an uncompressed `.vtu` document.
pub fn encode_vtu(ds: &RawDataset, enc: VtuEncoding) -> Vec<u8> {
    let mut connectivity = Vec::new();
    let mut offsets = Vec::new();
    let mut types = Vec::new();
    for c in &ds.cells {
        connectivity.extend(c.iter().map(|&i| i as i64));
        offsets.push(connectivity.len() as i64);
        types.push(match c.len() {
            3 => 5u8,
            4 => 9,
            _ => 7,
        });
    }
    let points: Vec<f64> = ds.points.iter().flatten().copied().collect();

    let mut w = VtuWriter {
        enc,
        body: String::new(),
        appended: Vec::new(),
    };
    let _ = write!(
        w.body,
        "<?xml version=\"1.0\"?>\n<VTKFile type=\"UnstructuredGrid\" version=\"1.0\" byte_order=\"LittleEndian\" header_type=\"UInt32\">\n  <UnstructuredGrid>\n    <Piece NumberOfPoints=\"{}\" NumberOfCells=\"{}\">\n",
        ds.points.len(),
        ds.cells.len()
    );
    for (tag, fields) in [("PointData", &ds.point_fields), ("CellData", &ds.cell_fields)] {
        let _ = writeln!(w.body, "      <{tag}>");
        for (name, f) in fields {
            w.array_f64(&xml_escape(name), f.components(), f.as_slice());
        }
        let _ = writeln!(w.body, "      </{tag}>");
    }
    w.body.push_str("      <Points>\n");
    w.array_f64("Points", 3, &points);
    w.body.push_str("      </Points>\n      <Cells>\n");
    w.array_i64("connectivity", &connectivity);
    w.array_i64("offsets", &offsets);
    w.array_u8("types", &types);
    w.body.push_str("      </Cells>\n    </Piece>\n  </UnstructuredGrid>\n");
    let mut out = w.body.into_bytes();
    match enc {
        VtuEncoding::AppendedRaw | VtuEncoding::AppendedBase64 => {
            let encoding = if enc == VtuEncoding::AppendedRaw {
                "raw"
            } else {
                "base64"
            };
            out.extend_from_slice(format!("  <AppendedData encoding=\"{encoding}\">\n   _").as_bytes());
            out.extend_from_slice(&w.appended);
            out.extend_from_slice(b"\n  </AppendedData>\n");
        }
        _ => {}
    }
    out.extend_from_slice(b"</VTKFile>\n");
    out
}

struct VtuWriter {
    enc: VtuEncoding,
    body: String,
    appended: Vec<u8>,
}

impl VtuWriter {
    fn array(&mut self, ty: &str, name: &str, ncomp: usize, ascii: Vec<String>, bytes: Vec<u8>) {
        let format = match self.enc {
            VtuEncoding::Ascii => "ascii",
            VtuEncoding::Binary => "binary",
            _ => "appended",
        };
        let _ = write!(
            self.body,
            "        <DataArray type=\"{ty}\" Name=\"{name}\" NumberOfComponents=\"{ncomp}\" format=\"{format}\""
        );
        let b64 = base64::engine::general_purpose::STANDARD;
        let mut block = (bytes.len() as u32).to_le_bytes().to_vec();
        block.extend_from_slice(&bytes);
        match self.enc {
            VtuEncoding::Ascii => {
                let _ = writeln!(self.body, ">\n          {}\n        </DataArray>", ascii.join(" "));
            }
            VtuEncoding::Binary => {
                let _ = writeln!(self.body, ">\n          {}\n        </DataArray>", b64.encode(&block));
            }
            VtuEncoding::AppendedRaw => {
                let _ = writeln!(self.body, " offset=\"{}\"/>", self.appended.len());
                self.appended.extend_from_slice(&block);
            }
            VtuEncoding::AppendedBase64 => {
                let _ = writeln!(self.body, " offset=\"{}\"/>", self.appended.len());
                self.appended.extend_from_slice(b64.encode(&block).as_bytes());
            }
        }
    }

    fn array_f64(&mut self, name: &str, ncomp: usize, v: &[f64]) {
        let ascii = v.iter().map(|x| crate::numfmt::format_roundtrip(*x)).collect();
        let bytes = v.iter().flat_map(|x| x.to_le_bytes()).collect();
        self.array("Float64", name, ncomp, ascii, bytes);
    }

    fn array_i64(&mut self, name: &str, v: &[i64]) {
        let ascii = v.iter().map(i64::to_string).collect();
        let bytes = v.iter().flat_map(|x| x.to_le_bytes()).collect();
        self.array("Int64", name, 1, ascii, bytes);
    }

    fn array_u8(&mut self, name: &str, v: &[u8]) {
        let ascii = v.iter().map(u8::to_string).collect();
        self.array("UInt8", name, 1, ascii, v.to_vec());
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
