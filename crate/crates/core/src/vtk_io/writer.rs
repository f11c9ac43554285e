use std::fmt::Write as _;
use std::path::Path;

use super::legacy::encode_name;
use super::{RawDataset, VtkError, VtkResult};
use crate::field::{Field, FieldKind};
use crate::numfmt::format_roundtrip;

/// Writes `dataset` as legacy ASCII `POLYDATA`.
///
/// Numbers are written in shortest round-trip form, so re-reading the file
/// reproduces every coordinate and field value exactly.
pub fn write_legacy_ascii(dataset: &RawDataset, path: impl AsRef<Path>) -> VtkResult<()> {
    let path = path.as_ref();
    std::fs::write(path, write_legacy_ascii_to(dataset)).map_err(|source| VtkError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Serialises `dataset` to a legacy ASCII document in memory.
pub fn write_legacy_ascii_to(dataset: &RawDataset) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nflowpost dataset\nASCII\nDATASET POLYDATA\n");
    let _ = writeln!(s, "POINTS {} double", dataset.points.len());
    for p in &dataset.points {
        let _ = writeln!(
            s,
            "{} {} {}",
            format_roundtrip(p[0]),
            format_roundtrip(p[1]),
            format_roundtrip(p[2])
        );
    }
    let size: usize = dataset.cells.iter().map(|c| c.len() + 1).sum();
    let _ = writeln!(s, "POLYGONS {} {}", dataset.cells.len(), size);
    for c in &dataset.cells {
        let _ = write!(s, "{}", c.len());
        for i in c {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    if !dataset.point_fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", dataset.points.len());
        for (name, f) in &dataset.point_fields {
            write_field(&mut s, name, f);
        }
    }
    if !dataset.cell_fields.is_empty() {
        let _ = writeln!(s, "CELL_DATA {}", dataset.cells.len());
        for (name, f) in &dataset.cell_fields {
            write_field(&mut s, name, f);
        }
    }
    s
}

fn write_field(s: &mut String, name: &str, f: &Field) {
    let name = encode_name(name);
    match f.kind() {
        FieldKind::Scalar => {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        }
        FieldKind::Vector => {
            let _ = writeln!(s, "VECTORS {name} double");
        }
        FieldKind::Tensor => {
            let _ = writeln!(s, "TENSORS {name} double");
        }
    }
    let per_line = if f.kind() == FieldKind::Tensor {
        3
    } else {
        f.components()
    };
    for t in f.tuples() {
        for row in t.chunks(per_line) {
            let line: Vec<String> = row.iter().map(|&v| format_roundtrip(v)).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vtk_io::read_legacy;

    #[test]
    fn empty_dataset_round_trips() {
        let ds = RawDataset::new(Vec::new(), Vec::new());
        let text = write_legacy_ascii_to(&ds);
        assert!(text.contains("POLYGONS 0 0\n"));
        let back = read_legacy(text.as_bytes()).unwrap();
        assert!(back.points.is_empty() && back.cells.is_empty());
    }

    #[test]
    fn tensor_field_round_trips() {
        let mut ds = RawDataset::new(
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![vec![0, 1, 2]],
        );
        let t: Vec<f64> = (1..=9).map(|k| k as f64 / 7.0).collect();
        ds.cell_fields
            .insert("R stress".into(), Field::new(FieldKind::Tensor, t.clone()).unwrap());
        let back = read_legacy(write_legacy_ascii_to(&ds).as_bytes()).unwrap();
        let f = &back.cell_fields["R stress"];
        assert_eq!(f.kind(), FieldKind::Tensor);
        assert_eq!(f.as_slice(), t.as_slice());
    }
}
