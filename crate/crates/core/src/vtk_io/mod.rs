//! Readers for VTK-family unstructured data files, and a legacy ASCII writer.
//!
//! Two readers are provided behind the [`Reader`] trait: [`LegacyReader`] for
//! `.vtk` files (ASCII or big-endian BINARY; `POLYDATA` or planar
//! `UNSTRUCTURED_GRID`) and [`XmlReader`] for uncompressed `.vtu` files. The
//! reader is chosen from the file extension by [`ReaderKind`].
//!
//! Parsing is faithful: point data stays point data. Conversion to cell data
//! happens when a [`crate::Case`] is opened.

mod legacy;
mod writer;
mod xml;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::field::{Field, FieldKind};

pub(crate) use legacy::encode_name;
pub use legacy::LegacyReader;
pub use writer::{write_legacy_ascii, write_legacy_ascii_to};
pub use xml::XmlReader;

#[derive(Debug, thiserror::Error)]
pub enum VtkError {
    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown file extension {0:?} (expected .vtk or .vtu)")]
    UnknownExtension(String),
    #[error("malformed header at byte {offset}: {reason}")]
    MalformedHeader { offset: usize, reason: String },
    #[error("syntax error at byte {offset}: {reason}")]
    Syntax { offset: usize, reason: String },
    #[error("truncated payload at byte {offset}: {reason}")]
    TruncatedPayload { offset: usize, reason: String },
    #[error("unsupported cell type {cell_type} at byte {offset} (only triangles, quads and polygons are accepted)")]
    UnsupportedCellType { offset: usize, cell_type: i64 },
    #[error("unsupported dataset at byte {offset}: {reason}")]
    Unsupported { offset: usize, reason: String },
    #[error("malformed XML at byte {offset}: {reason}")]
    MalformedXml { offset: usize, reason: String },
    #[error("compressed data arrays are not supported (compressor {0:?})")]
    UnsupportedCompression(String),
    #[error("invalid dataset at byte {offset}: {reason}")]
    Invalid { offset: usize, reason: String },
}

impl VtkError {
    /// Byte offset in the input where parsing failed, when known.
    pub fn offset(&self) -> Option<usize> {
        match self {
            VtkError::MalformedHeader { offset, .. }
            | VtkError::Syntax { offset, .. }
            | VtkError::TruncatedPayload { offset, .. }
            | VtkError::UnsupportedCellType { offset, .. }
            | VtkError::Unsupported { offset, .. }
            | VtkError::MalformedXml { offset, .. }
            | VtkError::Invalid { offset, .. } => Some(*offset),
            _ => None,
        }
    }
}

pub(crate) type VtkResult<T> = std::result::Result<T, VtkError>;

/// Which encoding a dataset was parsed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    LegacyAscii,
    LegacyBinary,
    XmlVtu,
}

/// Parsed file contents, before any mesh validation.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub points: Vec<[f64; 3]>,
    /// Polygon vertex lists, as stored in the file.
    pub cells: Vec<Vec<usize>>,
    pub point_fields: BTreeMap<String, Field>,
    pub cell_fields: BTreeMap<String, Field>,
    pub source_kind: SourceKind,
}

impl RawDataset {
    pub fn new(points: Vec<[f64; 3]>, cells: Vec<Vec<usize>>) -> Self {
        RawDataset {
            points,
            cells,
            point_fields: BTreeMap::new(),
            cell_fields: BTreeMap::new(),
            source_kind: SourceKind::LegacyAscii,
        }
    }

    /// Checks connectivity, per-field tuple counts and finiteness.
    pub fn validate(&self) -> VtkResult<()> {
        let invalid = |reason: String| VtkError::Invalid { offset: 0, reason };
        let np = self.points.len();
        if let Some(i) = self.points.iter().position(|p| p.iter().any(|c| !c.is_finite())) {
            return Err(invalid(format!("point {i} has a non-finite coordinate")));
        }
        for (c, cell) in self.cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(invalid(format!(
                    "cell {c} has {} vertices (at least 3 required)",
                    cell.len()
                )));
            }
            if let Some(&bad) = cell.iter().find(|&&i| i >= np) {
                return Err(invalid(format!(
                    "cell {c} references point {bad} but only {np} points exist"
                )));
            }
        }
        for (attached, fields, n) in [
            ("point", &self.point_fields, np),
            ("cell", &self.cell_fields, self.cells.len()),
        ] {
            for (name, f) in fields {
                if f.len() != n {
                    return Err(invalid(format!(
                        "{attached} field {name:?} has {} tuples, expected {n}",
                        f.len()
                    )));
                }
                if f.as_slice().iter().any(|v| !v.is_finite()) {
                    return Err(invalid(format!("{attached} field {name:?} contains non-finite values")));
                }
            }
        }
        Ok(())
    }
}

/// Common interface of the format readers.
pub trait Reader {
    fn read_bytes(&self, bytes: &[u8]) -> VtkResult<RawDataset>;

    fn read_path(&self, path: &Path) -> VtkResult<RawDataset> {
        let bytes = std::fs::read(path).map_err(|source| VtkError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.read_bytes(&bytes)
    }
}

/// Reader selected from a file extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReaderKind {
    Legacy,
    Xml,
}

impl ReaderKind {
    pub fn for_path(path: &Path) -> VtkResult<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .unwrap_or_default();
        match ext.as_str() {
            "vtk" => Ok(ReaderKind::Legacy),
            "vtu" => Ok(ReaderKind::Xml),
            _ => Err(VtkError::UnknownExtension(ext)),
        }
    }

    pub fn reader(self) -> &'static dyn Reader {
        match self {
            ReaderKind::Legacy => &LegacyReader,
            ReaderKind::Xml => &XmlReader,
        }
    }
}

/// Reads a `.vtk` or `.vtu` file, dispatching on the extension.
pub fn read_dataset(path: impl AsRef<Path>) -> VtkResult<RawDataset> {
    let path = path.as_ref();
    ReaderKind::for_path(path)?.reader().read_path(path)
}

/// Parses a legacy VTK byte stream.
pub fn read_legacy(bytes: &[u8]) -> VtkResult<RawDataset> {
    LegacyReader.read_bytes(bytes)
}

/// Parses a VTK XML UnstructuredGrid byte stream.
pub fn read_xml_vtu(bytes: &[u8]) -> VtkResult<RawDataset> {
    XmlReader.read_bytes(bytes)
}

/// Maps a raw array of `ncomp`-wide tuples onto a supported field kind.
///
/// 2-component arrays become vectors with a zero third component and
/// 6-component arrays (symmetric tensors, VTK order XX YY ZZ XY YZ XZ) become
/// full tensors. Other widths are not representable and yield `None`.
pub(crate) fn to_field(ncomp: usize, data: Vec<f64>) -> Option<Field> {
    let kind = FieldKind::from_components(ncomp);
    if let Some(kind) = kind {
        return Some(Field::from_parts_unchecked(kind, data));
    }
    match ncomp {
        2 => {
            let out = data.chunks_exact(2).flat_map(|t| [t[0], t[1], 0.0]).collect();
            Some(Field::from_parts_unchecked(FieldKind::Vector, out))
        }
        6 => {
            let out = data
                .chunks_exact(6)
                .flat_map(|t| {
                    let (xx, yy, zz, xy, yz, xz) = (t[0], t[1], t[2], t[3], t[4], t[5]);
                    [xx, xy, xz, xy, yy, yz, xz, yz, zz]
                })
                .collect();
            Some(Field::from_parts_unchecked(FieldKind::Tensor, out))
        }
        _ => None,
    }
}

/// Inserts a field, keeping the last definition when names collide.
pub(crate) fn insert_field(map: &mut BTreeMap<String, Field>, name: String, field: Field, what: &str) {
    if map.insert(name.clone(), field).is_some() {
        log::warn!("duplicate {what} field {name:?}; keeping the last definition");
    }
}
