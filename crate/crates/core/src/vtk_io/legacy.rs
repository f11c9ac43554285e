//! Legacy `.vtk` reader (ASCII and big-endian BINARY).

use std::collections::BTreeMap;

use super::{insert_field, to_field, RawDataset, Reader, SourceKind, VtkError, VtkResult};
use crate::field::Field;

/// Reader for legacy `.vtk` files.
#[derive(Debug, Clone, Copy, Default)]
pub struct LegacyReader;

impl Reader for LegacyReader {
    fn read_bytes(&self, bytes: &[u8]) -> VtkResult<RawDataset> {
        Parser::new(bytes).parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Encoding {
    Ascii,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DataType {
    U8,
    I8,
    U16,
    I16,
    U32,
    I32,
    U64,
    I64,
    F32,
    F64,
}

impl DataType {
    fn parse(tok: &str) -> Option<Self> {
        Some(match tok.to_ascii_lowercase().as_str() {
            "unsigned_char" | "vtktypeuint8" => DataType::U8,
            "char" | "signed_char" | "vtktypeint8" => DataType::I8,
            "unsigned_short" | "vtktypeuint16" => DataType::U16,
            "short" | "vtktypeint16" => DataType::I16,
            "unsigned_int" | "vtktypeuint32" => DataType::U32,
            // The legacy writers store ids as 32-bit ints.
            "int" | "vtkidtype" | "vtktypeint32" => DataType::I32,
            "unsigned_long" | "vtktypeuint64" => DataType::U64,
            "long" | "vtktypeint64" => DataType::I64,
            "float" | "vtktypefloat32" => DataType::F32,
            "double" | "vtktypefloat64" => DataType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            DataType::U8 | DataType::I8 => 1,
            DataType::U16 | DataType::I16 => 2,
            DataType::U32 | DataType::I32 | DataType::F32 => 4,
            DataType::U64 | DataType::I64 | DataType::F64 => 8,
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, DataType::F32 | DataType::F64)
    }

    fn decode_f64(self, b: &[u8]) -> f64 {
        match self {
            DataType::F32 => f32::from_be_bytes(b.try_into().unwrap()) as f64,
            DataType::F64 => f64::from_be_bytes(b.try_into().unwrap()),
            _ => self.decode_i64(b) as f64,
        }
    }

    fn decode_i64(self, b: &[u8]) -> i64 {
        match self {
            DataType::U8 => b[0] as i64,
            DataType::I8 => b[0] as i8 as i64,
            DataType::U16 => u16::from_be_bytes(b.try_into().unwrap()) as i64,
            DataType::I16 => i16::from_be_bytes(b.try_into().unwrap()) as i64,
            DataType::U32 => u32::from_be_bytes(b.try_into().unwrap()) as i64,
            DataType::I32 => i32::from_be_bytes(b.try_into().unwrap()) as i64,
            DataType::U64 => {
                let v = u64::from_be_bytes(b.try_into().unwrap());
                i64::try_from(v).unwrap_or(i64::MAX)
            }
            DataType::I64 => i64::from_be_bytes(b.try_into().unwrap()),
            DataType::F32 | DataType::F64 => unreachable!("float data decoded as integer"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum DatasetKind {
    PolyData,
    UnstructuredGrid,
}

#[derive(Debug, Clone, Copy)]
enum Target {
    None,
    Points(usize),
    Cells(usize),
}

struct Parser<'a> {
    data: &'a [u8],
    pos: usize,
    enc: Encoding,
}

fn is_ws(b: u8) -> bool {
    matches!(b, b' ' | b'\t' | b'\r' | b'\n' | b'\x0c')
}

impl<'a> Parser<'a> {
    fn new(data: &'a [u8]) -> Self {
        Parser {
            data,
            pos: 0,
            enc: Encoding::Ascii,
        }
    }

    fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    /// Returns the rest of the current line without its terminator.
    fn line(&mut self) -> Option<(usize, &'a [u8])> {
        if self.pos >= self.data.len() {
            return None;
        }
        let start = self.pos;
        let rest = &self.data[start..];
        let (line, advance) = match rest.iter().position(|&b| b == b'\n') {
            Some(i) => (&rest[..i], i + 1),
            None => (rest, rest.len()),
        };
        self.pos += advance;
        let line = line.strip_suffix(b"\r").unwrap_or(line);
        Some((start, line))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.data.len() && is_ws(self.data[self.pos]) {
            self.pos += 1;
        }
    }

    fn token(&mut self) -> Option<(usize, &'a [u8])> {
        self.skip_ws();
        if self.pos >= self.data.len() {
            return None;
        }
        let start = self.pos;
        while self.pos < self.data.len() && !is_ws(self.data[self.pos]) {
            self.pos += 1;
        }
        Some((start, &self.data[start..self.pos]))
    }

    /// Next token on the current line only.
    fn line_token(&mut self) -> Option<(usize, &'a [u8])> {
        while self.pos < self.data.len() && matches!(self.data[self.pos], b' ' | b'\t' | b'\r') {
            self.pos += 1;
        }
        if self.pos >= self.data.len() || self.data[self.pos] == b'\n' {
            return None;
        }
        self.token()
    }

    fn expect_token(&mut self, what: &str) -> VtkResult<(usize, &'a str)> {
        let at = self.pos;
        let (off, tok) = self.token().ok_or_else(|| VtkError::TruncatedPayload {
            offset: at,
            reason: format!("unexpected end of file, expected {what}"),
        })?;
        let s = std::str::from_utf8(tok).map_err(|_| VtkError::Syntax {
            offset: off,
            reason: format!("expected {what}, found non-UTF-8 bytes"),
        })?;
        Ok((off, s))
    }

    fn expect_count(&mut self, what: &str) -> VtkResult<usize> {
        let (off, tok) = self.expect_token(what)?;
        tok.parse::<usize>().map_err(|_| VtkError::Syntax {
            offset: off,
            reason: format!("expected {what} (a non-negative integer), found {tok:?}"),
        })
    }

    fn expect_keyword(&mut self, kw: &str) -> VtkResult<usize> {
        let (off, tok) = self.expect_token(kw)?;
        if tok.eq_ignore_ascii_case(kw) {
            Ok(off)
        } else {
            Err(VtkError::Syntax {
                offset: off,
                reason: format!("expected {kw}, found {tok:?}"),
            })
        }
    }

    fn expect_type(&mut self) -> VtkResult<DataType> {
        let (off, tok) = self.expect_token("data type")?;
        DataType::parse(tok).ok_or_else(|| VtkError::Syntax {
            offset: off,
            reason: format!("unknown data type {tok:?}"),
        })
    }

    fn peek_keyword(&mut self, kw: &str) -> bool {
        let save = self.pos;
        match self.token() {
            Some((_, tok)) if tok.eq_ignore_ascii_case(kw.as_bytes()) => true,
            _ => {
                self.pos = save;
                false
            }
        }
    }

    /// In binary mode, consumes the end of the keyword line so that the
    /// cursor sits on the first payload byte.
    fn data_start(&mut self) -> VtkResult<()> {
        if self.enc == Encoding::Ascii {
            return Ok(());
        }
        while self.pos < self.data.len() && matches!(self.data[self.pos], b' ' | b'\t' | b'\r') {
            self.pos += 1;
        }
        match self.data.get(self.pos) {
            None => Ok(()),
            Some(b'\n') => {
                self.pos += 1;
                Ok(())
            }
            Some(_) => Err(VtkError::Syntax {
                offset: self.pos,
                reason: "unexpected text after section header".into(),
            }),
        }
    }

    fn truncated(&self, count: usize, what: &str) -> VtkError {
        VtkError::TruncatedPayload {
            offset: self.pos,
            reason: format!(
                "{what}: {count} values declared but only {} bytes remain",
                self.remaining()
            ),
        }
    }

    fn binary_slice(&mut self, count: usize, dt: DataType, what: &str) -> VtkResult<&'a [u8]> {
        let nbytes = count
            .checked_mul(dt.size())
            .filter(|&n| n <= self.remaining())
            .ok_or_else(|| self.truncated(count, what))?;
        let s = &self.data[self.pos..self.pos + nbytes];
        self.pos += nbytes;
        Ok(s)
    }

    fn read_values(&mut self, count: usize, dt: DataType, what: &str) -> VtkResult<Vec<f64>> {
        match self.enc {
            Encoding::Ascii => {
                // Every value needs at least one byte plus a separator.
                if count > self.remaining().div_ceil(2) {
                    return Err(self.truncated(count, what));
                }
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    let (off, tok) = self.expect_token(what)?;
                    let v = tok.parse::<f64>().map_err(|_| VtkError::Syntax {
                        offset: off,
                        reason: format!("{what}: invalid number {tok:?}"),
                    })?;
                    out.push(v);
                }
                Ok(out)
            }
            Encoding::Binary => {
                let bytes = self.binary_slice(count, dt, what)?;
                Ok(bytes.chunks_exact(dt.size()).map(|b| dt.decode_f64(b)).collect())
            }
        }
    }

    fn read_ints(&mut self, count: usize, dt: DataType, what: &str) -> VtkResult<Vec<i64>> {
        if !dt.is_integer() {
            return Err(VtkError::Syntax {
                offset: self.pos,
                reason: format!("{what} must use an integer data type"),
            });
        }
        match self.enc {
            Encoding::Ascii => {
                if count > self.remaining().div_ceil(2) {
                    return Err(self.truncated(count, what));
                }
                let mut out = Vec::with_capacity(count);
                for _ in 0..count {
                    let (off, tok) = self.expect_token(what)?;
                    let v = tok.parse::<i64>().map_err(|_| VtkError::Syntax {
                        offset: off,
                        reason: format!("{what}: invalid integer {tok:?}"),
                    })?;
                    out.push(v);
                }
                Ok(out)
            }
            Encoding::Binary => {
                let bytes = self.binary_slice(count, dt, what)?;
                Ok(bytes.chunks_exact(dt.size()).map(|b| dt.decode_i64(b)).collect())
            }
        }
    }

    /// Reads cell connectivity for a `POLYGONS`/`CELLS`-style section whose
    /// keyword and first count have already been consumed.
    fn read_cell_section(&mut self, what: &str) -> VtkResult<Vec<Vec<i64>>> {
        let n_a = self.expect_count("cell count")?;
        let n_b = self.expect_count("connectivity size")?;
        self.data_start()?;
        if self.peek_keyword("OFFSETS") {
            // Version 5 layout: offsets array followed by connectivity array.
            let dt = self.expect_type()?;
            self.data_start()?;
            let off_at = self.pos;
            let offsets = self.read_ints(n_a, dt, "cell offsets")?;
            self.expect_keyword("CONNECTIVITY")?;
            let dt = self.expect_type()?;
            self.data_start()?;
            let conn = self.read_ints(n_b, dt, "cell connectivity")?;
            if offsets.is_empty() {
                return Ok(Vec::new());
            }
            let bad = |reason: &str| VtkError::Invalid {
                offset: off_at,
                reason: format!("{what}: {reason}"),
            };
            if offsets[0] != 0 || *offsets.last().unwrap() != n_b as i64 {
                return Err(bad("offsets must start at 0 and end at the connectivity size"));
            }
            let mut cells = Vec::with_capacity(offsets.len() - 1);
            for w in offsets.windows(2) {
                if w[1] < w[0] {
                    return Err(bad("offsets must be non-decreasing"));
                }
                cells.push(conn[w[0] as usize..w[1] as usize].to_vec());
            }
            Ok(cells)
        } else {
            let at = self.pos;
            let flat = self.read_ints(n_b, DataType::I32, "cell connectivity")?;
            let mut cells = Vec::with_capacity(n_a.min(flat.len()));
            let mut i = 0usize;
            for _ in 0..n_a {
                let k = *flat.get(i).ok_or_else(|| VtkError::Invalid {
                    offset: at,
                    reason: format!("{what}: fewer cells than declared"),
                })?;
                if k < 0 || (k as u64) > (flat.len() - i - 1) as u64 {
                    return Err(VtkError::Invalid {
                        offset: at,
                        reason: format!("{what}: cell size {k} overruns the section"),
                    });
                }
                let k = k as usize;
                cells.push(flat[i + 1..i + 1 + k].to_vec());
                i += k + 1;
            }
            if i != flat.len() {
                return Err(VtkError::Invalid {
                    offset: at,
                    reason: format!("{what}: declared size {n_b} does not match the cell list"),
                });
            }
            Ok(cells)
        }
    }

    fn optional_lookup_table(&mut self) -> VtkResult<()> {
        match self.enc {
            Encoding::Ascii => {
                if self.peek_keyword("LOOKUP_TABLE") {
                    self.expect_token("lookup table name")?;
                }
            }
            Encoding::Binary => {
                if self.data[self.pos..].starts_with(b"LOOKUP_TABLE") {
                    self.line();
                }
            }
        }
        Ok(())
    }

    fn skip_metadata(&mut self) {
        // Rest of the METADATA line, then everything up to a blank line.
        self.line();
        while let Some((_, l)) = self.line() {
            if l.iter().all(|&b| is_ws(b)) {
                break;
            }
        }
    }

    fn parse(mut self) -> VtkResult<RawDataset> {
        let (_, l1) = self.line().ok_or_else(|| VtkError::MalformedHeader {
            offset: 0,
            reason: "empty input".into(),
        })?;
        const MAGIC: &[u8] = b"# vtk datafile version";
        if l1.len() < MAGIC.len() || !l1[..MAGIC.len()].eq_ignore_ascii_case(MAGIC) {
            return Err(VtkError::MalformedHeader {
                offset: 0,
                reason: "missing '# vtk DataFile Version' line".into(),
            });
        }
        let title_at = self.pos;
        self.line().ok_or_else(|| VtkError::MalformedHeader {
            offset: title_at,
            reason: "missing title line".into(),
        })?;
        let fmt_at = self.pos;
        let (_, fmt) = self.line().ok_or_else(|| VtkError::MalformedHeader {
            offset: fmt_at,
            reason: "missing ASCII/BINARY line".into(),
        })?;
        let fmt = String::from_utf8_lossy(fmt).trim().to_ascii_uppercase();
        self.enc = match fmt.as_str() {
            "ASCII" => Encoding::Ascii,
            "BINARY" => Encoding::Binary,
            other => {
                return Err(VtkError::MalformedHeader {
                    offset: fmt_at,
                    reason: format!("expected ASCII or BINARY, found {other:?}"),
                })
            }
        };
        let ds_at = self.pos;
        let (_, kw) = self.expect_token("DATASET").map_err(|_| VtkError::MalformedHeader {
            offset: ds_at,
            reason: "missing DATASET line".into(),
        })?;
        if !kw.eq_ignore_ascii_case("DATASET") {
            return Err(VtkError::MalformedHeader {
                offset: ds_at,
                reason: format!("expected DATASET, found {kw:?}"),
            });
        }
        let (kind_at, kind) = self.expect_token("dataset type")?;
        let kind = match kind.to_ascii_uppercase().as_str() {
            "POLYDATA" => DatasetKind::PolyData,
            "UNSTRUCTURED_GRID" => DatasetKind::UnstructuredGrid,
            other => {
                return Err(VtkError::Unsupported {
                    offset: kind_at,
                    reason: format!("dataset type {other} (only POLYDATA and UNSTRUCTURED_GRID)"),
                })
            }
        };
        self.parse_body(kind)
    }

    fn parse_body(&mut self, kind: DatasetKind) -> VtkResult<RawDataset> {
        let mut points: Option<Vec<[f64; 3]>> = None;
        let mut polys: Vec<Vec<i64>> = Vec::new();
        let mut cells_at = 0usize;
        let mut cell_types: Option<(usize, Vec<i64>)> = None;
        // Cell counts of the ignored POLYDATA sections, which share the cell-data index space.
        let mut n_verts = 0usize;
        let mut n_lines = 0usize;
        let mut n_strips = 0usize;
        let mut point_fields = BTreeMap::new();
        let mut cell_fields = BTreeMap::new();
        let mut target = Target::None;

        while let Some((at, tok)) = self.token() {
            let kw = String::from_utf8_lossy(tok).to_ascii_uppercase();
            match kw.as_str() {
                "POINTS" => {
                    let n = self.expect_count("point count")?;
                    let dt = self.expect_type()?;
                    self.data_start()?;
                    let n3 = n.checked_mul(3).ok_or_else(|| self.truncated(n, "POINTS"))?;
                    let v = self.read_values(n3, dt, "POINTS")?;
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(VtkError::Invalid {
                            offset: at,
                            reason: "non-finite point coordinate".into(),
                        });
                    }
                    points = Some(v.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect());
                }
                "POLYGONS" if kind == DatasetKind::PolyData => {
                    cells_at = at;
                    polys = self.read_cell_section("POLYGONS")?;
                }
                "VERTICES" | "LINES" | "TRIANGLE_STRIPS" if kind == DatasetKind::PolyData => {
                    let skipped = self.read_cell_section(&kw)?;
                    log::warn!("ignoring {} {kw} cells (only POLYGONS are used)", skipped.len());
                    match kw.as_str() {
                        "VERTICES" => n_verts = skipped.len(),
                        "LINES" => n_lines = skipped.len(),
                        _ => n_strips = skipped.len(),
                    }
                }
                "CELLS" if kind == DatasetKind::UnstructuredGrid => {
                    cells_at = at;
                    polys = self.read_cell_section("CELLS")?;
                }
                "CELL_TYPES" if kind == DatasetKind::UnstructuredGrid => {
                    let n = self.expect_count("cell type count")?;
                    self.data_start()?;
                    let types = self.read_ints(n, DataType::I32, "CELL_TYPES")?;
                    cell_types = Some((at, types));
                }
                "POINT_DATA" => target = Target::Points(self.expect_count("point data count")?),
                "CELL_DATA" => target = Target::Cells(self.expect_count("cell data count")?),
                "METADATA" => self.skip_metadata(),
                "SCALARS"
                | "VECTORS"
                | "NORMALS"
                | "TENSORS"
                | "TENSORS6"
                | "TEXTURE_COORDINATES"
                | "COLOR_SCALARS"
                | "FIELD"
                | "LOOKUP_TABLE" => {
                    let n = match target {
                        Target::Points(n) | Target::Cells(n) => n,
                        Target::None if kw == "FIELD" => 0,
                        Target::None => {
                            return Err(VtkError::Syntax {
                                offset: at,
                                reason: format!("{kw} outside POINT_DATA/CELL_DATA"),
                            })
                        }
                    };
                    let arrays = self.read_attribute(&kw, at, n, matches!(target, Target::None))?;
                    let (map, what) = match target {
                        Target::Points(_) => (&mut point_fields, "point"),
                        Target::Cells(_) => (&mut cell_fields, "cell"),
                        Target::None => continue,
                    };
                    for (name, f) in arrays {
                        insert_field(map, name, f, what);
                    }
                }
                _ => {
                    return Err(VtkError::Syntax {
                        offset: at,
                        reason: format!("unexpected keyword {kw:?}"),
                    })
                }
            }
        }

        let points = points.unwrap_or_default();
        if kind == DatasetKind::UnstructuredGrid {
            let (types_at, types) = cell_types.unwrap_or((cells_at, Vec::new()));
            if types.len() != polys.len() {
                return Err(VtkError::Invalid {
                    offset: types_at,
                    reason: format!("{} cell types for {} cells", types.len(), polys.len()),
                });
            }
            for (c, (&t, cell)) in types.iter().zip(&polys).enumerate() {
                let ok = match t {
                    5 => cell.len() == 3,
                    9 => cell.len() == 4,
                    7 => true,
                    _ => {
                        return Err(VtkError::UnsupportedCellType {
                            offset: types_at,
                            cell_type: t,
                        })
                    }
                };
                if !ok {
                    return Err(VtkError::Invalid {
                        offset: cells_at,
                        reason: format!("cell {c} of type {t} has {} vertices", cell.len()),
                    });
                }
            }
        }

        let n_polys = polys.len();
        let before = n_verts + n_lines;
        let total = before + n_polys + n_strips;
        for (name, f) in cell_fields.iter_mut() {
            if f.len() == total && total != n_polys {
                let ids: Vec<usize> = (before..before + n_polys).collect();
                *f = f.select(&ids);
            } else if f.len() != n_polys {
                return Err(VtkError::Invalid {
                    offset: cells_at,
                    reason: format!("cell field {name:?} has {} tuples for {total} cells", f.len()),
                });
            }
        }

        let mut cells = Vec::with_capacity(n_polys);
        for (c, cell) in polys.into_iter().enumerate() {
            let mut out = Vec::with_capacity(cell.len());
            for i in cell {
                if i < 0 || i as u64 >= points.len() as u64 {
                    return Err(VtkError::Invalid {
                        offset: cells_at,
                        reason: format!("cell {c} references point {i} but {} points exist", points.len()),
                    });
                }
                out.push(i as usize);
            }
            cells.push(out);
        }

        let ds = RawDataset {
            points,
            cells,
            point_fields,
            cell_fields,
            source_kind: match self.enc {
                Encoding::Ascii => SourceKind::LegacyAscii,
                Encoding::Binary => SourceKind::LegacyBinary,
            },
        };
        ds.validate().map_err(|e| match e {
            VtkError::Invalid { reason, .. } => VtkError::Invalid {
                offset: cells_at,
                reason,
            },
            e => e,
        })?;
        Ok(ds)
    }

    /// Parses one attribute block and returns the named fields it defines.
    fn read_attribute(
        &mut self,
        kw: &str,
        at: usize,
        n: usize,
        dataset_level: bool,
    ) -> VtkResult<Vec<(String, Field)>> {
        let mut out = Vec::new();
        let mut push = |name: String, ncomp: usize, values: Vec<f64>| -> VtkResult<()> {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(VtkError::Invalid {
                    offset: at,
                    reason: format!("field {name:?} contains non-finite values"),
                });
            }
            match to_field(ncomp, values) {
                Some(f) => out.push((name, f)),
                None => log::warn!("skipping field {name:?} with {ncomp} components"),
            }
            Ok(())
        };
        let count = |n: usize, w: usize, p: &Self| n.checked_mul(w).ok_or_else(|| p.truncated(n, kw));
        match kw {
            "SCALARS" => {
                let name = decode_name(self.expect_token("array name")?.1);
                let dt = self.expect_type()?;
                let ncomp = match self.line_token() {
                    Some((off, t)) => std::str::from_utf8(t)
                        .ok()
                        .and_then(|t| t.parse::<usize>().ok())
                        .filter(|&c| (1..=4).contains(&c))
                        .ok_or_else(|| VtkError::Syntax {
                            offset: off,
                            reason: "invalid SCALARS component count".into(),
                        })?,
                    None => 1,
                };
                self.data_start()?;
                self.optional_lookup_table()?;
                let values = self.read_values(count(n, ncomp, self)?, dt, kw)?;
                push(name, ncomp, values)?;
            }
            "VECTORS" | "NORMALS" | "TENSORS" | "TENSORS6" => {
                let name = decode_name(self.expect_token("array name")?.1);
                let dt = self.expect_type()?;
                self.data_start()?;
                let ncomp = match kw {
                    "TENSORS" => 9,
                    "TENSORS6" => 6,
                    _ => 3,
                };
                let values = self.read_values(count(n, ncomp, self)?, dt, kw)?;
                push(name, ncomp, values)?;
            }
            "TEXTURE_COORDINATES" => {
                let name = decode_name(self.expect_token("array name")?.1);
                let dim = self.expect_count("texture dimension")?;
                if !(1..=3).contains(&dim) {
                    return Err(VtkError::Syntax {
                        offset: at,
                        reason: format!("texture dimension {dim} not in 1..=3"),
                    });
                }
                let dt = self.expect_type()?;
                self.data_start()?;
                let values = self.read_values(count(n, dim, self)?, dt, kw)?;
                push(name, dim, values)?;
            }
            "COLOR_SCALARS" => {
                let name = decode_name(self.expect_token("array name")?.1);
                let ncomp = self.expect_count("color component count")?;
                if !(1..=4).contains(&ncomp) {
                    return Err(VtkError::Syntax {
                        offset: at,
                        reason: format!("color component count {ncomp} not in 1..=4"),
                    });
                }
                self.data_start()?;
                let mut values = self.read_values(count(n, ncomp, self)?, DataType::U8, kw)?;
                if self.enc == Encoding::Binary {
                    values.iter_mut().for_each(|v| *v /= 255.0);
                }
                push(name, ncomp, values)?;
            }
            "LOOKUP_TABLE" => {
                self.expect_token("lookup table name")?;
                let size = self.expect_count("lookup table size")?;
                self.data_start()?;
                let dt = if self.enc == Encoding::Binary {
                    DataType::U8
                } else {
                    DataType::F32
                };
                self.read_values(count(size, 4, self)?, dt, kw)?;
            }
            "FIELD" => {
                self.expect_token("field data name")?;
                let n_arrays = self.expect_count("array count")?;
                for _ in 0..n_arrays {
                    let (name_at, name) = self.expect_token("array name")?;
                    if name.eq_ignore_ascii_case("NULL_ARRAY") {
                        continue;
                    }
                    let name = decode_name(name);
                    let ncomp = self.expect_count("component count")?;
                    let ntuples = self.expect_count("tuple count")?;
                    let dt = self.expect_type()?;
                    self.data_start()?;
                    let values = self.read_values(count(ntuples, ncomp, self)?, dt, kw)?;
                    if self.peek_keyword("METADATA") {
                        self.skip_metadata();
                    }
                    if dataset_level {
                        continue;
                    }
                    if ntuples != n {
                        return Err(VtkError::Invalid {
                            offset: name_at,
                            reason: format!("array {name:?} has {ntuples} tuples, expected {n}"),
                        });
                    }
                    push(name, ncomp, values)?;
                }
            }
            _ => unreachable!("attribute keyword checked by caller"),
        }
        Ok(out)
    }
}

/// Decodes `%xx` escapes used by VTK writers for spaces and other
/// characters in array names.
fn decode_name(raw: &str) -> String {
    let bytes = raw.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).unwrap_or("");
            if let Ok(v) = u8::from_str_radix(hex, 16) {
                out.push(v);
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// Encodes characters that would break legacy tokenisation.
pub(crate) fn encode_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for b in name.bytes() {
        if b.is_ascii_graphic() && b != b'%' {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    if out.is_empty() {
        out.push_str("unnamed");
    }
    out
}
