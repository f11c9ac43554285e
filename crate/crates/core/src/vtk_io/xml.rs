//! VTK XML `UnstructuredGrid` (`.vtu`) reader.
//!
//! Supports `ascii`, inline `binary` (base64) and `appended` (raw or base64)
//! data arrays, either byte order, and `UInt32`/`UInt64` block headers.
//! Compressed files are rejected.

use std::borrow::Cow;
use std::collections::BTreeMap;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine as _;
use quick_xml::events::Event;

use super::{insert_field, to_field, RawDataset, Reader, SourceKind, VtkError, VtkResult};

/// Reader for `.vtu` files.
#[derive(Debug, Clone, Copy, Default)]
pub struct XmlReader;

impl Reader for XmlReader {
    fn read_bytes(&self, bytes: &[u8]) -> VtkResult<RawDataset> {
        let doc = Document::parse(bytes)?;
        doc.to_dataset()
    }
}

#[derive(Debug, Default)]
struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    text: String,
    children: Vec<Element>,
    offset: usize,
}

impl Element {
    fn attr(&self, key: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn child(&self, name: &str) -> Option<&Element> {
        self.children.iter().find(|c| c.name == name)
    }

    fn children_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.children.iter().filter(move |c| c.name == name)
    }

    fn count_attr(&self, key: &str) -> VtkResult<usize> {
        let v = self.attr(key).ok_or_else(|| VtkError::MalformedXml {
            offset: self.offset,
            reason: format!("<{}> lacks the {key} attribute", self.name),
        })?;
        v.trim().parse().map_err(|_| VtkError::MalformedXml {
            offset: self.offset,
            reason: format!("{key}={v:?} is not a non-negative integer"),
        })
    }
}

fn unescape(raw: &[u8]) -> String {
    let s = String::from_utf8_lossy(raw);
    if !s.contains('&') {
        return s.into_owned();
    }
    let mut out = String::with_capacity(s.len());
    let mut rest: &str = &s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        rest = &rest[i..];
        let end = rest.find(';').unwrap_or(0);
        let ent = &rest[1..end.max(1)];
        let rep = match ent {
            "lt" => Some('<'),
            "gt" => Some('>'),
            "amp" => Some('&'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            _ => ent
                .strip_prefix("#x")
                .and_then(|h| u32::from_str_radix(h, 16).ok())
                .or_else(|| ent.strip_prefix('#').and_then(|d| d.parse().ok()))
                .and_then(char::from_u32),
        };
        match rep {
            Some(c) if end > 0 => {
                out.push(c);
                rest = &rest[end + 1..];
            }
            _ => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ByteOrder {
    Little,
    Big,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NumType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    I64,
    U64,
    F32,
    F64,
}

impl NumType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "Int8" | "Char" => NumType::I8,
            "UInt8" | "UChar" => NumType::U8,
            "Int16" => NumType::I16,
            "UInt16" => NumType::U16,
            "Int32" => NumType::I32,
            "UInt32" => NumType::U32,
            "Int64" => NumType::I64,
            "UInt64" => NumType::U64,
            "Float32" => NumType::F32,
            "Float64" => NumType::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            NumType::I8 | NumType::U8 => 1,
            NumType::I16 | NumType::U16 => 2,
            NumType::I32 | NumType::U32 | NumType::F32 => 4,
            NumType::I64 | NumType::U64 | NumType::F64 => 8,
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, NumType::F32 | NumType::F64)
    }
}

fn take<const N: usize>(b: &[u8], order: ByteOrder) -> [u8; N] {
    let mut a: [u8; N] = b.try_into().expect("chunk width matches type size");
    if order == ByteOrder::Big {
        a.reverse();
    }
    a
}

fn decode_i64(b: &[u8], t: NumType, order: ByteOrder) -> i64 {
    match t {
        NumType::I8 => b[0] as i8 as i64,
        NumType::U8 => b[0] as i64,
        NumType::I16 => i16::from_le_bytes(take(b, order)) as i64,
        NumType::U16 => u16::from_le_bytes(take(b, order)) as i64,
        NumType::I32 => i32::from_le_bytes(take(b, order)) as i64,
        NumType::U32 => u32::from_le_bytes(take(b, order)) as i64,
        NumType::I64 => i64::from_le_bytes(take(b, order)),
        NumType::U64 => i64::try_from(u64::from_le_bytes(take(b, order))).unwrap_or(i64::MAX),
        NumType::F32 => f32::from_le_bytes(take(b, order)) as i64,
        NumType::F64 => f64::from_le_bytes(take(b, order)) as i64,
    }
}

fn decode_f64(b: &[u8], t: NumType, order: ByteOrder) -> f64 {
    match t {
        NumType::F32 => f32::from_le_bytes(take(b, order)) as f64,
        NumType::F64 => f64::from_le_bytes(take(b, order)),
        _ => decode_i64(b, t, order) as f64,
    }
}

enum Payload<'a> {
    Ascii(&'a str),
    Bytes(Cow<'a, [u8]>),
}

struct Document<'a> {
    root: Element,
    appended: Option<&'a [u8]>,
}

impl<'a> Document<'a> {
    fn parse(bytes: &'a [u8]) -> VtkResult<Self> {
        // Raw appended data is not well-formed XML, so the markup before it is
        // parsed on its own and the payload is sliced out directly.
        let mut markup: Cow<[u8]> = Cow::Borrowed(bytes);
        let mut appended = None;
        if let Some(start) = find(bytes, b"<AppendedData") {
            let tag_end = bytes[start..]
                .iter()
                .position(|&b| b == b'>')
                .map(|i| start + i)
                .ok_or_else(|| VtkError::MalformedXml {
                    offset: start,
                    reason: "unterminated <AppendedData> tag".into(),
                })?;
            if bytes[tag_end - 1] != b'/' {
                let mut m = bytes[..=tag_end].to_vec();
                m.extend_from_slice(b"</AppendedData></VTKFile>");
                markup = Cow::Owned(m);
                let body = &bytes[tag_end + 1..];
                let underscore = body.iter().position(|&b| !b.is_ascii_whitespace());
                match underscore {
                    Some(i) if body[i] == b'_' => {
                        let payload = &body[i + 1..];
                        let end = rfind(payload, b"</AppendedData>").unwrap_or(payload.len());
                        appended = Some(&payload[..end]);
                    }
                    _ => {
                        return Err(VtkError::MalformedXml {
                            offset: tag_end + 1,
                            reason: "appended data must start with '_'".into(),
                        })
                    }
                }
            }
        }
        let root = parse_tree(&markup)?;
        Ok(Document { root, appended })
    }

    fn to_dataset(&self) -> VtkResult<RawDataset> {
        let root = &self.root;
        if root.name != "VTKFile" {
            return Err(VtkError::MalformedXml {
                offset: root.offset,
                reason: format!("root element is <{}>, expected <VTKFile>", root.name),
            });
        }
        match root.attr("type") {
            Some("UnstructuredGrid") => {}
            other => {
                return Err(VtkError::Unsupported {
                    offset: root.offset,
                    reason: format!("VTKFile type {other:?} (only UnstructuredGrid)"),
                })
            }
        }
        if let Some(c) = root.attr("compressor").filter(|c| !c.trim().is_empty()) {
            return Err(VtkError::UnsupportedCompression(c.to_string()));
        }
        let order = match root.attr("byte_order").unwrap_or("LittleEndian") {
            "LittleEndian" => ByteOrder::Little,
            "BigEndian" => ByteOrder::Big,
            other => {
                return Err(VtkError::MalformedXml {
                    offset: root.offset,
                    reason: format!("unknown byte_order {other:?}"),
                })
            }
        };
        let header = match root.attr("header_type").unwrap_or("UInt32") {
            "UInt32" => NumType::U32,
            "UInt64" => NumType::U64,
            other => {
                return Err(VtkError::MalformedXml {
                    offset: root.offset,
                    reason: format!("unsupported header_type {other:?}"),
                })
            }
        };
        let ctx = Ctx {
            order,
            header,
            appended: self.appended,
            appended_encoding: root
                .child("AppendedData")
                .map(|a| a.attr("encoding").unwrap_or("raw").to_string()),
        };

        let grid = root.child("UnstructuredGrid").ok_or_else(|| VtkError::MalformedXml {
            offset: root.offset,
            reason: "missing <UnstructuredGrid>".into(),
        })?;
        let pieces: Vec<&Element> = grid.children_named("Piece").collect();
        let piece = match pieces.as_slice() {
            [] => {
                let mut ds = RawDataset::new(Vec::new(), Vec::new());
                ds.source_kind = SourceKind::XmlVtu;
                return Ok(ds);
            }
            [p] => *p,
            _ => {
                return Err(VtkError::Unsupported {
                    offset: pieces[1].offset,
                    reason: "multi-piece files are not supported".into(),
                })
            }
        };
        let np = piece.count_attr("NumberOfPoints")?;
        let nc = piece.count_attr("NumberOfCells")?;

        let points = match piece.child("Points").and_then(|p| p.child("DataArray")) {
            Some(arr) => {
                let ncomp = ncomp(arr)?;
                if ncomp != 3 {
                    return Err(VtkError::Invalid {
                        offset: arr.offset,
                        reason: format!("points have {ncomp} components, expected 3"),
                    });
                }
                let v = ctx.read_f64(arr, Some(np.saturating_mul(3)))?;
                v.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect()
            }
            None if np == 0 => Vec::new(),
            None => {
                return Err(VtkError::MalformedXml {
                    offset: piece.offset,
                    reason: "missing <Points> data".into(),
                })
            }
        };

        let cells = match piece.child("Cells") {
            Some(cells_el) => ctx.read_cells(cells_el, nc)?,
            None if nc == 0 => Vec::new(),
            None => {
                return Err(VtkError::MalformedXml {
                    offset: piece.offset,
                    reason: "missing <Cells>".into(),
                })
            }
        };

        let mut point_fields = BTreeMap::new();
        let mut cell_fields = BTreeMap::new();
        for (section, n, map, what) in [
            ("PointData", np, &mut point_fields, "point"),
            ("CellData", nc, &mut cell_fields, "cell"),
        ] {
            let Some(sec) = piece.child(section) else { continue };
            for arr in sec.children_named("DataArray") {
                let Some(name) = arr.attr("Name") else {
                    log::warn!("skipping unnamed {what} data array");
                    continue;
                };
                let k = ncomp(arr)?;
                let values = ctx.read_f64(arr, Some(n.saturating_mul(k)))?;
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(VtkError::Invalid {
                        offset: arr.offset,
                        reason: format!("{what} field {name:?} contains non-finite values"),
                    });
                }
                match to_field(k, values) {
                    Some(f) => insert_field(map, name.to_string(), f, what),
                    None => log::warn!("skipping {what} field {name:?} with {k} components"),
                }
            }
        }

        let ds = RawDataset {
            points,
            cells,
            point_fields,
            cell_fields,
            source_kind: SourceKind::XmlVtu,
        };
        ds.validate().map_err(|e| match e {
            VtkError::Invalid { reason, .. } => VtkError::Invalid {
                offset: piece.offset,
                reason,
            },
            e => e,
        })?;
        Ok(ds)
    }
}

fn ncomp(arr: &Element) -> VtkResult<usize> {
    match arr.attr("NumberOfComponents") {
        None => Ok(1),
        Some(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&k| k > 0)
            .ok_or_else(|| VtkError::MalformedXml {
                offset: arr.offset,
                reason: format!("invalid NumberOfComponents {v:?}"),
            }),
    }
}

struct Ctx<'a> {
    order: ByteOrder,
    header: NumType,
    appended: Option<&'a [u8]>,
    appended_encoding: Option<String>,
}

impl<'a> Ctx<'a> {
    fn num_type(&self, arr: &Element) -> VtkResult<NumType> {
        let t = arr.attr("type").unwrap_or("");
        NumType::parse(t).ok_or_else(|| VtkError::MalformedXml {
            offset: arr.offset,
            reason: format!("unknown DataArray type {t:?}"),
        })
    }

    fn header_value(&self, b: &[u8]) -> u64 {
        match self.header {
            NumType::U64 => u64::from_le_bytes(take(b, self.order)),
            _ => u32::from_le_bytes(take(b, self.order)) as u64,
        }
    }

    /// Decodes a base64 block made of a byte-count header followed by the
    /// data. Writers either encode both in one stream or encode the header
    /// separately, which leaves exactly the header's own padding at the end
    /// of the header chunk.
    fn decode_base64_block(&self, text: &[u8], offset: usize) -> VtkResult<Vec<u8>> {
        let hs = self.header.size();
        let head_chars = hs.div_ceil(3) * 4;
        let truncated = |reason: &str| VtkError::TruncatedPayload {
            offset,
            reason: reason.to_string(),
        };
        let bad = |e: base64::DecodeError| VtkError::Syntax {
            offset,
            reason: format!("invalid base64: {e}"),
        };
        if text.len() < head_chars {
            return Err(truncated("base64 block shorter than its header"));
        }
        let head = BASE64.decode(&text[..head_chars]).map_err(bad)?;
        let n = self.header_value(&head[..hs]);
        if n > text.len() as u64 {
            return Err(truncated("declared byte count exceeds the encoded data"));
        }
        let n = n as usize;
        let head_padding = text[..head_chars].iter().filter(|&&c| c == b'=').count();
        if head_padding > 0 && head_padding == (3 - hs % 3) % 3 {
            let data_chars = n.div_ceil(3) * 4;
            let chunk = text
                .get(head_chars..head_chars + data_chars)
                .ok_or_else(|| truncated("base64 data shorter than declared"))?;
            let data = BASE64.decode(chunk).map_err(bad)?;
            if data.len() < n {
                return Err(truncated("base64 data shorter than declared"));
            }
            Ok(data[..n].to_vec())
        } else {
            let chars = (hs + n).div_ceil(3) * 4;
            let chunk = text
                .get(..chars)
                .ok_or_else(|| truncated("base64 data shorter than declared"))?;
            let data = BASE64.decode(chunk).map_err(bad)?;
            if data.len() < hs + n {
                return Err(truncated("base64 data shorter than declared"));
            }
            Ok(data[hs..hs + n].to_vec())
        }
    }

    fn payload<'e>(&self, arr: &'e Element) -> VtkResult<Payload<'e>>
    where
        'a: 'e,
    {
        match arr.attr("format").unwrap_or("ascii") {
            "ascii" => Ok(Payload::Ascii(&arr.text)),
            "binary" => {
                let text: Vec<u8> = arr.text.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
                Ok(Payload::Bytes(Cow::Owned(self.decode_base64_block(&text, arr.offset)?)))
            }
            "appended" => {
                let data = self.appended.ok_or_else(|| VtkError::MalformedXml {
                    offset: arr.offset,
                    reason: "appended DataArray without <AppendedData>".into(),
                })?;
                let off = arr.count_attr("offset")?;
                let tail = data.get(off..).ok_or_else(|| VtkError::TruncatedPayload {
                    offset: arr.offset,
                    reason: format!("appended offset {off} beyond the {} payload bytes", data.len()),
                })?;
                match self.appended_encoding.as_deref().unwrap_or("raw") {
                    "raw" => {
                        let hs = self.header.size();
                        if tail.len() < hs {
                            return Err(VtkError::TruncatedPayload {
                                offset: arr.offset,
                                reason: "appended block header cut short".into(),
                            });
                        }
                        let n = self.header_value(&tail[..hs]);
                        let n = usize::try_from(n)
                            .ok()
                            .filter(|&n| n <= tail.len() - hs)
                            .ok_or_else(|| VtkError::TruncatedPayload {
                                offset: arr.offset,
                                reason: format!("appended block declares {n} bytes"),
                            })?;
                        Ok(Payload::Bytes(Cow::Borrowed(&tail[hs..hs + n])))
                    }
                    "base64" => Ok(Payload::Bytes(Cow::Owned(self.decode_base64_block(tail, arr.offset)?))),
                    other => Err(VtkError::MalformedXml {
                        offset: arr.offset,
                        reason: format!("unknown appended encoding {other:?}"),
                    }),
                }
            }
            other => Err(VtkError::MalformedXml {
                offset: arr.offset,
                reason: format!("unknown DataArray format {other:?}"),
            }),
        }
    }

    fn check_count(arr: &Element, got: usize, expected: Option<usize>) -> VtkResult<()> {
        match expected {
            Some(n) if n != got => Err(VtkError::Invalid {
                offset: arr.offset,
                reason: format!(
                    "DataArray {:?} holds {got} values, expected {n}",
                    arr.attr("Name").unwrap_or("")
                ),
            }),
            _ => Ok(()),
        }
    }

    fn read_f64(&self, arr: &Element, expected: Option<usize>) -> VtkResult<Vec<f64>> {
        let t = self.num_type(arr)?;
        let out: Vec<f64> = match self.payload(arr)? {
            Payload::Ascii(text) => text
                .split_ascii_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| VtkError::Syntax {
                        offset: arr.offset,
                        reason: format!("invalid number {tok:?}"),
                    })
                })
                .collect::<VtkResult<_>>()?,
            Payload::Bytes(b) => {
                if b.len() % t.size() != 0 {
                    return Err(VtkError::Invalid {
                        offset: arr.offset,
                        reason: "byte count is not a multiple of the value size".into(),
                    });
                }
                b.chunks_exact(t.size()).map(|c| decode_f64(c, t, self.order)).collect()
            }
        };
        Self::check_count(arr, out.len(), expected)?;
        Ok(out)
    }

    fn read_i64(&self, arr: &Element, expected: Option<usize>) -> VtkResult<Vec<i64>> {
        let t = self.num_type(arr)?;
        if !t.is_integer() {
            return Err(VtkError::Invalid {
                offset: arr.offset,
                reason: "cell arrays must use an integer type".into(),
            });
        }
        let out: Vec<i64> = match self.payload(arr)? {
            Payload::Ascii(text) => text
                .split_ascii_whitespace()
                .map(|tok| {
                    tok.parse::<i64>().map_err(|_| VtkError::Syntax {
                        offset: arr.offset,
                        reason: format!("invalid integer {tok:?}"),
                    })
                })
                .collect::<VtkResult<_>>()?,
            Payload::Bytes(b) => {
                if b.len() % t.size() != 0 {
                    return Err(VtkError::Invalid {
                        offset: arr.offset,
                        reason: "byte count is not a multiple of the value size".into(),
                    });
                }
                b.chunks_exact(t.size()).map(|c| decode_i64(c, t, self.order)).collect()
            }
        };
        Self::check_count(arr, out.len(), expected)?;
        Ok(out)
    }

    fn read_cells(&self, cells_el: &Element, nc: usize) -> VtkResult<Vec<Vec<usize>>> {
        let find = |name: &str| {
            cells_el
                .children_named("DataArray")
                .find(|a| a.attr("Name") == Some(name))
                .ok_or_else(|| VtkError::MalformedXml {
                    offset: cells_el.offset,
                    reason: format!("missing {name} array in <Cells>"),
                })
        };
        let conn_el = find("connectivity")?;
        let conn = self.read_i64(conn_el, None)?;
        let offsets = self.read_i64(find("offsets")?, Some(nc))?;
        let types_el = find("types")?;
        let types = self.read_i64(types_el, Some(nc))?;
        let mut cells = Vec::with_capacity(nc);
        let mut start = 0i64;
        for (c, (&end, &t)) in offsets.iter().zip(&types).enumerate() {
            if end < start || end as u64 > conn.len() as u64 {
                return Err(VtkError::Invalid {
                    offset: conn_el.offset,
                    reason: format!("cell {c} has invalid offset {end}"),
                });
            }
            let ids = &conn[start as usize..end as usize];
            let ok = match t {
                5 => ids.len() == 3,
                9 => ids.len() == 4,
                7 => true,
                _ => {
                    return Err(VtkError::UnsupportedCellType {
                        offset: types_el.offset,
                        cell_type: t,
                    })
                }
            };
            if !ok {
                return Err(VtkError::Invalid {
                    offset: conn_el.offset,
                    reason: format!("cell {c} of type {t} has {} vertices", ids.len()),
                });
            }
            let mut cell = Vec::with_capacity(ids.len());
            for &i in ids {
                let i = usize::try_from(i).map_err(|_| VtkError::Invalid {
                    offset: conn_el.offset,
                    reason: format!("negative point index {i}"),
                })?;
                cell.push(i);
            }
            cells.push(cell);
            start = end;
        }
        Ok(cells)
    }
}

fn parse_tree(markup: &[u8]) -> VtkResult<Element> {
    let mut reader = quick_xml::Reader::from_reader(markup);
    let mut buf = Vec::new();
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    let xml_err = |offset: usize, reason: String| VtkError::MalformedXml { offset, reason };

    fn open(e: &quick_xml::events::BytesStart<'_>, offset: usize) -> VtkResult<Element> {
        let mut el = Element {
            name: String::from_utf8_lossy(e.name().as_ref()).into_owned(),
            offset,
            ..Default::default()
        };
        for a in e.attributes() {
            let a = a.map_err(|err| VtkError::MalformedXml {
                offset,
                reason: format!("bad attribute: {err}"),
            })?;
            el.attrs
                .push((String::from_utf8_lossy(a.key.as_ref()).into_owned(), unescape(&a.value)));
        }
        Ok(el)
    }

    loop {
        let at = reader.buffer_position() as usize;
        let ev = reader
            .read_event_into(&mut buf)
            .map_err(|e| xml_err(reader.buffer_position() as usize, e.to_string()))?;
        match ev {
            Event::Start(e) => stack.push(open(&e, at)?),
            Event::Empty(e) => {
                let el = open(&e, at)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None if root.is_none() => root = Some(el),
                    None => return Err(xml_err(at, "multiple root elements".into())),
                }
            }
            Event::End(_) => {
                let el = stack
                    .pop()
                    .ok_or_else(|| xml_err(at, "unbalanced closing tag".into()))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None if root.is_none() => root = Some(el),
                    None => return Err(xml_err(at, "multiple root elements".into())),
                }
            }
            Event::Text(t) => {
                if let Some(top) = stack.last_mut() {
                    top.text.push_str(&unescape(&t));
                }
            }
            Event::CData(t) => {
                if let Some(top) = stack.last_mut() {
                    top.text.push_str(&String::from_utf8_lossy(&t));
                }
            }
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }
    if let Some(open) = stack.last() {
        return Err(xml_err(markup.len(), format!("unclosed <{}>", open.name)));
    }
    root.ok_or_else(|| xml_err(0, "no root element".into()))
}

fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

fn rfind(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).rposition(|w| w == needle)
}
