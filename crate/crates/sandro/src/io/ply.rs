//! PLY point-cloud reader and writer.
//!
//! Supported subset: `ascii 1.0` and `binary_little_endian 1.0` files whose
//! first element is `vertex` with float or double `x y z` (and optionally
//! `nx ny nz`). Extra scalar vertex properties are skipped; elements after
//! the vertices (faces, edges) are ignored. Vertex order is preserved
//! exactly as stored.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use crate::geometry::{Point3, PointCloud, Vector3};

#[derive(Debug, Error)]
pub enum PlyError {
    /// The header itself is malformed.
    #[error("malformed header at line {line}: {message}")]
    Header { line: usize, message: String },
    /// Valid PLY, but outside the supported subset.
    #[error("unsupported layout: {0}")]
    UnsupportedLayout(String),
    /// The payload ends before the declared vertex count.
    #[error("truncated payload: vertex {record} incomplete at byte offset {offset}")]
    Truncated { record: usize, offset: u64 },
    /// A vertex field failed to parse.
    #[error("bad value in vertex {record} at byte offset {offset}: {message}")]
    BadValue {
        record: usize,
        offset: u64,
        message: String,
    },
    /// A coordinate or normal component is NaN or infinite.
    #[error("non-finite coordinate in vertex {record}")]
    NonFinite { record: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(token: &str) -> Option<Self> {
        Some(match token {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 => 4,
            Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn is_float(self) -> bool {
        matches!(self, Self::F32 | Self::F64)
    }
}

#[derive(Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<(String, ScalarType)>,
    has_list: bool,
}

struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    /// Absolute byte offset where the payload begins.
    body_start: usize,
}

fn parse_header(data: &[u8]) -> Result<Header, PlyError> {
    let mut pos = 0;
    let mut line_no = 0;
    let mut next_line = || -> Result<(usize, String), PlyError> {
        if pos >= data.len() {
            return Err(PlyError::Header {
                line: line_no + 1,
                message: "unexpected end of file inside header".into(),
            });
        }
        let end = data[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .map(|i| pos + i)
            .unwrap_or(data.len());
        let raw = &data[pos..end];
        pos = (end + 1).min(data.len() + 1);
        line_no += 1;
        let text = std::str::from_utf8(raw).map_err(|_| PlyError::Header {
            line: line_no,
            message: "header line is not valid UTF-8".into(),
        })?;
        Ok((line_no, text.trim_end_matches('\r').to_string()))
    };

    let (line, magic) = next_line()?;
    if magic.trim() != "ply" {
        return Err(PlyError::Header {
            line,
            message: format!("expected 'ply' magic, found {magic:?}"),
        });
    }

    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let (line, text) = next_line()?;
        let header_err = |message: String| PlyError::Header { line, message };
        let mut tokens = text.split_whitespace();
        match tokens.next() {
            None => continue, // blank line
            Some("comment") | Some("obj_info") => continue,
            Some("format") => {
                if format.is_some() {
                    return Err(header_err("duplicate format line".into()));
                }
                let kind = tokens
                    .next()
                    .ok_or_else(|| header_err("format line missing encoding".into()))?;
                let version = tokens
                    .next()
                    .ok_or_else(|| header_err("format line missing version".into()))?;
                if version != "1.0" {
                    return Err(PlyError::UnsupportedLayout(format!(
                        "PLY version {version} (only 1.0 is supported)"
                    )));
                }
                format = Some(match kind {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    other => {
                        return Err(PlyError::UnsupportedLayout(format!(
                            "encoding {other} (only ascii and binary_little_endian are supported)"
                        )))
                    }
                });
            }
            Some("element") => {
                let name = tokens
                    .next()
                    .ok_or_else(|| header_err("element line missing name".into()))?;
                let count = tokens
                    .next()
                    .ok_or_else(|| header_err("element line missing count".into()))?
                    .parse::<usize>()
                    .map_err(|e| header_err(format!("bad element count: {e}")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    has_list: false,
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| header_err("property before any element".into()))?;
                let kind = tokens
                    .next()
                    .ok_or_else(|| header_err("property line missing type".into()))?;
                if kind == "list" {
                    // Count and value types plus name follow; we only need
                    // to remember the element holds a list.
                    element.has_list = true;
                    continue;
                }
                let kind = ScalarType::parse(kind)
                    .ok_or_else(|| header_err(format!("unknown property type {kind:?}")))?;
                let name = tokens
                    .next()
                    .ok_or_else(|| header_err("property line missing name".into()))?;
                element.properties.push((name.to_string(), kind));
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(header_err(format!("unknown header keyword {other:?}")));
            }
        }
    }

    let format = format.ok_or(PlyError::Header {
        line: line_no,
        message: "header has no format line".into(),
    })?;
    Ok(Header {
        format,
        elements,
        body_start: pos.min(data.len()),
    })
}

/// Column layout of the supported vertex element.
struct VertexLayout {
    count: usize,
    properties: Vec<(String, ScalarType)>,
    xyz: [usize; 3],
    normals: Option<[usize; 3]>,
}

fn vertex_layout(header: &Header) -> Result<VertexLayout, PlyError> {
    let vertex = match header.elements.first() {
        Some(e) if e.name == "vertex" => e,
        Some(e) => {
            return Err(PlyError::UnsupportedLayout(format!(
                "first element is {:?}; vertex data must come first",
                e.name
            )))
        }
        None => return Err(PlyError::UnsupportedLayout("no elements declared".into())),
    };
    if vertex.has_list {
        return Err(PlyError::UnsupportedLayout(
            "vertex element contains a list property".into(),
        ));
    }
    let float_column = |name: &str| -> Result<Option<usize>, PlyError> {
        match vertex.properties.iter().position(|(n, _)| n == name) {
            None => Ok(None),
            Some(i) if vertex.properties[i].1.is_float() => Ok(Some(i)),
            Some(_) => Err(PlyError::UnsupportedLayout(format!(
                "vertex property {name} must be float or double"
            ))),
        }
    };
    let coord = |name: &str| -> Result<usize, PlyError> {
        float_column(name)?.ok_or_else(|| {
            PlyError::UnsupportedLayout(format!("vertex element is missing property {name}"))
        })
    };
    let xyz = [coord("x")?, coord("y")?, coord("z")?];
    let normals = match (
        float_column("nx")?,
        float_column("ny")?,
        float_column("nz")?,
    ) {
        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
        _ => None, // partial normal columns are treated as extra scalars
    };
    Ok(VertexLayout {
        count: vertex.count,
        properties: vertex.properties.clone(),
        xyz,
        normals,
    })
}

/// Parses a PLY byte buffer into a point cloud.
pub fn parse_ply(data: &[u8]) -> Result<PointCloud, PlyError> {
    let header = parse_header(data)?;
    let layout = vertex_layout(&header)?;
    let body = &data[header.body_start..];
    let columns = match header.format {
        PlyFormat::Ascii => parse_ascii_records(body, header.body_start, &layout)?,
        PlyFormat::BinaryLittleEndian => parse_binary_records(body, header.body_start, &layout)?,
    };
    build_cloud(columns, &layout)
}

/// Raw per-vertex values for the columns we keep: x, y, z (+ normals).
struct KeptColumns {
    points: Vec<Point3>,
    normals: Vec<Vector3>,
}

fn build_cloud(kept: KeptColumns, layout: &VertexLayout) -> Result<PointCloud, PlyError> {
    if layout.normals.is_some() {
        // Tolerant ingest: normalise non-zero normals (files from other
        // tools are rarely unit to our tolerance); zero stays the
        // invalid-normal marker. Normals that are already unit length are
        // kept bit-exact so our own files round-trip.
        let normals = kept
            .normals
            .into_iter()
            .map(|n| {
                let len = n.norm();
                if len == 0.0 || (len - 1.0).abs() <= 1e-12 {
                    n
                } else {
                    n / len
                }
            })
            .collect();
        PointCloud::with_normals(kept.points, normals)
            .map_err(|e| PlyError::UnsupportedLayout(e.to_string()))
    } else {
        PointCloud::new(kept.points).map_err(|e| PlyError::UnsupportedLayout(e.to_string()))
    }
}

fn parse_ascii_records(
    body: &[u8],
    body_start: usize,
    layout: &VertexLayout,
) -> Result<KeptColumns, PlyError> {
    let mut pos = 0;
    let mut next_token = |record: usize| -> Result<(u64, &str), PlyError> {
        while pos < body.len() && body[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos >= body.len() {
            return Err(PlyError::Truncated {
                record,
                offset: (body_start + body.len()) as u64,
            });
        }
        let start = pos;
        while pos < body.len() && !body[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let token = std::str::from_utf8(&body[start..pos]).map_err(|_| PlyError::BadValue {
            record,
            offset: (body_start + start) as u64,
            message: "token is not valid UTF-8".into(),
        })?;
        Ok(((body_start + start) as u64, token))
    };

    let mut points = Vec::with_capacity(layout.count);
    let mut normals = Vec::with_capacity(if layout.normals.is_some() {
        layout.count
    } else {
        0
    });
    let mut values = vec![0.0f64; layout.properties.len()];
    for record in 0..layout.count {
        for (column, slot) in values.iter_mut().enumerate() {
            let (offset, token) = next_token(record)?;
            *slot = token.parse::<f64>().map_err(|e| PlyError::BadValue {
                record,
                offset,
                message: format!("{e} ({token:?} as {})", layout.properties[column].0),
            })?;
        }
        push_record(record, &values, layout, &mut points, &mut normals)?;
    }
    Ok(KeptColumns { points, normals })
}

fn parse_binary_records(
    body: &[u8],
    body_start: usize,
    layout: &VertexLayout,
) -> Result<KeptColumns, PlyError> {
    let record_size: usize = layout.properties.iter().map(|(_, k)| k.size()).sum();
    let mut points = Vec::with_capacity(layout.count);
    let mut normals = Vec::with_capacity(if layout.normals.is_some() {
        layout.count
    } else {
        0
    });
    let mut values = vec![0.0f64; layout.properties.len()];
    for record in 0..layout.count {
        let base = record * record_size;
        if base + record_size > body.len() {
            return Err(PlyError::Truncated {
                record,
                offset: (body_start + body.len()) as u64,
            });
        }
        let mut offset = base;
        for (column, (_, kind)) in layout.properties.iter().enumerate() {
            values[column] = read_scalar(&body[offset..offset + kind.size()], *kind);
            offset += kind.size();
        }
        push_record(record, &values, layout, &mut points, &mut normals)?;
    }
    Ok(KeptColumns { points, normals })
}

fn read_scalar(bytes: &[u8], kind: ScalarType) -> f64 {
    match kind {
        ScalarType::I8 => bytes[0] as i8 as f64,
        ScalarType::U8 => bytes[0] as f64,
        ScalarType::I16 => i16::from_le_bytes([bytes[0], bytes[1]]) as f64,
        ScalarType::U16 => u16::from_le_bytes([bytes[0], bytes[1]]) as f64,
        ScalarType::I32 => i32::from_le_bytes(bytes.try_into().unwrap()) as f64,
        ScalarType::U32 => u32::from_le_bytes(bytes.try_into().unwrap()) as f64,
        ScalarType::F32 => f32::from_le_bytes(bytes.try_into().unwrap()) as f64,
        ScalarType::F64 => f64::from_le_bytes(bytes.try_into().unwrap()),
    }
}

fn push_record(
    record: usize,
    values: &[f64],
    layout: &VertexLayout,
    points: &mut Vec<Point3>,
    normals: &mut Vec<Vector3>,
) -> Result<(), PlyError> {
    let [ix, iy, iz] = layout.xyz;
    let point = Point3::new(values[ix], values[iy], values[iz]);
    if !point.coords.iter().all(|v| v.is_finite()) {
        return Err(PlyError::NonFinite { record });
    }
    points.push(point);
    if let Some([nx, ny, nz]) = layout.normals {
        let normal = Vector3::new(values[nx], values[ny], values[nz]);
        if !normal.iter().all(|v| v.is_finite()) {
            return Err(PlyError::NonFinite { record });
        }
        normals.push(normal);
    }
    Ok(())
}

/// Reads a PLY file from disk.
pub fn read_cloud(path: impl AsRef<Path>) -> Result<PointCloud, PlyError> {
    parse_ply(&fs::read(path)?)
}

/// Serialises a cloud as PLY to a writer. ASCII output prints coordinates
/// with shortest-round-trip formatting, so values re-read bit-exactly;
/// binary output stores little-endian doubles.
pub fn write_cloud_to(
    cloud: &PointCloud,
    format: PlyFormat,
    out: &mut impl Write,
) -> io::Result<()> {
    let format_name = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    writeln!(out, "ply")?;
    writeln!(out, "format {format_name} 1.0")?;
    writeln!(out, "element vertex {}", cloud.len())?;
    for coord in ["x", "y", "z"] {
        writeln!(out, "property double {coord}")?;
    }
    if cloud.normals().is_some() {
        for coord in ["nx", "ny", "nz"] {
            writeln!(out, "property double {coord}")?;
        }
    }
    writeln!(out, "end_header")?;
    let normals = cloud.normals();
    for (i, p) in cloud.points().iter().enumerate() {
        match format {
            PlyFormat::Ascii => {
                write!(out, "{} {} {}", p.x, p.y, p.z)?;
                if let Some(normals) = normals {
                    let n = normals[i];
                    write!(out, " {} {} {}", n.x, n.y, n.z)?;
                }
                writeln!(out)?;
            }
            PlyFormat::BinaryLittleEndian => {
                for v in &p.coords {
                    out.write_all(&v.to_le_bytes())?;
                }
                if let Some(normals) = normals {
                    for v in &normals[i] {
                        out.write_all(&v.to_le_bytes())?;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Writes a PLY file to disk (non-atomically; callers that need atomic
/// replacement should write to a temporary file and rename).
pub fn write_cloud(
    cloud: &PointCloud,
    format: PlyFormat,
    path: impl AsRef<Path>,
) -> Result<(), PlyError> {
    let mut buf = Vec::new();
    write_cloud_to(cloud, format, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}
