//! ASCII PLY and XYZ point cloud files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Frame, Vec3};

/// Stored normals this far from unit length are rejected rather than
/// renormalized.
const NORMAL_SLACK: f64 = 1e-3;

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a `.ply` (ASCII) or `.xyz`/`.txt` file, chosen by extension.
pub fn read_point_cloud(path: &Path) -> Result<Frame> {
    let text = fs::read_to_string(path)?;
    match extension(path).as_str() {
        "ply" => parse_ply(&text),
        "xyz" | "txt" => parse_xyz(&text),
        other => Err(Error::invalid(format!("unsupported point cloud extension `{other}`"))),
    }
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

fn build_frame(positions: Vec<Vec3>, normals: Option<Vec<Vec3>>, lines: &[usize]) -> Result<Frame> {
    let frame = Frame::new(positions)?;
    match normals {
        None => Ok(frame),
        Some(normals) => {
            let mut unit = Vec::with_capacity(normals.len());
            for (n, &line) in normals.iter().zip(lines) {
                let len = n.norm();
                if !((len - 1.0).abs() <= NORMAL_SLACK) {
                    return Err(parse_error(line, format!("normal has length {len}, expected 1")));
                }
                unit.push(n / len);
            }
            frame.with_normals(unit)
        }
    }
}

fn parse_numbers(line: &str, line_no: usize) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| parse_error(line_no, format!("non-numeric token `{tok}`")))
        })
        .collect()
}

pub fn parse_xyz(text: &str) -> Result<Frame> {
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut lines = Vec::new();
    let mut columns = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v = parse_numbers(line, line_no)?;
        if v.len() != 3 && v.len() != 6 {
            return Err(parse_error(line_no, format!("expected 3 or 6 columns, found {}", v.len())));
        }
        match columns {
            None => columns = Some(v.len()),
            Some(c) if c != v.len() => {
                return Err(parse_error(line_no, format!("expected {c} columns, found {}", v.len())));
            }
            _ => {}
        }
        positions.push(Vec3::new(v[0], v[1], v[2]));
        if v.len() == 6 {
            normals.push(Vec3::new(v[3], v[4], v[5]));
        }
        lines.push(line_no);
    }
    let normals = (columns == Some(6)).then_some(normals);
    build_frame(positions, normals, &lines)
}

struct Element {
    name: String,
    count: usize,
    properties: Vec<String>,
    /// Any `property list`: rows have a variable token count.
    has_list: bool,
}

const SCALAR_TYPES: &[&str] = &[
    "char", "uchar", "short", "ushort", "int", "uint", "float", "double", "int8", "uint8", "int16", "uint16",
    "int32", "uint32", "float32", "float64",
];

pub fn parse_ply(text: &str) -> Result<Frame> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        Some((n, _)) => return Err(parse_error(n, "missing `ply` magic")),
        None => return Err(parse_error(1, "empty file")),
    }

    let mut elements: Vec<Element> = Vec::new();
    let mut format_seen = false;
    let mut header_done = false;
    let mut last_line = 1;
    for (n, line) in lines.by_ref() {
        last_line = n;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens.as_slice() {
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", "ascii", _] => format_seen = true,
            ["format", other, ..] => return Err(parse_error(n, format!("unsupported format `{other}`"))),
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| parse_error(n, format!("bad element count `{count}`")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    has_list: false,
                });
            }
            ["property", "list", _, _, name] => {
                let e = elements
                    .last_mut()
                    .ok_or_else(|| parse_error(n, "property before element"))?;
                e.properties.push(name.to_string());
                e.has_list = true;
            }
            ["property", ty, name] => {
                if !SCALAR_TYPES.contains(ty) {
                    return Err(parse_error(n, format!("unknown property type `{ty}`")));
                }
                let e = elements
                    .last_mut()
                    .ok_or_else(|| parse_error(n, "property before element"))?;
                e.properties.push(name.to_string());
            }
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => return Err(parse_error(n, format!("malformed header line `{line}`"))),
        }
    }
    if !header_done {
        return Err(parse_error(last_line, "missing end_header"));
    }
    if !format_seen {
        return Err(parse_error(last_line, "missing `format ascii 1.0`"));
    }

    let vertex = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| parse_error(last_line, "no vertex element"))?;
    let props = &elements[vertex].properties;
    if elements[vertex].has_list {
        return Err(parse_error(last_line, "list properties on vertex are not supported"));
    }
    let find = |name: &str| props.iter().position(|p| p == name);
    let (x, y, z) = match (find("x"), find("y"), find("z")) {
        (Some(x), Some(y), Some(z)) => (x, y, z),
        _ => return Err(parse_error(last_line, "vertex element lacks x, y, z")),
    };
    let normal_cols = match (find("nx"), find("ny"), find("nz")) {
        (Some(a), Some(b), Some(c)) => Some((a, b, c)),
        (None, None, None) => None,
        _ => return Err(parse_error(last_line, "incomplete normal properties")),
    };

    let mut body = lines.filter(|(_, l)| !l.is_empty());
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    let mut row_lines = Vec::new();
    for (ei, element) in elements.iter().enumerate() {
        for _ in 0..element.count {
            let (n, line) = body
                .next()
                .ok_or_else(|| parse_error(last_line, format!("unexpected end of file in element `{}`", element.name)))?;
            last_line = n;
            if ei != vertex {
                continue;
            }
            let v = parse_numbers(line, n)?;
            if v.len() != element.properties.len() {
                return Err(parse_error(
                    n,
                    format!("expected {} values, found {}", element.properties.len(), v.len()),
                ));
            }
            positions.push(Vec3::new(v[x], v[y], v[z]));
            if let Some((a, b, c)) = normal_cols {
                normals.push(Vec3::new(v[a], v[b], v[c]));
            }
            row_lines.push(n);
        }
    }
    if positions.is_empty() {
        return Err(Error::EmptyFrame);
    }
    build_frame(positions, normal_cols.map(|_| normals), &row_lines)
}

/// ASCII PLY text with 9 significant digits per value.
pub fn format_ply(frame: &Frame) -> Result<String> {
    if frame.is_empty() {
        return Err(Error::EmptyFrame);
    }
    let mut out = String::with_capacity(64 * frame.len() + 200);
    out.push_str("ply\nformat ascii 1.0\n");
    let _ = writeln!(out, "element vertex {}", frame.len());
    out.push_str("property double x\nproperty double y\nproperty double z\n");
    if frame.normals().is_some() {
        out.push_str("property double nx\nproperty double ny\nproperty double nz\n");
    }
    out.push_str("end_header\n");
    for (i, p) in frame.positions().iter().enumerate() {
        let _ = write!(out, "{:.8e} {:.8e} {:.8e}", p.x, p.y, p.z);
        if let Some(normals) = frame.normals() {
            let n = normals[i];
            let _ = write!(out, " {:.8e} {:.8e} {:.8e}", n.x, n.y, n.z);
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_point_cloud(frame: &Frame, path: &Path) -> Result<()> {
    let text = format_ply(frame)?;
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_vertex_ply() {
        let text = "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n";
        let f = parse_ply(text).unwrap();
        assert_eq!(f.positions(), &[Vec3::zeros()]);
        assert!(f.normals().is_none());
    }

    #[test]
    fn six_column_xyz() {
        let f = parse_xyz("0 0 0 0 0 1\n").unwrap();
        assert_eq!(f.normals().unwrap(), &[Vec3::z()]);
    }

    #[test]
    fn extra_elements_and_properties() {
        let text = "ply\nformat ascii 1.0\ncomment made by hand\nelement vertex 2\nproperty float z\nproperty float x\nproperty uchar red\nproperty float y\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n3 1 200 2\n6 4 0 5\n3 0 1 1\n";
        let f = parse_ply(text).unwrap();
        assert_eq!(f.positions(), &[Vec3::new(1.0, 2.0, 3.0), Vec3::new(4.0, 5.0, 6.0)]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad_token = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n0 zero 0\n";
        assert!(matches!(parse_ply(bad_token), Err(Error::Parse { line: 9, .. })));
        let bad_header = "ply\nformat ascii 1.0\nelement vertex\n";
        assert!(matches!(parse_ply(bad_header), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_ply("plyx\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_xyz("1 2 3\n1 2\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_xyz("1 2 3\n\n1 2 3 0 0 1\n"), Err(Error::Parse { line: 3, .. })));
        let short = "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n0 0 0\n";
        assert!(matches!(parse_ply(short), Err(Error::Parse { .. })));
    }

    #[test]
    fn round_trip_within_tolerance() {
        let pts: Vec<Vec3> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.731;
                Vec3::new(t.sin() * 123.456789, t.cos() / 7.0, -1e-4 * t)
            })
            .collect();
        let normals: Vec<Vec3> = pts.iter().map(|p| (p + Vec3::new(0.1, 0.2, 0.3)).normalize()).collect();
        let frame = Frame::new(pts).unwrap().with_normals(normals).unwrap();
        let text = format_ply(&frame).unwrap();
        assert!(text.contains("element vertex 50\n"));
        let back = parse_ply(&text).unwrap();
        for (a, b) in frame.positions().iter().zip(back.positions()) {
            assert!((a - b).norm() <= 1e-6 * a.norm().max(1.0));
        }
        for (a, b) in frame.normals().unwrap().iter().zip(back.normals().unwrap()) {
            assert!((a - b).norm() <= 1e-8);
        }
        // rewriting what was read reproduces the bytes
        assert_eq!(format_ply(&back).unwrap(), text);
    }

    #[test]
    fn file_dispatch() {
        let dir = tempfile::tempdir().unwrap();
        let frame = Frame::new(vec![Vec3::new(1.0, 2.0, 3.0)]).unwrap();
        let path = dir.path().join("a.ply");
        write_point_cloud(&frame, &path).unwrap();
        assert_eq!(read_point_cloud(&path).unwrap(), frame);
        let xyz = dir.path().join("b.xyz");
        fs::write(&xyz, "1 2 3\n").unwrap();
        assert_eq!(read_point_cloud(&xyz).unwrap(), frame);
        assert!(read_point_cloud(&dir.path().join("c.obj")).is_err());
    }
}
