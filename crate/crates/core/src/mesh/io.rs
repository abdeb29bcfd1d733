//! Reading and writing meshes as OFF or JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::fmt_f64;
use crate::mesh::{Embedding, SimplicialComplex2};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Json,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("off") => Ok(Self::Off),
            Some("json") => Ok(Self::Json),
            other => Err(Error::UnsupportedFormat(other.unwrap_or("<none>").to_string())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonMesh {
    vertices: Vec<Vec<f64>>,
    triangles: Vec<[usize; 3]>,
}

pub fn write_off(complex: &SimplicialComplex2) -> String {
    let mut out = String::from("OFF\n");
    out.push_str(&format!("{} {} {}\n", complex.n_vertices(), complex.n_triangles(), complex.n_edges()));
    for p in complex.coords() {
        out.push_str(&format!("{} {} {}\n", fmt_f64(p[0]), fmt_f64(p[1]), fmt_f64(p[2])));
    }
    for t in complex.triangles() {
        out.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
    }
    out
}

pub fn write_json(complex: &SimplicialComplex2) -> String {
    let planar = complex.embedding() == Embedding::Planar;
    let mesh = JsonMesh {
        vertices: complex
            .coords()
            .iter()
            .map(|p| if planar { vec![p[0], p[1]] } else { p.to_vec() })
            .collect(),
        triangles: complex.triangles().to_vec(),
    };
    serde_json::to_string(&mesh).expect("mesh serializes")
}

pub fn read_off(text: &str) -> Result<SimplicialComplex2> {
    // Non-empty, non-comment lines with their 1-based line numbers.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let last_line = text.lines().count() + 1;
    let err = |line: usize, message: &str| Error::ParseError { line, message: message.to_string() };

    let (line, header) = lines.next().ok_or_else(|| err(last_line, "missing OFF header"))?;
    let mut header_tokens = header.split_whitespace();
    if header_tokens.next() != Some("OFF") {
        return Err(err(line, "expected OFF header"));
    }
    let rest: Vec<&str> = header_tokens.collect();
    let (count_line, counts) = if rest.is_empty() {
        let (l, c) = lines.next().ok_or_else(|| err(last_line, "missing counts line"))?;
        (l, c.split_whitespace().collect::<Vec<_>>())
    } else {
        (line, rest)
    };
    let parse_usize = |s: Option<&&str>, line: usize, what: &str| -> Result<usize> {
        s.and_then(|s| s.parse().ok()).ok_or_else(|| err(line, &format!("bad {what}")))
    };
    let nv = parse_usize(counts.first(), count_line, "vertex count")?;
    let nf = parse_usize(counts.get(1), count_line, "face count")?;

    let mut coords = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, l) = lines.next().ok_or_else(|| err(last_line, "truncated vertex list"))?;
        let vals: Vec<f64> = l
            .split_whitespace()
            .map(|s| s.parse::<f64>().map_err(|_| err(line, "bad coordinate")))
            .collect::<Result<_>>()?;
        if vals.len() != 3 {
            return Err(err(line, "vertex line needs three coordinates"));
        }
        coords.push([vals[0], vals[1], vals[2]]);
    }
    let mut tris = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line, l) = lines.next().ok_or_else(|| err(last_line, "truncated face list"))?;
        let vals: Vec<usize> = l
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|_| err(line, "bad face index")))
            .collect::<Result<_>>()?;
        if vals.first() != Some(&3) || vals.len() != 4 {
            return Err(err(line, "only triangular faces are supported"));
        }
        tris.push([vals[1], vals[2], vals[3]]);
    }
    SimplicialComplex2::new(coords, &tris)
}

pub fn read_json(text: &str) -> Result<SimplicialComplex2> {
    let mesh: JsonMesh = serde_json::from_str(text).map_err(|e| Error::ParseError { line: e.line(), message: e.to_string() })?;
    let mut coords = Vec::with_capacity(mesh.vertices.len());
    for v in &mesh.vertices {
        match v.as_slice() {
            [x, y] => coords.push([*x, *y, 0.0]),
            [x, y, z] => coords.push([*x, *y, *z]),
            _ => {
                return Err(Error::ParseError { line: 1, message: "vertices need 2 or 3 coordinates".into() });
            }
        }
    }
    SimplicialComplex2::new(coords, &mesh.triangles)
}

pub fn read_mesh(path: &Path) -> Result<SimplicialComplex2> {
    let format = MeshFormat::from_path(path)?;
    let text = std::fs::read_to_string(path)?;
    match format {
        MeshFormat::Off => read_off(&text),
        MeshFormat::Json => read_json(&text),
    }
}

pub fn write_mesh(complex: &SimplicialComplex2, path: &Path) -> Result<()> {
    let text = match MeshFormat::from_path(path)? {
        MeshFormat::Off => write_off(complex),
        MeshFormat::Json => write_json(complex),
    };
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_off_reports_line() {
        let text = "OFF\n3 1 0\n0 0 0\n1 0 0\n";
        match read_off(text) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_coordinate_reports_line() {
        let text = "OFF\n# comment\n3 1 0\n0 0 0\n1 x 0\n0 1 0\n3 0 1 2\n";
        match read_off(text) {
            Err(Error::ParseError { line, .. }) => assert_eq!(line, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_extension() {
        assert!(matches!(MeshFormat::from_path(Path::new("a.obj")), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn quad_faces_are_rejected() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        assert!(matches!(read_off(text), Err(Error::ParseError { line: 7, .. })));
    }
}
