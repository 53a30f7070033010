//! Curve JSON and Wavefront OBJ (triangles only) readers and writers.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::{ClosedCurve, SurfaceMesh};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
pub struct CurveFile {
    pub vertices: Vec<[f64; 2]>,
    pub closed: bool,
}

impl From<&ClosedCurve> for CurveFile {
    fn from(c: &ClosedCurve) -> Self {
        CurveFile {
            vertices: c.vertices().iter().map(|v| [v.x, v.y]).collect(),
            closed: true,
        }
    }
}

impl TryFrom<CurveFile> for ClosedCurve {
    type Error = Error;

    fn try_from(f: CurveFile) -> Result<Self> {
        if !f.closed {
            return Err(Error::Parse("curve file must have \"closed\": true".into()));
        }
        ClosedCurve::new(
            f.vertices
                .iter()
                .map(|p| Vector2::new(p[0], p[1]))
                .collect(),
        )
    }
}

pub fn parse_curve_json(text: &str) -> Result<ClosedCurve> {
    let f: CurveFile = serde_json::from_str(text)?;
    f.try_into()
}

pub fn curve_to_json(c: &ClosedCurve) -> String {
    serde_json::to_string(&CurveFile::from(c)).expect("curve serializes")
}

pub fn read_curve(path: impl AsRef<Path>) -> Result<ClosedCurve> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_curve_json(&text)
}

pub fn parse_obj(text: &str) -> Result<SurfaceMesh> {
    let mut verts = Vec::new();
    let mut tris = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
                if c.len() < 3 {
                    return Err(Error::Parse(format!(
                        "line {}: vertex needs 3 coordinates",
                        lineno + 1
                    )));
                }
                verts.push(Vector3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                // accepts "i", "i/t" and "i/t/n" forms; only the position index is used
                let idx: Vec<usize> = it
                    .map(|t| {
                        t.split('/')
                            .next()
                            .unwrap_or("")
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
                    })
                    .collect::<Result<_>>()?;
                if idx.len() != 3 {
                    return Err(Error::Parse(format!(
                        "line {}: only triangles are supported, got {} indices",
                        lineno + 1,
                        idx.len()
                    )));
                }
                if idx.contains(&0) {
                    return Err(Error::Parse(format!(
                        "line {}: OBJ indices are 1-based",
                        lineno + 1
                    )));
                }
                tris.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
            }
            _ => {}
        }
    }
    SurfaceMesh::new(verts, tris)
}

pub fn mesh_to_obj(m: &SurfaceMesh) -> String {
    let mut out = String::new();
    for v in m.vertices() {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
    }
    for t in m.triangles() {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    out
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<SurfaceMesh> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_obj(&text)
}
