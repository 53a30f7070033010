//! Morphs as frame sequences on a uniform time grid.

mod optimal;
mod pairwise;

pub use optimal::{optimal_morph_curve, psi_gap};
pub use pairwise::{
    is_pairwise_minimal, pairwise_minimalize_curve, resample_frame, PairwiseReport,
};

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ClosedCurve, Shape, SurfaceMesh};
use crate::maps::{CurveMap, MeshMap};

/// Frames `f^{t_0}(M), ..., f^{t_K}(M)` with `t_j = j / K`. Frame 0 is the source.
#[derive(Clone, Debug, PartialEq)]
pub struct Morph<S: Shape> {
    frames: Vec<S>,
}

impl<S: Shape> Morph<S> {
    /// Checks shared connectivity and that no frame flips orientation relative to frame 0.
    pub fn new(frames: Vec<S>) -> Result<Self> {
        let Some(first) = frames.first() else {
            return Err(Error::InsufficientResolution("morph has no frames".into()));
        };
        let last = (frames.len() - 1).max(1) as f64;
        for (j, f) in frames.iter().enumerate().skip(1) {
            if !first.same_connectivity(f) {
                return Err(Error::DomainMismatch(format!(
                    "frame {j} does not share the source connectivity"
                )));
            }
            if f.orientation_sign() != first.orientation_sign() {
                return Err(Error::MorphFold {
                    time: j as f64 / last,
                    reason: "frame orientation flipped".into(),
                });
            }
        }
        Ok(Self { frames })
    }

    /// Constant morph: every frame equals `shape`.
    pub fn stationary(shape: S, k: usize) -> Self {
        Self {
            frames: vec![shape; k + 1],
        }
    }

    pub fn frames(&self) -> &[S] {
        &self.frames
    }

    pub fn frame(&self, j: usize) -> &S {
        &self.frames[j]
    }

    pub fn source(&self) -> &S {
        &self.frames[0]
    }

    pub fn target(&self) -> &S {
        &self.frames[self.frames.len() - 1]
    }

    /// Number of time steps `K` (one less than the frame count).
    pub fn steps(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn times(&self) -> Vec<f64> {
        let k = self.steps().max(1) as f64;
        (0..self.frames.len()).map(|j| j as f64 / k).collect()
    }

    /// `Vol(M^{t_j})` per frame.
    pub fn volume_path(&self) -> Vec<f64> {
        self.frames.iter().map(Shape::volume).collect()
    }

    /// Per-frame, per-element Jacobians of `f^t` against the source weights.
    pub fn jacobians(&self) -> Vec<Vec<f64>> {
        let w0 = self.frames[0].volume_weights().weights;
        self.frames
            .iter()
            .map(|f| {
                f.volume_weights()
                    .weights
                    .iter()
                    .zip(&w0)
                    .map(|(w, w0)| w / w0)
                    .collect()
            })
            .collect()
    }

    /// `t,volume` rows.
    pub fn volume_path_csv(&self) -> String {
        let mut out = String::from("t,volume\n");
        for (t, v) in self.times().iter().zip(self.volume_path()) {
            writeln!(out, "{t},{v}").unwrap();
        }
        out
    }
}

/// Map whose convex interpolation `(1 - t) p + t h(p)` generates a morph.
pub trait LinearMorphMap {
    type Frame: Shape;

    fn source_frame(&self) -> &Self::Frame;

    /// Frame at time `t`, or the geometric reason it is degenerate.
    fn interpolated_frame(&self, t: f64) -> Result<Self::Frame>;
}

impl LinearMorphMap for CurveMap {
    type Frame = ClosedCurve;

    fn source_frame(&self) -> &ClosedCurve {
        self.source()
    }

    fn interpolated_frame(&self, t: f64) -> Result<ClosedCurve> {
        let verts = self
            .source()
            .vertices()
            .iter()
            .zip(self.image_vertices())
            .map(|(p, q)| p + (q - p) * t)
            .collect();
        ClosedCurve::new(verts)
    }
}

impl LinearMorphMap for MeshMap {
    type Frame = SurfaceMesh;

    fn source_frame(&self) -> &SurfaceMesh {
        self.source()
    }

    fn interpolated_frame(&self, t: f64) -> Result<SurfaceMesh> {
        let verts = self
            .source()
            .vertices()
            .iter()
            .zip(self.target().vertices())
            .map(|(p, q)| p + (q - p) * t)
            .collect();
        SurfaceMesh::new(verts, self.source().triangles().to_vec())
    }
}

/// `F(t, p) = (1 - t) p + t h(p)` sampled at `K + 1` uniform times.
pub fn make_linear_morph<H: LinearMorphMap>(h: &H, k: usize) -> Result<Morph<H::Frame>> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "a morph needs at least one time step".into(),
        ));
    }
    let mut frames = Vec::with_capacity(k + 1);
    frames.push(h.source_frame().clone());
    let sign = h.source_frame().orientation_sign();
    for j in 1..=k {
        let t = j as f64 / k as f64;
        let frame = h.interpolated_frame(t).map_err(|e| Error::MorphFold {
            time: t,
            reason: e.to_string(),
        })?;
        if frame.orientation_sign() != sign {
            return Err(Error::MorphFold {
                time: t,
                reason: "frame orientation flipped".into(),
            });
        }
        frames.push(frame);
    }
    Morph::new(frames)
}

/// One frame of a morph file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FramePayload {
    Curve {
        vertices: Vec<[f64; 2]>,
        closed: bool,
    },
    Mesh {
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[usize; 3]>,
    },
}

/// Shapes that can be stored as morph frames.
pub trait FrameIo: Shape + Sized {
    fn to_payload(&self) -> FramePayload;
    fn from_payload(p: FramePayload) -> Result<Self>;
}

impl FrameIo for ClosedCurve {
    fn to_payload(&self) -> FramePayload {
        FramePayload::Curve {
            vertices: self.vertices().iter().map(|v| [v.x, v.y]).collect(),
            closed: true,
        }
    }

    fn from_payload(p: FramePayload) -> Result<Self> {
        match p {
            FramePayload::Curve { vertices, .. } => {
                ClosedCurve::new(vertices.iter().map(|v| Vector2::new(v[0], v[1])).collect())
            }
            FramePayload::Mesh { .. } => Err(Error::Parse("expected a curve frame".into())),
        }
    }
}

impl FrameIo for SurfaceMesh {
    fn to_payload(&self) -> FramePayload {
        FramePayload::Mesh {
            vertices: self.vertices().iter().map(|v| [v.x, v.y, v.z]).collect(),
            triangles: self.triangles().to_vec(),
        }
    }

    fn from_payload(p: FramePayload) -> Result<Self> {
        match p {
            FramePayload::Mesh {
                vertices,
                triangles,
            } => SurfaceMesh::new(
                vertices
                    .iter()
                    .map(|v| Vector3::new(v[0], v[1], v[2]))
                    .collect(),
                triangles,
            ),
            FramePayload::Curve { .. } => Err(Error::Parse("expected a mesh frame".into())),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MorphFile {
    grid_t: usize,
    frames: Vec<FramePayload>,
}

impl<S: FrameIo> Morph<S> {
    pub fn to_json(&self) -> String {
        let file = MorphFile {
            grid_t: self.frames.len(),
            frames: self.frames.iter().map(FrameIo::to_payload).collect(),
        };
        serde_json::to_string(&file).expect("morph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: MorphFile = serde_json::from_str(text)?;
        if file.grid_t != file.frames.len() {
            return Err(Error::Parse(format!(
                "grid_t = {} but {} frames present",
                file.grid_t,
                file.frames.len()
            )));
        }
        let frames = file
            .frames
            .into_iter()
            .map(S::from_payload)
            .collect::<Result<Vec<_>>>()?;
        Morph::new(frames)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
