//! Discrete geometry: closed polygons (n = 1) and closed triangle meshes (n = 2).

mod curve;
pub mod io;
mod mesh;

pub use curve::{ClosedCurve, CurvatureField, Orientation, EPS_GEOM};
pub use mesh::{SurfaceMesh, TriangleFrame};

/// Per-element measure of the induced volume form: segment lengths or triangle areas.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeFormWeights {
    pub weights: Vec<f64>,
}

impl VolumeFormWeights {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Common view of curves and meshes as discrete measured manifolds.
pub trait Shape: Clone {
    fn volume_weights(&self) -> VolumeFormWeights;

    /// Length for curves, area for surfaces.
    fn volume(&self) -> f64;

    fn element_count(&self) -> usize;

    /// True when `other` has the same vertex count and element connectivity.
    fn same_connectivity(&self, other: &Self) -> bool;

    fn diameter(&self) -> f64;

    /// Traversal sign for curves; always `+1` for outward-oriented meshes.
    fn orientation_sign(&self) -> f64 {
        1.0
    }
}

impl Shape for ClosedCurve {
    fn volume_weights(&self) -> VolumeFormWeights {
        VolumeFormWeights {
            weights: self.segment_lengths(),
        }
    }

    fn volume(&self) -> f64 {
        self.length()
    }

    fn element_count(&self) -> usize {
        self.len()
    }

    fn same_connectivity(&self, other: &Self) -> bool {
        self.len() == other.len()
    }

    fn diameter(&self) -> f64 {
        ClosedCurve::diameter(self)
    }

    fn orientation_sign(&self) -> f64 {
        self.orientation().sign()
    }
}

impl Shape for SurfaceMesh {
    fn volume_weights(&self) -> VolumeFormWeights {
        VolumeFormWeights {
            weights: self.triangle_areas(),
        }
    }

    fn volume(&self) -> f64 {
        self.area()
    }

    fn element_count(&self) -> usize {
        self.triangles().len()
    }

    fn same_connectivity(&self, other: &Self) -> bool {
        SurfaceMesh::same_connectivity(self, other)
    }

    fn diameter(&self) -> f64 {
        SurfaceMesh::diameter(self)
    }
}

pub fn curve_length(c: &ClosedCurve) -> f64 {
    c.length()
}

pub fn mesh_area(m: &SurfaceMesh) -> f64 {
    m.area()
}

pub fn curvature(c: &ClosedCurve) -> CurvatureField {
    c.curvature()
}

pub fn volume_weights<S: Shape>(g: &S) -> VolumeFormWeights {
    g.volume_weights()
}
