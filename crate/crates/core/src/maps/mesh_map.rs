use nalgebra::{Matrix2, Matrix2x3, Matrix3x2, Vector3};

use crate::error::{Error, Result};
use crate::geom::{SurfaceMesh, TriangleFrame};

/// Simplicial map between two meshes with identical connectivity (vertex `i` ↦ vertex `i`).
#[derive(Clone, Debug, PartialEq)]
pub struct MeshMap {
    source: SurfaceMesh,
    target: SurfaceMesh,
}

impl MeshMap {
    pub fn new(source: SurfaceMesh, target: SurfaceMesh) -> Result<Self> {
        if !source.same_connectivity(&target) {
            return Err(Error::DomainMismatch(
                "mesh map needs identical source and target connectivity".into(),
            ));
        }
        Ok(Self { source, target })
    }

    /// Map sending source vertex `i` to `image[i]`; the image mesh must be valid.
    pub fn from_images(source: SurfaceMesh, image: Vec<Vector3<f64>>) -> Result<Self> {
        let target = SurfaceMesh::new(image, source.triangles().to_vec())
            .map_err(|e| Error::InvalidMap(format!("image mesh: {e}")))?;
        Self::new(source, target)
    }

    /// Map obtained by transforming every source vertex with `f`.
    pub fn from_fn(source: SurfaceMesh, f: impl Fn(Vector3<f64>) -> Vector3<f64>) -> Result<Self> {
        let image = source.vertices().iter().map(|&v| f(v)).collect();
        Self::from_images(source, image)
    }

    pub fn identity(mesh: SurfaceMesh) -> Self {
        Self {
            source: mesh.clone(),
            target: mesh,
        }
    }

    pub fn source(&self) -> &SurfaceMesh {
        &self.source
    }

    pub fn target(&self) -> &SurfaceMesh {
        &self.target
    }
}

/// Per-triangle area ratio.
pub fn jacobian_mesh(h: &MeshMap) -> Vec<f64> {
    h.source
        .triangle_areas()
        .iter()
        .zip(h.target.triangle_areas())
        .map(|(a, b)| b / a)
        .collect()
}

/// `AᵀA` for the affine map taking `src` to `dst`, expressed in `frame`.
///
/// `A` is the 3×2 linear part written against the orthonormal source frame.
pub fn affine_pullback(
    src: [Vector3<f64>; 3],
    frame: &TriangleFrame,
    dst: [Vector3<f64>; 3],
) -> Result<Matrix2<f64>> {
    let basis = Matrix2x3::from_rows(&[frame.e1.transpose(), frame.e2.transpose()]);
    let edges = Matrix3x2::from_columns(&[src[1] - src[0], src[2] - src[0]]);
    let local: Matrix2<f64> = basis * edges;
    let inv = local
        .try_inverse()
        .ok_or_else(|| Error::InvalidMap("degenerate source triangle".into()))?;
    let image_edges = Matrix3x2::from_columns(&[dst[1] - dst[0], dst[2] - dst[0]]);
    let a = image_edges * inv;
    let g = a.transpose() * a;
    // symmetrize away rounding
    let off = 0.5 * (g[(0, 1)] + g[(1, 0)]);
    Ok(Matrix2::new(g[(0, 0)], off, off, g[(1, 1)]))
}

/// Pulled-back target metric per source triangle, in the source triangle frame.
pub fn pullback_metric_mesh(h: &MeshMap) -> Result<Vec<Matrix2<f64>>> {
    (0..h.source.triangles().len())
        .map(|t| {
            affine_pullback(
                h.source.triangle_corners(t),
                &h.source.frames()[t],
                h.target.triangle_corners(t),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_has_unit_jacobian_and_metric() {
        let h = MeshMap::identity(SurfaceMesh::icosphere(2, 1.0).unwrap());
        assert!(jacobian_mesh(&h).iter().all(|&j| j == 1.0));
        for g in pullback_metric_mesh(&h).unwrap() {
            assert_relative_eq!(g, Matrix2::identity(), epsilon = 1e-13);
        }
    }

    #[test]
    fn radial_scaling() {
        let m = SurfaceMesh::icosphere(3, 1.0).unwrap();
        let h = MeshMap::from_fn(m.clone(), |v| v * 2.0).unwrap();
        for j in jacobian_mesh(&h) {
            assert_relative_eq!(j, 4.0, max_relative = 1e-12);
        }
        let h = MeshMap::from_fn(m, |v| v * 3.0).unwrap();
        for g in pullback_metric_mesh(&h).unwrap() {
            assert_relative_eq!(g, Matrix2::identity() * 9.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn collapsed_target_rejected() {
        let m = SurfaceMesh::corner_tetrahedron().unwrap();
        let err = MeshMap::from_fn(m, |v| Vector3::new(v.x, v.y, 0.0)).unwrap_err();
        assert!(matches!(err, Error::InvalidMap(_)));
    }

    #[test]
    fn unit_shear_of_flat_strip() {
        // two triangles of the unit square in the xy-plane, sheared by x' = x + y
        let frame = TriangleFrame {
            e1: Vector3::x(),
            e2: Vector3::y(),
            normal: Vector3::z(),
        };
        let shear = |v: Vector3<f64>| Vector3::new(v.x + v.y, v.y, v.z);
        let strip = [
            [
                Vector3::new(0.0, 0.0, 0.0),
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(1.0, 1.0, 0.0),
            ],
            [
                Vector3::new(1.0, 0.0, 0.0),
                Vector3::new(2.0, 0.0, 0.0),
                Vector3::new(2.0, 1.0, 0.0),
            ],
        ];
        for tri in strip {
            let g = affine_pullback(tri, &frame, tri.map(shear)).unwrap();
            assert_relative_eq!(g, Matrix2::new(1.0, 1.0, 1.0, 2.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn sheared_box_top_face() {
        let m = SurfaceMesh::axis_box(1.0, 1.0, 1.0).unwrap();
        let h = MeshMap::from_fn(m, |v| Vector3::new(v.x + v.y, v.y, v.z)).unwrap();
        let g = pullback_metric_mesh(&h).unwrap();
        assert_relative_eq!(g[0], Matrix2::new(1.0, 1.0, 1.0, 2.0), epsilon = 1e-14);
    }

    #[test]
    fn connectivity_mismatch() {
        let a = SurfaceMesh::icosphere(0, 1.0).unwrap();
        let b = SurfaceMesh::icosphere(1, 1.0).unwrap();
        assert!(matches!(MeshMap::new(a, b), Err(Error::DomainMismatch(_))));
    }
}
