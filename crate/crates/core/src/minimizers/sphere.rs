use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::phi2_mesh;
use crate::geom::SurfaceMesh;
use crate::maps::MeshMap;

/// Subdivision level of the default icosphere (1280 triangles).
pub const SPHERE_SUBDIVISIONS: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SphereRow {
    pub s: f64,
    pub phi2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SphereTable {
    pub radius: f64,
    pub rows: Vec<SphereRow>,
    pub argmin: usize,
}

impl SphereTable {
    pub fn argmin_s(&self) -> f64 {
        self.rows[self.argmin].s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,phi2\n");
        for r in &self.rows {
            out.push_str(&format!("{},{}\n", r.s, r.phi2));
        }
        out
    }
}

/// Conformal self-map of the unit sphere: stereographic projection from the
/// north pole, scaling of the plane by `e^s`, and projection back. Both poles are fixed.
pub fn stereographic_dilation(p: Vector3<f64>, s: f64) -> Vector3<f64> {
    let u = p.normalize();
    let denom = 1.0 - u.z;
    if denom <= 1e-15 {
        return Vector3::new(0.0, 0.0, 1.0);
    }
    let k = s.exp() / denom;
    let (wx, wy) = (u.x * k, u.y * k);
    let r2 = wx * wx + wy * wy;
    Vector3::new(2.0 * wx, 2.0 * wy, r2 - 1.0) / (r2 + 1.0)
}

/// [`sphere_family_phi2_on`] over the default unit icosphere.
pub fn sphere_family_phi2(radius: f64, s_grid: &[f64]) -> Result<SphereTable> {
    let m = SurfaceMesh::icosphere(SPHERE_SUBDIVISIONS, 1.0)?;
    sphere_family_phi2_on(&m, radius, s_grid)
}

/// Deformation energy of `p ↦ R · C_s(p)` from a unit-sphere mesh, for each `s`.
pub fn sphere_family_phi2_on(m: &SurfaceMesh, radius: f64, s_grid: &[f64]) -> Result<SphereTable> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if s_grid.is_empty() {
        return Err(Error::InvalidParameter("empty parameter grid".into()));
    }
    if m.vertices().iter().any(|v| (v.norm() - 1.0).abs() > 1e-9) {
        return Err(Error::InvalidGeometry(
            "source mesh must lie on the unit sphere".into(),
        ));
    }
    let rows = s_grid
        .par_iter()
        .map(|&s| {
            let h = MeshMap::from_fn(m.clone(), |p| stereographic_dilation(p, s) * radius)?;
            Ok(SphereRow {
                s,
                phi2: phi2_mesh(&h)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut argmin = 0;
    for (i, r) in rows.iter().enumerate() {
        if r.phi2 < rows[argmin].phi2 {
            argmin = i;
        }
    }
    Ok(SphereTable {
        radius,
        rows,
        argmin,
    })
}
