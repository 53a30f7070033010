//! Discrete diffeomorphisms, pullback metrics, strain and flows.

mod curve_map;
mod flow;
mod mesh_map;
mod spline;

pub use curve_map::{compose_curve_maps, invert_curve_map, jacobian_curve, CurveMap, EPS_MONO};
pub(crate) use flow::trapezoid_unit;
pub use flow::{
    evolve, time_one_map, TimeOneMap, TimeVectorField, TimeVectorFieldFile, DEFAULT_DT,
};
pub use mesh_map::{affine_pullback, jacobian_mesh, pullback_metric_mesh, MeshMap};

use nalgebra::Matrix2;

use crate::error::Result;

/// `S(h) = h*g_N − g_M` per element, relative to the source metric.
#[derive(Clone, Debug, PartialEq)]
pub enum StrainField {
    /// `u'² − 1` per segment.
    Curve(Vec<f64>),
    /// `AᵀA − I` per triangle, in the source triangle frame.
    Mesh(Vec<Matrix2<f64>>),
}

pub fn strain_curve(h: &CurveMap) -> StrainField {
    StrainField::Curve(h.slopes().iter().map(|s| s * s - 1.0).collect())
}

pub fn strain_mesh(h: &MeshMap) -> Result<StrainField> {
    Ok(StrainField::Mesh(
        pullback_metric_mesh(h)?
            .into_iter()
            .map(|g| g - Matrix2::identity())
            .collect(),
    ))
}
