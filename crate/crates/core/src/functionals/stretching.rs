use super::EnergyReport;
use crate::error::Result;
use crate::geom::Shape;
use crate::maps::{jacobian_curve, jacobian_mesh, CurveMap, MeshMap};

/// A map between discrete manifolds with a per-element Jacobian.
pub trait VolumeMap {
    fn jacobian(&self) -> Result<Vec<f64>>;
    fn source_weights(&self) -> Vec<f64>;
    fn source_volume(&self) -> f64;
    fn target_volume(&self) -> f64;
}

impl VolumeMap for CurveMap {
    fn jacobian(&self) -> Result<Vec<f64>> {
        jacobian_curve(self)
    }

    fn source_weights(&self) -> Vec<f64> {
        self.source().segment_lengths()
    }

    fn source_volume(&self) -> f64 {
        self.source().length()
    }

    fn target_volume(&self) -> f64 {
        self.target().length()
    }
}

impl VolumeMap for MeshMap {
    fn jacobian(&self) -> Result<Vec<f64>> {
        Ok(jacobian_mesh(self))
    }

    fn source_weights(&self) -> Vec<f64> {
        self.source().triangle_areas()
    }

    fn source_volume(&self) -> f64 {
        self.source().volume()
    }

    fn target_volume(&self) -> f64 {
        self.target().volume()
    }
}

/// `Φ₁(h) = ∫_M (|J(h)| − 1)² ω_M`.
pub fn phi1<H: VolumeMap>(h: &H) -> Result<EnergyReport> {
    let densities = h
        .jacobian()?
        .into_iter()
        .map(|j| (j.abs() - 1.0).powi(2))
        .collect();
    Ok(EnergyReport::from_densities(densities, h.source_weights())
        .with_meta("source_volume", h.source_volume())
        .with_meta("target_volume", h.target_volume()))
}

/// `max |J − Vol(N)/Vol(M)|`; zero exactly at the critical points of Φ₁.
pub fn phi1_critical_residual<H: VolumeMap>(h: &H) -> Result<f64> {
    let ratio = h.target_volume() / h.source_volume();
    Ok(h.jacobian()?
        .into_iter()
        .map(|j| (j.abs() - ratio).abs())
        .fold(0.0, f64::max))
}
