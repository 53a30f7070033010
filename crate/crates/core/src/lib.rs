//! Discrete distortion energies for bending and morphing closed curves and
//! closed triangulated surfaces.
//!
//! - [`geom`]: polygons and triangle meshes with their induced volume forms.
//! - [`maps`]: circle-map lifts, simplicial mesh maps, pullback metrics, flows.
//! - [`functionals`]: stretching, deformation, flow and morph energies.
//! - [`minimizers`]: closed-form minimizers and projected descent.
//! - [`morphing`]: morphs, pairwise minimality, minimal-distortion morphs.

pub mod cli;
pub mod error;
pub mod functionals;
pub mod geom;
pub mod maps;
pub mod minimizers;
pub mod morphing;

pub use error::{Error, Result};
