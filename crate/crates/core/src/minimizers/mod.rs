//! Closed-form minimizers and descent methods for the map and schedule energies.

mod closed_form;
mod descent;
mod schedule;
mod sphere;

pub use closed_form::{
    closed_form_phi2_minimizers, fourier_directions, min_second_variation, optimal_schedule,
    wrapping_sequence,
};
pub use descent::{minimize_phi1, minimize_phi2_curve, random_monotone_map};
pub use schedule::minimize_xi_numeric;
pub use sphere::{
    sphere_family_phi2, sphere_family_phi2_on, stereographic_dilation, SphereRow, SphereTable,
    SPHERE_SUBDIVISIONS,
};

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::EPS_MONO;

/// Admissible lifts for slope-space descent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiftClass {
    /// Increments stay above the monotonicity floor: diffeomorphisms only.
    Monotone,
    /// Any degree-one lift; slopes may change sign.
    Folding,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub max_iters: usize,
    /// Initial trial step of every line search.
    pub step: f64,
    pub backtrack: f64,
    /// Stop when the RMS of the projected gradient drops below this, relative to
    /// `max(1, RMS of the unprojected gradient)` for the lift descents. Rounding
    /// in the constraint limits how far below ~1e-8 this can usefully go.
    pub grad_tol: f64,
    /// Increment floor relative to the target length.
    pub eps_mono: f64,
    pub seed: u64,
    /// Only consulted by the deformation descent; stretching descent is always monotone.
    pub lift_class: LiftClass,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            step: 0.5,
            backtrack: 0.5,
            grad_tol: 1e-6,
            eps_mono: EPS_MONO,
            seed: 0,
            lift_class: LiftClass::Folding,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_owned()));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack factor must lie in (0, 1)");
        }
        if !(self.grad_tol > 0.0 && self.grad_tol < 1.0) {
            return bad("gradient tolerance must lie in (0, 1)");
        }
        if !(self.eps_mono > 0.0 && self.eps_mono < 1.0) {
            return bad("monotonicity floor must lie in (0, 1)");
        }
        Ok(())
    }
}

/// Iterate history of a descent run.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimizationTrace<T> {
    /// Energy of the start point followed by every accepted iterate.
    pub energies: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub final_state: T,
    pub converged: bool,
}

impl<T> MinimizationTrace<T> {
    pub fn final_energy(&self) -> f64 {
        *self.energies.last().expect("trace has a start energy")
    }

    pub fn iterations(&self) -> usize {
        self.energies.len() - 1
    }

    /// `iter,energy,grad_norm` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,energy,grad_norm\n");
        for (i, (e, g)) in self.energies.iter().zip(&self.grad_norms).enumerate() {
            writeln!(out, "{i},{e},{g}").unwrap();
        }
        out
    }
}

/// Armijo sufficient-decrease constant shared by all line searches.
pub(crate) const ARMIJO: f64 = 1e-4;
