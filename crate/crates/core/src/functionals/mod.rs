//! Scalar energies on maps, flows, morphs and volume schedules.

mod deformation;
mod flow_energy;
mod morph_energy;
mod schedule;
mod stretching;

pub use deformation::{
    el_residual_curve, phi2_curve, phi2_first_variation_curve, phi2_mesh,
    phi2_second_variation_curve, pushforward, vary_curve_map,
};
pub use flow_energy::energy_e_curve;
pub use morph_energy::{
    epsilon_f, epsilon_series, psi_pairwise, psi_total, time_derivative, PairwiseEnergy,
    PAIRWISE_TOL,
};
pub use schedule::{xi, VolumeSchedule};
pub use stretching::{phi1, phi1_critical_residual, VolumeMap};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

/// Energy value with its per-element breakdown.
///
/// `value` is the index-ordered sum of `density[i] * weight[i]` plus any
/// element-free term recorded in `metadata` (see [`energy_e_curve`]).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub value: f64,
    pub densities: Vec<f64>,
    pub weights: Vec<f64>,
    pub metadata: BTreeMap<String, f64>,
}

impl EnergyReport {
    pub(crate) fn from_densities(densities: Vec<f64>, weights: Vec<f64>) -> Self {
        let value = weighted_sum(&densities, &weights);
        Self {
            value,
            densities,
            weights,
            metadata: BTreeMap::new(),
        }
    }

    pub(crate) fn with_meta(mut self, key: &str, value: f64) -> Self {
        self.metadata.insert(key.to_owned(), value);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `element,density,weight` rows for plotting.
    pub fn densities_csv(&self) -> String {
        let mut out = String::from("element,density,weight\n");
        for (i, (d, w)) in self.densities.iter().zip(&self.weights).enumerate() {
            writeln!(out, "{i},{d},{w}").unwrap();
        }
        out
    }
}

pub(crate) fn weighted_sum(a: &[f64], w: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(w) {
        acc += x * y;
    }
    acc
}
