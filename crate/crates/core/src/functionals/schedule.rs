use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Positive volume path sampled on a uniform grid over `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeSchedule {
    samples: Vec<f64>,
}

impl VolumeSchedule {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidSchedule(format!(
                "schedule needs at least 2 samples, got {}",
                samples.len()
            )));
        }
        if let Some((j, v)) = samples
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v <= 0.0)
        {
            return Err(Error::InvalidSchedule(format!(
                "sample {j} is {v}, must be positive"
            )));
        }
        Ok(Self { samples })
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let last = n.saturating_sub(1).max(1) as f64;
        Self::new((0..n).map(|j| f(j as f64 / last)).collect())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn times(&self) -> Vec<f64> {
        let last = (self.samples.len() - 1) as f64;
        (0..self.samples.len()).map(|j| j as f64 / last).collect()
    }

    pub fn start(&self) -> f64 {
        self.samples[0]
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1]
    }
}

/// `Ξ(φ) = ∫₀¹ φ̇²/φ dt`, midpoint rule per cell with a forward-difference `φ̇`.
///
/// The midpoint value is `((√φ_j + √φ_{j+1}) / 2)²`. With this choice the
/// discrete Ξ obeys the same Cauchy–Schwarz lower bound `4(√φ(1) − √φ(0))²`
/// as the continuous one, with equality on the square-root-linear path.
pub fn xi(phi: &VolumeSchedule) -> f64 {
    let s = phi.samples();
    let dt = 1.0 / (s.len() - 1) as f64;
    let mut acc = 0.0;
    for w in s.windows(2) {
        let rate = (w[1] - w[0]) / dt;
        let root_mid = 0.5 * (w[0].sqrt() + w[1].sqrt());
        acc += rate * rate / (root_mid * root_mid) * dt;
    }
    acc
}
