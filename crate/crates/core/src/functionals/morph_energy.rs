use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Shape;
use crate::maps::trapezoid_unit;
use crate::morphing::{is_pairwise_minimal, Morph};

/// Tolerance used to flag whether [`psi_pairwise`] is applicable.
pub const PAIRWISE_TOL: f64 = 1e-6;

/// Derivative of a series sampled uniformly on `[0, 1]`.
///
/// Central differences inside, second-order one-sided differences at the ends
/// (first order when only two samples exist).
pub fn time_derivative(series: &[f64]) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InsufficientResolution(
            "time derivative needs at least 2 samples".into(),
        ));
    }
    let inv = (n - 1) as f64;
    Ok((0..n).map(|j| derivative_at(series, j) * inv).collect())
}

/// Derivative at `j` in units of one grid step.
fn derivative_at(s: &[f64], j: usize) -> f64 {
    let n = s.len();
    if n == 2 {
        return s[1] - s[0];
    }
    if j == 0 {
        one_sided(s[0], s[1], s[2])
    } else if j == n - 1 {
        -one_sided(s[n - 1], s[n - 2], s[n - 3])
    } else {
        (s[j + 1] - s[j - 1]) * 0.5
    }
}

/// `(-3 a + 4 b - c) / 2`, arranged to vanish exactly on constants.
fn one_sided(a: f64, b: f64, c: f64) -> f64 {
    2.0 * (b - a) - 0.5 * (c - a)
}

/// Frames entering the difference stencil at `j`.
fn stencil(n: usize, j: usize) -> Vec<usize> {
    if n == 2 {
        vec![0, 1]
    } else if j == 0 {
        vec![0, 1, 2]
    } else if j == n - 1 {
        vec![n - 3, n - 2, n - 1]
    } else {
        vec![j - 1, j, j + 1]
    }
}

/// `ε^F(t_j) = Σ_e (dJ_e/dt)² / J_e · ω_M(e)`.
pub fn epsilon_f<S: Shape>(f: &Morph<S>, j: usize) -> Result<f64> {
    let n = f.frames().len();
    if n < 2 {
        return Err(Error::InsufficientResolution(
            "infinitesimal distortion needs at least 2 frames".into(),
        ));
    }
    if j >= n {
        return Err(Error::InvalidParameter(format!(
            "time index {j} outside 0..{n}"
        )));
    }
    let w0 = f.source().volume_weights().weights;
    let idx = stencil(n, j);
    let rows: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| f.frame(i).volume_weights().weights)
        .collect();
    let here = idx
        .iter()
        .position(|&i| i == j)
        .expect("stencil contains j");
    let inv = (n - 1) as f64;
    let mut acc = 0.0;
    let mut local = vec![0.0; rows.len()];
    for (e, w) in w0.iter().enumerate() {
        for (r, row) in rows.iter().enumerate() {
            local[r] = row[e] / w;
        }
        let rate = local_derivative(&local, here, n == 2) * inv;
        acc += rate * rate / local[here] * w;
    }
    Ok(acc)
}

fn local_derivative(s: &[f64], here: usize, two_frames: bool) -> f64 {
    if two_frames {
        return s[1] - s[0];
    }
    match here {
        0 => one_sided(s[0], s[1], s[2]),
        2 => -one_sided(s[2], s[1], s[0]),
        _ => (s[2] - s[0]) * 0.5,
    }
}

/// Total distortion `Ψ(F) = ∫₀¹ ε^F dt`, trapezoid rule.
pub fn psi_total<S: Shape>(f: &Morph<S>) -> Result<f64> {
    let eps = (0..f.frames().len())
        .map(|j| epsilon_f(f, j))
        .collect::<Result<Vec<_>>>()?;
    Ok(trapezoid_unit(&eps))
}

/// Volume-path form of the total distortion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PairwiseEnergy {
    pub value: f64,
    /// Whether the morph passed the pairwise-minimality check; the value only
    /// equals [`psi_total`] when it did.
    pub pairwise_minimal: bool,
}

/// `∫₀¹ V̇² / V dt` of the volume path `V(t) = Vol(M^t)`.
pub fn psi_pairwise<S: Shape>(f: &Morph<S>) -> Result<PairwiseEnergy> {
    let vols = f.volume_path();
    let rate = time_derivative(&vols)?;
    let dens: Vec<f64> = rate.iter().zip(&vols).map(|(r, v)| r * r / v).collect();
    Ok(PairwiseEnergy {
        value: trapezoid_unit(&dens),
        pairwise_minimal: is_pairwise_minimal(f, PAIRWISE_TOL).verdict,
    })
}

/// `ε^F(t_j)` for every grid time.
pub fn epsilon_series<S: Shape>(f: &Morph<S>) -> Result<Vec<f64>> {
    (0..f.frames().len()).map(|j| epsilon_f(f, j)).collect()
}
