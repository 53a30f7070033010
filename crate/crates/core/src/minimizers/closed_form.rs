use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::functionals::{phi2_second_variation_curve, VolumeSchedule};
use crate::geom::ClosedCurve;
use crate::maps::CurveMap;

/// The two deformation-energy minimizers between circles with `L(N) ≥ L(M)`.
///
/// Both send source vertex `p_idx` to target vertex `q_idx`: the first is the
/// orientation-preserving linear lift, the second its mirror `−(L_N/L_M) t + L_N`.
pub fn closed_form_phi2_minimizers(
    m: &ClosedCurve,
    n: &ClosedCurve,
    p_idx: usize,
    q_idx: usize,
) -> Result<(CurveMap, CurveMap)> {
    let (lm, ln) = (m.length(), n.length());
    if ln < lm {
        return Err(Error::HypothesisViolation(format!(
            "closed-form minimizers need L(N) >= L(M) (got {ln} < {lm}); below that \
             ratio the energy has no minimizer among diffeomorphisms"
        )));
    }
    if p_idx >= m.len() || q_idx >= n.len() {
        return Err(Error::InvalidParameter(format!(
            "base points ({p_idx}, {q_idx}) out of range"
        )));
    }
    let r = ln / lm;
    let (tp, sq) = (m.arc_table()[p_idx], n.arc_table()[q_idx]);
    let h1 = CurveMap::linear(m.clone(), n.clone(), sq - r * tp, 1)?;
    let h2 = CurveMap::linear(m.clone(), n.clone(), sq + ln + r * tp, -1)?;
    Ok((h1, h2))
}

/// k-th map of a deformation-energy minimizing sequence for `L(N) < L(M)`.
///
/// The lift runs forward at unit speed, turns back through a transition zone,
/// runs backward at unit speed, turns forward again and finishes at unit speed.
/// Transitions have width `L_M / (4k)` (capped so the backward run is
/// nonnegative) and blend the slope with a cubic smoothstep, so only the zones
/// carry energy and `Φ₂ = O(1/k)`. The lift folds, so the map is returned
/// through [`CurveMap::new_folded`].
pub fn wrapping_sequence(m: &ClosedCurve, n: &ClosedCurve, k: usize) -> Result<CurveMap> {
    let (lm, ln) = (m.length(), n.length());
    if ln >= lm {
        return Err(Error::HypothesisViolation(format!(
            "wrapping sequence needs L(N) < L(M) (got {ln} >= {lm})"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("sequence index starts at 1".into()));
    }
    let w = (lm / (4.0 * k as f64)).min(0.5 * (lm - ln));
    let q = 0.5 * (lm - 2.0 * w - ln);
    let p = 0.5 * (ln + q);
    let lift = m
        .arc_table()
        .iter()
        .map(|&t| wrap_profile(t, p, q, w))
        .collect();
    CurveMap::new_folded(m.clone(), n.clone(), lift, 1)
}

/// Antiderivative of the smoothstep `3σ² − 2σ³`, in units of the zone width.
fn smoothstep_integral(sigma: f64) -> f64 {
    sigma.powi(3) - 0.5 * sigma.powi(4)
}

fn wrap_profile(t: f64, p: f64, q: f64, w: f64) -> f64 {
    let z1 = p + w;
    let b_end = z1 + q;
    let z2 = b_end + w;
    if t <= p {
        t
    } else if t <= z1 {
        let x = t - p;
        p + x - 2.0 * w * smoothstep_integral(x / w)
    } else if t <= b_end {
        p - (t - z1)
    } else if t <= z2 {
        let x = t - b_end;
        p - q - x + 2.0 * w * smoothstep_integral(x / w)
    } else {
        p - q + (t - z2)
    }
}

/// `φ*(t) = ((1 − t)√a + t√b)²` sampled at `n` uniform times.
pub fn optimal_schedule(a: f64, b: f64, n: usize) -> Result<VolumeSchedule> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "end volumes must be positive, got {a} and {b}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(
            "schedule needs at least 2 samples".into(),
        ));
    }
    if a == b {
        return VolumeSchedule::new(vec![a; n]);
    }
    let (ra, rb) = (a.sqrt(), b.sqrt());
    let last = (n - 1) as f64;
    let samples = (0..n)
        .map(|j| {
            if j == 0 {
                return a;
            }
            if j == n - 1 {
                return b;
            }
            let t = j as f64 / last;
            let r = (1.0 - t) * ra + t * rb;
            r * r
        })
        .collect();
    VolumeSchedule::new(samples)
}

/// `sin(2π m t / L_M)` and `cos(2π m t / L_M)` at the knots, `m = 1..=modes`.
pub fn fourier_directions(curve: &ClosedCurve, modes: usize) -> Vec<Vec<f64>> {
    let l = curve.length();
    let knots = &curve.arc_table()[..curve.len()];
    let mut out = Vec::with_capacity(2 * modes);
    for m in 1..=modes {
        let f = TAU * m as f64 / l;
        out.push(knots.iter().map(|t| (f * t).sin()).collect());
        out.push(knots.iter().map(|t| (f * t).cos()).collect());
    }
    out
}

/// Smallest second variation over the first `modes` sine/cosine pairs, with its direction index.
pub fn min_second_variation(h: &CurveMap, modes: usize) -> Result<(f64, usize)> {
    let mut best = (f64::INFINITY, 0);
    for (i, y) in fourier_directions(h.source(), modes).iter().enumerate() {
        let v = phi2_second_variation_curve(h, y)?;
        if v < best.0 {
            best = (v, i);
        }
    }
    Ok(best)
}
