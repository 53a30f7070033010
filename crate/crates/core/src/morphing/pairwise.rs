use nalgebra::Vector2;
use serde::Serialize;

use super::Morph;
use crate::error::{Error, Result};
use crate::geom::{ClosedCurve, Shape};

/// Deviation of `J(f^t) Vol(M) / Vol(M^t)` from 1, per frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairwiseReport {
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub worst_frame: usize,
    /// Signed per-element deviation in the worst frame; positive means over-stretched.
    pub worst_frame_elements: Vec<f64>,
    pub tolerance: f64,
    pub verdict: bool,
}

pub fn is_pairwise_minimal<S: Shape>(f: &Morph<S>, tol: f64) -> PairwiseReport {
    let v0 = f.source().volume();
    let jac = f.jacobians();
    let signed: Vec<Vec<f64>> = jac
        .iter()
        .zip(f.volume_path())
        .map(|(js, vt)| js.iter().map(|j| j * v0 / vt - 1.0).collect())
        .collect();
    let deviations: Vec<f64> = signed
        .iter()
        .map(|row| row.iter().fold(0.0f64, |m, d| m.max(d.abs())))
        .collect();
    let mut worst_frame = 0;
    for (j, d) in deviations.iter().enumerate() {
        if *d > deviations[worst_frame] {
            worst_frame = j;
        }
    }
    let max_deviation = deviations[worst_frame];
    PairwiseReport {
        worst_frame_elements: signed[worst_frame].clone(),
        deviations,
        max_deviation,
        worst_frame,
        tolerance: tol,
        verdict: max_deviation < tol,
    }
}

/// Places the vertices of `frame` anew along its own polyline so that consecutive
/// chords are proportional to `source_lengths`. Vertex 0 stays fixed.
pub fn resample_frame(frame: &ClosedCurve, source_lengths: &[f64]) -> Result<ClosedCurve> {
    let n = frame.len();
    if source_lengths.len() != n {
        return Err(Error::DomainMismatch(format!(
            "{} source lengths for a frame with {n} vertices",
            source_lengths.len()
        )));
    }
    let total: f64 = source_lengths.iter().sum();
    let ratio = frame.length() / total;
    let already = frame
        .segment_lengths()
        .iter()
        .zip(source_lengths)
        .all(|(a, l)| (a / l - ratio).abs() <= FIXED_POINT_TOL * ratio);
    if already {
        return Ok(frame.clone());
    }
    let closing = |lambda: f64| -> Option<(f64, Vec<Vector2<f64>>)> {
        let pts = march(frame.vertices(), source_lengths, lambda)?;
        let gap = (frame.vertices()[0] - pts[n - 1]).norm() - lambda * source_lengths[n - 1];
        Some((gap, pts))
    };

    let hi0 = frame.length() / total;
    let mut hi = hi0;
    let mut lo = 0.5 * hi0;
    let mut best = None;
    if let Some((g, pts)) = closing(hi) {
        if g >= 0.0 {
            best = Some(pts);
        }
    }
    if best.is_none() {
        let mut bracketed = false;
        for _ in 0..60 {
            match closing(lo) {
                Some((g, _)) if g > 0.0 => {
                    bracketed = true;
                    break;
                }
                _ => {
                    hi = lo;
                    lo *= 0.5;
                }
            }
        }
        if !bracketed {
            return Err(Error::InvalidGeometry(
                "cannot bracket the chord scale for resampling".into(),
            ));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            match closing(mid) {
                Some((g, _)) if g > 0.0 => lo = mid,
                _ => hi = mid,
            }
        }
        best = closing(lo).map(|(_, pts)| pts);
    }
    let pts = best.ok_or_else(|| Error::InvalidGeometry("resampling march failed".into()))?;
    ClosedCurve::new(pts)
}

/// Frames whose chords already match to this relative accuracy are returned as is.
const FIXED_POINT_TOL: f64 = 1e-13;

/// Tolerance on the segment parameter when accepting a chord intersection.
const ROOT_SLACK: f64 = 1e-10;

/// Walks the polyline from vertex 0, emitting the first forward point at chord
/// distance `lambda * l_i` from the previous one. `None` if it runs past the end.
fn march(v: &[Vector2<f64>], lengths: &[f64], lambda: f64) -> Option<Vec<Vector2<f64>>> {
    let n = v.len();
    let mut pts = Vec::with_capacity(n);
    pts.push(v[0]);
    let (mut seg, mut tau) = (0usize, 0.0f64);
    let mut y = v[0];
    for &l in &lengths[..n - 1] {
        let c = lambda * l;
        // On the segment holding `y` only the forward root counts.
        let mut own = true;
        loop {
            if seg >= n {
                return None;
            }
            let a = v[seg];
            let d = v[(seg + 1) % n] - a;
            let ay = a - y;
            let qa = d.norm_squared();
            let qb = 2.0 * ay.dot(&d);
            let qc = ay.norm_squared() - c * c;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let sq = disc.sqrt();
                let roots = [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)];
                let hit = if own {
                    Some(roots[1]).filter(|&r| r >= tau - ROOT_SLACK && r <= 1.0 + ROOT_SLACK)
                } else {
                    roots
                        .into_iter()
                        .find(|r| (-ROOT_SLACK..=1.0 + ROOT_SLACK).contains(r))
                };
                if let Some(r) = hit {
                    tau = r.clamp(tau, 1.0);
                    y = a + d * tau;
                    break;
                }
            }
            own = false;
            seg += 1;
            tau = 0.0;
        }
        pts.push(y);
    }
    Some(pts)
}

/// Resamples every frame after the first so that `J(f^t)` is spatially constant.
pub fn pairwise_minimalize_curve(f: &Morph<ClosedCurve>) -> Result<Morph<ClosedCurve>> {
    let lengths = f.source().segment_lengths();
    let mut frames = Vec::with_capacity(f.frames().len());
    frames.push(f.source().clone());
    for fr in &f.frames()[1..] {
        frames.push(resample_frame(fr, &lengths)?);
    }
    Morph::new(frames)
}
