use super::{pairwise_minimalize_curve, resample_frame, Morph};
use crate::error::{Error, Result};
use crate::functionals::psi_total;
use crate::geom::ClosedCurve;

/// Closeness required between the base morph's end frames and `M`, `N`.
const ENDPOINT_TOL: f64 = 1e-9;

/// Pairwise-minimal morph whose volume path follows `((1 - t)√a + t√b)²` at every grid time.
///
/// The base morph is first made pairwise minimal; each output frame is then found
/// between two neighbouring base frames by solving for the blend whose resampled
/// length hits the target volume.
pub fn optimal_morph_curve(
    m: &ClosedCurve,
    n: &ClosedCurve,
    base: &Morph<ClosedCurve>,
) -> Result<Morph<ClosedCurve>> {
    check_endpoint(m, base.source(), "source")?;
    check_endpoint(n, base.target(), "target")?;
    let p = pairwise_minimalize_curve(base)?;
    let vols = p.volume_path();
    let k = p.steps();
    let (a, b) = (vols[0], vols[k]);
    let scale = a.max(b);

    if vols.iter().all(|v| (v - a).abs() <= 1e-12 * scale) {
        return Ok(p);
    }
    let increasing = b > a;
    for (j, w) in vols.windows(2).enumerate() {
        let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
        if !ok {
            return Err(Error::NonMonotoneVolume(format!(
                "volume path not strictly monotone between frames {j} and {}",
                j + 1
            )));
        }
    }

    let lengths = p.source().segment_lengths();
    let (ra, rb) = (a.sqrt(), b.sqrt());
    let mut frames = Vec::with_capacity(k + 1);
    frames.push(p.source().clone());
    let mut cell = 0;
    for j in 1..k {
        let t = j as f64 / k as f64;
        let r = (1.0 - t) * ra + t * rb;
        let goal = r * r;
        while cell + 1 < k && beyond(vols[cell + 1], goal, increasing) {
            cell += 1;
        }
        frames.push(frame_with_volume(
            &p.frames()[cell],
            &p.frames()[cell + 1],
            &lengths,
            goal,
        )?);
    }
    frames.push(p.target().clone());
    Morph::new(frames)
}

fn beyond(v: f64, goal: f64, increasing: bool) -> bool {
    if increasing {
        v < goal
    } else {
        v > goal
    }
}

fn check_endpoint(expected: &ClosedCurve, got: &ClosedCurve, which: &str) -> Result<()> {
    let tol = ENDPOINT_TOL * expected.diameter();
    let same = expected.len() == got.len()
        && expected
            .vertices()
            .iter()
            .zip(got.vertices())
            .all(|(a, b)| (a - b).norm() <= tol);
    if same {
        Ok(())
    } else {
        Err(Error::DomainMismatch(format!(
            "base morph {which} frame differs from the given curve"
        )))
    }
}

/// Blend of two consecutive pairwise-minimal frames, resampled, with length `goal`.
fn frame_with_volume(
    f0: &ClosedCurve,
    f1: &ClosedCurve,
    lengths: &[f64],
    goal: f64,
) -> Result<ClosedCurve> {
    let blend = |theta: f64| -> Result<ClosedCurve> {
        let verts = f0
            .vertices()
            .iter()
            .zip(f1.vertices())
            .map(|(p, q)| p * (1.0 - theta) + q * theta)
            .collect();
        resample_frame(&ClosedCurve::new(verts)?, lengths)
    };
    let (mut t0, mut g0) = (0.0, f0.length() - goal);
    let (mut t1, mut g1) = (1.0, f1.length() - goal);
    if g0 == 0.0 {
        return Ok(f0.clone());
    }
    if g1 == 0.0 {
        return Ok(f1.clone());
    }
    if g0.signum() == g1.signum() {
        return Err(Error::NonMonotoneVolume(
            "target volume not bracketed by neighbouring frames".into(),
        ));
    }
    // Illinois false position.
    let mut side = 0i8;
    let mut best = None;
    for _ in 0..200 {
        let theta = (t0 * g1 - t1 * g0) / (g1 - g0);
        let c = blend(theta)?;
        let g = c.length() - goal;
        let done = g.abs() <= 1e-14 * goal || (t1 - t0).abs() <= 1e-15;
        best = Some(c);
        if done {
            break;
        }
        if g.signum() == g1.signum() {
            t1 = theta;
            g1 = g;
            if side == 1 {
                g0 *= 0.5;
            }
            side = 1;
        } else {
            t0 = theta;
            g0 = g;
            if side == -1 {
                g1 *= 0.5;
            }
            side = -1;
        }
    }
    Ok(best.expect("at least one iteration"))
}

/// `Ψ(F) − Ψ(F̃)` where `F̃` is the pairwise-minimal resampling of `F`.
pub fn psi_gap(f: &Morph<ClosedCurve>) -> Result<f64> {
    Ok(psi_total(f)? - psi_total(&pairwise_minimalize_curve(f)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::psi_total;
    use crate::maps::CurveMap;
    use crate::morphing::{is_pairwise_minimal, make_linear_morph};
    use std::f64::consts::TAU;

    fn radial(k: usize) -> (ClosedCurve, ClosedCurve, Morph<ClosedCurve>) {
        let m = ClosedCurve::regular_polygon_with_length(256, TAU).unwrap();
        let n = m.map_vertices(|v| v * 2.0).unwrap();
        let f =
            make_linear_morph(&CurveMap::linear(m.clone(), n.clone(), 0.0, 1).unwrap(), k).unwrap();
        (m, n, f)
    }

    #[test]
    fn radial_optimal_value() {
        let (m, n, f) = radial(32);
        let g = optimal_morph_curve(&m, &n, &f).unwrap();
        assert!(is_pairwise_minimal(&g, 1e-6).verdict);
        let (a, b) = (m.length(), n.length());
        let want = 4.0 * (b.sqrt() - a.sqrt()).powi(2);
        let got = psi_total(&g).unwrap();
        assert!((got - want).abs() < 1e-3 * want, "{got} vs {want}");
        // The linear radial morph is pairwise minimal but not optimal.
        assert!(psi_total(&f).unwrap() > got);
    }

    #[test]
    fn static_base_stays_static() {
        let m = ClosedCurve::regular_polygon(32, 1.0).unwrap();
        let g = optimal_morph_curve(&m, &m, &Morph::stationary(m.clone(), 4)).unwrap();
        assert_eq!(psi_total(&g).unwrap(), 0.0);
    }

    #[test]
    fn oscillating_volume_rejected() {
        let m = ClosedCurve::regular_polygon(32, 1.0).unwrap();
        let frames = [1.0, 1.5, 1.2, 2.0]
            .iter()
            .map(|s| m.map_vertices(|v| v * *s).unwrap())
            .collect();
        let f = Morph::new(frames).unwrap();
        let n = f.target().clone();
        assert!(matches!(
            optimal_morph_curve(&m, &n, &f),
            Err(Error::NonMonotoneVolume(_))
        ));
    }

    #[test]
    fn gap_zero_on_minimal_input() {
        let (_, _, f) = radial(8);
        assert!(psi_gap(&f).unwrap().abs() < 1e-9);
    }
}
