use super::EnergyReport;
use crate::error::{Error, Result};
use crate::maps::{pullback_metric_mesh, CurveMap, MeshMap};

/// `Φ₂(h) = ∫ (u'² − 1)² dt` over the source arc length.
///
/// Defined for folded lifts too: the pullback metric only needs `u'`.
pub fn phi2_curve(h: &CurveMap) -> EnergyReport {
    let densities = h
        .slopes()
        .into_iter()
        .map(|s| {
            let e = s * s - 1.0;
            e * e
        })
        .collect();
    EnergyReport::from_densities(densities, h.source().segment_lengths())
        .with_meta("source_length", h.source().length())
        .with_meta("target_length", h.target().length())
}

/// `Φ₂(h) = Σ trace(S²) · area` with `S = AᵀA − I` in each source triangle frame.
pub fn phi2_mesh(h: &MeshMap) -> Result<EnergyReport> {
    let densities = pullback_metric_mesh(h)?
        .into_iter()
        .map(|g| {
            let (a, b, c) = (g[(0, 0)] - 1.0, g[(0, 1)], g[(1, 1)] - 1.0);
            a * a + 2.0 * b * b + c * c
        })
        .collect();
    Ok(
        EnergyReport::from_densities(densities, h.source().triangle_areas())
            .with_meta("source_area", h.source().area())
            .with_meta("target_area", h.target().area()),
    )
}

fn check_field(h: &CurveMap, y: &[f64]) -> Result<()> {
    if y.len() != h.source().len() {
        return Err(Error::DomainMismatch(format!(
            "variation field has {} values, curve has {} knots",
            y.len(),
            h.source().len()
        )));
    }
    Ok(())
}

/// Lift velocity `u'(t_i) Y_i` of the variation `h ∘ φ_ε^Y` at each knot.
///
/// `u'` at a knot is the centred slope across the two adjacent segments.
pub fn pushforward(h: &CurveMap, y: &[f64]) -> Result<Vec<f64>> {
    check_field(h, y)?;
    let n = h.source().len();
    let lens = h.source().segment_lengths();
    let incs: Vec<f64> = h.increments().collect();
    Ok((0..n)
        .map(|i| {
            let p = (i + n - 1) % n;
            (incs[p] + incs[i]) / (lens[p] + lens[i]) * y[i]
        })
        .collect())
}

/// First-order realisation of `h ∘ φ_ε^Y`: every lift sample moves by `ε u' Y`.
pub fn vary_curve_map(h: &CurveMap, y: &[f64], eps: f64) -> Result<CurveMap> {
    let w = pushforward(h, y)?;
    let n = w.len();
    let mut lift: Vec<f64> = h.lift()[..n]
        .iter()
        .zip(&w)
        .map(|(u, d)| u + eps * d)
        .collect();
    lift.push(lift[0] + f64::from(h.orientation()) * h.target().length());
    CurveMap::new_folded(
        h.source().clone(),
        h.target().clone(),
        lift,
        h.orientation(),
    )
}

/// Directional derivative `d/dε Φ₂(h ∘ φ_ε^Y)` at `ε = 0`.
///
/// Per segment, `d/dε (J² − 1)² l = 4 (J² − 1) J (w_{k+1} − w_k)` with `w` the pushforward.
pub fn phi2_first_variation_curve(h: &CurveMap, y: &[f64]) -> Result<f64> {
    let w = pushforward(h, y)?;
    let n = w.len();
    let slopes = h.slopes();
    let mut acc = 0.0;
    for (k, &j) in slopes.iter().enumerate() {
        acc += 4.0 * (j * j - 1.0) * j * (w[(k + 1) % n] - w[k]);
    }
    Ok(acc)
}

/// Second derivative of `ε ↦ Φ₂(h ∘ φ_ε^Y)` at 0: five-point stencil at `ε = 1e-3`,
/// Richardson-extrapolated against `ε / 2`.
pub fn phi2_second_variation_curve(h: &CurveMap, y: &[f64]) -> Result<f64> {
    check_field(h, y)?;
    let energy = |eps: f64| -> Result<f64> { Ok(phi2_curve(&vary_curve_map(h, y, eps)?).value) };
    let f0 = energy(0.0)?;
    let stencil = |e: f64| -> Result<f64> {
        let near = (energy(e)? - f0) + (energy(-e)? - f0);
        let far = (energy(2.0 * e)? - f0) + (energy(-2.0 * e)? - f0);
        Ok((16.0 * near - far) / (12.0 * e * e))
    };
    let eps = 1e-3;
    let coarse = stencil(eps)?;
    let fine = stencil(0.5 * eps)?;
    Ok((16.0 * fine - coarse) / 15.0)
}

/// Discrete Euler–Lagrange residual `d/dt B + (u''/u') B` with `B = u'² − 1`, per knot.
///
/// `dB/dt` differences the two adjacent segment strains; `u'` and `u''` are the
/// centred knot slope and second difference.
pub fn el_residual_curve(h: &CurveMap) -> Result<Vec<f64>> {
    let n = h.source().len();
    if n < 4 {
        return Err(Error::InsufficientResolution(format!(
            "Euler–Lagrange residual needs at least 4 knots, got {n}"
        )));
    }
    let lens = h.source().segment_lengths();
    let slopes = h.slopes();
    (0..n)
        .map(|i| {
            let p = (i + n - 1) % n;
            let dual = 0.5 * (lens[p] + lens[i]);
            let d1 = (slopes[p] * lens[p] + slopes[i] * lens[i]) / (2.0 * dual);
            if d1 == 0.0 {
                return Err(Error::InvalidMap(format!("lift is stationary at knot {i}")));
            }
            let d2 = (slopes[i] - slopes[p]) / dual;
            let b_prev = slopes[p] * slopes[p] - 1.0;
            let b_next = slopes[i] * slopes[i] - 1.0;
            let db = (b_next - b_prev) / dual;
            Ok(db + d2 / d1 * (d1 * d1 - 1.0))
        })
        .collect()
}
