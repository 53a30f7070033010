use super::{phi2_curve, EnergyReport};
use crate::error::{Error, Result};
use crate::geom::ClosedCurve;
use crate::maps::{compose_curve_maps, time_one_map, CurveMap, TimeVectorField};

/// Flow distortion energy `‖v‖²_H + strain + bending` for `(M, g1) → (M, g2)`.
///
/// `g1` and `g2` are two embeddings of the same knot set; knot `i` of `g1`
/// corresponds to knot `i` of `g2`. The flow's time-one map `φ` is composed
/// with that correspondence, and the strain and bending terms are evaluated on
/// the composite. The H-norm uses one spatial derivative with unit weights.
///
/// Densities in the report are per-segment strain plus bending; the H-norm is
/// under `metadata["h_norm"]` and included in `value`.
pub fn energy_e_curve(
    v: &TimeVectorField,
    g1: &ClosedCurve,
    g2: &ClosedCurve,
    dt: f64,
) -> Result<EnergyReport> {
    if v.curve() != g1 {
        return Err(Error::DomainMismatch(
            "vector field is not sampled on g1".into(),
        ));
    }
    if g1.len() != g2.len() {
        return Err(Error::DomainMismatch(format!(
            "g1 has {} knots, g2 has {}",
            g1.len(),
            g2.len()
        )));
    }
    let flow = time_one_map(v, dt)?;
    let phi = flow.map;
    let correspondence = CurveMap::new(g1.clone(), g2.clone(), g2.arc_table().to_vec(), 1)?;
    let h = compose_curve_maps(&correspondence, &phi)?;

    let strain = phi2_curve(&h);
    let bending = bending_densities(&h);
    let h_norm = v.h_norm_squared();

    let densities: Vec<f64> = strain
        .densities
        .iter()
        .zip(&bending)
        .map(|(a, b)| a + b)
        .collect();
    let weights = g1.segment_lengths();
    let strain_total = strain.value;
    let bending_total = super::weighted_sum(&bending, &weights);
    let mut report = EnergyReport::from_densities(densities, weights)
        .with_meta("h_norm", h_norm)
        .with_meta("strain", strain_total)
        .with_meta("bending", bending_total)
        .with_meta("reprojected", if flow.reprojected { 1.0 } else { 0.0 });
    report.value = h_norm + strain_total + bending_total;
    Ok(report)
}

/// `(κ₂(h) · u'² − κ₁)²` per segment: pulled-back second fundamental form minus the source one.
pub(crate) fn bending_densities(h: &CurveMap) -> Vec<f64> {
    let k1 = h.source().curvature();
    let k2 = h.target().curvature();
    let n = h.source().len();
    let lift = h.lift();
    h.slopes()
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let source = 0.5 * (k1.kappa[i] + k1.kappa[(i + 1) % n]);
            let image = k2.at_arc(h.target(), 0.5 * (lift[i] + lift[i + 1]));
            let d = image * s * s - source;
            d * d
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::DEFAULT_DT;
    use approx::assert_relative_eq;
    use nalgebra::{Rotation2, Vector2};

    fn blob(n: usize) -> ClosedCurve {
        ClosedCurve::new(
            (0..n)
                .map(|i| {
                    let a = std::f64::consts::TAU * i as f64 / n as f64;
                    let r = 1.0 + 0.25 * (2.0 * a).cos();
                    Vector2::new(r * a.cos(), r * a.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_field_same_geometry() {
        let g = blob(64);
        let v = TimeVectorField::zero(g.clone(), 3);
        let e = energy_e_curve(&v, &g, &g, DEFAULT_DT).unwrap();
        assert!(e.value < 1e-24, "{}", e.value);
    }

    #[test]
    fn zero_field_matches_correspondence_energy() {
        let g1 = blob(64);
        let g2 = g1.rotate_start(5);
        let v = TimeVectorField::zero(g1.clone(), 3);
        let e = energy_e_curve(&v, &g1, &g2, DEFAULT_DT).unwrap();
        let corr = CurveMap::new(g1.clone(), g2.clone(), g2.arc_table().to_vec(), 1).unwrap();
        let strain = phi2_curve(&corr).value;
        let bending = super::super::weighted_sum(&bending_densities(&corr), &g1.segment_lengths());
        assert_relative_eq!(e.metadata["strain"], strain, max_relative = 1e-12);
        assert_relative_eq!(e.metadata["bending"], bending, max_relative = 1e-12);
        assert!(strain > 0.0 && bending > 0.0);
        assert_eq!(e.metadata["h_norm"], 0.0);
    }

    #[test]
    fn rigid_rotation_of_geometry_is_free() {
        let g1 = blob(64);
        let rot = Rotation2::new(0.7);
        let g2 = g1.map_vertices(|p| rot * p).unwrap();
        let v = TimeVectorField::zero(g1.clone(), 2);
        let e = energy_e_curve(&v, &g1, &g2, DEFAULT_DT).unwrap();
        assert!(e.value < 1e-20, "{}", e.value);
    }

    #[test]
    fn knot_aligned_rotation_flow() {
        let g = ClosedCurve::regular_polygon(64, 1.0).unwrap();
        let c = 3.0 * g.segment_length(0);
        let v = TimeVectorField::from_fn(g.clone(), 5, |_, _| c);
        let e = energy_e_curve(&v, &g, &g, DEFAULT_DT).unwrap();
        assert_relative_eq!(
            e.metadata["h_norm"],
            c * c * g.length(),
            max_relative = 1e-12
        );
        assert!(e.metadata["strain"] < 1e-18);
        assert!(e.metadata["bending"] < 1e-18);
    }

    #[test]
    fn knot_count_mismatch() {
        let v = TimeVectorField::zero(blob(32), 2);
        assert!(matches!(
            energy_e_curve(&v, &blob(32), &blob(33), DEFAULT_DT),
            Err(Error::DomainMismatch(_))
        ));
    }
}
