use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::geom::ClosedCurve;

/// Relative floor on lift increments; monotone maps need `|Δu| > EPS_MONO · L_N`.
pub const EPS_MONO: f64 = 1e-9;

/// Circle map `M → N` stored as a lift sampled at the source arc-length knots.
///
/// `lift[i]` is the target arc position of source vertex `i`; the table has
/// `n + 1` entries and `lift[n] = lift[0] ± L_N`, the sign being the
/// orientation. A *monotone* map is a diffeomorphism. Lifts that fold (change
/// direction) are admitted by [`CurveMap::new_folded`]; they are smooth maps of
/// degree ±1 but not diffeomorphisms, and Jacobian-based quantities reject them.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveMap {
    source: ClosedCurve,
    target: ClosedCurve,
    lift: Vec<f64>,
    orientation: i8,
    monotone: bool,
}

impl CurveMap {
    /// Orientation-preserving (`+1`) or reversing (`-1`) diffeomorphism.
    pub fn new(
        source: ClosedCurve,
        target: ClosedCurve,
        lift: Vec<f64>,
        orientation: i8,
    ) -> Result<Self> {
        let map = Self::new_folded(source, target, lift, orientation)?;
        if !map.monotone {
            let floor = EPS_MONO * map.target.length();
            let (i, d) = map
                .increments()
                .enumerate()
                .find(|&(_, d)| d * map.sign() <= floor)
                .expect("non-monotone lift has an offending increment");
            return Err(Error::InvalidMap(format!(
                "lift increment {i} is {d:e}, not strictly {} beyond {floor:e}",
                if orientation > 0 {
                    "increasing"
                } else {
                    "decreasing"
                }
            )));
        }
        Ok(map)
    }

    /// Degree ±1 lift without the monotonicity requirement.
    pub fn new_folded(
        source: ClosedCurve,
        target: ClosedCurve,
        mut lift: Vec<f64>,
        orientation: i8,
    ) -> Result<Self> {
        if orientation != 1 && orientation != -1 {
            return Err(Error::InvalidMap(format!(
                "orientation must be ±1, got {orientation}"
            )));
        }
        let n = source.len();
        if lift.len() != n + 1 {
            return Err(Error::DomainMismatch(format!(
                "lift has {} samples, source curve needs {}",
                lift.len(),
                n + 1
            )));
        }
        if lift.iter().any(|u| !u.is_finite()) {
            return Err(Error::InvalidMap("non-finite lift sample".into()));
        }
        let ln = target.length();
        let expected = lift[0] + f64::from(orientation) * ln;
        if (lift[n] - expected).abs() > 1e-9 * ln.max(lift[0].abs()) {
            return Err(Error::InvalidMap(format!(
                "lift endpoint {} differs from {} (degree condition)",
                lift[n], expected
            )));
        }
        lift[n] = expected;
        let floor = EPS_MONO * ln;
        let s = f64::from(orientation);
        let monotone = lift.windows(2).all(|w| (w[1] - w[0]) * s > floor);
        Ok(Self {
            source,
            target,
            lift,
            orientation,
            monotone,
        })
    }

    /// Affine lift `u(t) = offset ± (L_N / L_M) t`.
    pub fn linear(
        source: ClosedCurve,
        target: ClosedCurve,
        offset: f64,
        orientation: i8,
    ) -> Result<Self> {
        let slope = f64::from(orientation) * target.length() / source.length();
        let lift = source
            .arc_table()
            .iter()
            .map(|&t| offset + slope * t)
            .collect();
        Self::new(source, target, lift, orientation)
    }

    pub fn identity(curve: ClosedCurve) -> Self {
        let lift = curve.arc_table().to_vec();
        Self::new(curve.clone(), curve, lift, 1).expect("identity is a valid map")
    }

    pub fn source(&self) -> &ClosedCurve {
        &self.source
    }

    pub fn target(&self) -> &ClosedCurve {
        &self.target
    }

    pub fn lift(&self) -> &[f64] {
        &self.lift
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    fn sign(&self) -> f64 {
        f64::from(self.orientation)
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.lift.windows(2).map(|w| w[1] - w[0])
    }

    /// Per-segment lift slope `u'`.
    pub fn slopes(&self) -> Vec<f64> {
        self.increments()
            .enumerate()
            .map(|(i, d)| d / self.source.segment_length(i))
            .collect()
    }

    /// Extended lift `U: R → R` with `U(t + L_M) = U(t) ± L_N`, piecewise linear between knots.
    pub fn eval_lift(&self, t: f64) -> f64 {
        let lm = self.source.length();
        let k = (t / lm).floor();
        let r = t - k * lm;
        let (i, f) = self.source.locate_arc(r);
        let u = self.lift[i] + f * (self.lift[i + 1] - self.lift[i]);
        u + k * self.sign() * self.target.length()
    }

    /// Inverse of the extended lift. Only defined for monotone maps.
    pub fn eval_inverse_lift(&self, s: f64) -> f64 {
        debug_assert!(self.monotone);
        let lm = self.source.length();
        let ln = self.target.length();
        let n = self.source.len();
        let u0 = self.lift[0];
        let arc = self.source.arc_table();
        // U(t + k L_M) = U(t) + k σ L_N, so shift s into the range of the base period
        let (k, r) = if self.orientation > 0 {
            let k = ((s - u0) / ln).floor();
            (k, s - k * ln)
        } else {
            let k = ((u0 - s) / ln).floor();
            (k, s + k * ln)
        };
        let i = if self.orientation > 0 {
            self.lift[..n]
                .partition_point(|&u| u <= r)
                .saturating_sub(1)
        } else {
            self.lift[..n]
                .partition_point(|&u| u >= r)
                .saturating_sub(1)
        };
        let f = ((r - self.lift[i]) / (self.lift[i + 1] - self.lift[i])).clamp(0.0, 1.0);
        arc[i] + f * (arc[i + 1] - arc[i]) + k * lm
    }

    /// Image of source arc position `t` on the target curve.
    pub fn apply(&self, t: f64) -> Vector2<f64> {
        self.target.point_at_arc(self.eval_lift(t))
    }

    /// Images of the source vertices.
    pub fn image_vertices(&self) -> Vec<Vector2<f64>> {
        let n = self.source.len();
        self.lift[..n]
            .iter()
            .map(|&u| self.target.point_at_arc(u))
            .collect()
    }
}

/// Per-segment signed Jacobian `Δu / Δt`.
pub fn jacobian_curve(h: &CurveMap) -> Result<Vec<f64>> {
    if !h.is_monotone() {
        return Err(Error::InvalidMap("Jacobian needs a monotone lift".into()));
    }
    Ok(h.slopes())
}

/// `a ∘ b` for `b: M → P` and `a: P → N`.
pub fn compose_curve_maps(a: &CurveMap, b: &CurveMap) -> Result<CurveMap> {
    if b.target() != a.source() {
        return Err(Error::DomainMismatch(
            "target of the inner map differs from the source of the outer map".into(),
        ));
    }
    let lift = b.lift().iter().map(|&u| a.eval_lift(u)).collect();
    let orientation = a.orientation() * b.orientation();
    if a.is_monotone() && b.is_monotone() {
        CurveMap::new(b.source().clone(), a.target().clone(), lift, orientation)
    } else {
        CurveMap::new_folded(b.source().clone(), a.target().clone(), lift, orientation)
    }
}

/// Inverse diffeomorphism, resampled at the target arc-length knots.
pub fn invert_curve_map(h: &CurveMap) -> Result<CurveMap> {
    if !h.is_monotone() {
        return Err(Error::InvalidMap(
            "only monotone maps are invertible".into(),
        ));
    }
    let lift = h
        .target()
        .arc_table()
        .iter()
        .map(|&s| h.eval_inverse_lift(s))
        .collect();
    CurveMap::new(
        h.target().clone(),
        h.source().clone(),
        lift,
        h.orientation(),
    )
}
