use serde::{Deserialize, Serialize};

use super::curve_map::{CurveMap, EPS_MONO};
use super::spline::PeriodicSpline;
use crate::error::{Error, Result};
use crate::geom::ClosedCurve;

/// Default RK4 step for [`evolve`].
pub const DEFAULT_DT: f64 = 1e-3;

/// Time-dependent tangent field on a closed curve, sampled per vertex on a
/// uniform time grid over `[0, 1]`.
///
/// Values are scalar speeds along the curve (arc length per unit time).
/// Between knots each time row is interpolated by a periodic cubic spline;
/// between time samples the rows are blended linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeVectorField {
    curve: ClosedCurve,
    values: Vec<Vec<f64>>,
    rows: Vec<PeriodicSpline>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TimeVectorFieldFile {
    pub grid_t: usize,
    pub values: Vec<Vec<f64>>,
}

impl TimeVectorField {
    pub fn new(curve: ClosedCurve, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "vector field needs at least one time sample".into(),
            ));
        }
        if let Some(row) = values.iter().find(|r| r.len() != curve.len()) {
            return Err(Error::DomainMismatch(format!(
                "vector field row has {} values, curve has {} vertices",
                row.len(),
                curve.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite vector field value".into(),
            ));
        }
        let h = curve.segment_lengths();
        let rows = values.iter().map(|r| PeriodicSpline::new(r, &h)).collect();
        Ok(Self {
            curve,
            values,
            rows,
        })
    }

    pub fn zero(curve: ClosedCurve, grid_t: usize) -> Self {
        let n = curve.len();
        Self::new(curve, vec![vec![0.0; n]; grid_t.max(1)]).unwrap()
    }

    /// Field sampled from `f(arc, t)`.
    pub fn from_fn(curve: ClosedCurve, grid_t: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let grid_t = grid_t.max(1);
        let values = (0..grid_t)
            .map(|j| {
                let t = if grid_t == 1 {
                    0.0
                } else {
                    j as f64 / (grid_t - 1) as f64
                };
                curve.arc_table()[..curve.len()]
                    .iter()
                    .map(|&s| f(s, t))
                    .collect()
            })
            .collect();
        Self::new(curve, values).unwrap()
    }

    pub fn from_file(curve: ClosedCurve, file: TimeVectorFieldFile) -> Result<Self> {
        if file.grid_t != file.values.len() {
            return Err(Error::Parse(format!(
                "grid_t = {} but {} time rows given",
                file.grid_t,
                file.values.len()
            )));
        }
        Self::new(curve, file.values)
    }

    pub fn to_file(&self) -> TimeVectorFieldFile {
        TimeVectorFieldFile {
            grid_t: self.values.len(),
            values: self.values.clone(),
        }
    }

    pub fn curve(&self) -> &ClosedCurve {
        &self.curve
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn grid_t(&self) -> usize {
        self.values.len()
    }

    fn at_time_row(&self, j: usize, q: f64) -> f64 {
        let (i, f) = self.curve.locate_arc(q);
        let h = self.curve.segment_length(i);
        self.rows[j].eval(i, f * h, h)
    }

    /// Speed at arc position `q` and time `t`.
    pub fn at(&self, q: f64, t: f64) -> f64 {
        let nt = self.values.len();
        if nt == 1 {
            return self.at_time_row(0, q);
        }
        let x = t.clamp(0.0, 1.0) * (nt - 1) as f64;
        let j = (x.floor() as usize).min(nt - 2);
        let f = x - j as f64;
        (1.0 - f) * self.at_time_row(j, q) + f * self.at_time_row(j + 1, q)
    }

    /// `∫₀¹ ∫_M (v² + (∂ₛv)²) ds dt`: segment midpoint rule in space, trapezoid in time.
    pub fn h_norm_squared(&self) -> f64 {
        let lens = self.curve.segment_lengths();
        let n = lens.len();
        let per_time: Vec<f64> = self
            .values
            .iter()
            .map(|row| {
                (0..n)
                    .map(|i| {
                        let a = row[i];
                        let b = row[(i + 1) % n];
                        let mid = 0.5 * (a + b);
                        let ds = (b - a) / lens[i];
                        (mid * mid + ds * ds) * lens[i]
                    })
                    .sum::<f64>()
            })
            .collect();
        trapezoid_unit(&per_time)
    }
}

/// Trapezoid rule on a uniform grid over `[0, 1]`; a single sample is treated as constant.
pub(crate) fn trapezoid_unit(f: &[f64]) -> f64 {
    match f.len() {
        0 => 0.0,
        1 => f[0],
        k => {
            let h = 1.0 / (k - 1) as f64;
            let inner: f64 = f[1..k - 1].iter().sum();
            h * (inner + 0.5 * (f[0] + f[k - 1]))
        }
    }
}

/// Evolution operator `η(t; s, p)` of `dq/dt = v(q, t)` by fixed-step RK4.
///
/// Positions are unwrapped arc coordinates; reduce modulo the curve length to
/// locate points. `t < s` integrates backwards.
pub fn evolve(v: &TimeVectorField, s: f64, t: f64, initial: &[f64], dt: f64) -> Result<Vec<f64>> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive, got {dt}"
        )));
    }
    if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!(
            "times must lie in [0, 1], got s = {s}, t = {t}"
        )));
    }
    // steps never straddle a time sample: the field is only piecewise linear in t
    let legs = time_legs(s, t, v.grid_t());
    Ok(initial
        .iter()
        .map(|&p| {
            let mut q = p;
            for &(a, b) in &legs {
                let steps = ((b - a).abs() / dt).ceil() as usize;
                let h = (b - a) / steps as f64;
                for k in 0..steps {
                    let tk = a + k as f64 * h;
                    let k1 = v.at(q, tk);
                    let k2 = v.at(q + 0.5 * h * k1, tk + 0.5 * h);
                    let k3 = v.at(q + 0.5 * h * k2, tk + 0.5 * h);
                    let k4 = v.at(q + h * k3, tk + h);
                    q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
            }
            q
        })
        .collect())
}

/// Splits `[s, t]` (or `[t, s]` traversed backwards) at the interior time samples.
fn time_legs(s: f64, t: f64, grid_t: usize) -> Vec<(f64, f64)> {
    if s == t {
        return Vec::new();
    }
    let mut cuts = vec![s];
    if grid_t > 2 {
        let cells = (grid_t - 1) as f64;
        let (lo, hi) = if s < t { (s, t) } else { (t, s) };
        let mut nodes: Vec<f64> = (1..grid_t - 1)
            .map(|j| j as f64 / cells)
            .filter(|&x| x > lo && x < hi)
            .collect();
        if s > t {
            nodes.reverse();
        }
        cuts.extend(nodes);
    }
    cuts.push(t);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Time-one map of a flow together with whether monotone re-projection was needed.
#[derive(Clone, Debug)]
pub struct TimeOneMap {
    pub map: CurveMap,
    pub reprojected: bool,
}

/// `φ(p) = η(1; 0, p)` evaluated at every knot of the field's curve.
///
/// Increments that fall below the monotonicity floor by less than
/// `fold_tol · L` are lifted back to the floor (and the lift rescaled to the
/// degree condition); anything worse is a fold.
pub fn time_one_map(v: &TimeVectorField, dt: f64) -> Result<TimeOneMap> {
    let curve = v.curve();
    let n = curve.len();
    let len = curve.length();
    let mut lift = evolve(v, 0.0, 1.0, &curve.arc_table()[..n], dt)?;
    lift.push(lift[0] + len);

    let floor = EPS_MONO * len;
    let fold_tol = 1e-6 * len;
    let mut incs: Vec<f64> = lift.windows(2).map(|w| w[1] - w[0]).collect();
    let worst = incs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut reprojected = false;
    if worst <= floor {
        if worst < -fold_tol {
            return Err(Error::FlowFold(format!(
                "flow reverses knot order (increment {worst:e})"
            )));
        }
        reprojected = true;
        for d in &mut incs {
            *d = d.max(2.0 * floor);
        }
        let scale = len / incs.iter().sum::<f64>();
        let mut acc = lift[0];
        for (i, d) in incs.iter().enumerate() {
            acc += d * scale;
            lift[i + 1] = acc;
        }
        lift[n] = lift[0] + len;
    }
    let map = CurveMap::new(curve.clone(), curve.clone(), lift, 1)?;
    Ok(TimeOneMap { map, reprojected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn circle() -> ClosedCurve {
        ClosedCurve::regular_polygon_with_length(128, std::f64::consts::TAU).unwrap()
    }

    #[test]
    fn zero_field_is_stationary() {
        let c = circle();
        let v = TimeVectorField::zero(c.clone(), 5);
        let p = &c.arc_table()[..c.len()];
        assert_eq!(evolve(&v, 0.0, 1.0, p, DEFAULT_DT).unwrap(), p.to_vec());
        let phi = time_one_map(&v, DEFAULT_DT).unwrap();
        assert!(!phi.reprojected);
        assert_eq!(phi.map.lift(), c.arc_table());
    }

    #[test]
    fn constant_field_rotates() {
        let c = circle();
        let v = TimeVectorField::from_fn(c.clone(), 3, |_, _| 0.37);
        let p: Vec<f64> = vec![0.0, 1.0, 5.5];
        let q = evolve(&v, 0.0, 1.0, &p, DEFAULT_DT).unwrap();
        for (a, b) in p.iter().zip(&q) {
            assert!((b - a - 0.37).abs() < 1e-10);
        }
        let phi = time_one_map(&v, DEFAULT_DT).unwrap().map;
        for s in phi.slopes() {
            assert_relative_eq!(s, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn nonpositive_step_rejected() {
        let v = TimeVectorField::zero(circle(), 2);
        assert!(matches!(
            evolve(&v, 0.0, 1.0, &[0.0], 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            evolve(&v, 0.0, 1.0, &[0.0], -1e-3),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn backward_evolution_inverts_forward() {
        let c = circle();
        let v = TimeVectorField::from_fn(c.clone(), 11, |s, t| 0.3 * (s + t).sin());
        let p = vec![0.1, 2.0, 4.0];
        let q = evolve(&v, 0.0, 1.0, &p, DEFAULT_DT).unwrap();
        let back = evolve(&v, 1.0, 0.0, &q, DEFAULT_DT).unwrap();
        for (a, b) in p.iter().zip(&back) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn smooth_field_preserves_degree() {
        let c = circle();
        let v = TimeVectorField::from_fn(c.clone(), 11, |s, t| 0.4 * s.sin() * (1.0 + t));
        let phi = time_one_map(&v, DEFAULT_DT).unwrap().map;
        assert!(phi.slopes().iter().all(|&j| j > 0.0));
        let lift = phi.lift();
        assert_relative_eq!(lift[c.len()] - lift[0], c.length(), max_relative = 1e-14);
    }

    #[test]
    fn h_norm_of_constant_field() {
        let c = circle();
        let v = TimeVectorField::from_fn(c.clone(), 4, |_, _| 0.5);
        assert_relative_eq!(v.h_norm_squared(), 0.25 * c.length(), max_relative = 1e-14);
    }
}
