use nalgebra::Vector2;

use crate::error::{Error, Result};

/// Relative tolerance for degeneracy tests, scaled by the shape diameter.
pub const EPS_GEOM: f64 = 1e-12;

/// Traversal direction of a closed curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::CounterClockwise => 1.0,
            Orientation::Clockwise => -1.0,
        }
    }
}

/// Closed planar polygon with its cumulative arc-length table.
///
/// `arc_table[i]` is the arc length from vertex 0 to vertex `i`; the table has
/// one more entry than there are vertices and ends at the total length.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedCurve {
    vertices: Vec<Vector2<f64>>,
    arc_table: Vec<f64>,
    orientation: Orientation,
    diameter: f64,
}

impl ClosedCurve {
    pub fn new(vertices: Vec<Vector2<f64>>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidGeometry(format!(
                "closed curve needs at least 3 vertices, got {n}"
            )));
        }
        if vertices
            .iter()
            .any(|v| !v.x.is_finite() || !v.y.is_finite())
        {
            return Err(Error::InvalidGeometry(
                "non-finite vertex coordinate".into(),
            ));
        }
        let diameter = bbox_diagonal(&vertices);
        if diameter <= 0.0 {
            return Err(Error::InvalidGeometry("all vertices coincide".into()));
        }
        let min_seg = EPS_GEOM * diameter;
        let mut arc_table = Vec::with_capacity(n + 1);
        arc_table.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            let len = (vertices[(i + 1) % n] - vertices[i]).norm();
            if len <= min_seg {
                return Err(Error::InvalidGeometry(format!(
                    "degenerate segment {i} (length {len:e})"
                )));
            }
            acc += len;
            arc_table.push(acc);
        }
        let area = signed_area(&vertices);
        if area.abs() <= EPS_GEOM * diameter * diameter {
            return Err(Error::InvalidGeometry(format!(
                "curve encloses no signed area ({area:e})"
            )));
        }
        let orientation = if area > 0.0 {
            Orientation::CounterClockwise
        } else {
            Orientation::Clockwise
        };
        Ok(Self {
            vertices,
            arc_table,
            orientation,
            diameter,
        })
    }

    /// Regular `n`-gon with the given circumradius, counterclockwise, vertex 0 on the +x axis.
    pub fn regular_polygon(n: usize, radius: f64) -> Result<Self> {
        let verts = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / n as f64;
                Vector2::new(radius * a.cos(), radius * a.sin())
            })
            .collect();
        Self::new(verts)
    }

    /// Regular `n`-gon whose perimeter equals `length`.
    pub fn regular_polygon_with_length(n: usize, length: f64) -> Result<Self> {
        let side = length / n as f64;
        let radius = side / (2.0 * (std::f64::consts::PI / n as f64).sin());
        Self::regular_polygon(n, radius)
    }

    pub fn vertices(&self) -> &[Vector2<f64>] {
        &self.vertices
    }

    pub fn arc_table(&self) -> &[f64] {
        &self.arc_table
    }

    /// Number of vertices (equal to the number of segments).
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.arc_table[self.vertices.len()]
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// Bounding-box diagonal; the scale used by all degeneracy tests.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn signed_area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn segment_length(&self, i: usize) -> f64 {
        self.arc_table[i + 1] - self.arc_table[i]
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.arc_table.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Segment index and local fraction of arc position `s`, taken modulo the length.
    pub fn locate_arc(&self, s: f64) -> (usize, f64) {
        let len = self.length();
        let mut s = s.rem_euclid(len);
        if s >= len {
            s = 0.0;
        }
        let n = self.len();
        // last table entry <= s
        let i = match self.arc_table[..n].partition_point(|&a| a <= s) {
            0 => 0,
            k => k - 1,
        };
        let frac = (s - self.arc_table[i]) / self.segment_length(i);
        (i, frac.clamp(0.0, 1.0))
    }

    /// Point at arc position `s` (wrapped onto the curve).
    pub fn point_at_arc(&self, s: f64) -> Vector2<f64> {
        let (i, f) = self.locate_arc(s);
        let a = self.vertices[i];
        let b = self.vertices[(i + 1) % self.len()];
        a + (b - a) * f
    }

    /// Signed discrete curvature per vertex: turning angle over the dual edge length.
    pub fn curvature(&self) -> CurvatureField {
        let n = self.len();
        let kappa = (0..n)
            .map(|i| {
                let prev = self.vertices[(i + n - 1) % n];
                let cur = self.vertices[i];
                let next = self.vertices[(i + 1) % n];
                let e0 = cur - prev;
                let e1 = next - cur;
                let turn = (e0.x * e1.y - e0.y * e1.x).atan2(e0.dot(&e1));
                let dual = 0.5 * (self.segment_length((i + n - 1) % n) + self.segment_length(i));
                turn / dual
            })
            .collect();
        CurvatureField { kappa }
    }

    /// New curve with every vertex transformed by `f`.
    pub fn map_vertices(&self, f: impl Fn(Vector2<f64>) -> Vector2<f64>) -> Result<Self> {
        Self::new(self.vertices.iter().map(|&v| f(v)).collect())
    }

    /// Same vertex cycle traversed in the opposite direction, keeping vertex 0 first.
    pub fn reversed(&self) -> Self {
        let n = self.len();
        let verts = (0..n).map(|i| self.vertices[(n - i) % n]).collect();
        Self::new(verts).expect("reversal preserves validity")
    }

    /// Same polygon with vertex `k` relabelled as vertex 0.
    pub fn rotate_start(&self, k: usize) -> Self {
        let n = self.len();
        let verts = (0..n).map(|i| self.vertices[(i + k) % n]).collect();
        Self::new(verts).expect("relabelling preserves validity")
    }
}

/// Per-vertex signed curvature of a closed curve.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    pub kappa: Vec<f64>,
}

impl CurvatureField {
    /// Piecewise-linear interpolation of the vertex values at arc position `s` of `curve`.
    pub fn at_arc(&self, curve: &ClosedCurve, s: f64) -> f64 {
        let (i, f) = curve.locate_arc(s);
        let n = self.kappa.len();
        (1.0 - f) * self.kappa[i] + f * self.kappa[(i + 1) % n]
    }
}

pub(crate) fn signed_area(v: &[Vector2<f64>]) -> f64 {
    let n = v.len();
    0.5 * (0..n)
        .map(|i| {
            let a = v[i];
            let b = v[(i + 1) % n];
            a.x * b.y - a.y * b.x
        })
        .sum::<f64>()
}

fn bbox_diagonal(v: &[Vector2<f64>]) -> f64 {
    let mut lo = v[0];
    let mut hi = v[0];
    for p in v {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_square() -> ClosedCurve {
        ClosedCurve::new(vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn square_perimeter() {
        let c = unit_square();
        assert_eq!(c.length(), 4.0);
        assert_eq!(c.segment_lengths(), vec![1.0; 4]);
        assert_eq!(c.orientation(), Orientation::CounterClockwise);
    }

    #[test]
    fn regular_polygon_perimeter() {
        let n = 2048;
        let c = ClosedCurve::regular_polygon(n, 1.0).unwrap();
        let exact = 2.0 * n as f64 * (PI / n as f64).sin();
        assert_relative_eq!(c.length(), exact, max_relative = 1e-13);
        assert!((c.length() - 6.283183).abs() < 1e-6);
    }

    #[test]
    fn coincident_vertices_rejected() {
        let err = ClosedCurve::new(vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::InvalidGeometry(_)));
    }

    #[test]
    fn too_few_vertices() {
        let err = ClosedCurve::new(vec![Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0)]);
        assert!(err.is_err());
    }

    #[test]
    fn circle_curvature() {
        let c = ClosedCurve::regular_polygon(1024, 2.0).unwrap();
        for k in c.curvature().kappa {
            assert!((k - 0.5).abs() < 1e-4, "{k}");
        }
    }

    #[test]
    fn clockwise_curvature_negative() {
        let c = ClosedCurve::regular_polygon(64, 1.0).unwrap().reversed();
        assert_eq!(c.orientation(), Orientation::Clockwise);
        assert!(c.curvature().kappa.iter().all(|&k| k < 0.0));
    }

    #[test]
    fn square_curvature_at_corners() {
        // subdivided square: corner vertices turn by pi/2, edge midpoints do not turn
        let c = ClosedCurve::new(vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(0.5, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 0.5),
            Vector2::new(1.0, 1.0),
            Vector2::new(0.5, 1.0),
            Vector2::new(0.0, 1.0),
            Vector2::new(0.0, 0.5),
        ])
        .unwrap();
        let k = c.curvature().kappa;
        for (i, &ki) in k.iter().enumerate() {
            if i % 2 == 0 {
                assert_relative_eq!(ki, PI / 2.0 / 0.5, max_relative = 1e-14);
            } else {
                assert_eq!(ki, 0.0);
            }
        }
    }

    #[test]
    fn point_at_arc_wraps() {
        let c = unit_square();
        assert_relative_eq!(c.point_at_arc(1.5), Vector2::new(1.0, 0.5));
        assert_relative_eq!(c.point_at_arc(5.5), Vector2::new(1.0, 0.5));
        assert_relative_eq!(c.point_at_arc(-0.5), Vector2::new(0.0, 0.5));
        assert_relative_eq!(c.point_at_arc(4.0), Vector2::new(0.0, 0.0));
    }

    #[test]
    fn perimeter_refinement_is_second_order() {
        let errs: Vec<f64> = [64, 128, 256]
            .iter()
            .map(|&n| (ClosedCurve::regular_polygon(n, 1.0).unwrap().length() - 2.0 * PI).abs())
            .collect();
        assert!(errs[0] / errs[1] >= 3.5);
        assert!(errs[1] / errs[2] >= 3.5);
    }
}
