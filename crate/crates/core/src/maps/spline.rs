//! Periodic cubic spline on a closed, non-uniform knot sequence.

/// C² periodic interpolant through `(knot_i, y_i)` with period `knots[n]`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct PeriodicSpline {
    y: Vec<f64>,
    m: Vec<f64>,
}

impl PeriodicSpline {
    /// `h[i]` is the spacing from knot `i` to knot `i + 1` (cyclically).
    pub(crate) fn new(y: &[f64], h: &[f64]) -> Self {
        let n = y.len();
        debug_assert_eq!(h.len(), n);
        let rhs: Vec<f64> = (0..n)
            .map(|i| {
                let p = (i + n - 1) % n;
                let q = (i + 1) % n;
                6.0 * ((y[q] - y[i]) / h[i] - (y[i] - y[p]) / h[p])
            })
            .collect();
        let sub: Vec<f64> = (0..n).map(|i| h[(i + n - 1) % n]).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * (h[(i + n - 1) % n] + h[i])).collect();
        let sup: Vec<f64> = h.to_vec();
        let m = solve_cyclic(&sub, &diag, &sup, &rhs);
        Self { y: y.to_vec(), m }
    }

    /// Value in segment `i` at local offset `x ∈ [0, h]`.
    pub(crate) fn eval(&self, i: usize, x: f64, h: f64) -> f64 {
        let n = self.y.len();
        let j = (i + 1) % n;
        let w = h - x;
        (self.m[i] * w * w * w + self.m[j] * x * x * x) / (6.0 * h)
            + (self.y[i] / h - self.m[i] * h / 6.0) * w
            + (self.y[j] / h - self.m[j] * h / 6.0) * x
    }
}

/// Cyclic tridiagonal solve (Sherman–Morrison on top of the Thomas algorithm).
///
/// Row `i` reads `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`, indices mod n.
fn solve_cyclic(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    if n == 1 {
        return vec![rhs[0] / (diag[0] + sub[0] + sup[0])];
    }
    if n == 2 {
        let (a, b) = (diag[0], sup[0] + sub[0]);
        let (c, d) = (sup[1] + sub[1], diag[1]);
        let det = a * d - b * c;
        return vec![
            (rhs[0] * d - b * rhs[1]) / det,
            (a * rhs[1] - c * rhs[0]) / det,
        ];
    }
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    let x = thomas(sub, &d, sup, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(sub, &d, sup, &u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}
