use super::{MinimizationTrace, OptimizerConfig, ARMIJO};
use crate::error::{Error, Result};
use crate::functionals::{xi, VolumeSchedule};

/// Damped Newton on the interior samples of Ξ with both endpoints pinned.
///
/// Starts from the linear path `(1 − t) a + t b` and uses the exact tridiagonal
/// Hessian of the discrete functional. It never uses the closed-form minimizer,
/// so it serves as an independent check of [`optimal_schedule`](super::optimal_schedule).
pub fn minimize_xi_numeric(
    a: f64,
    b: f64,
    n: usize,
    cfg: &OptimizerConfig,
) -> Result<MinimizationTrace<VolumeSchedule>> {
    cfg.validate()?;
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "end volumes must be positive, got {a} and {b}"
        )));
    }
    if n < 8 {
        return Err(Error::InvalidParameter(format!(
            "need at least 8 samples, got {n}"
        )));
    }
    let mut phi = VolumeSchedule::from_fn(n, |t| a + t * (b - a))?;
    let mut energy = xi(&phi);
    let (mut grad, mut diag, mut off) = derivatives(phi.samples());
    let mut energies = vec![energy];
    let mut grad_norms = vec![rms(&grad)];
    let mut converged = grad_norms[0] <= cfg.grad_tol;
    let mut iter = 0;
    while !converged && iter < cfg.max_iters {
        iter += 1;
        let dir = solve_tridiagonal(&diag, &off, &grad)?;
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut s = phi.samples().to_vec();
            for (x, d) in s[1..n - 1].iter_mut().zip(&dir) {
                *x -= alpha * d;
            }
            if let Ok(trial) = VolumeSchedule::new(s) {
                let e = xi(&trial);
                if e <= energy - ARMIJO * alpha * slope && e <= energy {
                    accepted = Some((trial, e));
                    break;
                }
            }
            alpha *= cfg.backtrack;
        }
        let Some((trial, e)) = accepted else { break };
        phi = trial;
        energy = e;
        (grad, diag, off) = derivatives(phi.samples());
        let gn = rms(&grad);
        energies.push(energy);
        grad_norms.push(gn);
        converged = gn <= cfg.grad_tol;
    }
    Ok(MinimizationTrace {
        energies,
        grad_norms,
        final_state: phi,
        converged,
    })
}

fn rms(g: &[f64]) -> f64 {
    (g.iter().map(|x| x * x).sum::<f64>() / g.len() as f64).sqrt()
}

/// Gradient and Hessian (diagonal, off-diagonal) of Ξ in the interior samples.
///
/// Each cell contributes `T(x, y) = (y − x)² / (Δt ((√x + √y) / 2)²)`, which equals
/// `4 (√y − √x)² / Δt`; its derivatives are taken in that form.
fn derivatives(s: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = s.len();
    let dt = 1.0 / (n - 1) as f64;
    let m = n - 2;
    let mut g = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut o = vec![0.0; m.saturating_sub(1)];
    for c in 0..n - 1 {
        let (p, q) = (s[c].sqrt(), s[c + 1].sqrt());
        let gx = -4.0 * (q - p) / (dt * p);
        let gy = 4.0 * (q - p) / (dt * q);
        let hxx = 2.0 * q / (dt * p * p * p);
        let hyy = 2.0 * p / (dt * q * q * q);
        let hxy = -2.0 / (dt * p * q);
        // Interior index of sample j is j - 1.
        if c >= 1 {
            g[c - 1] += gx;
            d[c - 1] += hxx;
        }
        if c < n - 2 {
            g[c] += gy;
            d[c] += hyy;
        }
        if c >= 1 && c < n - 2 {
            o[c - 1] += hxy;
        }
    }
    (g, d, o)
}

/// Symmetric tridiagonal solve (Thomas algorithm).
fn solve_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut x = vec![0.0; m];
    let mut prev_c = 0.0;
    let mut prev_x = 0.0;
    for i in 0..m {
        let sub = if i > 0 { off[i - 1] } else { 0.0 };
        let denom = diag[i] - sub * prev_c;
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::InvalidSchedule("singular Newton system".into()));
        }
        c[i] = if i + 1 < m { off[i] / denom } else { 0.0 };
        x[i] = (rhs[i] - sub * prev_x) / denom;
        prev_c = c[i];
        prev_x = x[i];
    }
    for i in (0..m.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn equal_ends_stay_constant() {
        let t = minimize_xi_numeric(2.5, 2.5, 16, &OptimizerConfig::default()).unwrap();
        assert!(t.converged);
        assert!(t.final_state.samples().iter().all(|&v| v == 2.5));
        assert_eq!(t.final_energy(), 0.0);
    }

    #[test]
    fn one_to_four() {
        let t = minimize_xi_numeric(1.0, 4.0, 101, &OptimizerConfig::default()).unwrap();
        assert!(t.converged);
        assert!((t.final_energy() - 4.0).abs() < 1e-4 * 4.0);
        for (v, s) in t.final_state.samples().iter().zip(t.final_state.times()) {
            let want = (1.0 + s) * (1.0 + s);
            assert!((v - want).abs() < 1e-3 * want);
        }
        for w in t.energies.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn circle_lengths() {
        let (a, b) = (2.0 * PI, 4.0 * PI);
        let t = minimize_xi_numeric(a, b, 200, &OptimizerConfig::default()).unwrap();
        let want = 4.0 * (b.sqrt() - a.sqrt()).powi(2);
        assert!((t.final_energy() - want).abs() < 1e-4 * want);
    }

    #[test]
    fn too_coarse_rejected() {
        assert!(minimize_xi_numeric(1.0, 2.0, 7, &OptimizerConfig::default()).is_err());
    }

    #[test]
    fn thomas_matches_dense() {
        let d = [4.0, 5.0, 6.0];
        let o = [1.0, 2.0];
        let x = solve_tridiagonal(&d, &o, &[1.0, 2.0, 3.0]).unwrap();
        let r = [
            4.0 * x[0] + x[1],
            x[0] + 5.0 * x[1] + 2.0 * x[2],
            2.0 * x[1] + 6.0 * x[2],
        ];
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
