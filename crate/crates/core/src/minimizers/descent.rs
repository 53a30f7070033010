use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LiftClass, MinimizationTrace, OptimizerConfig, ARMIJO};
use crate::error::{Error, Result};
use crate::geom::ClosedCurve;
use crate::maps::CurveMap;

/// Rounds of clamp-and-rescale allowed when projecting onto monotone lifts.
const PROJECTION_ROUNDS: usize = 50;

/// Halvings before a line search gives up.
const MAX_BACKTRACKS: usize = 80;

/// Orientation-preserving map with increments `l_i · U(0.5, 1.5)` rescaled to `L_N`
/// and a uniformly random base offset.
pub fn random_monotone_map(m: &ClosedCurve, n: &ClosedCurve, seed: u64) -> Result<CurveMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ln = n.length();
    let raw: Vec<f64> = m
        .segment_lengths()
        .iter()
        .map(|l| l * rng.gen_range(0.5..1.5))
        .collect();
    let scale = ln / raw.iter().sum::<f64>();
    let mut lift = Vec::with_capacity(raw.len() + 1);
    let mut u = rng.gen_range(0.0..ln);
    lift.push(u);
    for d in &raw {
        u += d * scale;
        lift.push(u);
    }
    let last = lift.len() - 1;
    lift[last] = lift[0] + ln;
    CurveMap::new(m.clone(), n.clone(), lift, 1)
}

/// Slope-space problem: minimize `Σ f(J_i) l_i` subject to `Σ J_i l_i = L_N`.
struct SlopeProblem<'a> {
    lengths: &'a [f64],
    total: f64,
    class: LiftClass,
    floor: f64,
    density: fn(f64) -> f64,
    /// `density(new) − density(old)`, factored to avoid cancellation.
    density_change: fn(f64, f64) -> f64,
    /// Derivative of `density`; the ω_M-metric gradient per segment.
    slope_grad: fn(f64) -> f64,
}

impl SlopeProblem<'_> {
    fn energy(&self, j: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (x, l) in j.iter().zip(self.lengths) {
            acc += (self.density)(*x) * l;
        }
        acc
    }

    /// Accurate `energy(new) − energy(old)`, resolving changes far below the energy's rounding.
    fn energy_change(&self, old: &[f64], new: &[f64]) -> f64 {
        let mut acc = 0.0;
        for ((a, b), l) in old.iter().zip(new).zip(self.lengths) {
            acc += (self.density_change)(*a, *b) * l;
        }
        acc
    }

    /// Gradient with its length-weighted mean removed (tangent to the constraint),
    /// and the stopping scale `max(1, RMS of the raw gradient)`.
    fn projected_gradient(&self, j: &[f64]) -> (Vec<f64>, f64) {
        let g: Vec<f64> = j.iter().map(|&x| (self.slope_grad)(x)).collect();
        let lm: f64 = self.lengths.iter().sum();
        let mean = g.iter().zip(self.lengths).map(|(g, l)| g * l).sum::<f64>() / lm;
        let scale = self.rms(&g).max(1.0);
        (g.iter().map(|g| g - mean).collect(), scale)
    }

    fn rms(&self, g: &[f64]) -> f64 {
        let lm: f64 = self.lengths.iter().sum();
        (g.iter()
            .zip(self.lengths)
            .map(|(g, l)| g * g * l)
            .sum::<f64>()
            / lm)
            .sqrt()
    }

    /// Keeps iterates admissible. The step direction is already tangent to
    /// `Σ J l = L_N`, so nothing happens unless the monotonicity floor is hit;
    /// re-imposing the constraint every step would inject rounding noise along
    /// the normal, where the energy gradient is large.
    fn project(&self, j: &mut [f64]) {
        if self.class == LiftClass::Folding {
            return;
        }
        for _ in 0..PROJECTION_ROUNDS {
            let mut clamped = false;
            for (x, l) in j.iter_mut().zip(self.lengths) {
                if *x * l < self.floor {
                    *x = self.floor / l;
                    clamped = true;
                }
            }
            if !clamped {
                break;
            }
            let sum: f64 = j.iter().zip(self.lengths).map(|(x, l)| x * l).sum();
            let s = self.total / sum;
            for x in j.iter_mut() {
                *x *= s;
            }
        }
    }

    fn run(&self, mut j: Vec<f64>, cfg: &OptimizerConfig) -> MinimizationTrace<Vec<f64>> {
        let mut energy = self.energy(&j);
        let (mut g, mut scale) = self.projected_gradient(&j);
        let mut energies = vec![energy];
        let mut grad_norms = vec![self.rms(&g)];
        let mut converged = grad_norms[0] <= cfg.grad_tol * scale;
        let mut iter = 0;
        while !converged && iter < cfg.max_iters {
            iter += 1;
            let mut alpha = cfg.step;
            let mut accepted = None;
            for _ in 0..MAX_BACKTRACKS {
                let mut trial: Vec<f64> = j.iter().zip(&g).map(|(x, d)| x - alpha * d).collect();
                self.project(&mut trial);
                let change = self.energy_change(&j, &trial);
                let decrease: f64 = g
                    .iter()
                    .zip(j.iter().zip(&trial))
                    .zip(self.lengths)
                    .map(|((d, (a, b)), l)| d * (a - b) * l)
                    .sum();
                if change < 0.0 && change <= -ARMIJO * decrease {
                    accepted = Some((trial, energy + change));
                    break;
                }
                alpha *= cfg.backtrack;
            }
            let Some((trial, e)) = accepted else { break };
            j = trial;
            energy = e;
            (g, scale) = self.projected_gradient(&j);
            let gn = self.rms(&g);
            energies.push(energy);
            grad_norms.push(gn);
            converged = gn <= cfg.grad_tol * scale;
        }
        MinimizationTrace {
            energies,
            grad_norms,
            final_state: j,
            converged,
        }
    }
}

fn check_init(m: &ClosedCurve, n: &ClosedCurve, init: &CurveMap) -> Result<()> {
    if init.source() != m || init.target() != n {
        return Err(Error::DomainMismatch(
            "initial map does not run between the given curves".into(),
        ));
    }
    Ok(())
}

fn signed_slopes(init: &CurveMap) -> Vec<f64> {
    let s = f64::from(init.orientation());
    init.slopes().iter().map(|x| x * s).collect()
}

fn rebuild(init: &CurveMap, j: &[f64], monotone: bool) -> Result<CurveMap> {
    let s = f64::from(init.orientation());
    let lengths = init.source().segment_lengths();
    let mut lift = Vec::with_capacity(j.len() + 1);
    let mut u = init.lift()[0];
    lift.push(u);
    for (x, l) in j.iter().zip(&lengths) {
        u += s * x * l;
        lift.push(u);
    }
    let last = lift.len() - 1;
    lift[last] = lift[0] + s * init.target().length();
    let (src, tgt) = (init.source().clone(), init.target().clone());
    if monotone {
        CurveMap::new(src, tgt, lift, init.orientation())
    } else {
        CurveMap::new_folded(src, tgt, lift, init.orientation())
    }
}

fn finish(
    init: &CurveMap,
    trace: MinimizationTrace<Vec<f64>>,
    monotone: bool,
) -> Result<MinimizationTrace<CurveMap>> {
    let map = rebuild(init, &trace.final_state, monotone)?;
    Ok(MinimizationTrace {
        energies: trace.energies,
        grad_norms: trace.grad_norms,
        final_state: map,
        converged: trace.converged,
    })
}

/// Projected gradient descent of the stretching energy over monotone lifts.
///
/// Works in slope space: the ω_M-metric gradient `2(|J| − 1)` minus its mean,
/// followed by clamping increments to the floor and rescaling to `L_N`.
pub fn minimize_phi1(
    m: &ClosedCurve,
    n: &ClosedCurve,
    init: &CurveMap,
    cfg: &OptimizerConfig,
) -> Result<MinimizationTrace<CurveMap>> {
    cfg.validate()?;
    check_init(m, n, init)?;
    if !init.is_monotone() {
        return Err(Error::InvalidMap(
            "stretching descent needs a monotone start".into(),
        ));
    }
    let lengths = m.segment_lengths();
    let problem = SlopeProblem {
        lengths: &lengths,
        total: n.length(),
        class: LiftClass::Monotone,
        floor: cfg.eps_mono * n.length(),
        density: |j| (j.abs() - 1.0).powi(2),
        density_change: |a, b| (b.abs() - a.abs()) * (a.abs() + b.abs() - 2.0),
        slope_grad: |j| 2.0 * (j.abs() - 1.0) * j.signum(),
    };
    finish(init, problem.run(signed_slopes(init), cfg), true)
}

/// Descent of the deformation energy in slope space.
///
/// The step direction `4J(J² − 1)` minus its mean is the gradient of the first
/// variation in the metric that measures lift perturbations by their slopes, so
/// its directional derivative along any lift perturbation agrees with
/// [`phi2_first_variation_curve`](crate::functionals::phi2_first_variation_curve).
/// With [`LiftClass::Folding`] the iterates may leave the diffeomorphisms, which
/// is how the non-attainment for short targets shows up.
pub fn minimize_phi2_curve(
    m: &ClosedCurve,
    n: &ClosedCurve,
    init: &CurveMap,
    cfg: &OptimizerConfig,
) -> Result<MinimizationTrace<CurveMap>> {
    cfg.validate()?;
    check_init(m, n, init)?;
    let lengths = m.segment_lengths();
    let monotone = cfg.lift_class == LiftClass::Monotone;
    if monotone && !init.is_monotone() {
        return Err(Error::InvalidMap(
            "monotone descent needs a monotone start".into(),
        ));
    }
    let problem = SlopeProblem {
        lengths: &lengths,
        total: n.length(),
        class: cfg.lift_class,
        floor: cfg.eps_mono * n.length(),
        density: |j| (j * j - 1.0).powi(2),
        density_change: |a, b| (b - a) * (b + a) * (a * a + b * b - 2.0),
        slope_grad: |j| 4.0 * j * (j * j - 1.0),
    };
    finish(init, problem.run(signed_slopes(init), cfg), monotone)
}
