//! Projected gradient descent on `f(A) = ‖R·A‖²_F` over symmetric tangent endomorphisms.

use serde::Serialize;

use super::defect::objective_and_gradient_frame;
use super::ShapeOperator;
use crate::error::{Error, Result};
use crate::hyperpoint::HypersurfacePoint;
use crate::linalg::Mat;
use crate::rng::{gaussian_symmetric, stream_rng};

const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MIN_STEP: f64 = 1e-20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterRecord {
    pub restart: usize,
    pub iter: usize,
    pub value: f64,
    /// Accepted step length (0 for the starting point).
    pub step: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepRule {
    /// Backtracking from the previous accepted step, doubled.
    Armijo,
    /// Barzilai–Borwein trial step, then Armijo backtracking.
    BarzilaiBorwein,
}

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    pub step_rule: StepRule,
    /// Extra runs from seeded Gaussian starts after the run from `A0`.
    pub restarts: usize,
    pub seed: u64,
    pub init_scale: f64,
    /// Stop a run once the objective drops to this value.
    pub target: f64,
    pub grad_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            step_rule: StepRule::Armijo,
            restarts: 0,
            seed: 0,
            init_scale: 0.1,
            target: 1e-10,
            grad_tol: 1e-14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeOutcome {
    pub shape: ShapeOperator,
    pub value: f64,
    pub trace: Vec<IterRecord>,
    /// Index of the run that produced `shape`.
    pub best_restart: usize,
}

fn run(
    point: &HypersurfacePoint,
    start: Mat,
    restart: usize,
    opts: &MinimizeOptions,
    trace: &mut Vec<IterRecord>,
) -> Result<(Mat, f64)> {
    let nan = |trace: &Vec<IterRecord>, what: &str| Error::Numerical {
        message: format!("objective became non-finite ({what}) in run {restart}"),
        trace: trace.clone(),
    };
    let mut x = start.symmetric_part();
    let (mut f, mut g) = objective_and_gradient_frame(point, &x)?;
    if !f.is_finite() {
        return Err(nan(trace, "start"));
    }
    trace.push(IterRecord {
        restart,
        iter: 0,
        value: f,
        step: 0.0,
        grad_norm: g.frobenius(),
    });
    let mut step = 1.0;
    let mut prev: Option<(Mat, Mat)> = None;
    for iter in 1..=opts.max_iters {
        let gg = g.inner(&g);
        if f <= opts.target || gg.sqrt() <= opts.grad_tol {
            break;
        }
        let mut t = match (opts.step_rule, &prev) {
            (StepRule::BarzilaiBorwein, Some((s, y))) => {
                let sy = s.inner(y);
                if sy > 0.0 {
                    s.inner(s) / sy
                } else {
                    2.0 * step
                }
            }
            _ => 2.0 * step,
        };
        let accepted = loop {
            let trial = x.add(&g.scale(-t));
            let (ft, gt) = objective_and_gradient_frame(point, &trial)?;
            if ft.is_nan() {
                return Err(nan(trace, "trial step"));
            }
            if ft <= f - ARMIJO_C * t * gg {
                break Some((trial, ft, gt));
            }
            t *= SHRINK;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some((xn, fnew, gnew)) = accepted else {
            break;
        };
        prev = Some((xn.sub(&x), gnew.sub(&g)));
        x = xn;
        f = fnew;
        g = gnew;
        step = t;
        trace.push(IterRecord {
            restart,
            iter,
            value: f,
            step: t,
            grad_norm: g.frobenius(),
        });
    }
    Ok((x, f))
}

/// Minimizes from `a0`, then from `opts.restarts` seeded random starts, and
/// returns the best result with the full iteration log.
pub fn minimize_defect(point: &HypersurfacePoint, a0: &ShapeOperator, opts: &MinimizeOptions) -> Result<MinimizeOutcome> {
    if opts.max_iters == 0 || !(opts.init_scale > 0.0) || !(opts.target >= 0.0) {
        return Err(Error::param("minimizer options out of range"));
    }
    let n = point.tangent_dim();
    let mut trace = Vec::new();
    let mut best: Option<(Mat, f64, usize)> = None;
    for restart in 0..=opts.restarts {
        let start = if restart == 0 {
            a0.frame_matrix(point)
        } else {
            gaussian_symmetric(&mut stream_rng(opts.seed, restart as u64), n, opts.init_scale)
        };
        let (x, f) = run(point, start, restart, opts, &mut trace)?;
        if best.as_ref().map_or(true, |b| f < b.1) {
            best = Some((x, f, restart));
        }
    }
    let (x, value, best_restart) = best.expect("at least one run");
    Ok(MinimizeOutcome {
        shape: ShapeOperator::from_frame(point, &x)?,
        value,
        trace,
        best_restart,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientModel;
    use crate::hyperpoint::oblique_normal;

    fn point() -> HypersurfacePoint {
        let model = AmbientModel::build(3).unwrap();
        HypersurfacePoint::build(&model, &oblique_normal(&model, 0.2)).unwrap()
    }

    #[test]
    fn trace_is_monotone_and_reaches_target_for_both_rules() {
        let p = point();
        let start = gaussian_symmetric(&mut stream_rng(5, 0), 11, 0.1);
        let a0 = ShapeOperator::from_frame(&p, &start).unwrap();
        for step_rule in [StepRule::Armijo, StepRule::BarzilaiBorwein] {
            let opts = MinimizeOptions {
                step_rule,
                ..Default::default()
            };
            let out = minimize_defect(&p, &a0, &opts).unwrap();
            assert!(out.value <= 1e-8, "{step_rule:?}: {}", out.value);
            for w in out.trace.windows(2) {
                assert!(w[1].value <= w[0].value);
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let p = point();
        let opts = MinimizeOptions {
            restarts: 2,
            seed: 11,
            max_iters: 30,
            step_rule: StepRule::Armijo,
            ..Default::default()
        };
        let a0 = ShapeOperator::zero(&p);
        let a = minimize_defect(&p, &a0, &opts).unwrap();
        let b = minimize_defect(&p, &a0, &opts).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.value, 0.0);
    }

    #[test]
    fn rejects_bad_options() {
        let p = point();
        let opts = MinimizeOptions {
            max_iters: 0,
            ..Default::default()
        };
        assert!(minimize_defect(&p, &ShapeOperator::zero(&p), &opts).is_err());
    }
}
