//! Box-constrained Nelder–Mead maximization.
//!
//! Trial points are clamped onto the box before evaluation. After a run
//! converges the simplex is rebuilt around the best vertex and the search
//! restarted, which recovers from simplices that collapsed onto a face.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSettings {
    pub max_iterations: usize,
    pub x_tolerance: f64,
    pub f_tolerance: f64,
    pub restarts: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            x_tolerance: 1e-8,
            f_tolerance: 1e-10,
            restarts: 3,
        }
    }
}

impl OptimizerSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_tolerance > 0.0 && self.f_tolerance > 0.0) {
            return Err(Error::InvalidParameter("optimizer tolerances must be positive".into()));
        }
        if self.restarts == 0 || self.max_iterations == 0 {
            return Err(Error::InvalidParameter("optimizer needs restarts >= 1 and max_iterations >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimResult {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    pub evaluations: usize,
}

struct Boxed<'a, F> {
    objective: F,
    lower: &'a [f64],
    upper: &'a [f64],
    evaluations: usize,
}

impl<F: FnMut(&[f64]) -> f64> Boxed<'_, F> {
    fn project(&self, x: &mut [f64]) {
        for ((v, &lo), &hi) in x.iter_mut().zip(self.lower).zip(self.upper) {
            *v = v.clamp(lo, hi);
        }
    }

    /// Minimization target: −f, with NaN mapped to +∞.
    fn cost(&mut self, x: &[f64]) -> f64 {
        self.evaluations += 1;
        let v = (self.objective)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            -v
        }
    }
}

/// Maximizes `objective` over the box [lower, upper] starting from `start`.
pub fn nelder_mead<F>(
    objective: F,
    lower: &[f64],
    upper: &[f64],
    start: &[f64],
    settings: &OptimizerSettings,
) -> Result<OptimResult>
where
    F: FnMut(&[f64]) -> f64,
{
    settings.validate()?;
    let dim = start.len();
    if dim == 0 || lower.len() != dim || upper.len() != dim {
        return Err(Error::DimensionMismatch {
            what: "optimizer box",
            expected: dim,
            got: lower.len().min(upper.len()),
        });
    }
    if lower.iter().zip(upper).any(|(lo, hi)| !(lo < hi)) {
        return Err(Error::InvalidParameter("optimizer box must satisfy lower < upper".into()));
    }

    let mut problem = Boxed {
        objective,
        lower,
        upper,
        evaluations: 0,
    };
    let mut best = start.to_vec();
    problem.project(&mut best);
    let mut best_cost = problem.cost(&best);
    let mut iterations = 0;
    let mut converged = false;

    for restart in 0..settings.restarts {
        let scale = 0.1 / (1u32 << restart.min(8)) as f64;
        let run = simplex_run(&mut problem, &best, scale, settings, settings.max_iterations.saturating_sub(iterations).max(1));
        iterations += run.iterations;
        let improved_x = run
            .best
            .iter()
            .zip(&best)
            .all(|(a, b)| (a - b).abs() <= settings.x_tolerance * b.abs().max(1.0));
        let stable = run.converged
            && improved_x
            && (best_cost - run.best_cost).abs() <= settings.f_tolerance * best_cost.abs().max(1.0);
        if run.best_cost <= best_cost {
            best = run.best;
            best_cost = run.best_cost;
        }
        converged = run.converged;
        if stable || iterations >= settings.max_iterations {
            break;
        }
    }

    Ok(OptimResult {
        argmax: best,
        value: -best_cost,
        converged,
        iterations,
        evaluations: problem.evaluations,
    })
}

struct RunOutcome {
    best: Vec<f64>,
    best_cost: f64,
    converged: bool,
    iterations: usize,
}

fn initial_simplex<F: FnMut(&[f64]) -> f64>(problem: &Boxed<'_, F>, x0: &[f64], scale: f64) -> Vec<Vec<f64>> {
    let mut simplex = vec![x0.to_vec()];
    for j in 0..x0.len() {
        let width = problem.upper[j] - problem.lower[j];
        let mut step = if x0[j].abs() > 1e-8 { scale * x0[j].abs() } else { scale * width.min(1.0) };
        step = step.min(0.5 * width);
        let mut v = x0.to_vec();
        v[j] = if x0[j] + step <= problem.upper[j] { x0[j] + step } else { x0[j] - step };
        simplex.push(v);
    }
    simplex
}

fn simplex_run<F: FnMut(&[f64]) -> f64>(
    problem: &mut Boxed<'_, F>,
    x0: &[f64],
    scale: f64,
    settings: &OptimizerSettings,
    budget: usize,
) -> RunOutcome {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let dim = x0.len();
    let mut simplex = initial_simplex(problem, x0, scale);
    let mut costs: Vec<f64> = simplex.iter().map(|v| problem.cost(v)).collect();
    let mut order: Vec<usize> = (0..=dim).collect();
    let mut iterations = 0;
    let mut converged = false;

    let point = |centroid: &[f64], worst: &[f64], t: f64| -> Vec<f64> {
        centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect()
    };

    while iterations < budget {
        order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        let (ib, iw, isw) = (order[0], order[dim], order[dim - 1]);

        let x_spread = simplex.iter().all(|v| {
            v.iter()
                .zip(&simplex[ib])
                .all(|(a, b)| (a - b).abs() <= settings.x_tolerance * b.abs().max(1.0))
        });
        let f_spread = (costs[iw] - costs[ib]).abs() <= settings.f_tolerance * costs[ib].abs().max(1.0);
        if x_spread && f_spread {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; dim];
        for &k in &order[..dim] {
            for (c, v) in centroid.iter_mut().zip(&simplex[k]) {
                *c += v / dim as f64;
            }
        }

        let mut xr = point(&centroid, &simplex[iw], REFLECT);
        problem.project(&mut xr);
        let fr = problem.cost(&xr);
        if fr < costs[ib] {
            let mut xe = point(&centroid, &simplex[iw], EXPAND);
            problem.project(&mut xe);
            let fe = problem.cost(&xe);
            if fe < fr {
                simplex[iw] = xe;
                costs[iw] = fe;
            } else {
                simplex[iw] = xr;
                costs[iw] = fr;
            }
            continue;
        }
        if fr < costs[isw] {
            simplex[iw] = xr;
            costs[iw] = fr;
            continue;
        }
        // Contraction: outside if the reflection beat the worst, else inside.
        let (mut xc, target) = if fr < costs[iw] {
            (point(&centroid, &simplex[iw], CONTRACT), fr)
        } else {
            (point(&centroid, &simplex[iw], -CONTRACT), costs[iw])
        };
        problem.project(&mut xc);
        let fc = problem.cost(&xc);
        if fc < target {
            simplex[iw] = xc;
            costs[iw] = fc;
            continue;
        }
        let best = simplex[ib].clone();
        for k in 0..=dim {
            if k == ib {
                continue;
            }
            for (v, b) in simplex[k].iter_mut().zip(&best) {
                *v = b + SHRINK * (*v - b);
            }
            costs[k] = problem.cost(&simplex[k]);
        }
    }

    let ib = (0..=dim).min_by(|&a, &b| costs[a].total_cmp(&costs[b])).expect("nonempty simplex");
    RunOutcome {
        best: simplex[ib].clone(),
        best_cost: costs[ib],
        converged,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let s = OptimizerSettings::default();
        let r = nelder_mead(|x| -(x[0] - 3.0).powi(2), &[0.0], &[10.0], &[7.0], &s).unwrap();
        assert!((r.argmax[0] - 3.0).abs() <= 1e-7, "{:?}", r);
        assert!(r.converged);
    }

    #[test]
    fn two_dimensional_bowl() {
        let s = OptimizerSettings::default();
        let r = nelder_mead(
            |x| -((x[0] - 1.0).powi(2) + (x[1] + 2.0).powi(2)),
            &[-5.0, -5.0],
            &[5.0, 5.0],
            &[0.0, 0.0],
            &s,
        )
        .unwrap();
        assert!((r.argmax[0] - 1.0).abs() < 1e-7 && (r.argmax[1] + 2.0).abs() < 1e-7, "{:?}", r);
    }

    #[test]
    fn boundary_maximum_is_projected() {
        let s = OptimizerSettings::default();
        let r = nelder_mead(|x| x[0], &[0.0], &[2.0], &[0.5], &s).unwrap();
        assert_eq!(r.argmax[0], 2.0);
    }

    #[test]
    fn fixed_point_start() {
        let s = OptimizerSettings::default();
        let r = nelder_mead(|x| -(x[0] - 3.0).powi(2) - (x[1] - 1.0).powi(2), &[0.0, 0.0], &[10.0, 10.0], &[3.0, 1.0], &s)
            .unwrap();
        assert!((r.argmax[0] - 3.0).abs() <= s.x_tolerance * 3.0);
        assert!((r.argmax[1] - 1.0).abs() <= s.x_tolerance);
    }

    #[test]
    fn deterministic() {
        let s = OptimizerSettings::default();
        let f = |x: &[f64]| -(x[0] - 0.3).powi(4) - (x[1] * x[0] - 1.0).powi(2);
        let a = nelder_mead(f, &[-3.0, -3.0], &[3.0, 3.0], &[1.0, 1.0], &s).unwrap();
        let b = nelder_mead(f, &[-3.0, -3.0], &[3.0, 3.0], &[1.0, 1.0], &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_settings_rejected() {
        let mut s = OptimizerSettings::default();
        s.restarts = 0;
        assert!(nelder_mead(|x| -x[0] * x[0], &[-1.0], &[1.0], &[0.5], &s).is_err());
        let s = OptimizerSettings::default();
        assert!(nelder_mead(|x| -x[0] * x[0], &[1.0], &[1.0], &[1.0], &s).is_err());
    }
}
