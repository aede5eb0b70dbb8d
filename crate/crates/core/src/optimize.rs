//! Box-constrained welfare maximization.
//!
//! Projected L-BFGS: the quasi-Newton direction is built on the variables
//! that are not held at a bound, and the step is found by backtracking along
//! the projection arc with an Armijo test. Only improving steps are accepted.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::econ::{mu_bounds, savings_bounds, ControlPath, EconParams};
use crate::error::{Error, Result};
use crate::sim::Model;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub max_iterations: usize,
    /// Projected-gradient infinity norm of the normalized objective.
    pub gradient_tolerance: f64,
    /// Finite-difference step in control units.
    pub finite_difference_step: f64,
    /// Use central rather than forward differences.
    pub central_differences: bool,
    /// Additional perturbed starts; the best result is kept.
    pub restarts: usize,
    pub restart_noise: f64,
    pub seed: u64,
    /// L-BFGS memory.
    pub memory: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            gradient_tolerance: 1e-6,
            finite_difference_step: 1e-6,
            central_differences: false,
            restarts: 0,
            restart_noise: 0.05,
            seed: 0,
            memory: 12,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::invalid("gradient_tolerance", "must be > 0"));
        }
        if !(self.finite_difference_step > 0.0) {
            return Err(Error::invalid("finite_difference_step", "must be > 0"));
        }
        if self.memory == 0 {
            return Err(Error::invalid("memory", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub objective: f64,
    pub projected_gradient_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub objective: f64,
    pub initial_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub projected_gradient_norm: f64,
    pub history: Vec<IterationLog>,
}

/// A function to maximize over a box.
pub trait Objective {
    fn value(&self, x: &[f64]) -> Result<f64>;

    /// Gradient at `x`, where the objective equals `fx`. The default uses
    /// finite differences stepping away from any active bound.
    fn gradient(&self, x: &[f64], fx: f64, bounds: &Bounds, cfg: &OptimizerConfig) -> Result<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            if bounds.fixed(i) {
                continue;
            }
            let h = cfg.finite_difference_step;
            if cfg.central_differences {
                let hi = (x[i] + h).min(bounds.upper[i]);
                let lo = (x[i] - h).max(bounds.lower[i]);
                xp[i] = hi;
                let fp = self.value(&xp)?;
                xp[i] = lo;
                let fm = self.value(&xp)?;
                g[i] = (fp - fm) / (hi - lo);
            } else {
                let step = if x[i] + h > bounds.upper[i] { -h } else { h };
                xp[i] = x[i] + step;
                g[i] = (self.value(&xp)? - fx) / step;
            }
            xp[i] = x[i];
        }
        Ok(g)
    }
}

/// Wraps a closure as an [`Objective`] with finite-difference gradients.
pub struct FnObjective<F>(pub F);

impl<F: Fn(&[f64]) -> Result<f64>> Objective for FnObjective<F> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        (self.0)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::invalid("bounds", "lower and upper differ in length"));
        }
        if let Some(index) = lower.iter().zip(&upper).position(|(l, u)| !(l <= u)) {
            return Err(Error::InfeasibleBounds {
                index,
                lower: lower[index],
                upper: upper[index],
            });
        }
        Ok(Self { lower, upper })
    }

    pub fn fixed(&self, i: usize) -> bool {
        self.lower[i] == self.upper[i]
    }

    pub fn project(&self, x: &mut [f64]) {
        for (i, v) in x.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
    }
}

/// Gradient with components zeroed where ascent would leave the box.
pub fn projected_gradient(x: &[f64], g: &[f64], bounds: &Bounds) -> Vec<f64> {
    x.iter()
        .zip(g)
        .enumerate()
        .map(|(i, (xi, gi))| {
            let at_lo = *xi <= bounds.lower[i];
            let at_hi = *xi >= bounds.upper[i];
            if (at_lo && *gi < 0.0) || (at_hi && *gi > 0.0) || bounds.fixed(i) {
                0.0
            } else {
                *gi
            }
        })
        .collect()
}

/// Largest violation of the first-order conditions for a maximum.
pub fn kkt_residual(x: &[f64], g: &[f64], bounds: &Bounds) -> f64 {
    inf_norm(&projected_gradient(x, g, bounds))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_finite(v: f64, x: &[f64]) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteObjective(x.to_vec()))
    }
}

/// Ascent direction from the two-loop recursion on the free variables.
fn lbfgs_direction(g: &[f64], free: &[bool], memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mask = |v: &[f64]| -> Vec<f64> {
        v.iter().zip(free).map(|(x, f)| if *f { *x } else { 0.0 }).collect()
    };
    // work on the minimization of -f
    let mut q: Vec<f64> = mask(&g.iter().map(|v| -v).collect::<Vec<_>>());
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = rho * dot(&mask(s), &q);
        for (qi, yi) in q.iter_mut().zip(mask(y)) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let (sm, ym) = (mask(s), mask(y));
        let yy = dot(&ym, &ym);
        if yy > 0.0 {
            let gamma = dot(&sm, &ym) / yy;
            if gamma > 0.0 {
                q.iter_mut().for_each(|v| *v *= gamma);
            }
        }
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(&mask(y), &q);
        for (qi, si) in q.iter_mut().zip(mask(s)) {
            *qi += (a - b) * si;
        }
    }
    // q approximates H^{-1} grad(-f); the ascent direction is -q
    q.iter().map(|v| -v).collect()
}

/// Maximize `objective` over `bounds` from `x0`.
pub fn maximize<O: Objective + ?Sized>(
    objective: &O,
    bounds: &Bounds,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptimResult> {
    cfg.validate()?;
    if x0.len() != bounds.lower.len() {
        return Err(Error::invalid("x0", "length differs from bounds"));
    }
    let mut x = x0.to_vec();
    bounds.project(&mut x);
    let raw0 = check_finite(objective.value(&x)?, &x)?;
    let scale = raw0.abs().max(1e-12);
    let f = |x: &[f64]| -> Result<f64> { Ok(check_finite(objective.value(x)?, x)? / scale) };

    let mut fx = raw0 / scale;
    let mut g: Vec<f64> = objective
        .gradient(&x, raw0, bounds, cfg)?
        .into_iter()
        .map(|v| v / scale)
        .collect();
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut history = Vec::new();
    let mut pg_norm = kkt_residual(&x, &g, bounds);
    history.push(IterationLog {
        iteration: 0,
        objective: fx * scale,
        projected_gradient_norm: pg_norm,
        step: 0.0,
    });
    let mut converged = pg_norm < cfg.gradient_tolerance;
    let mut iterations = 0;

    while !converged && iterations < cfg.max_iterations {
        iterations += 1;
        let pg = projected_gradient(&x, &g, bounds);
        let free: Vec<bool> = pg.iter().map(|v| *v != 0.0).collect();

        let mut accepted = None;
        for attempt in 0..2 {
            let mut d = if attempt == 0 && !memory.is_empty() {
                lbfgs_direction(&g, &free, &memory)
            } else {
                pg.clone()
            };
            if dot(&d, &pg) <= 0.0 {
                if attempt == 0 {
                    continue;
                }
                break;
            }
            if attempt == 1 || memory.is_empty() {
                let n = inf_norm(&d);
                d.iter_mut().for_each(|v| *v *= 0.1 / n);
            }
            let mut lambda = 1.0;
            for _ in 0..40 {
                let mut xt: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + lambda * di).collect();
                bounds.project(&mut xt);
                let moved: Vec<f64> = xt.iter().zip(&x).map(|(a, b)| a - b).collect();
                let gain = dot(&g, &moved);
                if inf_norm(&moved) == 0.0 || gain <= 0.0 {
                    lambda *= 0.5;
                    continue;
                }
                let ft = f(&xt)?;
                if ft > fx && ft >= fx + 1e-4 * gain {
                    accepted = Some((xt, ft, lambda));
                    break;
                }
                lambda *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
            memory.clear();
        }

        let Some((x_new, f_new, lambda)) = accepted else {
            // no improving step along either direction
            break;
        };
        let g_new: Vec<f64> = objective
            .gradient(&x_new, f_new * scale, bounds, cfg)?
            .into_iter()
            .map(|v| v / scale)
            .collect();
        // curvature pair for the minimization of -f
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g.iter().zip(&g_new).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if memory.len() == cfg.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        pg_norm = kkt_residual(&x, &g, bounds);
        history.push(IterationLog {
            iteration: iterations,
            objective: fx * scale,
            projected_gradient_norm: pg_norm,
            step: lambda,
        });
        converged = pg_norm < cfg.gradient_tolerance;
    }

    Ok(OptimResult {
        x,
        objective: fx * scale,
        initial_objective: raw0,
        iterations,
        converged,
        projected_gradient_norm: pg_norm,
        history,
    })
}

/// Maximize from `x0` and from `cfg.restarts` seeded perturbations of it,
/// keeping the best result.
pub fn maximize_with_restarts<O: Objective + ?Sized>(
    objective: &O,
    bounds: &Bounds,
    x0: &[f64],
    cfg: &OptimizerConfig,
) -> Result<OptimResult> {
    let mut best = maximize(objective, bounds, x0, cfg)?;
    for k in 0..cfg.restarts {
        let start = perturbed_start(x0, bounds, cfg.restart_noise, cfg.seed, k as u64);
        let r = maximize(objective, bounds, &start, cfg)?;
        if r.objective > best.objective {
            best = r;
        }
    }
    Ok(best)
}

/// Seeded Gaussian perturbation of `x0`, projected back into the box.
pub fn perturbed_start(x0: &[f64], bounds: &Bounds, noise: f64, seed: u64, restart: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart + 1);
    let mut x: Vec<f64> = x0
        .iter()
        .map(|v| {
            let z: f64 = rng.sample(StandardNormal);
            v + noise * z
        })
        .collect();
    bounds.project(&mut x);
    x
}

/// Bounds on `[mu..., savings...]` for the economy's horizon.
pub fn control_bounds(econ: &EconParams) -> Result<Bounds> {
    let n = econ.periods;
    let mut lower = Vec::with_capacity(2 * n);
    let mut upper = Vec::with_capacity(2 * n);
    for t in 1..=n {
        let (lo, hi) = mu_bounds(econ, t)?;
        lower.push(lo);
        upper.push(hi);
    }
    for t in 1..=n {
        let (lo, hi) = savings_bounds(econ, t)?;
        lower.push(lo);
        upper.push(hi);
    }
    Bounds::new(lower, upper)
}

/// Period at which the initial abatement ramp reaches its plateau.
pub const INITIAL_RAMP_PERIODS: usize = 40;
pub const INITIAL_SAVINGS: f64 = 0.25;

/// Abatement rising linearly to 90% of the late-period cap by period 40,
/// savings flat at 0.25, both clamped into their bounds.
pub fn default_initial_guess(econ: &EconParams) -> Result<ControlPath> {
    let n = econ.periods;
    let target = 0.9 * econ.mu_cap_late;
    let mut mu = Vec::with_capacity(n);
    let mut savings = Vec::with_capacity(n);
    for t in 1..=n {
        let frac = ((t - 1) as f64 / (INITIAL_RAMP_PERIODS - 1) as f64).min(1.0);
        let (lo, hi) = mu_bounds(econ, t)?;
        mu.push((econ.mu_first + frac * (target - econ.mu_first)).clamp(lo, hi));
        let (lo, hi) = savings_bounds(econ, t)?;
        savings.push(INITIAL_SAVINGS.clamp(lo, hi));
    }
    Ok(ControlPath { mu, savings })
}

/// Welfare of a model as a function of the flattened control vector, with
/// checkpointed finite-difference gradients: perturbing period `t` only
/// re-simulates periods `t..=N`.
pub struct WelfareObjective<'a> {
    pub model: &'a Model,
}

impl Objective for WelfareObjective<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.model.welfare(&ControlPath::from_slice(x), None)
    }

    fn gradient(&self, x: &[f64], fx: f64, bounds: &Bounds, cfg: &OptimizerConfig) -> Result<Vec<f64>> {
        let n = self.model.periods();
        let controls = ControlPath::from_slice(x);
        let cps = self.model.checkpoints(&controls)?;
        let mut g = vec![0.0; 2 * n];
        let h = cfg.finite_difference_step;
        for t in 1..=n {
            for (k, idx) in [(0usize, t - 1), (1usize, n + t - 1)] {
                if bounds.fixed(idx) {
                    continue;
                }
                let eval = |v: f64| -> Result<f64> {
                    let (mu, s) = if k == 0 {
                        (v, controls.savings[t - 1])
                    } else {
                        (controls.mu[t - 1], v)
                    };
                    self.model.welfare_from(&cps, &controls, t, mu, s)
                };
                let xi = x[idx];
                g[idx] = if cfg.central_differences {
                    let hi = (xi + h).min(bounds.upper[idx]);
                    let lo = (xi - h).max(bounds.lower[idx]);
                    (eval(hi)? - eval(lo)?) / (hi - lo)
                } else {
                    let step = if xi + h > bounds.upper[idx] { -h } else { h };
                    (eval(xi + step)? - fx) / step
                };
            }
        }
        Ok(g)
    }
}

/// Welfare-maximizing controls for one model.
pub fn optimize_controls(model: &Model, cfg: &OptimizerConfig) -> Result<(ControlPath, OptimResult)> {
    let bounds = control_bounds(&model.econ)?;
    let x0 = default_initial_guess(&model.econ)?.to_vec();
    let result = maximize_with_restarts(&WelfareObjective { model }, &bounds, &x0, cfg)?;
    Ok((ControlPath::from_slice(&result.x), result))
}
