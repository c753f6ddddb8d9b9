//! Limited-memory BFGS with simple bounds.
//!
//! Each iteration fixes the variables that sit on a bound with the gradient
//! pointing outward, builds the two-loop quasi-Newton direction on the
//! remaining free variables, and backtracks along the projected path
//! `P(x + t d)` until an Armijo decrease holds.

use std::collections::VecDeque;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsbOptions {
    pub memory: usize,
    /// Stop when the infinity norm of the projected gradient drops below this.
    pub pg_tol: f64,
    pub max_iter: usize,
    /// Stop when `(f_k - f_{k+1}) <= ftol * max(|f_k|, |f_{k+1}|, 1e-300)`.
    pub ftol: f64,
    pub max_backtracks: usize,
    pub armijo: f64,
}

impl Default for LbfgsbOptions {
    fn default() -> Self {
        LbfgsbOptions {
            memory: 10,
            pg_tol: 1e-10,
            max_iter: 200,
            ftol: 1e3 * f64::EPSILON,
            max_backtracks: 50,
            armijo: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    ProjectedGradient,
    FunctionTolerance,
    MaxIterations,
    LineSearchFailed,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(self, Termination::ProjectedGradient | Termination::FunctionTolerance)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ProjectedGradient => "projected_gradient",
            Termination::FunctionTolerance => "function_tolerance",
            Termination::MaxIterations => "max_iterations",
            Termination::LineSearchFailed => "line_search_failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbfgsbReport {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad: Vec<f64>,
    pub projected_gradient_norm: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

/// Objective with box constraints.
pub trait BoxProblem {
    fn dimension(&self) -> usize;
    fn lower(&self) -> &[f64];
    fn upper(&self) -> &[f64];
    fn value_and_gradient(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, l), h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(*l, *h);
    }
}

fn projected_gradient_norm(x: &[f64], g: &[f64], lo: &[f64], hi: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..x.len() {
        let step = (x[i] - g[i]).clamp(lo[i], hi[i]) - x[i];
        m = m.max(step.abs());
    }
    m
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Memory {
    pairs: VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    capacity: usize,
}

impl Memory {
    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > f64::EPSILON * yy && sy > 0.0 {
            if self.pairs.len() == self.capacity {
                self.pairs.pop_front();
            }
            self.pairs.push_back((s, y, 1.0 / sy));
        }
    }

    /// `-H g` restricted to the free variables.
    fn direction(&self, g: &[f64], free: &[bool]) -> Vec<f64> {
        let mask = |v: &mut [f64]| {
            for (x, &f) in v.iter_mut().zip(free) {
                if !f {
                    *x = 0.0;
                }
            }
        };
        let mut q = g.to_vec();
        mask(&mut q);
        let mut alpha = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let mut s = s.clone();
            mask(&mut s);
            let mut y = y.clone();
            mask(&mut y);
            let a = rho * dot(&s, &q);
            for (qi, yi) in q.iter_mut().zip(&y) {
                *qi -= a * yi;
            }
            alpha.push(a);
        }
        if let Some((s, y, _)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in self.pairs.iter().zip(alpha.iter().rev()) {
            let mut s = s.clone();
            mask(&mut s);
            let mut y = y.clone();
            mask(&mut y);
            let b = rho * dot(&y, &q);
            for (qi, si) in q.iter_mut().zip(&s) {
                *qi += (a - b) * si;
            }
        }
        mask(&mut q);
        q.iter_mut().for_each(|v| *v = -*v);
        q
    }
}

/// Minimizes `problem` from `x0` (projected onto the box first).
pub fn minimize_box(problem: &mut impl BoxProblem, x0: &[f64], opts: &LbfgsbOptions) -> Result<LbfgsbReport> {
    let n = problem.dimension();
    let lo = problem.lower().to_vec();
    let hi = problem.upper().to_vec();
    if x0.len() != n || lo.len() != n || hi.len() != n {
        return Err(Error::Shape(format!("start point has {} entries, problem {n}", x0.len())));
    }
    if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
        return Err(Error::invalid("empty box"));
    }

    let mut x = x0.to_vec();
    project(&mut x, &lo, &hi);
    let (mut f, mut g) = problem.value_and_gradient(&x)?;
    let mut evaluations = 1;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(format!("non-finite objective at start {x:?}")));
    }
    let mut memory = Memory {
        pairs: VecDeque::new(),
        capacity: opts.memory.max(1),
    };

    let mut iterations = 0;
    let termination = loop {
        let pg = projected_gradient_norm(&x, &g, &lo, &hi);
        if pg <= opts.pg_tol {
            break Termination::ProjectedGradient;
        }
        if iterations >= opts.max_iter {
            break Termination::MaxIterations;
        }

        let free: Vec<bool> = (0..n)
            .map(|i| !((x[i] <= lo[i] && g[i] > 0.0) || (x[i] >= hi[i] && g[i] < 0.0)))
            .collect();

        let mut accepted = None;
        for attempt in 0..2 {
            let steepest = attempt == 1 || memory.pairs.is_empty();
            let mut d = if steepest {
                (0..n).map(|i| if free[i] { -g[i] } else { 0.0 }).collect()
            } else {
                memory.direction(&g, &free)
            };
            if !steepest && dot(&g, &d) >= 0.0 {
                continue;
            }
            if steepest {
                // unit-length first trial step
                let norm = dot(&d, &d).sqrt();
                if norm > 0.0 {
                    d.iter_mut().for_each(|v| *v /= norm.max(1.0));
                }
            }
            let mut t = 1.0;
            for _ in 0..opts.max_backtracks {
                let mut trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                project(&mut trial, &lo, &hi);
                let step: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                let decrease = dot(&g, &step);
                if decrease >= 0.0 && step.iter().all(|v| *v == 0.0) {
                    break;
                }
                let (ft, gt) = problem.value_and_gradient(&trial)?;
                evaluations += 1;
                if ft.is_finite() && gt.iter().all(|v| v.is_finite()) && ft <= f + opts.armijo * decrease {
                    accepted = Some((trial, ft, gt));
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
            memory.pairs.clear();
        }

        let Some((x_new, f_new, g_new)) = accepted else {
            break Termination::LineSearchFailed;
        };
        iterations += 1;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        memory.push(s, y);
        let reduction = f - f_new;
        let scale = f.abs().max(f_new.abs()).max(1e-300);
        x = x_new;
        f = f_new;
        g = g_new;
        if reduction <= opts.ftol * scale {
            break if projected_gradient_norm(&x, &g, &lo, &hi) <= opts.pg_tol {
                Termination::ProjectedGradient
            } else {
                Termination::FunctionTolerance
            };
        }
    };

    Ok(LbfgsbReport {
        projected_gradient_norm: projected_gradient_norm(&x, &g, &lo, &hi),
        x,
        f,
        grad: g,
        iterations,
        evaluations,
        termination,
    })
}
