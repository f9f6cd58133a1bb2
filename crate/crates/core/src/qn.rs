//! Box-constrained limited-memory quasi-Newton descent with
//! finite-difference gradients.
//!
//! Each iteration builds an L-BFGS direction on the free variables
//! (coordinates not pinned at a bound by the gradient), then backtracks
//! along the projected path `P(x + a d)` until the Armijo condition holds.
//! Only strictly decreasing steps are accepted, so the returned value never
//! exceeds the starting value.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use rayon::prelude::*;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QnOptions<T> {
    pub max_iters: usize,
    /// Stop once the projected gradient 2-norm falls below this.
    pub grad_tol: T,
    /// Stop once an accepted step improves the value by less than this.
    pub f_tol: T,
    /// Forward-difference step.
    pub fd_step: T,
    /// Number of stored correction pairs.
    pub memory: usize,
    /// Largest coordinate move of the first (steepest-descent) step.
    pub initial_move: T,
    pub max_backtracks: usize,
    /// Stop as soon as the value drops to or below this.
    pub stop_below: Option<T>,
}

impl<T: Real> Default for QnOptions<T> {
    fn default() -> Self {
        Self {
            max_iters: 200,
            grad_tol: lit(1e-6),
            f_tol: lit(1e-9),
            fd_step: lit(1e-4),
            memory: 8,
            initial_move: lit(0.1),
            max_backtracks: 12,
            stop_below: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QnStatus {
    GradientConverged,
    TargetReached,
    SmallImprovement,
    LineSearchStalled,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QnOutcome<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: QnStatus,
    /// Projected gradient norm at the last gradient evaluation.
    pub gradient_norm: T,
}

fn project<T: Real>(x: &mut [T], lower: &[T], upper: &[T]) {
    for ((v, &lo), &hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.max(lo).min(hi);
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

/// Forward-difference gradient; coordinates within `step` of their upper
/// bound use a backward difference so every probe stays feasible. Probes
/// run in parallel and are collected in coordinate order.
pub fn fd_gradient<T, F>(f: &F, x: &[T], fx: T, step: T, lower: &[T], upper: &[T]) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut probe = x.to_vec();
            let h = if x[i] + step <= upper[i] || x[i] - step < lower[i] {
                step
            } else {
                -step
            };
            probe[i] = x[i] + h;
            let fp = f(&probe)?;
            Ok((fp - fx) / h)
        })
        .collect()
}

/// Central-difference gradient, used as a reference in tests and
/// diagnostics.
pub fn central_gradient<T, F>(f: &F, x: &[T], step: T) -> Result<Vec<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    (0..x.len())
        .into_par_iter()
        .map(|i| {
            let mut probe = x.to_vec();
            probe[i] = x[i] + step;
            let fp = f(&probe)?;
            probe[i] = x[i] - step;
            let fm = f(&probe)?;
            Ok((fp - fm) / (step + step))
        })
        .collect()
}

/// Zeroes gradient components that push against an active bound.
fn projected_gradient<T: Real>(x: &[T], g: &[T], lower: &[T], upper: &[T]) -> Vec<T> {
    let eps = lit::<T>(1e-12);
    x.iter()
        .zip(g)
        .zip(lower.iter().zip(upper))
        .map(|((&xi, &gi), (&lo, &hi))| {
            if (xi <= lo + eps && gi > T::zero()) || (xi >= hi - eps && gi < T::zero()) {
                T::zero()
            } else {
                gi
            }
        })
        .collect()
}

/// Two-loop recursion applied to `q`.
fn lbfgs_direction<T: Real>(pg: &[T], memory: &VecDeque<(Vec<T>, Vec<T>, T)>) -> Vec<T> {
    let mut q = pg.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, rho) in memory.iter().rev() {
        let a = *rho * dot(s, &q);
        for (qi, &yi) in q.iter_mut().zip(y) {
            *qi = *qi - a * yi;
        }
        alphas.push(a);
    }
    if let Some((s, y, _)) = memory.back() {
        let scale = dot(s, y) / dot(y, y);
        for qi in q.iter_mut() {
            *qi = *qi * scale;
        }
    }
    for ((s, y, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = *rho * dot(y, &q);
        for (qi, &si) in q.iter_mut().zip(s) {
            *qi = *qi + (a - b) * si;
        }
    }
    q.iter().map(|&v| -v).collect()
}

fn check_finite<T: Real>(v: T, iteration: usize, x: &[T]) -> Result<T> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite {
            iteration,
            detail: format!("objective {v} at x = {x:?}"),
        })
    }
}

/// Minimizes `f` over the box `[lower, upper]` starting from `x0`, with
/// forward-difference gradients.
pub fn minimize<T, F>(f: F, x0: &[T], lower: &[T], upper: &[T], opts: &QnOptions<T>) -> Result<QnOutcome<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    let grad = |x: &[T], fx: T| fd_gradient(&f, x, fx, opts.fd_step, lower, upper);
    minimize_with(&f, grad, x0, lower, upper, opts)
}

/// As [`minimize`], with a caller-supplied gradient `grad(x, f(x))`. Each
/// gradient call is counted as `x.len()` evaluations.
pub fn minimize_with<T, F, G>(
    f: F,
    grad: G,
    x0: &[T],
    lower: &[T],
    upper: &[T],
    opts: &QnOptions<T>,
) -> Result<QnOutcome<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T>,
    G: Fn(&[T], T) -> Result<Vec<T>>,
{
    let n = x0.len();
    if lower.len() != n || upper.len() != n {
        return Err(Error::invalid("bounds", "length differs from the start point"));
    }
    if lower.iter().zip(upper).any(|(l, u)| !(l <= u)) {
        return Err(Error::invalid("bounds", "lower bound above upper bound"));
    }
    let mut x = x0.to_vec();
    project(&mut x, lower, upper);
    let mut fx = check_finite(f(&x)?, 0, &x)?;
    let mut evaluations = 1;
    let mut memory: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::new();
    let c1 = lit::<T>(1e-4);
    let half = lit::<T>(0.5);

    let done = |x: Vec<T>, value, iterations, evaluations, status, gradient_norm| {
        Ok(QnOutcome {
            x,
            value,
            iterations,
            evaluations,
            status,
            gradient_norm,
        })
    };

    if n == 0 {
        return done(x, fx, 0, evaluations, QnStatus::GradientConverged, T::zero());
    }
    if let Some(target) = opts.stop_below {
        if fx <= target {
            return done(x, fx, 0, evaluations, QnStatus::TargetReached, T::nan());
        }
    }

    let mut g = grad(&x, fx)?;
    evaluations += n;
    let mut gnorm = T::nan();
    for iter in 0..opts.max_iters {
        let pg = projected_gradient(&x, &g, lower, upper);
        gnorm = dot(&pg, &pg).sqrt();
        check_finite(gnorm, iter, &x)?;
        if gnorm <= opts.grad_tol {
            return done(x, fx, iter, evaluations, QnStatus::GradientConverged, gnorm);
        }

        // quasi-Newton first, steepest descent as fallback
        let mut accepted = None;
        let attempts: &[bool] = if memory.is_empty() { &[false] } else { &[true, false] };
        for &use_qn in attempts {
            let mut d = if use_qn {
                lbfgs_direction(&pg, &memory)
            } else {
                let biggest = pg.iter().fold(T::zero(), |m, v| m.max(v.abs()));
                pg.iter().map(|&v| -v * opts.initial_move / biggest).collect()
            };
            for (di, &pgi) in d.iter_mut().zip(&pg) {
                if pgi == T::zero() {
                    *di = T::zero();
                }
            }
            if !(dot(&d, &g) < T::zero()) {
                if use_qn {
                    memory.clear();
                    continue;
                }
                break;
            }
            let mut step = T::one();
            for _ in 0..=opts.max_backtracks {
                let mut trial: Vec<T> = x.iter().zip(&d).map(|(&xi, &di)| xi + step * di).collect();
                project(&mut trial, lower, upper);
                let moved: Vec<T> = trial.iter().zip(&x).map(|(&a, &b)| a - b).collect();
                let decrease = dot(&g, &moved);
                if decrease < T::zero() {
                    let ft = check_finite(f(&trial)?, iter, &trial)?;
                    evaluations += 1;
                    if ft <= fx + c1 * decrease && ft < fx {
                        accepted = Some((trial, ft));
                        break;
                    }
                }
                step = step * half;
            }
            if accepted.is_some() {
                break;
            }
            if use_qn {
                memory.clear();
            } else {
                break;
            }
        }

        let Some((x_new, f_new)) = accepted else {
            return done(x, fx, iter, evaluations, QnStatus::LineSearchStalled, gnorm);
        };
        let improvement = fx - f_new;
        let s: Vec<T> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        x = x_new;
        fx = f_new;
        if let Some(target) = opts.stop_below {
            if fx <= target {
                return done(x, fx, iter + 1, evaluations, QnStatus::TargetReached, gnorm);
            }
        }
        if improvement < opts.f_tol {
            return done(x, fx, iter + 1, evaluations, QnStatus::SmallImprovement, gnorm);
        }
        let g_new = grad(&x, fx)?;
        evaluations += n;
        let y: Vec<T> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > lit::<T>(1e-12) * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > T::zero() {
            if memory.len() == opts.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, T::one() / sy));
        }
        g = g_new;
    }
    done(x, fx, opts.max_iters, evaluations, QnStatus::IterationCap, gnorm)
}
