//! Backtracking gradient descent with a limited-memory quasi-Newton phase.

use std::collections::VecDeque;

use crate::oracle::Vector;

pub const ARMIJO: f64 = 1e-4;
pub const BACKTRACK: f64 = 0.5;
pub const MEMORY: usize = 10;
/// Plain gradient steps taken before the quasi-Newton directions start.
pub const WARMUP: usize = 20;

#[derive(Clone, Debug)]
pub struct InnerResult {
    pub y: Vector,
    pub value: f64,
    pub iters: usize,
    pub converged: bool,
}

/// Minimizes `f` from `y0`; `f` returns the value and a (sub)gradient.
///
/// Stops when the gradient norm is at most `tol`, when an accepted step
/// decreases the value by at most `tol² (1 + |f|)`, or when no step along a
/// descent direction decreases `f` at all.
pub fn minimize<F>(f: F, y0: Vector, tol: f64, max_iters: usize) -> InnerResult
where
    F: Fn(&Vector) -> (f64, Vector),
{
    let (mut fy, mut g) = f(&y0);
    let mut y = y0;
    let mut pairs: VecDeque<(Vector, Vector)> = VecDeque::with_capacity(MEMORY);
    let gn = g.norm();
    let mut step = if gn > 0.0 { y.norm().max(1.0) / gn } else { 1.0 };
    for it in 0..max_iters {
        if !(g.norm() > tol) {
            return InnerResult { y, value: fy, iters: it, converged: true };
        }
        let quasi = it >= WARMUP && !pairs.is_empty();
        let mut found = None;
        if quasi {
            let dir = two_loop(&g, &pairs);
            let slope = g.dot(&dir);
            if slope < 0.0 {
                found = search(&f, &y, fy, &dir, slope, 1.0);
            }
            if found.is_none() {
                pairs.clear();
            }
        }
        if found.is_none() {
            found = search(&f, &y, fy, &-&g, -g.norm_squared(), 2.0 * step);
            if let Some((t, ..)) = &found {
                step = *t;
            }
        }
        // At the rounding floor of `f` only the gradient can still guide the step.
        let refined = found.is_none();
        if refined {
            found = refine(&f, &y, fy, &g, &(-&g * step));
        }
        let Some((_, y_new, f_new, g_new)) = found else {
            return InnerResult { y, value: fy, iters: it + 1, converged: true };
        };
        let decrease = fy - f_new;
        let s = &y_new - &y;
        let yk = &g_new - &g;
        let sy = s.dot(&yk);
        if !refined && sy > 1e-12 * s.norm() * yk.norm() {
            if pairs.len() == MEMORY {
                pairs.pop_front();
            }
            pairs.push_back((s, yk));
        }
        let scale = 1.0 + fy.abs();
        y = y_new;
        fy = f_new;
        g = g_new;
        if !refined && decrease <= tol * tol * scale {
            return InnerResult { y, value: fy, iters: it + 1, converged: true };
        }
    }
    let converged = !(g.norm() > tol);
    InnerResult { y, value: fy, iters: max_iters, converged }
}

type Trial = (f64, Vector, f64, Vector);

fn search<F>(f: &F, y: &Vector, fy: f64, dir: &Vector, slope: f64, t0: f64) -> Option<Trial>
where
    F: Fn(&Vector) -> (f64, Vector),
{
    let mut t = t0;
    let floor = f64::EPSILON * (1.0 + y.norm());
    let dn = dir.norm();
    while t * dn > floor * 1e-3 {
        let cand = y + dir * t;
        let (fc, gc) = f(&cand);
        if fc.is_finite() && fc <= fy + ARMIJO * t * slope && fc < fy {
            return Some((t, cand, fc, gc));
        }
        t *= BACKTRACK;
    }
    None
}

/// A step along `dir` that shrinks the gradient norm without raising `f` beyond rounding.
fn refine<F>(f: &F, y: &Vector, fy: f64, g: &Vector, dir: &Vector) -> Option<Trial>
where
    F: Fn(&Vector) -> (f64, Vector),
{
    let gn = g.norm();
    let slack = 8.0 * f64::EPSILON * (1.0 + fy.abs());
    let mut t = 2f64.powi(40);
    for _ in 0..100 {
        let cand = y + dir * t;
        let (fc, gc) = f(&cand);
        if fc.is_finite() && fc <= fy + slack && gc.norm() < 0.9 * gn {
            return Some((t, cand, fc, gc));
        }
        t *= BACKTRACK;
    }
    None
}

fn two_loop(g: &Vector, pairs: &VecDeque<(Vector, Vector)>) -> Vector {
    let mut q = g.clone();
    let mut alphas = Vec::with_capacity(pairs.len());
    for (s, y) in pairs.iter().rev() {
        let rho = 1.0 / s.dot(y);
        let a = rho * s.dot(&q);
        q -= y * a;
        alphas.push((rho, a));
    }
    let (s, y) = pairs.back().expect("nonempty memory");
    let mut r = q * (s.dot(y) / y.norm_squared());
    for ((s, y), (rho, a)) in pairs.iter().zip(alphas.into_iter().rev()) {
        let b = rho * y.dot(&r);
        r += s * (a - b);
    }
    -r
}
