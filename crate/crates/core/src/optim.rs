//! Thin wrappers over `argmin` solvers used across the crate.
//!
//! Objectives are plain closures. Every wrapper records the best point it
//! has evaluated, so a solver that aborts (for example on a line-search
//! failure at a kink) still returns its best iterate, flagged as not
//! converged.

use std::cell::RefCell;

use argmin::core::{CostFunction, Error as ArgminError, Executor, Gradient, State, TerminationReason, TerminationStatus};
use argmin::solver::goldensectionsearch::GoldenSectionSearch;
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::neldermead::NelderMead;
use argmin::solver::quasinewton::LBFGS;

/// Outcome of a local minimisation.
#[derive(Debug, Clone)]
pub struct MinResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub iters: u64,
    pub converged: bool,
}

/// Options for [`lbfgs`].
#[derive(Debug, Clone, Copy)]
pub struct LbfgsOptions {
    pub max_iters: u64,
    pub memory: usize,
    pub tol_grad: f64,
    pub tol_cost: f64,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self { max_iters: 2000, memory: 10, tol_grad: 1e-12, tol_cost: 1e-15 }
    }
}

struct Best {
    x: Vec<f64>,
    f: f64,
}

impl Best {
    fn offer(&mut self, x: &[f64], f: f64) {
        if f.is_finite() && (f < self.f || !self.f.is_finite()) {
            self.f = f;
            self.x.clear();
            self.x.extend_from_slice(x);
        }
    }
}

struct Smooth<'a, F> {
    f: &'a F,
    cache: RefCell<Option<(Vec<f64>, f64, Vec<f64>)>>,
    best: RefCell<Best>,
}

impl<F: Fn(&[f64]) -> (f64, Vec<f64>)> Smooth<'_, F> {
    fn eval(&self, x: &[f64]) -> (f64, Vec<f64>) {
        if let Some((cx, cf, cg)) = self.cache.borrow().as_ref() {
            if cx.as_slice() == x {
                return (*cf, cg.clone());
            }
        }
        let (v, g) = (self.f)(x);
        self.best.borrow_mut().offer(x, v);
        *self.cache.borrow_mut() = Some((x.to_vec(), v, g.clone()));
        (v, g)
    }
}

impl<F: Fn(&[f64]) -> (f64, Vec<f64>)> CostFunction for Smooth<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;
    fn cost(&self, x: &Vec<f64>) -> Result<f64, ArgminError> {
        let v = self.eval(x).0;
        Ok(if v.is_finite() { v } else { f64::MAX })
    }
}

impl<F: Fn(&[f64]) -> (f64, Vec<f64>)> Gradient for Smooth<'_, F> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;
    fn gradient(&self, x: &Vec<f64>) -> Result<Vec<f64>, ArgminError> {
        Ok(self.eval(x).1)
    }
}

fn is_converged(status: &TerminationStatus) -> bool {
    matches!(
        status,
        TerminationStatus::Terminated(TerminationReason::SolverConverged)
            | TerminationStatus::Terminated(TerminationReason::TargetCostReached)
    )
}

/// Limited-memory BFGS on a smooth objective returning `(value, gradient)`.
pub fn lbfgs<F>(f: &F, x0: &[f64], opts: LbfgsOptions) -> MinResult
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let (f0, _) = f(x0);
    let problem = Smooth {
        f,
        cache: RefCell::new(None),
        best: RefCell::new(Best { x: x0.to_vec(), f: f0 }),
    };
    if x0.is_empty() {
        return MinResult { x: vec![], f: f0, iters: 0, converged: true };
    }
    let solver = LBFGS::new(MoreThuenteLineSearch::new(), opts.memory)
        .with_tolerance_grad(opts.tol_grad)
        .and_then(|s| s.with_tolerance_cost(opts.tol_cost))
        .expect("valid L-BFGS tolerances");
    let run = Executor::new(problem, solver)
        .configure(|st| st.param(x0.to_vec()).max_iters(opts.max_iters))
        .run();
    match run {
        Ok(res) => {
            let iters = res.state().get_iter();
            let converged = is_converged(res.state().get_termination_status());
            let best = res.problem.problem.as_ref().map(|p| {
                let b = p.best.borrow();
                (b.x.clone(), b.f)
            });
            let (x, fv) = best.unwrap_or_else(|| (x0.to_vec(), f0));
            MinResult { x, f: fv, iters, converged }
        }
        Err(_) => MinResult { x: x0.to_vec(), f: f0, iters: 0, converged: false },
    }
}

/// Limited-memory BFGS that keeps the best iterate even when the solver aborts.
pub fn lbfgs_robust<F>(f: &F, x0: &[f64], opts: LbfgsOptions) -> MinResult
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let best = RefCell::new(Best { x: x0.to_vec(), f: f(x0).0 });
    let tracked = |x: &[f64]| {
        let (v, g) = f(x);
        best.borrow_mut().offer(x, v);
        (v, g)
    };
    let res = lbfgs(&tracked, x0, opts);
    let b = best.into_inner();
    if b.f < res.f {
        MinResult { x: b.x, f: b.f, iters: res.iters, converged: false }
    } else {
        res
    }
}

/// Central finite-difference gradient.
pub fn numeric_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|k| {
            let orig = xp[k];
            xp[k] = orig + h;
            let fp = f(&xp);
            xp[k] = orig - h;
            let fm = f(&xp);
            xp[k] = orig;
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

struct Plain<'a, F> {
    f: &'a F,
}

impl<F: Fn(&[f64]) -> f64> CostFunction for Plain<'_, F> {
    type Param = Vec<f64>;
    type Output = f64;
    fn cost(&self, x: &Vec<f64>) -> Result<f64, ArgminError> {
        let v = (self.f)(x);
        Ok(if v.is_finite() { v } else { f64::MAX })
    }
}

/// Nelder-Mead simplex search from `x0` with initial edge length `step`.
pub fn nelder_mead<F>(f: &F, x0: &[f64], step: f64, max_iters: u64, sd_tol: f64) -> MinResult
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let f0 = f(x0);
    if n == 0 {
        return MinResult { x: vec![], f: f0, iters: 0, converged: true };
    }
    let mut simplex = vec![x0.to_vec()];
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += step;
        simplex.push(v);
    }
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(sd_tol)
        .expect("valid Nelder-Mead tolerance");
    match Executor::new(Plain { f }, solver)
        .configure(|st| st.max_iters(max_iters))
        .run()
    {
        Ok(res) => {
            let st = res.state();
            let x = st.get_best_param().cloned().unwrap_or_else(|| x0.to_vec());
            let fv = st.get_best_cost();
            if fv <= f0 {
                MinResult { x, f: fv, iters: st.get_iter(), converged: is_converged(st.get_termination_status()) }
            } else {
                MinResult { x: x0.to_vec(), f: f0, iters: st.get_iter(), converged: false }
            }
        }
        Err(_) => MinResult { x: x0.to_vec(), f: f0, iters: 0, converged: false },
    }
}

struct Scalar<'a, F> {
    f: &'a F,
}

impl<F: Fn(f64) -> f64> CostFunction for Scalar<'_, F> {
    type Param = f64;
    type Output = f64;
    fn cost(&self, x: &f64) -> Result<f64, ArgminError> {
        let v = (self.f)(*x);
        Ok(if v.is_finite() { v } else { f64::MAX })
    }
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let init = 0.5 * (a + b);
    let solver = GoldenSectionSearch::new(a, b)
        .and_then(|s| s.with_tolerance(tol))
        .expect("valid bracket");
    match Executor::new(Scalar { f }, solver)
        .configure(|st| st.param(init).max_iters(500))
        .run()
    {
        Ok(res) => {
            let x = res.state().get_best_param().copied().unwrap_or(init);
            (x, f(x))
        }
        Err(_) => (init, f(init)),
    }
}

/// Global maximisation of a scalar function on `[a, b]`: a uniform grid of
/// `grid` points locates the best cell, and golden-section refines it.
pub fn maximize_1d<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, grid: usize, tol: f64) -> (f64, f64) {
    let grid = grid.max(3);
    let h = (b - a) / (grid - 1) as f64;
    let mut best_k = 0;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..grid {
        let v = f(a + h * k as f64);
        if v > best_v {
            best_v = v;
            best_k = k;
        }
    }
    let lo = (a + h * (best_k as f64 - 1.0)).max(a);
    let hi = (a + h * (best_k as f64 + 1.0)).min(b);
    let neg = |x: f64| -f(x);
    let (x, nv) = golden_section(&neg, lo, hi, tol);
    if -nv >= best_v {
        (x, -nv)
    } else {
        (a + h * best_k as f64, best_v)
    }
}
