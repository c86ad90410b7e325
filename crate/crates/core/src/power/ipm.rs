//! Barrier interior-point method for small dense problems
//!
//! ```text
//! minimize f0(x)  subject to  f_i(x) <= 0,  i = 1..m
//! ```
//!
//! with every `f_i` convex and twice differentiable. Each outer step
//! minimizes `t f0 - Σ ln(-f_i)` by damped Newton iterations, then raises
//! `t`. At a centered point `λ_i = 1/(-t f_i)` are dual feasible with
//! duality gap `m/t`.

use nalgebra::{DMatrix, DVector};

use crate::error::{DamError, Result};
use crate::scalar::Real;

pub trait ConvexProgram<T: Real> {
    fn dim(&self) -> usize;
    fn num_constraints(&self) -> usize;
    /// `None` outside the objective's domain.
    fn objective(&self, x: &DVector<T>) -> Option<T>;
    fn objective_gradient(&self, x: &DVector<T>) -> DVector<T>;
    fn add_objective_hessian(&self, x: &DVector<T>, h: &mut DMatrix<T>);
    fn constraint(&self, i: usize, x: &DVector<T>) -> T;
    fn constraint_gradient(&self, i: usize, x: &DVector<T>) -> DVector<T>;
    /// Adds `weight * ∇²f_i(x)` to `h`.
    fn add_constraint_hessian(&self, i: usize, x: &DVector<T>, weight: T, h: &mut DMatrix<T>);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpmSettings<T: Real> {
    /// Growth factor of `t` between centering steps.
    pub mu: T,
    /// Armijo fraction of the Newton line search.
    pub alpha: T,
    /// Backtracking factor.
    pub beta: T,
    /// Stop once the duality gap `m/t` is below this.
    pub gap_tol: T,
    /// Centering stops once half the squared Newton decrement is below this.
    pub newton_tol: T,
    /// Cap on the Newton steps of one centering.
    pub max_centering: usize,
    /// Cap on the total number of Newton steps.
    pub max_iter: usize,
}

impl<T: Real> Default for IpmSettings<T> {
    fn default() -> Self {
        IpmSettings {
            mu: T::lit(20.0),
            alpha: T::lit(0.01),
            beta: T::lit(0.5),
            gap_tol: T::lit(1e-9),
            newton_tol: T::lit(1e-9),
            max_centering: 50,
            max_iter: 500,
        }
    }
}

/// Components of the KKT residual at a returned point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResidual<T: Real> {
    /// `‖∇f0 + Σ λ_i ∇f_i‖_∞`.
    pub stationarity: T,
    /// `max_i |λ_i f_i|`.
    pub complementarity: T,
    /// `max(0, max_i f_i)`.
    pub primal: T,
}

impl<T: Real> KktResidual<T> {
    pub fn max(&self) -> T {
        self.stationarity.max(self.complementarity).max(self.primal)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpmSolution<T: Real> {
    pub x: DVector<T>,
    pub lambda: DVector<T>,
    pub objective: T,
    /// Newton steps taken.
    pub iterations: usize,
    pub kkt: KktResidual<T>,
}

fn strictly_feasible<T: Real, P: ConvexProgram<T> + ?Sized>(p: &P, x: &DVector<T>) -> bool {
    p.objective(x).is_some() && (0..p.num_constraints()).all(|i| p.constraint(i, x) < T::zero())
}

/// `t f0(x) - Σ ln(-f_i(x))`, `None` outside the interior.
fn barrier<T: Real, P: ConvexProgram<T> + ?Sized>(p: &P, x: &DVector<T>, t: T) -> Option<T> {
    let mut v = t * p.objective(x)?;
    for i in 0..p.num_constraints() {
        let f = p.constraint(i, x);
        if !(f < T::zero()) {
            return None;
        }
        v -= (-f).ln();
    }
    Some(v)
}

fn kkt<T: Real, P: ConvexProgram<T> + ?Sized>(
    p: &P,
    x: &DVector<T>,
    lambda: &DVector<T>,
) -> KktResidual<T> {
    let mut r = p.objective_gradient(x);
    let mut complementarity = T::zero();
    let mut primal = T::zero();
    for i in 0..p.num_constraints() {
        let f = p.constraint(i, x);
        r.axpy(lambda[i], &p.constraint_gradient(i, x), T::one());
        complementarity = complementarity.max((lambda[i] * f).abs());
        primal = primal.max(f);
    }
    KktResidual {
        stationarity: r.amax(),
        complementarity,
        primal,
    }
}

fn newton_direction<T: Real>(h: DMatrix<T>, g: &DVector<T>) -> Option<DVector<T>> {
    match h.clone().cholesky() {
        Some(c) => Some(-c.solve(g)),
        None => h.lu().solve(g).map(|d| -d),
    }
}

/// Least-squares multipliers on the constraints that are nearly active,
/// `-f_i <= 1/√t`, and zero elsewhere. Near the end of the central path the
/// barrier estimates `1/(-t f_i)` carry the centering error, which this
/// removes.
fn refine_multipliers<T: Real, P: ConvexProgram<T> + ?Sized>(
    p: &P,
    x: &DVector<T>,
    t: T,
) -> DVector<T> {
    let m = p.num_constraints();
    let threshold = T::one() / t.sqrt();
    let active: Vec<usize> = (0..m)
        .filter(|&i| -p.constraint(i, x) <= threshold)
        .collect();
    let mut lambda = DVector::zeros(m);
    if active.is_empty() {
        return lambda;
    }
    let cols: Vec<DVector<T>> = active
        .iter()
        .map(|&i| p.constraint_gradient(i, x))
        .collect();
    let a = DMatrix::from_columns(&cols);
    let rhs = -p.objective_gradient(x);
    let eps = T::default_epsilon() * T::lit(100.0);
    if let Ok(sol) = a.svd(true, true).solve(&rhs, eps) {
        for (j, &i) in active.iter().enumerate() {
            lambda[i] = sol[j].max(T::zero());
        }
    }
    lambda
}

/// Solves from a strictly feasible starting point.
pub fn solve<T: Real, P: ConvexProgram<T> + ?Sized>(
    p: &P,
    x0: DVector<T>,
    settings: &IpmSettings<T>,
) -> Result<IpmSolution<T>> {
    let n = p.dim();
    let m = p.num_constraints();
    if x0.len() != n {
        return Err(DamError::DimensionMismatch("interior-point start".into()));
    }
    if !strictly_feasible(p, &x0) {
        return Err(DamError::InfeasibleLocalPoint(
            "interior-point start is not strictly feasible".into(),
        ));
    }
    let mc = T::count(m.max(1));
    let mut x = x0;
    let mut t = T::one();
    let mut steps = 0;
    loop {
        // Centering.
        for _ in 0..settings.max_centering {
            if steps >= settings.max_iter {
                let lambda = DVector::from_fn(m, |i, _| T::one() / (-t * p.constraint(i, &x)));
                return Err(DamError::SolverNonConvergence {
                    iterations: steps,
                    residual: kkt(p, &x, &lambda).max().as_f64(),
                });
            }
            steps += 1;
            let mut g = p.objective_gradient(&x) * t;
            let mut h = DMatrix::<T>::zeros(n, n);
            p.add_objective_hessian(&x, &mut h);
            h *= t;
            for i in 0..m {
                let neg_f = -p.constraint(i, &x);
                let gi = p.constraint_gradient(i, &x);
                p.add_constraint_hessian(i, &x, T::one() / neg_f, &mut h);
                h.ger(T::one() / (neg_f * neg_f), &gi, &gi, T::one());
                g.axpy(T::one() / neg_f, &gi, T::one());
            }
            let Some(dx) = newton_direction(h, &g) else {
                break;
            };
            let slope = g.dot(&dx);
            if -slope / T::lit(2.0) <= settings.newton_tol || !(slope < T::zero()) {
                break;
            }
            let psi0 = barrier(p, &x, t).expect("iterate stays interior");
            let mut s = T::one();
            let mut accepted = false;
            while s > T::lit(1e-16) {
                let xn = &x + &dx * s;
                if xn == x {
                    break;
                }
                if let Some(psi) = barrier(p, &xn, t) {
                    if psi <= psi0 + settings.alpha * s * slope {
                        x = xn;
                        accepted = true;
                        break;
                    }
                }
                s *= settings.beta;
            }
            if !accepted {
                // No further progress is representable at this t.
                break;
            }
        }
        if mc / t <= settings.gap_tol {
            break;
        }
        t *= settings.mu;
    }
    let barrier_lambda = DVector::from_fn(m, |i, _| T::one() / (-t * p.constraint(i, &x)));
    let refined = refine_multipliers(p, &x, t);
    let (lambda, res) = {
        let a = kkt(p, &x, &barrier_lambda);
        let b = kkt(p, &x, &refined);
        if b.max() < a.max() {
            (refined, b)
        } else {
            (barrier_lambda, a)
        }
    };
    Ok(IpmSolution {
        objective: p.objective(&x).expect("iterate stays interior"),
        kkt: res,
        x,
        lambda,
        iterations: steps,
    })
}
