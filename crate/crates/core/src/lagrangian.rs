//! The Tikhonov-regularized Lagrangian
//!
//! ```text
//! L_t(x, λ) = f(x) + ⟨Ax − b, λ⟩ + (c / 2tᵖ)(‖x‖² − ‖λ‖²)
//! ```
//!
//! its unique saddle point `(x_t, λ_t)` for each `t > 0`, the velocity of that
//! saddle path, and the minimal-norm primal-dual solution `Proj_Ω 0` it tends
//! to as `t → ∞`. Norms on the product space are Euclidean:
//! `‖(x, λ)‖² = ‖x‖² + ‖λ‖²`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::Problem;

pub const KKT_TOLERANCE: f64 = 1e-10;
pub const NEWTON_MAX_ITERATIONS: usize = 50;

/// Tikhonov weight `c / tᵖ` with `c > 0`, `0 < p < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationSpec {
    c: f64,
    p: f64,
}

impl RegularizationSpec {
    pub fn new(c: f64, p: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("c must be > 0, got {c}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in (0, 1), got {p}"
            )));
        }
        Ok(Self { c, p })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `c / tᵖ`.
    pub fn weight(&self, t: f64) -> f64 {
        self.c * t.powf(-self.p)
    }

    /// `d/dt (c / tᵖ) = −c p t^{−p−1}`.
    pub fn weight_rate(&self, t: f64) -> f64 {
        -self.c * self.p * t.powf(-self.p - 1.0)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("time must be positive, got t = {t}")))
    }
}

fn check_pair(prob: &Problem, x: &DVector<f64>, lambda: &DVector<f64>) -> Result<()> {
    prob.check_primal(x)?;
    prob.check_dual(lambda)
}

/// `L(x, λ) = f(x) + ⟨λ, Ax − b⟩`, the unregularized Lagrangian.
pub fn lagrangian(prob: &Problem, x: &DVector<f64>, lambda: &DVector<f64>) -> Result<f64> {
    check_pair(prob, x, lambda)?;
    Ok(prob.objective().value(x) + prob.constraint_residual(x).dot(lambda))
}

pub fn lagrangian_value(
    prob: &Problem,
    reg: &RegularizationSpec,
    t: f64,
    x: &DVector<f64>,
    lambda: &DVector<f64>,
) -> Result<f64> {
    check_time(t)?;
    let base = lagrangian(prob, x, lambda)?;
    Ok(base + 0.5 * reg.weight(t) * (x.norm_squared() - lambda.norm_squared()))
}

/// `∇_x L_t = ∇f(x) + Aᵀλ + (c/tᵖ)x`.
pub fn grad_x_lt(
    prob: &Problem,
    reg: &RegularizationSpec,
    t: f64,
    x: &DVector<f64>,
    lambda: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_time(t)?;
    check_pair(prob, x, lambda)?;
    let mut g = prob.objective().gradient(x);
    g.gemv_tr(1.0, prob.a(), lambda, 1.0);
    g.axpy(reg.weight(t), x, 1.0);
    Ok(g)
}

/// `∇_λ L_t = Ax − b − (c/tᵖ)λ`.
pub fn grad_lambda_lt(
    prob: &Problem,
    reg: &RegularizationSpec,
    t: f64,
    x: &DVector<f64>,
    lambda: &DVector<f64>,
) -> Result<DVector<f64>> {
    check_time(t)?;
    check_pair(prob, x, lambda)?;
    let mut g = prob.constraint_residual(x);
    g.axpy(-reg.weight(t), lambda, 1.0);
    Ok(g)
}

/// Saddle point of `L_t` at one time, with the saddle-path velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddlePoint {
    pub t: f64,
    pub x_t: DVector<f64>,
    pub lambda_t: DVector<f64>,
    pub xdot_t: DVector<f64>,
    pub lambdadot_t: DVector<f64>,
    /// `‖∇_x L_t(x_t, λ_t)‖ + ‖∇_λ L_t(x_t, λ_t)‖`.
    pub kkt_residual: f64,
}

impl SaddlePoint {
    /// `‖(x_t, λ_t)‖`.
    pub fn norm(&self) -> f64 {
        (self.x_t.norm_squared() + self.lambda_t.norm_squared()).sqrt()
    }

    /// `‖(ẋ_t, λ̇_t)‖`.
    pub fn velocity_norm(&self) -> f64 {
        (self.xdot_t.norm_squared() + self.lambdadot_t.norm_squared()).sqrt()
    }
}

fn stack(x: &DVector<f64>, lambda: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let mut z = DVector::zeros(n + lambda.len());
    z.rows_mut(0, n).copy_from(x);
    z.rows_mut(n, lambda.len()).copy_from(lambda);
    z
}

fn split(z: &DVector<f64>, n: usize) -> (DVector<f64>, DVector<f64>) {
    (z.rows(0, n).into_owned(), z.rows(n, z.len() - n).into_owned())
}

/// `[[H + εI, Aᵀ], [A, −εI]]`.
fn saddle_matrix(prob: &Problem, hessian: &DMatrix<f64>, eps: f64) -> DMatrix<f64> {
    let (n, m) = (prob.dim_x(), prob.dim_y());
    let mut k = DMatrix::zeros(n + m, n + m);
    k.view_mut((0, 0), (n, n)).copy_from(hessian);
    for i in 0..n {
        k[(i, i)] += eps;
    }
    k.view_mut((0, n), (n, m)).copy_from(&prob.a().transpose());
    k.view_mut((n, 0), (m, n)).copy_from(prob.a());
    for i in 0..m {
        k[(n + i, n + i)] = -eps;
    }
    k
}

/// Dense Hessian at `x` assembled column by column from Hessian-vector products.
fn hessian_from_hvp(prob: &Problem, x: &DVector<f64>) -> DMatrix<f64> {
    let n = prob.dim_x();
    let mut h = DMatrix::zeros(n, n);
    let mut e = DVector::zeros(n);
    for j in 0..n {
        e[j] = 1.0;
        h.set_column(j, &prob.objective().hvp(x, &e));
        e[j] = 0.0;
    }
    (&h + h.transpose()) * 0.5
}

fn kkt_t_residual(
    prob: &Problem,
    reg: &RegularizationSpec,
    t: f64,
    x: &DVector<f64>,
    lambda: &DVector<f64>,
) -> Result<(DVector<f64>, f64)> {
    let gx = grad_x_lt(prob, reg, t, x, lambda)?;
    let gl = grad_lambda_lt(prob, reg, t, x, lambda)?;
    let measure = gx.norm() + gl.norm();
    Ok((stack(&gx, &gl), measure))
}

/// Solve `K z = rhs` by LU with one step of iterative refinement.
fn solve_refined(k: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let lu = k.clone().lu();
    let mut z = lu
        .solve(rhs)
        .ok_or_else(|| Error::Singular("saddle system matrix".into()))?;
    let r = rhs - k * &z;
    if let Some(dz) = lu.solve(&r) {
        z += dz;
    }
    Ok(z)
}

/// Unique saddle point of `L_t`.
///
/// Quadratic objectives solve the `(n+m)×(n+m)` system
/// `[[Q + εI, Aᵀ], [A, −εI]] (x; λ) = (−k; b)` with `ε = c/tᵖ` directly. Other
/// objectives run damped Newton on `(∇_x L_t, ∇_λ L_t) = 0`. The velocity
/// solves the same matrix against `(c p t^{−p−1} x_t; −c p t^{−p−1} λ_t)`.
pub fn saddle_point(prob: &Problem, reg: &RegularizationSpec, t: f64) -> Result<SaddlePoint> {
    saddle_point_from(prob, reg, t, None)
}

/// Like [`saddle_point`], with an optional Newton starting point.
pub fn saddle_point_from(
    prob: &Problem,
    reg: &RegularizationSpec,
    t: f64,
    warm_start: Option<(&DVector<f64>, &DVector<f64>)>,
) -> Result<SaddlePoint> {
    check_time(t)?;
    let n = prob.dim_x();
    let eps = reg.weight(t);

    let (x_t, lambda_t, kmat) = match prob.objective().quadratic_form() {
        Some((q, k)) => {
            let kmat = saddle_matrix(prob, &q, eps);
            let rhs = stack(&(-k), prob.b());
            let z = solve_refined(&kmat, &rhs)?;
            let (x, l) = split(&z, n);
            (x, l, kmat)
        }
        None => {
            let (x, l) = newton_saddle(prob, reg, t, warm_start)?;
            let h = hessian_from_hvp(prob, &x);
            let kmat = saddle_matrix(prob, &h, eps);
            (x, l, kmat)
        }
    };

    let rate = -reg.weight_rate(t);
    let rhs = stack(&(&x_t * rate), &(&lambda_t * -rate));
    let (xdot_t, lambdadot_t) = split(&solve_refined(&kmat, &rhs)?, n);
    let (_, kkt_residual) = kkt_t_residual(prob, reg, t, &x_t, &lambda_t)?;

    Ok(SaddlePoint {
        t,
        x_t,
        lambda_t,
        xdot_t,
        lambdadot_t,
        kkt_residual,
    })
}

fn newton_saddle(
    prob: &Problem,
    reg: &RegularizationSpec,
    t: f64,
    warm_start: Option<(&DVector<f64>, &DVector<f64>)>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = prob.dim_x();
    let eps = reg.weight(t);
    let (mut x, mut lambda) = match warm_start {
        Some((x, l)) => {
            check_pair(prob, x, l)?;
            (x.clone(), l.clone())
        }
        None => (DVector::zeros(n), DVector::zeros(prob.dim_y())),
    };
    let (mut res, mut measure) = kkt_t_residual(prob, reg, t, &x, &lambda)?;
    for _ in 0..NEWTON_MAX_ITERATIONS {
        let scale = 1.0 + (x.norm_squared() + lambda.norm_squared()).sqrt();
        if measure <= 1e-2 * KKT_TOLERANCE * scale {
            return Ok((x, lambda));
        }
        let kmat = saddle_matrix(prob, &hessian_from_hvp(prob, &x), eps);
        let step = kmat
            .lu()
            .solve(&(-&res))
            .ok_or_else(|| Error::Singular("Newton saddle system".into()))?;
        let (dx, dl) = split(&step, n);

        let norm0 = res.norm();
        let mut damping = 1.0;
        loop {
            let xn = &x + &dx * damping;
            let ln = &lambda + &dl * damping;
            let (rn, mn) = kkt_t_residual(prob, reg, t, &xn, &ln)?;
            if rn.norm() <= (1.0 - 1e-4 * damping) * norm0 || damping < 1e-10 {
                x = xn;
                lambda = ln;
                res = rn;
                measure = mn;
                break;
            }
            damping *= 0.5;
        }
    }
    let scale = 1.0 + (x.norm_squared() + lambda.norm_squared()).sqrt();
    if measure <= KKT_TOLERANCE * scale {
        Ok((x, lambda))
    } else {
        Err(Error::SolverNonConvergence {
            iterations: NEWTON_MAX_ITERATIONS,
            residual: measure,
        })
    }
}

/// Saddle points along a time grid. Newton solves are warm-started from the
/// previous grid point.
pub fn saddle_path(
    prob: &Problem,
    reg: &RegularizationSpec,
    times: &[f64],
) -> Result<Vec<SaddlePoint>> {
    let mut out: Vec<SaddlePoint> = Vec::with_capacity(times.len());
    for &t in times {
        let warm = out.last().map(|s| (&s.x_t, &s.lambda_t));
        let sp = saddle_point_from(prob, reg, t, warm)?;
        out.push(sp);
    }
    Ok(out)
}

/// Minimal-norm KKT pair `(x*, λ*) = Proj_Ω 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinNormSolution {
    pub x_star: DVector<f64>,
    pub lambda_star: DVector<f64>,
    /// `‖∇f(x*) + Aᵀλ*‖ + ‖Ax* − b‖`.
    pub kkt_residual: f64,
}

impl MinNormSolution {
    pub fn norm(&self) -> f64 {
        (self.x_star.norm_squared() + self.lambda_star.norm_squared()).sqrt()
    }

    /// Wraps an analytically known minimal-norm pair after checking it is a KKT point.
    pub fn from_known(prob: &Problem, x: DVector<f64>, lambda: DVector<f64>) -> Result<Self> {
        let kkt_residual = kkt_residual(prob, &x, &lambda)?;
        let scale = 1.0 + (x.norm_squared() + lambda.norm_squared()).sqrt();
        if kkt_residual > KKT_TOLERANCE * scale {
            return Err(Error::Infeasible {
                residual: kkt_residual,
            });
        }
        Ok(Self {
            x_star: x,
            lambda_star: lambda,
            kkt_residual,
        })
    }
}

/// `‖∇f(x) + Aᵀλ‖ + ‖Ax − b‖`.
pub fn kkt_residual(prob: &Problem, x: &DVector<f64>, lambda: &DVector<f64>) -> Result<f64> {
    check_pair(prob, x, lambda)?;
    let mut g = prob.objective().gradient(x);
    g.gemv_tr(1.0, prob.a(), lambda, 1.0);
    Ok(g.norm() + prob.constraint_residual(x).norm())
}

/// Minimal-norm solution for quadratic objectives.
///
/// For `f = ½xᵀQx + kᵀx` the KKT set is the affine solution set of
/// `[[Q, Aᵀ], [A, 0]] (x; λ) = (−k; b)`; its point nearest the origin is the
/// pseudoinverse solution, computed from an SVD with singular values below
/// `1e-12 · σ_max · (n+m)` treated as zero.
pub fn min_norm_solution(prob: &Problem) -> Result<MinNormSolution> {
    let (q, k) = prob
        .objective()
        .quadratic_form()
        .ok_or(Error::NotQuadratic("min_norm_solution"))?;
    let n = prob.dim_x();
    let kkt = saddle_matrix(prob, &q, 0.0);
    let rhs = stack(&(-k), prob.b());

    let svd = kkt.clone().svd(true, true);
    let cutoff = 1e-12 * svd.singular_values.max() * (kkt.nrows() as f64);
    let solve = |r: &DVector<f64>| {
        svd.solve(r, cutoff)
            .map_err(|e| Error::Singular(e.to_string()))
    };
    let mut z = solve(&rhs)?;
    let r = &rhs - &kkt * &z;
    z += solve(&r)?;

    let lsq_residual = (&rhs - &kkt * &z).norm();
    if lsq_residual > 1e-8 * (1.0 + rhs.norm()) {
        return Err(Error::Infeasible {
            residual: lsq_residual,
        });
    }
    let (x_star, lambda_star) = split(&z, n);
    let kkt_residual = kkt_residual(prob, &x_star, &lambda_star)?;
    Ok(MinNormSolution {
        x_star,
        lambda_star,
        kkt_residual,
    })
}
