//! Linearly constrained convex problems `min f(x) s.t. Ax = b`.

mod objectives;
pub mod text;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

pub use objectives::{LogCoshObjective, Objective, QuadraticObjective, ToyObjective};

use crate::error::{check_dim, Error, Result};
use crate::rng::GaussianStream;

/// Objective oracle plus the constraint pair `(A, b)`. Immutable once built.
#[derive(Debug, Clone)]
pub struct Problem {
    objective: Arc<dyn Objective>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    seed: Option<u64>,
}

impl Problem {
    pub fn new(objective: Arc<dyn Objective>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = objective.dim();
        if n == 0 || a.nrows() == 0 {
            return Err(Error::InvalidParameter(
                "problem dimensions must be positive".into(),
            ));
        }
        check_dim("constraint matrix columns", n, a.ncols())?;
        check_dim("right-hand side b", a.nrows(), b.len())?;
        Ok(Self {
            objective,
            a,
            b,
            seed: None,
        })
    }

    pub fn quadratic(
        q: DMatrix<f64>,
        k: DVector<f64>,
        a: DMatrix<f64>,
        b: DVector<f64>,
    ) -> Result<Self> {
        check_dim("Q rows", k.len(), q.nrows())?;
        check_dim("Q columns", k.len(), q.ncols())?;
        Self::new(Arc::new(QuadraticObjective::new(q, k)), a, b)
    }

    /// `f(x) = (m x₁ + n x₂ + e x₃)²` subject to `m x₁ − n x₂ + e x₃ = 0`.
    pub fn toy(m: f64, n: f64, e: f64) -> Result<Self> {
        if m == 0.0 || n == 0.0 || e == 0.0 {
            return Err(Error::InvalidParameter(format!(
                "toy coefficients must be nonzero, got ({m}, {n}, {e})"
            )));
        }
        let objective = ToyObjective {
            coefficients: [m, n, e],
        };
        let a = DMatrix::from_row_slice(1, 3, &[m, -n, e]);
        Self::new(Arc::new(objective), a, DVector::zeros(1))
    }

    pub fn log_cosh(shift: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        Self::new(Arc::new(LogCoshObjective { shift }), a, b)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn dim_x(&self) -> usize {
        self.a.ncols()
    }

    pub fn dim_y(&self) -> usize {
        self.a.nrows()
    }

    pub fn objective(&self) -> &dyn Objective {
        self.objective.as_ref()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn check_primal(&self, x: &DVector<f64>) -> Result<()> {
        check_dim("primal vector", self.dim_x(), x.len())
    }

    pub fn check_dual(&self, lambda: &DVector<f64>) -> Result<()> {
        check_dim("dual vector", self.dim_y(), lambda.len())
    }

    /// `Ax − b`.
    pub fn constraint_residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }
}

/// Objective value and gradient at a point, plus access to `v ↦ ∇²f(x)v` there.
#[derive(Debug)]
pub struct ObjectiveEval<'a> {
    pub value: f64,
    pub grad: DVector<f64>,
    point: &'a DVector<f64>,
    objective: &'a dyn Objective,
}

impl ObjectiveEval<'_> {
    pub fn hvp(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("direction", self.point.len(), v.len())?;
        Ok(self.objective.hvp(self.point, v))
    }
}

pub fn eval_objective<'a>(prob: &'a Problem, x: &'a DVector<f64>) -> Result<ObjectiveEval<'a>> {
    prob.check_primal(x)?;
    let objective = prob.objective();
    Ok(ObjectiveEval {
        value: objective.value(x),
        grad: objective.gradient(x),
        point: x,
        objective,
    })
}

/// `‖Ax − b‖₂`.
pub fn feasibility_residual(prob: &Problem, x: &DVector<f64>) -> Result<f64> {
    prob.check_primal(x)?;
    Ok(prob.constraint_residual(x).norm())
}

/// Random QP `min ½xᵀQx + kᵀx s.t. Ax = b` with `Q = HᵀH`.
///
/// Entries of `H` (n×n), `A` (m×n), `k` (n) and `b` (m) are drawn in that order,
/// matrices row by row, from one [`GaussianStream`] seeded with `seed`.
pub fn make_random_qp(seed: u64, m: usize, n: usize) -> Result<Problem> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "random QP needs m ≥ 1 and n ≥ 1, got m = {m}, n = {n}"
        )));
    }
    let mut rng = GaussianStream::new(seed);
    let mut draw = |len: usize| {
        let mut buf = vec![0.0; len];
        rng.fill(&mut buf);
        buf
    };
    let h = DMatrix::from_row_slice(n, n, &draw(n * n));
    let a = DMatrix::from_row_slice(m, n, &draw(m * n));
    let k = DVector::from_vec(draw(n));
    let b = DVector::from_vec(draw(m));

    let q = h.tr_mul(&h);
    let q = (&q + q.transpose()) * 0.5;
    Ok(Problem::quadratic(q, k, a, b)?.with_seed(seed))
}
