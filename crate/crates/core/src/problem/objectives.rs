use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};

/// Smooth convex objective exposed through first- and second-order oracles.
///
/// The Hessian is only ever needed in products with a direction, so no dense
/// Hessian is part of the contract.
pub trait Objective: Debug + Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    /// `∇²f(x) v`.
    fn hvp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64>;

    /// `(Q, k)` such that `f(x) = ½ xᵀQx + kᵀx`, when the objective is exactly quadratic.
    fn quadratic_form(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        None
    }

    /// Kind tag and body for the plain-text problem format.
    fn text_body(&self) -> (&'static str, String);
}

/// `f(x) = ½ xᵀQx + kᵀx` with `Q` symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    pub q: DMatrix<f64>,
    pub k: DVector<f64>,
}

impl QuadraticObjective {
    pub fn new(q: DMatrix<f64>, k: DVector<f64>) -> Self {
        Self { q, k }
    }
}

impl Objective for QuadraticObjective {
    fn dim(&self) -> usize {
        self.k.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.q * x)) + self.k.dot(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.q * x + &self.k
    }

    fn hvp(&self, _x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        &self.q * v
    }

    fn quadratic_form(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        Some((self.q.clone(), self.k.clone()))
    }

    fn text_body(&self) -> (&'static str, String) {
        let mut body = String::new();
        super::text::write_matrix(&mut body, "Q", &self.q);
        super::text::write_vector(&mut body, "k", &self.k);
        ("quadratic", body)
    }
}

/// `f(x) = (w₁x₁ + w₂x₂ + w₃x₃)²`, a rank-one convex quadratic in three variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyObjective {
    pub coefficients: [f64; 3],
}

impl ToyObjective {
    fn inner(&self, x: &DVector<f64>) -> f64 {
        self.coefficients
            .iter()
            .zip(x.iter())
            .map(|(w, xi)| w * xi)
            .sum()
    }

    fn weights(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coefficients)
    }
}

impl Objective for ToyObjective {
    fn dim(&self) -> usize {
        3
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        self.inner(x).powi(2)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.weights() * (2.0 * self.inner(x))
    }

    fn hvp(&self, _x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        self.weights() * (2.0 * self.inner(v))
    }

    fn quadratic_form(&self) -> Option<(DMatrix<f64>, DVector<f64>)> {
        let w = self.weights();
        Some((&w * w.transpose() * 2.0, DVector::zeros(3)))
    }

    fn text_body(&self) -> (&'static str, String) {
        let mut body = String::new();
        super::text::write_vector(&mut body, "coefficients", &self.weights());
        ("toy", body)
    }
}

/// `f(x) = Σᵢ ln cosh(xᵢ − dᵢ)`: smooth, convex, not strongly convex, not quadratic.
#[derive(Debug, Clone)]
pub struct LogCoshObjective {
    pub shift: DVector<f64>,
}

fn ln_cosh(y: f64) -> f64 {
    let a = y.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl Objective for LogCoshObjective {
    fn dim(&self) -> usize {
        self.shift.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        x.iter().zip(self.shift.iter()).map(|(xi, di)| ln_cosh(xi - di)).sum()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        x.zip_map(&self.shift, |xi, di| (xi - di).tanh())
    }

    fn hvp(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let curvature = x.zip_map(&self.shift, |xi, di| {
            let th = (xi - di).tanh();
            1.0 - th * th
        });
        curvature.component_mul(v)
    }

    fn text_body(&self) -> (&'static str, String) {
        let mut body = String::new();
        super::text::write_vector(&mut body, "shift", &self.shift);
        ("logcosh", body)
    }
}
