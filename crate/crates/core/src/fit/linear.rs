//! One-step fit `z ≈ v/τ + cτ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resample::BootstrapCell;
use crate::scalar::Scalar;

use super::linalg::Matrix;

/// Weighted least-squares estimate of `(v, c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit<T = f64> {
    pub v_hat: T,
    pub c_hat: T,
    /// Covariance of `(v̂, ĉ)`.
    pub cov: Matrix<T>,
    /// Weighted residual sum of squares.
    pub rss: T,
    pub cells: usize,
}

impl<T: Scalar> LinearFit<T> {
    /// Fitted curve at scale `tau`.
    pub fn fitted(&self, tau: T) -> T {
        self.v_hat / tau + self.c_hat * tau
    }

    /// Fitted curve as a function of `x = 1/τ`.
    pub fn fitted_at_inverse(&self, x: T) -> T {
        self.v_hat * x + self.c_hat / x
    }

    /// `d/dx (v x + c/x)` at `x = 1/τ`.
    pub fn slope_at_inverse(&self, x: T) -> T {
        self.v_hat - self.c_hat / (x * x)
    }

    /// `ẑ₁ = v̂ − ĉ`.
    pub fn z1(&self) -> T {
        self.v_hat - self.c_hat
    }

    /// Variance of `ẑ₁`.
    pub fn var_z1(&self) -> T {
        self.cov.quad_form(&[T::one(), -T::one()])
    }
}

/// Fits the one-step cells of `cells` (others are ignored) with weights `1/var_z`.
pub fn fit_onestep<T: Scalar>(cells: &[BootstrapCell<T>]) -> Result<LinearFit<T>> {
    let one: Vec<&BootstrapCell<T>> = cells.iter().filter(|c| c.k() == 1).collect();
    if one.len() < 2 {
        return Err(Error::DegenerateDesign(format!(
            "need at least two one-step cells, got {}",
            one.len()
        )));
    }
    let (mut a11, mut a12, mut a22, mut b1, mut b2) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for c in &one {
        let w = c.var_z.recip();
        if !(w.is_finite() && w > T::zero()) {
            return Err(Error::Domain(format!(
                "cell variance must be positive, got {}",
                c.var_z
            )));
        }
        let t = c.scales.first();
        let x1 = t.recip();
        a11 += w * x1 * x1;
        a12 += w;
        a22 += w * t * t;
        b1 += w * x1 * c.z;
        b2 += w * t * c.z;
    }
    let det = a11 * a22 - a12 * a12;
    if !(det.abs() > T::lit(1e-12) * a11 * a22) {
        return Err(Error::DegenerateDesign(
            "one-step scales are not distinct".into(),
        ));
    }
    let v_hat = (a22 * b1 - a12 * b2) / det;
    let c_hat = (a11 * b2 - a12 * b1) / det;
    let cov = Matrix::from_rows(&[vec![a22 / det, -a12 / det], vec![-a12 / det, a11 / det]]);
    let rss = one.iter().fold(T::zero(), |acc, c| {
        let t = c.scales.first();
        let r = c.z - (v_hat / t + c_hat * t);
        acc + r * r / c.var_z
    });
    Ok(LinearFit {
        v_hat,
        c_hat,
        cov,
        rss,
        cells: one.len(),
    })
}
