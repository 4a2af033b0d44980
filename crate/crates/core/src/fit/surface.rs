//! Regression surfaces `ζ₂` and `ζ₃` for multistep z-values.

use crate::error::{Error, Result};
use crate::resample::ScaleTuple;
use crate::scalar::Scalar;

use super::features::{scale_features, ScaleFeatures};

/// Smallest admissible `|γ₁|`; both surfaces divide by it.
pub const GAMMA1_FLOOR: f64 = 1e-6;

fn check_gamma1<T: Scalar>(g1: T) -> Result<()> {
    if !(g1.abs() >= T::lit(GAMMA1_FLOOR)) {
        return Err(Error::NearSingularGamma {
            value: g1.to_f64_lossy(),
        });
    }
    Ok(())
}

/// `ζ₂ = s₁γ₁(1 + s₂γ₃) − (γ₂ + s₂γ₃)/(s₁γ₁)`.
///
/// Defined for one- and two-step cells.
pub fn zeta2<T: Scalar>(gamma: &[T; 3], scales: &ScaleTuple<T>) -> Result<T> {
    if scales.k() > 2 {
        return Err(Error::Usage(
            "zeta2 takes cells with at most two steps".into(),
        ));
    }
    check_gamma1(gamma[0])?;
    Ok(zeta2_with(gamma, &scale_features(scales)))
}

fn zeta2_with<T: Scalar>(g: &[T; 3], f: &ScaleFeatures<T>) -> T {
    let a = f.s1 * g[0];
    a * (T::one() + f.s2 * g[2]) - (g[1] + f.s2 * g[2]) / a
}

/// `∂ζ₂/∂γ`.
pub fn zeta2_gradient<T: Scalar>(g: &[T; 3], f: &ScaleFeatures<T>) -> [T; 3] {
    let a = f.s1 * g[0];
    let q = g[1] + f.s2 * g[2];
    [
        f.s1 * (T::one() + f.s2 * g[2]) + q / (a * g[0]),
        -a.recip(),
        a * f.s2 - f.s2 / a,
    ]
}

/// ```text
/// ζ₃ = γ₁s₁(1 + γ₃s₂ + 4γ₃²s₂² + γ₅s₃ + γ₆s₄)
///      − (γ₁s₁)⁻¹(γ₂ + γ₃s₂ + 7γ₃²s₂² + γ₄s₂ + 3γ₅s₃ + 3γ₆s₄)
/// ```
pub fn zeta3<T: Scalar>(gamma: &[T; 6], scales: &ScaleTuple<T>) -> Result<T> {
    check_gamma1(gamma[0])?;
    Ok(zeta3_with(gamma, &scale_features(scales)))
}

fn zeta3_parts<T: Scalar>(g: &[T; 6], f: &ScaleFeatures<T>) -> (T, T, T) {
    let a = g[0] * f.s1;
    let s2sq = f.s2 * f.s2;
    let g3sq = g[2] * g[2];
    let p = T::one() + g[2] * f.s2 + T::lit(4.0) * g3sq * s2sq + g[4] * f.s3 + g[5] * f.s4;
    let q = g[1]
        + g[2] * f.s2
        + T::lit(7.0) * g3sq * s2sq
        + g[3] * f.s2
        + T::lit(3.0) * (g[4] * f.s3 + g[5] * f.s4);
    (a, p, q)
}

fn zeta3_with<T: Scalar>(g: &[T; 6], f: &ScaleFeatures<T>) -> T {
    let (a, p, q) = zeta3_parts(g, f);
    a * p - q / a
}

/// `∂ζ₃/∂γ`.
pub fn zeta3_gradient<T: Scalar>(g: &[T; 6], f: &ScaleFeatures<T>) -> [T; 6] {
    let (a, p, q) = zeta3_parts(g, f);
    let s2sq = f.s2 * f.s2;
    let three = T::lit(3.0);
    [
        f.s1 * p + q / (a * g[0]),
        -a.recip(),
        a * (f.s2 + T::lit(8.0) * g[2] * s2sq) - (f.s2 + T::lit(14.0) * g[2] * s2sq) / a,
        -f.s2 / a,
        a * f.s3 - three * f.s3 / a,
        a * f.s4 - three * f.s4 / a,
    ]
}

/// The surface fitted for a given number of coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FitOrder {
    /// `γ₁..γ₃` on cells with at most two steps, surface `ζ₂`.
    Two,
    /// `γ₁..γ₆` on all cells, surface `ζ₃`.
    Three,
}

impl FitOrder {
    pub fn parameters(self) -> usize {
        match self {
            FitOrder::Two => 3,
            FitOrder::Three => 6,
        }
    }

    pub fn max_steps(self) -> usize {
        match self {
            FitOrder::Two => 2,
            FitOrder::Three => 3,
        }
    }

    pub fn from_parameters(m: usize) -> Result<Self> {
        match m {
            3 => Ok(FitOrder::Two),
            6 => Ok(FitOrder::Three),
            _ => Err(Error::Usage(format!("fit order must be 3 or 6, got {m}"))),
        }
    }
}

/// Surface value and gradient for `order` at `gamma`.
pub fn eval_surface<T: Scalar>(order: FitOrder, gamma: &[T], f: &ScaleFeatures<T>) -> (T, Vec<T>) {
    match order {
        FitOrder::Two => {
            let g = [gamma[0], gamma[1], gamma[2]];
            (zeta2_with(&g, f), zeta2_gradient(&g, f).to_vec())
        }
        FitOrder::Three => {
            let g = [gamma[0], gamma[1], gamma[2], gamma[3], gamma[4], gamma[5]];
            (zeta3_with(&g, f), zeta3_gradient(&g, f).to_vec())
        }
    }
}
