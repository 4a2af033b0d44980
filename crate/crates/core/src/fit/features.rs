use serde::{Deserialize, Serialize};

use crate::resample::ScaleTuple;
use crate::scalar::Scalar;

/// Scale summaries `s₁ … s₄` entering the multistep regression surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleFeatures<T> {
    pub s1: T,
    pub s2: T,
    pub s3: T,
    pub s4: T,
}

/// Evaluates
///
/// ```text
/// s₁ = (τ₁² + τ₂² + τ₃²)^{-1/2}
/// s₂ = (τ₁²τ₂² + τ₂²τ₃² + τ₃²τ₁²) s₁⁴
/// s₃ = (τ₁²τ₂²τ₃² + τ₂⁴τ₃² + τ₁⁴(τ₂² + τ₃²)) s₁⁶
/// s₄ = τ₁²τ₂²τ₃² s₁⁶
/// ```
///
/// with the steps a cell does not have set to zero. A one-step cell gives
/// `(1/τ₁, 0, 0, 0)`; a two-step cell gives the two-step `s₁, s₂`, `s₄ = 0`
/// and `s₃ = τ₁⁴τ₂² s₁⁶`.
pub fn scale_features<T: Scalar>(scales: &ScaleTuple<T>) -> ScaleFeatures<T> {
    let t = scales.taus();
    let sq = |i: usize| t.get(i).map_or(T::zero(), |&x| x * x);
    let (a, b, c) = (sq(0), sq(1), sq(2));
    let s1 = (a + b + c).sqrt().recip();
    let s1_2 = s1 * s1;
    let s1_4 = s1_2 * s1_2;
    let s1_6 = s1_4 * s1_2;
    ScaleFeatures {
        s1,
        s2: (a * b + b * c + c * a) * s1_4,
        s3: (a * b * c + b * b * c + a * a * (b + c)) * s1_6,
        s4: a * b * c * s1_6,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_triple() {
        let f = scale_features(&ScaleTuple::<f64>::new(&[1.0, 1.0, 1.0]).unwrap());
        assert!((f.s1 - 3f64.sqrt().recip()).abs() < 1e-15);
        assert!((f.s2 - 1.0 / 3.0).abs() < 1e-15);
        assert!((f.s3 - 4.0 / 27.0).abs() < 1e-15);
        assert!((f.s4 - 1.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn single_scale() {
        let f = scale_features(&ScaleTuple::<f64>::one(0.8).unwrap());
        assert!((f.s1 - 1.25).abs() < 1e-15);
        assert_eq!((f.s2, f.s3, f.s4), (0.0, 0.0, 0.0));
    }

    #[test]
    fn symmetric_pair() {
        let t = (10.0_f64 / 6.0).sqrt();
        let f = scale_features(&ScaleTuple::<f64>::new(&[t, t]).unwrap());
        assert!((f.s1 - 0.3_f64.sqrt()).abs() < 1e-15);
        assert!((f.s1 - 0.5477).abs() < 1e-4);
        assert!((f.s2 - 0.25).abs() < 1e-15);
        assert_eq!(f.s4, 0.0);
        // s₃ = τ₁⁴τ₂² s₁⁶ = (10/6)³ (3/10)³ = 1/8
        assert!((f.s3 - 0.125).abs() < 1e-15);
    }

    #[test]
    fn pair_features_symmetric_in_order() {
        let a = scale_features(&ScaleTuple::<f64>::new(&[1.3, 0.4]).unwrap());
        let b = scale_features(&ScaleTuple::<f64>::new(&[0.4, 1.3]).unwrap());
        assert!((a.s1 - b.s1).abs() < 1e-15 && (a.s2 - b.s2).abs() < 1e-15);
    }
}
