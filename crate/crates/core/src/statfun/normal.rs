//! Standard normal distribution: CDF, density and quantile.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::gamma::gamma_reg_pq;

/// Standard normal density.
pub fn std_normal_pdf<T: Scalar>(x: T) -> T {
    let inv_sqrt_2pi = T::lit(0.398_942_280_401_432_7);
    inv_sqrt_2pi * (-(x * x) / T::lit(2.0)).exp()
}

/// Standard normal CDF `Φ(x)`.
///
/// Evaluated through `Q(1/2, x²/2)`, which keeps full relative accuracy in
/// the lower tail. Saturates to 0 or 1 far in the tails.
pub fn std_normal_cdf<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x == T::zero() {
        return T::lit(0.5);
    }
    let half = T::lit(0.5);
    let tail = match gamma_reg_pq(half, x * x * half) {
        Ok((_, q)) => half * q,
        // only reached for non-finite x
        Err(_) => T::zero(),
    };
    if x < T::zero() {
        tail
    } else {
        T::one() - tail
    }
}

/// Upper tail `1 − Φ(x)` without cancellation for large `x`.
pub fn std_normal_sf<T: Scalar>(x: T) -> T {
    std_normal_cdf(-x)
}

// Acklam's rational approximation; refined below by Halley steps.
const A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn acklam_lower_half(p: f64) -> f64 {
    const P_LOW: f64 = 0.024_25;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Inverse of the standard normal CDF.
pub fn std_normal_quantile<T: Scalar>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::Domain(format!(
            "normal quantile requires 0 < p < 1, got {p}"
        )));
    }
    let half = T::lit(0.5);
    if p == half {
        return Ok(T::zero());
    }
    if p > half {
        return std_normal_quantile(T::one() - p).map(|x| -x);
    }
    let mut x = T::lit(acklam_lower_half(p.to_f64_lossy()));
    let sqrt_2pi = T::lit(2.506_628_274_631_000_5);
    for _ in 0..3 {
        let err = std_normal_cdf(x) - p;
        let u = err * sqrt_2pi * (x * x * half).exp();
        let step = u / (T::one() + x * u * half);
        x -= step;
        if step.abs() <= T::epsilon() * x.abs() {
            break;
        }
    }
    Ok(x)
}

/// `z = −Φ⁻¹(α)`, the z-value of a probability.
pub fn z_value<T: Scalar>(alpha: T) -> Result<T> {
    std_normal_quantile(alpha).map(|x| -x)
}
